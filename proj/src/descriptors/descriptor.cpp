#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "glyphdesc/descriptors.hpp"
#include "glyphdesc/error.hpp"

namespace gd {

std::string_view to_string(DescriptorKind kind) noexcept {
  switch (kind) {
    case DescriptorKind::HOG: return "HOG";
    case DescriptorKind::SIFT: return "SIFT";
    case DescriptorKind::SURF: return "SURF";
    case DescriptorKind::LBP: return "LBP";
    case DescriptorKind::GIST: return "GIST";
  }
  return "?";
}

std::optional<DescriptorKind> parse_descriptor_kind(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  for (DescriptorKind k : kAllDescriptorKinds) {
    if (upper == to_string(k)) return k;
  }
  return std::nullopt;
}

std::string DescriptorSpec::name() const { return std::string(to_string(kind)) + (pyramid ? "7" : ""); }

std::optional<DescriptorSpec> parse_descriptor_spec(std::string_view name) {
  bool pyramid = false;
  if (!name.empty() && name.back() == '7') {
    pyramid = true;
    name.remove_suffix(1);
  }
  if (auto kind = parse_descriptor_kind(name)) return DescriptorSpec{*kind, pyramid};
  return std::nullopt;
}

Descriptor::Descriptor(DescriptorKind kind, bool pyramid, std::vector<double> values)
    : kind_(kind), pyramid_(pyramid), values_(std::move(values)) {
  const std::size_t expected = dimension(kind, pyramid);
  if (values_.size() != expected) {
    throw Error(ErrorCode::DimensionMismatch, std::string(to_string(kind)) + (pyramid ? "7" : "") + " expects " +
                                                  std::to_string(expected) + " values, got " +
                                                  std::to_string(values_.size()));
  }
  const bool nonneg = kind == DescriptorKind::HOG || kind == DescriptorKind::SIFT || kind == DescriptorKind::LBP;
  for (double v : values_) {
    if (!std::isfinite(v) || (nonneg && v < 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "descriptor value out of domain");
    }
  }
}

Descriptor describe(const GrayImage& img, DescriptorKind kind) {
  const GrayImage window = (img.width() == kWindowSize && img.height() == kWindowSize)
                               ? img
                               : resize_bilinear(img, kWindowSize, kWindowSize);
  switch (kind) {
    case DescriptorKind::HOG: return hog(window);
    case DescriptorKind::SIFT: return sift_global(window);
    case DescriptorKind::SURF: return surf_global(window);
    case DescriptorKind::LBP: return lbp(window);
    case DescriptorKind::GIST: return gist(window, default_gabor_bank());
  }
  throw Error(ErrorCode::InvalidArgument, "unknown descriptor kind");
}

namespace detail {

void require_window(const GrayImage& img, std::string_view who) {
  if (img.width() != kWindowSize || img.height() != kWindowSize) {
    throw Error(ErrorCode::WrongWindowSize, std::string(who) + " expects a 64x64 window, got " +
                                                std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
}

}  // namespace detail

}  // namespace gd
