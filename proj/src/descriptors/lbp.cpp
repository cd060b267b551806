#include <array>
#include <bit>

#include "glyphdesc/descriptors.hpp"
#include "glyphdesc/error.hpp"

namespace gd {

namespace {

constexpr int kNonUniformBin = 58;

constexpr std::array<int, 256> make_uniform_table() {
  std::array<int, 256> table{};
  int next = 0;
  for (int code = 0; code < 256; ++code) {
    const auto c = static_cast<std::uint8_t>(code);
    const auto rotated = static_cast<std::uint8_t>((c >> 1) | (c << 7));
    const int transitions = std::popcount(static_cast<unsigned>(c ^ rotated));
    table[static_cast<std::size_t>(code)] = transitions <= 2 ? next++ : kNonUniformBin;
  }
  return table;
}

constexpr std::array<int, 256> kUniformTable = make_uniform_table();

}  // namespace

std::uint8_t lbp_code(const GrayImage& img, int x, int y) noexcept {
  static constexpr std::array<int, 8> dx{-1, 0, 1, 1, 1, 0, -1, -1};
  static constexpr std::array<int, 8> dy{-1, -1, -1, 0, 1, 1, 1, 0};
  const double centre = img(x, y);
  unsigned code = 0;
  for (unsigned b = 0; b < 8; ++b) {
    if (img(x + dx[b], y + dy[b]) >= centre) code |= 1u << b;
  }
  return static_cast<std::uint8_t>(code);
}

int uniform_lbp_bin(std::uint8_t code) noexcept { return kUniformTable[code]; }

Descriptor lbp(const GrayImage& img) {
  if (img.width() < 3 || img.height() < 3) {
    throw Error(ErrorCode::ImageTooSmall, "lbp needs at least 3x3 pixels");
  }
  std::vector<double> hist(base_dimension(DescriptorKind::LBP), 0.0);
  for (int y = 1; y < img.height() - 1; ++y) {
    for (int x = 1; x < img.width() - 1; ++x) {
      hist[static_cast<std::size_t>(uniform_lbp_bin(lbp_code(img, x, y)))] += 1.0;
    }
  }
  const double total = static_cast<double>((img.width() - 2) * (img.height() - 2));
  for (double& h : hist) h /= total;
  return Descriptor(DescriptorKind::LBP, false, std::move(hist));
}

}  // namespace gd
