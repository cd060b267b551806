#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glyphdesc/image.hpp"

namespace gd {

enum class DescriptorKind : std::uint8_t { HOG = 0, SIFT = 1, SURF = 2, LBP = 3, GIST = 4 };

inline constexpr std::array<DescriptorKind, 5> kAllDescriptorKinds{
    DescriptorKind::HOG, DescriptorKind::SIFT, DescriptorKind::SURF, DescriptorKind::LBP, DescriptorKind::GIST};

/// Number of regions in the overlapping pyramid (full window + 3 + 3 strips).
inline constexpr std::size_t kPyramidRegions = 7;

[[nodiscard]] constexpr std::size_t base_dimension(DescriptorKind kind) noexcept {
  switch (kind) {
    case DescriptorKind::HOG: return 1764;
    case DescriptorKind::SIFT: return 128;
    case DescriptorKind::SURF: return 64;
    case DescriptorKind::LBP: return 59;
    case DescriptorKind::GIST: return 512;
  }
  return 0;
}

[[nodiscard]] constexpr std::size_t dimension(DescriptorKind kind, bool pyramid) noexcept {
  return base_dimension(kind) * (pyramid ? kPyramidRegions : 1);
}

[[nodiscard]] std::string_view to_string(DescriptorKind kind) noexcept;
/// Accepts "HOG", "sift", ... (case-insensitive).
[[nodiscard]] std::optional<DescriptorKind> parse_descriptor_kind(std::string_view name);

/// A descriptor variant as it appears in experiment tables: "SIFT" or "SIFT7".
struct DescriptorSpec {
  DescriptorKind kind = DescriptorKind::SIFT;
  bool pyramid = false;

  [[nodiscard]] std::string name() const;
  [[nodiscard]] std::size_t dimension() const noexcept { return gd::dimension(kind, pyramid); }
  friend bool operator==(const DescriptorSpec&, const DescriptorSpec&) = default;
};

[[nodiscard]] std::optional<DescriptorSpec> parse_descriptor_spec(std::string_view name);

/// Fixed-length feature vector. The constructor enforces the dimension
/// contract, finiteness, and non-negativity for HOG/SIFT/LBP.
class Descriptor {
 public:
  Descriptor(DescriptorKind kind, bool pyramid, std::vector<double> values);

  [[nodiscard]] DescriptorKind kind() const noexcept { return kind_; }
  [[nodiscard]] bool pyramid() const noexcept { return pyramid_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

 private:
  DescriptorKind kind_;
  bool pyramid_;
  std::vector<double> values_;
};

/// All descriptor geometry in one place. Values are sized for the 64x64 window.
struct DescriptorConfig {
  // HOG
  int hog_cell = 8;
  int hog_bins = 9;
  int hog_block = 2;
  double hog_eps = 1e-6;
  double hog_clip = 0.2;
  // SIFT (whole window as one keypoint region)
  int sift_grid = 4;
  int sift_bins = 8;
  double sift_sigma = 32.0;
  double sift_clip = 0.2;
  // SURF
  int surf_grid = 4;
  int surf_haar = 8;
  // GIST
  int gist_grid = 4;
  std::array<double, 4> gist_wavelengths{4.0, 8.0, 16.0, 32.0};
  int gist_orientations = 8;
  double gist_sigma_per_wavelength = 0.5;
  double gist_aspect = 1.0;
  // Shared normalisation guard.
  double zero_norm = 1e-12;
};

inline constexpr DescriptorConfig kDescriptorConfig{};

struct GaborFilter {
  double wavelength = 0.0;
  double orientation = 0.0;  // radians in [0, pi)
  double sigma = 0.0;
  double aspect = 1.0;
  Kernel kernel;
};

namespace detail {
struct GaborSpectra;
}

/// 4 scales x 8 orientations of zero-mean cosine Gabor kernels, filter index
/// = scale * 8 + orientation. Immutable; share one instance across threads.
class GaborBank {
 public:
  explicit GaborBank(std::vector<GaborFilter> filters);
  ~GaborBank();
  GaborBank(const GaborBank&);
  GaborBank& operator=(const GaborBank&);
  GaborBank(GaborBank&&) noexcept;
  GaborBank& operator=(GaborBank&&) noexcept;

  [[nodiscard]] std::span<const GaborFilter> filters() const noexcept { return filters_; }
  [[nodiscard]] std::size_t size() const noexcept { return filters_.size(); }
  [[nodiscard]] const GaborFilter& operator[](std::size_t i) const noexcept { return filters_[i]; }

  /// Per-filter responses on a 64x64 window (FFT path, reflect-101 borders).
  [[nodiscard]] std::vector<GrayImage> responses(const GrayImage& window) const;

 private:
  std::vector<GaborFilter> filters_;
  std::shared_ptr<const detail::GaborSpectra> spectra_;
};

[[nodiscard]] Kernel make_gabor_kernel(double wavelength, double orientation, double sigma, double aspect);
[[nodiscard]] GaborBank make_gabor_bank();
/// Process-wide bank built on first use.
[[nodiscard]] const GaborBank& default_gabor_bank();

/// Unnormalised HOG cell histograms, layout (cell_y, cell_x, bin); 8*8*9 values.
[[nodiscard]] std::vector<double> hog_cell_histograms(const GrayImage& window);

/// Haar responses of the SURF stage, one value per pixel (row-major).
struct HaarResponses {
  std::vector<double> dx;
  std::vector<double> dy;
};
[[nodiscard]] HaarResponses surf_haar_responses(const GrayImage& window);

/// 8-neighbour code at an interior pixel; bit 0 is the top-left neighbour,
/// continuing clockwise. A bit is set when neighbour >= centre.
[[nodiscard]] std::uint8_t lbp_code(const GrayImage& img, int x, int y) noexcept;
/// Histogram bin of a code: uniform codes (<= 2 circular transitions) take
/// bins 0..57 in increasing code order, all others share bin 58.
[[nodiscard]] int uniform_lbp_bin(std::uint8_t code) noexcept;

[[nodiscard]] Descriptor hog(const GrayImage& window);
[[nodiscard]] Descriptor sift_global(const GrayImage& window);
[[nodiscard]] Descriptor surf_global(const GrayImage& window);
[[nodiscard]] Descriptor lbp(const GrayImage& img);
[[nodiscard]] Descriptor gist(const GrayImage& window, const GaborBank& bank);

/// Resizes to the canonical window when needed and dispatches on kind.
[[nodiscard]] Descriptor describe(const GrayImage& img, DescriptorKind kind);

}  // namespace gd
