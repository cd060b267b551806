#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace gd {

/// Side length of the canonical character window every descriptor consumes.
inline constexpr int kWindowSize = 64;

/// Row-major grayscale raster. Intensities are nominally in [0, 1] but any
/// finite value is accepted (filter responses reuse this type).
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  /// Throws InvalidImage if the size does not match or a value is not finite.
  GrayImage(int width, int height, std::vector<double> data);

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

  double operator()(int x, int y) const noexcept { return data_[index(x, y)]; }
  double& operator()(int x, int y) noexcept { return data_[index(x, y)]; }

  [[nodiscard]] std::span<const double> pixels() const noexcept { return data_; }
  [[nodiscard]] std::span<double> pixels() noexcept { return data_; }

  /// Copy of the sub-window [left, left+w) x [top, top+h).
  [[nodiscard]] GrayImage crop(int left, int top, int w, int h) const;

  [[nodiscard]] double min_value() const;
  [[nodiscard]] double max_value() const;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  [[nodiscard]] std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Per-pixel derivatives. Orientation is unsigned, folded into [0, pi).
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> gx;
  std::vector<double> gy;
  std::vector<double> magnitude;
  std::vector<double> orientation;
};

/// Central differences (I[x+1] - I[x-1]) / 2 inside, one-sided I[1]-I[0]
/// style differences on the border rows/columns.
[[nodiscard]] GradientField gradients(const GrayImage& img);

/// Summed-area table of size (height+1) x (width+1); row 0 and column 0 are zero.
class IntegralImage {
 public:
  explicit IntegralImage(const GrayImage& img);

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  /// Sum of pixels with row < i and col < j.
  [[nodiscard]] double at(int i, int j) const noexcept {
    return table_[static_cast<std::size_t>(i) * static_cast<std::size_t>(width_ + 1) + static_cast<std::size_t>(j)];
  }

 private:
  int width_;
  int height_;
  std::vector<double> table_;
};

struct Rect {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;

  friend bool operator==(const Rect&, const Rect&) = default;
};

[[nodiscard]] IntegralImage integral_image(const GrayImage& img);

/// Throws RectOutOfBounds when the rectangle leaves the image.
[[nodiscard]] double box_sum(const IntegralImage& ii, const Rect& rect);

/// Half-pixel-centred bilinear resampling; source coordinates are clamped to
/// the image so the output stays within [min, max] of the input.
[[nodiscard]] GrayImage resize_bilinear(const GrayImage& img, int width, int height);

/// Odd-sized 2-D filter taps, row-major, anchored at the centre.
struct Kernel {
  int width = 1;
  int height = 1;
  std::vector<double> taps{1.0};

  [[nodiscard]] double operator()(int x, int y) const noexcept {
    return taps[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
  }
  [[nodiscard]] double sum() const noexcept;
};

/// Reflect-101 index mapping (…2 1 | 0 1 2 … n-1 | n-2 …) for any integer.
[[nodiscard]] int reflect101(int i, int n) noexcept;

/// Correlation with reflect-101 borders. Throws EvenKernel.
[[nodiscard]] GrayImage convolve(const GrayImage& img, const Kernel& kernel);

/// Normalised 1-D Gaussian taps with radius ceil(3 sigma).
[[nodiscard]] std::vector<double> gaussian_taps(double sigma);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// 3x3 projective transform, stored row-major and scaled so that H[2][2] = 1.
class Homography {
 public:
  Homography();  // identity
  /// Throws SingularHomography when |det| <= 1e-12 or H[2][2] ~ 0.
  explicit Homography(const std::array<double, 9>& m);

  [[nodiscard]] static Homography translation(double dx, double dy);

  [[nodiscard]] double operator()(int row, int col) const noexcept { return m_[static_cast<std::size_t>(row * 3 + col)]; }
  [[nodiscard]] const std::array<double, 9>& matrix() const noexcept { return m_; }
  [[nodiscard]] double determinant() const noexcept;
  [[nodiscard]] Homography inverse() const;
  [[nodiscard]] Point2 apply(Point2 p) const noexcept;

  friend Homography operator*(const Homography& a, const Homography& b);

 private:
  std::array<double, 9> m_;
};

/// Bilinear sample with everything outside the source treated as white (1.0).
[[nodiscard]] double sample_bilinear_white(const GrayImage& img, double x, double y) noexcept;

/// Renders img through H (source -> destination) by inverse mapping.
/// Destination pixels whose preimage falls outside the source are white.
[[nodiscard]] GrayImage warp_projective(const GrayImage& img, const Homography& h, int out_width, int out_height);

}  // namespace gd
