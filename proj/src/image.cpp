#include "glyphdesc/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "glyphdesc/error.hpp"

namespace gd {

GrayImage::GrayImage(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidImage, "image dimensions must be positive");
  }
  if (!std::isfinite(fill)) {
    throw Error(ErrorCode::InvalidImage, "non-finite fill value");
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidImage, "image dimensions must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::InvalidImage, "pixel buffer does not match " + std::to_string(width) + "x" +
                                             std::to_string(height));
  }
  if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
    throw Error(ErrorCode::InvalidImage, "non-finite intensity");
  }
}

GrayImage GrayImage::crop(int left, int top, int w, int h) const {
  if (left < 0 || top < 0 || w < 1 || h < 1 || left + w > width_ || top + h > height_) {
    throw Error(ErrorCode::RectOutOfBounds, "crop window leaves the image");
  }
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out(x, y) = (*this)(left + x, top + y);
    }
  }
  return out;
}

double GrayImage::min_value() const { return *std::min_element(data_.begin(), data_.end()); }
double GrayImage::max_value() const { return *std::max_element(data_.begin(), data_.end()); }

GradientField gradients(const GrayImage& img) {
  const int w = img.width();
  const int h = img.height();
  if (w < 3 || h < 3) {
    throw Error(ErrorCode::ImageTooSmall, "gradients need at least 3x3 pixels");
  }
  GradientField g;
  g.width = w;
  g.height = h;
  const auto n = img.size();
  g.gx.resize(n);
  g.gy.resize(n);
  g.magnitude.resize(n);
  g.orientation.resize(n);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double dx;
      if (x == 0) {
        dx = img(1, y) - img(0, y);
      } else if (x == w - 1) {
        dx = img(w - 1, y) - img(w - 2, y);
      } else {
        dx = 0.5 * (img(x + 1, y) - img(x - 1, y));
      }
      double dy;
      if (y == 0) {
        dy = img(x, 1) - img(x, 0);
      } else if (y == h - 1) {
        dy = img(x, h - 1) - img(x, h - 2);
      } else {
        dy = 0.5 * (img(x, y + 1) - img(x, y - 1));
      }
      const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      g.gx[i] = dx;
      g.gy[i] = dy;
      g.magnitude[i] = std::sqrt(dx * dx + dy * dy);
      double theta = std::atan2(dy, dx);
      if (theta < 0.0) theta += std::numbers::pi;
      if (theta >= std::numbers::pi) theta -= std::numbers::pi;
      g.orientation[i] = theta;
    }
  }
  return g;
}

IntegralImage::IntegralImage(const GrayImage& img) : width_(img.width()), height_(img.height()) {
  const auto stride = static_cast<std::size_t>(width_ + 1);
  table_.assign(stride * static_cast<std::size_t>(height_ + 1), 0.0);
  for (int i = 1; i <= height_; ++i) {
    for (int j = 1; j <= width_; ++j) {
      table_[static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(j)] =
          img(j - 1, i - 1) + at(i - 1, j) + at(i, j - 1) - at(i - 1, j - 1);
    }
  }
}

IntegralImage integral_image(const GrayImage& img) { return IntegralImage(img); }

double box_sum(const IntegralImage& ii, const Rect& r) {
  if (r.top < 0 || r.left < 0 || r.height < 0 || r.width < 0 || r.top + r.height > ii.height() ||
      r.left + r.width > ii.width()) {
    throw Error(ErrorCode::RectOutOfBounds, "box outside integral image");
  }
  const int b = r.top + r.height;
  const int rt = r.left + r.width;
  return ii.at(b, rt) - ii.at(r.top, rt) - ii.at(b, r.left) + ii.at(r.top, r.left);
}

GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidArgument, "target size must be positive");
  }
  const int sw = img.width();
  const int sh = img.height();
  const double sx = static_cast<double>(sw) / width;
  const double sy = static_cast<double>(sh) / height;
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(sh - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, sh - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(sw - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, sw - 1);
      const double wx = fx - x0;
      const double top = img(x0, y0) * (1.0 - wx) + img(x1, y0) * wx;
      const double bottom = img(x0, y1) * (1.0 - wx) + img(x1, y1) * wx;
      double v = top * (1.0 - wy) + bottom * wy;
      // Rounding in the blend can overshoot a flat neighbourhood by one ulp.
      v = std::clamp(v, std::min({img(x0, y0), img(x1, y0), img(x0, y1), img(x1, y1)}),
                     std::max({img(x0, y0), img(x1, y0), img(x0, y1), img(x1, y1)}));
      out(x, y) = v;
    }
  }
  return out;
}

double Kernel::sum() const noexcept {
  double s = 0.0;
  for (double t : taps) s += t;
  return s;
}

int reflect101(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

GrayImage convolve(const GrayImage& img, const Kernel& k) {
  if (k.width % 2 == 0 || k.height % 2 == 0) {
    throw Error(ErrorCode::EvenKernel, "kernel dimensions must be odd");
  }
  if (k.taps.size() != static_cast<std::size_t>(k.width) * static_cast<std::size_t>(k.height)) {
    throw Error(ErrorCode::InvalidArgument, "kernel tap count does not match its size");
  }
  const int w = img.width();
  const int h = img.height();
  const int rx = k.width / 2;
  const int ry = k.height / 2;

  std::vector<int> xmap(static_cast<std::size_t>(w + 2 * rx));
  for (int i = 0; i < w + 2 * rx; ++i) xmap[static_cast<std::size_t>(i)] = reflect101(i - rx, w);
  std::vector<int> ymap(static_cast<std::size_t>(h + 2 * ry));
  for (int i = 0; i < h + 2 * ry; ++i) ymap[static_cast<std::size_t>(i)] = reflect101(i - ry, h);

  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int v = 0; v < k.height; ++v) {
        const int sy = ymap[static_cast<std::size_t>(y + v)];
        for (int u = 0; u < k.width; ++u) {
          acc += k(u, v) * img(xmap[static_cast<std::size_t>(x + u)], sy);
        }
      }
      out(x, y) = acc;
    }
  }
  return out;
}

std::vector<double> gaussian_taps(double sigma) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& t : taps) t /= total;
  return taps;
}

namespace {

double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

}  // namespace

Homography::Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Homography::Homography(const std::array<double, 9>& m) : m_(m) {
  if (!std::all_of(m.begin(), m.end(), [](double v) { return std::isfinite(v); }) || std::abs(m[8]) < 1e-300) {
    throw Error(ErrorCode::SingularHomography, "cannot normalise homography");
  }
  const double s = m[8];
  for (double& v : m_) v /= s;
  m_[8] = 1.0;
  if (std::abs(det3(m_)) <= 1e-12) {
    throw Error(ErrorCode::SingularHomography, "determinant too small");
  }
}

Homography Homography::translation(double dx, double dy) { return Homography({1, 0, dx, 0, 1, dy, 0, 0, 1}); }

double Homography::determinant() const noexcept { return det3(m_); }

Homography Homography::inverse() const {
  const auto& m = m_;
  const double det = det3(m);
  std::array<double, 9> inv{
      (m[4] * m[8] - m[5] * m[7]) / det, (m[2] * m[7] - m[1] * m[8]) / det, (m[1] * m[5] - m[2] * m[4]) / det,
      (m[5] * m[6] - m[3] * m[8]) / det, (m[0] * m[8] - m[2] * m[6]) / det, (m[2] * m[3] - m[0] * m[5]) / det,
      (m[3] * m[7] - m[4] * m[6]) / det, (m[1] * m[6] - m[0] * m[7]) / det, (m[0] * m[4] - m[1] * m[3]) / det,
  };
  return Homography(inv);
}

Point2 Homography::apply(Point2 p) const noexcept {
  const double w = m_[6] * p.x + m_[7] * p.y + m_[8];
  return {(m_[0] * p.x + m_[1] * p.y + m_[2]) / w, (m_[3] * p.x + m_[4] * p.y + m_[5]) / w};
}

Homography operator*(const Homography& a, const Homography& b) {
  std::array<double, 9> c{};
  for (int r = 0; r < 3; ++r) {
    for (int col = 0; col < 3; ++col) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(r, k) * b(k, col);
      c[static_cast<std::size_t>(r * 3 + col)] = s;
    }
  }
  return Homography(c);
}

double sample_bilinear_white(const GrayImage& img, double x, double y) noexcept {
  if (!(x > -1.0 && y > -1.0 && x < img.width() && y < img.height())) return 1.0;
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double wx = x - x0;
  const double wy = y - y0;
  auto px = [&](int xi, int yi) {
    if (xi < 0 || yi < 0 || xi >= img.width() || yi >= img.height()) return 1.0;
    return img(xi, yi);
  };
  // Zero weights skip the neighbour so integer coordinates reproduce pixels exactly.
  double top = px(x0, y0);
  if (wx != 0.0) top = top * (1.0 - wx) + px(x0 + 1, y0) * wx;
  if (wy == 0.0) return top;
  double bottom = px(x0, y0 + 1);
  if (wx != 0.0) bottom = bottom * (1.0 - wx) + px(x0 + 1, y0 + 1) * wx;
  return top * (1.0 - wy) + bottom * wy;
}

GrayImage warp_projective(const GrayImage& img, const Homography& h, int out_width, int out_height) {
  if (out_width < 1 || out_height < 1) {
    throw Error(ErrorCode::InvalidArgument, "output size must be positive");
  }
  const Homography inv = h.inverse();
  GrayImage out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      const Point2 src = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      out(x, y) = sample_bilinear_white(img, src.x, src.y);
    }
  }
  return out;
}

}  // namespace gd
