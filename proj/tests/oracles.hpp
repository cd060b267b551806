#pragma once

// Brute-force reference implementations used as test oracles. These are
// written from the definitions with plain loops and deliberately avoid the
// library's helpers (integral images, FFTs, scatter-style voting).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "glyphdesc/image.hpp"

namespace oracle {

inline gd::GrayImage random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  gd::GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img(x, y) = u(rng);
  return img;
}

/// Random image whose values are multiples of 1/256 (exact under small dyadic shifts).
inline gd::GrayImage random_dyadic_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  gd::GrayImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img(x, y) = static_cast<double>(rng() % 256) / 256.0;
  return img;
}

inline double pixel(const gd::GrayImage& img, int x, int y) { return img(x, y); }

inline double naive_dx(const gd::GrayImage& img, int x, int y) {
  const int w = img.width();
  if (x == 0) return img(1, y) - img(0, y);
  if (x == w - 1) return img(w - 1, y) - img(w - 2, y);
  return (img(x + 1, y) - img(x - 1, y)) / 2.0;
}

inline double naive_dy(const gd::GrayImage& img, int x, int y) {
  const int h = img.height();
  if (y == 0) return img(x, 1) - img(x, 0);
  if (y == h - 1) return img(x, h - 1) - img(x, h - 2);
  return (img(x, y + 1) - img(x, y - 1)) / 2.0;
}

inline double naive_orientation(double gx, double gy) {
  double t = std::atan2(gy, gx);
  while (t < 0) t += std::numbers::pi;
  while (t >= std::numbers::pi) t -= std::numbers::pi;
  return t;
}

inline double naive_box_sum(const gd::GrayImage& img, int top, int left, int h, int w) {
  double s = 0.0;
  for (int y = top; y < top + h; ++y)
    for (int x = left; x < left + w; ++x) s += img(x, y);
  return s;
}

inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

/// Direct sliding-window correlation with reflect-101 borders.
inline gd::GrayImage naive_correlate(const gd::GrayImage& img, const gd::Kernel& k) {
  gd::GrayImage out(img.width(), img.height());
  const int rx = k.width / 2;
  const int ry = k.height / 2;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int v = -ry; v <= ry; ++v)
        for (int u = -rx; u <= rx; ++u)
          acc += k(u + rx, v + ry) * img(reflect_index(x + u, img.width()), reflect_index(y + v, img.height()));
      out(x, y) = acc;
    }
  }
  return out;
}

/// Triangular weight of a position on a circle of `period` bins.
inline double circular_tent(double pos, double centre, double period) {
  double d = std::fabs(pos - centre);
  d = std::min(d, period - d);
  return std::max(0.0, 1.0 - d);
}

inline double tent(double pos, double centre) { return std::max(0.0, 1.0 - std::fabs(pos - centre)); }

inline void l2_normalize(std::vector<double>& v, double guard) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  for (double& x : v) x = s < guard ? 0.0 : x / s;
}

/// HOG: for every cell and bin, sum over the cell's pixels of
/// magnitude * tent(orientation distance), then L2-Hys blocks.
inline std::vector<double> naive_hog_cells(const gd::GrayImage& img) {
  const double bw = std::numbers::pi / 9.0;
  std::vector<double> cells(8 * 8 * 9, 0.0);
  for (int cy = 0; cy < 8; ++cy)
    for (int cx = 0; cx < 8; ++cx)
      for (int b = 0; b < 9; ++b) {
        double acc = 0.0;
        for (int y = cy * 8; y < cy * 8 + 8; ++y)
          for (int x = cx * 8; x < cx * 8 + 8; ++x) {
            const double gx = naive_dx(img, x, y);
            const double gy = naive_dy(img, x, y);
            const double m = std::sqrt(gx * gx + gy * gy);
            acc += m * circular_tent(naive_orientation(gx, gy) / bw, b, 9.0);
          }
        cells[static_cast<std::size_t>((cy * 8 + cx) * 9 + b)] = acc;
      }
  return cells;
}

inline std::vector<double> naive_hog(const gd::GrayImage& img) {
  const auto cells = naive_hog_cells(img);
  std::vector<double> out;
  const double eps = 1e-6;
  for (int by = 0; by < 7; ++by)
    for (int bx = 0; bx < 7; ++bx) {
      std::vector<double> block;
      for (int cy = by; cy < by + 2; ++cy)
        for (int cx = bx; cx < bx + 2; ++cx)
          for (int b = 0; b < 9; ++b) block.push_back(cells[static_cast<std::size_t>((cy * 8 + cx) * 9 + b)]);
      for (int pass = 0; pass < 2; ++pass) {
        double s = 0.0;
        for (double x : block) s += x * x;
        const double d = std::sqrt(s + eps * eps);
        for (double& x : block) x /= d;
        if (pass == 0)
          for (double& x : block) x = std::min(x, 0.2);
      }
      out.insert(out.end(), block.begin(), block.end());
    }
  return out;
}

/// SIFT: every output bin gathers from every pixel with separable tent weights.
inline std::vector<double> naive_sift(const gd::GrayImage& img) {
  const double bw = std::numbers::pi / 8.0;
  std::vector<double> out(128, 0.0);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      for (int b = 0; b < 8; ++b) {
        double acc = 0.0;
        for (int y = 0; y < 64; ++y)
          for (int x = 0; x < 64; ++x) {
            const double gx = naive_dx(img, x, y);
            const double gy = naive_dy(img, x, y);
            const double m = std::sqrt(gx * gx + gy * gy);
            const double px = x + 0.5;
            const double py = y + 0.5;
            const double g = std::exp(-((px - 32) * (px - 32) + (py - 32) * (py - 32)) / (2.0 * 32.0 * 32.0));
            const double wr = tent((py - 8.0) / 16.0, r);
            const double wc = tent((px - 8.0) / 16.0, c);
            const double wo = circular_tent(naive_orientation(gx, gy) / bw, b, 8.0);
            acc += m * g * wr * wc * wo;
          }
        out[static_cast<std::size_t>((r * 4 + c) * 8 + b)] = acc;
      }
  l2_normalize(out, 1e-12);
  for (double& x : out) x = std::min(x, 0.2);
  l2_normalize(out, 1e-12);
  return out;
}

inline double clamped(const gd::GrayImage& img, int x, int y) {
  return img(std::clamp(x, 0, img.width() - 1), std::clamp(y, 0, img.height() - 1));
}

/// SURF Haar responses summed pixel by pixel with clamped reads.
inline void naive_haar(const gd::GrayImage& img, int x, int y, double& dx, double& dy) {
  double left = 0, right = 0, top = 0, bottom = 0;
  for (int v = -4; v < 4; ++v)
    for (int u = -4; u < 4; ++u) {
      const double p = clamped(img, x + u, y + v);
      (u < 0 ? left : right) += p;
      (v < 0 ? top : bottom) += p;
    }
  dx = (right - left) / 64.0;
  dy = (bottom - top) / 64.0;
}

/// Unnormalised per-cell (sum dx, sum |dx|, sum dy, sum |dy|).
inline std::vector<double> naive_surf_cells(const gd::GrayImage& img) {
  std::vector<double> out(64, 0.0);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      double dx, dy;
      naive_haar(img, x, y, dx, dy);
      const int cell = (y / 16) * 4 + x / 16;
      out[static_cast<std::size_t>(cell * 4 + 0)] += dx;
      out[static_cast<std::size_t>(cell * 4 + 1)] += std::fabs(dx);
      out[static_cast<std::size_t>(cell * 4 + 2)] += dy;
      out[static_cast<std::size_t>(cell * 4 + 3)] += std::fabs(dy);
    }
  return out;
}

inline std::vector<double> naive_surf(const gd::GrayImage& img) {
  auto v = naive_surf_cells(img);
  l2_normalize(v, 1e-12);
  return v;
}

/// Uniform-LBP histogram with the bin table rebuilt by explicit enumeration.
inline std::vector<double> naive_lbp(const gd::GrayImage& img) {
  std::vector<int> uniform_codes;
  for (int code = 0; code < 256; ++code) {
    int transitions = 0;
    for (int b = 0; b < 8; ++b) {
      const int cur = (code >> b) & 1;
      const int nxt = (code >> ((b + 1) % 8)) & 1;
      transitions += cur != nxt;
    }
    if (transitions <= 2) uniform_codes.push_back(code);
  }
  // clockwise from top-left
  const int nx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
  const int ny[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
  std::vector<double> hist(59, 0.0);
  int count = 0;
  for (int y = 1; y + 1 < img.height(); ++y)
    for (int x = 1; x + 1 < img.width(); ++x) {
      int code = 0;
      for (int b = 0; b < 8; ++b)
        if (img(x + nx[b], y + ny[b]) >= img(x, y)) code += 1 << b;
      const auto it = std::find(uniform_codes.begin(), uniform_codes.end(), code);
      hist[it == uniform_codes.end() ? 58 : static_cast<std::size_t>(it - uniform_codes.begin())] += 1.0;
      ++count;
    }
  for (double& h : hist) h /= count;
  return hist;
}

/// GIST from direct spatial correlation of each bank kernel.
template <typename Bank>
std::vector<double> naive_gist(const gd::GrayImage& img, const Bank& bank) {
  std::vector<double> out;
  for (std::size_t f = 0; f < bank.size(); ++f) {
    const gd::GrayImage resp = naive_correlate(img, bank[f].kernel);
    for (int cy = 0; cy < 4; ++cy)
      for (int cx = 0; cx < 4; ++cx) {
        double acc = 0.0;
        for (int y = cy * 16; y < cy * 16 + 16; ++y)
          for (int x = cx * 16; x < cx * 16 + 16; ++x) acc += std::fabs(resp(x, y));
        out.push_back(acc / 256.0);
      }
  }
  l2_normalize(out, 1e-12);
  return out;
}

}  // namespace oracle
