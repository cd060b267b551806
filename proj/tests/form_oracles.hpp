#pragma once

// Brute-force references for the form pipeline. Nothing here calls the
// library's own filtering, labelling or thresholding code.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "glyphdesc/image.hpp"

namespace oracle {

inline int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

/// Harris map written out per pixel: explicit derivatives, an explicit 2-D
/// Gaussian window (radius ceil(3 sigma), reflect-101), det - k trace^2.
inline std::vector<double> naive_harris(const gd::GrayImage& img, double k, double sigma) {
  const int w = img.width();
  const int h = img.height();
  auto dx = [&](int x, int y) {
    if (w == 1) return 0.0;
    if (x == 0) return img(1, y) - img(0, y);
    if (x == w - 1) return img(w - 1, y) - img(w - 2, y);
    return (img(x + 1, y) - img(x - 1, y)) / 2.0;
  };
  auto dy = [&](int x, int y) {
    if (h == 1) return 0.0;
    if (y == 0) return img(x, 1) - img(x, 0);
    if (y == h - 1) return img(x, h - 1) - img(x, h - 2);
    return (img(x, y + 1) - img(x, y - 1)) / 2.0;
  };
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> g1(static_cast<std::size_t>(2 * r + 1));
  for (int i = -r; i <= r; ++i) g1[static_cast<std::size_t>(i + r)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  const double norm = std::accumulate(g1.begin(), g1.end(), 0.0);
  for (double& v : g1) v /= norm;

  std::vector<double> out(static_cast<std::size_t>(w * h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double a = 0.0;
      double b = 0.0;
      double c = 0.0;
      for (int v = -r; v <= r; ++v)
        for (int u = -r; u <= r; ++u) {
          const double wgt = g1[static_cast<std::size_t>(u + r)] * g1[static_cast<std::size_t>(v + r)];
          const int sx = reflect(x + u, w);
          const int sy = reflect(y + v, h);
          const double ix = dx(sx, sy);
          const double iy = dy(sx, sy);
          a += wgt * ix * ix;
          b += wgt * iy * iy;
          c += wgt * ix * iy;
        }
      out[static_cast<std::size_t>(y * w + x)] = a * b - c * c - k * (a + b) * (a + b);
    }
  return out;
}

/// Pixels strictly above threshold whose value beats every 8-neighbour that
/// precedes them in scan order and is not beaten by any that follows.
inline std::vector<std::pair<int, int>> naive_peaks(const std::vector<double>& r, int w, int h, double threshold) {
  std::vector<std::pair<int, int>> out;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = r[static_cast<std::size_t>(y * w + x)];
      if (!(v > threshold)) continue;
      bool ok = true;
      for (int j = std::max(0, y - 1); j <= std::min(h - 1, y + 1); ++j)
        for (int i = std::max(0, x - 1); i <= std::min(w - 1, x + 1); ++i) {
          if (i == x && j == y) continue;
          const double n = r[static_cast<std::size_t>(j * w + i)];
          const bool before = j * w + i < y * w + x;
          if ((before && n >= v) || (!before && n > v)) ok = false;
        }
      if (ok) out.emplace_back(x, y);
    }
  return out;
}

/// Union-find labelling of 8-connected foreground; returns sorted component sizes.
inline std::vector<int> union_find_components(const std::vector<std::uint8_t>& mask, int w, int h) {
  std::vector<int> parent(mask.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
    return a;
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask[static_cast<std::size_t>(y * w + x)]) continue;
      for (int j = y - 1; j <= y + 1; ++j)
        for (int i = x - 1; i <= x + 1; ++i) {
          if (i < 0 || j < 0 || i >= w || j >= h || !mask[static_cast<std::size_t>(j * w + i)]) continue;
          parent[static_cast<std::size_t>(find(j * w + i))] = find(y * w + x);
        }
    }
  std::vector<int> count(mask.size(), 0);
  for (int p = 0; p < w * h; ++p)
    if (mask[static_cast<std::size_t>(p)]) ++count[static_cast<std::size_t>(find(p))];
  std::vector<int> sizes;
  for (int c : count)
    if (c > 0) sizes.push_back(c);
  std::sort(sizes.begin(), sizes.end());
  return sizes;
}

/// Otsu by trying every cut on the raw pixel list (no histogram): returns
/// the number of pixels on the dark side of the best cut between 256ths.
inline std::size_t otsu_dark_count(const gd::GrayImage& img) {
  std::vector<int> bins;
  for (double v : img.pixels()) bins.push_back(std::clamp(static_cast<int>(std::floor(v * 256.0)), 0, 255));
  double best = -1.0;
  std::size_t best_count = 0;
  for (int t = 0; t < 255; ++t) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (int b : bins) {
      if (b <= t) {
        n0 += 1;
        s0 += b;
      } else {
        n1 += 1;
        s1 += b;
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double between = n0 * n1 * std::pow(s0 / n0 - s1 / n1, 2);
    if (between > best) {
      best = between;
      best_count = static_cast<std::size_t>(n0);
    }
  }
  return best_count;
}

}  // namespace oracle
