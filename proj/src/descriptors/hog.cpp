#include <algorithm>
#include <cmath>
#include <numbers>

#include "glyphdesc/descriptors.hpp"
#include "internal.hpp"

namespace gd {

std::vector<double> hog_cell_histograms(const GrayImage& window) {
  detail::require_window(window, "hog");
  constexpr auto& cfg = kDescriptorConfig;
  const int cells = kWindowSize / cfg.hog_cell;
  const double bin_width = std::numbers::pi / cfg.hog_bins;
  const GradientField g = gradients(window);

  std::vector<double> hist(static_cast<std::size_t>(cells * cells * cfg.hog_bins), 0.0);
  for (int y = 0; y < kWindowSize; ++y) {
    for (int x = 0; x < kWindowSize; ++x) {
      const auto p = static_cast<std::size_t>(y * kWindowSize + x);
      const double mag = g.magnitude[p];
      if (mag == 0.0) continue;
      // Bin b is centred on b * bin_width; votes split linearly between the
      // two nearest centres, wrapping at pi.
      const double t = g.orientation[p] / bin_width;
      int b0 = static_cast<int>(std::floor(t));
      const double frac = t - b0;
      b0 %= cfg.hog_bins;
      const int b1 = (b0 + 1) % cfg.hog_bins;
      const int cell = (y / cfg.hog_cell) * cells + (x / cfg.hog_cell);
      double* h = &hist[static_cast<std::size_t>(cell * cfg.hog_bins)];
      h[b0] += mag * (1.0 - frac);
      h[b1] += mag * frac;
    }
  }
  return hist;
}

Descriptor hog(const GrayImage& window) {
  constexpr auto& cfg = kDescriptorConfig;
  const std::vector<double> hist = hog_cell_histograms(window);
  const int cells = kWindowSize / cfg.hog_cell;
  const int blocks = cells - cfg.hog_block + 1;
  const auto block_len = static_cast<std::size_t>(cfg.hog_block * cfg.hog_block * cfg.hog_bins);

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(blocks * blocks) * block_len);
  std::vector<double> block(block_len);

  auto normalize = [&](std::vector<double>& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double denom = std::sqrt(sq + cfg.hog_eps * cfg.hog_eps);
    for (double& x : v) x /= denom;
  };

  for (int by = 0; by < blocks; ++by) {
    for (int bx = 0; bx < blocks; ++bx) {
      std::size_t k = 0;
      for (int cy = by; cy < by + cfg.hog_block; ++cy) {
        for (int cx = bx; cx < bx + cfg.hog_block; ++cx) {
          const double* h = &hist[static_cast<std::size_t>((cy * cells + cx) * cfg.hog_bins)];
          for (int b = 0; b < cfg.hog_bins; ++b) block[k++] = h[b];
        }
      }
      normalize(block);
      for (double& x : block) x = std::min(x, cfg.hog_clip);
      normalize(block);
      out.insert(out.end(), block.begin(), block.end());
    }
  }
  return Descriptor(DescriptorKind::HOG, false, std::move(out));
}

}  // namespace gd
