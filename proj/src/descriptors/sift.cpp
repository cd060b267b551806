#include <algorithm>
#include <cmath>
#include <numbers>

#include "glyphdesc/descriptors.hpp"
#include "internal.hpp"

namespace gd {

// The whole window is treated as a single keypoint patch: no detection, no
// dominant-orientation assignment. Votes are shared trilinearly over the
// spatial grid and the orientation bins.
Descriptor sift_global(const GrayImage& window) {
  detail::require_window(window, "sift_global");
  constexpr auto& cfg = kDescriptorConfig;
  const int grid = cfg.sift_grid;
  const int bins = cfg.sift_bins;
  const double cell = static_cast<double>(kWindowSize) / grid;
  const double bin_width = std::numbers::pi / bins;
  const double centre = 0.5 * kWindowSize;
  const double inv_two_sigma_sq = 1.0 / (2.0 * cfg.sift_sigma * cfg.sift_sigma);
  const GradientField g = gradients(window);

  std::vector<double> hist(static_cast<std::size_t>(grid * grid * bins), 0.0);
  for (int y = 0; y < kWindowSize; ++y) {
    const double py = y + 0.5;
    const double v = py / cell - 0.5;
    const int r0 = static_cast<int>(std::floor(v));
    const double fr = v - r0;
    for (int x = 0; x < kWindowSize; ++x) {
      const auto p = static_cast<std::size_t>(y * kWindowSize + x);
      const double mag = g.magnitude[p];
      if (mag == 0.0) continue;
      const double px = x + 0.5;
      const double weight =
          mag * std::exp(-((px - centre) * (px - centre) + (py - centre) * (py - centre)) * inv_two_sigma_sq);

      const double u = px / cell - 0.5;
      const int c0 = static_cast<int>(std::floor(u));
      const double fc = u - c0;

      const double t = g.orientation[p] / bin_width;
      int o0 = static_cast<int>(std::floor(t));
      const double fo = t - o0;
      o0 %= bins;
      const int o1 = (o0 + 1) % bins;

      for (int dr = 0; dr < 2; ++dr) {
        const int r = r0 + dr;
        if (r < 0 || r >= grid) continue;
        const double wr = dr == 0 ? 1.0 - fr : fr;
        for (int dc = 0; dc < 2; ++dc) {
          const int c = c0 + dc;
          if (c < 0 || c >= grid) continue;
          const double wc = dc == 0 ? 1.0 - fc : fc;
          double* h = &hist[static_cast<std::size_t>((r * grid + c) * bins)];
          const double w = weight * wr * wc;
          h[o0] += w * (1.0 - fo);
          h[o1] += w * fo;
        }
      }
    }
  }

  detail::l2_normalize(hist, cfg.zero_norm);
  for (double& x : hist) x = std::min(x, cfg.sift_clip);
  detail::l2_normalize(hist, cfg.zero_norm);
  return Descriptor(DescriptorKind::SIFT, false, std::move(hist));
}

}  // namespace gd
