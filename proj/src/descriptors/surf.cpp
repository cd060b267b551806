#include <algorithm>
#include <cmath>

#include "glyphdesc/descriptors.hpp"
#include "internal.hpp"

namespace gd {

HaarResponses surf_haar_responses(const GrayImage& window) {
  detail::require_window(window, "surf_global");
  const int half = kDescriptorConfig.surf_haar / 2;
  const int size = kDescriptorConfig.surf_haar;
  const double area = static_cast<double>(size * size);

  // Replicate-padded copy so every pixel gets a full-size filter. Shifting by
  // the minimum keeps the integral table small, so flat windows give exact zeros.
  const double base = window.min_value();
  const int pw = kWindowSize + 2 * half;
  GrayImage padded(pw, pw);
  for (int y = 0; y < pw; ++y) {
    const int sy = std::clamp(y - half, 0, kWindowSize - 1);
    for (int x = 0; x < pw; ++x) {
      padded(x, y) = window(std::clamp(x - half, 0, kWindowSize - 1), sy) - base;
    }
  }
  const IntegralImage ii(padded);

  HaarResponses out;
  out.dx.resize(static_cast<std::size_t>(kWindowSize * kWindowSize));
  out.dy.resize(out.dx.size());
  for (int y = 0; y < kWindowSize; ++y) {
    for (int x = 0; x < kWindowSize; ++x) {
      // Pixel (x, y) sits at (x + half, y + half) in the padded image.
      const int top = y;
      const int left = x;
      const double left_half = box_sum(ii, Rect{top, left, size, half});
      const double right_half = box_sum(ii, Rect{top, left + half, size, half});
      const double top_half = box_sum(ii, Rect{top, left, half, size});
      const double bottom_half = box_sum(ii, Rect{top + half, left, half, size});
      const auto p = static_cast<std::size_t>(y * kWindowSize + x);
      out.dx[p] = (right_half - left_half) / area;
      out.dy[p] = (bottom_half - top_half) / area;
    }
  }
  return out;
}

Descriptor surf_global(const GrayImage& window) {
  const HaarResponses r = surf_haar_responses(window);
  const int grid = kDescriptorConfig.surf_grid;
  const int cell = kWindowSize / grid;
  std::vector<double> out(static_cast<std::size_t>(grid * grid * 4), 0.0);
  for (int y = 0; y < kWindowSize; ++y) {
    for (int x = 0; x < kWindowSize; ++x) {
      const auto p = static_cast<std::size_t>(y * kWindowSize + x);
      double* c = &out[static_cast<std::size_t>(((y / cell) * grid + x / cell) * 4)];
      c[0] += r.dx[p];
      c[1] += std::abs(r.dx[p]);
      c[2] += r.dy[p];
      c[3] += std::abs(r.dy[p]);
    }
  }
  detail::l2_normalize(out, kDescriptorConfig.zero_norm);
  return Descriptor(DescriptorKind::SURF, false, std::move(out));
}

}  // namespace gd
