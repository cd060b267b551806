#pragma once

#include <cmath>
#include <span>
#include <string_view>

#include "glyphdesc/image.hpp"

namespace gd::detail {

void require_window(const GrayImage& img, std::string_view who);

/// In-place L2 normalisation; vectors with norm below `guard` become zero.
inline void l2_normalize(std::span<double> v, double guard) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (norm < guard) {
    for (double& x : v) x = 0.0;
    return;
  }
  for (double& x : v) x /= norm;
}

}  // namespace gd::detail
