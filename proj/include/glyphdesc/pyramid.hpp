#pragma once

#include <array>

#include "glyphdesc/descriptors.hpp"
#include "glyphdesc/image.hpp"

namespace gd {

/// The seven sub-windows of the overlapping pyramid, in concatenation order:
/// full, top, vertical-middle, bottom, left, horizontal-middle, right.
/// Strips are ceil(n/2) long at offsets 0, floor(n/4) and n - ceil(n/2).
using RegionSet = std::array<Rect, kPyramidRegions>;

/// Throws ImageTooSmall for images narrower or shorter than 4 pixels.
[[nodiscard]] RegionSet regions(int width, int height);
[[nodiscard]] inline RegionSet regions(const GrayImage& img) { return regions(img.width(), img.height()); }

/// X7: each region cropped, resized to 64x64, described and concatenated.
/// The first base_dimension(kind) values equal describe(img, kind).
[[nodiscard]] Descriptor describe7(const GrayImage& img, DescriptorKind kind);

/// Base or pyramid variant by spec.
[[nodiscard]] Descriptor describe(const GrayImage& img, const DescriptorSpec& spec);

}  // namespace gd
