#pragma once

#include <filesystem>

#include "glyphdesc/image.hpp"

namespace gd {

/// Reads binary 8-bit grayscale PGM (P5). Colour (P6) and other formats are
/// rejected with FormatError; missing files raise IoError. Values are scaled to [0, 1].
[[nodiscard]] GrayImage read_pgm(const std::filesystem::path& path);

/// Writes P5 with intensities clamped to [0, 1] and rounded to 8 bits.
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

}  // namespace gd
