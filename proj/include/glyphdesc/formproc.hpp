#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "glyphdesc/image.hpp"

namespace gd {

inline constexpr double kHarrisK = 0.04;
inline constexpr double kHarrisSigma = 1.5;

/// Reference scale for thresholds: the largest response a [0, 1] image can
/// produce when the interior gradient bound |g|^2 <= 0.5 holds.
[[nodiscard]] constexpr double harris_max_response(double k = kHarrisK) noexcept { return 0.25 * (0.25 - k); }

struct Corner {
  double x = 0.0;
  double y = 0.0;
  double response = 0.0;
};

/// R = det(M) - k trace(M)^2, with M built from gradient products smoothed by
/// a Gaussian (sigma 1.5, reflect-101 borders).
[[nodiscard]] GrayImage harris_response(const GrayImage& img, double k = kHarrisK);

/// 3x3 local maxima of the response above threshold, with parabolic
/// sub-pixel offsets, sorted by descending response. Throws ImageTooSmall below 7x7.
[[nodiscard]] std::vector<Corner> harris(const GrayImage& img, double k = kHarrisK,
                                         double threshold = 0.01 * harris_max_response());

/// Exact solve of the 8x8 system for four correspondences. Throws
/// DegenerateConfiguration when three points on either side are collinear.
[[nodiscard]] Homography estimate_homography(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst);

struct GridSpec {
  int rows = 1;
  int cols = 1;
  int width = 256;   // canonical form size
  int height = 256;
  int margin = 0;    // trimmed from every side of each cell

  /// Throws InvalidArgument unless rows, cols >= 1 and margin < half the smallest cell.
  void validate() const;
  /// Cell (r, c) before the margin is applied.
  [[nodiscard]] Rect cell(int r, int c) const;
};

/// Outer frame corners in TL, TR, BR, BL order: among the strong Harris
/// corners in each image quadrant, the one closest to that image corner,
/// refined to sub-pixel accuracy. Throws CornersNotFound.
[[nodiscard]] std::array<Point2, 4> detect_form_corners(const GrayImage& page);

struct DeskewResult {
  GrayImage form;
  std::array<Point2, 4> corners;
  Homography transform;  // page -> canonical form
};

/// The frame's outer corners land on the canonical image's outer corners.
[[nodiscard]] DeskewResult deskew_detailed(const GrayImage& page, const GridSpec& spec);
[[nodiscard]] GrayImage deskew(const GrayImage& page, const GridSpec& spec);

/// rows x cols cells, row-major, each trimmed by the margin and resized to 64x64.
/// Throws SpecMismatch when the form size differs from the spec.
[[nodiscard]] std::vector<GrayImage> crop_cells(const GrayImage& form, const GridSpec& spec);

enum class QaFlag : std::uint8_t { MultiComponent, NearEmpty, LowContrast };

[[nodiscard]] std::string_view to_string(QaFlag f) noexcept;
/// "MultiComponent|NearEmpty", or "" for no flags.
[[nodiscard]] std::string format_flags(const std::set<QaFlag>& flags);

struct QaThresholds {
  double min_ink_fraction = 0.005;
  int max_components = 4;
  double min_component_fraction = 0.01;
  double min_range = 0.15;
};

/// Otsu threshold over a 256-bin histogram of [0, 1]; pixels <= threshold are ink.
[[nodiscard]] double otsu_threshold(const GrayImage& img);

/// Ink mask used by qa_flags: empty when the intensity range is below
/// min_range (no reliable foreground), otherwise the Otsu dark side.
[[nodiscard]] std::vector<std::uint8_t> ink_mask(const GrayImage& img, const QaThresholds& t = {});

/// Sizes of the 8-connected components of a row-major mask, in scan order of
/// each component's first pixel.
[[nodiscard]] std::vector<int> component_sizes(const std::vector<std::uint8_t>& mask, int width, int height);

/// Advisory flags; nothing is ever dropped on their account.
[[nodiscard]] std::set<QaFlag> qa_flags(const GrayImage& cell, const QaThresholds& t = {});

struct FormCells {
  std::vector<GrayImage> cells;
  std::vector<std::set<QaFlag>> flags;
};

[[nodiscard]] FormCells process_form(const GrayImage& page, const GridSpec& spec, const QaThresholds& t = {});

struct SyntheticForm {
  GrayImage page;
  GrayImage canonical;
  std::array<Point2, 4> corners;      // outer frame corners in page coordinates
  std::vector<Point2> glyph_centres;  // ink centroid of each planted glyph, canonical coordinates
};

inline constexpr int kFormFrameThickness = 8;
inline constexpr int kFormLineThickness = 2;

/// Blank grid with a heavy outer frame and one glyph per cell (cycled from
/// `glyphs`; none when empty), placed on a white page with the given margin.
[[nodiscard]] SyntheticForm synth_form(const GridSpec& spec, const std::vector<GrayImage>& glyphs, int page_margin);

}  // namespace gd
