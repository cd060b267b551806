#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "form_oracles.hpp"
#include "glyphdesc/dataset.hpp"
#include "glyphdesc/error.hpp"
#include "glyphdesc/formproc.hpp"
#include "glyphdesc/random.hpp"

using namespace gd;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected gd::Error");
  return ErrorCode::IoError;
}

GrayImage square_on_black() {
  GrayImage img(64, 64, 0.0);
  for (int y = 22; y < 42; ++y)
    for (int x = 22; x < 42; ++x) img(x, y) = 1.0;
  return img;
}

std::array<Point2, 4> random_quad(Rng& rng) {
  for (;;) {
    std::array<Point2, 4> q{};
    for (auto& p : q) p = {uniform(rng, 0, 200), uniform(rng, 0, 200)};
    double min_area = 1e300;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        for (int l = j + 1; l < 4; ++l) {
          const double a = std::abs((q[j].x - q[i].x) * (q[l].y - q[i].y) - (q[j].y - q[i].y) * (q[l].x - q[i].x));
          min_area = std::min(min_area, a);
        }
    if (min_area > 200.0) return q;
  }
}

Point2 ink_centroid(const GrayImage& img) {
  double m = 0, sx = 0, sy = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double ink = 1.0 - img(x, y);
      m += ink;
      sx += ink * x;
      sy += ink * y;
    }
  return {sx / m, sy / m};
}

std::vector<GrayImage> glyph_images(int n, std::uint64_t seed) {
  std::vector<GrayImage> out;
  for (const Sample& s : synth_glyphs(1, seed)) {
    out.push_back(s.image);
    if (static_cast<int>(out.size()) == n) break;
  }
  return out;
}

}  // namespace

TEST_CASE("harris") {
  SUBCASE("constant image has no corners") { CHECK(harris(GrayImage(32, 32, 0.6)).empty()); }
  SUBCASE("too small") { CHECK(code_of([] { (void)harris(GrayImage(6, 40, 0.0)); }) == ErrorCode::ImageTooSmall); }
  SUBCASE("square corners") {
    const auto corners = harris(square_on_black());
    REQUIRE(corners.size() >= 4);
    const std::array<Point2, 4> truth{Point2{21.5, 21.5}, Point2{41.5, 21.5}, Point2{41.5, 41.5}, Point2{21.5, 41.5}};
    for (const Point2& t : truth) {
      bool found = false;
      for (int i = 0; i < 4; ++i) found |= std::hypot(corners[i].x - t.x, corners[i].y - t.y) <= 2.0;
      CHECK(found);
    }
    for (std::size_t i = 1; i < corners.size(); ++i) CHECK(corners[i - 1].response >= corners[i].response);
  }
  SUBCASE("straight step edge") {
    GrayImage img(64, 64, 0.0);
    for (int y = 0; y < 64; ++y)
      for (int x = 30; x < 64; ++x) img(x, y) = 1.0;
    const std::vector<double> r = oracle::naive_harris(img, kHarrisK, kHarrisSigma);
    CHECK(*std::max_element(r.begin(), r.end()) <= 0.01 * harris_max_response());
    CHECK(harris(img, kHarrisK, 0.01 * harris_max_response()).empty());
  }
  SUBCASE("response map and peaks against the naive recomputation") {
    Rng rng(4);
    for (int trial = 0; trial < 5; ++trial) {
      GrayImage img(32, 32);
      for (double& v : img.pixels()) v = uniform01(rng);
      const GrayImage r = harris_response(img);
      const std::vector<double> ref = oracle::naive_harris(img, kHarrisK, kHarrisSigma);
      double worst = 0.0;
      for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(r.pixels()[i] - ref[i]));
      CHECK(worst < 1e-6);

      const double thr = 0.05 * harris_max_response();
      auto expected = oracle::naive_peaks(ref, 32, 32, thr);
      std::vector<std::pair<int, int>> got;
      for (const Corner& c : harris(img, kHarrisK, thr))
        got.emplace_back(static_cast<int>(std::lround(c.x)), static_cast<int>(std::lround(c.y)));
      std::sort(expected.begin(), expected.end());
      std::sort(got.begin(), got.end());
      CHECK(got == expected);
    }
  }
}

TEST_CASE("estimate_homography") {
  const std::array<Point2, 4> unit{Point2{0, 0}, Point2{1, 0}, Point2{1, 1}, Point2{0, 1}};
  SUBCASE("identity") {
    const Homography h = estimate_homography(unit, unit);
    const std::array<double, 9> id{1, 0, 0, 0, 1, 0, 0, 0, 1};
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(h.matrix()[i] - id[i]) < 1e-9);
  }
  SUBCASE("translation") {
    std::array<Point2, 4> moved = unit;
    for (auto& p : moved) p = {p.x + 5, p.y + 2};
    const Homography h = estimate_homography(unit, moved);
    const auto t = Homography::translation(5, 2).matrix();
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(h.matrix()[i] - t[i]) < 1e-9);
  }
  SUBCASE("round trip on random quads") {
    Rng rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto src = random_quad(rng);
      const auto dst = random_quad(rng);
      const Homography h = estimate_homography(src, dst);
      for (int i = 0; i < 4; ++i) {
        const Point2 m = h.apply(src[static_cast<std::size_t>(i)]);
        worst = std::max(worst, std::hypot(m.x - dst[static_cast<std::size_t>(i)].x, m.y - dst[static_cast<std::size_t>(i)].y));
      }
    }
    CHECK(worst < 1e-6);
  }
  SUBCASE("degenerate configurations") {
    const std::array<Point2, 4> line{Point2{0, 0}, Point2{1, 1}, Point2{2, 2}, Point2{0, 5}};
    CHECK(code_of([&] { (void)estimate_homography(line, unit); }) == ErrorCode::DegenerateConfiguration);
    CHECK(code_of([&] { (void)estimate_homography(unit, line); }) == ErrorCode::DegenerateConfiguration);
    const std::array<Point2, 4> dup{Point2{0, 0}, Point2{0, 0}, Point2{1, 1}, Point2{0, 1}};
    CHECK(code_of([&] { (void)estimate_homography(dup, unit); }) == ErrorCode::DegenerateConfiguration);
  }
}

TEST_CASE("grid and crop_cells") {
  SUBCASE("2x2 on 256 with margin 4") {
    const GridSpec spec{2, 2, 256, 256, 4};
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        const Rect cell = spec.cell(r, c);
        CHECK(cell.width - 2 * spec.margin == 120);
        CHECK(cell.height - 2 * spec.margin == 120);
      }
    const auto cells = crop_cells(GrayImage(256, 256, 1.0), spec);
    CHECK(cells.size() == 4);
    for (const auto& c : cells) {
      CHECK(c.width() == 64);
      CHECK(c.height() == 64);
    }
  }
  SUBCASE("margin 0 tiles the form") {
    const GridSpec spec{3, 5, 301, 199, 0};
    std::vector<int> cover(301 * 199, 0);
    for (int r = 0; r < spec.rows; ++r)
      for (int c = 0; c < spec.cols; ++c) {
        const Rect cell = spec.cell(r, c);
        for (int y = cell.top; y < cell.top + cell.height; ++y)
          for (int x = cell.left; x < cell.left + cell.width; ++x) ++cover[static_cast<std::size_t>(y * 301 + x)];
      }
    CHECK(std::all_of(cover.begin(), cover.end(), [](int v) { return v == 1; }));
    CHECK(crop_cells(GrayImage(301, 199, 0.5), spec).size() == 15);
  }
  SUBCASE("row-major order") {
    GrayImage form(200, 100, 1.0);
    for (int y = 0; y < 50; ++y)
      for (int x = 100; x < 200; ++x) form(x, y) = 0.0;
    const auto cells = crop_cells(form, GridSpec{2, 2, 200, 100, 5});
    CHECK(cells[1].max_value() == doctest::Approx(0.0));
    CHECK(cells[0].min_value() == doctest::Approx(1.0));
    CHECK(cells[2].min_value() == doctest::Approx(1.0));
  }
  SUBCASE("errors") {
    CHECK(code_of([] { (void)crop_cells(GrayImage(100, 100, 1.0), GridSpec{2, 2, 256, 256, 4}); }) ==
          ErrorCode::SpecMismatch);
    CHECK(code_of([] { GridSpec{2, 2, 256, 256, 64}.validate(); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { GridSpec{0, 2, 256, 256, 1}.validate(); }) == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("deskew") {
  const GridSpec spec{3, 4, 384, 288, 12};
  const SyntheticForm form = synth_form(spec, glyph_images(12, 3), 40);

  SUBCASE("already canonical page") {
    const GrayImage out = deskew(form.page, spec);
    double err = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) err += std::abs(out.pixels()[i] - form.canonical.pixels()[i]);
    CHECK(err / static_cast<double>(out.size()) < 1e-3);
  }
  SUBCASE("known warp") {
    const Homography truth({0.97, 0.08, 25, -0.06, 1.02, 18, 1.2e-4, -0.8e-4, 1});
    const GrayImage page = warp_projective(form.page, truth, form.page.width() + 60, form.page.height() + 60);
    const DeskewResult r = deskew_detailed(page, spec);
    const double w = spec.width;
    const double h = spec.height;
    const std::array<Point2, 4> target{Point2{-0.5, -0.5}, Point2{w - 0.5, -0.5}, Point2{w - 0.5, h - 0.5},
                                       Point2{-0.5, h - 0.5}};
    for (std::size_t i = 0; i < 4; ++i) {
      const Point2 m = r.transform.apply(truth.apply(form.corners[i]));
      CHECK(std::hypot(m.x - target[i].x, m.y - target[i].y) < 1.0);
    }
    const auto cells = crop_cells(r.form, spec);
    REQUIRE(cells.size() == form.glyph_centres.size());
    for (int row = 0; row < spec.rows; ++row)
      for (int col = 0; col < spec.cols; ++col) {
        const std::size_t i = static_cast<std::size_t>(row * spec.cols + col);
        const Rect cell = spec.cell(row, col);
        const double inner_w = cell.width - 2.0 * spec.margin;
        const double inner_h = cell.height - 2.0 * spec.margin;
        const Point2 c = ink_centroid(cells[i]);
        // Back to form coordinates: the crop was resized from the inner rectangle.
        const Point2 back{cell.left + spec.margin + (c.x + 0.5) * inner_w / 64.0 - 0.5,
                          cell.top + spec.margin + (c.y + 0.5) * inner_h / 64.0 - 0.5};
        CHECK(back.x >= cell.left);
        CHECK(back.x < cell.left + cell.width);
        CHECK(back.y >= cell.top);
        CHECK(back.y < cell.top + cell.height);
        CHECK(std::hypot(back.x - form.glyph_centres[i].x, back.y - form.glyph_centres[i].y) < 3.0);
      }
  }
  SUBCASE("blank page") {
    CHECK(code_of([&] { (void)deskew(GrayImage(300, 300, 1.0), spec); }) == ErrorCode::CornersNotFound);
  }
}

TEST_CASE("qa flags") {
  SUBCASE("all-white cell") {
    CHECK(qa_flags(GrayImage(64, 64, 1.0)) == std::set<QaFlag>{QaFlag::NearEmpty, QaFlag::LowContrast});
  }
  SUBCASE("single solid stroke") {
    GrayImage img(64, 64, 1.0);
    for (int y = 10; y < 54; ++y)
      for (int x = 29; x < 35; ++x) img(x, y) = 0.05;
    const auto mask = ink_mask(img);
    CHECK(oracle::union_find_components(mask, 64, 64).size() == 1);
    CHECK(qa_flags(img).empty());
  }
  SUBCASE("five separated blobs") {
    GrayImage img(64, 64, 1.0);
    for (int b = 0; b < 5; ++b)
      for (int y = 28; y < 36; ++y)
        for (int x = 2 + 12 * b; x < 10 + 12 * b; ++x) img(x, y) = 0.0;
    CHECK(qa_flags(img) == std::set<QaFlag>{QaFlag::MultiComponent});
  }
  SUBCASE("faint glyph") {
    GrayImage img(64, 64, 1.0);
    for (int y = 10; y < 54; ++y)
      for (int x = 29; x < 35; ++x) img(x, y) = 0.9;
    CHECK(qa_flags(img).count(QaFlag::LowContrast) == 1);
  }
  SUBCASE("component sizes against union-find") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      const int w = 5 + static_cast<int>(uniform_index(rng, 40));
      const int h = 5 + static_cast<int>(uniform_index(rng, 40));
      const double density = uniform(rng, 0.1, 0.6);
      std::vector<std::uint8_t> mask(static_cast<std::size_t>(w * h));
      for (auto& m : mask) m = uniform01(rng) < density ? 1 : 0;
      auto sizes = component_sizes(mask, w, h);
      std::sort(sizes.begin(), sizes.end());
      CHECK(sizes == oracle::union_find_components(mask, w, h));
    }
  }
  SUBCASE("otsu against exhaustive search") {
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
      GrayImage img(32, 32);
      const double split = uniform(rng, 0.2, 0.8);
      for (double& v : img.pixels()) v = uniform01(rng) < split ? uniform(rng, 0.0, 0.4) : uniform(rng, 0.6, 1.0);
      const auto mask = ink_mask(img);
      CHECK(static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1)) == oracle::otsu_dark_count(img));
    }
  }
  SUBCASE("formatting") {
    CHECK(format_flags({}) == "");
    CHECK(format_flags({QaFlag::LowContrast, QaFlag::MultiComponent}) == "MultiComponent|LowContrast");
  }
}

TEST_CASE("process_form") {
  const GridSpec spec{2, 3, 300, 200, 12};
  const SyntheticForm form = synth_form(spec, glyph_images(6, 9), 30);
  const FormCells out = process_form(form.page, spec);
  REQUIRE(out.cells.size() == 6);
  REQUIRE(out.flags.size() == 6);
  for (const auto& f : out.flags) CHECK(f.count(QaFlag::NearEmpty) == 0);
}
