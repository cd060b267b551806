#include <cmath>

#include "doctest.h"
#include "glyphdesc/error.hpp"
#include "glyphdesc/pyramid.hpp"
#include "oracles.hpp"

using namespace gd;

namespace {

// Shared skeleton (a bowl) with one dot either above or below it.
GrayImage dotted_bowl(bool dot_above) {
  GrayImage img(64, 64, 1.0);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const double dx = x - 32.0;
      const double dy = y - 28.0;
      const double r = std::sqrt(dx * dx + dy * dy);
      if (y >= 28 && std::fabs(r - 18.0) < 2.0) img(x, y) = 0.0;
      const double cy = dot_above ? 12.0 : 56.0;
      if ((x - 32.0) * (x - 32.0) + (y - cy) * (y - cy) < 9.0) img(x, y) = 0.0;
    }
  return img;
}

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("regions on the canonical window") {
  const auto rs = regions(64, 64);
  CHECK(rs[0] == Rect{0, 0, 64, 64});
  CHECK(rs[1] == Rect{0, 0, 32, 64});
  CHECK(rs[2] == Rect{16, 0, 32, 64});
  CHECK(rs[3] == Rect{32, 0, 32, 64});
  CHECK(rs[4] == Rect{0, 0, 64, 32});
  CHECK(rs[5] == Rect{0, 16, 64, 32});
  CHECK(rs[6] == Rect{0, 32, 64, 32});
}

TEST_CASE("odd sizes round as documented") {
  const auto rs = regions(65, 65);
  CHECK(rs[1].height == 33);
  CHECK(rs[1].top == 0);
  CHECK(rs[2].top == 16);
  CHECK(rs[3].top == 32);
  CHECK(rs[3].top + rs[3].height == 65);
}

TEST_CASE("region bounds hold for every size in 4..100") {
  for (int w = 4; w <= 100; ++w)
    for (int h = 4; h <= 100; h += (w % 7) + 1) {
      const auto rs = regions(w, h);
      const int sh = (h + 1) / 2;
      const int sw = (w + 1) / 2;
      for (const Rect& r : rs) {
        CHECK(r.top >= 0);
        CHECK(r.left >= 0);
        CHECK(r.top + r.height <= h);
        CHECK(r.left + r.width <= w);
      }
      // Vertical strips: ceil(h/2) rows at 0, floor(h/4), h-ceil(h/2); union covers all rows.
      CHECK(rs[1].height == sh);
      CHECK(rs[2].top == h / 4);
      CHECK(rs[3].top == h - sh);
      std::vector<int> covered(static_cast<std::size_t>(h), 0);
      for (int i = 1; i <= 3; ++i)
        for (int y = rs[i].top; y < rs[i].top + rs[i].height; ++y) covered[static_cast<std::size_t>(y)] = 1;
      CHECK(std::count(covered.begin(), covered.end(), 1) == h);
      CHECK(rs[4].width == sw);
      CHECK(rs[5].left == w / 4);
      CHECK(rs[6].left == w - sw);
      // Consecutive strips overlap by about half a strip.
      const int overlap = rs[1].height - rs[2].top;
      CHECK(std::abs(overlap - sh / 2) <= 1);
    }
  CHECK_THROWS_AS((void)regions(3, 10), Error);
}

TEST_CASE("describe7") {
  const auto img = oracle::random_image(64, 64, 5);
  for (DescriptorKind k : kAllDescriptorKinds) {
    const auto d7 = describe7(img, k);
    const auto d1 = describe(img, k);
    CHECK(d7.pyramid());
    CHECK(d7.size() == 7 * base_dimension(k));
    for (std::size_t i = 0; i < d1.size(); ++i) CHECK(d7[i] == d1[i]);
  }
  CHECK(describe7(img, DescriptorKind::SIFT).size() == 896);

  SUBCASE("prefix property on a non-canonical image") {
    const auto odd = oracle::random_image(50, 70, 6);
    const auto d7 = describe7(odd, DescriptorKind::HOG);
    const auto d1 = describe(odd, DescriptorKind::HOG);
    CHECK(std::equal(d1.values().begin(), d1.values().end(), d7.values().begin()));
  }

  SUBCASE("flat input gives zero gradient descriptors") {
    const GrayImage flat(64, 64, 0.5);
    for (DescriptorKind k : {DescriptorKind::HOG, DescriptorKind::SIFT, DescriptorKind::SURF, DescriptorKind::GIST}) {
      const auto d = describe7(flat, k);
      CHECK(std::all_of(d.values().begin(), d.values().end(), [](double v) { return v == 0.0; }));
    }
  }

  SUBCASE("dot above vs below separates more in X7 than in the full-window segment") {
    const auto a = describe7(dotted_bowl(true), DescriptorKind::SIFT);
    const auto b = describe7(dotted_bowl(false), DescriptorKind::SIFT);
    const double full = dist(a.values().first(128), b.values().first(128));
    const double all = dist(a.values(), b.values());
    CHECK(all > full);
    const double top = dist(a.values().subspan(128, 128), b.values().subspan(128, 128));
    const double bottom = dist(a.values().subspan(3 * 128, 128), b.values().subspan(3 * 128, 128));
    CHECK(top > 0.0);
    CHECK(bottom > 0.0);
  }
}
