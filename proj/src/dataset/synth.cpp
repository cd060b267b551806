#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "glyphdesc/dataset.hpp"
#include "glyphdesc/error.hpp"
#include "glyphdesc/random.hpp"

namespace gd {

namespace {

// Prototype geometry lives in pixel units around the canvas centre, y down.
using Polyline = std::vector<Point2>;

struct Prototype {
  std::vector<Polyline> strokes;
  std::vector<Point2> dots;
};

Polyline ellipse_arc(double cx, double cy, double rx, double ry, double t0_deg, double t1_deg, int steps = 24) {
  Polyline p;
  for (int i = 0; i <= steps; ++i) {
    const double t = (t0_deg + (t1_deg - t0_deg) * i / steps) * std::numbers::pi / 180.0;
    p.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
  }
  return p;
}

Polyline circle(double cx, double cy, double r) { return ellipse_arc(cx, cy, r, r, 0.0, 360.0, 32); }

Polyline concat(Polyline a, const Polyline& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Skeletons shared by confusable groups.
Polyline bowl() { return ellipse_arc(0, -6, 16, 12, 0, 180); }
Polyline hook() { return {{-12, -14}, {8, -14}, {-8, -2}, {-12, 6}, {-6, 15}, {6, 17}, {14, 12}}; }
Polyline angle() { return {{-4, -12}, {8, 4}, {-10, 6}}; }
Polyline descender() { return {{4, -8}, {6, 0}, {2, 8}, {-8, 14}}; }
Polyline teeth() {
  return {{18, -8}, {17, 0}, {12, 0}, {11, -6}, {10, 0}, {5, 0}, {4, -6}, {3, 0}, {-2, 4}, {-8, 8}, {-14, 6}, {-18, 0}};
}
std::vector<Polyline> loop_tail() {
  return {ellipse_arc(6, -2, 10, 6, 0, 360, 32), {{-4, -2}, {-8, 8}, {-16, 8}, {-20, 2}}};
}
std::vector<Polyline> loop_staff() { return {ellipse_arc(4, 4, 12, 6, 0, 360, 32), {{-2, -16}, {-2, 4}}}; }
Polyline open_c_tail() {
  // Arc opening to the right, then a tail sweeping down and round.
  return concat(ellipse_arc(2, -8, 7, 7, -40, -320), {{-4, 2}, {-8, 10}, {-2, 17}, {10, 16}});
}
std::vector<Polyline> loop_bowl() { return {circle(10, -6, 5), ellipse_arc(0, -4, 16, 10, 0, 180)}; }

const std::vector<Prototype>& prototypes() {
  static const std::vector<Prototype> table = [] {
    std::vector<Prototype> t(kAlphabetClasses);
    t[0] = {{{{0, -16}, {0, 16}}}, {}};
    t[1] = {{bowl()}, {{0, 14}}};
    t[2] = {{bowl()}, {{-4, -13}, {4, -13}}};
    t[3] = {{bowl()}, {{-4, -11}, {4, -11}, {0, -18}}};
    t[4] = {{hook()}, {{2, 5}}};
    t[5] = {{hook()}, {}};
    t[6] = {{hook()}, {{-2, -21}}};
    t[7] = {{angle()}, {}};
    t[8] = {{angle()}, {{-4, -20}}};
    t[9] = {{descender()}, {}};
    t[10] = {{descender()}, {{4, -16}}};
    t[11] = {{teeth()}, {}};
    t[12] = {{teeth()}, {{8, -12}, {15, -12}, {11.5, -19}}};
    t[13] = {loop_tail(), {}};
    t[14] = {loop_tail(), {{6, -14}}};
    t[15] = {loop_staff(), {}};
    t[16] = {loop_staff(), {{9, -10}}};
    t[17] = {{open_c_tail()}, {}};
    t[18] = {{open_c_tail()}, {{2, -21}}};
    t[19] = {loop_bowl(), {{10, -17}}};
    t[20] = {loop_bowl(), {{6, -17}, {14, -17}}};
    t[21] = {{{{6, -16}, {6, 10}, {-14, 10}, {-14, 4}}, {{-4, -4}, {2, 0}}}, {}};
    t[22] = {{{{6, -18}, {6, 8}, {0, 14}, {-8, 14}, {-12, 8}}}, {}};
    t[23] = {{circle(4, -6, 5), {{0, -4}, {-6, 6}, {-6, 18}}}, {}};
    t[24] = {{bowl()}, {{0, -12}}};
    t[25] = {{circle(0, 0, 11)}, {}};
    t[26] = {{circle(4, -6, 6), {{8, -1}, {6, 8}, {-2, 14}, {-10, 14}}}, {}};
    t[27] = {{{{10, -10}, {2, -6}, {6, 0}, {14, 4}, {6, 10}, {-8, 10}, {-14, 4}}}, {{-3, 18}, {4, 18}}};
    return t;
  }();
  return table;
}

double segment_distance(Point2 p, Point2 a, Point2 b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = p.x - (a.x + t * vx);
  const double dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

GrayImage render(const Prototype& proto, Rng& rng, const GlyphParams& gp) {
  const double theta = uniform(rng, -gp.max_rotation_deg, gp.max_rotation_deg) * std::numbers::pi / 180.0;
  const double dx = uniform(rng, -gp.max_shift_px, gp.max_shift_px);
  const double dy = uniform(rng, -gp.max_shift_px, gp.max_shift_px);
  const double width = uniform(rng, gp.min_stroke_px, gp.max_stroke_px);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double centre = kWindowSize / 2.0;
  auto place = [&](Point2 p) { return Point2{centre + dx + c * p.x - s * p.y, centre + dy + s * p.x + c * p.y}; };

  std::vector<std::pair<Point2, Point2>> segments;
  for (const Polyline& line : proto.strokes) {
    for (std::size_t i = 0; i + 1 < line.size(); ++i) segments.emplace_back(place(line[i]), place(line[i + 1]));
  }
  std::vector<Point2> dots;
  for (Point2 d : proto.dots) dots.push_back(place(d));
  const double half = 0.5 * width;
  const double dot_radius = half + 1.0;

  GrayImage img(kWindowSize, kWindowSize, 1.0);
  for (int y = 0; y < kWindowSize; ++y) {
    for (int x = 0; x < kWindowSize; ++x) {
      const Point2 p{x + 0.5, y + 0.5};
      double d = 1e9;
      for (const auto& [a, b] : segments) d = std::min(d, segment_distance(p, a, b) - half);
      for (Point2 q : dots) d = std::min(d, std::hypot(p.x - q.x, p.y - q.y) - dot_radius);
      // Coverage ramps linearly across the one-pixel band around the edge.
      const double ink = std::clamp(0.5 - d, 0.0, 1.0);
      img(x, y) = 1.0 - ink;
    }
  }
  if (gp.noise_sigma > 0) {
    for (double& v : img.pixels()) v = std::clamp(v + gp.noise_sigma * normal(rng), 0.0, 1.0);
  }
  return img;
}

}  // namespace

const std::vector<std::vector<int>>& confusable_groups() {
  static const std::vector<std::vector<int>> groups{{1, 2, 3, 24}, {4, 5, 6},   {7, 8},   {9, 10}, {11, 12},
                                                    {13, 14},      {15, 16},    {17, 18}, {19, 20}};
  return groups;
}

std::vector<Sample> synth_glyphs(int n_per_class, std::uint64_t seed, const GlyphParams& params) {
  std::vector<int> all(kAlphabetClasses);
  for (int k = 0; k < kAlphabetClasses; ++k) all[static_cast<std::size_t>(k)] = k;
  return synth_glyphs(n_per_class, seed, params, all);
}

std::vector<Sample> synth_glyphs(int n_per_class, std::uint64_t seed, const GlyphParams& params,
                                 const std::vector<int>& classes) {
  if (n_per_class < 1) throw Error(ErrorCode::InvalidArgument, "synth_glyphs: n_per_class must be >= 1");
  if (params.min_stroke_px <= 0 || params.max_stroke_px < params.min_stroke_px || params.max_shift_px < 0 ||
      params.max_rotation_deg < 0 || params.noise_sigma < 0) {
    throw Error(ErrorCode::InvalidArgument, "synth_glyphs: invalid jitter ranges");
  }
  Rng rng(seed);
  std::vector<Sample> out;
  out.reserve(classes.size() * static_cast<std::size_t>(n_per_class));
  for (int k : classes) {
    if (k < 0 || k >= kAlphabetClasses) throw Error(ErrorCode::BadLabel, "synth_glyphs: class out of range");
    for (int i = 0; i < n_per_class; ++i) {
      Sample s;
      s.image = render(prototypes()[static_cast<std::size_t>(k)], rng, params);
      s.label = k;
      s.writer_id = "w" + std::to_string(i);
      s.gender = i % 2 == 0 ? Gender::Female : Gender::Male;
      s.id = "synth/" + std::to_string(k) + "/" + std::to_string(i);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace gd
