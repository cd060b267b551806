#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "glyphdesc/error.hpp"
#include "glyphdesc/formproc.hpp"

namespace gd {

namespace {

GrayImage smooth(const GrayImage& img, double sigma) {
  const std::vector<double> taps = gaussian_taps(sigma);
  const int n = static_cast<int>(taps.size());
  const GrayImage rows = convolve(img, Kernel{n, 1, taps});
  return convolve(rows, Kernel{1, n, taps});
}

std::vector<Corner> local_maxima(const GrayImage& r, double threshold) {
  const int w = r.width();
  const int h = r.height();
  std::vector<Corner> out;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = r(x, y);
      if (!(v > threshold)) continue;
      bool peak = true;
      for (int dy = -1; dy <= 1 && peak; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          // Plateaus keep only their first pixel in scan order.
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (earlier ? r(nx, ny) >= v : r(nx, ny) > v) {
            peak = false;
            break;
          }
        }
      }
      if (!peak) continue;
      auto offset = [](double before, double centre, double after) {
        const double denom = before - 2.0 * centre + after;
        if (!(denom < 0.0)) return 0.0;
        return std::clamp(0.5 * (before - after) / denom, -0.5, 0.5);
      };
      Corner c{static_cast<double>(x), static_cast<double>(y), v};
      if (x > 0 && x + 1 < w) c.x += offset(r(x - 1, y), v, r(x + 1, y));
      if (y > 0 && y + 1 < h) c.y += offset(r(x, y - 1), v, r(x, y + 1));
      out.push_back(c);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Corner& a, const Corner& b) { return a.response > b.response; });
  return out;
}

// Moves q to the point that every nearby gradient is orthogonal to, i.e. the
// intersection of the edges meeting there. Gradients come from 2x2 blocks and
// sit on pixel corners, so an ideal step corner is a fixed point.
Point2 refine_corner(const GrayImage& img, Point2 q) {
  constexpr int radius = 4;
  constexpr double sigma = 2.0;
  const Point2 start = q;
  for (int it = 0; it < 30; ++it) {
    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    Eigen::Vector2d b = Eigen::Vector2d::Zero();
    const int cx = static_cast<int>(std::floor(q.x));
    const int cy = static_cast<int>(std::floor(q.y));
    for (int y = cy - radius; y <= cy + radius; ++y) {
      if (y < 0 || y + 1 >= img.height()) continue;
      for (int x = cx - radius; x <= cx + radius; ++x) {
        if (x < 0 || x + 1 >= img.width()) continue;
        const double gx = 0.5 * (img(x + 1, y) + img(x + 1, y + 1) - img(x, y) - img(x, y + 1));
        const double gy = 0.5 * (img(x, y + 1) + img(x + 1, y + 1) - img(x, y) - img(x + 1, y));
        const Eigen::Vector2d p(x + 0.5, y + 0.5);
        const double d2 = (p.x() - q.x) * (p.x() - q.x) + (p.y() - q.y) * (p.y() - q.y);
        const double wgt = std::exp(-d2 / (2.0 * sigma * sigma));
        const Eigen::Vector2d gv(gx, gy);
        const Eigen::Matrix2d m = wgt * gv * gv.transpose();
        a += m;
        b += m * p;
      }
    }
    const double tr = a.trace();
    if (!(tr > 0.0) || a.determinant() <= 1e-6 * tr * tr) break;
    const Eigen::Vector2d next = a.ldlt().solve(b);
    const double step = std::hypot(next.x() - q.x, next.y() - q.y);
    q = {next.x(), next.y()};
    if (step < 1e-6) break;
  }
  if (std::hypot(q.x - start.x, q.y - start.y) > 3.0) return start;
  return q;
}

}  // namespace

GrayImage harris_response(const GrayImage& img, double k) {
  const GradientField g = gradients(img);
  GrayImage xx(img.width(), img.height());
  GrayImage yy(img.width(), img.height());
  GrayImage xy(img.width(), img.height());
  for (std::size_t i = 0; i < g.gx.size(); ++i) {
    xx.pixels()[i] = g.gx[i] * g.gx[i];
    yy.pixels()[i] = g.gy[i] * g.gy[i];
    xy.pixels()[i] = g.gx[i] * g.gy[i];
  }
  const GrayImage sxx = smooth(xx, kHarrisSigma);
  const GrayImage syy = smooth(yy, kHarrisSigma);
  const GrayImage sxy = smooth(xy, kHarrisSigma);
  GrayImage r(img.width(), img.height());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double a = sxx.pixels()[i];
    const double b = syy.pixels()[i];
    const double c = sxy.pixels()[i];
    r.pixels()[i] = a * b - c * c - k * (a + b) * (a + b);
  }
  return r;
}

std::vector<Corner> harris(const GrayImage& img, double k, double threshold) {
  if (img.width() < 7 || img.height() < 7) throw Error(ErrorCode::ImageTooSmall, "harris: image must be at least 7x7");
  return local_maxima(harris_response(img, k), threshold);
}

Homography estimate_homography(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst) {
  auto check = [](const std::array<Point2, 4>& p, const char* side) {
    double scale = 0.0;
    for (const Point2& a : p)
      for (const Point2& b : p) scale = std::max(scale, std::hypot(a.x - b.x, a.y - b.y));
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw Error(ErrorCode::DegenerateConfiguration, std::string("estimate_homography: ") + side + " points coincide");
    }
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        for (int l = j + 1; l < 4; ++l) {
          const double cross = (p[j].x - p[i].x) * (p[l].y - p[i].y) - (p[j].y - p[i].y) * (p[l].x - p[i].x);
          if (std::abs(cross) <= 1e-9 * scale * scale) {
            throw Error(ErrorCode::DegenerateConfiguration,
                        std::string("estimate_homography: three ") + side + " points are collinear");
          }
        }
  };
  check(src, "source");
  check(dst, "destination");

  // Centre and scale both point sets before solving, then undo it.
  auto normaliser = [](const std::array<Point2, 4>& p) {
    double mx = 0.0;
    double my = 0.0;
    for (const Point2& q : p) {
      mx += q.x / 4.0;
      my += q.y / 4.0;
    }
    double spread = 0.0;
    for (const Point2& q : p) spread += std::hypot(q.x - mx, q.y - my) / 4.0;
    const double s = std::sqrt(2.0) / spread;
    Eigen::Matrix3d t;
    t << s, 0, -s * mx, 0, s, -s * my, 0, 0, 1;
    return t;
  };
  const Eigen::Matrix3d ts = normaliser(src);
  const Eigen::Matrix3d td = normaliser(dst);

  Eigen::Matrix<double, 8, 8> a;
  Eigen::Matrix<double, 8, 1> rhs;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d s = ts * Eigen::Vector3d(src[static_cast<std::size_t>(i)].x, src[static_cast<std::size_t>(i)].y, 1);
    const Eigen::Vector3d d = td * Eigen::Vector3d(dst[static_cast<std::size_t>(i)].x, dst[static_cast<std::size_t>(i)].y, 1);
    a.row(2 * i) << s.x(), s.y(), 1, 0, 0, 0, -d.x() * s.x(), -d.x() * s.y();
    a.row(2 * i + 1) << 0, 0, 0, s.x(), s.y(), 1, -d.y() * s.x(), -d.y() * s.y();
    rhs(2 * i) = d.x();
    rhs(2 * i + 1) = d.y();
  }
  const Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (lu.rank() < 8) throw Error(ErrorCode::DegenerateConfiguration, "estimate_homography: singular system");
  const Eigen::Matrix<double, 8, 1> h = lu.solve(rhs);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  const Eigen::Matrix3d full = td.inverse() * hn * ts;
  std::array<double, 9> m{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m[static_cast<std::size_t>(r * 3 + c)] = full(r, c);
  try {
    return Homography(m);
  } catch (const Error& e) {
    throw Error(ErrorCode::DegenerateConfiguration, std::string("estimate_homography: ") + e.what());
  }
}

void GridSpec::validate() const {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::InvalidArgument, "grid: rows and cols must be >= 1");
  if (width < cols || height < rows) throw Error(ErrorCode::InvalidArgument, "grid: form smaller than the grid");
  const int min_cell = std::min(width / cols, height / rows);
  if (margin < 0 || 2 * margin >= min_cell) {
    throw Error(ErrorCode::InvalidArgument, "grid: margin must be below half the cell size");
  }
}

Rect GridSpec::cell(int r, int c) const {
  const int left = c * width / cols;
  const int right = (c + 1) * width / cols;
  const int top = r * height / rows;
  const int bottom = (r + 1) * height / rows;
  return Rect{top, left, bottom - top, right - left};
}

std::array<Point2, 4> detect_form_corners(const GrayImage& page) {
  if (page.width() < 7 || page.height() < 7) throw Error(ErrorCode::ImageTooSmall, "deskew: page too small");
  const GrayImage r = harris_response(page);
  const double peak = r.max_value();
  const double floor_level = 0.01 * harris_max_response();
  if (!(peak > floor_level)) throw Error(ErrorCode::CornersNotFound, "deskew: no corners on the page");
  const std::vector<Corner> candidates = local_maxima(r, std::max(0.1 * peak, floor_level));

  const double w = page.width();
  const double h = page.height();
  const std::array<Point2, 4> extremes{Point2{-0.5, -0.5}, Point2{w - 0.5, -0.5}, Point2{w - 0.5, h - 0.5},
                                       Point2{-0.5, h - 0.5}};
  std::array<Point2, 4> out{};
  for (int q = 0; q < 4; ++q) {
    const bool right = q == 1 || q == 2;
    const bool bottom = q >= 2;
    double best = std::numeric_limits<double>::infinity();
    const Corner* pick = nullptr;
    for (const Corner& c : candidates) {
      if ((c.x >= w / 2) != right || (c.y >= h / 2) != bottom) continue;
      const double d = std::hypot(c.x - extremes[static_cast<std::size_t>(q)].x, c.y - extremes[static_cast<std::size_t>(q)].y);
      if (d < best) {
        best = d;
        pick = &c;
      }
    }
    if (!pick) throw Error(ErrorCode::CornersNotFound, "deskew: a page quadrant has no corner candidate");
    out[static_cast<std::size_t>(q)] = refine_corner(page, {pick->x, pick->y});
  }
  return out;
}

DeskewResult deskew_detailed(const GrayImage& page, const GridSpec& spec) {
  spec.validate();
  DeskewResult res;
  res.corners = detect_form_corners(page);
  const double w = spec.width;
  const double h = spec.height;
  const std::array<Point2, 4> target{Point2{-0.5, -0.5}, Point2{w - 0.5, -0.5}, Point2{w - 0.5, h - 0.5},
                                     Point2{-0.5, h - 0.5}};
  try {
    res.transform = estimate_homography(res.corners, target);
  } catch (const Error& e) {
    throw Error(ErrorCode::CornersNotFound, std::string("deskew: corners do not form a quadrilateral: ") + e.what());
  }
  res.form = warp_projective(page, res.transform, spec.width, spec.height);
  return res;
}

GrayImage deskew(const GrayImage& page, const GridSpec& spec) { return deskew_detailed(page, spec).form; }

std::vector<GrayImage> crop_cells(const GrayImage& form, const GridSpec& spec) {
  spec.validate();
  if (form.width() != spec.width || form.height() != spec.height) {
    throw Error(ErrorCode::SpecMismatch, "crop_cells: form is " + std::to_string(form.width()) + "x" +
                                             std::to_string(form.height()) + ", spec expects " +
                                             std::to_string(spec.width) + "x" + std::to_string(spec.height));
  }
  std::vector<GrayImage> cells;
  cells.reserve(static_cast<std::size_t>(spec.rows * spec.cols));
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const Rect cell = spec.cell(r, c);
      const int m = spec.margin;
      const GrayImage inner = form.crop(cell.left + m, cell.top + m, cell.width - 2 * m, cell.height - 2 * m);
      cells.push_back(resize_bilinear(inner, kWindowSize, kWindowSize));
    }
  }
  return cells;
}

std::string_view to_string(QaFlag f) noexcept {
  switch (f) {
    case QaFlag::MultiComponent: return "MultiComponent";
    case QaFlag::NearEmpty: return "NearEmpty";
    case QaFlag::LowContrast: break;
  }
  return "LowContrast";
}

std::string format_flags(const std::set<QaFlag>& flags) {
  std::string out;
  for (QaFlag f : flags) {
    if (!out.empty()) out += '|';
    out += to_string(f);
  }
  return out;
}

namespace {

int intensity_bin(double v) { return std::clamp(static_cast<int>(std::floor(v * 256.0)), 0, 255); }

int otsu_bin(const GrayImage& img) {
  std::array<double, 256> hist{};
  for (double v : img.pixels()) hist[static_cast<std::size_t>(intensity_bin(v))] += 1.0;
  const double total = static_cast<double>(img.size());
  double sum_all = 0.0;
  for (int b = 0; b < 256; ++b) sum_all += b * hist[static_cast<std::size_t>(b)];
  double w_back = 0.0;
  double sum_back = 0.0;
  double best = -1.0;
  int best_bin = 0;
  for (int t = 0; t < 255; ++t) {
    w_back += hist[static_cast<std::size_t>(t)];
    sum_back += t * hist[static_cast<std::size_t>(t)];
    const double w_fore = total - w_back;
    if (w_back == 0.0 || w_fore == 0.0) continue;
    const double diff = sum_back / w_back - (sum_all - sum_back) / w_fore;
    const double between = w_back * w_fore * diff * diff;
    if (between > best) {
      best = between;
      best_bin = t;
    }
  }
  return best_bin;
}

}  // namespace

double otsu_threshold(const GrayImage& img) { return (otsu_bin(img) + 1) / 256.0; }

std::vector<std::uint8_t> ink_mask(const GrayImage& img, const QaThresholds& t) {
  std::vector<std::uint8_t> mask(img.size(), 0);
  if (img.empty() || img.max_value() - img.min_value() < t.min_range) return mask;
  const int cut = otsu_bin(img);
  for (std::size_t i = 0; i < img.size(); ++i) mask[i] = intensity_bin(img.pixels()[i]) <= cut ? 1 : 0;
  return mask;
}

std::vector<int> component_sizes(const std::vector<std::uint8_t>& mask, int width, int height) {
  if (mask.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::DimensionMismatch, "component_sizes: mask size does not match width x height");
  }
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::vector<int> sizes;
  std::vector<int> stack;
  for (int start = 0; start < width * height; ++start) {
    if (!mask[static_cast<std::size_t>(start)] || seen[static_cast<std::size_t>(start)]) continue;
    int count = 0;
    stack.push_back(start);
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      ++count;
      const int x = p % width;
      const int y = p / width;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          const int q = ny * width + nx;
          if (mask[static_cast<std::size_t>(q)] && !seen[static_cast<std::size_t>(q)]) {
            seen[static_cast<std::size_t>(q)] = 1;
            stack.push_back(q);
          }
        }
      }
    }
    sizes.push_back(count);
  }
  return sizes;
}

std::set<QaFlag> qa_flags(const GrayImage& cell, const QaThresholds& t) {
  std::set<QaFlag> flags;
  if (cell.empty()) return {QaFlag::NearEmpty, QaFlag::LowContrast};
  if (cell.max_value() - cell.min_value() < t.min_range) flags.insert(QaFlag::LowContrast);
  const std::vector<std::uint8_t> mask = ink_mask(cell, t);
  const double area = static_cast<double>(cell.size());
  const auto ink = static_cast<double>(std::count(mask.begin(), mask.end(), 1));
  if (ink / area < t.min_ink_fraction) flags.insert(QaFlag::NearEmpty);
  const std::vector<int> sizes = component_sizes(mask, cell.width(), cell.height());
  const auto big = std::count_if(sizes.begin(), sizes.end(),
                                 [&](int s) { return s >= t.min_component_fraction * area; });
  if (big > t.max_components) flags.insert(QaFlag::MultiComponent);
  return flags;
}

FormCells process_form(const GrayImage& page, const GridSpec& spec, const QaThresholds& t) {
  FormCells out;
  out.cells = crop_cells(deskew(page, spec), spec);
  for (const GrayImage& c : out.cells) out.flags.push_back(qa_flags(c, t));
  return out;
}

SyntheticForm synth_form(const GridSpec& spec, const std::vector<GrayImage>& glyphs, int page_margin) {
  spec.validate();
  if (page_margin < 8) throw Error(ErrorCode::InvalidArgument, "synth_form: page margin must be at least 8 px");
  SyntheticForm f;
  GrayImage& form = f.canonical;
  form = GrayImage(spec.width, spec.height, 1.0);
  auto fill = [&](int x0, int y0, int x1, int y1) {
    for (int y = std::max(0, y0); y < std::min(spec.height, y1); ++y)
      for (int x = std::max(0, x0); x < std::min(spec.width, x1); ++x) form(x, y) = 0.0;
  };
  const int t = kFormFrameThickness;
  fill(0, 0, spec.width, t);
  fill(0, spec.height - t, spec.width, spec.height);
  fill(0, 0, t, spec.height);
  fill(spec.width - t, 0, spec.width, spec.height);
  const int half = kFormLineThickness / 2;
  for (int c = 1; c < spec.cols; ++c) {
    const int x = spec.cell(0, c).left;
    fill(x - half, 0, x + half, spec.height);
  }
  for (int r = 1; r < spec.rows; ++r) {
    const int y = spec.cell(r, 0).top;
    fill(0, y - half, spec.width, y + half);
  }

  if (!glyphs.empty()) {
    std::size_t next = 0;
    for (int r = 0; r < spec.rows; ++r) {
      for (int c = 0; c < spec.cols; ++c) {
        const Rect cell = spec.cell(r, c);
        const int inner_w = cell.width - 2 * std::max(spec.margin, t + 1);
        const int inner_h = cell.height - 2 * std::max(spec.margin, t + 1);
        const int side = std::max(8, static_cast<int>(0.8 * std::min(inner_w, inner_h)));
        const GrayImage g = resize_bilinear(glyphs[next++ % glyphs.size()], side, side);
        const int ox = cell.left + (cell.width - side) / 2;
        const int oy = cell.top + (cell.height - side) / 2;
        double mass = 0.0;
        double sx = 0.0;
        double sy = 0.0;
        for (int y = 0; y < side; ++y) {
          for (int x = 0; x < side; ++x) {
            const double v = std::clamp(g(x, y), 0.0, 1.0);
            form(ox + x, oy + y) = std::min(form(ox + x, oy + y), v);
            mass += 1.0 - v;
            sx += (1.0 - v) * (ox + x);
            sy += (1.0 - v) * (oy + y);
          }
        }
        f.glyph_centres.push_back(mass > 0 ? Point2{sx / mass, sy / mass} : Point2{ox + side / 2.0, oy + side / 2.0});
      }
    }
  }

  const int p = page_margin;
  f.page = GrayImage(spec.width + 2 * p, spec.height + 2 * p, 1.0);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) f.page(x + p, y + p) = form(x, y);
  const double w = spec.width;
  const double h = spec.height;
  f.corners = {Point2{p - 0.5, p - 0.5}, Point2{p + w - 0.5, p - 0.5}, Point2{p + w - 0.5, p + h - 0.5},
               Point2{p - 0.5, p + h - 0.5}};
  return f;
}

}  // namespace gd
