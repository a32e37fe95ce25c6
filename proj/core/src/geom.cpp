// SPDX-License-Identifier: Apache-2.0

#include "waveroute/geom.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace waveroute {

double norm_deg(double deg) {
  double d = std::fmod(deg, 360.0);
  if (d < 0.0) d += 360.0;
  // fmod can return 360.0 - ulp; collapse it so headings compare cleanly.
  if (d >= 360.0 - 1e-12) d = 0.0;
  return d;
}

double angle_diff_deg(double a, double b) {
  double d = std::fmod(a - b, 360.0);
  if (d > 180.0) d -= 360.0;
  if (d <= -180.0) d += 360.0;
  return d;
}

Vec2 heading_vec(double deg) {
  const double r = deg * kPi / 180.0;
  return {std::cos(r), std::sin(r)};
}

namespace {
// Exact unit vectors for the eight routing headings; avoids trig noise so
// poses produced by grid moves compare exactly.
const Vec2 kDirUnits[kNumDirs] = {
    {1.0, 0.0},
    {kSqrt2 / 2.0, kSqrt2 / 2.0},
    {0.0, 1.0},
    {-kSqrt2 / 2.0, kSqrt2 / 2.0},
    {-1.0, 0.0},
    {-kSqrt2 / 2.0, -kSqrt2 / 2.0},
    {0.0, -1.0},
    {kSqrt2 / 2.0, -kSqrt2 / 2.0},
};
const int kDirStep[kNumDirs][2] = {
    {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
} // namespace

Vec2 dir_unit(Dir8 d) { return kDirUnits[d & 7]; }

void dir_cell_step(Dir8 d, int& dx, int& dy) {
  dx = kDirStep[d & 7][0];
  dy = kDirStep[d & 7][1];
}

Dir8 snap_dir8(double deg, double* residual_deg) {
  const double n = norm_deg(deg);
  int d = static_cast<int>(std::lround(n / 45.0)) & 7;
  if (residual_deg) *residual_deg = angle_diff_deg(n, dir_deg(d));
  return d;
}

Rect Rect::bounding(const std::vector<Vec2>& pts) {
  Rect r{{0, 0}, {0, 0}};
  if (pts.empty()) return r;
  r.lo = r.hi = pts[0];
  for (const Vec2& p : pts) {
    r.lo.x = std::min(r.lo.x, p.x);
    r.lo.y = std::min(r.lo.y, p.y);
    r.hi.x = std::max(r.hi.x, p.x);
    r.hi.y = std::max(r.hi.y, p.y);
  }
  return r;
}

Vec2 Transform::apply(const Vec2& p) const {
  Vec2 q = p;
  if (mirror) q.y = -q.y;
  Vec2 r;
  switch (((rot_deg % 360) + 360) % 360) {
    case 0: r = q; break;
    case 90: r = {-q.y, q.x}; break;
    case 180: r = {-q.x, -q.y}; break;
    case 270: r = {q.y, -q.x}; break;
    default: r = q; assert(false && "rotation must be a multiple of 90"); break;
  }
  return r + t;
}

Rect Transform::apply(const Rect& r) const {
  const Vec2 a = apply(r.lo);
  const Vec2 b = apply(r.hi);
  return {{std::min(a.x, b.x), std::min(a.y, b.y)},
          {std::max(a.x, b.x), std::max(a.y, b.y)}};
}

Transform Transform::compose(const Transform& inner) const {
  Transform out;
  out.mirror = (mirror != inner.mirror);
  const int ri = ((inner.rot_deg % 360) + 360) % 360;
  out.rot_deg = ((mirror ? rot_deg - ri : rot_deg + ri) % 360 + 360) % 360;
  out.t = apply(inner.t);
  return out;
}

Transform Transform::inverse() const {
  // apply(p) = Rot(rot) * Mir(mirror) * p + t, and Mir * Rot(a) == Rot(-a) * Mir,
  // so the inverse linear part is Rot(mirror ? rot : -rot) * Mir(mirror).
  Transform inv;
  inv.mirror = mirror;
  inv.rot_deg = (((mirror ? rot_deg : -rot_deg) % 360) + 360) % 360;
  inv.t = inv.apply(Vec2{-t.x, -t.y});
  return inv;
}

Segment make_straight(const Pose& start, double len, double width) {
  Segment s;
  s.kind = SegKind::kStraight;
  s.start = start;
  s.end = start.advanced(len);
  s.width = width;
  return s;
}

Segment make_arc90(const Pose& start, double turn_deg, double radius, double width) {
  assert(std::abs(std::abs(turn_deg) - 90.0) < 1e-9);
  Segment s;
  s.kind = SegKind::kArc;
  s.start = start;
  s.width = width;
  s.turn_deg = turn_deg;
  s.radius = radius;
  const double sgn = turn_deg > 0 ? 1.0 : -1.0;
  const Vec2 center = start.pos + start.forward().perp_left() * (sgn * radius);
  const Vec2 rel = start.pos - center;
  const double a = turn_deg * kPi / 180.0;
  const Vec2 rot{rel.x * std::cos(a) - rel.y * std::sin(a),
                 rel.x * std::sin(a) + rel.y * std::cos(a)};
  s.end = {center + rot, norm_deg(start.theta_deg + turn_deg)};
  return s;
}

Segment make_arc45(const Pose& start, const Pose& end, double nominal_radius, double width) {
  Segment s;
  s.kind = SegKind::kArc;
  s.start = start;
  s.end = end;
  s.width = width;
  s.turn_deg = angle_diff_deg(end.theta_deg, start.theta_deg);
  assert(std::abs(std::abs(s.turn_deg) - 45.0) < 1e-9);
  s.radius = nominal_radius;
  return s;
}

Segment make_sine_bend(const Pose& start, double run, double offset, double width) {
  Segment s;
  s.kind = SegKind::kSineBend;
  s.start = start;
  s.width = width;
  s.run = run;
  s.offset = offset;
  s.end = {start.pos + start.forward() * run + start.forward().perp_left() * offset,
           start.theta_deg};
  return s;
}

Segment make_crossing(const Pose& entry, double size, double width) {
  Segment s;
  s.kind = SegKind::kCrossing;
  s.start = entry;
  s.end = entry.advanced(size);
  s.width = width;
  s.size = size;
  return s;
}

namespace {

// Control-point distance for the tangent-matched cubic realizing a 45-degree
// turn: scaled so the curvature profile approximates a circular fillet.
constexpr double kBendControlFrac = 0.3465;

struct Cubic {
  Vec2 p0, p1, p2, p3;
  Vec2 at(double t) const {
    const double u = 1.0 - t;
    return p0 * (u * u * u) + p1 * (3.0 * u * u * t) + p2 * (3.0 * u * t * t) +
           p3 * (t * t * t);
  }
};

Cubic bend_cubic(const Segment& s) {
  const double c = kBendControlFrac * dist(s.start.pos, s.end.pos);
  return {s.start.pos, s.start.pos + s.start.forward() * c,
          s.end.pos - s.end.forward() * c, s.end.pos};
}

Vec2 sine_point(const Segment& s, double u) {
  const double lat = s.offset * (u - std::sin(2.0 * kPi * u) / (2.0 * kPi));
  return s.start.pos + s.start.forward() * (s.run * u) +
         s.start.forward().perp_left() * lat;
}

double polyline_length(const std::vector<Vec2>& pts) {
  double len = 0.0;
  for (size_t i = 1; i < pts.size(); ++i) len += dist(pts[i - 1], pts[i]);
  return len;
}

// Sample count such that chordal sagitta stays below tol for a curve whose
// minimum curvature radius is r_min.
int curve_samples(double arc_len_estimate, double r_min, double tol) {
  if (r_min <= 0.0) r_min = 0.1;
  const double step = std::sqrt(8.0 * std::max(tol, 1e-6) * r_min);
  return std::max(8, static_cast<int>(std::ceil(arc_len_estimate / step)));
}

} // namespace

double sine_jog_peak_angle_deg(double run, double offset) {
  if (run <= 0.0) return 0.0;
  return std::atan(2.0 * std::abs(offset) / run) * 180.0 / kPi;
}

double sine_jog_min_run(double offset, double radius) {
  return std::sqrt(2.0 * kPi * std::abs(offset) * radius);
}

Segment reverse_segment(const Segment& s) {
  Segment out = s;
  out.start = Pose{s.end.pos, norm_deg(s.end.theta_deg + 180.0)};
  out.end = Pose{s.start.pos, norm_deg(s.start.theta_deg + 180.0)};
  if (s.kind == SegKind::kArc) out.turn_deg = -s.turn_deg;
  // A sine S-jog is symmetric under reversal: same run, same signed offset
  // relative to the new heading's left normal.
  return out;
}

Segment transform_segment(const Transform& t, const Segment& s) {
  Segment out = s;
  out.start = t.apply(s.start);
  out.end = t.apply(s.end);
  if (t.mirror) {
    if (s.kind == SegKind::kArc) out.turn_deg = -s.turn_deg;
    if (s.kind == SegKind::kSineBend) out.offset = -s.offset;
  }
  return out;
}

double seg_length(const Segment& s) {
  switch (s.kind) {
    case SegKind::kStraight:
    case SegKind::kCrossing:
      return dist(s.start.pos, s.end.pos);
    case SegKind::kArc:
      if (std::abs(std::abs(s.turn_deg) - 90.0) < 1e-9)
        return s.radius * kPi / 2.0;
      return polyline_length(seg_centerline(s, 1e-4));
    case SegKind::kSineBend:
      return polyline_length(seg_centerline(s, 1e-4));
  }
  return 0.0;
}

double seg_bend_deg(const Segment& s) {
  switch (s.kind) {
    case SegKind::kArc:
      return std::abs(s.turn_deg);
    case SegKind::kSineBend:
      // Two opposed arcs: the tangent swings out to the peak angle and back.
      return 2.0 * sine_jog_peak_angle_deg(s.run, s.offset);
    default:
      return 0.0;
  }
}

std::vector<Vec2> seg_centerline(const Segment& s, double tol) {
  std::vector<Vec2> pts;
  switch (s.kind) {
    case SegKind::kStraight:
    case SegKind::kCrossing:
      pts = {s.start.pos, s.end.pos};
      break;
    case SegKind::kArc: {
      if (std::abs(std::abs(s.turn_deg) - 90.0) < 1e-9) {
        const double sgn = s.turn_deg > 0 ? 1.0 : -1.0;
        const Vec2 center = s.start.pos + s.start.forward().perp_left() * (sgn * s.radius);
        const Vec2 rel = s.start.pos - center;
        const int n = curve_samples(s.radius * kPi / 2.0, s.radius, tol);
        pts.reserve(n + 1);
        for (int i = 0; i <= n; ++i) {
          const double a = s.turn_deg * kPi / 180.0 * (static_cast<double>(i) / n);
          pts.push_back(center + Vec2{rel.x * std::cos(a) - rel.y * std::sin(a),
                                      rel.x * std::sin(a) + rel.y * std::cos(a)});
        }
      } else {
        const Cubic c = bend_cubic(s);
        const double chord = dist(s.start.pos, s.end.pos);
        // The fitted cubic can bend tighter than the nominal radius inside a
        // tight step box; sample against a conservative radius estimate.
        const int n = curve_samples(chord * 1.2, std::min(s.radius, chord * 0.5), tol);
        pts.reserve(n + 1);
        for (int i = 0; i <= n; ++i) pts.push_back(c.at(static_cast<double>(i) / n));
      }
      break;
    }
    case SegKind::kSineBend: {
      const double r_min = s.offset == 0.0
                               ? s.run
                               : s.run * s.run / (2.0 * kPi * std::abs(s.offset));
      const int n = curve_samples(s.run + std::abs(s.offset), r_min, tol);
      pts.reserve(n + 1);
      for (int i = 0; i <= n; ++i) pts.push_back(sine_point(s, static_cast<double>(i) / n));
      break;
    }
  }
  return pts;
}

std::vector<Vec2> path_centerline(const std::vector<Segment>& path, double tol) {
  std::vector<Vec2> pts;
  for (const Segment& s : path) {
    std::vector<Vec2> cur = seg_centerline(s, tol);
    size_t begin = 0;
    if (!pts.empty() && !cur.empty() && almost_equal(pts.back(), cur.front(), 1e-7))
      begin = 1;
    pts.insert(pts.end(), cur.begin() + begin, cur.end());
  }
  return pts;
}

Polygon extrude_centerline(const std::vector<Vec2>& pts, double width) {
  Polygon poly;
  if (pts.size() < 2) return poly;
  const double hw = width / 2.0;

  std::vector<Vec2> p;
  p.reserve(pts.size());
  p.push_back(pts.front());
  for (size_t i = 1; i < pts.size(); ++i)
    if (dist(pts[i], p.back()) > 1e-12) p.push_back(pts[i]);
  if (p.size() < 2) return poly;

  const size_t n = p.size();
  std::vector<Vec2> left(n), right(n);
  for (size_t i = 0; i < n; ++i) {
    Vec2 din = i > 0 ? (p[i] - p[i - 1]) : (p[i + 1] - p[i]);
    Vec2 dout = i + 1 < n ? (p[i + 1] - p[i]) : din;
    din = din / din.norm();
    dout = dout / dout.norm();
    Vec2 nl = (din.perp_left() + dout.perp_left());
    const double nn = nl.norm();
    double scale = hw;
    if (nn > 1e-12) {
      nl = nl / nn;
      // Miter: grow the offset so the two edge offsets meet; paths are
      // tangent-continuous so the join angle stays shallow.
      const double cos_half = nl.dot(din.perp_left());
      scale = hw / std::max(cos_half, 0.2);
    } else {
      nl = din.perp_left();
    }
    left[i] = p[i] + nl * scale;
    right[i] = p[i] - nl * scale;
  }
  poly.reserve(2 * n);
  poly.insert(poly.end(), left.begin(), left.end());
  poly.insert(poly.end(), right.rbegin(), right.rend());
  return poly;
}

Polygon extrude_path(const std::vector<Segment>& path, double tol) {
  return extrude_centerline(path_centerline(path, tol), path.empty() ? 0.0 : path[0].width);
}

std::vector<Polygon> extrude_path_polys(const std::vector<Segment>& path, double tol) {
  std::vector<Polygon> out;
  std::vector<Segment> run;
  auto flush = [&]() {
    if (!run.empty()) {
      Polygon poly = extrude_path(run, tol);
      if (!poly.empty()) out.push_back(std::move(poly));
      run.clear();
    }
  };
  for (const Segment& s : path) {
    if (s.kind == SegKind::kCrossing) {
      flush();
      const Vec2 c = (s.start.pos + s.end.pos) * 0.5;
      const double h = s.size / 2.0;
      out.push_back(rect_polygon({{c.x - h, c.y - h}, {c.x + h, c.y + h}}));
    } else {
      run.push_back(s);
    }
  }
  flush();
  return out;
}

Polygon rect_polygon(const Rect& r) {
  return {{r.lo.x, r.lo.y}, {r.hi.x, r.lo.y}, {r.hi.x, r.hi.y}, {r.lo.x, r.hi.y}};
}

Rect polygon_bbox(const Polygon& p) { return Rect::bounding(p); }

double polygon_area(const Polygon& p) {
  double a = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const Vec2& u = p[i];
    const Vec2& v = p[(i + 1) % p.size()];
    a += u.cross(v);
  }
  return a / 2.0;
}

bool point_in_polygon(const Vec2& pt, const Polygon& poly) {
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    const bool crosses = (a.y > pt.y) != (b.y > pt.y);
    if (crosses) {
      const double x = a.x + (pt.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (pt.x < x) inside = !inside;
    }
  }
  return inside;
}

namespace {
int orient_sign(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double v = (b - a).cross(c - a);
  if (v > kGeomEps) return 1;
  if (v < -kGeomEps) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x, b.x) - kGeomEps <= p.x && p.x <= std::max(a.x, b.x) + kGeomEps &&
         std::min(a.y, b.y) - kGeomEps <= p.y && p.y <= std::max(a.y, b.y) + kGeomEps;
}
} // namespace

bool segments_intersect(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  const int o1 = orient_sign(a0, a1, b0);
  const int o2 = orient_sign(a0, a1, b1);
  const int o3 = orient_sign(b0, b1, a0);
  const int o4 = orient_sign(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a0, a1, b0)) return true;
  if (o2 == 0 && on_segment(a0, a1, b1)) return true;
  if (o3 == 0 && on_segment(b0, b1, a0)) return true;
  if (o4 == 0 && on_segment(b0, b1, a1)) return true;
  return false;
}

double segment_point_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 ab = b - a;
  const double len2 = ab.norm2();
  if (len2 < 1e-24) return dist(a, p);
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return dist(a + ab * t, p);
}

double segment_segment_distance(const Vec2& a0, const Vec2& a1,
                                const Vec2& b0, const Vec2& b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0.0;
  return std::min(std::min(segment_point_distance(a0, a1, b0),
                           segment_point_distance(a0, a1, b1)),
                  std::min(segment_point_distance(b0, b1, a0),
                           segment_point_distance(b0, b1, a1)));
}

bool polygons_intersect(const Polygon& a, const Polygon& b) {
  if (a.empty() || b.empty()) return false;
  if (!polygon_bbox(a).expanded(kGeomEps).overlaps(polygon_bbox(b).expanded(kGeomEps)))
    return false;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j)
      if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()]))
        return true;
  return point_in_polygon(a[0], b) || point_in_polygon(b[0], a);
}

double polygon_distance(const Polygon& a, const Polygon& b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  if (polygons_intersect(a, b)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j)
      best = std::min(best, segment_segment_distance(a[i], a[(i + 1) % a.size()],
                                                     b[j], b[(j + 1) % b.size()]));
  return best;
}

bool path_self_intersects(const std::vector<Segment>& path, double tol) {
  const std::vector<Vec2> pts = path_centerline(path, tol);
  if (pts.size() < 4) return false;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    for (size_t j = i + 2; j + 1 < pts.size(); ++j) {
      if (i == 0 && j + 2 == pts.size()) continue; // closed-loop endpoints
      if (segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1])) return true;
    }
  }
  return false;
}

} // namespace waveroute
