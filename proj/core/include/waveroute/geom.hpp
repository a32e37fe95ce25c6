// SPDX-License-Identifier: Apache-2.0
//
// Planar geometry kernel for curvy waveguide layout: 2-D vectors, poses,
// eight-way headings, rigid placement transforms, centerline segments
// (straight / arc bend / sine S-bend / crossing) plus polygon extrusion
// and clearance queries used by the router and the design-rule audit.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace waveroute {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
// Geometric comparisons below this scale are treated as exact coincidence
// (units are micrometres; 1e-9 um is far below fabrication resolution).
inline constexpr double kGeomEps = 1e-9;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  Vec2 operator/(double k) const { return {x / k, y / k}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  Vec2 perp_left() const { return {-y, x}; }
};

inline Vec2 operator*(double k, const Vec2& v) { return v * k; }
inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }
inline bool almost_equal(const Vec2& a, const Vec2& b, double eps = kGeomEps) {
  return std::abs(a.x - b.x) <= eps && std::abs(a.y - b.y) <= eps;
}

// Normalizes an angle in degrees to [0, 360).
double norm_deg(double deg);
// Signed minimal angular difference a - b in (-180, 180].
double angle_diff_deg(double a, double b);
// Unit vector for a heading given in degrees (0 = +x, 90 = +y).
Vec2 heading_vec(double deg);

// Eight-way heading index: dir * 45 degrees, 0 = +x, 2 = +y.
using Dir8 = int;
inline constexpr int kNumDirs = 8;
inline double dir_deg(Dir8 d) { return 45.0 * d; }
inline bool dir_is_manhattan(Dir8 d) { return (d & 1) == 0; }
inline Dir8 dir_opposite(Dir8 d) { return (d + 4) & 7; }
inline Dir8 dir_add(Dir8 d, int steps45) { return ((d + steps45) % 8 + 8) & 7; }
Vec2 dir_unit(Dir8 d);
// Integer cell step of one forward move along d (unit for axis headings,
// (+-1, +-1) for diagonal headings).
void dir_cell_step(Dir8 d, int& dx, int& dy);
// Snaps an arbitrary heading to the nearest of the 8 routing headings;
// residual_deg receives the leftover signed angle.
Dir8 snap_dir8(double deg, double* residual_deg = nullptr);

struct Pose {
  Vec2 pos;
  double theta_deg = 0.0;

  Vec2 forward() const { return heading_vec(theta_deg); }
  Pose advanced(double len) const { return {pos + forward() * len, theta_deg}; }
};

struct Rect {
  Vec2 lo;
  Vec2 hi;

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  Vec2 center() const { return (lo + hi) * 0.5; }
  bool valid() const { return hi.x >= lo.x && hi.y >= lo.y; }
  bool contains(const Vec2& p, double eps = kGeomEps) const {
    return p.x >= lo.x - eps && p.x <= hi.x + eps &&
           p.y >= lo.y - eps && p.y <= hi.y + eps;
  }
  Rect expanded(double m) const { return {{lo.x - m, lo.y - m}, {hi.x + m, hi.y + m}}; }
  bool overlaps(const Rect& o, double eps = kGeomEps) const {
    return lo.x < o.hi.x - eps && o.lo.x < hi.x - eps &&
           lo.y < o.hi.y - eps && o.lo.y < hi.y - eps;
  }
  static Rect bounding(const std::vector<Vec2>& pts);
};

// Rigid placement: reflect about the x axis first (if mirror), then rotate
// counter-clockwise by rot_deg (multiple of 90), then translate.  Matches
// the GDSII STRANS/ANGLE convention so stream-out is a direct mapping.
struct Transform {
  Vec2 t;
  int rot_deg = 0;     // 0, 90, 180, 270
  bool mirror = false; // reflection about the x axis, applied before rotation

  Vec2 apply(const Vec2& p) const;
  double apply_angle(double deg) const {
    return norm_deg(rot_deg + (mirror ? -deg : deg));
  }
  Pose apply(const Pose& p) const { return {apply(p.pos), apply_angle(p.theta_deg)}; }
  Rect apply(const Rect& r) const;
  // Composition: (*this) after inner, i.e. result.apply(p) ==
  // this->apply(inner.apply(p)).
  Transform compose(const Transform& inner) const;
  // The transform mapping back: inverse().apply(apply(p)) == p.
  Transform inverse() const;
  bool is_identity() const {
    return rot_deg == 0 && !mirror && std::abs(t.x) < kGeomEps && std::abs(t.y) < kGeomEps;
  }
};

enum class SegKind : std::uint8_t {
  kStraight,
  kArc,      // +-45 or +-90 degree bend; 90 is a circular arc, 45 a fitted curve
  kSineBend, // lateral S-jog with zero net heading change
  kCrossing, // straight passage through a waveguide crossing footprint
};

// One centerline piece of a routed waveguide.  Poses are tangent-matched:
// end.theta == start.theta + turn for arcs, == start.theta otherwise.
struct Segment {
  SegKind kind = SegKind::kStraight;
  Pose start;
  Pose end;
  double width = 0.5;

  // kArc only: signed turn (+ccw) in degrees and the nominal bend radius.
  double turn_deg = 0.0;
  double radius = 0.0;

  // kSineBend only: axial run and signed lateral offset of the S-jog.
  double run = 0.0;
  double offset = 0.0;

  // kCrossing only: footprint edge length.
  double size = 0.0;
};

Segment make_straight(const Pose& start, double len, double width);
// turn_deg in {+-45, +-90}; for 90-degree turns radius is the exact circular
// radius, for 45-degree turns the end pose is supplied by the caller (grid
// step box) and a tangent-matched cubic is fitted between the poses.
Segment make_arc90(const Pose& start, double turn_deg, double radius, double width);
Segment make_arc45(const Pose& start, const Pose& end, double nominal_radius, double width);
Segment make_sine_bend(const Pose& start, double run, double offset, double width);
Segment make_crossing(const Pose& entry, double size, double width);

// Arc length of the centerline.
double seg_length(const Segment& s);
// Total absolute tangent rotation in degrees: |turn| for arcs, zero for
// straights/crossings, twice the peak tangent angle for sine S-jogs.
double seg_bend_deg(const Segment& s);
// Sampled centerline with chordal deviation below tol; includes endpoints.
std::vector<Vec2> seg_centerline(const Segment& s, double tol);

// Peak tangent angle (degrees) of a sine S-jog y = off*(u - sin(2*pi*u)/(2*pi)).
double sine_jog_peak_angle_deg(double run, double offset);

// The same curve traversed the other way (poses swapped and flipped 180°).
Segment reverse_segment(const Segment& s);

// Rigidly transformed curve; mirroring flips arc turn direction and sine
// offset sign.
Segment transform_segment(const Transform& t, const Segment& s);
// Minimal axial run so the jog's curvature radius stays >= radius.
double sine_jog_min_run(double offset, double radius);

using Polygon = std::vector<Vec2>; // implicitly closed, no repeated last point

// Concatenates segment centerlines into one polyline (joint points deduped).
std::vector<Vec2> path_centerline(const std::vector<Segment>& path, double tol);
// Offsets a polyline by +-width/2 (miter joins) into a simple polygon.
Polygon extrude_centerline(const std::vector<Vec2>& pts, double width);
// Convenience: extrude a whole tangent-continuous path into one polygon.
// Crossing segments extrude to their footprint square instead; use
// extrude_path_polys when a path mixes kinds.
Polygon extrude_path(const std::vector<Segment>& path, double tol);
// One polygon per maximal non-crossing run plus one square per crossing.
std::vector<Polygon> extrude_path_polys(const std::vector<Segment>& path, double tol);

Polygon rect_polygon(const Rect& r);
Rect polygon_bbox(const Polygon& p);
double polygon_area(const Polygon& p); // signed, ccw positive

bool point_in_polygon(const Vec2& p, const Polygon& poly);
bool polygons_intersect(const Polygon& a, const Polygon& b);
// Minimum clearance between two polygons; zero when they touch or overlap.
double polygon_distance(const Polygon& a, const Polygon& b);
bool segments_intersect(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1);
double segment_point_distance(const Vec2& a, const Vec2& b, const Vec2& p);
double segment_segment_distance(const Vec2& a0, const Vec2& a1,
                                const Vec2& b0, const Vec2& b1);

// True when the sampled centerline of the path crosses itself (reported to
// callers; never silently repaired).
bool path_self_intersects(const std::vector<Segment>& path, double tol);

} // namespace waveroute
