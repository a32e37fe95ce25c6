// SPDX-License-Identifier: Apache-2.0

#include "waveroute/astar.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace waveroute {

NeighborSteps compute_steps(double radius, double pitch) {
  NeighborSteps st;
  const double eps = 1e-9;
  st.step90 = std::max(1, static_cast<int>(std::ceil(radius / pitch - eps)));
  st.step45_fwd = std::max(1, static_cast<int>(std::ceil((kSqrt2 - 1.0) * radius / pitch - eps)));
  st.step45_lat =
      std::max(1, static_cast<int>(std::ceil((1.0 - kSqrt2 / 2.0) * radius / pitch - eps)));
  return st;
}

namespace {

double octile_cells(int dx, int dy) {
  const double ax = std::abs(dx);
  const double ay = std::abs(dy);
  const double dmin = std::min(ax, ay);
  const double dmax = std::max(ax, ay);
  return (dmax - dmin) + kSqrt2 * dmin;
}

} // namespace

double charged_prop_cost(const Segment& seg, int dx_cells, int dy_cells, const RouteParams& p) {
  const double floor_len = octile_cells(dx_cells, dy_cells) * p.pitch;
  return p.alpha_w * std::max(seg_length(seg), floor_len);
}

double charged_bend_cost(const Segment& seg, const RouteParams& p) {
  const double real = seg_bend_deg(seg);
  if (seg.kind == SegKind::kArc) return p.alpha_b_per_deg() * real;
  if (seg.kind == SegKind::kSineBend)
    return p.alpha_b_per_deg() * std::max(real, 45.0);
  return 0.0;
}

double heuristic_cost(const SearchNode& n, const SearchNode& target, const RouteParams& p) {
  const int dx = std::abs(target.x - n.x);
  const int dy = std::abs(target.y - n.y);
  double h = p.alpha_w * p.pitch * octile_cells(dx, dy);
  if (dx > 0 && dy > 0) h += p.alpha_b_per_deg() * 45.0;
  return h;
}

namespace {

struct CellOffset {
  std::int8_t di;
  std::int8_t dj;
};

struct RingOffset {
  std::int8_t di;
  std::int8_t dj;
  std::int8_t cheb; // Chebyshev distance to the nearest swept cell
};

struct Move {
  int dx = 0;
  int dy = 0;
  Dir8 to_dir = 0;
  Segment rel; // anchored at the cell-(0,0) center
  double prop = 0.0;
  double bend = 0.0;
  std::vector<CellOffset> covered;
  std::vector<RingOffset> ring;
};

struct MoveTable {
  std::array<std::vector<Move>, kNumDirs> moves;
  int ring_wave = 0;
  int ring_blocked = 0;
  int ring_max = 0;
};

// Clearance rings, in cells, that make grid legality imply the polygon
// spacing rule: waveguide-to-waveguide needs center distance >=
// min_spacing + width; a blocked cell can hold device geometry out to its
// boundary, adding half a cell.
int ring_wave_cells(const RouteParams& p, double width) {
  return std::max(
      0, static_cast<int>(std::ceil((p.min_spacing + width) / p.pitch - 1e-9)) - 1);
}
int ring_blocked_cells(const RouteParams& p, double width) {
  return std::max(
      0, static_cast<int>(std::ceil(
             (p.min_spacing + width / 2.0 + p.pitch / 2.0) / p.pitch - 1e-9)) -
             1);
}

// Conservative swept-cell offsets of a relative segment anchored at the
// center of cell (0,0); mirrors GridMap::cells_covering.
std::vector<CellOffset> covered_offsets(const Segment& rel, double pitch) {
  const double radius = rel.width / 2.0 + pitch * (kSqrt2 / 2.0) - 1e-6;
  const std::vector<Vec2> line = seg_centerline(rel, pitch * 0.05);
  const int span = static_cast<int>(std::ceil(radius / pitch)) + 1;
  std::vector<std::pair<int, int>> cells;
  for (size_t k = 0; k + 1 < line.size(); ++k) {
    const Vec2 a = line[k];
    const Vec2 b = line[k + 1];
    const int steps = std::max(1, static_cast<int>(std::ceil(dist(a, b) / (pitch * 0.5))));
    for (int t = 0; t <= steps; ++t) {
      const Vec2 q = a + (b - a) * (static_cast<double>(t) / steps);
      const int ci = static_cast<int>(std::floor(q.x / pitch));
      const int cj = static_cast<int>(std::floor(q.y / pitch));
      for (int j = cj - span; j <= cj + span; ++j)
        for (int i = ci - span; i <= ci + span; ++i) {
          const Vec2 c{(i + 0.5) * pitch, (j + 0.5) * pitch};
          if (segment_point_distance(a, b, c) < radius) cells.emplace_back(i, j);
        }
    }
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  std::vector<CellOffset> out;
  out.reserve(cells.size());
  for (auto& c : cells)
    out.push_back({static_cast<std::int8_t>(c.first), static_cast<std::int8_t>(c.second)});
  return out;
}

std::vector<RingOffset> ring_offsets(const std::vector<CellOffset>& covered, int radius) {
  std::vector<RingOffset> out;
  if (radius <= 0) return out;
  auto is_covered = [&](int i, int j) {
    for (const CellOffset& c : covered)
      if (c.di == i && c.dj == j) return true;
    return false;
  };
  std::vector<std::pair<int, int>> seen;
  for (const CellOffset& c : covered) {
    for (int j = c.dj - radius; j <= c.dj + radius; ++j) {
      for (int i = c.di - radius; i <= c.di + radius; ++i) {
        if (is_covered(i, j)) continue;
        if (std::find(seen.begin(), seen.end(), std::make_pair(i, j)) != seen.end()) continue;
        seen.emplace_back(i, j);
        int cheb = 127;
        for (const CellOffset& cc : covered)
          cheb = std::min(cheb, std::max(std::abs(i - cc.di), std::abs(j - cc.dj)));
        if (cheb <= radius)
          out.push_back({static_cast<std::int8_t>(i), static_cast<std::int8_t>(j),
                         static_cast<std::int8_t>(cheb)});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const RingOffset& a, const RingOffset& b) {
    return std::tie(a.dj, a.di) < std::tie(b.dj, b.di);
  });
  return out;
}

Segment relative_move_segment(Dir8 from, const Move& mv, double pitch, double width,
                              const NeighborSteps& st) {
  const Pose start{{0.5 * pitch, 0.5 * pitch}, dir_deg(from)};
  const Pose end{{(mv.dx + 0.5) * pitch, (mv.dy + 0.5) * pitch}, dir_deg(mv.to_dir)};
  const int turn = ((mv.to_dir - from + 8) % 8);
  if (turn == 0) {
    Segment s = make_straight(start, dist(start.pos, end.pos), width);
    s.end = end; // exact landing
    return s;
  }
  if (turn == 2 || turn == 6) {
    Segment s = make_arc90(start, turn == 2 ? 90.0 : -90.0, st.step90 * pitch, width);
    s.end = end; // snap the trig result onto the exact cell center
    return s;
  }
  return make_arc45(start, end, st.step90 * pitch, width);
}

MoveTable build_move_table(const RouteParams& p, double width) {
  const NeighborSteps st = compute_steps(p.radius, p.pitch);
  MoveTable t;
  t.ring_wave = ring_wave_cells(p, width);
  t.ring_blocked = ring_blocked_cells(p, width);
  t.ring_max = std::max(t.ring_wave, t.ring_blocked);

  for (Dir8 d = 0; d < kNumDirs; ++d) {
    std::vector<Move>& mv = t.moves[d];
    int ux, uy;
    dir_cell_step(d, ux, uy);
    if (dir_is_manhattan(d)) {
      const int lx = -uy, ly = ux; // left normal
      const auto add = [&](int dx, int dy, int turn45) {
        Move m;
        m.dx = dx;
        m.dy = dy;
        m.to_dir = dir_add(d, turn45);
        mv.push_back(m);
      };
      add(ux, uy, 0);
      add(st.step45_fwd * ux + st.step45_lat * lx, st.step45_fwd * uy + st.step45_lat * ly, 1);
      add(st.step45_fwd * ux - st.step45_lat * lx, st.step45_fwd * uy - st.step45_lat * ly, -1);
      add(st.step90 * (ux + lx), st.step90 * (uy + ly), 2);
      add(st.step90 * (ux - lx), st.step90 * (uy - ly), -2);
    } else {
      // Diagonal headings: forward plus the mirrored 45-degree step table
      // back onto the two adjacent axis headings.
      Move fwd;
      fwd.dx = ux;
      fwd.dy = uy;
      fwd.to_dir = d;
      mv.push_back(fwd);
      Move to_x; // toward the axis heading with the x sign of the diagonal
      to_x.dx = st.step45_fwd * ux;
      to_x.dy = st.step45_lat * uy;
      to_x.to_dir = ux > 0 ? (uy > 0 ? 0 : 0) : 4;
      mv.push_back(to_x);
      Move to_y;
      to_y.dx = st.step45_lat * ux;
      to_y.dy = st.step45_fwd * uy;
      to_y.to_dir = uy > 0 ? 2 : 6;
      mv.push_back(to_y);
    }
    for (Move& m : mv) {
      m.rel = relative_move_segment(d, m, p.pitch, width, st);
      m.prop = charged_prop_cost(m.rel, m.dx, m.dy, p);
      m.bend = charged_bend_cost(m.rel, p);
      m.covered = covered_offsets(m.rel, p.pitch);
      m.ring = ring_offsets(m.covered, t.ring_max);
    }
  }
  return t;
}

Candidate move_to_candidate(const SearchNode& n, const Move& m, const GridMap& map) {
  Candidate c;
  c.to = {n.x + m.dx, n.y + m.dy, m.to_dir};
  c.seg = m.rel;
  const Vec2 shift = map.center(n.x, n.y) - Vec2{0.5 * map.pitch(), 0.5 * map.pitch()};
  c.seg.start.pos += shift;
  c.seg.end.pos += shift;
  c.prop_cost = m.prop;
  c.bend_cost = m.bend;
  return c;
}

} // namespace

std::vector<Candidate> gen_neighbors(const SearchNode& n, const GridMap& map,
                                     const RouteParams& p, double width) {
  const MoveTable t = build_move_table(p, width);
  std::vector<Candidate> out;
  for (const Move& m : t.moves[n.dir & 7]) out.push_back(move_to_candidate(n, m, map));
  return out;
}

std::vector<Candidate> offset_neighbors(const SearchNode& n, const SearchNode& target,
                                        const GridMap& map, const RouteParams& p,
                                        double width) {
  std::vector<Candidate> out;
  if (!p.enable_offset_neighbors) return out;
  if (n.dir != target.dir || !dir_is_manhattan(n.dir)) return out;
  int ux, uy;
  dir_cell_step(n.dir, ux, uy);
  const int lx = -uy, ly = ux;
  const int dx = target.x - n.x;
  const int dy = target.y - n.y;
  const int axial = dx * ux + dy * uy;
  const int lat = dx * lx + dy * ly;
  if (axial <= 0 || lat == 0) return out;
  if (std::abs(lat) * p.pitch >= p.radius) return out;
  const double d2 = static_cast<double>(dx) * dx + static_cast<double>(dy) * dy;
  if (std::sqrt(d2) * p.pitch > 4.0 * p.radius) return out;

  const double min_run = sine_jog_min_run(std::abs(lat) * p.pitch, p.radius);
  const int run_cells = std::max(1, static_cast<int>(std::ceil(min_run / p.pitch - 1e-9)));
  if (run_cells > axial) return out;

  Candidate c;
  c.to = {n.x + run_cells * ux + lat * lx, n.y + run_cells * uy + lat * ly, n.dir};
  const Pose start{map.center(n.x, n.y), dir_deg(n.dir)};
  c.seg = make_sine_bend(start, run_cells * p.pitch, lat * p.pitch, width);
  c.seg.end.pos = map.center(c.to.x, c.to.y);
  c.prop_cost = charged_prop_cost(c.seg, c.to.x - n.x, c.to.y - n.y, p);
  c.bend_cost = charged_bend_cost(c.seg, p);
  out.push_back(c);
  return out;
}

namespace {

struct EdgeDesc {
  std::uint8_t type = 0; // 0 none, 1 move (a = move index), 2 jog, 3 crossing
  std::int16_t a = 0;
  std::int16_t b = 0;
  std::int32_t c = -1;
};

struct NodeRec {
  double g = 0.0;
  std::uint64_t parent = 0;
  EdgeDesc edge;
  bool closed = false;
};

std::uint64_t node_key(const SearchNode& n) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(n.x)) << 24) |
         (static_cast<std::uint64_t>(static_cast<std::uint32_t>(n.y)) << 3) |
         static_cast<std::uint64_t>(n.dir & 7);
}

SearchNode key_node(std::uint64_t k) {
  return {static_cast<int>(k >> 24), static_cast<int>((k >> 3) & 0x1FFFFF),
          static_cast<Dir8>(k & 7)};
}

struct OpenEntry {
  double f;
  double h;
  std::uint64_t key;
  double g;
};
struct OpenCmp {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    return a.key > b.key; // lexicographic (x, y, dir) via the packed key
  }
};

// Per-search context bundling the request, parameter-derived tables and
// blocker accounting.
struct Search {
  const GridMap& map;
  const RouteRequest& req;
  const RouteParams& p;
  MoveTable table;
  int fp_cells;   // cells from the crossing center to the footprint edge
  std::unordered_map<std::uint64_t, NodeRec> nodes;
  std::unordered_map<int, long> net_tally;
  std::unordered_map<std::int32_t, long> port_tally;

  Search(const GridMap& m, const RouteRequest& r, const RouteParams& pp)
      : map(m), req(r), p(pp), table(build_move_table(pp, r.width)) {
    fp_cells = static_cast<int>(
        std::floor((pp.crossing_size / 2.0 + pp.pitch / 2.0) / pp.pitch - 1e-9));
  }

  bool own_port(std::int32_t uid) const {
    return std::find(req.own_ports.begin(), req.own_ports.end(), uid) != req.own_ports.end();
  }

  void tally_net(std::int32_t owner) {
    if (owner >= 0 && owner != req.net) ++net_tally[owner];
  }

  // Is this cell freely claimable by the current net's sweep?
  bool claimable(std::int32_t c, bool* own_region) {
    const std::int32_t r = map.reserved_for(c);
    if (r >= 0) {
      if (own_port(r)) {
        if (own_region) *own_region = true;
      } else if (req.relax < 2) {
        ++port_tally[r];
        return false;
      }
    }
    switch (map.kind(c)) {
      case CellKind::kFree:
        return true;
      case CellKind::kWave:
      case CellKind::kCross:
        if (map.owner(c) == req.net) return true;
        tally_net(map.owner(c));
        return false;
      case CellKind::kBlocked:
        tally_net(-1);
        return false;
    }
    return false;
  }

  // Clearance ring around swept cells; skip_square lets crossing candidates
  // ignore their own footprint cells.
  bool ring_ok(int x, int y, const std::vector<RingOffset>& ring, bool own_region,
               const std::vector<std::int32_t>* skip_cells = nullptr, int exempt_net = -1) {
    if (req.relax >= 1) return true;
    for (const RingOffset& r : ring) {
      const int i = x + r.di;
      const int j = y + r.dj;
      if (!map.in_bounds(i, j)) continue;
      const std::int32_t c = map.index(i, j);
      if (skip_cells &&
          std::binary_search(skip_cells->begin(), skip_cells->end(), c))
        continue;
      switch (map.kind(c)) {
        case CellKind::kFree:
          break;
        case CellKind::kWave:
        case CellKind::kCross:
          if (r.cheb <= table.ring_wave && map.owner(c) != req.net &&
              map.owner(c) != exempt_net) {
            tally_net(map.owner(c));
            return false;
          }
          break;
        case CellKind::kBlocked:
          // Inside the net's own access region the abutting device is a
          // sanctioned neighbor.
          if (r.cheb <= table.ring_blocked && !own_region) {
            tally_net(-1);
            return false;
          }
          break;
      }
    }
    return true;
  }

  bool candidate_legal(const SearchNode& n, const Move& m) {
    bool own_region = false;
    for (const CellOffset& off : m.covered) {
      const int i = n.x + off.di;
      const int j = n.y + off.dj;
      if (!map.in_bounds(i, j)) return false;
      if (!claimable(map.index(i, j), &own_region)) return false;
    }
    return ring_ok(n.x, n.y, m.ring, own_region);
  }

  // Generic legality for candidates without precomputed patterns (jogs).
  bool candidate_legal_generic(const Candidate& cand, std::vector<std::int32_t>& scratch) {
    map.cells_covering(cand.seg, scratch);
    bool own_region = false;
    for (std::int32_t c : scratch) {
      if (!claimable(c, &own_region)) return false;
    }
    if (req.relax >= 1) return true;
    const int R = table.ring_max;
    for (std::int32_t c : scratch) {
      const int i = c % map.nx();
      const int j = c / map.nx();
      for (int dj = -R; dj <= R; ++dj) {
        for (int di = -R; di <= R; ++di) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di;
          const int jj = j + dj;
          if (!map.in_bounds(ii, jj)) continue;
          const std::int32_t cc = map.index(ii, jj);
          if (std::binary_search(scratch.begin(), scratch.end(), cc)) continue;
          const int cheb = std::max(std::abs(di), std::abs(dj));
          switch (map.kind(cc)) {
            case CellKind::kFree:
              break;
            case CellKind::kWave:
            case CellKind::kCross:
              if (cheb <= table.ring_wave && map.owner(cc) != req.net) {
                tally_net(map.owner(cc));
                return false;
              }
              break;
            case CellKind::kBlocked:
              if (cheb <= table.ring_blocked && !own_region) {
                tally_net(-1);
                return false;
              }
              break;
          }
        }
      }
    }
    return true;
  }

  // Predictive crossing: a straight passage over a committed perpendicular
  // straight waveguide ahead, landing just past the footprint.
  std::optional<Candidate> crossing_candidate(const SearchNode& n) {
    if (!p.enable_crossings || !dir_is_manhattan(n.dir)) return std::nullopt;
    int ux, uy;
    dir_cell_step(n.dir, ux, uy);
    const int max_scan = fp_cells + table.ring_wave + 2;
    int k_hit = -1;
    int other = -1;
    for (int k = 1; k <= max_scan; ++k) {
      const int i = n.x + k * ux;
      const int j = n.y + k * uy;
      if (!map.in_bounds(i, j)) return std::nullopt;
      const std::int32_t c = map.index(i, j);
      const CellKind kk = map.kind(c);
      if (kk == CellKind::kFree) {
        const std::int32_t r = map.reserved_for(c);
        if (r >= 0 && !own_port(r) && req.relax < 2) return std::nullopt;
        continue;
      }
      if (kk == CellKind::kWave && map.owner(c) != req.net) {
        k_hit = k;
        other = map.owner(c);
        break;
      }
      return std::nullopt;
    }
    if (k_hit < fp_cells + 1) return std::nullopt;

    const std::int32_t center_cell = map.index(n.x + k_hit * ux, n.y + k_hit * uy);
    if (!map.straight(center_cell)) return std::nullopt;
    const Dir8 od = map.orient(center_cell);
    if (!dir_is_manhattan(od) || (od & 3) == (n.dir & 3)) return std::nullopt;

    // Port matching: equal widths and layers make the four crossing ports
    // interchangeable.
    if (req.net_widths && other < static_cast<int>(req.net_widths->size()) &&
        std::abs((*req.net_widths)[other] - req.width) > 1e-9)
      return std::nullopt;
    if (req.net_layers && other < static_cast<int>(req.net_layers->size()) &&
        (*req.net_layers)[other] != req.layer)
      return std::nullopt;

    const int cx = n.x + k_hit * ux;
    const int cy = n.y + k_hit * uy;
    int vx, vy;
    dir_cell_step(od, vx, vy);

    // The crossed waveguide must stay straight across the whole footprint.
    for (int m = -fp_cells; m <= fp_cells; ++m) {
      const int i = cx + m * vx;
      const int j = cy + m * vy;
      if (!map.in_bounds(i, j)) return std::nullopt;
      const std::int32_t c = map.index(i, j);
      if (map.kind(c) != CellKind::kWave || map.owner(c) != other || !map.straight(c) ||
          map.orient(c) != od) {
        tally_net(other);
        return std::nullopt;
      }
    }

    // Footprint square: only the crossed arm and free cells, no foreign
    // reservations.
    std::vector<std::int32_t> square;
    for (int dj = -fp_cells; dj <= fp_cells; ++dj) {
      for (int di = -fp_cells; di <= fp_cells; ++di) {
        const int i = cx + di;
        const int j = cy + dj;
        if (!map.in_bounds(i, j)) return std::nullopt;
        const std::int32_t c = map.index(i, j);
        const std::int32_t r = map.reserved_for(c);
        if (r >= 0 && !own_port(r) && req.relax < 2) {
          ++port_tally[r];
          return std::nullopt;
        }
        switch (map.kind(c)) {
          case CellKind::kFree:
            break;
          case CellKind::kWave:
            if (map.owner(c) != other) {
              tally_net(map.owner(c));
              return std::nullopt;
            }
            break;
          case CellKind::kCross:
          case CellKind::kBlocked:
            tally_net(map.owner(c));
            return std::nullopt;
        }
        square.push_back(c);
      }
    }
    std::sort(square.begin(), square.end());

    // Ring around the footprint (the crossed net itself is exempt).
    if (req.relax < 1) {
      const int R = table.ring_max;
      for (int dj = -fp_cells - R; dj <= fp_cells + R; ++dj) {
        for (int di = -fp_cells - R; di <= fp_cells + R; ++di) {
          const int cheb =
              std::max(std::abs(di) - fp_cells, std::abs(dj) - fp_cells);
          if (cheb <= 0) continue;
          const int i = cx + di;
          const int j = cy + dj;
          if (!map.in_bounds(i, j)) continue;
          const std::int32_t c = map.index(i, j);
          switch (map.kind(c)) {
            case CellKind::kFree:
              break;
            case CellKind::kWave:
            case CellKind::kCross:
              if (cheb <= table.ring_wave && map.owner(c) != req.net &&
                  map.owner(c) != other) {
                tally_net(map.owner(c));
                return std::nullopt;
              }
              break;
            case CellKind::kBlocked:
              if (cheb <= table.ring_blocked) {
                tally_net(-1);
                return std::nullopt;
              }
              break;
          }
        }
      }
    }

    // Straight run from the node through the square to the landing cell,
    // with lateral clearance outside the square.
    const int k_land = k_hit + fp_cells + 1;
    bool own_region = false;
    for (int k = 1; k <= k_land; ++k) {
      const int i = n.x + k * ux;
      const int j = n.y + k * uy;
      if (!map.in_bounds(i, j)) return std::nullopt;
      const std::int32_t c = map.index(i, j);
      if (std::binary_search(square.begin(), square.end(), c)) continue;
      if (!claimable(c, &own_region)) return std::nullopt;
    }
    if (req.relax < 1) {
      for (int k = 1; k <= k_land + table.ring_wave; ++k) {
        for (int m = -table.ring_max; m <= table.ring_max; ++m) {
          if (k <= k_land && m == 0) continue; // the run itself
          const int i = n.x + k * ux + m * -uy;
          const int j = n.y + k * uy + m * ux;
          if (!map.in_bounds(i, j)) continue;
          const std::int32_t c = map.index(i, j);
          if (std::binary_search(square.begin(), square.end(), c)) continue;
          const int cheb = std::max(std::abs(m), std::max(0, k - k_land));
          switch (map.kind(c)) {
            case CellKind::kFree:
              break;
            case CellKind::kWave:
            case CellKind::kCross:
              if (cheb <= table.ring_wave && map.owner(c) != req.net &&
                  map.owner(c) != other) {
                tally_net(map.owner(c));
                return std::nullopt;
              }
              break;
            case CellKind::kBlocked:
              if (cheb <= table.ring_blocked && !own_region) {
                tally_net(-1);
                return std::nullopt;
              }
              break;
          }
        }
      }
    }

    Candidate cand;
    cand.to = {n.x + k_land * ux, n.y + k_land * uy, n.dir};
    const Pose start{map.center(n.x, n.y), dir_deg(n.dir)};
    cand.seg = make_straight(start, k_land * p.pitch, req.width);
    cand.seg.end.pos = map.center(cand.to.x, cand.to.y);
    cand.crossing = CrossingEvent{map.center(cx, cy), other, p.crossing_size, n.dir};
    cand.prop_cost = charged_prop_cost(cand.seg, k_land * ux, k_land * uy, p);
    cand.bend_cost = 0.0;
    return cand;
  }

  double soft_penalties(const SearchNode& n, const Move* m, const Candidate* cand,
                        std::vector<std::int32_t>& scratch) {
    double cells_pen = 0.0;
    double hist = 0.0;
    const Dir8 to_dir = m ? m->to_dir : cand->to.dir;
    int px, py;
    dir_cell_step(dir_add(to_dir, 2), px, py); // perpendicular scan direction

    auto per_cell = [&](int i, int j) {
      const std::int32_t c = map.index(i, j);
      hist += map.history(c);
      if (req.group_halfwidth > 0 && p.enable_gcp) {
        for (int k = 1; k <= req.group_halfwidth; ++k) {
          for (const int sgn : {1, -1}) {
            const int ii = i + sgn * k * px;
            const int jj = j + sgn * k * py;
            if (!map.in_bounds(ii, jj)) continue;
            const std::int32_t cc = map.index(ii, jj);
            if (map.kind(cc) != CellKind::kFree ||
                (map.reserved_for(cc) >= 0 && !own_port(map.reserved_for(cc))))
              cells_pen += 1.0;
          }
        }
      }
      if (!req.corridors.empty()) {
        const Vec2 w = map.center(i, j);
        for (const CrossingCorridor& cor : req.corridors)
          if (segment_point_distance(cor.a, cor.b, w) <= cor.half_width) cells_pen += 1.0;
      }
    };

    if (m) {
      for (const CellOffset& off : m->covered) per_cell(n.x + off.di, n.y + off.dj);
    } else {
      map.cells_covering(cand->seg, scratch);
      for (std::int32_t c : scratch) per_cell(c % map.nx(), c / map.nx());
    }
    return p.lambda_c * cells_pen + p.lambda_h * hist;
  }
};

} // namespace

RouteResult route_net(const GridMap& map, const RouteRequest& req, const RouteParams& p) {
  RouteResult res;
  Search S(map, req, p);

  if (req.src == req.dst) {
    res.success = true;
    return res;
  }

  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenCmp> open;
  const std::uint64_t skey = node_key(req.src);
  S.nodes[skey] = NodeRec{0.0, skey, EdgeDesc{}, false};
  open.push({heuristic_cost(req.src, req.dst, p), heuristic_cost(req.src, req.dst, p), skey, 0.0});

  const std::uint64_t tkey = node_key(req.dst);
  std::vector<std::int32_t> scratch;
  bool found = false;
  long expansions = 0;

  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    auto it = S.nodes.find(top.key);
    if (it == S.nodes.end() || it->second.g != top.g) continue; // stale entry
    if (top.key == tkey) {
      found = true;
      break;
    }
    if (it->second.closed) continue;
    it->second.closed = true;
    if (++expansions > p.max_expansions) break;

    const SearchNode n = key_node(top.key);
    const double g = it->second.g;

    auto relax_edge = [&](const SearchNode& to, double edge_cost, const EdgeDesc& ed) {
      const std::uint64_t k = node_key(to);
      const double ng = g + edge_cost;
      auto nit = S.nodes.find(k);
      if (nit == S.nodes.end() || ng < nit->second.g) {
        NodeRec& rec = S.nodes[k];
        rec.g = ng;
        rec.parent = top.key;
        rec.edge = ed;
        rec.closed = false; // reopening on a strictly lower g
        const double h = heuristic_cost(to, req.dst, p);
        open.push({ng + h, h, k, ng});
      }
    };

    const std::vector<Move>& moves = S.table.moves[n.dir & 7];
    for (std::size_t mi = 0; mi < moves.size(); ++mi) {
      const Move& m = moves[mi];
      const SearchNode to{n.x + m.dx, n.y + m.dy, m.to_dir};
      if (!map.in_bounds(to.x, to.y)) continue;
      if (!S.candidate_legal(n, m)) continue;
      const double pen = S.soft_penalties(n, &m, nullptr, scratch);
      EdgeDesc ed;
      ed.type = 1;
      ed.a = static_cast<std::int16_t>(mi);
      relax_edge(to, m.prop + m.bend + pen, ed);
    }

    if (auto cc = S.crossing_candidate(n)) {
      const double pen = S.soft_penalties(n, nullptr, &*cc, scratch);
      EdgeDesc ed;
      ed.type = 3;
      ed.a = static_cast<std::int16_t>(cc->to.x - n.x);
      ed.b = static_cast<std::int16_t>(cc->to.y - n.y);
      int ci, cj;
      map.cell_of(cc->crossing->center, ci, cj);
      ed.c = map.index(ci, cj);
      relax_edge(cc->to, cc->prop_cost + p.alpha_c + pen, ed);
    }

    for (const Candidate& jc : offset_neighbors(n, req.dst, map, p, req.width)) {
      if (!map.in_bounds(jc.to.x, jc.to.y)) continue;
      if (!S.candidate_legal_generic(jc, scratch)) continue;
      const double pen = S.soft_penalties(n, nullptr, &jc, scratch);
      EdgeDesc ed;
      ed.type = 2;
      ed.a = static_cast<std::int16_t>(jc.to.x - n.x);
      ed.b = static_cast<std::int16_t>(jc.to.y - n.y);
      relax_edge(jc.to, jc.prop_cost + jc.bend_cost + pen, ed);
    }
  }

  res.expansions = expansions;
  if (!found) {
    std::vector<std::pair<long, int>> nets;
    for (auto& kv : S.net_tally)
      if (kv.first >= 0) nets.emplace_back(kv.second, kv.first);
    std::sort(nets.begin(), nets.end(),
              [](auto& a, auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    for (auto& kv : nets) res.blocker_nets.push_back(kv.second);
    std::vector<std::pair<long, std::int32_t>> ports;
    for (auto& kv : S.port_tally) ports.emplace_back(kv.second, kv.first);
    std::sort(ports.begin(), ports.end(),
              [](auto& a, auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    for (auto& kv : ports) res.blocker_ports.push_back(kv.second);
    return res;
  }

  // Reconstruct: walk parents, then materialize segments source-to-target.
  std::vector<std::pair<std::uint64_t, EdgeDesc>> chain;
  for (std::uint64_t k = tkey; k != skey;) {
    const NodeRec& rec = S.nodes[k];
    chain.emplace_back(k, rec.edge);
    k = rec.parent;
  }
  std::reverse(chain.begin(), chain.end());

  res.search_cost = S.nodes[tkey].g;
  SearchNode cur = req.src;
  std::vector<Segment> raw;
  for (auto& [k, ed] : chain) {
    const SearchNode to = key_node(k);
    const Pose start{map.center(cur.x, cur.y), dir_deg(cur.dir)};
    switch (ed.type) {
      case 1: {
        Candidate c = move_to_candidate(cur, S.table.moves[cur.dir & 7][ed.a], map);
        raw.push_back(c.seg);
        break;
      }
      case 2: {
        int ux, uy, lx, ly;
        dir_cell_step(cur.dir, ux, uy);
        lx = -uy;
        ly = ux;
        const int run = ed.a * ux + ed.b * uy;
        const int lat = ed.a * lx + ed.b * ly;
        Segment s = make_sine_bend(start, run * map.pitch(), lat * map.pitch(), req.width);
        s.end.pos = map.center(to.x, to.y);
        raw.push_back(s);
        break;
      }
      case 3: {
        const int ci = ed.c % map.nx();
        const int cj = ed.c / map.nx();
        const Vec2 center = map.center(ci, cj);
        const double half = p.crossing_size / 2.0;
        const double pre = dist(start.pos, center) - half;
        Segment s1 = make_straight(start, pre, req.width);
        Segment sc = make_crossing(s1.end, p.crossing_size, req.width);
        const double post = dist(center, map.center(to.x, to.y)) - half;
        Segment s2 = make_straight(sc.end, post, req.width);
        s2.end.pos = map.center(to.x, to.y);
        if (pre > 1e-9) raw.push_back(s1);
        raw.push_back(sc);
        if (post > 1e-9) raw.push_back(s2);
        res.crossings.push_back({center, map.owner(ed.c), p.crossing_size, cur.dir});
        break;
      }
      default:
        break;
    }
    cur = to;
  }

  // Merge runs of collinear straights for compact geometry.
  for (const Segment& s : raw) {
    if (!res.path.empty() && s.kind == SegKind::kStraight &&
        res.path.back().kind == SegKind::kStraight &&
        std::abs(angle_diff_deg(res.path.back().end.theta_deg, s.start.theta_deg)) < 1e-9) {
      res.path.back().end = s.end;
    } else {
      res.path.push_back(s);
    }
  }

  for (const Segment& s : res.path) {
    res.length += seg_length(s);
    res.bend_deg += seg_bend_deg(s);
  }
  res.n_cross = static_cast<int>(res.crossings.size());
  res.self_intersecting = path_self_intersects(res.path, std::max(0.05, p.extrude_tol));
  res.success = true;
  return res;
}

} // namespace waveroute
