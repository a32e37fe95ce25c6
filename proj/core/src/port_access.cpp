// SPDX-License-Identifier: Apache-2.0

#include "waveroute/port_access.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace waveroute {

namespace {
constexpr double kSnapEps = 1e-6;
} // namespace

Propagated propagate_port(const ResolvedPort& port) {
  Propagated out;
  double residual = 0.0;
  const Dir8 d = snap_dir8(port.angle, &residual);
  if (!dir_is_manhattan(d) || std::abs(residual) > 1e-6) {
    out.ok = false;
    out.error = "unsupported port orientation " + std::to_string(port.angle);
    return out;
  }
  const Vec2 u = dir_unit(d);
  const Rect& b = port.owner_bbox;
  // Distance along the outward ray to the bounding-box exit.
  double t = 0.0;
  if (u.x > 0.5) t = b.hi.x - port.pos.x;
  else if (u.x < -0.5) t = port.pos.x - b.lo.x;
  else if (u.y > 0.5) t = b.hi.y - port.pos.y;
  else t = port.pos.y - b.lo.y;
  t = std::max(0.0, t);
  out.boundary_pose = Pose{port.pos + u * t, dir_deg(d)};
  out.stub_len = t;
  return out;
}

int access_region_depth_cells(const RouteParams& p) {
  return std::max(1, static_cast<int>(std::ceil(p.k_region * p.radius / p.pitch - 1e-9)));
}

std::vector<double> stagger_extensions(int count, const RouteParams& p) {
  std::vector<double> out;
  const double base = access_region_depth_cells(p) * p.pitch;
  for (int k = 0; k < count; ++k) out.push_back(base + k * p.crossing_size);
  return out;
}

std::vector<double> spread_positions(int count, double center, double spacing) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(center + (i - (count - 1) / 2.0) * spacing);
  return out;
}

namespace {

struct FaceKey {
  int instance_idx;
  Dir8 dir;
  bool operator<(const FaceKey& o) const {
    return std::tie(instance_idx, dir) < std::tie(o.instance_idx, o.dir);
  }
};

// The face-parallel coordinate of a point for a face whose outward normal
// is `d`.
double lateral_of(const Vec2& v, Dir8 d) { return (d & 2) ? v.x : v.y; }

Rect region_rect(const GridMap& map, int ci, int cj, Dir8 dir, int depth, int halfw) {
  int ux, uy;
  dir_cell_step(dir, ux, uy);
  const int lx = -uy, ly = ux;
  int i0 = ci, i1 = ci, j0 = cj, j1 = cj;
  auto grow = [&](int i, int j) {
    i0 = std::min(i0, i);
    i1 = std::max(i1, i);
    j0 = std::min(j0, j);
    j1 = std::max(j1, j);
  };
  grow(ci + (depth - 1) * ux, cj + (depth - 1) * uy);
  grow(ci + halfw * lx, cj + halfw * ly);
  grow(ci - halfw * lx, cj - halfw * ly);
  grow(ci + (depth - 1) * ux + halfw * lx, cj + (depth - 1) * uy + halfw * ly);
  grow(ci + (depth - 1) * ux - halfw * lx, cj + (depth - 1) * uy - halfw * ly);
  const double s = map.pitch();
  return Rect{{i0 * s, j0 * s}, {(i1 + 1) * s, (j1 + 1) * s}};
}

bool stub_cells_free(const GridMap& map, int net, int own_instance,
                     const std::vector<Segment>& segs) {
  std::vector<std::int32_t> cells;
  for (const Segment& s : segs) {
    map.cells_covering(s, cells);
    for (std::int32_t c : cells) {
      if (map.kind(c) == CellKind::kBlocked &&
          (own_instance < 0 || map.owner(c) != own_instance))
        return false;
      if ((map.kind(c) == CellKind::kWave || map.kind(c) == CellKind::kCross) &&
          map.owner(c) != net)
        return false;
    }
  }
  return true;
}

} // namespace

bool recommit_stub(const PreparedPort& port, GridMap& map) {
  if (port.exterior_stub.empty()) return true;
  if (!stub_cells_free(map, port.net, port.instance_idx, port.exterior_stub)) return false;
  return map.commit_route(port.net, port.exterior_stub, {}, port.instance_idx);
}

PortPrepOutcome prepare_ports(const std::vector<std::pair<ResolvedPort, ResolvedPort>>& nets,
                              GridMap& map, const RouteParams& p) {
  PortPrepOutcome out;
  out.ports.resize(nets.size() * 2);

  // Pass 1: propagate and snap every endpoint onto the grid.
  for (std::size_t k = 0; k < nets.size(); ++k) {
    for (int side = 0; side < 2; ++side) {
      const ResolvedPort& rp = side == 0 ? nets[k].first : nets[k].second;
      PreparedPort& pp = out.ports[2 * k + side];
      pp.net = static_cast<int>(k);
      pp.is_source = side == 0;
      pp.uid = port_uid(pp.net, pp.is_source);
      pp.instance_idx = rp.instance_idx;
      pp.port_pose = Pose{rp.pos, rp.angle};

      const Propagated prop = propagate_port(rp);
      if (!prop.ok) {
        pp.unreachable = true;
        pp.error = prop.error;
        continue;
      }
      Dir8 out_dir = snap_dir8(rp.angle);
      Vec2 u = dir_unit(out_dir);
      const Vec2 bpos = prop.boundary_pose.pos;

      // A port on the die edge facing off-die attaches inward instead.
      Vec2 probe = bpos + u * (map.pitch() * 1e-3);
      int ci, cj;
      map.cell_of(probe, ci, cj);
      if (!map.in_bounds(ci, cj)) {
        out_dir = dir_opposite(out_dir);
        u = dir_unit(out_dir);
        probe = bpos + u * (map.pitch() * 1e-3);
        map.cell_of(probe, ci, cj);
        if (!map.in_bounds(ci, cj)) {
          pp.unreachable = true;
          pp.error = "port off the routable die";
          continue;
        }
      }
      // Advance until the cell center is ahead of the boundary point.
      int ux, uy;
      dir_cell_step(out_dir, ux, uy);
      Vec2 c = map.center(ci, cj);
      if ((c - bpos).dot(u) < -kSnapEps) {
        ci += ux;
        cj += uy;
        if (!map.in_bounds(ci, cj)) {
          pp.unreachable = true;
          pp.error = "port off the routable die";
          continue;
        }
        c = map.center(ci, cj);
      }
      // A face off the cell boundary can leave the first outside cell
      // area-blocked by the port's own device; step past those.
      while (map.kind(map.index(ci, cj)) == CellKind::kBlocked &&
             rp.instance_idx >= 0 && map.owner(map.index(ci, cj)) == rp.instance_idx) {
        ci += ux;
        cj += uy;
        if (!map.in_bounds(ci, cj)) break;
        c = map.center(ci, cj);
      }
      if (!map.in_bounds(ci, cj)) {
        pp.unreachable = true;
        pp.error = "port off the routable die";
        continue;
      }
      if (map.kind(map.index(ci, cj)) == CellKind::kBlocked) {
        pp.unreachable = true;
        pp.error = "access cell blocked by another footprint";
        continue;
      }

      pp.node = SearchNode{ci, cj, out_dir};
      pp.access_pose = Pose{c, dir_deg(out_dir)};
      pp.subcell_lateral = u.perp_left().dot(pp.port_pose.pos - c);

      if (prop.stub_len > kSnapEps)
        pp.interior_stub.push_back(
            make_straight(Pose{rp.pos, dir_deg(out_dir)}, prop.stub_len, rp.width));
      const double gap = (c - bpos).dot(u);
      if (std::abs(pp.subcell_lateral) <= kSnapEps && gap > kSnapEps)
        pp.exterior_stub.push_back(
            make_straight(Pose{bpos, dir_deg(out_dir)}, gap, rp.width));
    }
  }

  // Pass 2: group device ports by (instance, face) for spreading/stagger.
  std::map<FaceKey, std::vector<int>> faces;
  for (std::size_t k = 0; k < nets.size(); ++k) {
    for (int side = 0; side < 2; ++side) {
      const ResolvedPort& rp = side == 0 ? nets[k].first : nets[k].second;
      const PreparedPort& pp = out.ports[2 * k + side];
      if (pp.unreachable || rp.instance_idx < 0) continue;
      if (std::abs(pp.subcell_lateral) > kSnapEps) continue; // handled by refinement
      faces[FaceKey{rp.instance_idx, pp.node.dir}].push_back(static_cast<int>(2 * k + side));
    }
  }

  const int depth = access_region_depth_cells(p);
  for (auto& [key, members] : faces) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end(), [&](int a, int b) {
      return lateral_of(out.ports[a].access_pose.pos, key.dir) <
             lateral_of(out.ports[b].access_pose.pos, key.dir);
    });

    const int n = static_cast<int>(members.size());
    int ux, uy;
    dir_cell_step(key.dir, ux, uy);

    // Minimum lateral gap between adjacent member tracks, in cells.
    int min_gap = 1 << 20;
    for (int i = 0; i + 1 < n; ++i) {
      const double g = lateral_of(out.ports[members[i + 1]].access_pose.pos, key.dir) -
                       lateral_of(out.ports[members[i]].access_pose.pos, key.dir);
      min_gap = std::min(min_gap, static_cast<int>(std::lround(g / map.pitch())));
    }

    if (n >= p.stagger_min_ports && min_gap >= 1) {
      // Channel stagger: progressively longer straight extensions so a
      // perpendicular net can cross each stub on its own straight section.
      const std::vector<double> ext = stagger_extensions(n, p);
      for (int i = 0; i < n; ++i) {
        PreparedPort& pp = out.ports[members[i]];
        const double width =
            pp.is_source ? nets[pp.net].first.width : nets[pp.net].second.width;
        const int cells = static_cast<int>(std::lround(ext[i] / map.pitch()));
        const int ti = pp.node.x + cells * ux;
        const int tj = pp.node.y + cells * uy;
        if (!map.in_bounds(ti, tj)) {
          out.warnings.push_back("stagger extension off-die for net " +
                                 std::to_string(pp.net));
          continue;
        }
        const Pose start = pp.exterior_stub.empty() ? pp.access_pose
                                                    : pp.exterior_stub.front().start;
        pp.exterior_stub.clear();
        Segment st = make_straight(
            start, (map.center(ti, tj) - start.pos).dot(dir_unit(key.dir)), width);
        st.end = Pose{map.center(ti, tj), dir_deg(key.dir)};
        pp.exterior_stub.push_back(st);
        pp.node = SearchNode{ti, tj, key.dir};
        pp.access_pose = st.end;
      }
    } else if (min_gap <= 1) {
      // Congested face: symmetric spreading about the face center.
      const double spacing_raw = std::max(2.0 * p.min_spacing + p.default_width,
                                          p.crossing_size);
      const int spacing_cells = std::max(2, static_cast<int>(std::ceil(spacing_raw / map.pitch())));
      const double face_center =
          (lateral_of(out.ports[members.front()].access_pose.pos, key.dir) +
           lateral_of(out.ports[members.back()].access_pose.pos, key.dir)) /
          2.0;
      // Snap the comb onto cell-center tracks.
      const double s = map.pitch();
      const int center_track = static_cast<int>(std::floor(face_center / s));
      std::vector<double> targets;
      for (int i = 0; i < n; ++i) {
        const int track = center_track + static_cast<int>(
                                             std::lround((i - (n - 1) / 2.0) * spacing_cells));
        targets.push_back((track + 0.5) * s);
      }

      // Feasibility: the comb must stay on the die.
      bool feasible = true;
      for (double t : targets)
        if (t < 0.5 * s || t > ((key.dir & 2) ? map.nx() : map.ny()) * s - 0.5 * s)
          feasible = false;
      if (!feasible) {
        out.warnings.push_back("port spreading infeasible on instance " +
                               std::to_string(key.instance_idx) + "; face left congested");
        continue;
      }

      int run_cells = static_cast<int>(std::ceil(2.0 * p.radius / s - 1e-9));
      for (int i = 0; i < n; ++i) {
        const double off = targets[i] - lateral_of(out.ports[members[i]].access_pose.pos, key.dir);
        if (std::abs(off) > kSnapEps)
          run_cells = std::max(
              run_cells, static_cast<int>(std::ceil(sine_jog_min_run(std::abs(off), p.radius) / s)));
      }
      // Sign that converts a world-axis lateral offset into a left-of-heading
      // sine-bend offset.
      const Vec2 left = dir_unit(key.dir).perp_left();
      const double lat_sign = (key.dir & 2) ? left.x : left.y;
      for (int i = 0; i < n; ++i) {
        PreparedPort& pp = out.ports[members[i]];
        const double width =
            pp.is_source ? nets[pp.net].first.width : nets[pp.net].second.width;
        const double off = targets[i] - lateral_of(pp.access_pose.pos, key.dir);
        const int lat_cells = static_cast<int>(std::lround(off / s));
        int ti = pp.node.x + run_cells * ux;
        int tj = pp.node.y + run_cells * uy;
        if (key.dir & 2)
          ti += lat_cells; // north/south faces spread along x
        else
          tj += lat_cells;
        if (!map.in_bounds(ti, tj)) {
          out.warnings.push_back("port spreading off-die for net " + std::to_string(pp.net));
          continue;
        }
        const Pose start = pp.exterior_stub.empty() ? pp.access_pose
                                                    : pp.exterior_stub.front().start;
        pp.exterior_stub.clear();
        const double run = (map.center(ti, tj) - start.pos).dot(dir_unit(key.dir));
        Segment st = std::abs(off) <= kSnapEps
                         ? make_straight(start, run, width)
                         : make_sine_bend(start, run, off * lat_sign, width);
        st.end = Pose{map.center(ti, tj), dir_deg(key.dir)};
        pp.exterior_stub.push_back(st);
        pp.node = SearchNode{ti, tj, key.dir};
        pp.access_pose = st.end;
      }
    }
  }

  // Pass 3: commit stubs and reserve regions.
  const int halfw =
      std::max(1, (static_cast<int>(std::ceil(p.default_width / map.pitch())) + 2 - 1) / 2);
  for (PreparedPort& pp : out.ports) {
    if (pp.unreachable) continue;
    if (!pp.exterior_stub.empty()) {
      if (!stub_cells_free(map, pp.net, pp.instance_idx, pp.exterior_stub)) {
        pp.unreachable = true;
        pp.error = "access stub obstructed";
        continue;
      }
      map.commit_route(pp.net, pp.exterior_stub, {}, pp.instance_idx);
    }
    int ux, uy;
    dir_cell_step(pp.node.dir, ux, uy);
    pp.region = region_rect(map, pp.node.x + ux, pp.node.y + uy, pp.node.dir, depth, halfw);
    std::vector<std::int32_t> conflicts;
    if (!map.reserve_rect(pp.region, pp.uid, &conflicts)) {
      std::string w = "access region of net " + std::to_string(pp.net) +
                      (pp.is_source ? " source" : " target") + " overlaps port(s)";
      for (std::int32_t c : conflicts) w += " " + std::to_string(c);
      out.warnings.push_back(std::move(w));
    }
    pp.has_region = true;
  }
  return out;
}

} // namespace waveroute
