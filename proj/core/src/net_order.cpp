// SPDX-License-Identifier: Apache-2.0

#include "waveroute/net_order.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace waveroute {

double group_score(const PortGroup& g,
                   const std::vector<std::pair<ResolvedPort, ResolvedPort>>& nets) {
  double best = std::numeric_limits<double>::infinity();
  for (int n : g.nets) best = std::min(best, dist(nets[n].first.pos, nets[n].second.pos));
  return best;
}

std::vector<int> intra_group_order(const PortGroup& g,
                                   const std::vector<std::pair<ResolvedPort, ResolvedPort>>& nets) {
  // Arithmetic mean of the far-end (source) ports; the grouped side is the
  // target side by construction of build_schedule.
  Vec2 mean{0, 0};
  for (int n : g.nets) mean += nets[n].first.pos;
  mean = mean * (1.0 / static_cast<double>(g.nets.size()));

  std::vector<int> order = g.nets;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const Vec2 ta = nets[a].second.pos;
    const Vec2 tb = nets[b].second.pos;
    const double da = std::abs(ta.x - mean.x) + std::abs(ta.y - mean.y);
    const double db = std::abs(tb.x - mean.x) + std::abs(tb.y - mean.y);
    if (da != db) return da < db;
    return a < b;
  });
  return order;
}

RoutingSchedule build_schedule(const std::vector<std::pair<ResolvedPort, ResolvedPort>>& nets,
                               const std::vector<PreparedPort>& ports) {
  RoutingSchedule sched;
  const int n = static_cast<int>(nets.size());
  sched.swapped.assign(n, 0);
  sched.group_of.assign(n, -1);

  // Face population of every (instance, outward direction) pair.
  std::map<std::pair<int, int>, int> population;
  auto face_of = [&](int net, bool src_side) -> std::pair<int, int> {
    const ResolvedPort& rp = src_side ? nets[net].first : nets[net].second;
    const PreparedPort& pp = ports[2 * net + (src_side ? 0 : 1)];
    return {rp.instance_idx, pp.node.dir};
  };
  for (int k = 0; k < n; ++k) {
    ++population[face_of(k, true)];
    ++population[face_of(k, false)];
  }

  // The denser face is the grouped (target) side; swap when that is the
  // declared source. Declared target wins ties.
  std::map<std::pair<int, int>, int> group_idx;
  std::vector<PortGroup> groups;
  for (int k = 0; k < n; ++k) {
    const auto fs = face_of(k, true);
    const auto fd = face_of(k, false);
    const bool swap = fs.first >= 0 && population[fs] > population[fd];
    sched.swapped[k] = swap ? 1 : 0;
    auto key = swap ? fs : fd;
    if (key.first < 0) key = {-1000 - k, 0}; // instance-less target: singleton
    auto it = group_idx.find(key);
    if (it == group_idx.end()) {
      PortGroup g;
      g.id = static_cast<int>(groups.size());
      g.instance_idx = key.first;
      g.face = static_cast<Dir8>(key.second);
      g.arrival = static_cast<int>(groups.size());
      it = group_idx.emplace(key, g.id).first;
      groups.push_back(g);
    }
    groups[it->second].nets.push_back(k);
  }

  // Swapped nets present their grouped endpoint as the target in ordering
  // arithmetic: build a swapped view.
  std::vector<std::pair<ResolvedPort, ResolvedPort>> view = nets;
  for (int k = 0; k < n; ++k)
    if (sched.swapped[k]) std::swap(view[k].first, view[k].second);

  std::vector<int> gorder(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) gorder[i] = static_cast<int>(i);
  std::vector<double> score(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) score[i] = group_score(groups[i], view);
  std::stable_sort(gorder.begin(), gorder.end(), [&](int a, int b) {
    if (score[a] != score[b]) return score[a] < score[b];
    return groups[a].arrival < groups[b].arrival;
  });

  for (int gi : gorder) {
    const std::vector<int> inner = intra_group_order(groups[gi], view);
    for (int net : inner) {
      sched.group_of[net] = static_cast<int>(sched.groups.size());
      sched.order.push_back(net);
    }
    sched.groups.push_back(groups[gi]);
  }
  return sched;
}

bool refine_order(const std::vector<int>& current_order, int failed_net,
                  std::vector<PreparedPort>& ports, GridMap& map,
                  const RouteParams& p, RefineAction& action) {
  action = RefineAction{};
  PreparedPort& tp = ports[2 * failed_net + 1];
  int ux, uy;
  dir_cell_step(tp.node.dir, ux, uy);

  // Scan a 3-cell-wide band along the target's outward direction; collect
  // blockers in encounter order, tagged by how they block.
  std::vector<int> region_blockers, wave_blockers;
  auto note = [&](int net, bool via_region) {
    if (net == failed_net) return;
    std::vector<int>& v = via_region ? region_blockers : wave_blockers;
    if (std::find(region_blockers.begin(), region_blockers.end(), net) ==
            region_blockers.end() &&
        std::find(wave_blockers.begin(), wave_blockers.end(), net) == wave_blockers.end())
      v.push_back(net);
  };
  const int limit = map.nx() + map.ny();
  for (int k = 1; k <= limit; ++k) {
    bool any_in = false;
    for (int m : {0, 1, -1}) {
      const int i = tp.node.x + k * ux + m * -uy;
      const int j = tp.node.y + k * uy + m * ux;
      if (!map.in_bounds(i, j)) continue;
      any_in = true;
      const std::int32_t c = map.index(i, j);
      const std::int32_t r = map.reserved_for(c);
      if (r >= 0 && r / 2 != failed_net) note(r / 2, true);
      if ((map.kind(c) == CellKind::kWave || map.kind(c) == CellKind::kCross) &&
          map.owner(c) >= 0)
        note(map.owner(c), false);
    }
    if (!any_in) break;
  }
  if (region_blockers.empty() && wave_blockers.empty()) return false;

  // Rip every committed blocker.
  for (int net : region_blockers)
    if (map.is_committed(net)) action.rip.push_back(net);
  for (int net : wave_blockers)
    if (map.is_committed(net)) action.rip.push_back(net);

  // Extend the reserved regions of region blockers: their access points move
  // out of the contested corridor. Extensions are monotone.
  const double step = std::max(p.crossing_size, p.radius);
  for (int net : region_blockers) {
    // Extend whichever of the blocker's ports reserves cells on the scan ray.
    for (int side = 0; side < 2; ++side) {
      PreparedPort& bp = ports[2 * net + side];
      if (bp.unreachable || !bp.has_region) continue;
      int bux, buy;
      dir_cell_step(bp.node.dir, bux, buy);
      const int cells = static_cast<int>(std::lround(step / map.pitch()));
      const int ti = bp.node.x + cells * bux;
      const int tj = bp.node.y + cells * buy;
      if (!map.in_bounds(ti, tj)) continue;
      const Pose start = !bp.exterior_stub.empty() ? bp.exterior_stub.front().start
                                                   : bp.access_pose;
      const double run = (map.center(ti, tj) - start.pos).dot(dir_unit(bp.node.dir));
      const double width = bp.exterior_stub.empty() ? p.default_width
                                                    : bp.exterior_stub.front().width;
      Segment st = make_straight(start, run, width);
      st.end = Pose{map.center(ti, tj), dir_deg(bp.node.dir)};
      bp.exterior_stub.clear();
      bp.exterior_stub.push_back(st);
      bp.node = SearchNode{ti, tj, bp.node.dir};
      bp.access_pose = st.end;
      map.clear_reservation(bp.uid, bp.region);
      const int depth = access_region_depth_cells(p);
      const int halfw = 1;
      // Recompute the reserved rectangle ahead of the new tip.
      int i0 = ti + bux, j0 = tj + buy;
      int i1 = i0 + (depth - 1) * bux, j1 = j0 + (depth - 1) * buy;
      if (i0 > i1) std::swap(i0, i1);
      if (j0 > j1) std::swap(j0, j1);
      i0 -= (buy != 0) ? halfw : 0;
      i1 += (buy != 0) ? halfw : 0;
      j0 -= (bux != 0) ? halfw : 0;
      j1 += (bux != 0) ? halfw : 0;
      const double s = map.pitch();
      bp.region = Rect{{i0 * s, j0 * s}, {(i1 + 1) * s, (j1 + 1) * s}};
      map.reserve_rect(bp.region, bp.uid, nullptr);
      action.extend_ports.push_back(bp.uid);
      break; // one port per blocker per refinement
    }
  }

  // New order: region blockers immediately before the failed net, waveguide
  // blockers immediately after; everything else keeps relative order.
  std::vector<char> moved(current_order.size() + ports.size(), 0);
  auto mark = [&](int net) { moved[net] = 1; };
  mark(failed_net);
  for (int v : region_blockers) mark(v);
  for (int v : wave_blockers) mark(v);

  for (int net : current_order) {
    if (net == failed_net) {
      for (int v : region_blockers) action.new_order.push_back(v);
      action.new_order.push_back(failed_net);
      for (int v : wave_blockers) action.new_order.push_back(v);
    } else if (!moved[net]) {
      action.new_order.push_back(net);
    }
  }
  return true;
}

} // namespace waveroute
