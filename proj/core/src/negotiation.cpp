// SPDX-License-Identifier: Apache-2.0

#include "waveroute/negotiation.hpp"

#include <algorithm>
#include <cmath>

namespace waveroute {

void rasterize_blockages(const NetlistTree& tree, const ModuleDef& mod, GridMap& map) {
  for (std::size_t i = 0; i < mod.instances.size(); ++i) {
    const Instance& inst = mod.instances[i];
    Rect local;
    if (inst.ref_is_module) {
      const ModuleDef& child = tree.module(inst.ref);
      local = Rect{{0, 0}, child.die_size};
    } else {
      local = mod.components[mod.component_index(inst.ref)].bbox;
    }
    map.block_rect(inst.placement().apply(local), static_cast<std::int32_t>(i));
  }
}

void recompute_solution_metrics(RouteSolution& sol, const RouteParams& p) {
  sol.wl = 0.0;
  sol.bend_deg = 0.0;
  sol.n_cross = 0;
  for (const Segment& s : sol.segments) {
    sol.wl += seg_length(s);
    sol.bend_deg += seg_bend_deg(s);
    if (s.kind == SegKind::kCrossing) ++sol.n_cross;
  }
  sol.il_db = p.alpha_w * sol.wl + p.alpha_b_per_deg() * sol.bend_deg + p.alpha_c * sol.n_cross;
}

namespace {

// Loss of a candidate path before stubs are attached (used for LRR
// comparisons; both alternatives share the same stubs).
double path_il(const RouteResult& r, const RouteParams& p) {
  return p.alpha_w * r.length + p.alpha_b_per_deg() * r.bend_deg + p.alpha_c * r.n_cross;
}

// Replace a downgraded crossing segment of a committed survivor's solution
// with a plain straight and refresh its metrics.
void patch_downgraded(RouteSolution& sol, const Vec2& center, double pitch,
                      const RouteParams& p) {
  for (std::size_t i = 0; i < sol.segments.size(); ++i) {
    Segment& s = sol.segments[i];
    if (s.kind != SegKind::kCrossing) continue;
    const Vec2 mid = (s.start.pos + s.end.pos) * 0.5;
    if (dist(mid, center) > pitch * 0.51) continue;
    s.kind = SegKind::kStraight;
    s.size = 0.0;
    // Merge with straight neighbors so crossings cannot re-register here.
    if (i + 1 < sol.segments.size() && sol.segments[i + 1].kind == SegKind::kStraight &&
        std::abs(angle_diff_deg(s.end.theta_deg, sol.segments[i + 1].start.theta_deg)) < 1e-9) {
      s.end = sol.segments[i + 1].end;
      sol.segments.erase(sol.segments.begin() + i + 1);
    }
    if (i > 0 && sol.segments[i - 1].kind == SegKind::kStraight &&
        std::abs(angle_diff_deg(sol.segments[i - 1].end.theta_deg, s.start.theta_deg)) < 1e-9) {
      sol.segments[i - 1].end = s.end;
      sol.segments.erase(sol.segments.begin() + i);
    }
    break;
  }
  sol.crossings.erase(std::remove_if(sol.crossings.begin(), sol.crossings.end(),
                                     [&](const CrossingEvent& ev) {
                                       return dist(ev.center, center) <= pitch * 0.51;
                                     }),
                      sol.crossings.end());
  recompute_solution_metrics(sol, p);
}

struct Router {
  const NetlistTree& tree;
  const ModuleDef& mod;
  GridMap& map;
  const RouteParams& p;
  ModuleRouteResult out;
  std::vector<std::pair<ResolvedPort, ResolvedPort>> nets;
  std::vector<int> order;
  std::vector<char> routed, finalized, ever_ripped;
  std::vector<int> refine_used, rr_used, relax_level;
  std::vector<double> net_widths;
  std::vector<int> net_layers;

  Router(const NetlistTree& t, const ModuleDef& m, GridMap& g, const RouteParams& pp)
      : tree(t), mod(m), map(g), p(pp) {}

  PreparedPort& prep(int net, bool route_src) {
    const bool swapped = out.schedule.swapped[net] != 0;
    const bool declared_src = route_src != swapped;
    return out.ports[2 * net + (declared_src ? 0 : 1)];
  }

  void rip_net(int net, bool bump_history) {
    if (!map.is_committed(net)) return;
    const std::vector<DowngradedCrossing> downs =
        map.rip_up(net, bump_history ? p.history_inc : 0.0);
    for (const DowngradedCrossing& d : downs)
      if (d.surviving_net >= 0 && d.surviving_net < static_cast<int>(out.nets.size()))
        patch_downgraded(out.nets[d.surviving_net], d.center, map.pitch(), p);
    out.nets[net] = RouteSolution{};
    out.nets[net].net = net;
    routed[net] = 0;
    finalized[net] = 0;
    // Stubs are part of the port infrastructure: restore them immediately.
    for (int side = 0; side < 2; ++side) {
      PreparedPort& pp = out.ports[2 * net + side];
      if (!pp.unreachable && !recommit_stub(pp, map))
        out.warnings.push_back("stub re-commit failed for net " + std::to_string(net));
    }
  }

  // Terminal pose refinement: bridge the sub-cell lateral offset between the
  // real port and the grid track with a sine jog inside the terminal
  // straight. Returns false (with a flag on the solution) when infeasible.
  bool refine_terminal(std::vector<Segment>& path, PreparedPort& pp, bool at_front,
                       double width, RouteSolution& sol, int net) {
    const double delta = pp.subcell_lateral;
    if (std::abs(delta) <= 1e-9) return true;
    if (path.empty()) return false;
    Segment& term = at_front ? path.front() : path.back();
    if (term.kind != SegKind::kStraight) {
      sol.drvs.push_back("sub-cell port offset unresolved (terminal bend)");
      return false;
    }
    const Pose anchor = pp.interior_stub.empty()
                            ? pp.port_pose
                            : Pose{pp.interior_stub.back().end.pos, pp.port_pose.theta_deg};
    Segment jog;
    if (at_front) {
      // New start: the port boundary pose on its own lateral track.
      const Vec2 u = dir_unit(pp.node.dir);
      const double run = (term.end.pos - anchor.pos).dot(u);
      if (run < sine_jog_min_run(std::abs(delta), p.radius) - 1e-9) {
        sol.drvs.push_back("sub-cell port offset unresolved (short terminal)");
        return false;
      }
      jog = make_sine_bend(Pose{anchor.pos, dir_deg(pp.node.dir)}, run, -delta, width);
      jog.end = term.end;
    } else {
      const Vec2 u = dir_unit(dir_opposite(pp.node.dir)); // path heading at the end
      const double run = (anchor.pos - term.start.pos).dot(u);
      if (run < sine_jog_min_run(std::abs(delta), p.radius) - 1e-9) {
        sol.drvs.push_back("sub-cell port offset unresolved (short terminal)");
        return false;
      }
      jog = make_sine_bend(term.start, run, -delta, width);
      jog.end = Pose{anchor.pos, term.start.theta_deg};
    }
    // The jog sweeps up to one extra cell row; keep the straight if that row
    // is taken (the grid-snapped path stays valid, only the offset is
    // flagged).
    std::vector<std::int32_t> cells;
    map.cells_covering(jog, cells);
    for (std::int32_t c : cells) {
      const CellKind k = map.kind(c);
      if (k == CellKind::kBlocked && !pp.interior_stub.empty()) continue; // own device
      if (k == CellKind::kBlocked ||
          ((k == CellKind::kWave || k == CellKind::kCross) && map.owner(c) != net)) {
        sol.drvs.push_back("sub-cell port offset unresolved (no clearance)");
        return false;
      }
    }
    term = jog;
    return true;
  }

  // Crossing-space corridors of unrouted nets whose straight-line sketches
  // cross this net's sketch.
  std::vector<CrossingCorridor> corridors_for(int net) {
    std::vector<CrossingCorridor> out_c;
    if (p.lambda_c <= 0.0) return out_c;
    const Vec2 a0 = out.ports[2 * net].access_pose.pos;
    const Vec2 a1 = out.ports[2 * net + 1].access_pose.pos;
    for (std::size_t j = 0; j < nets.size(); ++j) {
      if (static_cast<int>(j) == net || routed[j] || finalized[j]) continue;
      const Vec2 b0 = out.ports[2 * j].access_pose.pos;
      const Vec2 b1 = out.ports[2 * j + 1].access_pose.pos;
      if (segments_intersect(a0, a1, b0, b1))
        out_c.push_back(CrossingCorridor{b0, b1, p.crossing_size / 2.0});
    }
    return out_c;
  }

  int group_halfwidth_for(int net, double width) {
    if (!p.enable_gcp) return 0;
    const int gi = out.schedule.group_of[net];
    if (gi < 0) return 0;
    int unrouted = 0;
    for (int m : out.schedule.groups[gi].nets)
      if (!routed[m] && !finalized[m]) ++unrouted;
    if (unrouted <= 1) return 0;
    return static_cast<int>(
        std::ceil(unrouted * (p.min_spacing + width) / p.pitch - 1e-9));
  }

  RouteResult attempt(int net, int relax, bool allow_crossings) {
    PreparedPort& ps = prep(net, true);
    PreparedPort& pt = prep(net, false);
    RouteRequest req;
    req.net = net;
    req.src = ps.node;
    req.dst = SearchNode{pt.node.x, pt.node.y, dir_opposite(pt.node.dir)};
    req.width = nets[net].first.width;
    req.layer = nets[net].first.layer;
    req.own_ports = {port_uid(net, true), port_uid(net, false)};
    req.group_halfwidth = group_halfwidth_for(net, req.width);
    req.corridors = corridors_for(net);
    req.net_widths = &net_widths;
    req.net_layers = &net_layers;
    req.relax = relax;
    RouteParams pl = p;
    if (!allow_crossings) pl.enable_crossings = false;
    RouteResult r = route_net(map, req, pl);
    out.total_expansions += r.expansions;
    return r;
  }

  void finalize_failure(int net, const RouteResult& last) {
    RouteSolution& sol = out.nets[net];
    sol.net = net;
    sol.routed = false;
    std::string note = "unroutable";
    if (!last.blocker_nets.empty()) {
      note += "; blockers:";
      for (std::size_t i = 0; i < std::min<std::size_t>(last.blocker_nets.size(), 4); ++i)
        note += " net" + std::to_string(last.blocker_nets[i]);
    }
    sol.drvs.push_back(note);
    finalized[net] = 1;
  }

  void accept(int net, RouteResult&& r, int relax) {
    PreparedPort& ps = prep(net, true);
    PreparedPort& pt = prep(net, false);
    RouteSolution& sol = out.nets[net];
    sol = RouteSolution{};
    sol.net = net;
    sol.routed = true;
    sol.relax_used = relax;
    if (relax == 1) sol.drvs.push_back("routed with spacing relaxed");
    if (relax == 2) sol.drvs.push_back("routed with spacing and reservations relaxed");
    sol.self_intersecting = r.self_intersecting;
    if (r.self_intersecting) sol.drvs.push_back("self-intersecting centerline");

    std::vector<Segment> path = std::move(r.path);
    refine_terminal(path, ps, true, nets[net].first.width, sol, net);
    refine_terminal(path, pt, false, nets[net].first.width, sol, net);

    if (!map.commit_route(net, path, r.crossings)) {
      // Should not happen: legality held during search. Surface loudly.
      out.warnings.push_back("commit failed for net " + std::to_string(net));
      sol.routed = false;
      finalized[net] = 1;
      return;
    }

    // Full geometry: source stubs, path, reversed target stubs.
    sol.segments.clear();
    for (const Segment& s : ps.interior_stub) sol.segments.push_back(s);
    if (std::abs(ps.subcell_lateral) <= 1e-9)
      for (const Segment& s : ps.exterior_stub) sol.segments.push_back(s);
    for (Segment& s : path) sol.segments.push_back(s);
    if (std::abs(pt.subcell_lateral) <= 1e-9)
      for (auto it = pt.exterior_stub.rbegin(); it != pt.exterior_stub.rend(); ++it)
        sol.segments.push_back(reverse_segment(*it));
    for (auto it = pt.interior_stub.rbegin(); it != pt.interior_stub.rend(); ++it)
      sol.segments.push_back(reverse_segment(*it));

    sol.crossings = std::move(r.crossings);
    recompute_solution_metrics(sol, p);
    sol.il_pre_lrr_db = sol.il_db;
    routed[net] = 1;
    net_widths[net] = nets[net].first.width;
    net_layers[net] = nets[net].first.layer;
  }

  void init_arrays() {
    const int n = static_cast<int>(mod.nets.size());
    routed.assign(n, 0);
    finalized.assign(n, 0);
    ever_ripped.assign(n, 0);
    refine_used.assign(n, 0);
    rr_used.assign(n, 0);
    relax_level.assign(n, 0);
    net_widths.assign(n, 0.0);
    net_layers.assign(n, -1);
    nets.clear();
    nets.reserve(n);
    for (const NetDecl& nd : mod.nets)
      nets.emplace_back(resolve_endpoint(tree, mod, nd.src), resolve_endpoint(tree, mod, nd.dst));
  }

  void prepare() {
    const int n = static_cast<int>(mod.nets.size());
    init_arrays();
    out.nets.assign(n, RouteSolution{});
    for (int k = 0; k < n; ++k) out.nets[k].net = k;

    PortPrepOutcome prep_out = prepare_ports(nets, map, p);
    out.ports = std::move(prep_out.ports);
    out.warnings = std::move(prep_out.warnings);
    out.schedule = build_schedule(nets, out.ports);
    order = out.schedule.order;
  }

  // Adopt an already-routed result whose committed state lives in `map`
  // (a copy of the definition's final map), rip the nets selected for
  // occurrence-local repair, and block the intruding foreign footprints.
  void resume(const ModuleRouteResult& base, const std::vector<int>& again,
              const std::vector<Rect>& extra_blockages) {
    const int n = static_cast<int>(mod.nets.size());
    out = base;
    // Only work done here counts toward this (occurrence-local) result.
    out.total_expansions = 0;
    out.warnings.clear();
    init_arrays();
    order = out.schedule.order;
    for (int k = 0; k < n; ++k) {
      routed[k] = out.nets[k].routed ? 1 : 0;
      finalized[k] = (!out.nets[k].routed) ? 1 : 0;
      if (out.nets[k].routed) {
        net_widths[k] = nets[k].first.width;
        net_layers[k] = nets[k].first.layer;
      }
    }
    for (int k : again)
      if (k >= 0 && k < n) rip_net(k, false);
    for (const Rect& r : extra_blockages) map.block_rect_keep_routes(r, -1);
  }

  void negotiate() {
    const int n = static_cast<int>(mod.nets.size());
    long guard = 64 + static_cast<long>(n) * 32;
    while (guard-- > 0) {
      int net = -1;
      for (int cand : order) {
        if (!routed[cand] && !finalized[cand]) {
          net = cand;
          break;
        }
      }
      if (net < 0) break;

      PreparedPort& ps = prep(net, true);
      PreparedPort& pt = prep(net, false);
      if (ps.unreachable || pt.unreachable) {
        RouteSolution& sol = out.nets[net];
        sol.drvs.push_back("endpoint unreachable: " +
                           (ps.unreachable ? ps.error : pt.error));
        finalized[net] = 1;
        continue;
      }

      RouteResult r = attempt(net, relax_level[net], p.enable_crossings);
      if (r.success) {
        // LRR: compare a crossing-bearing solution against a crossing-free
        // alternative by insertion loss; rip a never-ripped blocker when no
        // crossing-free path exists at all.
        double pre_lrr_path_il = path_il(r, p);
        if (p.enable_lrr && p.enable_crossings && r.n_cross > 0) {
          RouteResult ncs = attempt(net, relax_level[net], false);
          if (ncs.success && path_il(ncs, p) < pre_lrr_path_il) {
            r = std::move(ncs);
          } else if (!ncs.success && !ncs.blocker_nets.empty()) {
            const int blocker = ncs.blocker_nets.front();
            if (blocker >= 0 && blocker < n && !ever_ripped[blocker] && routed[blocker]) {
              // One-shot rip of the net walling off the crossing-free
              // alternative; retry this net on the freed map.  The pending
              // result may cross the very net just ripped, so it must not
              // be committed.
              ever_ripped[blocker] = 1;
              rip_net(blocker, true);
              continue;
            }
          }
        }
        const double chosen_path_il = path_il(r, p);
        accept(net, std::move(r), relax_level[net]);
        if (out.nets[net].routed) {
          // Stub losses are common to both alternatives: pre-LRR total =
          // pre-LRR path loss + accepted stub overhead.
          const double stub_overhead = out.nets[net].il_db - chosen_path_il;
          out.nets[net].il_pre_lrr_db = pre_lrr_path_il + stub_overhead;
        }
        continue;
      }

      // Failure path: refine order, then history RR, then relax, then flag.
      if (refine_used[net] < p.refine_rounds) {
        RefineAction action;
        if (refine_order(order, net, out.ports, map, p, action)) {
          ++refine_used[net];
          for (int rip : action.rip) {
            if (rip != net) rip_net(rip, true);
          }
          order = action.new_order;
          continue;
        }
      }
      if (rr_used[net] < p.rr_rounds && !r.blocker_nets.empty()) {
        ++rr_used[net];
        int ripped = 0;
        for (int blocker : r.blocker_nets) {
          if (ripped >= 3) break;
          if (blocker >= 0 && blocker < n && map.is_committed(blocker)) {
            rip_net(blocker, true);
            ++ripped;
          }
        }
        if (ripped > 0) continue;
      }
      if (relax_level[net] < 2) {
        ++relax_level[net];
        continue;
      }
      finalize_failure(net, r);
    }

    // Guard exhaustion: finalize anything still pending as failed.
    for (int k = 0; k < n; ++k) {
      if (!routed[k] && !finalized[k]) {
        out.nets[k].drvs.push_back("scheduler guard exhausted");
        finalized[k] = 1;
      }
    }

    out.failed_nets = 0;
    out.relaxed_nets = 0;
    for (const RouteSolution& sol : out.nets) {
      if (!sol.routed)
        ++out.failed_nets;
      else if (sol.relax_used > 0)
        ++out.relaxed_nets;
    }
  }

  void run() {
    prepare();
    negotiate();
  }
};

} // namespace

ModuleRouteResult route_module(const NetlistTree& tree, int module_idx, GridMap& map,
                               const RouteParams& p) {
  const ModuleDef& mod = tree.modules[module_idx];
  Router router(tree, mod, map, p);
  router.run();
  return std::move(router.out);
}

ModuleRouteResult reroute_nets(const NetlistTree& tree, int module_idx, GridMap& map,
                               const ModuleRouteResult& base,
                               const std::vector<int>& nets_again,
                               const std::vector<Rect>& extra_blockages,
                               const RouteParams& p) {
  const ModuleDef& mod = tree.modules[module_idx];
  Router router(tree, mod, map, p);
  router.resume(base, nets_again, extra_blockages);
  router.negotiate();
  return std::move(router.out);
}

} // namespace waveroute
