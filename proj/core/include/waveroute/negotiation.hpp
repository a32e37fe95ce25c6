// SPDX-License-Identifier: Apache-2.0
//
// Outer routing loop for one module: schedule-driven net routing with
// failure-driven order refinement, history-based rip-up-and-reroute,
// crossing-vs-detour local optimization (LRR), terminal pose refinement,
// and graduated DRC relaxation for unroutable nets.

#pragma once

#include <string>
#include <vector>

#include "waveroute/astar.hpp"
#include "waveroute/grid.hpp"
#include "waveroute/ir.hpp"
#include "waveroute/net_order.hpp"
#include "waveroute/params.hpp"
#include "waveroute/port_access.hpp"

namespace waveroute {

struct RouteSolution {
  int net = -1;
  bool routed = false;
  int relax_used = 0;              // 0 clean, 1 spacing relaxed, 2 + reservations
  bool self_intersecting = false;
  std::vector<Segment> segments;   // full geometry, port to port
  std::vector<CrossingEvent> crossings;
  double wl = 0.0;                 // total centerline length, microns
  double bend_deg = 0.0;           // accumulated bend angle
  int n_cross = 0;
  double il_db = 0.0;              // net-level loss: alpha_w*wl + alpha_b*bend + alpha_c*n
  double il_pre_lrr_db = 0.0;      // loss of the first accepted solution
  std::vector<std::string> drvs;   // flagged relaxations / failures at routing time

  bool clean() const { return routed && relax_used == 0 && !self_intersecting; }
};

struct ModuleRouteResult {
  std::vector<RouteSolution> nets;
  std::vector<PreparedPort> ports;
  RoutingSchedule schedule;
  std::vector<std::string> warnings;
  long total_expansions = 0;
  int failed_nets = 0;
  int relaxed_nets = 0;
};

// Block every placed instance footprint (component bounding boxes and child
// module die rectangles) of `mod` into the map; owner ids are instance
// indices.
void rasterize_blockages(const NetlistTree& tree, const ModuleDef& mod, GridMap& map);

// Update solution bookkeeping fields (wl, bend, n_cross, il) from segments.
void recompute_solution_metrics(RouteSolution& sol, const RouteParams& p);

// Route all nets of one module on a map that already contains its blockages.
ModuleRouteResult route_module(const NetlistTree& tree, int module_idx, GridMap& map,
                               const RouteParams& p);

// Occurrence-local repair: starting from a definition's routed result (with
// `map` being a copy of that definition's final occupancy state), re-route
// only `nets_again` while keeping every other commitment, after blocking the
// intruding foreign footprints (module-frame rectangles).
ModuleRouteResult reroute_nets(const NetlistTree& tree, int module_idx, GridMap& map,
                               const ModuleRouteResult& base,
                               const std::vector<int>& nets_again,
                               const std::vector<Rect>& extra_blockages,
                               const RouteParams& p);

} // namespace waveroute
