// SPDX-License-Identifier: Apache-2.0
//
// Bottom-up hierarchical routing: every distinct module definition is routed
// once (leaves first) and its solution is stamped under each occurrence
// transform, after a spacing check against neighboring stamped geometry.
// Occurrences whose stamped placement is intruded on get only the violating
// nets re-routed locally.  A flattened view (top-frame devices, nets and
// geometry) feeds evaluation and output emission.

#pragma once

#include <string>
#include <vector>

#include "waveroute/negotiation.hpp"

namespace waveroute {

// One placed module occurrence in the top frame.
struct OccurrencePlacement {
  int module_idx = -1;
  Transform to_top;
  std::string path;            // slash-joined instance names; empty for top
  int result_idx = -1;         // into HierLayout::results
  bool reused = true;          // shares the definition-level result
  std::vector<int> fixed_nets; // occurrence-local re-routes (spacing repair)
};

// Whole-tree routing output: one result per distinct definition plus any
// occurrence-private repairs, and every occurrence's placement.
struct HierLayout {
  std::vector<ModuleRouteResult> results;
  std::vector<int> def_result;                  // module_idx -> results index, -1 unreachable
  std::vector<OccurrencePlacement> occurrences; // DFS preorder; [0] is top
  double route_seconds = 0.0;  // wall time spent routing definitions/repairs
  long total_expansions = 0;
  int failed_nets = 0;         // summed over occurrences
  int relaxed_nets = 0;        // summed over occurrences
  std::vector<std::string> warnings;

  const ModuleRouteResult& result_of(const OccurrencePlacement& o) const {
    return results[o.result_idx];
  }
};

// Flattened (top-frame) view of the routed design.
struct FlatDevice {
  std::string name; // occurrence path + instance name
  int occ = -1;
  int module_idx = -1;
  int inst_idx = -1;
  const ComponentDef* def = nullptr;
  Transform to_top;
  Rect bbox_top;
};

struct FlatNet {
  std::string name; // occurrence path + net id
  int occ = -1;
  int net = -1;                       // local net index within its module
  const RouteSolution* sol = nullptr; // local-frame solution
  Transform to_top;
  int device_a = -1; // FlatDesign::devices indices reached through exported ports
  int device_b = -1;
  std::vector<Segment> segments_top;  // solution geometry in the top frame
};

struct FlatDesign {
  std::vector<FlatDevice> devices;
  std::vector<FlatNet> nets;
  std::vector<std::string> warnings;
};

// Routes every module definition reachable from the top, leaves first.  With
// p.enable_reuse each definition is routed once and shared by all of its
// occurrences; without it every occurrence is routed independently (identical
// deterministic results, proportionally more work).  The WAVEROUTE_THREADS
// environment variable parallelizes independent jobs within a level.
HierLayout route_bottom_up(const NetlistTree& tree, const RouteParams& p);

// Expands layout occurrences into top-frame devices, nets and geometry.
FlatDesign flatten_design(const NetlistTree& tree, const HierLayout& layout,
                          const RouteParams& p);

} // namespace waveroute
