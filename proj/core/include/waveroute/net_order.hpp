// SPDX-License-Identifier: Apache-2.0
//
// Routing-order decisions: port groups on shared device faces, group priority
// by shortest member net, spatial intra-group ordering, and failure-driven
// order refinement with monotone region extension.

#pragma once

#include <cstdint>
#include <vector>

#include "waveroute/geom.hpp"
#include "waveroute/grid.hpp"
#include "waveroute/params.hpp"
#include "waveroute/port_access.hpp"

namespace waveroute {

struct PortGroup {
  int id = 0;
  int instance_idx = -1; // shared device of the grouped target ports
  Dir8 face = 0;
  std::vector<int> nets; // member net ids
  int arrival = 0;       // FIFO stamp used to break equal-score ties
};

struct RoutingSchedule {
  std::vector<PortGroup> groups;   // in routing order
  std::vector<int> order;          // flattened net order (one entry per net)
  std::vector<int> group_of;       // net -> index into groups
  std::vector<char> swapped;       // net routed target->source when its
                                   // grouped (staggered) side is the source
};

// Group priority: the minimum Euclidean source-target distance over member
// nets; smaller routes first, FIFO on ties.
double group_score(const PortGroup& g,
                   const std::vector<std::pair<ResolvedPort, ResolvedPort>>& nets);

// Order member nets by Manhattan distance from each net's target port to the
// arithmetic mean of the group's source ports; stable, ties by net id.
std::vector<int> intra_group_order(const PortGroup& g,
                                   const std::vector<std::pair<ResolvedPort, ResolvedPort>>& nets);

// Build the full schedule. Targets are grouped by (device instance, face);
// nets whose target port carries no instance form singleton groups.
RoutingSchedule build_schedule(const std::vector<std::pair<ResolvedPort, ResolvedPort>>& nets,
                               const std::vector<PreparedPort>& ports);

// Failure refinement: scan from the failed net's target access point along
// its outward face direction, collect blocking nets in encounter order
// (committed waveguides and foreign reserved regions), and produce the nets
// to rip plus the new order. Returns false when no blocker was found on the
// scan (congestion-only failure; caller falls back to history-driven RR).
struct RefineAction {
  std::vector<int> rip;          // nets to rip up, encounter order
  std::vector<int> new_order;    // full permutation of all nets
  std::vector<std::int32_t> extend_ports; // port uids whose regions grew
};
bool refine_order(const std::vector<int>& current_order, int failed_net,
                  std::vector<PreparedPort>& ports, GridMap& map,
                  const RouteParams& p, RefineAction& action);

} // namespace waveroute
