// SPDX-License-Identifier: Apache-2.0
//
// Port preparation: propagate interior ports to device boundaries, snap
// access points onto the routing grid, reserve bend-aware access regions,
// spread congested ports, and stagger aligned fan-out channels.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "waveroute/astar.hpp"
#include "waveroute/geom.hpp"
#include "waveroute/grid.hpp"
#include "waveroute/ir.hpp"
#include "waveroute/params.hpp"

namespace waveroute {

inline std::int32_t port_uid(int net, bool is_source) { return net * 2 + (is_source ? 0 : 1); }

// A routable endpoint after preparation. `node.dir` is the outward heading
// (the direction a waveguide leaves the port); callers flip it for targets.
struct PreparedPort {
  std::int32_t uid = -1;
  int net = -1;
  bool is_source = true;
  int instance_idx = -1; // owning device; its footprint is a sanctioned neighbor
  Pose port_pose;                     // exact resolved pose, angle = outward
  Pose access_pose;                   // stub tip on a cell center
  SearchNode node{0, 0, 0};
  std::vector<Segment> interior_stub; // inside the owner footprint, geometry only
  std::vector<Segment> exterior_stub; // committed to the net, crossable
  Rect region{{0, 0}, {0, 0}};        // reserved access rectangle
  bool has_region = false;
  double subcell_lateral = 0.0;       // residual lateral offset, fixed in refinement
  bool unreachable = false;
  std::string error;
};

struct PortPrepOutcome {
  std::vector<PreparedPort> ports; // [2k] = source of net k, [2k+1] = its target
  std::vector<std::string> warnings;
};

// Ray-cast an interior port to its owner bounding box boundary along the
// port's outward heading.
struct Propagated {
  Pose boundary_pose;
  double stub_len = 0.0;
  bool ok = true;
  std::string error;
};
Propagated propagate_port(const ResolvedPort& port);

// Depth in cells of a reserved access region.
int access_region_depth_cells(const RouteParams& p);

// Stub extension lengths (from the boundary, in microns) for `count` aligned
// ports of one fan-out face: an arithmetic progression starting at the base
// region depth with the crossing footprint as the step.
std::vector<double> stagger_extensions(int count, const RouteParams& p);

// Symmetric positions about `center` at the given spacing, ascending.
std::vector<double> spread_positions(int count, double center, double spacing);

// Full preparation for one module's nets. nets[k] = (source, target) resolved
// ports of net k. Mutates the map: blocks nothing, reserves access regions and
// commits exterior stubs under their nets' ids.
PortPrepOutcome prepare_ports(const std::vector<std::pair<ResolvedPort, ResolvedPort>>& nets,
                              GridMap& map, const RouteParams& p);

// Re-commit a port's exterior stub after its net was ripped up.
bool recommit_stub(const PreparedPort& port, GridMap& map);

} // namespace waveroute
