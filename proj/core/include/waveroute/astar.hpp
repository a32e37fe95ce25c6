// SPDX-License-Identifier: Apache-2.0
//
// Curvy-aware A* over directional grid nodes (cell x, cell y, one of eight
// headings). Moves are real waveguide shapes: unit straights, 90-degree
// circular arcs, 45-degree fitted bends whose landing cells come from the
// bend-radius step table, sine S-jogs that absorb lateral misalignment near
// the target, and straight passages that insert a crossing over a committed
// perpendicular waveguide. Costs are insertion-loss based with soft
// penalties for group corridors, crossing corridors and rip-up history.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "waveroute/grid.hpp"
#include "waveroute/params.hpp"

namespace waveroute {

struct SearchNode {
  int x = 0;
  int y = 0;
  Dir8 dir = 0;

  bool operator==(const SearchNode& o) const { return x == o.x && y == o.y && dir == o.dir; }
};

// Grid displacements of the bend moves for a (radius, pitch) pair:
//   step90 = ceil(r/s)            (both axes of a quarter turn)
//   step45_fwd = ceil((sqrt(2)-1) * r/s)   (along the current heading)
//   step45_lat = ceil((1-sqrt(2)/2) * r/s) (perpendicular)
struct NeighborSteps {
  int step90 = 0;
  int step45_fwd = 0;
  int step45_lat = 0;
};
NeighborSteps compute_steps(double radius, double pitch);

// One directed search edge: landing node plus the instantiated centerline.
struct Candidate {
  SearchNode to;
  Segment seg;
  std::optional<CrossingEvent> crossing;
  // Charged (search) costs; floored so the remaining-cost heuristic never
  // overestimates: propagation at least the octile metric of the step box,
  // bend at least 45 degrees for any heading-changing or jog move.
  double prop_cost = 0.0;
  double bend_cost = 0.0;
};

// Pure move generation (no legality): 5 candidates from an axis heading
// (forward, two 45s, two 90s), 3 from a diagonal heading (forward, two 45s
// back to the axes).
std::vector<Candidate> gen_neighbors(const SearchNode& n, const GridMap& map,
                                     const RouteParams& p, double width);

// Sine-jog candidate toward a coaxial target whose lateral misalignment is
// under the bend radius; empty unless the node heads along the target
// arrival heading within 4r of it.
std::vector<Candidate> offset_neighbors(const SearchNode& n, const SearchNode& target,
                                        const GridMap& map, const RouteParams& p,
                                        double width);

// Straight corridor that should stay available for a future crossing.
struct CrossingCorridor {
  Vec2 a;
  Vec2 b;
  double half_width = 0.0;
};

struct RouteRequest {
  int net = -1;
  SearchNode src;
  SearchNode dst;
  double width = 0.5;
  int layer = 1;
  // Reservations this net may enter (its own two access regions).
  std::vector<std::int32_t> own_ports;
  // Group-corridor penalty half-width in cells (0 disables).
  int group_halfwidth = 0;
  std::vector<CrossingCorridor> corridors;
  // Per-net width/layer for crossing port matching (indexed by net id).
  const std::vector<double>* net_widths = nullptr;
  const std::vector<int>* net_layers = nullptr;
  // 0 = full rules; 1 = clearance ring off; 2 = also permits entering
  // foreign reservations. Hard occupancy and crossing legality always hold.
  int relax = 0;
};

struct RouteResult {
  bool success = false;
  std::vector<Segment> path; // crossing passages split out as kCrossing pieces
  std::vector<CrossingEvent> crossings;
  double search_cost = 0.0; // charged g at the target node
  double length = 0.0;      // real centerline length
  double bend_deg = 0.0;    // real accumulated |dtheta|
  int n_cross = 0;
  bool self_intersecting = false;
  long expansions = 0;
  // Nets whose occupancy rejected the most candidates (descending), and
  // ports whose reservations did; feeds order refinement.
  std::vector<int> blocker_nets;
  std::vector<std::int32_t> blocker_ports;
};

RouteResult route_net(const GridMap& map, const RouteRequest& req, const RouteParams& p);

// Charged edge cost components shared with the exhaustive-search oracle in
// tests: alpha_w * max(real length, octile(step box)) and
// alpha_b * max(real bend, 45 if the move bends or jogs).
double charged_prop_cost(const Segment& seg, int dx_cells, int dy_cells, const RouteParams& p);
double charged_bend_cost(const Segment& seg, const RouteParams& p);

// Remaining-cost lower bound (octile distance plus one 45-degree bend when
// both displacement components are nonzero).
double heuristic_cost(const SearchNode& n, const SearchNode& target, const RouteParams& p);

} // namespace waveroute
