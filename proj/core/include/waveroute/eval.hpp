// SPDX-License-Identifier: Apache-2.0
//
// Quality evaluation of a routed design: pairwise polygon clearance audit,
// optical source-to-sink path enumeration over the flat connectivity graph,
// worst-path insertion loss, and report rendering (human table + JSON).

#pragma once

#include <string>
#include <vector>

#include "waveroute/hier.hpp"

namespace waveroute {

// One clearance violation between two flat owners (nets or devices).
struct SpacingViolation {
  std::string a;
  std::string b;
  double dist_um = 0.0;
  Vec2 where;
};

// Full pairwise clearance audit over extruded net geometry and device
// outlines, bucketed spatially.  Exempt pairs: a net against itself, a net
// against its two endpoint devices, two nets at a registered crossing of
// theirs (only near that crossing's footprint), and device/device pairs
// (instance placement is the input's responsibility).  One violation is
// reported per offending owner pair.
std::vector<SpacingViolation> audit_spacing(const FlatDesign& fd, const RouteParams& p);

// One optical path from a source device to a sink device.
struct OpticalPath {
  std::string id;           // "<source>-><sink>#<k>"
  std::vector<int> devices; // FlatDesign device indices, source..sink
  std::vector<int> nets;    // FlatDesign net indices between them
  double il_db = 0.0;
  bool complete = true;     // false when some net on the chain is unrouted
};

struct PathEnumeration {
  std::vector<OpticalPath> paths;
  bool cyclic = false;    // a loop was found (flagged, not traversed)
  bool truncated = false; // enumeration cap hit
};

// Depth-first enumeration of simple device paths; pass-through devices relay
// light from any attached net to any other.
PathEnumeration enumerate_paths(const FlatDesign& fd, std::size_t max_paths = 200000);

struct NetReport {
  std::string name;
  bool routed = false;
  int relax_used = 0;
  bool self_intersecting = false;
  double wl_um = 0.0;
  double bend_deg = 0.0;
  int n_cross = 0;
  double il_db = 0.0;
  std::vector<std::string> drvs;
};

struct ILReport {
  std::vector<NetReport> nets;
  std::size_t n_paths = 0;
  double il_max_db = 0.0;
  std::string il_max_path; // witness id; ties broken by smallest id
  double il_mean_db = 0.0; // over complete paths
  bool cyclic = false;
  bool truncated = false;
  int total_crossings = 0;
  double total_wl_um = 0.0;
  double total_bend_deg = 0.0;
  int unrouted = 0;
  int self_intersections = 0;
  std::vector<SpacingViolation> violations;
  int drv_count = 0; // spacing violations + unrouted + self-intersections
  double wall_seconds = 0.0; // filled by the caller (pipeline timing)
};

ILReport build_report(const FlatDesign& fd, const PathEnumeration& pe,
                      const std::vector<SpacingViolation>& violations,
                      const RouteParams& p);

std::string report_json(const ILReport& r);
std::string report_text(const ILReport& r);

// Re-derive length and accumulated bend from sampled centerlines (an
// independent check against the closed-form per-segment bookkeeping).
void recompute_wl_bend(const std::vector<Segment>& segs, double tol, double& wl_um,
                       double& bend_deg);

} // namespace waveroute
