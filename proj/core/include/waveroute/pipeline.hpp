// SPDX-License-Identifier: Apache-2.0
//
// End-to-end driver: parse -> hierarchical route -> flatten -> audit ->
// path enumeration -> report -> artifact emission, with the CI exit-code
// contract (0 clean, 2 flagged DRVs, 1 input error).

#pragma once

#include <string>

#include "waveroute/eval.hpp"
#include "waveroute/hier.hpp"
#include "waveroute/ir.hpp"
#include "waveroute/params.hpp"

namespace waveroute {

struct RunConfig {
  std::string input;        // IR file path; when empty, `ir_text` is parsed instead
  std::string ir_text;      // inline IR (tests)
  RouteParams params;
  std::string out_gds;      // artifact paths; empty = skip
  std::string out_svg;
  std::string out_json;
  std::string out_report;   // machine-readable report JSON
};

// Holds the full run state.  FlatDesign keeps pointers into `tree` and
// `layout`, so RunResult is move-only; do not mutate tree/layout afterwards.
struct RunResult {
  int exit_code = 1;
  std::string error;        // set when exit_code == 1
  NetlistTree tree;
  HierLayout layout;
  FlatDesign flat;
  std::vector<SpacingViolation> violations;
  PathEnumeration paths;
  ILReport report;

  RunResult() = default;
  RunResult(const RunResult&) = delete;
  RunResult& operator=(const RunResult&) = delete;
  RunResult(RunResult&&) = default;
  RunResult& operator=(RunResult&&) = default;
};

RunResult run_pipeline(const RunConfig& cfg);

} // namespace waveroute
