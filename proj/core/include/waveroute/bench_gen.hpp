// SPDX-License-Identifier: Apache-2.0
//
// Deterministic parameterized benchmark generators emitting routing IR:
//   clements    - rectangular MZI mesh, nearest-neighbor links, no crossings
//   benes       - butterfly-permutation switch fabric, dense crossings
//   crossbar    - two-level hierarchy: reused switch-node module + top grid
//   ring_switch - I/O uniformly on the periphery, central switch block
// All generation is a pure function of (spec, seed).

#pragma once

#include <cstdint>
#include <string>

#include "waveroute/ir.hpp"

namespace waveroute {

struct BenchSpec {
  std::string family = "clements"; // clements | benes | crossbar | ring_switch
  int n = 8;                       // ports/modes; power of two for benes
  double pitch_x = 0.0;            // inter-column gap, um; 0 = preset default
  double pitch_y = 0.0;            // row pitch where free, um; 0 = preset default
  Vec2 die{0.0, 0.0};              // die override; (0,0) = auto-size
  double misalign = 0.0;           // lateral port jitter amplitude, um
  std::uint64_t seed = 1;
  std::string preset = "spacious"; // spacious | compact | compact_plus
  double radius = 5.0;             // bend radius the layout must accommodate
};

// Throws ParseError on infeasible specs (unknown family/preset, non-power-of
// two benes, or a die override too small for the placement).
NetlistTree generate_bench(const BenchSpec& spec);

} // namespace waveroute
