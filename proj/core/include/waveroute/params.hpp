// SPDX-License-Identifier: Apache-2.0
//
// Routing parameters: physical technology values (bend radius, crossing
// footprint, spacing, loss coefficients) and search/negotiation knobs.
// Loss coefficients follow published silicon-photonics figures: 1.5 dB/cm
// propagation, 0.005 dB per 90-degree bend, 0.52 dB per crossing.

#pragma once

#include <cmath>
#include <stdexcept>

namespace waveroute {

struct RouteParams {
  // Geometry / technology.
  double radius = 5.0;        // minimum bend radius, um
  double pitch = 1.0;         // routing grid pitch s, um
  double crossing_size = 5.0; // crossing footprint edge, um
  double min_spacing = 1.0;   // polygon-to-polygon clearance, um
  double default_width = 0.5; // waveguide width when ports omit it, um
  double extrude_tol = 0.01;  // chordal sampling tolerance, um

  // Insertion-loss cost coefficients.
  double alpha_w = 1.5e-4;     // dB per um of waveguide
  double alpha_b_per90 = 0.005; // dB per 90 degrees of bending (linear in angle)
  double alpha_c = 0.52;       // dB per crossing

  // Soft penalties (same dB scale as the loss terms).
  double lambda_c = 0.001;   // per occupied/corridor cell in a penalty band
  double lambda_h = 7.5e-5;  // per unit of rip-up history on a swept cell
  double history_inc = 1.0;  // history bump per freed cell on rip-up

  // Port access.
  double k_region = 1.0;     // reserved-region depth factor (depth = k_region * radius)
  int stagger_min_ports = 3; // faces with at least this many ports get staggered access

  // Negotiation bounds.
  int rr_rounds = 1;         // rip-up-and-reroute budget per net
  int refine_rounds = 3;     // order-refinement attempts per failing net
  long max_expansions = 4000000;

  // Feature toggles (ablations).
  bool enable_gcp = true;
  bool enable_offset_neighbors = true;
  bool enable_crossings = true;
  bool enable_lrr = true;
  bool enable_reuse = true;

  double alpha_b_per_deg() const { return alpha_b_per90 / 90.0; }

  // Rejects physically meaningless overrides (CLI guard).
  void validate() const {
    if (!(radius > 0)) throw std::invalid_argument("radius must be positive");
    if (!(pitch > 0)) throw std::invalid_argument("grid pitch must be positive");
    if (!(crossing_size > 0)) throw std::invalid_argument("crossing size must be positive");
    if (!(min_spacing >= 0)) throw std::invalid_argument("min spacing must be non-negative");
    if (!(default_width > 0)) throw std::invalid_argument("width must be positive");
    if (!(alpha_w >= 0) || !(alpha_b_per90 >= 0) || !(alpha_c >= 0))
      throw std::invalid_argument("loss coefficients must be non-negative");
    if (!(lambda_c >= 0) || !(lambda_h >= 0))
      throw std::invalid_argument("penalty weights must be non-negative");
    if (rr_rounds < 0 || refine_rounds < 0 || max_expansions <= 0)
      throw std::invalid_argument("search budgets must be non-negative");
  }
  // History pressure defaults to half the cost of one grid of waveguide.
  static double default_lambda_h(double alpha_w_, double pitch_) {
    return 0.5 * alpha_w_ * pitch_;
  }
};

} // namespace waveroute
