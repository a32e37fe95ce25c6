// SPDX-License-Identifier: Apache-2.0
//
// GDSII stream output: a plain document model (structures holding layered
// polygons and placed references) plus a big-endian byte writer.  The model
// is exposed so tests can compare an independent re-parse of the bytes
// against exactly what was emitted.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "waveroute/geom.hpp"
#include "waveroute/hier.hpp"
#include "waveroute/ir.hpp"
#include "waveroute/params.hpp"

namespace waveroute {

struct GdsPolygon {
  int layer = 0;
  Polygon pts; // open ring; the writer repeats the first point to close
};

struct GdsRef {
  std::string child;
  Vec2 at{0, 0};
  double rot_deg = 0.0;
  bool mirror = false; // reflect about x axis before rotating, GDSII STRANS
};

struct GdsStruct {
  std::string name;
  std::vector<GdsPolygon> polygons;
  std::vector<GdsRef> refs;
};

struct GdsDoc {
  std::string libname = "WAVEROUTE";
  double dbu_per_user = 1e-3; // database units per user unit (1 nm per um)
  double dbu_meters = 1e-9;   // one database unit in meters
  std::vector<GdsStruct> structs; // children precede parents; last is top
};

struct GdsLayers {
  int die = 0;
  int waveguide = 1;
  int crossing = 2;
  int device = 10;
};

// Builds the hierarchical document: one structure per module routing variant
// (modules whose occurrences all reused the definition route get exactly one
// structure; occurrence-local repairs fork name-suffixed variants).
GdsDoc build_gds(const NetlistTree& tree, const HierLayout& layout, const RouteParams& p,
                 const GdsLayers& layers = {});

// Serializes to GDSII stream bytes.  Throws std::runtime_error if any
// coordinate overflows the signed 32-bit database-unit range.
std::vector<std::uint8_t> gds_bytes(const GdsDoc& doc);

void write_gds(const GdsDoc& doc, const std::string& path);

} // namespace waveroute
