// SPDX-License-Identifier: Apache-2.0
//
// Flat layout document (polygon soup) plus the JSON and SVG emitters.
// The JSON form round-trips losslessly: read_layout_json(layout_json(d)) == d.

#pragma once

#include <string>
#include <vector>

#include "waveroute/geom.hpp"
#include "waveroute/hier.hpp"
#include "waveroute/params.hpp"

namespace waveroute {

struct LayoutPoly {
  std::string owner; // flat net or device name
  int layer = 1;
  bool crossing = false;
  Polygon pts;
};

struct LayoutDoc {
  Vec2 die{0, 0};
  std::vector<LayoutPoly> polys;
};

bool operator==(const LayoutPoly& a, const LayoutPoly& b);
bool operator==(const LayoutDoc& a, const LayoutDoc& b);

// Flattened geometry: device outlines (marker layer 10), waveguide polygons
// (net layer), crossing squares (flagged).
LayoutDoc build_layout(const NetlistTree& tree, const FlatDesign& fd, const RouteParams& p);

std::string layout_json(const LayoutDoc& doc);
LayoutDoc read_layout_json(const std::string& text); // throws ParseError on bad input
void write_layout_json(const LayoutDoc& doc, const std::string& path);

// One <path> element per polygon; crossing polygons carry class="crossing";
// viewBox equals the die extent.
std::string svg_text(const LayoutDoc& doc);
void write_svg(const LayoutDoc& doc, const std::string& path);

} // namespace waveroute
