// SPDX-License-Identifier: Apache-2.0

#include "waveroute/emit.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "waveroute/ir.hpp" // ParseError

namespace waveroute {

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

void emit_segments(const std::string& owner, int layer, const std::vector<Segment>& segs,
                   double tol, std::vector<LayoutPoly>& out) {
  std::vector<Segment> run;
  auto flush = [&]() {
    if (run.empty()) return;
    Polygon poly = extrude_path(run, tol);
    run.clear();
    if (poly.size() >= 3) out.push_back({owner, layer, false, std::move(poly)});
  };
  for (const Segment& s : segs) {
    if (s.kind == SegKind::kCrossing) {
      flush();
      const Vec2 c = (s.start.pos + s.end.pos) * 0.5;
      const double h = s.size / 2.0;
      out.push_back({owner, layer, true,
                     rect_polygon({{c.x - h, c.y - h}, {c.x + h, c.y + h}})});
    } else {
      run.push_back(s);
    }
  }
  flush();
}

} // namespace

bool operator==(const LayoutPoly& a, const LayoutPoly& b) {
  if (a.owner != b.owner || a.layer != b.layer || a.crossing != b.crossing ||
      a.pts.size() != b.pts.size())
    return false;
  for (std::size_t i = 0; i < a.pts.size(); ++i)
    if (a.pts[i].x != b.pts[i].x || a.pts[i].y != b.pts[i].y) return false;
  return true;
}

bool operator==(const LayoutDoc& a, const LayoutDoc& b) {
  return a.die.x == b.die.x && a.die.y == b.die.y && a.polys == b.polys;
}

LayoutDoc build_layout(const NetlistTree& tree, const FlatDesign& fd, const RouteParams& p) {
  LayoutDoc doc;
  doc.die = tree.top_module().die_size;
  for (const FlatDevice& d : fd.devices) {
    if (!d.def) continue;
    Polygon box = rect_polygon(d.def->bbox);
    for (Vec2& v : box) v = d.to_top.apply(v);
    doc.polys.push_back({d.name, 10, false, std::move(box)});
  }
  for (const FlatNet& n : fd.nets) {
    if (!n.sol || !n.sol->routed) continue;
    emit_segments(n.name, 1, n.segments_top, p.extrude_tol, doc.polys);
  }
  return doc;
}

std::string layout_json(const LayoutDoc& doc) {
  std::string out;
  out.reserve(1 << 16);
  out += "{\n  \"die\": [" + num(doc.die.x) + ", " + num(doc.die.y) + "],\n  \"polys\": [";
  for (std::size_t i = 0; i < doc.polys.size(); ++i) {
    const LayoutPoly& p = doc.polys[i];
    out += i ? ",\n    " : "\n    ";
    out += "{\"owner\": \"" + json_escape(p.owner) + "\", \"layer\": " +
           std::to_string(p.layer) + ", \"crossing\": " + (p.crossing ? "true" : "false") +
           ", \"pts\": [";
    for (std::size_t k = 0; k < p.pts.size(); ++k) {
      if (k) out += ", ";
      out += "[" + num(p.pts[k].x) + ", " + num(p.pts[k].y) + "]";
    }
    out += "]}";
  }
  out += doc.polys.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

LayoutDoc read_layout_json(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text); // JSON is a subset of YAML flow syntax
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("layout json: ") + e.what());
  }
  if (!root.IsMap() || !root["die"] || !root["polys"])
    throw ParseError("layout json: missing die/polys");
  LayoutDoc doc;
  doc.die = {root["die"][0].as<double>(), root["die"][1].as<double>()};
  for (const YAML::Node& pn : root["polys"]) {
    LayoutPoly p;
    p.owner = pn["owner"].as<std::string>();
    p.layer = pn["layer"].as<int>();
    p.crossing = pn["crossing"].as<bool>();
    for (const YAML::Node& vn : pn["pts"]) p.pts.push_back({vn[0].as<double>(), vn[1].as<double>()});
    doc.polys.push_back(std::move(p));
  }
  return doc;
}

void write_layout_json(const LayoutDoc& doc, const std::string& path) {
  write_text(path, layout_json(doc));
}

std::string svg_text(const LayoutDoc& doc) {
  std::string out;
  out.reserve(1 << 16);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 %.6g %.6g\">\n",
                doc.die.x, doc.die.y);
  out += buf;
  out += "<style>.dev{fill:#b8c4d8;stroke:#51607a;stroke-width:0.2}"
         ".wg{fill:#1f77b4;fill-opacity:0.85}"
         ".crossing{fill:#d62728;fill-opacity:0.9}</style>\n";
  std::snprintf(buf, sizeof(buf), "<g transform=\"translate(0,%.6g) scale(1,-1)\">\n",
                doc.die.y);
  out += buf;
  for (const LayoutPoly& p : doc.polys) {
    if (p.pts.empty()) continue;
    out += "<path class=\"";
    out += p.crossing ? "crossing" : (p.layer == 10 ? "dev" : "wg");
    out += "\" d=\"";
    for (std::size_t k = 0; k < p.pts.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%c%.4f %.4f", k == 0 ? 'M' : 'L', p.pts[k].x,
                    p.pts[k].y);
      out += buf;
    }
    out += "Z\"/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

void write_svg(const LayoutDoc& doc, const std::string& path) {
  write_text(path, svg_text(doc));
}

} // namespace waveroute
