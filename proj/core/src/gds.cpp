// SPDX-License-Identifier: Apache-2.0

#include "waveroute/gds.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace waveroute {

namespace {

constexpr std::size_t kMaxBoundaryPts = 8190;

std::string sanitize_name(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '$' || c == '?';
    out.push_back(ok ? c : '_');
  }
  if (out.empty()) out = "M";
  if (out[0] >= '0' && out[0] <= '9') out.insert(out.begin(), 'S');
  if (out.size() > 28) out.resize(28); // leave room for variant suffixes
  return out;
}

// Extrudes a run of non-crossing segments, splitting recursively when the
// outline would exceed the BOUNDARY vertex limit (halves share their joint
// pose, so the pieces abut exactly).
void emit_run(const std::vector<Segment>& run, double tol, std::vector<GdsPolygon>& out,
              int layer) {
  if (run.empty()) return;
  Polygon poly = extrude_path(run, tol);
  if (poly.size() <= kMaxBoundaryPts) {
    if (poly.size() >= 3) out.push_back({layer, std::move(poly)});
    return;
  }
  if (run.size() == 1) throw std::runtime_error("GDS: single segment outline too dense");
  const std::size_t half = run.size() / 2;
  emit_run({run.begin(), run.begin() + half}, tol, out, layer);
  emit_run({run.begin() + half, run.end()}, tol, out, layer);
}

void emit_net_polys(const std::vector<Segment>& segs, double tol, const GdsLayers& layers,
                    std::vector<GdsPolygon>& out) {
  std::vector<Segment> run;
  for (const Segment& s : segs) {
    if (s.kind == SegKind::kCrossing) {
      emit_run(run, tol, out, layers.waveguide);
      run.clear();
      const Vec2 c = (s.start.pos + s.end.pos) * 0.5;
      const double h = s.size / 2.0;
      out.push_back({layers.crossing,
                     rect_polygon({{c.x - h, c.y - h}, {c.x + h, c.y + h}})});
    } else {
      run.push_back(s);
    }
  }
  emit_run(run, tol, out, layers.waveguide);
}

// ---------------------------------------------------------------------------
// Stream writer
// ---------------------------------------------------------------------------
enum RecType : std::uint8_t {
  kHeader = 0x00,
  kBgnLib = 0x01,
  kLibName = 0x02,
  kUnits = 0x03,
  kEndLib = 0x04,
  kBgnStr = 0x05,
  kStrName = 0x06,
  kEndStr = 0x07,
  kBoundary = 0x08,
  kSref = 0x0A,
  kLayer = 0x0D,
  kDataType = 0x0E,
  kXy = 0x10,
  kEndEl = 0x11,
  kSname = 0x12,
  kStrans = 0x1A,
  kAngle = 0x1C,
};

struct Writer {
  std::vector<std::uint8_t> b;

  void rec(std::uint8_t type, std::uint8_t dtype, const std::vector<std::uint8_t>& payload) {
    const std::size_t len = payload.size() + 4;
    if (len > 0xFFFF) throw std::runtime_error("GDS: record too long");
    b.push_back(static_cast<std::uint8_t>(len >> 8));
    b.push_back(static_cast<std::uint8_t>(len & 0xFF));
    b.push_back(type);
    b.push_back(dtype);
    b.insert(b.end(), payload.begin(), payload.end());
  }
  static void put16(std::vector<std::uint8_t>& p, std::int16_t v) {
    const auto u = static_cast<std::uint16_t>(v);
    p.push_back(static_cast<std::uint8_t>(u >> 8));
    p.push_back(static_cast<std::uint8_t>(u & 0xFF));
  }
  static void put32(std::vector<std::uint8_t>& p, std::int32_t v) {
    const auto u = static_cast<std::uint32_t>(v);
    for (int s = 24; s >= 0; s -= 8) p.push_back(static_cast<std::uint8_t>((u >> s) & 0xFF));
  }
  static void put64(std::vector<std::uint8_t>& p, std::uint64_t u) {
    for (int s = 56; s >= 0; s -= 8) p.push_back(static_cast<std::uint8_t>((u >> s) & 0xFF));
  }
  void rec16(std::uint8_t type, const std::vector<std::int16_t>& vals) {
    std::vector<std::uint8_t> p;
    for (std::int16_t v : vals) put16(p, v);
    rec(type, 0x02, p);
  }
  void ascii(std::uint8_t type, const std::string& s) {
    std::vector<std::uint8_t> p(s.begin(), s.end());
    if (p.size() % 2) p.push_back(0);
    rec(type, 0x06, p);
  }
};

// GDSII 8-byte real: sign bit, excess-64 base-16 exponent, 56-bit mantissa.
std::uint64_t to_real8(double v) {
  if (v == 0.0) return 0;
  std::uint64_t sign = 0;
  if (v < 0) {
    sign = 0x8000000000000000ull;
    v = -v;
  }
  int exp = 64;
  while (v >= 1.0) {
    v /= 16.0;
    ++exp;
  }
  while (v < 0.0625) {
    v *= 16.0;
    --exp;
  }
  auto mant = static_cast<std::uint64_t>(std::ldexp(v, 56) + 0.5);
  if (mant >> 56) {
    mant >>= 4;
    ++exp;
  }
  if (exp < 0 || exp > 127) throw std::runtime_error("GDS: real8 exponent out of range");
  return sign | (static_cast<std::uint64_t>(exp) << 56) | mant;
}

std::int32_t to_dbu(double um, double dbu_per_user) {
  const double v = std::round(um / dbu_per_user);
  if (!(v >= -2147483647.0 && v <= 2147483647.0))
    throw std::runtime_error("GDS: coordinate overflows 32-bit database units");
  return static_cast<std::int32_t>(v);
}

const std::vector<std::int16_t> kStamp = {2026, 1, 1, 0, 0, 0, 2026, 1, 1, 0, 0, 0};

} // namespace

GdsDoc build_gds(const NetlistTree& tree, const HierLayout& layout, const RouteParams& p,
                 const GdsLayers& layers) {
  GdsDoc doc;
  if (layout.occurrences.empty()) return doc;

  std::unordered_map<std::string, int> by_path;
  for (std::size_t i = 0; i < layout.occurrences.size(); ++i)
    by_path[layout.occurrences[i].path] = static_cast<int>(i);

  // Child occurrences of each occurrence, in instance order.
  const int nocc = static_cast<int>(layout.occurrences.size());
  std::vector<std::vector<int>> children(nocc);
  for (int i = 0; i < nocc; ++i) {
    const OccurrencePlacement& o = layout.occurrences[i];
    const ModuleDef& mod = tree.modules[o.module_idx];
    for (const Instance& in : mod.instances) {
      if (!in.ref_is_module) continue;
      const std::string cp = o.path.empty() ? in.name : o.path + "/" + in.name;
      auto it = by_path.find(cp);
      if (it == by_path.end()) throw std::runtime_error("GDS: occurrence tree inconsistent");
      children[i].push_back(it->second);
    }
  }

  // One structure per distinct (module, routing result, child-variant list).
  std::map<std::pair<int, std::string>, int> variant_struct; // (module, key) -> struct idx
  std::unordered_map<std::string, int> name_uses;
  std::vector<int> struct_of(nocc, -1);

  for (int i = nocc - 1; i >= 0; --i) {
    const OccurrencePlacement& o = layout.occurrences[i];
    std::string key = std::to_string(o.result_idx);
    for (int c : children[i]) key += "," + std::to_string(struct_of[c]);
    auto [it, inserted] = variant_struct.try_emplace({o.module_idx, key}, -1);
    if (!inserted) {
      struct_of[i] = it->second;
      continue;
    }
    const ModuleDef& mod = tree.modules[o.module_idx];
    GdsStruct st;
    std::string base = sanitize_name(mod.name);
    const int use = name_uses[base]++;
    st.name = use == 0 ? base : base + "__v" + std::to_string(use);

    st.polygons.push_back(
        {layers.die, rect_polygon({{0, 0}, {mod.die_size.x, mod.die_size.y}})});
    int mref = 0;
    for (const Instance& in : mod.instances) {
      if (in.ref_is_module) {
        const Transform tr = in.placement();
        st.refs.push_back({doc.structs[struct_of[children[i][mref++]]].name, tr.t,
                           static_cast<double>(tr.rot_deg), tr.mirror});
        continue;
      }
      const int ci = mod.component_index(in.ref);
      if (ci < 0) continue;
      const Transform tr = in.placement();
      Polygon box = rect_polygon(mod.components[ci].bbox);
      for (Vec2& v : box) v = tr.apply(v);
      st.polygons.push_back({layers.device, std::move(box)});
    }
    const ModuleRouteResult& res = layout.results[o.result_idx];
    for (const RouteSolution& sol : res.nets) {
      if (!sol.routed) continue;
      emit_net_polys(sol.segments, p.extrude_tol, layers, st.polygons);
    }
    const int idx = static_cast<int>(doc.structs.size());
    doc.structs.push_back(std::move(st));
    it->second = idx;
    struct_of[i] = idx;
  }
  return doc;
}

std::vector<std::uint8_t> gds_bytes(const GdsDoc& doc) {
  Writer w;
  w.rec16(kHeader, {600});
  w.rec16(kBgnLib, kStamp);
  w.ascii(kLibName, doc.libname);
  {
    std::vector<std::uint8_t> p;
    Writer::put64(p, to_real8(doc.dbu_per_user));
    Writer::put64(p, to_real8(doc.dbu_meters));
    w.rec(kUnits, 0x05, p);
  }
  for (const GdsStruct& st : doc.structs) {
    w.rec16(kBgnStr, kStamp);
    w.ascii(kStrName, st.name);
    for (const GdsPolygon& poly : st.polygons) {
      if (poly.pts.size() < 3 || poly.pts.size() > kMaxBoundaryPts)
        throw std::runtime_error("GDS: boundary vertex count out of range");
      w.rec(kBoundary, 0x00, {});
      w.rec16(kLayer, {static_cast<std::int16_t>(poly.layer)});
      w.rec16(kDataType, {0});
      std::vector<std::uint8_t> p;
      for (const Vec2& v : poly.pts) {
        Writer::put32(p, to_dbu(v.x, doc.dbu_per_user));
        Writer::put32(p, to_dbu(v.y, doc.dbu_per_user));
      }
      Writer::put32(p, to_dbu(poly.pts.front().x, doc.dbu_per_user));
      Writer::put32(p, to_dbu(poly.pts.front().y, doc.dbu_per_user));
      w.rec(kXy, 0x03, p);
      w.rec(kEndEl, 0x00, {});
    }
    for (const GdsRef& r : st.refs) {
      w.rec(kSref, 0x00, {});
      w.ascii(kSname, r.child);
      if (r.mirror || r.rot_deg != 0.0) {
        std::vector<std::uint8_t> p;
        Writer::put16(p, static_cast<std::int16_t>(r.mirror ? 0x8000 : 0));
        w.rec(kStrans, 0x01, p);
        if (r.rot_deg != 0.0) {
          std::vector<std::uint8_t> p2;
          Writer::put64(p2, to_real8(r.rot_deg));
          w.rec(kAngle, 0x05, p2);
        }
      }
      std::vector<std::uint8_t> p;
      Writer::put32(p, to_dbu(r.at.x, doc.dbu_per_user));
      Writer::put32(p, to_dbu(r.at.y, doc.dbu_per_user));
      w.rec(kXy, 0x03, p);
      w.rec(kEndEl, 0x00, {});
    }
    w.rec(kEndStr, 0x00, {});
  }
  w.rec(kEndLib, 0x00, {});
  return std::move(w.b);
}

void write_gds(const GdsDoc& doc, const std::string& path) {
  const std::vector<std::uint8_t> bytes = gds_bytes(doc);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

} // namespace waveroute
