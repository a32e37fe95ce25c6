// SPDX-License-Identifier: Apache-2.0

#include "waveroute/bench_gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace waveroute {

namespace {

// Portable deterministic uniform draw (the mt19937_64 stream is fully
// specified by the standard; distribution classes are not).
struct Rng {
  std::mt19937_64 g;
  explicit Rng(std::uint64_t seed) : g(seed) {}
  double uni(double lo, double hi) {
    const double u = static_cast<double>(g() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
};

PortDef port(const std::string& name, double x, double y, double angle) {
  PortDef p;
  p.name = name;
  p.at = {x, y};
  p.angle = angle;
  p.width = 0.5;
  p.layer = 1;
  return p;
}

ComponentDef comp(const std::string& name, double w, double h, double il, Role role,
                  std::vector<PortDef> ports) {
  ComponentDef c;
  c.name = name;
  c.bbox = Rect{{0, 0}, {w, h}};
  c.il_db = il;
  c.role = role;
  c.ports = std::move(ports);
  return c;
}

void inst(ModuleDef& m, const std::string& name, const std::string& ref, double x, double y) {
  Instance i;
  i.name = name;
  i.ref = ref;
  i.at = {x, y};
  m.instances.push_back(std::move(i));
}

void net(ModuleDef& m, const std::string& si, const std::string& sp, const std::string& di,
         const std::string& dp) {
  NetDecl n;
  n.id = "n" + std::to_string(m.nets.size());
  n.src = {si, sp};
  n.dst = {di, dp};
  m.nets.push_back(std::move(n));
}

double preset_gap(const BenchSpec& s, double spacious, double compact, double compact_plus) {
  if (s.pitch_x > 0.0) return s.pitch_x;
  if (s.preset == "spacious") return spacious;
  if (s.preset == "compact") return compact;
  if (s.preset == "compact_plus") return compact_plus;
  throw ParseError("unknown preset: " + s.preset);
}

void set_die(ModuleDef& m, const BenchSpec& s, double auto_w, double auto_h) {
  m.die_size = {auto_w, auto_h};
  if (s.die.x > 0.0 && s.die.y > 0.0) {
    if (s.die.x < auto_w - 1e-9 || s.die.y < auto_h - 1e-9)
      throw ParseError("die override too small: placement needs " + std::to_string(auto_w) +
                       " x " + std::to_string(auto_h));
    m.die_size = s.die;
  }
}

// ---------------------------------------------------------------------------
// Clements rectangular MZI mesh: N modes, N columns, nearest-neighbor MZIs,
// laser / phase-shifter / detector columns.  Zero topological crossings.
// ---------------------------------------------------------------------------
NetlistTree gen_clements(const BenchSpec& s, Rng& rng) {
  const int n = s.n;
  if (n < 2) throw ParseError("clements needs n >= 2");
  const double g = preset_gap(s, 20, 12, 10);
  const double dy = 7.0; // mode pitch, fixed by the MZI port geometry

  ModuleDef m;
  m.name = "clements_" + std::to_string(n);
  m.components.push_back(comp("laser", 10, 7, 2.5, Role::kSource, {port("out", 10, 3.5, 0)}));
  m.components.push_back(
      comp("detector", 10, 7, 2.5, Role::kSink, {port("in", 0, 3.5, 180)}));
  m.components.push_back(comp("mzi", 30, 12, 1.2, Role::kNone,
                              {port("in0", 0, 2.5, 180), port("in1", 0, 9.5, 180),
                               port("out0", 30, 2.5, 0), port("out1", 30, 9.5, 0)}));
  m.components.push_back(
      comp("ps", 12, 7, 0.3, Role::kNone, {port("in", 0, 3.5, 180), port("out", 12, 3.5, 0)}));

  const double y0 = 10;
  auto mode_y = [&](int mode) { return y0 + mode * dy + 0.5; };
  const double x0 = 12 + g + 10; // laser column at x=12
  const double col_w = 30 + g;

  // Lasers.
  for (int mode = 0; mode < n; ++mode) {
    const double jit = s.misalign > 0 ? rng.uni(-s.misalign, s.misalign) : 0.0;
    inst(m, "las" + std::to_string(mode), "laser", 12, mode_y(mode) - 3.5 + jit);
  }
  // MZI columns; column c pairs modes (p, p+1) with p even for even columns.
  std::vector<std::vector<std::pair<std::string, std::string>>> producer(n);
  for (int mode = 0; mode < n; ++mode)
    producer[mode] = {{"las" + std::to_string(mode), "out"}};
  for (int c = 0; c < n; ++c) {
    const double x = x0 + c * col_w;
    for (int p = (c % 2 == 0) ? 0 : 1; p + 1 < n; p += 2) {
      const std::string name = "mzi" + std::to_string(c) + "_" + std::to_string(p);
      inst(m, name, "mzi", x, mode_y(p) - 2.5);
      net(m, producer[p].back().first, producer[p].back().second, name, "in0");
      net(m, producer[p + 1].back().first, producer[p + 1].back().second, name, "in1");
      producer[p].push_back({name, "out0"});
      producer[p + 1].push_back({name, "out1"});
    }
  }
  // Phase shifters and detectors.
  const double x_ps = x0 + n * col_w;
  const double x_det = x_ps + 12 + g;
  for (int mode = 0; mode < n; ++mode) {
    const double jit_ps = s.misalign > 0 ? rng.uni(-s.misalign, s.misalign) : 0.0;
    const double jit_det = s.misalign > 0 ? rng.uni(-s.misalign, s.misalign) : 0.0;
    const std::string ps = "ps" + std::to_string(mode);
    const std::string det = "det" + std::to_string(mode);
    inst(m, ps, "ps", x_ps, mode_y(mode) - 3.5 + jit_ps);
    inst(m, det, "detector", x_det, mode_y(mode) - 3.5 + jit_det);
    net(m, producer[mode].back().first, producer[mode].back().second, ps, "in");
    net(m, ps, "out", det, "in");
  }

  set_die(m, s, x_det + 10 + 12, y0 + (n - 1) * dy + 12 + 10);
  NetlistTree t;
  t.top = m.name;
  t.modules.push_back(std::move(m));
  return t;
}

// ---------------------------------------------------------------------------
// Benes butterfly fabric: 2*log2(N)-1 switch stages, shuffle wiring between
// stages.  Die is flush above/below the switch rows so inter-stage nets must
// resolve inside their channel, making the inversion count a true crossing
// lower bound.
// ---------------------------------------------------------------------------
NetlistTree gen_benes(const BenchSpec& s, Rng& rng) {
  const int n = s.n;
  int k = 0;
  while ((1 << k) < n) ++k;
  if ((1 << k) != n || n < 4) throw ParseError("benes needs n a power of two, n >= 4");
  // Channel capacity drives the stage gap: the widest shuffle sends ~n/2
  // vertical tracks through the same rows, each crossing site needing about
  // one crossing footprint plus clearance of lateral room.
  const double g = preset_gap(s, 4.5 * n + 40, 3.5 * n + 24, 3.5 * n + 12);
  const int stages = 2 * k - 1;

  ModuleDef m;
  m.name = "benes_" + std::to_string(n);
  m.components.push_back(comp("laser", 10, 7, 2.5, Role::kSource, {port("out", 10, 3.5, 0)}));
  m.components.push_back(
      comp("detector", 10, 7, 2.5, Role::kSink, {port("in", 0, 3.5, 180)}));
  m.components.push_back(comp("sw", 20, 12, 1.0, Role::kNone,
                              {port("in0", 0, 2.5, 180), port("in1", 0, 9.5, 180),
                               port("out0", 20, 2.5, 0), port("out1", 20, 9.5, 0)}));

  const double y0 = 1.0; // flush margin: no routing above/below the rows
  auto wire_y = [&](int j) { return y0 + 14.0 * (j / 2) + (j % 2 ? 9.5 : 2.5); };
  const double x_las = 1.0;
  const double x0 = x_las + 10 + g;
  const double stage_w = 20 + g;

  for (int st = 0; st < stages; ++st)
    for (int i = 0; i < n / 2; ++i)
      inst(m, "sw" + std::to_string(st) + "_" + std::to_string(i), "sw", x0 + st * stage_w,
           y0 + 14.0 * i);
  for (int j = 0; j < n; ++j) {
    const double jit = s.misalign > 0 ? rng.uni(-s.misalign, s.misalign) : 0.0;
    inst(m, "las" + std::to_string(j), "laser", x_las, wire_y(j) - 3.5 + jit);
    net(m, "las" + std::to_string(j), "out", "sw0_" + std::to_string(j / 2),
        j % 2 ? "in1" : "in0");
  }
  // Shuffle permutation in gap gidx: first half inverse shuffle, mirrored
  // half forward shuffle, block size halving toward the middle.
  auto gap_perm = [&](int gidx, int j) {
    const int ell = (gidx < k - 1) ? gidx : (2 * k - 3 - gidx);
    const int b = n >> ell;
    const int base = (j / b) * b;
    const int r = j - base;
    int t;
    if (gidx < k - 1)
      t = (r % 2 == 0) ? r / 2 : b / 2 + r / 2;
    else
      t = (r < b / 2) ? 2 * r : 2 * (r - b / 2) + 1;
    return base + t;
  };
  for (int gidx = 0; gidx + 1 < stages; ++gidx) {
    for (int j = 0; j < n; ++j) {
      const int t = gap_perm(gidx, j);
      net(m, "sw" + std::to_string(gidx) + "_" + std::to_string(j / 2),
          j % 2 ? "out1" : "out0",
          "sw" + std::to_string(gidx + 1) + "_" + std::to_string(t / 2),
          t % 2 ? "in1" : "in0");
    }
  }
  const double x_det = x0 + stages * stage_w;
  for (int j = 0; j < n; ++j) {
    const double jit = s.misalign > 0 ? rng.uni(-s.misalign, s.misalign) : 0.0;
    inst(m, "det" + std::to_string(j), "detector", x_det, wire_y(j) - 3.5 + jit);
    net(m, "sw" + std::to_string(stages - 1) + "_" + std::to_string(j / 2),
        j % 2 ? "out1" : "out0", "det" + std::to_string(j), "in");
  }

  set_die(m, s, x_det + 10 + 1, y0 + 14.0 * (n / 2 - 1) + 12 + 1);
  NetlistTree t;
  t.top = m.name;
  t.modules.push_back(std::move(m));
  return t;
}

// ---------------------------------------------------------------------------
// Two-level crossbar: an N x N grid of reused switch-node modules joined by
// short bus nets, lasers feeding rows from the west, detectors collecting
// rows eastward and columns southward.  Each node carries nine internal nets
// including an internal crossing, so definition reuse saves real work.
// ---------------------------------------------------------------------------
void build_xnode(ModuleDef& m) {
  m.name = "xnode";
  m.die_size = {60, 60};
  // Edge pads: zero-loss pass-throughs whose outer port sits exactly on the
  // node die edge (the module's exported boundary).
  m.components.push_back(comp("io_w", 4, 5, 0.0, Role::kNone,
                              {port("outer", 0, 2.5, 180), port("inner", 4, 2.5, 0)}));
  m.components.push_back(comp("io_e", 4, 5, 0.0, Role::kNone,
                              {port("outer", 4, 2.5, 0), port("inner", 0, 2.5, 180)}));
  m.components.push_back(comp("io_n", 5, 4, 0.0, Role::kNone,
                              {port("outer", 2.5, 4, 90), port("inner", 2.5, 0, 270)}));
  m.components.push_back(comp("io_s", 5, 4, 0.0, Role::kNone,
                              {port("outer", 2.5, 0, 270), port("inner", 2.5, 4, 90)}));
  // Horizontal coupler: in/thru on the bus, drop on the east face above thru.
  m.components.push_back(comp("cpl_h", 8, 6, 0.15, Role::kNone,
                              {port("in", 0, 2.5, 180), port("thru", 8, 2.5, 0),
                               port("drop", 8, 5.5, 0)}));
  // Vertical coupler: in from the north, thru south, drop on the west face.
  m.components.push_back(comp("cpl_v", 6, 8, 0.15, Role::kNone,
                              {port("in", 2.5, 8, 90), port("thru", 2.5, 0, 270),
                               port("drop", 0, 5.5, 180)}));
  m.components.push_back(comp("stub_h", 8, 6, 0.05, Role::kNone,
                              {port("in", 0, 2.5, 180), port("out", 8, 2.5, 0)}));
  m.components.push_back(comp("stub_v", 6, 8, 0.05, Role::kNone,
                              {port("in", 2.5, 8, 90), port("out", 2.5, 0, 270)}));
  m.components.push_back(
      comp("tapin", 6, 6, 0.05, Role::kNone, {port("out", 6, 3.5, 0)}));
  m.components.push_back(
      comp("tapn", 6, 6, 0.05, Role::kNone, {port("in", 3.5, 0, 270)}));
  m.components.push_back(
      comp("taps", 6, 6, 0.05, Role::kNone, {port("in", 3.5, 6, 90)}));

  inst(m, "pw", "io_w", 0, 28);   // outer (0, 30.5)
  inst(m, "pe", "io_e", 56, 28);  // outer (60, 30.5)
  inst(m, "pn", "io_n", 28, 56);  // outer (30.5, 60)
  inst(m, "ps", "io_s", 28, 0);   // outer (30.5, 0)
  inst(m, "c1", "cpl_h", 10, 28); // bus y = 30.5, drop at (18, 33.5)
  inst(m, "b", "stub_h", 36, 28);
  inst(m, "c", "stub_v", 28, 40);  // column x = 30.5
  inst(m, "c2", "cpl_v", 28, 24);  // drop at (28, 29.5)
  inst(m, "g1", "tapin", 8, 44);   // out (14, 47.5)
  inst(m, "h1", "tapn", 48, 48);   // in (51.5, 48) facing down
  inst(m, "g2", "tapin", 8, 52);   // out (14, 55.5)
  inst(m, "h2", "taps", 52, 36);   // in (55.5, 42) facing up

  net(m, "pw", "inner", "c1", "in");
  net(m, "c1", "thru", "b", "in"); // detours around c2, crossing the column
  net(m, "b", "out", "pe", "inner");
  net(m, "pn", "inner", "c", "in");
  net(m, "c", "out", "c2", "in");
  net(m, "c2", "thru", "ps", "inner");
  net(m, "c1", "drop", "c2", "drop");
  net(m, "g1", "out", "h1", "in");
  net(m, "g2", "out", "h2", "in");

  m.ports.push_back(ModulePort{"w", {"pw", "outer"}});
  m.ports.push_back(ModulePort{"e", {"pe", "outer"}});
  m.ports.push_back(ModulePort{"n", {"pn", "outer"}});
  m.ports.push_back(ModulePort{"s", {"ps", "outer"}});
}

NetlistTree gen_crossbar(const BenchSpec& s, Rng& rng) {
  const int n = s.n;
  if (n < 2) throw ParseError("crossbar needs n >= 2");
  const double g = preset_gap(s, 30, 20, 12);

  NetlistTree t;
  t.modules.emplace_back();
  build_xnode(t.modules.back());

  ModuleDef m;
  m.name = "crossbar_" + std::to_string(n);
  m.components.push_back(comp("laser", 10, 7, 2.5, Role::kSource, {port("out", 10, 3.5, 0)}));
  m.components.push_back(
      comp("det_e", 10, 7, 2.5, Role::kSink, {port("in", 0, 3.5, 180)}));
  m.components.push_back(
      comp("det_s", 7, 10, 2.5, Role::kSink, {port("in", 3.5, 10, 90)}));

  const double p = 60 + g;
  const double ox = g + 10 + g;
  const double oy = g + 10 + g;
  auto jit = [&]() { return s.misalign > 0 ? rng.uni(-s.misalign, s.misalign) : 0.0; };

  std::vector<std::vector<Vec2>> at(n, std::vector<Vec2>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      at[i][j] = {ox + j * p + jit(), oy + i * p + jit()};
      Instance it;
      it.name = "x" + std::to_string(i) + "_" + std::to_string(j);
      it.ref = "xnode";
      it.at = at[i][j];
      m.instances.push_back(std::move(it));
    }
  }
  auto node = [&](int i, int j) { return "x" + std::to_string(i) + "_" + std::to_string(j); };
  for (int i = 0; i < n; ++i) {
    inst(m, "las" + std::to_string(i), "laser", ox - g - 10, at[i][0].y + 30.5 - 3.5 + jit());
    net(m, "las" + std::to_string(i), "out", node(i, 0), "w");
    for (int j = 0; j + 1 < n; ++j) net(m, node(i, j), "e", node(i, j + 1), "w");
    inst(m, "de" + std::to_string(i), "det_e", ox + (n - 1) * p + 60 + g,
         at[i][n - 1].y + 30.5 - 3.5 + jit());
    net(m, node(i, n - 1), "e", "de" + std::to_string(i), "in");
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) net(m, node(i, j), "s", node(i + 1, j), "n");
    inst(m, "ds" + std::to_string(j), "det_s", at[n - 1][j].x + 30.5 - 3.5, oy - g - 10);
    net(m, node(n - 1, j), "s", "ds" + std::to_string(j), "in");
  }

  set_die(m, s, ox + (n - 1) * p + 60 + g + 10 + g, oy + (n - 1) * p + 60 + g + 10);
  t.top = m.name;
  t.modules.push_back(std::move(m));
  return t;
}

// ---------------------------------------------------------------------------
// Ring-switch analog: one central switch block, I/O spread along the die
// periphery (inputs west/north, outputs east/south), one net per I/O fanning
// into the block.  Channel depth scales with the bend radius.
// ---------------------------------------------------------------------------
NetlistTree gen_ring_switch(const BenchSpec& s, Rng& rng) {
  const int n = s.n;
  if (n < 4 || n % 4 != 0) throw ParseError("ring_switch needs n divisible by 4");
  const int per_side = n / 4;
  const double r = std::max(s.radius, 5.0);
  const double gap = (s.pitch_x > 0.0 ? s.pitch_x : 2.0 * r + 30.0);
  const double c = per_side * 15.0 + 20.0; // core edge length
  const double d = c + 2.0 * (gap + 24.0); // die edge length

  ModuleDef m;
  m.name = "ring_switch_" + std::to_string(n);
  {
    std::vector<PortDef> ports;
    for (int k = 0; k < per_side; ++k) {
      const double u = 17.5 + 15.0 * k;
      ports.push_back(port("w" + std::to_string(k), 0, u, 180));
      ports.push_back(port("n" + std::to_string(k), u, c, 90));
      ports.push_back(port("e" + std::to_string(k), c, u, 0));
      ports.push_back(port("s" + std::to_string(k), u, 0, 270));
    }
    m.components.push_back(comp("core", c, c, 3.0, Role::kNone, std::move(ports)));
  }
  m.components.push_back(comp("in_w", 10, 7, 2.5, Role::kSource, {port("out", 10, 3.5, 0)}));
  m.components.push_back(comp("in_n", 7, 10, 2.5, Role::kSource, {port("out", 3.5, 0, 270)}));
  m.components.push_back(comp("out_e", 10, 7, 2.5, Role::kSink, {port("in", 0, 3.5, 180)}));
  m.components.push_back(comp("out_s", 7, 10, 2.5, Role::kSink, {port("in", 3.5, 10, 90)}));

  const double core0 = std::floor((d - c) / 2.0); // integer core origin
  inst(m, "core", "core", core0, core0);

  // Uniform I/O lateral positions over a moderate span so the largest fan-in
  // offset stays within what two 45-degree bends plus a diagonal can absorb.
  const double span = c + 0.8 * gap;
  const double lo = (d - span) / 2.0;
  auto io_lat = [&](int k, double jit) {
    const double raw = lo + (k + 0.5) * span / per_side;
    return std::floor(raw) + 0.5 + jit;
  };
  auto jit = [&]() { return s.misalign > 0 ? rng.uni(-s.misalign, s.misalign) : 0.0; };
  for (int k = 0; k < per_side; ++k) {
    const std::string id = std::to_string(k);
    inst(m, "iw" + id, "in_w", 4, io_lat(k, jit()) - 3.5);
    net(m, "iw" + id, "out", "core", "w" + id);
    inst(m, "in" + id, "in_n", io_lat(k, jit()) - 3.5, d - 14);
    net(m, "in" + id, "out", "core", "n" + id);
    inst(m, "oe" + id, "out_e", d - 14, io_lat(k, jit()) - 3.5);
    net(m, "core", "e" + id, "oe" + id, "in");
    inst(m, "os" + id, "out_s", io_lat(k, jit()) - 3.5, 4);
    net(m, "core", "s" + id, "os" + id, "in");
  }

  set_die(m, s, d, d);
  NetlistTree t;
  t.top = m.name;
  t.modules.push_back(std::move(m));
  return t;
}

} // namespace

NetlistTree generate_bench(const BenchSpec& spec) {
  Rng rng(spec.seed);
  NetlistTree raw;
  if (spec.family == "clements")
    raw = gen_clements(spec, rng);
  else if (spec.family == "benes")
    raw = gen_benes(spec, rng);
  else if (spec.family == "crossbar")
    raw = gen_crossbar(spec, rng);
  else if (spec.family == "ring_switch")
    raw = gen_ring_switch(spec, rng);
  else
    throw ParseError("unknown bench family: " + spec.family);
  // Round-trip through the canonical text form: validates the structure and
  // derives instance/module metadata exactly as a file load would.
  return parse_ir(serialize_ir(raw));
}

} // namespace waveroute
