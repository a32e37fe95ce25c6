// SPDX-License-Identifier: Apache-2.0

#include "waveroute/ir.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace waveroute {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ParseError(msg); }

double to_double(const YAML::Node& n, const std::string& ctx) {
  if (!n || !n.IsScalar()) fail(ctx + ": expected a number");
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    fail(ctx + ": invalid number '" + n.Scalar() + "'");
  }
}

int to_int(const YAML::Node& n, const std::string& ctx) {
  if (!n || !n.IsScalar()) fail(ctx + ": expected an integer");
  try {
    return n.as<int>();
  } catch (const YAML::Exception&) {
    fail(ctx + ": invalid integer '" + n.Scalar() + "'");
  }
}

bool to_bool(const YAML::Node& n, const std::string& ctx) {
  if (!n || !n.IsScalar()) fail(ctx + ": expected a boolean");
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    fail(ctx + ": invalid boolean '" + n.Scalar() + "'");
  }
}

Vec2 to_vec2(const YAML::Node& n, const std::string& ctx) {
  if (!n || !n.IsSequence() || n.size() != 2) fail(ctx + ": expected [x, y]");
  return {to_double(n[0], ctx), to_double(n[1], ctx)};
}

Rect to_rect(const YAML::Node& n, const std::string& ctx) {
  if (!n || !n.IsSequence() || n.size() != 4) fail(ctx + ": expected [x0, y0, x1, y1]");
  Rect r{{to_double(n[0], ctx), to_double(n[1], ctx)},
         {to_double(n[2], ctx), to_double(n[3], ctx)}};
  if (!r.valid()) fail(ctx + ": bbox has negative extent");
  return r;
}

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

Endpoint to_endpoint(const std::string& text, const std::string& ctx) {
  const size_t comma = text.find(',');
  if (comma == std::string::npos) fail(ctx + ": endpoint '" + text + "' must be 'instance,port'");
  Endpoint ep{trim(text.substr(0, comma)), trim(text.substr(comma + 1))};
  if (ep.inst.empty() || ep.port.empty())
    fail(ctx + ": endpoint '" + text + "' must name both instance and port");
  return ep;
}

PortDef parse_port(const std::string& name, const YAML::Node& n, const std::string& ctx) {
  if (!n.IsMap()) fail(ctx + ": port '" + name + "' must be a map");
  PortDef p;
  p.name = name;
  p.at = to_vec2(n["at"], ctx + " port '" + name + "' at");
  p.angle = to_double(n["angle"], ctx + " port '" + name + "' angle");
  if (n["width"]) p.width = to_double(n["width"], ctx + " port '" + name + "' width");
  if (n["layer"]) p.layer = to_int(n["layer"], ctx + " port '" + name + "' layer");
  if (p.width <= 0.0) fail(ctx + ": port '" + name + "' width must be positive");
  return p;
}

ComponentDef parse_component(const std::string& name, const YAML::Node& n,
                             const std::string& ctx) {
  if (!n.IsMap()) fail(ctx + ": component '" + name + "' must be a map");
  ComponentDef c;
  c.name = name;
  c.bbox = to_rect(n["bbox"], ctx + " component '" + name + "' bbox");
  if (n["il_db"]) c.il_db = to_double(n["il_db"], ctx + " component '" + name + "' il_db");
  if (n["role"]) {
    const std::string role = n["role"].as<std::string>();
    if (role == "source") c.role = Role::kSource;
    else if (role == "sink") c.role = Role::kSink;
    else fail(ctx + ": component '" + name + "' role must be 'source' or 'sink'");
  }
  if (n["ports"]) {
    if (!n["ports"].IsMap()) fail(ctx + ": component '" + name + "' ports must be a map");
    for (auto it : n["ports"]) {
      const std::string pname = it.first.as<std::string>();
      if (c.port_index(pname) >= 0)
        fail(ctx + ": component '" + name + "' duplicate port '" + pname + "'");
      c.ports.push_back(parse_port(pname, it.second, ctx + " component '" + name + "'"));
    }
  }
  return c;
}

Instance parse_instance(const std::string& name, const YAML::Node& n, const std::string& ctx) {
  if (!n.IsMap()) fail(ctx + ": instance '" + name + "' must be a map");
  Instance i;
  i.name = name;
  if (!n["ref"]) fail(ctx + ": instance '" + name + "' missing ref");
  i.ref = n["ref"].as<std::string>();
  i.at = to_vec2(n["at"], ctx + " instance '" + name + "' at");
  if (n["rot"]) i.rot_deg = to_int(n["rot"], ctx + " instance '" + name + "' rot");
  if (n["mirror"]) i.mirror = to_bool(n["mirror"], ctx + " instance '" + name + "' mirror");
  if (i.rot_deg % 90 != 0 || i.rot_deg < 0 || i.rot_deg >= 360)
    fail(ctx + ": instance '" + name + "' rot must be one of 0/90/180/270");
  return i;
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

} // namespace

int ComponentDef::port_index(const std::string& port) const {
  for (size_t i = 0; i < ports.size(); ++i)
    if (ports[i].name == port) return static_cast<int>(i);
  return -1;
}

const PortDef& ComponentDef::port(const std::string& name_) const {
  const int i = port_index(name_);
  if (i < 0) fail("component '" + name + "' has no port '" + name_ + "'");
  return ports[i];
}

int ModuleDef::component_index(const std::string& name_) const {
  for (size_t i = 0; i < components.size(); ++i)
    if (components[i].name == name_) return static_cast<int>(i);
  return -1;
}

int ModuleDef::instance_index(const std::string& name_) const {
  for (size_t i = 0; i < instances.size(); ++i)
    if (instances[i].name == name_) return static_cast<int>(i);
  return -1;
}

int ModuleDef::port_index(const std::string& name_) const {
  for (size_t i = 0; i < ports.size(); ++i)
    if (ports[i].name == name_) return static_cast<int>(i);
  return -1;
}

int NetlistTree::module_index(const std::string& name_) const {
  for (size_t i = 0; i < modules.size(); ++i)
    if (modules[i].name == name_) return static_cast<int>(i);
  return -1;
}

const ModuleDef& NetlistTree::module(const std::string& name_) const {
  const int i = module_index(name_);
  if (i < 0) fail("unknown module '" + name_ + "'");
  return modules[i];
}

namespace {

void validate_tree(NetlistTree& tree) {
  if (tree.module_index(tree.top) < 0) fail("top module '" + tree.top + "' not defined");

  // Resolve instance refs and reject ambiguity between a local component
  // name and a global module name.
  for (ModuleDef& m : tree.modules) {
    for (Instance& inst : m.instances) {
      const bool is_comp = m.component_index(inst.ref) >= 0;
      const bool is_mod = tree.module_index(inst.ref) >= 0;
      if (is_comp && is_mod)
        fail("module '" + m.name + "': instance '" + inst.name + "' ref '" + inst.ref +
             "' is both a component and a module");
      if (!is_comp && !is_mod)
        fail("module '" + m.name + "': instance '" + inst.name + "' has unknown ref '" +
             inst.ref + "'");
      inst.ref_is_module = is_mod;
    }
  }

  // Cyclic module instantiation.
  std::vector<int> color(tree.modules.size(), 0);
  std::function<void(int)> dfs = [&](int mi) {
    color[mi] = 1;
    for (const Instance& inst : tree.modules[mi].instances) {
      if (!inst.ref_is_module) continue;
      const int ci = tree.module_index(inst.ref);
      if (color[ci] == 1)
        fail("cyclic module instantiation through '" + tree.modules[ci].name + "'");
      if (color[ci] == 0) dfs(ci);
    }
    color[mi] = 2;
  };
  for (size_t i = 0; i < tree.modules.size(); ++i)
    if (color[i] == 0) dfs(static_cast<int>(i));

  // Heights (leaf = 0).
  std::function<int(int)> height = [&](int mi) -> int {
    ModuleDef& m = tree.modules[mi];
    int h = 0;
    for (const Instance& inst : m.instances)
      if (inst.ref_is_module)
        h = std::max(h, 1 + height(tree.module_index(inst.ref)));
    m.height = h;
    return h;
  };
  for (size_t i = 0; i < tree.modules.size(); ++i) height(static_cast<int>(i));

  for (ModuleDef& m : tree.modules) {
    const std::string ctx = "module '" + m.name + "'";
    if (m.die_size.x <= 0.0 || m.die_size.y <= 0.0) fail(ctx + ": die_size must be positive");

    // Exported ports resolve onto internal instance ports.
    for (const ModulePort& mp : m.ports) {
      const int ii = m.instance_index(mp.target.inst);
      if (ii < 0)
        fail(ctx + ": exported port '" + mp.name + "' references missing instance '" +
             mp.target.inst + "'");
      const Instance& inst = m.instances[ii];
      if (inst.ref_is_module) {
        const ModuleDef& child = tree.module(inst.ref);
        if (child.port_index(mp.target.port) < 0)
          fail(ctx + ": exported port '" + mp.name + "' references missing port '" +
               mp.target.port + "'");
      } else if (m.components[m.component_index(inst.ref)].port_index(mp.target.port) < 0) {
        fail(ctx + ": exported port '" + mp.name + "' references missing port '" +
             mp.target.port + "'");
      }
    }

    // Nets are 2-pin with distinct, resolvable endpoints.
    for (const NetDecl& net : m.nets) {
      const std::string nctx = ctx + " net '" + net.id + "'";
      if (net.src == net.dst) fail(nctx + ": source and target endpoints are identical");
      for (const Endpoint* ep : {&net.src, &net.dst}) {
        const int ii = m.instance_index(ep->inst);
        if (ii < 0) fail(nctx + ": unknown instance '" + ep->inst + "'");
        const Instance& inst = m.instances[ii];
        if (inst.ref_is_module) {
          if (tree.module(inst.ref).port_index(ep->port) < 0)
            fail(nctx + ": module instance '" + ep->inst + "' has no exported port '" +
                 ep->port + "'");
        } else if (m.components[m.component_index(inst.ref)].port_index(ep->port) < 0) {
          fail(nctx + ": instance '" + ep->inst + "' has no port '" + ep->port + "'");
        }
      }
    }
    for (size_t i = 0; i < m.nets.size(); ++i)
      for (size_t j = i + 1; j < m.nets.size(); ++j)
        if (m.nets[i].id == m.nets[j].id) fail(ctx + ": duplicate net id '" + m.nets[i].id + "'");

    // Placement: instances inside the die and pairwise non-overlapping.
    std::vector<Rect> boxes;
    boxes.reserve(m.instances.size());
    const Rect die{{0.0, 0.0}, {m.die_size.x, m.die_size.y}};
    for (const Instance& inst : m.instances) {
      Rect local = inst.ref_is_module
                       ? Rect{{0.0, 0.0},
                              {tree.module(inst.ref).die_size.x, tree.module(inst.ref).die_size.y}}
                       : m.components[m.component_index(inst.ref)].bbox;
      const Rect placed = inst.placement().apply(local);
      if (!die.contains(placed.lo) || !die.contains(placed.hi))
        fail(ctx + ": instance '" + inst.name + "' extends outside the die");
      boxes.push_back(placed);
    }
    for (size_t i = 0; i < boxes.size(); ++i)
      for (size_t j = i + 1; j < boxes.size(); ++j)
        if (boxes[i].overlaps(boxes[j]))
          fail(ctx + ": instances '" + m.instances[i].name + "' and '" + m.instances[j].name +
               "' overlap");
  }
}

} // namespace

NetlistTree parse_ir(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    fail(std::string("YAML syntax error: ") + e.what());
  }
  if (!root.IsMap()) fail("top level must be a map with 'top' and 'modules'");
  if (!root["top"]) fail("missing 'top' module name");
  if (!root["modules"] || !root["modules"].IsMap()) fail("missing 'modules' map");

  NetlistTree tree;
  tree.top = root["top"].as<std::string>();
  for (auto it : root["modules"]) {
    ModuleDef m;
    m.name = it.first.as<std::string>();
    const std::string ctx = "module '" + m.name + "'";
    const YAML::Node& mn = it.second;
    if (!mn.IsMap()) fail(ctx + ": must be a map");
    m.die_size = to_vec2(mn["die_size"], ctx + " die_size");
    if (mn["components"]) {
      if (!mn["components"].IsMap()) fail(ctx + ": components must be a map");
      for (auto c : mn["components"]) {
        const std::string cname = c.first.as<std::string>();
        if (m.component_index(cname) >= 0) fail(ctx + ": duplicate component '" + cname + "'");
        m.components.push_back(parse_component(cname, c.second, ctx));
      }
    }
    if (mn["instances"]) {
      if (!mn["instances"].IsMap()) fail(ctx + ": instances must be a map");
      for (auto i : mn["instances"]) {
        const std::string iname = i.first.as<std::string>();
        if (m.instance_index(iname) >= 0) fail(ctx + ": duplicate instance '" + iname + "'");
        m.instances.push_back(parse_instance(iname, i.second, ctx));
      }
    }
    if (mn["nets"]) {
      if (!mn["nets"].IsSequence()) fail(ctx + ": nets must be a sequence");
      for (const auto& n : mn["nets"]) {
        if (!n.IsMap() || !n["id"] || !n["src"] || !n["dst"])
          fail(ctx + ": each net needs id, src and dst");
        NetDecl net;
        net.id = n["id"].as<std::string>();
        net.src = to_endpoint(n["src"].as<std::string>(), ctx + " net '" + net.id + "' src");
        net.dst = to_endpoint(n["dst"].as<std::string>(), ctx + " net '" + net.id + "' dst");
        m.nets.push_back(net);
      }
    }
    if (mn["ports"]) {
      if (!mn["ports"].IsMap()) fail(ctx + ": ports must be a map");
      for (auto p : mn["ports"]) {
        ModulePort mp;
        mp.name = p.first.as<std::string>();
        if (m.port_index(mp.name) >= 0) fail(ctx + ": duplicate exported port '" + mp.name + "'");
        mp.target = to_endpoint(p.second.as<std::string>(), ctx + " port '" + mp.name + "'");
        m.ports.push_back(mp);
      }
    }
    if (tree.module_index(m.name) >= 0) fail("duplicate module '" + m.name + "'");
    tree.modules.push_back(std::move(m));
  }

  validate_tree(tree);
  return tree;
}

NetlistTree load_ir_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ir(ss.str());
}

std::string serialize_ir(const NetlistTree& tree) {
  std::ostringstream out;
  out << "top: " << tree.top << "\n";
  out << "modules:\n";
  for (const ModuleDef& m : tree.modules) {
    out << "  " << m.name << ":\n";
    out << "    die_size: [" << fmt_double(m.die_size.x) << ", " << fmt_double(m.die_size.y)
        << "]\n";
    if (!m.components.empty()) {
      out << "    components:\n";
      for (const ComponentDef& c : m.components) {
        out << "      " << c.name << ":\n";
        out << "        bbox: [" << fmt_double(c.bbox.lo.x) << ", " << fmt_double(c.bbox.lo.y)
            << ", " << fmt_double(c.bbox.hi.x) << ", " << fmt_double(c.bbox.hi.y) << "]\n";
        out << "        il_db: " << fmt_double(c.il_db) << "\n";
        if (c.role == Role::kSource) out << "        role: source\n";
        if (c.role == Role::kSink) out << "        role: sink\n";
        if (!c.ports.empty()) {
          out << "        ports:\n";
          for (const PortDef& p : c.ports) {
            out << "          " << p.name << ": {at: [" << fmt_double(p.at.x) << ", "
                << fmt_double(p.at.y) << "], angle: " << fmt_double(p.angle)
                << ", width: " << fmt_double(p.width) << ", layer: " << p.layer << "}\n";
          }
        }
      }
    }
    if (!m.instances.empty()) {
      out << "    instances:\n";
      for (const Instance& i : m.instances) {
        out << "      " << i.name << ": {ref: " << i.ref << ", at: [" << fmt_double(i.at.x)
            << ", " << fmt_double(i.at.y) << "], rot: " << i.rot_deg
            << ", mirror: " << (i.mirror ? "true" : "false") << "}\n";
      }
    }
    if (!m.nets.empty()) {
      out << "    nets:\n";
      for (const NetDecl& n : m.nets) {
        out << "      - {id: " << n.id << ", src: \"" << n.src.str() << "\", dst: \""
            << n.dst.str() << "\"}\n";
      }
    }
    if (!m.ports.empty()) {
      out << "    ports:\n";
      for (const ModulePort& p : m.ports)
        out << "      " << p.name << ": \"" << p.target.str() << "\"\n";
    }
  }
  return out.str();
}

ResolvedPort resolve_endpoint(const NetlistTree& tree, const ModuleDef& m, const Endpoint& ep) {
  const int ii = m.instance_index(ep.inst);
  if (ii < 0) fail("module '" + m.name + "': unknown instance '" + ep.inst + "'");
  const Instance& inst = m.instances[ii];
  const Transform place = inst.placement();

  if (!inst.ref_is_module) {
    const ComponentDef& comp = m.components[m.component_index(inst.ref)];
    const PortDef& p = comp.port(ep.port);
    ResolvedPort r;
    r.pos = place.apply(p.at);
    r.angle = place.apply_angle(p.angle);
    r.width = p.width;
    r.layer = p.layer;
    r.owner_bbox = place.apply(comp.bbox);
    r.instance_idx = ii;
    r.on_submodule = false;
    r.device_il_db = comp.il_db;
    return r;
  }

  const ModuleDef& child = tree.module(inst.ref);
  const int pi = child.port_index(ep.port);
  if (pi < 0)
    fail("module '" + m.name + "': instance '" + ep.inst + "' has no exported port '" +
         ep.port + "'");
  ResolvedPort inner = resolve_endpoint(tree, child, child.ports[pi].target);
  ResolvedPort r;
  r.pos = place.apply(inner.pos);
  r.angle = place.apply_angle(inner.angle);
  r.width = inner.width;
  r.layer = inner.layer;
  r.owner_bbox = place.apply(Rect{{0.0, 0.0}, {child.die_size.x, child.die_size.y}});
  r.instance_idx = ii;
  r.on_submodule = true;
  r.device_il_db = inner.device_il_db;
  return r;
}

int tree_height(const NetlistTree& tree) { return tree.top_module().height; }

std::vector<LevelGroup> flatten_level(const NetlistTree& tree, int height) {
  std::vector<LevelGroup> groups(tree.modules.size());
  for (size_t i = 0; i < tree.modules.size(); ++i)
    groups[i].module_idx = static_cast<int>(i);

  std::function<void(int, const Transform&)> walk = [&](int mi, const Transform& to_top) {
    groups[mi].occurrences.push_back(to_top);
    for (const Instance& inst : tree.modules[mi].instances) {
      if (!inst.ref_is_module) continue;
      walk(tree.module_index(inst.ref), to_top.compose(inst.placement()));
    }
  };
  walk(tree.module_index(tree.top), Transform{});

  std::vector<LevelGroup> out;
  for (auto& g : groups)
    if (!g.occurrences.empty() && tree.modules[g.module_idx].height == height)
      out.push_back(std::move(g));
  return out;
}

} // namespace waveroute
