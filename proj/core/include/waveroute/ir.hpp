// SPDX-License-Identifier: Apache-2.0
//
// Hierarchical photonic netlist: component/module definitions, placed
// instances, 2-pin optical nets, plus the YAML reader/writer and the
// structural validation pass (dangling refs, cyclic instantiation,
// placement overlaps).

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "waveroute/geom.hpp"

namespace waveroute {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Optical role of a component class; sources/sinks seed path enumeration.
enum class Role : std::uint8_t { kNone, kSource, kSink };

struct PortDef {
  std::string name;
  Vec2 at;             // component-local position
  double angle = 0.0;  // outward facing direction, degrees, local frame
  double width = 0.5;
  int layer = 1;
};

struct ComponentDef {
  std::string name;
  Rect bbox;
  double il_db = 0.0; // uniform insertion loss applied on any pass-through
  Role role = Role::kNone;
  std::vector<PortDef> ports;

  int port_index(const std::string& port) const;
  const PortDef& port(const std::string& name_) const;
};

struct Instance {
  std::string name;
  std::string ref;           // component or module definition name
  bool ref_is_module = false; // resolved during validation
  Vec2 at;
  int rot_deg = 0;
  bool mirror = false;

  Transform placement() const { return Transform{at, rot_deg, mirror}; }
};

struct Endpoint {
  std::string inst;
  std::string port;

  bool operator==(const Endpoint& o) const { return inst == o.inst && port == o.port; }
  std::string str() const { return inst + "," + port; }
};

struct NetDecl {
  std::string id;
  Endpoint src;
  Endpoint dst;
};

// Exported module port: alias onto an internal instance port, so parent
// modules can connect nets to a sub-module occurrence.
struct ModulePort {
  std::string name;
  Endpoint target;
};

struct ModuleDef {
  std::string name;
  Vec2 die_size;
  std::vector<ComponentDef> components;
  std::vector<Instance> instances;
  std::vector<NetDecl> nets;
  std::vector<ModulePort> ports;

  // Derived during validation.
  int height = 0; // 0 = leaf (no sub-module instances)

  int component_index(const std::string& name_) const;
  int instance_index(const std::string& name_) const;
  int port_index(const std::string& name_) const;
};

struct NetlistTree {
  std::string top;
  std::vector<ModuleDef> modules;

  int module_index(const std::string& name_) const;
  const ModuleDef& module(const std::string& name_) const;
  const ModuleDef& top_module() const { return module(top); }
};

// A net endpoint resolved to an absolute pose within its module frame.
struct ResolvedPort {
  Vec2 pos;
  double angle = 0.0; // outward facing direction
  double width = 0.5;
  int layer = 1;
  Rect owner_bbox;     // blockage footprint the port belongs to
  int instance_idx = -1;
  bool on_submodule = false;
  double device_il_db = 0.0;
};

// Parses and validates; throws ParseError naming the offending element.
NetlistTree parse_ir(const std::string& yaml_text);
NetlistTree load_ir_file(const std::string& path);
// Canonical YAML emission; parse(serialize(t)) reproduces t exactly.
std::string serialize_ir(const NetlistTree& tree);

// Resolves "inst,port" inside module m (descending through exported ports
// of sub-modules) to a pose in m's frame.
ResolvedPort resolve_endpoint(const NetlistTree& tree, const ModuleDef& m,
                              const Endpoint& ep);

// Modules of the given height that are reachable from top, each with every
// occurrence transform composed down from the top frame.
struct LevelGroup {
  int module_idx = -1;
  std::vector<Transform> occurrences;
};
std::vector<LevelGroup> flatten_level(const NetlistTree& tree, int height);
int tree_height(const NetlistTree& tree);

} // namespace waveroute
