// SPDX-License-Identifier: Apache-2.0

#include "waveroute/hier.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <thread>
#include <tuple>

namespace waveroute {

namespace {

int env_threads() {
  const char* e = std::getenv("WAVEROUTE_THREADS");
  if (!e) return 1;
  const int v = std::atoi(e);
  return std::max(1, std::min(v, 64));
}

// Fork-join over njobs independent tasks.
void run_jobs(int threads, int njobs, const std::function<void(int)>& fn) {
  if (threads <= 1 || njobs <= 1) {
    for (int k = 0; k < njobs; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int tcount = std::min(threads, njobs);
  pool.reserve(tcount);
  for (int t = 0; t < tcount; ++t) {
    pool.emplace_back([&] {
      for (int k = next.fetch_add(1); k < njobs; k = next.fetch_add(1)) fn(k);
    });
  }
  for (std::thread& th : pool) th.join();
}

// Preorder walk of all module occurrences from the top; fn receives
// (module_idx, to_top, path, parent_occ, inst_idx_in_parent) and the callee
// assigns indices in call order.
void walk_occurrences(
    const NetlistTree& tree,
    const std::function<void(int, const Transform&, const std::string&, int, int)>& fn) {
  const int top = tree.module_index(tree.top);
  if (top < 0) return;
  std::function<void(int, const Transform&, const std::string&, int, int)> rec =
      [&](int m, const Transform& to_top, const std::string& path, int parent, int inst) {
        fn(m, to_top, path, parent, inst);
        const ModuleDef& mod = tree.modules[m];
        for (std::size_t i = 0; i < mod.instances.size(); ++i) {
          const Instance& it = mod.instances[i];
          if (!it.ref_is_module) continue;
          const int child = tree.module_index(it.ref);
          if (child < 0) continue;
          const std::string cpath = path.empty() ? it.name : path + "/" + it.name;
          rec(child, to_top.compose(it.placement()), cpath, m, static_cast<int>(i));
        }
      };
  rec(top, Transform{}, "", -1, -1);
}

// Routes one definition on a fresh map; exceptions become warnings so worker
// threads never unwind across the join.
void route_definition(const NetlistTree& tree, int module_idx, const RouteParams& p,
                      ModuleRouteResult& result, GridMap& map) {
  const ModuleDef& mod = tree.modules[module_idx];
  try {
    map = GridMap(mod.die_size.x, mod.die_size.y, p.pitch);
    rasterize_blockages(tree, mod, map);
    result = route_module(tree, module_idx, map, p);
  } catch (const std::exception& e) {
    result = ModuleRouteResult{};
    result.failed_nets = static_cast<int>(mod.nets.size());
    result.warnings.push_back(std::string("routing aborted: ") + e.what());
  }
}

// Axis-aligned gap between two rectangles (zero when they overlap).
double rect_gap(const Rect& a, const Rect& b) {
  const double gx = std::max({a.lo.x - b.hi.x, b.lo.x - a.hi.x, 0.0});
  const double gy = std::max({a.lo.y - b.hi.y, b.lo.y - a.hi.y, 0.0});
  return std::max(gx, gy);
}

struct OccPoly {
  int net = -1;
  Polygon poly; // top frame
  Rect bbox;
};

} // namespace

HierLayout route_bottom_up(const NetlistTree& tree, const RouteParams& p) {
  const auto t0 = std::chrono::steady_clock::now();
  HierLayout out;
  out.def_result.assign(tree.modules.size(), -1);

  // Occurrence enumeration (preorder) and per-module occurrence lists.
  std::vector<std::vector<int>> occs_of_module(tree.modules.size());
  walk_occurrences(tree, [&](int m, const Transform& to_top, const std::string& path, int,
                             int) {
    OccurrencePlacement o;
    o.module_idx = m;
    o.to_top = to_top;
    o.path = path;
    occs_of_module[m].push_back(static_cast<int>(out.occurrences.size()));
    out.occurrences.push_back(std::move(o));
  });
  if (out.occurrences.empty()) {
    out.warnings.push_back("top module not found: " + tree.top);
    return out;
  }

  // Distinct reachable definitions, leaves first.
  std::vector<int> defs;
  for (std::size_t m = 0; m < tree.modules.size(); ++m)
    if (!occs_of_module[m].empty()) defs.push_back(static_cast<int>(m));
  std::stable_sort(defs.begin(), defs.end(), [&](int a, int b) {
    return tree.modules[a].height < tree.modules[b].height;
  });

  const int threads = env_threads();
  std::vector<GridMap> result_maps;
  std::vector<std::string> result_tag; // context prefix for surfaced warnings

  int level_start = 0;
  const int ndefs = static_cast<int>(defs.size());
  while (level_start < ndefs) {
    const int h = tree.modules[defs[level_start]].height;
    int level_end = level_start;
    while (level_end < ndefs && tree.modules[defs[level_end]].height == h) ++level_end;

    // One job per definition, or one per occurrence when reuse is disabled.
    struct Job {
      int module_idx;
      int occ_idx; // -1 for a shared definition-level route
    };
    std::vector<Job> jobs;
    for (int d = level_start; d < level_end; ++d) {
      if (p.enable_reuse) {
        jobs.push_back(Job{defs[d], -1});
      } else {
        for (int oc : occs_of_module[defs[d]]) jobs.push_back(Job{defs[d], oc});
      }
    }

    const int base = static_cast<int>(out.results.size());
    out.results.resize(base + jobs.size());
    result_maps.resize(base + jobs.size());
    result_tag.resize(base + jobs.size());
    run_jobs(threads, static_cast<int>(jobs.size()), [&](int k) {
      route_definition(tree, jobs[k].module_idx, p, out.results[base + k],
                       result_maps[base + k]);
    });
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      const int ridx = base + static_cast<int>(k);
      const int m = jobs[k].module_idx;
      if (jobs[k].occ_idx < 0) {
        if (out.def_result[m] < 0) out.def_result[m] = ridx;
        for (int oc : occs_of_module[m]) out.occurrences[oc].result_idx = ridx;
        result_tag[ridx] = "module " + tree.modules[m].name;
      } else {
        if (out.def_result[m] < 0) out.def_result[m] = ridx;
        OccurrencePlacement& o = out.occurrences[jobs[k].occ_idx];
        o.result_idx = ridx;
        o.reused = false;
        result_tag[ridx] =
            "module " + tree.modules[m].name + (o.path.empty() ? "" : " at " + o.path);
      }
    }
    level_start = level_end;
  }

  // Stamp-time spacing check: geometry of one occurrence against every
  // non-ancestor occurrence stamped before it.  Parent/child pairs are safe
  // by construction (child dies are blocked with clearance in the parent),
  // sibling and cousin dies placed close together are not.
  const int nocc = static_cast<int>(out.occurrences.size());
  std::vector<Rect> die_top(nocc);
  for (int oc = 0; oc < nocc; ++oc) {
    const ModuleDef& mod = tree.modules[out.occurrences[oc].module_idx];
    die_top[oc] = out.occurrences[oc].to_top.apply(Rect{{0, 0}, mod.die_size});
  }
  auto is_ancestor = [&](int i, int j) { // i strictly above j
    const std::string& a = out.occurrences[i].path;
    const std::string& b = out.occurrences[j].path;
    if (i == j) return false;
    if (a.empty()) return true;
    return b.size() > a.size() + 1 && b.compare(0, a.size(), a) == 0 && b[a.size()] == '/';
  };
  const double margin = p.min_spacing + p.default_width + 1.0;

  std::vector<std::vector<OccPoly>> polys(nocc);
  std::vector<char> polys_built(nocc, 0);
  auto build_polys = [&](int oc) {
    if (polys_built[oc]) return;
    polys_built[oc] = 1;
    const OccurrencePlacement& o = out.occurrences[oc];
    const ModuleRouteResult& res = out.results[o.result_idx];
    for (const RouteSolution& sol : res.nets) {
      if (!sol.routed) continue;
      for (Polygon poly : extrude_path_polys(sol.segments, p.extrude_tol)) {
        for (Vec2& v : poly) v = o.to_top.apply(v);
        Rect bb = polygon_bbox(poly);
        polys[oc].push_back(OccPoly{sol.net, std::move(poly), bb});
      }
    }
  };

  for (int j = 0; j < nocc; ++j) {
    std::vector<int> near;
    for (int i = 0; i < j; ++i) {
      if (is_ancestor(i, j) || is_ancestor(j, i)) continue;
      if (rect_gap(die_top[i], die_top[j]) >= margin) continue;
      near.push_back(i);
    }
    if (near.empty()) continue;

    for (int round = 0; round < 2; ++round) {
      build_polys(j);
      std::vector<int> viol_nets;
      std::vector<Rect> intruders_top;
      for (int i : near) {
        build_polys(i);
        for (const OccPoly& pj : polys[j]) {
          for (const OccPoly& pi : polys[i]) {
            if (rect_gap(pj.bbox, pi.bbox) >= p.min_spacing) continue;
            if (polygon_distance(pj.poly, pi.poly) >= p.min_spacing - 1e-6) continue;
            viol_nets.push_back(pj.net);
            intruders_top.push_back(pi.bbox);
          }
        }
      }
      if (viol_nets.empty()) break;
      std::sort(viol_nets.begin(), viol_nets.end());
      viol_nets.erase(std::unique(viol_nets.begin(), viol_nets.end()), viol_nets.end());

      OccurrencePlacement& o = out.occurrences[j];
      if (round == 1) {
        out.warnings.push_back("occurrence spacing repair incomplete" +
                               (o.path.empty() ? std::string() : " at " + o.path));
        break;
      }
      // Re-route only the violating nets with the foreign footprints blocked
      // (mapped into this occurrence's local frame).
      const Transform inv = o.to_top.inverse();
      std::vector<Rect> extra;
      extra.reserve(intruders_top.size());
      for (const Rect& r : intruders_top) extra.push_back(inv.apply(r.expanded(1e-6)));
      GridMap map = result_maps[o.result_idx];
      ModuleRouteResult fixed = reroute_nets(tree, o.module_idx, map,
                                             out.results[o.result_idx], viol_nets, extra, p);
      out.results.push_back(std::move(fixed));
      result_maps.push_back(std::move(map));
      result_tag.push_back("module " + tree.modules[o.module_idx].name +
                           (o.path.empty() ? "" : " at " + o.path));
      o.result_idx = static_cast<int>(out.results.size()) - 1;
      o.reused = false;
      o.fixed_nets = viol_nets;
      polys[j].clear();
      polys_built[j] = 0;
    }
  }

  // Aggregate: expansions count actual work (per result), failure counts are
  // per occurrence so reuse on/off report identical totals.
  for (std::size_t r = 0; r < out.results.size(); ++r) {
    out.total_expansions += out.results[r].total_expansions;
    for (const std::string& w : out.results[r].warnings)
      out.warnings.push_back(result_tag[r] + ": " + w);
  }
  for (const OccurrencePlacement& o : out.occurrences) {
    out.failed_nets += out.results[o.result_idx].failed_nets;
    out.relaxed_nets += out.results[o.result_idx].relaxed_nets;
  }
  out.route_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

FlatDesign flatten_design(const NetlistTree& tree, const HierLayout& layout,
                          const RouteParams& p) {
  (void)p;
  FlatDesign fd;
  const int nocc = static_cast<int>(layout.occurrences.size());
  std::vector<std::vector<int>> child_occ(nocc); // [occ][inst] -> occ index
  std::vector<std::vector<int>> flat_dev(nocc);  // [occ][inst] -> device row

  // Rebuild the parent->child occurrence mapping with the identical walk.
  {
    int counter = 0;
    walk_occurrences(tree, [&](int m, const Transform&, const std::string& path, int,
                               int inst_in_parent) {
      const int id = counter++;
      if (id >= nocc || layout.occurrences[id].module_idx != m) {
        if (fd.warnings.empty())
          fd.warnings.push_back("occurrence table mismatch while flattening");
        return;
      }
      child_occ[id].assign(tree.modules[m].instances.size(), -1);
      flat_dev[id].assign(tree.modules[m].instances.size(), -1);
      // Find the parent occurrence: nearest previous id whose path is the
      // parent prefix of ours.
      if (inst_in_parent >= 0) {
        const std::string parent_path =
            path.find('/') == std::string::npos ? std::string()
                                                : path.substr(0, path.rfind('/'));
        for (int q = id - 1; q >= 0; --q) {
          if (layout.occurrences[q].path == parent_path) {
            child_occ[q][inst_in_parent] = id;
            break;
          }
        }
      }
    });
  }

  // Devices.
  for (int oc = 0; oc < nocc; ++oc) {
    const OccurrencePlacement& o = layout.occurrences[oc];
    const ModuleDef& mod = tree.modules[o.module_idx];
    const std::string pfx = o.path.empty() ? "" : o.path + "/";
    for (std::size_t ii = 0; ii < mod.instances.size(); ++ii) {
      const Instance& inst = mod.instances[ii];
      if (inst.ref_is_module) continue;
      const int ci = mod.component_index(inst.ref);
      if (ci < 0) continue;
      FlatDevice d;
      d.name = pfx + inst.name;
      d.occ = oc;
      d.module_idx = o.module_idx;
      d.inst_idx = static_cast<int>(ii);
      d.def = &mod.components[ci];
      d.to_top = o.to_top.compose(inst.placement());
      d.bbox_top = d.to_top.apply(mod.components[ci].bbox);
      flat_dev[oc][ii] = static_cast<int>(fd.devices.size());
      fd.devices.push_back(std::move(d));
    }
  }

  // Endpoint -> flat device, descending through exported module ports.
  std::function<int(int, const Endpoint&)> resolve_flat = [&](int oc,
                                                              const Endpoint& ep) -> int {
    const ModuleDef& mod = tree.modules[layout.occurrences[oc].module_idx];
    const int ii = mod.instance_index(ep.inst);
    if (ii < 0) return -1;
    const Instance& inst = mod.instances[ii];
    if (!inst.ref_is_module) return flat_dev[oc][ii];
    const int child = child_occ[oc][ii];
    if (child < 0) return -1;
    const ModuleDef& cm = tree.module(inst.ref);
    const int pi = cm.port_index(ep.port);
    if (pi < 0) return -1;
    return resolve_flat(child, cm.ports[pi].target);
  };

  // Nets.
  for (int oc = 0; oc < nocc; ++oc) {
    const OccurrencePlacement& o = layout.occurrences[oc];
    const ModuleDef& mod = tree.modules[o.module_idx];
    const ModuleRouteResult& res = layout.results[o.result_idx];
    const std::string pfx = o.path.empty() ? "" : o.path + "/";
    for (std::size_t k = 0; k < mod.nets.size(); ++k) {
      FlatNet fnet;
      fnet.name = pfx + mod.nets[k].id;
      fnet.occ = oc;
      fnet.net = static_cast<int>(k);
      fnet.sol = k < res.nets.size() ? &res.nets[k] : nullptr;
      fnet.to_top = o.to_top;
      fnet.device_a = resolve_flat(oc, mod.nets[k].src);
      fnet.device_b = resolve_flat(oc, mod.nets[k].dst);
      if (fnet.sol) {
        fnet.segments_top.reserve(fnet.sol->segments.size());
        for (const Segment& s : fnet.sol->segments)
          fnet.segments_top.push_back(transform_segment(o.to_top, s));
      }
      fd.nets.push_back(std::move(fnet));
    }
  }
  return fd;
}

} // namespace waveroute
