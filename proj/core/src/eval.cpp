// SPDX-License-Identifier: Apache-2.0

#include "waveroute/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace waveroute {

namespace {

double point_rect_distance(const Vec2& p, const Rect& r) {
  const double dx = std::max({r.lo.x - p.x, p.x - r.hi.x, 0.0});
  const double dy = std::max({r.lo.y - p.y, p.y - r.hi.y, 0.0});
  return std::hypot(dx, dy);
}

std::int64_t pair_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// One auditable polygon with its exemption identity.
struct AuditEntry {
  Polygon poly;
  Rect bbox;
  int owner = -1; // 0..nets-1 = flat nets, then devices
};

} // namespace

std::vector<SpacingViolation> audit_spacing(const FlatDesign& fd, const RouteParams& p) {
  std::vector<SpacingViolation> out;
  const int n_nets = static_cast<int>(fd.nets.size());
  const int n_dev = static_cast<int>(fd.devices.size());

  // Registered crossings per unordered net pair (top-frame centers).
  std::unordered_map<std::int64_t, std::vector<std::pair<Vec2, double>>> cross_of;
  {
    // (occ, local net) -> flat net index.
    std::unordered_map<std::int64_t, int> row;
    for (int f = 0; f < n_nets; ++f)
      row[pair_key(fd.nets[f].occ, fd.nets[f].net)] = f;
    for (int f = 0; f < n_nets; ++f) {
      const FlatNet& fn = fd.nets[f];
      if (!fn.sol) continue;
      for (const CrossingEvent& ev : fn.sol->crossings) {
        auto it = row.find(pair_key(fn.occ, ev.other_net));
        if (it == row.end()) continue;
        cross_of[pair_key(f, it->second)].push_back(
            {fn.to_top.apply(ev.center), std::max(ev.size, p.crossing_size)});
      }
    }
  }

  // Per-segment polygons keep bounding boxes local so bucketing stays sharp.
  std::vector<AuditEntry> entries;
  for (int f = 0; f < n_nets; ++f) {
    const FlatNet& fn = fd.nets[f];
    if (!fn.sol || !fn.sol->routed) continue;
    for (const Segment& s : fn.segments_top) {
      std::vector<Segment> one{s};
      for (Polygon& poly : extrude_path_polys(one, p.extrude_tol)) {
        if (poly.size() < 3) continue;
        AuditEntry e;
        e.bbox = polygon_bbox(poly);
        e.poly = std::move(poly);
        e.owner = f;
        entries.push_back(std::move(e));
      }
    }
  }
  for (int d = 0; d < n_dev; ++d) {
    AuditEntry e;
    e.poly = rect_polygon(fd.devices[d].bbox_top);
    e.bbox = fd.devices[d].bbox_top;
    e.owner = n_nets + d;
    entries.push_back(std::move(e));
  }

  // Spatial hash on bboxes inflated by half the clearance each.
  const double bucket = std::max(8.0 * p.min_spacing, 4.0 * p.crossing_size);
  std::unordered_map<std::int64_t, std::vector<int>> grid;
  auto bucket_key = [](int ix, int iy) {
    return (static_cast<std::int64_t>(ix) << 32) | static_cast<std::uint32_t>(iy);
  };
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Rect r = entries[k].bbox.expanded(p.min_spacing * 0.5 + 1e-9);
    const int ix0 = static_cast<int>(std::floor(r.lo.x / bucket));
    const int iy0 = static_cast<int>(std::floor(r.lo.y / bucket));
    const int ix1 = static_cast<int>(std::floor(r.hi.x / bucket));
    const int iy1 = static_cast<int>(std::floor(r.hi.y / bucket));
    for (int iy = iy0; iy <= iy1; ++iy)
      for (int ix = ix0; ix <= ix1; ++ix)
        grid[bucket_key(ix, iy)].push_back(static_cast<int>(k));
  }

  auto owner_name = [&](int owner) -> const std::string& {
    return owner < n_nets ? fd.nets[owner].name : fd.devices[owner - n_nets].name;
  };
  auto endpoint_exempt = [&](int net_owner, int dev_owner) {
    const FlatNet& fn = fd.nets[net_owner];
    const int d = dev_owner - n_nets;
    return fn.device_a == d || fn.device_b == d;
  };

  std::unordered_set<std::int64_t> checked;   // polygon pairs already compared
  std::unordered_set<std::int64_t> reported;  // owner pairs already reported
  for (const auto& kv : grid) {
    const std::vector<int>& list = kv.second;
    for (std::size_t a = 0; a < list.size(); ++a) {
      for (std::size_t b = a + 1; b < list.size(); ++b) {
        int i = list[a], j = list[b];
        if (i > j) std::swap(i, j);
        const AuditEntry& ei = entries[i];
        const AuditEntry& ej = entries[j];
        if (ei.owner == ej.owner) continue;
        const bool i_net = ei.owner < n_nets;
        const bool j_net = ej.owner < n_nets;
        if (!i_net && !j_net) continue; // device placement is not audited here
        if (reported.count(pair_key(ei.owner, ej.owner))) continue;
        if (i_net != j_net && endpoint_exempt(i_net ? ei.owner : ej.owner,
                                              i_net ? ej.owner : ei.owner))
          continue;
        const double bb_gap =
            std::max({ej.bbox.lo.x - ei.bbox.hi.x, ei.bbox.lo.x - ej.bbox.hi.x,
                      ej.bbox.lo.y - ei.bbox.hi.y, ei.bbox.lo.y - ej.bbox.hi.y});
        if (bb_gap >= p.min_spacing - 1e-6) continue;
        if (!checked.insert((static_cast<std::int64_t>(i) << 32) | j).second) continue;

        const double d = polygon_distance(ei.poly, ej.poly);
        if (d >= p.min_spacing - 1e-6) continue;

        // Two nets meeting at their own registered crossing are legal there.
        if (i_net && j_net) {
          auto it = cross_of.find(pair_key(ei.owner, ej.owner));
          if (it != cross_of.end()) {
            bool at_crossing = false;
            for (const auto& [c, size] : it->second) {
              if (point_rect_distance(c, ei.bbox) <= size &&
                  point_rect_distance(c, ej.bbox) <= size) {
                at_crossing = true;
                break;
              }
            }
            if (at_crossing) continue;
          }
        }

        reported.insert(pair_key(ei.owner, ej.owner));
        SpacingViolation v;
        v.a = owner_name(ei.owner);
        v.b = owner_name(ej.owner);
        v.dist_um = d;
        v.where = (ei.bbox.center() + ej.bbox.center()) * 0.5;
        out.push_back(std::move(v));
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const SpacingViolation& x, const SpacingViolation& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  return out;
}

PathEnumeration enumerate_paths(const FlatDesign& fd, std::size_t max_paths) {
  PathEnumeration pe;
  const int n_dev = static_cast<int>(fd.devices.size());
  // Light follows net direction: a net's source side is an out-port of its
  // device, the destination side an in-port, and a uniform-IL device routes
  // any in-port to any out-port.
  std::vector<std::vector<std::pair<int, int>>> adj(n_dev); // (net, downstream device)
  for (std::size_t f = 0; f < fd.nets.size(); ++f) {
    const FlatNet& fn = fd.nets[f];
    if (fn.device_a < 0 || fn.device_b < 0 || fn.device_a == fn.device_b) continue;
    adj[fn.device_a].push_back({static_cast<int>(f), fn.device_b});
  }

  std::vector<char> on_path(n_dev, 0);
  std::vector<int> dev_stack, net_stack;
  std::unordered_map<std::int64_t, int> pair_count;

  std::function<void(int)> dfs = [&](int dev) {
    if (pe.truncated) return;
    const Role role = fd.devices[dev].def->role;
    const bool at_start = dev_stack.size() == 1;
    if (!at_start && role == Role::kSink) {
      if (pe.paths.size() >= max_paths) {
        pe.truncated = true;
        return;
      }
      OpticalPath path;
      path.devices = dev_stack;
      path.nets = net_stack;
      for (int d : dev_stack) path.il_db += fd.devices[d].def->il_db;
      for (int nf : net_stack) {
        const FlatNet& fn = fd.nets[nf];
        if (!fn.sol || !fn.sol->routed) path.complete = false;
        if (fn.sol) path.il_db += fn.sol->il_db;
      }
      const int k = pair_count[pair_key(dev_stack.front(), dev)]++;
      path.id = fd.devices[dev_stack.front()].name + "->" + fd.devices[dev].name + "#" +
                std::to_string(k);
      pe.paths.push_back(std::move(path));
      return; // detectors absorb; nothing continues past a sink
    }
    if (!at_start && role == Role::kSource) return; // light cannot re-enter a source
    const int arrived_by = net_stack.empty() ? -1 : net_stack.back();
    for (const auto& [net, other] : adj[dev]) {
      if (net == arrived_by) continue;
      if (on_path[other]) {
        pe.cyclic = true;
        continue;
      }
      on_path[other] = 1;
      dev_stack.push_back(other);
      net_stack.push_back(net);
      dfs(other);
      net_stack.pop_back();
      dev_stack.pop_back();
      on_path[other] = 0;
      if (pe.truncated) return;
    }
  };

  for (int d = 0; d < n_dev; ++d) {
    if (fd.devices[d].def->role != Role::kSource) continue;
    on_path[d] = 1;
    dev_stack.push_back(d);
    dfs(d);
    dev_stack.pop_back();
    on_path[d] = 0;
    if (pe.truncated) break;
  }
  return pe;
}

ILReport build_report(const FlatDesign& fd, const PathEnumeration& pe,
                      const std::vector<SpacingViolation>& violations,
                      const RouteParams& p) {
  ILReport r;
  r.violations = violations;
  r.cyclic = pe.cyclic;
  r.truncated = pe.truncated;

  // Crossing loss applies to both waveguides of a crossing; the solver books
  // the event on the inserting net only, so credit the crossed side here.
  std::vector<int> crossed_count(fd.nets.size(), 0);
  {
    std::unordered_map<std::int64_t, int> row;
    for (std::size_t f = 0; f < fd.nets.size(); ++f)
      row[pair_key(fd.nets[f].occ, fd.nets[f].net)] = static_cast<int>(f);
    for (const FlatNet& fn : fd.nets) {
      if (!fn.sol) continue;
      for (const CrossingEvent& ev : fn.sol->crossings) {
        auto it = row.find(pair_key(fn.occ, ev.other_net));
        if (it != row.end()) ++crossed_count[it->second];
      }
    }
  }

  std::vector<double> net_il(fd.nets.size(), 0.0);
  for (std::size_t f = 0; f < fd.nets.size(); ++f) {
    const FlatNet& fn = fd.nets[f];
    NetReport nr;
    nr.name = fn.name;
    if (fn.sol) {
      const RouteSolution& sol = *fn.sol;
      nr.routed = sol.routed;
      nr.relax_used = sol.relax_used;
      nr.self_intersecting = sol.self_intersecting;
      nr.wl_um = sol.wl;
      nr.bend_deg = sol.bend_deg;
      nr.n_cross = sol.n_cross + crossed_count[f];
      nr.il_db = sol.il_db + p.alpha_c * crossed_count[f];
      nr.drvs = sol.drvs;
      r.total_crossings += sol.n_cross; // each event counted once (inserting side)
      r.total_wl_um += sol.wl;
      r.total_bend_deg += sol.bend_deg;
    }
    if (!nr.routed) ++r.unrouted;
    if (nr.self_intersecting) ++r.self_intersections;
    net_il[f] = nr.il_db;
    r.nets.push_back(std::move(nr));
  }

  r.n_paths = pe.paths.size();
  double sum = 0.0;
  std::size_t complete = 0;
  const OpticalPath* worst = nullptr;
  for (const OpticalPath& path : pe.paths) {
    if (!path.complete) continue;
    // Path loss with both-sides crossing accounting.
    double il = 0.0;
    for (int d : path.devices) il += fd.devices[d].def->il_db;
    for (int nf : path.nets) il += net_il[nf];
    sum += il;
    ++complete;
    const double cur = worst ? r.il_max_db : -1.0;
    if (!worst || il > cur + 1e-12 ||
        (std::abs(il - cur) <= 1e-12 && path.id < worst->id)) {
      worst = &path;
      r.il_max_db = il;
    }
  }
  if (complete > 0) r.il_mean_db = sum / static_cast<double>(complete);
  if (worst) r.il_max_path = worst->id;

  r.drv_count = static_cast<int>(violations.size()) + r.unrouted + r.self_intersections;
  return r;
}

namespace {

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
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

} // namespace

std::string report_json(const ILReport& r) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"il_max_db\": " << num(r.il_max_db) << ",\n";
  os << "  \"il_max_path\": \"" << json_escape(r.il_max_path) << "\",\n";
  os << "  \"il_mean_db\": " << num(r.il_mean_db) << ",\n";
  os << "  \"n_paths\": " << r.n_paths << ",\n";
  os << "  \"cyclic\": " << (r.cyclic ? "true" : "false") << ",\n";
  os << "  \"truncated\": " << (r.truncated ? "true" : "false") << ",\n";
  os << "  \"crossings\": " << r.total_crossings << ",\n";
  os << "  \"total_wl_um\": " << num(r.total_wl_um) << ",\n";
  os << "  \"total_bend_deg\": " << num(r.total_bend_deg) << ",\n";
  os << "  \"wall_seconds\": " << num(r.wall_seconds) << ",\n";
  os << "  \"drv\": {\n";
  os << "    \"total\": " << r.drv_count << ",\n";
  os << "    \"spacing\": " << r.violations.size() << ",\n";
  os << "    \"unrouted\": " << r.unrouted << ",\n";
  os << "    \"self_intersections\": " << r.self_intersections << "\n";
  os << "  },\n";
  os << "  \"violations\": [";
  for (std::size_t i = 0; i < r.violations.size(); ++i) {
    const SpacingViolation& v = r.violations[i];
    os << (i ? ",\n    " : "\n    ");
    os << "{\"a\": \"" << json_escape(v.a) << "\", \"b\": \"" << json_escape(v.b)
       << "\", \"dist_um\": " << num(v.dist_um) << ", \"x\": " << num(v.where.x)
       << ", \"y\": " << num(v.where.y) << "}";
  }
  os << (r.violations.empty() ? "" : "\n  ") << "],\n";
  os << "  \"nets\": [";
  for (std::size_t i = 0; i < r.nets.size(); ++i) {
    const NetReport& n = r.nets[i];
    os << (i ? ",\n    " : "\n    ");
    os << "{\"name\": \"" << json_escape(n.name) << "\", \"routed\": "
       << (n.routed ? "true" : "false") << ", \"wl_um\": " << num(n.wl_um)
       << ", \"bend_deg\": " << num(n.bend_deg) << ", \"crossings\": " << n.n_cross
       << ", \"il_db\": " << num(n.il_db) << ", \"relaxed\": " << n.relax_used
       << ", \"drvs\": [";
    for (std::size_t k = 0; k < n.drvs.size(); ++k)
      os << (k ? ", " : "") << "\"" << json_escape(n.drvs[k]) << "\"";
    os << "]}";
  }
  os << (r.nets.empty() ? "" : "\n  ") << "]\n";
  os << "}\n";
  return os.str();
}

std::string report_text(const ILReport& r) {
  std::ostringstream os;
  char line[256];
  os << "net                              wl[um]    bend[deg]  #cr  il[dB]   flags\n";
  for (const NetReport& n : r.nets) {
    std::string flags;
    if (!n.routed) flags += " FAILED";
    if (n.relax_used > 0) flags += " relaxed" + std::to_string(n.relax_used);
    if (n.self_intersecting) flags += " selfx";
    std::snprintf(line, sizeof line, "%-32s %9.2f %10.1f %4d %7.3f  %s\n",
                  n.name.c_str(), n.wl_um, n.bend_deg, n.n_cross, n.il_db,
                  flags.c_str());
    os << line;
  }
  std::snprintf(line, sizeof line,
                "paths: %zu%s%s   IL_max: %.3f dB (%s)   IL_mean: %.3f dB\n",
                r.n_paths, r.cyclic ? " [cyclic]" : "",
                r.truncated ? " [truncated]" : "", r.il_max_db,
                r.il_max_path.c_str(), r.il_mean_db);
  os << line;
  std::snprintf(line, sizeof line,
                "crossings: %d   wl: %.1f um   bend: %.1f deg   DRV: %d "
                "(spacing %zu, unrouted %d, selfx %d)\n",
                r.total_crossings, r.total_wl_um, r.total_bend_deg, r.drv_count,
                r.violations.size(), r.unrouted, r.self_intersections);
  os << line;
  for (const SpacingViolation& v : r.violations) {
    std::snprintf(line, sizeof line, "  spacing %.3f um between %s and %s at (%.2f, %.2f)\n",
                  v.dist_um, v.a.c_str(), v.b.c_str(), v.where.x, v.where.y);
    os << line;
  }
  return os.str();
}

void recompute_wl_bend(const std::vector<Segment>& segs, double tol, double& wl_um,
                       double& bend_deg) {
  wl_um = 0.0;
  bend_deg = 0.0;
  for (const Segment& s : segs) {
    const std::vector<Vec2> pts = seg_centerline(s, tol);
    double prev_heading = 0.0;
    bool have_heading = false;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const Vec2 d = pts[i] - pts[i - 1];
      const double len = std::hypot(d.x, d.y);
      if (len < 1e-12) continue;
      wl_um += len;
      const double heading = std::atan2(d.y, d.x) * 180.0 / M_PI;
      if (have_heading) bend_deg += std::abs(angle_diff_deg(heading, prev_heading));
      prev_heading = heading;
      have_heading = true;
    }
  }
}

} // namespace waveroute
