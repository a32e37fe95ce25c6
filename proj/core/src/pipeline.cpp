// SPDX-License-Identifier: Apache-2.0

#include "waveroute/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <stdexcept>

#include "waveroute/emit.hpp"
#include "waveroute/gds.hpp"

namespace waveroute {

namespace {
void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}
} // namespace

RunResult run_pipeline(const RunConfig& cfg) {
  RunResult r;
  try {
    r.tree = cfg.input.empty() ? parse_ir(cfg.ir_text) : load_ir_file(cfg.input);
  } catch (const ParseError& e) {
    r.exit_code = 1;
    r.error = e.what();
    return r;
  }
  try {
    const auto t0 = std::chrono::steady_clock::now();
    r.layout = route_bottom_up(r.tree, cfg.params);
    r.flat = flatten_design(r.tree, r.layout, cfg.params);
    r.violations = audit_spacing(r.flat, cfg.params);
    r.paths = enumerate_paths(r.flat);
    r.report = build_report(r.flat, r.paths, r.violations, cfg.params);
    r.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!cfg.out_gds.empty())
      write_gds(build_gds(r.tree, r.layout, cfg.params), cfg.out_gds);
    if (!cfg.out_svg.empty() || !cfg.out_json.empty()) {
      const LayoutDoc doc = build_layout(r.tree, r.flat, cfg.params);
      if (!cfg.out_svg.empty()) write_svg(doc, cfg.out_svg);
      if (!cfg.out_json.empty()) write_layout_json(doc, cfg.out_json);
    }
    if (!cfg.out_report.empty()) write_text_file(cfg.out_report, report_json(r.report));
    r.exit_code = r.report.drv_count == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    r.exit_code = 1;
    r.error = e.what();
  }
  return r;
}

} // namespace waveroute
