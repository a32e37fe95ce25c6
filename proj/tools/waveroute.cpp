// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: `waveroute route <ir.yaml> ...` runs the full
// pipeline and prints the insertion-loss report; `waveroute bench gen ...`
// writes generated benchmark netlists.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "waveroute/bench_gen.hpp"
#include "waveroute/eval.hpp"
#include "waveroute/pipeline.hpp"

using namespace waveroute;

namespace {

int cmd_route(const RunConfig& cfg, bool quiet) {
  RunResult r = run_pipeline(cfg);
  if (r.exit_code == 1) {
    std::cerr << "error: " << r.error << "\n";
    return 1;
  }
  if (!quiet) std::cout << report_text(r.report);
  return r.exit_code;
}

int cmd_bench_gen(const BenchSpec& spec, const std::string& out) {
  try {
    const NetlistTree tree = generate_bench(spec);
    const std::string text = serialize_ir(tree);
    if (out.empty() || out == "-") {
      std::cout << text;
    } else {
      std::ofstream f(out, std::ios::binary);
      if (!f) {
        std::cerr << "error: cannot open for writing: " << out << "\n";
        return 1;
      }
      f << text;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvy waveguide detailed router for photonic circuits"};
  app.require_subcommand(1);

  // --- route ---
  RunConfig cfg;
  bool quiet = false;
  std::string die_arg;
  CLI::App* route = app.add_subcommand("route", "Route a placed netlist");
  route->add_option("input", cfg.input, "input IR YAML file")->required();
  route->add_option("--radius", cfg.params.radius, "bend radius, um");
  route->add_option("--grid", cfg.params.pitch, "routing grid pitch, um");
  route->add_option("--crossing-size", cfg.params.crossing_size, "crossing cell edge, um");
  route->add_option("--min-spacing", cfg.params.min_spacing, "waveguide clearance, um");
  route->add_option("--alpha-w", cfg.params.alpha_w, "propagation loss, dB/um");
  route->add_option("--alpha-c", cfg.params.alpha_c, "crossing loss, dB");
  route->add_option("--alpha-b", cfg.params.alpha_b_per90, "bending loss, dB per 90 deg");
  route->add_option("--lambda-c", cfg.params.lambda_c, "congestion penalty weight");
  route->add_option("--lambda-h", cfg.params.lambda_h, "history penalty weight");
  route->add_option("--rr-rounds", cfg.params.rr_rounds, "rip-up-and-reroute round cap");
  route->add_option("--refine-rounds", cfg.params.refine_rounds, "order refinement cap");
  route->add_option("--max-expansions", cfg.params.max_expansions, "search node budget");
  route->add_flag("--no-gcp", [&](std::int64_t) { cfg.params.enable_gcp = false; },
                  "disable crossing-aware grid preprocessing");
  route->add_flag("--no-offset-neighbors",
                  [&](std::int64_t) { cfg.params.enable_offset_neighbors = false; },
                  "disable lateral offset jog moves");
  route->add_flag("--no-crossings", [&](std::int64_t) { cfg.params.enable_crossings = false; },
                  "disable crossing insertion");
  route->add_flag("--no-lrr", [&](std::int64_t) { cfg.params.enable_lrr = false; },
                  "disable local rip-up-and-reroute optimization");
  route->add_flag("--no-reuse", [&](std::int64_t) { cfg.params.enable_reuse = false; },
                  "route every module occurrence independently");
  route->add_option("--out-gds", cfg.out_gds, "write GDSII stream file");
  route->add_option("--out-svg", cfg.out_svg, "write SVG rendering");
  route->add_option("--out-json", cfg.out_json, "write layout geometry JSON");
  route->add_option("--report", cfg.out_report, "write machine-readable report JSON");
  route->add_flag("--quiet", quiet, "suppress the stdout report");

  // --- bench gen ---
  BenchSpec spec;
  std::string out_path;
  CLI::App* bench = app.add_subcommand("bench", "Benchmark utilities");
  CLI::App* gen = bench->add_subcommand("gen", "Generate a benchmark netlist");
  gen->add_option("--family", spec.family, "clements | benes | crossbar | ring_switch")
      ->required();
  gen->add_option("--n", spec.n, "port/mode count")->required();
  gen->add_option("--pitch", spec.pitch_x, "inter-stage gap override, um");
  gen->add_option("--die", die_arg, "die override, WxH in um");
  gen->add_option("--misalign", spec.misalign, "lateral port jitter amplitude, um");
  gen->add_option("--seed", spec.seed, "generator seed");
  gen->add_option("--preset", spec.preset, "spacious | compact | compact_plus");
  gen->add_option("--radius", spec.radius, "bend radius the layout must fit, um");
  gen->add_option("-o,--out", out_path, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (route->parsed()) {
    try {
      cfg.params.validate();
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
    return cmd_route(cfg, quiet);
  }
  if (gen->parsed()) {
    if (!die_arg.empty()) {
      const auto xp = die_arg.find('x');
      if (xp == std::string::npos) {
        std::cerr << "error: --die expects WxH\n";
        return 1;
      }
      try {
        spec.die = {std::stod(die_arg.substr(0, xp)), std::stod(die_arg.substr(xp + 1))};
      } catch (const std::exception&) {
        std::cerr << "error: --die expects WxH\n";
        return 1;
      }
    }
    return cmd_bench_gen(spec, out_path);
  }
  std::cerr << app.help();
  return 1;
}
