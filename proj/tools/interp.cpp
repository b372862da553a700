// interp: refinement studies and property suites.
//   interp run --config study.json [--out dir] [--space rt] [--dump-biorth]
//   interp verify --suite algebra|biorth|facetdual|interp|proxy [--out dir] [--dump-biorth]
#include "feqi/error.hpp"
#include "feqi/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace feqi;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

int run(const std::string& config_path, std::string out_dir, const std::string& space, bool dump_biorth) {
  std::ifstream in(config_path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed config JSON: ") + e.what());
  }
  if (!space.empty()) {
    j["space"]["proxy"] = space;
    j["space"].erase("family");
    j["space"].erase("k");
  }
  StudyConfig config = StudyConfig::from_json(j);
  if (out_dir.empty()) out_dir = config.output.empty() ? "." : config.output;
  fs::create_directories(out_dir);

  bool first = true;
  auto on_mesh = [&](int level, const SimplicialComplex& mesh, const BoundarySubcomplex& U) {
    write_file(fs::path(out_dir) / ("mesh_L" + std::to_string(level) + ".json"), mesh_to_json(mesh, &U) + "\n");
    if (dump_biorth && first) {
      Family f = config.family;
      int k = config.k;
      if (!config.proxy.empty()) {
        f = proxy_space(config.proxy).family;
        k = proxy_space(config.proxy).k;
      }
      std::ofstream csv(fs::path(out_dir) / ("biorth_L" + std::to_string(level) + ".csv"));
      write_biorth_csv(check_biorthogonal(build_biorthogonal(mesh, f, config.r, k), true), csv);
    }
    first = false;
  };
  const RateReport rep = run_study(config, on_mesh);

  std::ofstream csv(fs::path(out_dir) / "results.csv");
  write_results_csv(rep, csv);
  write_file(fs::path(out_dir) / "report.json", rep.to_json().dump(2) + "\n");

  std::printf("%5s %12s %9s %9s %12s %12s %10s\n", "level", "h", "cells", "dofs", "error", "d error", "stability");
  for (const auto& l : rep.levels)
    std::printf("%5d %12.5e %9d %9d %12.5e %12.5e %10.4f\n", l.level, l.h, l.cells, l.dofs, l.error, l.derror,
                l.stability);
  std::printf("slope %.3f (without coarsest %.3f, last two %.3f), expected %d; d slope %.3f; %.1f s\n", rep.slope,
              rep.slope_fine, rep.slope_last, rep.expected, rep.dslope, rep.seconds);
  std::printf("wrote %s/results.csv and report.json\n", out_dir.c_str());
  return 0;
}

int verify(const std::string& suite, const std::string& out_dir, bool dump_biorth) {
  VerifyOptions opt;
  opt.log = &std::cout;
  if (dump_biorth) {
    fs::create_directories(out_dir.empty() ? "." : out_dir);
    opt.dump_biorth = (fs::path(out_dir.empty() ? "." : out_dir) / "biorth.csv").string();
  }
  nlohmann::json all = nlohmann::json::array();
  bool ok = true;
  for (int id : suite_criteria(suite)) {
    const CriterionResult res = run_criterion(id, opt);
    for (const auto& m : res.metrics)
      std::printf("    %-60s %12.4e  [%g, %g] %s\n", m.name.c_str(), m.value, m.lo, m.hi, m.ok() ? "ok" : "VIOLATED");
    std::printf("%s criterion %d: %s (%.1f s)\n", res.passed() ? "PASS" : "FAIL", id, res.title.c_str(), res.seconds);
    std::fflush(stdout);
    ok = ok && res.passed();
    all.push_back(res.to_json());
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / ("verify_" + suite + ".json"), all.dump(2) + "\n");
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite element quasi-interpolation studies"};
  app.require_subcommand(1);
  std::string out_dir;
  bool dump_biorth = false;

  auto* run_cmd = app.add_subcommand("run", "run a refinement study");
  std::string config_path, space;
  run_cmd->add_option("--config", config_path, "study JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--space", space, "named 3D space, replaces the configured space")
      ->check(CLI::IsMember({"ned1", "ned2", "rt", "bdm"}));
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_flag("--dump-biorth", dump_biorth, "write [phi*(phi)] of the coarsest level as CSV");

  auto* verify_cmd = app.add_subcommand("verify", "run property suites");
  std::string suite;
  verify_cmd->add_option("--suite", suite, "suite name")
      ->required()
      ->check(CLI::IsMember({"algebra", "biorth", "facetdual", "interp", "proxy", "all"}));
  verify_cmd->add_option("--out", out_dir, "output directory for the JSON report");
  verify_cmd->add_flag("--dump-biorth", dump_biorth, "write [phi*(phi)] of one system as CSV");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return run(config_path, out_dir, space, dump_biorth);
    return verify(suite, out_dir, dump_biorth);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
