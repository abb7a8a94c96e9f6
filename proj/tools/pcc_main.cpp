// Command-line front end; all work happens behind the C API.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcc.h"

namespace {

using ordered_json = nlohmann::ordered_json;

int exit_code_for(int status) {
  switch (status) {
    case PCC_OK:
      return 0;
    case PCC_ERR_CONFIG:
    case PCC_ERR_IO:
      return 2;
    default:
      return 3;  // numerical or unexpected failure
  }
}

int report_failure(int status) {
  std::cerr << "error: " << pcc_last_error() << "\n";
  return exit_code_for(status);
}

bool load_json_file(const std::string& path, ordered_json& out) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open config file '" << path << "'\n";
    return false;
  }
  try {
    in >> out;
  } catch (const std::exception& e) {
    std::cerr << "error: invalid JSON in '" << path << "': " << e.what() << "\n";
    return false;
  }
  return true;
}

struct CommonOpts {
  std::string config;
  std::string output = ".";
  int workers = 0;  // 0: fall back to PCC_WORKERS, then 1
  long long seed = 0;
  bool verbose = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config, "JSON config file")->required();
  cmd->add_option("--output", opts.output, "output directory");
  cmd->add_option("--workers", opts.workers, "worker threads");
  cmd->add_option("--seed", opts.seed, "seed for generated test data");
  cmd->add_flag("--verbose", opts.verbose, "chatty progress output");
}

int resolve_workers(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("PCC_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

int run_stage_command(const std::string& kind, const CommonOpts& opts) {
  ordered_json stage;
  if (!load_json_file(opts.config, stage)) return 2;
  if (!stage.is_object()) {
    std::cerr << "error: stage config must be a JSON object\n";
    return 2;
  }
  stage["stage"] = kind;
  if (!stage.contains("name")) stage["name"] = kind;

  const int workers = resolve_workers(opts.workers);
  if (opts.verbose)
    std::cerr << "running stage '" << kind << "' into " << opts.output << " with " << workers
              << " worker(s)\n";

  char* summary = nullptr;
  const int status =
      pcc_stage_run(stage.dump().c_str(), opts.output.c_str(), workers, opts.seed, &summary);
  if (status != PCC_OK) return report_failure(status);
  std::cout << ordered_json::parse(summary).dump(2) << "\n";
  pcc_string_free(summary);
  return 0;
}

int run_container_command(bool sweep, const CommonOpts& opts) {
  ordered_json config;
  if (!load_json_file(opts.config, config)) return 2;
  const int workers = resolve_workers(opts.workers);
  if (opts.verbose)
    std::cerr << "running " << (sweep ? "sweep" : "pipeline") << " into " << opts.output
              << " with " << workers << " worker(s)\n";

  char* manifest = nullptr;
  const int status =
      sweep ? pcc_sweep_run(config.dump().c_str(), opts.output.c_str(), workers, opts.seed,
                            &manifest)
            : pcc_pipeline_run(config.dump().c_str(), opts.output.c_str(), workers, opts.seed,
                               &manifest);
  if (status != PCC_OK) return report_failure(status);
  std::cout << ordered_json::parse(manifest).dump(2) << "\n";
  pcc_string_free(manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photonic-crystal microcavity toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pcc_version()));

  const char* stage_kinds[] = {"rasterize", "simulate", "modes", "taper",
                               "couple",    "fit",      "cqed"};
  const char* stage_help[] = {
      "build a permittivity grid from a lattice description",
      "run the time-domain solver over a grid",
      "extract resonances from a ringdown probe",
      "solve the fiber-taper fundamental mode",
      "taper-cavity coupling and depth maps",
      "least-squares model fits to CSV data",
      "cavity QED figures of merit",
  };

  std::map<std::string, CommonOpts> opts;
  for (int i = 0; i < 7; ++i) {
    auto* cmd = app.add_subcommand(stage_kinds[i], stage_help[i]);
    add_common(cmd, opts[stage_kinds[i]]);
  }
  auto* pipeline_cmd = app.add_subcommand("pipeline", "run an ordered list of stages");
  add_common(pipeline_cmd, opts["pipeline"]);
  auto* sweep_cmd = app.add_subcommand("sweep", "run a pipeline template over parameter values");
  add_common(sweep_cmd, opts["sweep"]);

  CLI11_PARSE(app, argc, argv);

  const std::string kind = app.get_subcommands().at(0)->get_name();
  if (kind == "pipeline") return run_container_command(false, opts[kind]);
  if (kind == "sweep") return run_container_command(true, opts[kind]);
  return run_stage_command(kind, opts[kind]);
}
