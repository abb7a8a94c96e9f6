#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pcc/io.hpp"

namespace pcc {

// Config-driven orchestration: ordered stages, each a JSON object with a
// "stage" kind (rasterize | simulate | modes | taper | couple | fit | cqed)
// and a "name" under which its outputs are registered for later stages.

struct PipelineConfig {
  json stages = json::array();
  std::filesystem::path output_dir;
  long long seed = 0;
  int workers = 1;

  static PipelineConfig from_json(const json& j);
};

struct StageReport {
  std::string name;
  std::string kind;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256
  json summary;

  json to_json() const;
};

struct PipelineResult {
  std::vector<StageReport> stages;
  std::filesystem::path manifest_path;
  json manifest;
};

// Runs all stages sequentially; writes manifest.json into output_dir.  On a
// stage failure the manifest of completed stages is still written before the
// exception propagates.  Identical config + seed give byte-identical outputs
// for any worker count.
PipelineResult run_pipeline(const PipelineConfig& config);

// {"parameter": "stages.0.lattice.r_offset", "values": [...], "template": {...}}
// One pipeline run per value in run_<i>/ plus a joined sweep.csv; returns the
// sweep manifest.
json run_sweep(const json& sweep_config, const std::filesystem::path& output_dir, int workers,
               long long seed);

}  // namespace pcc
