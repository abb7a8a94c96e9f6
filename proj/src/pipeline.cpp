#include "pcc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pcc/coupling.hpp"
#include "pcc/cqed.hpp"
#include "pcc/errors.hpp"
#include "pcc/fdtd.hpp"
#include "pcc/fields.hpp"
#include "pcc/fitting.hpp"
#include "pcc/geometry.hpp"
#include "pcc/modes.hpp"
#include "pcc/taper.hpp"

namespace fs = std::filesystem;

namespace pcc {

namespace {

struct Context {
  fs::path dir;
  int workers = 1;
  long long seed = 0;
  std::map<std::string, fs::path> artifacts;
};

fs::path resolve_input(const Context& ctx, const std::string& ref) {
  auto it = ctx.artifacts.find(ref);
  if (it != ctx.artifacts.end()) return it->second;
  fs::path p(ref);
  if (fs::exists(p)) return p;
  throw ConfigError("unresolvable input reference '" + ref + "'");
}

void record_file(std::map<std::string, std::string>& table, const fs::path& p) {
  table[p.generic_string()] = sha256_file_hex(p);
}

std::string stage_string(const json& s, const char* key) {
  if (!s.contains(key)) throw ConfigError(std::string("stage is missing key '") + key + "'");
  return s.at(key).get<std::string>();
}

// ---- stage implementations -------------------------------------------------

StageReport stage_rasterize(const json& s, Context& ctx) {
  StageReport rep;
  if (!s.contains("lattice")) throw ConfigError("rasterize: missing 'lattice'");
  const LatticeSpec spec = LatticeSpec::from_json(s.at("lattice"));
  double spacing = 0;
  if (s.contains("spacing"))
    spacing = s.at("spacing").get<double>();
  else if (s.contains("cells_per_a"))
    spacing = spec.a / s.at("cells_per_a").get<double>();
  else
    throw ConfigError("rasterize: provide 'spacing' (nm) or 'cells_per_a'");

  const HoleSet holes = build_holes(spec);
  const PermittivityGrid grid = rasterize(spec, holes, spacing);
  grid.save(ctx.dir / s.at("name").get<std::string>());

  const fs::path sidecar = ctx.dir / (s.at("name").get<std::string>() + ".json");
  const fs::path payload = ctx.dir / (s.at("name").get<std::string>() + ".f64");
  record_file(rep.outputs, sidecar);
  record_file(rep.outputs, payload);
  ctx.artifacts[s.at("name").get<std::string>()] = sidecar;

  rep.summary["dims"] = grid.dims;
  rep.summary["spacing_nm"] = grid.spacing;
  rep.summary["cells"] = grid.cell_count();
  return rep;
}

RunConfig parse_run_config(const json& s, int workers) {
  RunConfig rc;
  if (s.contains("source")) rc.source = SourceSpec::from_json(s.at("source"));
  if (s.contains("symmetry")) rc.symmetry = SymmetrySpec::from_json(s.at("symmetry"));
  if (!s.contains("steps")) throw ConfigError("simulate: missing 'steps'");
  rc.steps = s.at("steps").get<int>();
  if (s.contains("courant_factor")) rc.courant_factor = s.at("courant_factor").get<double>();
  if (s.contains("pml")) rc.pml = PmlSpec::from_json(s.at("pml"));
  if (s.contains("monitor_energy")) rc.monitor_energy = s.at("monitor_energy").get<bool>();
  if (s.contains("probes")) {
    for (const auto& pj : s.at("probes")) {
      ProbeSpec p;
      const auto v = pj.at("position").get<std::vector<int>>();
      if (v.size() != 3) throw ConfigError("probe position must have 3 entries");
      p.position = {v[0], v[1], v[2]};
      p.component = component_from_name(pj.at("component").get<std::string>());
      rc.probes.push_back(p);
    }
  }
  if (s.contains("dft")) {
    DftSpec d;
    d.frequency = s.at("dft").at("frequency").get<double>();
    if (s.at("dft").contains("components")) {
      d.components.clear();
      for (const auto& c : s.at("dft").at("components"))
        d.components.push_back(component_from_name(c.get<std::string>()));
    }
    rc.dft = d;
  }
  rc.workers = workers;
  return rc;
}

StageReport stage_simulate(const json& s, Context& ctx) {
  StageReport rep;
  const std::string name = stage_string(s, "name");
  const fs::path grid_path = resolve_input(ctx, stage_string(s, "grid"));
  record_file(rep.inputs, grid_path);
  const PermittivityGrid full = PermittivityGrid::load(grid_path);
  record_file(rep.inputs, grid_path.parent_path() / (grid_path.stem().string() + ".f64"));

  const RunConfig rc = parse_run_config(s, ctx.workers);
  if (rc.probes.empty() && !rc.dft)
    throw ConfigError("simulate: configure at least one probe or a dft block");

  const PermittivityGrid domain = crop_octant(full, rc.symmetry);
  const RunResult result = run(domain, rc);

  for (std::size_t i = 0; i < result.probes.size(); ++i) {
    const std::string pname = name + ".probe" + std::to_string(i);
    const fs::path base = ctx.dir / pname;
    result.probes[i].save(base);
    record_file(rep.outputs, fs::path(base.string() + ".json"));
    record_file(rep.outputs, fs::path(base.string() + ".f64"));
    ctx.artifacts[pname] = fs::path(base.string() + ".json");
  }
  if (result.snapshot) {
    const FieldSnapshot expanded = mirror_expand(*result.snapshot, rc.symmetry);
    const std::string sname = name + ".snapshot";
    const fs::path base = ctx.dir / sname;
    expanded.save(base);
    record_file(rep.outputs, fs::path(base.string() + ".json"));
    record_file(rep.outputs, fs::path(base.string() + ".f64"));
    ctx.artifacts[sname] = fs::path(base.string() + ".json");
  }

  rep.summary["steps"] = rc.steps;
  rep.summary["source_off_step"] = result.source_off_step;
  rep.summary["domain_dims"] = domain.dims;
  return rep;
}

StageReport stage_modes(const json& s, Context& ctx) {
  StageReport rep;
  const std::string name = stage_string(s, "name");
  const fs::path probe_path = resolve_input(ctx, stage_string(s, "probe"));
  record_file(rep.inputs, probe_path);
  const ProbeRecord record = ProbeRecord::load(probe_path);

  FrequencyBand band;
  if (!s.contains("band")) throw ConfigError("modes: missing 'band'");
  band.lo = s.at("band").at("lo").get<double>();
  band.hi = s.at("band").at("hi").get<double>();

  HarmonicInversionOptions opts;
  if (s.contains("options")) {
    const auto& o = s.at("options");
    if (o.contains("sv_rel_threshold")) opts.sv_rel_threshold = o.at("sv_rel_threshold").get<double>();
    if (o.contains("max_model_order")) opts.max_model_order = o.at("max_model_order").get<int>();
    if (o.contains("q_cap")) opts.q_cap = o.at("q_cap").get<double>();
  }

  const auto modes = harmonic_inversion(record, band, opts);
  const fs::path csv_path = ctx.dir / (name + ".csv");
  write_csv(csv_path, modes_to_csv(modes));
  record_file(rep.outputs, csv_path);
  ctx.artifacts[name] = csv_path;

  rep.summary["mode_count"] = modes.size();
  if (!modes.empty()) {
    const auto strongest = std::max_element(
        modes.begin(), modes.end(), [](const auto& a, const auto& b) {
          return std::abs(a.amplitude) < std::abs(b.amplitude);
        });
    rep.summary["frequency"] = strongest->frequency;
    rep.summary["Q"] = strongest->Q;
  }

  if (s.contains("snapshot") && s.contains("grid")) {
    const fs::path snap_path = resolve_input(ctx, s.at("snapshot").get<std::string>());
    const fs::path grid_path = resolve_input(ctx, s.at("grid").get<std::string>());
    record_file(rep.inputs, snap_path);
    record_file(rep.inputs, grid_path);
    const FieldSnapshot snap = FieldSnapshot::load(snap_path);
    const PermittivityGrid grid = PermittivityGrid::load(grid_path);
    ModeMetrics metrics = effective_mode_volume(snap, grid);
    metrics.eta = eta_factor(snap, grid);
    const fs::path mpath = ctx.dir / (name + ".metrics.json");
    write_sidecar(mpath, metrics.to_json());
    record_file(rep.outputs, mpath);
    ctx.artifacts[name + ".metrics"] = mpath;
    rep.summary["V_eff_cubic_wavelengths"] = metrics.V_eff_cubic_wavelengths;
    rep.summary["eta"] = metrics.eta;
  }
  return rep;
}

StageReport stage_taper(const json& s, Context& ctx) {
  StageReport rep;
  const std::string name = stage_string(s, "name");
  if (!s.contains("fiber")) throw ConfigError("taper: missing 'fiber'");
  const FiberSpec spec = FiberSpec::from_json(s.at("fiber"));
  const TaperMode mode = solve_fundamental(spec);
  const fs::path path = ctx.dir / (name + ".json");
  write_sidecar(path, mode.to_json());
  record_file(rep.outputs, path);
  ctx.artifacts[name] = path;
  rep.summary["n_eff"] = mode.n_eff;
  rep.summary["decay_constant_per_nm"] = mode.decay_constant;
  return rep;
}

FiberSpec fiber_from_mode_json(const json& j) {
  FiberSpec spec;
  spec.diameter_um = 2.0 * j.at("core_radius_nm").get<double>() / 1000.0;
  spec.n_core = j.at("n_core").get<double>();
  spec.n_clad = j.at("n_clad").get<double>();
  spec.wavelength_nm = j.at("wavelength_nm").get<double>();
  return spec;
}

StageReport stage_couple(const json& s, Context& ctx) {
  StageReport rep;
  const std::string name = stage_string(s, "name");
  const fs::path snap_path = resolve_input(ctx, stage_string(s, "snapshot"));
  record_file(rep.inputs, snap_path);
  const FieldSnapshot snap = FieldSnapshot::load(snap_path);

  FiberSpec fiber;
  if (s.contains("fiber")) {
    fiber = FiberSpec::from_json(s.at("fiber"));
  } else if (s.contains("taper")) {
    const fs::path tpath = resolve_input(ctx, s.at("taper").get<std::string>());
    record_file(rep.inputs, tpath);
    fiber = fiber_from_mode_json(read_sidecar(tpath));
  } else {
    throw ConfigError("couple: provide 'fiber' or a 'taper' artifact");
  }
  const TaperMode mode = solve_fundamental(fiber);

  if (!s.contains("plane_z")) throw ConfigError("couple: missing 'plane_z' (nm)");
  const FieldSnapshot plane = extract_plane(snap, s.at("plane_z").get<double>());

  const CouplingConfig cfg =
      s.contains("config") ? CouplingConfig::from_json(s.at("config")) : CouplingConfig{};
  const CouplingResult result = couple(plane, mode, cfg);

  const fs::path rpath = ctx.dir / (name + ".json");
  write_sidecar(rpath, result.to_json());
  record_file(rep.outputs, rpath);
  ctx.artifacts[name] = rpath;
  rep.summary["depth"] = result.depth;
  rep.summary["loaded_linewidth"] = result.loaded_linewidth_nm;

  if (s.contains("scan")) {
    const auto& sc = s.at("scan");
    const std::string axis_name = sc.at("axis").get<std::string>();
    if (axis_name != "x" && axis_name != "y") throw ConfigError("scan.axis must be 'x' or 'y'");
    const int axis = axis_name == "x" ? 0 : 1;
    const auto offsets = sc.at("offsets").get<std::vector<double>>();
    const DepthMap map = depth_map(plane, mode, cfg, axis, offsets);
    CsvTable table;
    table.columns = {"offset_nm", "depth"};
    for (std::size_t i = 0; i < map.offsets_nm.size(); ++i)
      table.rows.push_back({map.offsets_nm[i], map.depths[i]});
    const fs::path cpath = ctx.dir / (name + ".scan.csv");
    write_csv(cpath, table);
    record_file(rep.outputs, cpath);
    ctx.artifacts[name + ".scan"] = cpath;
    rep.summary["scan_fwhm_um"] = map.fwhm_um;
  }
  return rep;
}

StageReport stage_fit(const json& s, Context& ctx) {
  StageReport rep;
  const std::string name = stage_string(s, "name");
  const std::string model = stage_string(s, "model");
  const fs::path data_path = resolve_input(ctx, stage_string(s, "data"));
  record_file(rep.inputs, data_path);

  const CsvTable table = read_csv(data_path);
  const std::string xcol = s.contains("x_column") ? s.at("x_column").get<std::string>() : "x";
  const std::string ycol = s.contains("y_column") ? s.at("y_column").get<std::string>() : "y";
  auto col_index = [&](const std::string& c) -> std::size_t {
    for (std::size_t i = 0; i < table.columns.size(); ++i)
      if (table.columns[i] == c) return i;
    throw ConfigError("fit: column '" + c + "' not found in " + data_path.string());
  };
  const std::size_t xi = col_index(xcol), yi = col_index(ycol);

  SampleSet samples;
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : table.rows) pts.emplace_back(row[xi], row[yi]);
  std::sort(pts.begin(), pts.end());
  for (const auto& [x, y] : pts) {
    samples.x.push_back(x);
    samples.y.push_back(y);
  }

  FitResult result;
  if (model == "lorentzian")
    result = fit_lorentzian(samples);
  else if (model == "exp_offset")
    result = fit_exp_offset(samples);
  else if (model == "gaussian")
    result = fit_gaussian(samples);
  else
    throw ConfigError("fit: unknown model '" + model + "'");

  const fs::path rpath = ctx.dir / (name + ".json");
  write_sidecar(rpath, result.to_json());
  record_file(rep.outputs, rpath);
  ctx.artifacts[name] = rpath;
  for (std::size_t i = 0; i < result.names.size(); ++i)
    rep.summary[result.names[i]] = result.params[i];
  rep.summary["converged"] = result.converged;
  return rep;
}

StageReport stage_cqed(const json& s, Context& ctx) {
  StageReport rep;
  const std::string name = stage_string(s, "name");
  if (!s.contains("cavity")) throw ConfigError("cqed: missing 'cavity'");
  const CavityFigures cavity = CavityFigures::from_json(s.at("cavity"));
  const AtomSpec atom = s.contains("atom") ? AtomSpec::from_json(s.at("atom")) : AtomSpec{};
  const StrongCouplingReport report = assess(cavity, atom);
  const fs::path rpath = ctx.dir / (name + ".json");
  write_sidecar(rpath, report.to_json());
  record_file(rep.outputs, rpath);
  ctx.artifacts[name] = rpath;
  rep.summary = report.to_json();
  return rep;
}

StageReport run_stage(const json& s, Context& ctx) {
  if (!s.is_object()) throw ConfigError("each stage must be a JSON object");
  const std::string kind = stage_string(s, "stage");
  if (!s.contains("name")) throw ConfigError("stage '" + kind + "' is missing 'name'");

  StageReport rep;
  if (kind == "rasterize")
    rep = stage_rasterize(s, ctx);
  else if (kind == "simulate")
    rep = stage_simulate(s, ctx);
  else if (kind == "modes")
    rep = stage_modes(s, ctx);
  else if (kind == "taper")
    rep = stage_taper(s, ctx);
  else if (kind == "couple")
    rep = stage_couple(s, ctx);
  else if (kind == "fit")
    rep = stage_fit(s, ctx);
  else if (kind == "cqed")
    rep = stage_cqed(s, ctx);
  else
    throw ConfigError("unknown stage kind '" + kind + "'");
  rep.name = s.at("name").get<std::string>();
  rep.kind = kind;
  return rep;
}

json manifest_json(const PipelineConfig& config, const std::vector<StageReport>& stages,
                   bool complete) {
  json m;
  m["format"] = "pcc-manifest-v1";
  const std::string cfg_dump = config.stages.dump();
  m["config_sha256"] = sha256_hex(cfg_dump.data(), cfg_dump.size());
  m["seed"] = config.seed;
  m["complete"] = complete;
  m["stages"] = json::array();
  for (const auto& s : stages) m["stages"].push_back(s.to_json());
  return m;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "stages") {
      if (!it->is_array()) throw ConfigError("'stages' must be an array");
      c.stages = *it;
    } else if (k == "output_dir")
      c.output_dir = it->get<std::string>();
    else if (k == "seed")
      c.seed = it->get<long long>();
    else if (k == "workers")
      c.workers = it->get<int>();
    else
      throw ConfigError("pipeline: unknown key '" + k + "'");
  }
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  return c;
}

json StageReport::to_json() const {
  json j;
  j["name"] = name;
  j["stage"] = kind;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["summary"] = summary;
  return j;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  if (config.output_dir.empty()) throw ConfigError("pipeline requires an output directory");
  fs::create_directories(config.output_dir);

  Context ctx;
  ctx.dir = config.output_dir;
  ctx.workers = config.workers;
  ctx.seed = config.seed;

  PipelineResult result;
  result.manifest_path = config.output_dir / "manifest.json";
  try {
    for (const auto& s : config.stages) result.stages.push_back(run_stage(s, ctx));
  } catch (...) {
    // keep the partial manifest for post-mortem inspection
    write_sidecar(result.manifest_path, manifest_json(config, result.stages, false));
    throw;
  }
  result.manifest = manifest_json(config, result.stages, true);
  write_sidecar(result.manifest_path, result.manifest);
  return result;
}

json run_sweep(const json& sweep_config, const fs::path& output_dir, int workers,
               long long seed) {
  if (!sweep_config.contains("parameter") || !sweep_config.contains("values") ||
      !sweep_config.contains("template"))
    throw ConfigError("sweep requires 'parameter', 'values', and 'template'");
  const std::string parameter = sweep_config.at("parameter").get<std::string>();
  const json values = sweep_config.at("values");
  if (!values.is_array() || values.empty()) throw ConfigError("'values' must be a non-empty array");

  // dot-path navigation; numeric tokens index arrays
  auto set_value = [&](json& root, const json& value) {
    json* cur = &root;
    std::size_t pos = 0;
    while (pos <= parameter.size()) {
      const std::size_t dot = parameter.find('.', pos);
      const std::string tok =
          parameter.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
      if (tok.empty()) throw ConfigError("malformed parameter path '" + parameter + "'");
      if (cur->is_array()) {
        std::size_t idx = 0;
        try {
          idx = std::stoul(tok);
        } catch (...) {
          throw ConfigError("parameter path '" + parameter + "' indexes an array with '" + tok + "'");
        }
        if (idx >= cur->size())
          throw ConfigError("parameter path '" + parameter + "' is out of range");
        cur = &(*cur)[idx];
      } else if (cur->is_object()) {
        if (!cur->contains(tok))
          throw ConfigError("unknown parameter '" + parameter + "' (missing '" + tok + "')");
        cur = &(*cur)[tok];
      } else {
        throw ConfigError("parameter path '" + parameter + "' descends into a scalar");
      }
      if (dot == std::string::npos) break;
      pos = dot + 1;
    }
    *cur = value;
  };

  fs::create_directories(output_dir);
  json manifest;
  manifest["format"] = "pcc-sweep-v1";
  manifest["parameter"] = parameter;
  manifest["values"] = values;
  manifest["runs"] = json::array();

  CsvTable summary;
  summary.columns = {"value", "frequency", "Q", "loaded_linewidth", "depth"};

  for (std::size_t i = 0; i < values.size(); ++i) {
    json tmpl = sweep_config.at("template");
    set_value(tmpl, values[i]);
    PipelineConfig cfg = PipelineConfig::from_json(tmpl);
    char dirname[32];
    std::snprintf(dirname, sizeof(dirname), "run_%03zu", i);
    cfg.output_dir = output_dir / dirname;
    cfg.workers = workers;
    cfg.seed = seed;
    const PipelineResult run = run_pipeline(cfg);

    double freq = std::nan(""), q = std::nan(""), lw = std::nan(""), depth = std::nan("");
    for (const auto& st : run.stages) {
      if (st.kind == "modes") {
        if (st.summary.contains("frequency")) freq = st.summary.at("frequency").get<double>();
        if (st.summary.contains("Q")) q = st.summary.at("Q").get<double>();
      } else if (st.kind == "couple") {
        if (st.summary.contains("loaded_linewidth"))
          lw = st.summary.at("loaded_linewidth").get<double>();
        if (st.summary.contains("depth")) depth = st.summary.at("depth").get<double>();
      }
    }
    summary.rows.push_back({values[i].get<double>(), freq, q, lw, depth});

    json rj;
    rj["value"] = values[i];
    rj["dir"] = cfg.output_dir.generic_string();
    rj["manifest_sha256"] = sha256_file_hex(run.manifest_path);
    manifest["runs"].push_back(rj);
  }

  const fs::path csv_path = output_dir / "sweep.csv";
  write_csv(csv_path, summary);
  manifest["summary_csv"] = csv_path.generic_string();
  manifest["summary_sha256"] = sha256_file_hex(csv_path);
  write_sidecar(output_dir / "sweep.json", manifest);
  return manifest;
}

}  // namespace pcc
