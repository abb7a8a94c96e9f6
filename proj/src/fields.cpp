#include "pcc/fields.hpp"

#include "pcc/errors.hpp"

namespace pcc {

void FieldSnapshot::save(const std::filesystem::path& basename) const {
  // Data file holds, per component in sidecar order, the real array then the
  // imaginary array, each x-fastest.
  std::vector<double> data;
  data.reserve(2 * components.size() * cell_count());
  std::vector<std::string> names;
  for (const auto& [name, values] : components) {
    if (values.size() != cell_count())
      throw IoError("snapshot component '" + name + "' has wrong size");
    names.push_back(name);
    for (const auto& v : values) data.push_back(v.real());
    for (const auto& v : values) data.push_back(v.imag());
  }
  const auto data_path = std::filesystem::path(basename.string() + ".f64");
  write_f64(data_path, data);
  json meta;
  meta["format"] = "pcc-snapshot-v1";
  meta["dims"] = dims;
  meta["spacing_nm"] = spacing;
  meta["a_nm"] = a;
  meta["frequency"] = frequency;
  meta["origin_nm"] = origin;
  meta["components"] = names;
  meta["data_file"] = data_path.filename().string();
  meta["provenance"] = {{"layout", "per component: real then imag, x-fastest float64"},
                        {"quantity", "complex field amplitude at cell centers"}};
  write_sidecar(std::filesystem::path(basename.string() + ".json"), meta);
}

FieldSnapshot FieldSnapshot::load(const std::filesystem::path& sidecar_path) {
  const json meta = read_sidecar(sidecar_path);
  FieldSnapshot snap;
  try {
    if (meta.at("format").get<std::string>() != "pcc-snapshot-v1")
      throw IoError("unexpected snapshot format in " + sidecar_path.string());
    snap.dims = meta.at("dims").get<std::array<int, 3>>();
    snap.spacing = meta.at("spacing_nm").get<double>();
    snap.a = meta.at("a_nm").get<double>();
    snap.frequency = meta.at("frequency").get<double>();
    snap.origin = meta.at("origin_nm").get<std::array<double, 3>>();
    const auto names = meta.at("components").get<std::vector<std::string>>();
    const auto data = read_f64(sidecar_path.parent_path() /
                                   meta.at("data_file").get<std::string>(),
                               2 * names.size() * snap.cell_count());
    const std::size_t n = snap.cell_count();
    std::size_t offset = 0;
    for (const auto& name : names) {
      auto& values = snap.components[name];
      values.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        values[i] = {data[offset + i], data[offset + n + i]};
      offset += 2 * n;
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad snapshot sidecar " + sidecar_path.string() + ": " + e.what());
  }
  return snap;
}

void ProbeRecord::save(const std::filesystem::path& basename) const {
  const auto data_path = std::filesystem::path(basename.string() + ".f64");
  write_f64(data_path, samples);
  json meta;
  meta["format"] = "pcc-probe-v1";
  meta["location"] = location;
  meta["component"] = component;
  meta["sample_count"] = samples.size();
  meta["dt"] = dt;
  meta["short_run_warning"] = short_run_warning;
  meta["data_file"] = data_path.filename().string();
  meta["provenance"] = {{"layout", "little-endian float64 time series"},
                        {"quantity", "field sample per step after source turn-off"}};
  write_sidecar(std::filesystem::path(basename.string() + ".json"), meta);
}

ProbeRecord ProbeRecord::load(const std::filesystem::path& sidecar_path) {
  const json meta = read_sidecar(sidecar_path);
  ProbeRecord rec;
  try {
    if (meta.at("format").get<std::string>() != "pcc-probe-v1")
      throw IoError("unexpected probe format in " + sidecar_path.string());
    rec.location = meta.at("location").get<std::array<int, 3>>();
    rec.component = meta.at("component").get<std::string>();
    rec.dt = meta.at("dt").get<double>();
    rec.short_run_warning = meta.at("short_run_warning").get<bool>();
    rec.samples = read_f64(sidecar_path.parent_path() /
                               meta.at("data_file").get<std::string>(),
                           meta.at("sample_count").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad probe sidecar " + sidecar_path.string() + ": " + e.what());
  }
  return rec;
}

}  // namespace pcc
