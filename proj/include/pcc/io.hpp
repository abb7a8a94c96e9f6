#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace pcc {

using json = nlohmann::ordered_json;

// Flat little-endian float64 binary file plus a JSON sidecar describing it.
// The sidecar lives at <basename>.json and points at <basename>.f64.
// Array data is stored x-fastest (index = i + Nx*(j + Ny*k)).

void write_f64(const std::filesystem::path& path, const std::vector<double>& data);
std::vector<double> read_f64(const std::filesystem::path& path, std::size_t expected_count);

void write_sidecar(const std::filesystem::path& sidecar_path, const json& meta);
json read_sidecar(const std::filesystem::path& sidecar_path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Two-or-three column CSV with a header line.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_file_hex(const std::filesystem::path& path);

// Deterministic shortest-round-trip formatting used by all CSV emitters.
std::string format_double(double v);

}  // namespace pcc
