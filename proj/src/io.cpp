#include "pcc/io.hpp"

#include <openssl/evp.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pcc/errors.hpp"

namespace pcc {

static_assert(std::endian::native == std::endian::little,
              "flat binary format is little-endian; big-endian hosts unsupported");

void write_f64(const std::filesystem::path& path, const std::vector<double>& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!f) throw IoError("write failed: " + path.string());
}

std::vector<double> read_f64(const std::filesystem::path& path, std::size_t expected_count) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw IoError("cannot open: " + path.string());
  const auto bytes = static_cast<std::size_t>(f.tellg());
  if (bytes != expected_count * sizeof(double))
    throw IoError("size mismatch in " + path.string() + ": got " + std::to_string(bytes) +
                  " bytes, expected " + std::to_string(expected_count * sizeof(double)));
  f.seekg(0);
  std::vector<double> data(expected_count);
  f.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
  if (!f) throw IoError("read failed: " + path.string());
  return data;
}

void write_sidecar(const std::filesystem::path& sidecar_path, const json& meta) {
  write_text(sidecar_path, meta.dump(2) + "\n");
}

json read_sidecar(const std::filesystem::path& sidecar_path) {
  try {
    return json::parse(read_text(sidecar_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("bad JSON sidecar " + sidecar_path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw IoError("double formatting failed");
  return std::string(buf, ptr);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ostringstream out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw IoError("csv row width mismatch writing " + path.string());
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
  write_text(path, out.str());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty csv: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::istringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("non-numeric csv cell '" + cell + "' in " + path.string());
      }
    }
    if (values.size() != table.columns.size())
      throw IoError("csv row width mismatch in " + path.string());
    table.rows.push_back(std::move(values));
  }
  return table;
}

std::string sha256_hex(const void* data, std::size_t size) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data, size, digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file_hex(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  return sha256_hex(text.data(), text.size());
}

}  // namespace pcc
