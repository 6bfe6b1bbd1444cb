#include "poissonht/report.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "poissonht/errors.hpp"
#include "poissonht/rng.hpp"

namespace poissonht {

const char* version_string() { return "poissonht 1.0.0"; }

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_bytes(const CsvTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw config_error("csv: row width does not match the header");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += row[c];
    }
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw config_error("cannot open output file '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw config_error("failed writing output file '" + path + "'");
}

std::uint64_t fnv1a_64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char ch : bytes) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_manifest(const std::string& dir, const std::string& resolved_config,
                    std::uint64_t master_seed,
                    const std::map<std::string, std::uint64_t>& file_checksums,
                    double elapsed_seconds) {
  nlohmann::json root;
  root["config"] = nlohmann::json::parse(resolved_config);
  root["master_seed"] = master_seed;
  root["rng_version"] = kRngVersion;
  root["code_version"] = version_string();
  root["elapsed_seconds"] = elapsed_seconds;
  nlohmann::json files;
  char buf[24];
  for (const auto& [name, sum] : file_checksums) {
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(sum));
    files[name] = buf;
  }
  root["files"] = files;
  write_file(dir + "/manifest.json", root.dump(2) + "\n");
}

}  // namespace poissonht
