#pragma once

// Output plumbing shared by the CLI and the test-suite reproducibility
// checks: CSV tables with 17-significant-digit floats (round-trip exact for
// doubles), FNV-1a content checksums, and the run manifest that records the
// resolved configuration, seed, generator version and per-file checksums.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace poissonht {

// Project version recorded in manifests.
const char* version_string();

// Shortest-exactish decimal form: %.17g.
std::string format_float(double v);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // each row matches columns
};

// Serializes the table (header line then rows, comma-separated, "\n" line
// ends); returns the bytes written.
std::string csv_bytes(const CsvTable& table);
void write_file(const std::string& path, const std::string& bytes);

std::uint64_t fnv1a_64(const std::string& bytes);

// Writes manifest.json into dir: resolved config (as parsed JSON text),
// master seed, RNG + code versions, and name -> checksum for every emitted
// file.  Timing is recorded but excluded from the checksummed artifacts.
void write_manifest(const std::string& dir, const std::string& resolved_config,
                    std::uint64_t master_seed,
                    const std::map<std::string, std::uint64_t>& file_checksums,
                    double elapsed_seconds);

}  // namespace poissonht
