#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qmeta {

/// Record of one CLI run: what was asked, with which seed and code, and
/// which files it wrote.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::map<std::string, std::string> config;  // effective settings, as text
  std::uint64_t master_seed = 0;
  std::string code_version;
  std::string rng_algorithm;
  std::string started_at;   // UTC, ISO 8601
  std::string finished_at;
  std::vector<std::string> outputs;
};

RunManifest make_manifest(std::string command, std::vector<std::string> argv,
                          std::uint64_t master_seed);
std::string utc_timestamp();
std::string to_json_text(const RunManifest& m);
RunManifest manifest_from_json_text(const std::string& text);
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

const char* code_version();

}  // namespace qmeta
