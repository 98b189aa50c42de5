#include "qmeta/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "qmeta/rng.hpp"

#ifndef QMETA_VERSION
#define QMETA_VERSION "unknown"
#endif

namespace qmeta {

const char* code_version() { return QMETA_VERSION; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest make_manifest(std::string command, std::vector<std::string> argv,
                          std::uint64_t master_seed) {
  RunManifest m;
  m.command = std::move(command);
  m.argv = std::move(argv);
  m.master_seed = master_seed;
  m.code_version = code_version();
  m.rng_algorithm = std::string(kRngAlgorithm);
  m.started_at = utc_timestamp();
  return m;
}

std::string to_json_text(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["config"] = m.config;
  j["master_seed"] = m.master_seed;
  j["code_version"] = m.code_version;
  j["rng_algorithm"] = m.rng_algorithm;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["outputs"] = m.outputs;
  return j.dump(2);
}

RunManifest manifest_from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  m.config = j.at("config").get<std::map<std::string, std::string>>();
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.code_version = j.at("code_version").get<std::string>();
  m.rng_algorithm = j.at("rng_algorithm").get<std::string>();
  m.started_at = j.at("started_at").get<std::string>();
  m.finished_at = j.at("finished_at").get<std::string>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << to_json_text(m) << '\n';
}

}  // namespace qmeta
