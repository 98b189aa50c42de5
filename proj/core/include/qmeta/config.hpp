#pragma once

// Flat key = value configuration text with [section] headers.
//
//   # comment
//   [circuit]
//   n_qubits = 1
//
// Keys outside the schema are errors, as are duplicates.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qmeta/metatrain.hpp"

namespace qmeta {

struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

/// Syntax only: returns entries in file order.
std::vector<ConfigEntry> parse_config_text(const std::string& text);

/// Training configuration; starts from the defaults for the given n_qubits
/// (or 1) and applies every entry.
TrainingConfig training_config_from_text(const std::string& text);
TrainingConfig load_training_config(const std::filesystem::path& path);
std::string to_config_text(const TrainingConfig& config);

}  // namespace qmeta
