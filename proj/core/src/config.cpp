#include "qmeta/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qmeta {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const ConfigEntry& e, const std::string& what) {
  throw std::invalid_argument("config line " + std::to_string(e.line) + " (" + e.section + "." +
                              e.key + "): " + what);
}

long long to_integer(const ConfigEntry& e) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(e.value, &used);
  } catch (const std::exception&) {
    fail(e, "expected an integer, got '" + e.value + "'");
  }
  if (used != e.value.size()) fail(e, "expected an integer, got '" + e.value + "'");
  return v;
}

std::uint64_t to_unsigned(const ConfigEntry& e) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    if (!e.value.empty() && e.value[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(e.value, &used);
  } catch (const std::exception&) {
    fail(e, "expected a non-negative integer, got '" + e.value + "'");
  }
  if (used != e.value.size()) fail(e, "expected a non-negative integer, got '" + e.value + "'");
  return v;
}

double to_real(const ConfigEntry& e) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(e.value, &used);
  } catch (const std::exception&) {
    fail(e, "expected a number, got '" + e.value + "'");
  }
  if (used != e.value.size()) fail(e, "expected a number, got '" + e.value + "'");
  return v;
}

std::vector<double> to_reals(const ConfigEntry& e) {
  std::vector<double> out;
  std::istringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    ConfigEntry one = e;
    one.value = trim(item);
    out.push_back(to_real(one));
  }
  if (out.empty()) fail(e, "expected a comma-separated list of numbers");
  return out;
}

std::string real_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string reals_text(const std::vector<double>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ", ";
    out += real_text(vs[i]);
  }
  return out;
}

using Setter = std::function<void(TrainingConfig&, const ConfigEntry&)>;

const std::map<std::string, Setter>& schema() {
  static const std::map<std::string, Setter> s = {
      {"circuit.n_qubits", [](auto& c, const auto& e) { c.n_qubits = static_cast<int>(to_integer(e)); }},
      {"circuit.layers", [](auto& c, const auto& e) { c.layers = static_cast<int>(to_integer(e)); }},
      {"es.k", [](auto& c, const auto& e) { c.k = static_cast<int>(to_integer(e)); }},
      {"es.c_target", [](auto& c, const auto& e) { c.c_target = to_unsigned(e); }},
      {"es.t_max", [](auto& c, const auto& e) { c.t_max = static_cast<int>(to_integer(e)); }},
      {"actions.sigmas", [](auto& c, const auto& e) { c.grid.sigmas = to_reals(e); }},
      {"actions.etas", [](auto& c, const auto& e) { c.grid.etas = to_reals(e); }},
      {"ars.t_l", [](auto& c, const auto& e) { c.t_l = static_cast<int>(to_integer(e)); }},
      {"ars.t_u", [](auto& c, const auto& e) { c.t_u = static_cast<int>(to_integer(e)); }},
      {"ars.t_threshold", [](auto& c, const auto& e) { c.t_threshold = static_cast<int>(to_integer(e)); }},
      {"training.instances_per_episode",
       [](auto& c, const auto& e) { c.instances_per_episode = static_cast<int>(to_integer(e)); }},
      {"training.episodes", [](auto& c, const auto& e) { c.episodes = static_cast<long>(to_integer(e)); }},
      {"training.seed", [](auto& c, const auto& e) { c.seed = to_unsigned(e); }},
      {"training.advantage_sign",
       [](auto& c, const auto& e) {
         try {
           c.advantage_sign = advantage_sign_from_string(e.value);
         } catch (const std::invalid_argument& ex) {
           fail(e, ex.what());
         }
       }},
      {"training.lr", [](auto& c, const auto& e) { c.lr = to_real(e); }},
      {"training.batch_size", [](auto& c, const auto& e) { c.batch_size = to_unsigned(e); }},
      {"training.buffer_capacity", [](auto& c, const auto& e) { c.buffer_capacity = to_unsigned(e); }},
      {"training.updates_per_episode",
       [](auto& c, const auto& e) { c.updates_per_episode = static_cast<int>(to_integer(e)); }},
      {"training.checkpoint_every",
       [](auto& c, const auto& e) { c.checkpoint_every = static_cast<int>(to_integer(e)); }},
      {"training.rolling_window",
       [](auto& c, const auto& e) { c.rolling_window = static_cast<int>(to_integer(e)); }},
  };
  return s;
}

}  // namespace

std::vector<ConfigEntry> parse_config_text(const std::string& text) {
  std::vector<ConfigEntry> out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw std::invalid_argument("config line " + std::to_string(line_no) + ": bad section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    ConfigEntry e{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
    if (e.key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    }
    out.push_back(std::move(e));
  }
  return out;
}

TrainingConfig training_config_from_text(const std::string& text) {
  const auto entries = parse_config_text(text);
  int n_qubits = 1;
  for (const auto& e : entries) {
    if (e.section == "circuit" && e.key == "n_qubits") n_qubits = static_cast<int>(to_integer(e));
  }
  TrainingConfig c = n_qubits >= 1 && n_qubits <= 3 ? TrainingConfig::for_qubits(n_qubits)
                                                     : TrainingConfig::for_qubits(3);
  std::set<std::string> seen;
  for (const auto& e : entries) {
    const std::string name = e.section + "." + e.key;
    const auto it = schema().find(name);
    if (it == schema().end()) fail(e, "unknown key");
    if (!seen.insert(name).second) fail(e, "duplicate key");
    it->second(c, e);
  }
  c.validate();
  return c;
}

TrainingConfig load_training_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return training_config_from_text(ss.str());
}

std::string to_config_text(const TrainingConfig& c) {
  std::ostringstream out;
  out << "[circuit]\n"
      << "n_qubits = " << c.n_qubits << "\n"
      << "layers = " << c.layers << "\n\n"
      << "[es]\n"
      << "k = " << c.k << "\n"
      << "c_target = " << c.c_target << "\n"
      << "t_max = " << c.t_max << "\n\n"
      << "[actions]\n"
      << "sigmas = " << reals_text(c.grid.sigmas) << "\n"
      << "etas = " << reals_text(c.grid.etas) << "\n\n"
      << "[ars]\n"
      << "t_l = " << c.t_l << "\n"
      << "t_u = " << c.t_u << "\n"
      << "t_threshold = " << c.t_threshold << "\n\n"
      << "[training]\n"
      << "instances_per_episode = " << c.instances_per_episode << "\n"
      << "episodes = " << c.episodes << "\n"
      << "seed = " << c.seed << "\n"
      << "advantage_sign = " << to_string(c.advantage_sign) << "\n"
      << "lr = " << real_text(c.lr) << "\n"
      << "batch_size = " << c.batch_size << "\n"
      << "buffer_capacity = " << c.buffer_capacity << "\n"
      << "updates_per_episode = " << c.updates_per_episode << "\n"
      << "checkpoint_every = " << c.checkpoint_every << "\n"
      << "rolling_window = " << c.rolling_window << "\n";
  return out.str();
}

}  // namespace qmeta
