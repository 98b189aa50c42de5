#include "qmeta/state_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qmeta {

using nlohmann::json;

namespace {

json pair_of(const Complex& z) { return json::array({z.real(), z.imag()}); }

Complex complex_of(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex entry must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::string to_json_text(const StateVector& psi) {
  json amps = json::array();
  for (const auto& a : psi.amplitudes()) amps.push_back(pair_of(a));
  return json{{"n_qubits", psi.n_qubits()}, {"amplitudes", std::move(amps)}}.dump();
}

std::string to_json_text(const DensityMatrix& rho) {
  json entries = json::array();
  const auto& m = rho.matrix();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back(pair_of(m(r, c)));
  }
  return json{{"n_qubits", rho.n_qubits()}, {"entries", std::move(entries)}}.dump();
}

QuantumState state_from_json_text(const std::string& text) {
  const json j = json::parse(text);
  if (!j.contains("n_qubits")) throw std::invalid_argument("state file lacks n_qubits");
  const int n = j.at("n_qubits").get<int>();
  const std::size_t dim = dimension_for(n);
  if (j.contains("amplitudes")) {
    const auto& a = j.at("amplitudes");
    if (a.size() != dim) throw std::invalid_argument("amplitude count does not match n_qubits");
    std::vector<Complex> amps;
    amps.reserve(dim);
    for (const auto& e : a) amps.push_back(complex_of(e));
    return StateVector(n, std::move(amps));
  }
  if (j.contains("entries")) {
    const auto& e = j.at("entries");
    if (e.size() != dim * dim) throw std::invalid_argument("entry count does not match n_qubits");
    Eigen::MatrixXcd m(dim, dim);
    for (std::size_t i = 0; i < dim * dim; ++i) {
      m(static_cast<Eigen::Index>(i / dim), static_cast<Eigen::Index>(i % dim)) = complex_of(e[i]);
    }
    return DensityMatrix(n, std::move(m), 1e-8);
  }
  throw std::invalid_argument("state file needs 'amplitudes' or 'entries'");
}

void write_state_file(const std::filesystem::path& path, const QuantumState& state) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::visit([](const auto& s) { return to_json_text(s); }, state) << '\n';
}

QuantumState read_state_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return state_from_json_text(ss.str());
}

int n_qubits_of(const QuantumState& state) {
  return std::visit([](const auto& s) { return s.n_qubits(); }, state);
}

}  // namespace qmeta
