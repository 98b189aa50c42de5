#pragma once

// JSON state files:
//   pure:  {"n_qubits": N, "amplitudes": [[re, im], ...]}
//   mixed: {"n_qubits": N, "entries": [[re, im], ...]}   (row-major, 4^N pairs)

#include <filesystem>
#include <string>
#include <variant>

#include "qmeta/qsim.hpp"

namespace qmeta {

using QuantumState = std::variant<StateVector, DensityMatrix>;

std::string to_json_text(const StateVector& psi);
std::string to_json_text(const DensityMatrix& rho);
QuantumState state_from_json_text(const std::string& text);

void write_state_file(const std::filesystem::path& path, const QuantumState& state);
QuantumState read_state_file(const std::filesystem::path& path);

int n_qubits_of(const QuantumState& state);

}  // namespace qmeta
