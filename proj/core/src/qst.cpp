#include "qmeta/qst.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qmeta {

namespace {

Eigen::Matrix2cd pauli(char p) {
  Eigen::Matrix2cd m;
  switch (p) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("unknown Pauli label");
  }
  return m;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double trace_product(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& pi) {
  // Tr(rho Pi) for Hermitian operands
  return (rho.array() * pi.transpose().array()).sum().real();
}

Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  return h / h.trace().real();
}

void check_table(const FrequencyTable& freqs, const PauliSettings& settings) {
  if (freqs.freqs.size() != settings.size()) {
    throw std::invalid_argument("frequency table does not match the settings");
  }
  for (std::size_t s = 0; s < settings.size(); ++s) {
    if (freqs.freqs[s].size() != settings.settings[s].projectors.size()) {
      throw std::invalid_argument("frequency row does not match its setting");
    }
  }
}

}  // namespace

PauliSettings build_settings(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 6) throw std::invalid_argument("tomography supports 1 to 6 qubits");
  static constexpr char kLabels[] = {'I', 'X', 'Y', 'Z'};
  PauliSettings out;
  out.n_qubits = n_qubits;
  const std::size_t total = std::size_t{1} << (2 * n_qubits);
  for (std::size_t code = 1; code < total; ++code) {
    PauliSetting s;
    for (int q = 0; q < n_qubits; ++q) {
      s.label.push_back(kLabels[(code >> (2 * (n_qubits - 1 - q))) & 3u]);
    }
    std::vector<int> measured;
    for (int q = 0; q < n_qubits; ++q) {
      if (s.label[q] != 'I') measured.push_back(q);
    }
    const std::size_t n_out = std::size_t{1} << measured.size();
    for (std::size_t o = 0; o < n_out; ++o) {
      Eigen::MatrixXcd pi = Eigen::MatrixXcd::Identity(1, 1);
      std::size_t j = 0;
      for (int q = 0; q < n_qubits; ++q) {
        Eigen::Matrix2cd factor = Eigen::Matrix2cd::Identity();
        if (s.label[q] != 'I') {
          const bool minus = (o >> (measured.size() - 1 - j)) & 1u;
          factor = 0.5 * (Eigen::Matrix2cd::Identity() + (minus ? -1.0 : 1.0) * pauli(s.label[q]));
          ++j;
        }
        pi = kron(pi, factor);
      }
      s.projectors.push_back(std::move(pi));
    }
    out.settings.push_back(std::move(s));
  }
  return out;
}

FrequencyTable exact_frequencies(const DensityMatrix& rho, const PauliSettings& settings) {
  if (rho.n_qubits() != settings.n_qubits) throw std::invalid_argument("qubit count mismatch");
  FrequencyTable t;
  for (const auto& s : settings.settings) {
    std::vector<double> row;
    for (const auto& pi : s.projectors) row.push_back(std::max(0.0, trace_product(rho.matrix(), pi)));
    double sum = 0.0;
    for (double p : row) sum += p;
    for (double& p : row) p /= sum;
    t.freqs.push_back(std::move(row));
  }
  return t;
}

FrequencyTable simulate_frequencies(const DensityMatrix& rho, const PauliSettings& settings,
                                    std::uint64_t n_shots, Rng& rng) {
  if (n_shots < 1) throw std::invalid_argument("n_shots must be >= 1");
  const FrequencyTable probs = exact_frequencies(rho, settings);
  FrequencyTable t;
  t.shots_per_setting = n_shots;
  for (const auto& p : probs.freqs) {
    std::vector<std::uint64_t> counts(p.size(), 0);
    for (std::uint64_t shot = 0; shot < n_shots; ++shot) {
      const double u = rng.uniform();
      double acc = 0.0;
      std::size_t k = 0;
      for (; k + 1 < p.size(); ++k) {
        acc += p[k];
        if (u < acc) break;
      }
      ++counts[k];
    }
    std::vector<double> row(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
      row[k] = static_cast<double>(counts[k]) / static_cast<double>(n_shots);
    }
    t.freqs.push_back(std::move(row));
  }
  return t;
}

namespace {

double loglik_raw(const Eigen::MatrixXcd& rho, const FrequencyTable& freqs,
                  const PauliSettings& settings, double p_floor) {
  double l = 0.0;
  for (std::size_t s = 0; s < settings.size(); ++s) {
    for (std::size_t o = 0; o < freqs.freqs[s].size(); ++o) {
      const double f = freqs.freqs[s][o];
      if (f <= 0.0) continue;
      const double p = trace_product(rho, settings.settings[s].projectors[o]);
      l += f * std::log(std::max(p, p_floor));
    }
  }
  return l;
}

}  // namespace

double log_likelihood(const DensityMatrix& rho, const FrequencyTable& freqs,
                      const PauliSettings& settings, double p_floor) {
  check_table(freqs, settings);
  return loglik_raw(rho.matrix(), freqs, settings, p_floor);
}

RrhoRResult rrhor_estimate(const FrequencyTable& freqs, const PauliSettings& settings,
                           const DensityMatrix& init, const RrhoROptions& options) {
  check_table(freqs, settings);
  if (init.n_qubits() != settings.n_qubits) throw std::invalid_argument("qubit count mismatch");
  if (!(options.alpha >= 0.0 && options.alpha < 1.0)) {
    throw std::invalid_argument("alpha must be in [0, 1)");
  }
  if (options.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  const double m = static_cast<double>(settings.size());
  const Eigen::Index dim = init.matrix().rows();

  RrhoRResult r{init, 0, 0.0, {}, false, 0};
  Eigen::MatrixXcd rho = init.matrix();
  auto loglik_of = [&](const Eigen::MatrixXcd& x) {
    return loglik_raw(x, freqs, settings, options.p_floor);
  };
  double l = loglik_of(rho);
  r.loglik_trace.push_back(l);

  constexpr int kMaxDamping = 30;
  for (int it = 0; it < options.max_iters; ++it) {
    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t s = 0; s < settings.size(); ++s) {
      for (std::size_t o = 0; o < freqs.freqs[s].size(); ++o) {
        const double f = freqs.freqs[s][o];
        if (f <= 0.0) continue;
        const auto& pi = settings.settings[s].projectors[o];
        double p = trace_product(rho, pi);
        if (p < options.p_floor) {
          p = options.p_floor;
          ++r.floored_probabilities;
        }
        R += (f / p) * pi;
      }
    }
    R /= m;
    Eigen::MatrixXcd rrr = R * rho * R;
    rrr /= rrr.trace().real();

    double alpha = options.alpha;
    bool accepted = false;
    Eigen::MatrixXcd next;
    double l_next = l;
    for (int d = 0; d < kMaxDamping; ++d) {
      next = hermitize(alpha * rho + (1.0 - alpha) * rrr);
      l_next = loglik_of(next);
      if (l_next >= l) {
        accepted = true;
        break;
      }
      alpha = 0.5 * (1.0 + alpha);
    }
    if (!accepted) {
      r.converged = true;
      break;
    }
    const double gain = l_next - l;
    rho = std::move(next);
    l = l_next;
    ++r.iterations;
    r.loglik_trace.push_back(l);
    if (gain < options.tol) {
      r.converged = true;
      break;
    }
  }
  r.rho = DensityMatrix(settings.n_qubits, rho, 1e-9);
  r.loglik = l;
  return r;
}

DensityMatrix random_initial_state(int n_qubits, Rng& rng) {
  const PauliSettings settings = build_settings(n_qubits);
  const auto dim = static_cast<Eigen::Index>(dimension_for(n_qubits));
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(dim, dim);
  for (const auto& s : settings.settings) {
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(1, 1);
    for (char c : s.label) p = kron(p, pauli(c));
    rho += rng.uniform(-1.0, 1.0) * p;
  }
  rho = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  Eigen::VectorXd w = es.eigenvalues().cwiseMax(1e-3);
  w /= w.sum();
  rho = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
  return DensityMatrix(n_qubits, 0.5 * (rho + rho.adjoint()), 1e-9);
}

std::string qst_csv_header() {
  return "instance,n_qubits,shots_per_setting,total_shots,infidelity,iterations,loglik";
}

std::string to_csv(const QstRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%llu,%d,%llu,%llu,%.17g,%d,%.17g",
                static_cast<unsigned long long>(row.instance), row.n_qubits,
                static_cast<unsigned long long>(row.shots_per_setting),
                static_cast<unsigned long long>(row.total_shots), row.infidelity, row.iterations,
                row.loglik);
  return buf;
}

}  // namespace qmeta
