#include "qmeta/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace qmeta {

void MlpGrad::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

double MlpGrad::max_abs() const {
  double m = 0.0;
  for (const auto& w : weights) m = std::max(m, w.size() ? w.cwiseAbs().maxCoeff() : 0.0);
  for (const auto& b : biases) m = std::max(m, b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
  return m;
}

Mlp::Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw std::invalid_argument("network needs at least input and output");
  for (int d : dims_) {
    if (d < 1) throw std::invalid_argument("layer width must be >= 1");
  }
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    weights_.emplace_back(Eigen::MatrixXd::Zero(dims_[l + 1], dims_[l]));
    biases_.emplace_back(Eigen::VectorXd::Zero(dims_[l + 1]));
  }
}

void Mlp::init_uniform(Rng& rng) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims_[l]));
    auto& w = weights_[l];
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-bound, bound);
    }
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) biases_[l](r) = rng.uniform(-bound, bound);
  }
}

void Mlp::scale(double factor) {
  for (auto& w : weights_) w *= factor;
  for (auto& b : biases_) b *= factor;
}

void Mlp::set_zero() {
  for (auto& w : weights_) w.setZero();
  for (auto& b : biases_) b.setZero();
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& inputs, Cache* cache) const {
  if (inputs.rows() != input_dim()) throw std::invalid_argument("network input width mismatch");
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd h = inputs;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd a = weights_[l] * h;
    a.colwise() += biases_[l];
    if (cache) {
      cache->inputs.push_back(h);
      cache->pre.push_back(a);
    }
    if (l + 1 < weights_.size()) {
      h = a.cwiseMax(0.0);
    } else {
      h = std::move(a);
    }
  }
  return h;
}

Eigen::VectorXd Mlp::forward_one(double input) const {
  Eigen::MatrixXd x(1, 1);
  x(0, 0) = input;
  return forward(x).col(0);
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& grad_output, MlpGrad& grad) const {
  if (cache.pre.size() != weights_.size()) throw std::invalid_argument("backward: stale cache");
  Eigen::MatrixXd delta = grad_output;  // dL/d(pre-activation) of the current layer
  for (std::size_t li = weights_.size(); li-- > 0;) {
    grad.weights[li].noalias() += delta * cache.inputs[li].transpose();
    grad.biases[li] += delta.rowwise().sum();
    if (li == 0) break;
    Eigen::MatrixXd dh = weights_[li].transpose() * delta;
    const auto& prev_pre = cache.pre[li - 1];
    delta = dh.cwiseProduct((prev_pre.array() > 0.0).cast<double>().matrix());
  }
}

MlpGrad Mlp::zero_grad() const {
  MlpGrad g;
  for (const auto& w : weights_) g.weights.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : biases_) g.biases.emplace_back(Eigen::VectorXd::Zero(b.size()));
  return g;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

double& Mlp::param(std::size_t flat_index) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const auto nw = static_cast<std::size_t>(weights_[l].size());
    if (flat_index < nw) return weights_[l].data()[flat_index];
    flat_index -= nw;
    const auto nb = static_cast<std::size_t>(biases_[l].size());
    if (flat_index < nb) return biases_[l].data()[flat_index];
    flat_index -= nb;
  }
  throw std::out_of_range("parameter index out of range");
}

double Mlp::grad_at(const MlpGrad& g, std::size_t flat_index) {
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    const auto nw = static_cast<std::size_t>(g.weights[l].size());
    if (flat_index < nw) return g.weights[l].data()[flat_index];
    flat_index -= nw;
    const auto nb = static_cast<std::size_t>(g.biases[l].size());
    if (flat_index < nb) return g.biases[l].data()[flat_index];
    flat_index -= nb;
  }
  throw std::out_of_range("gradient index out of range");
}

bool Mlp::operator==(const Mlp& other) const {
  if (dims_ != other.dims_) return false;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) return false;
  }
  return true;
}

AdamState::AdamState(const Mlp& net, AdamOptions opts)
    : opts_(opts), m_(net.zero_grad()), v_(net.zero_grad()) {}

void AdamState::step(Mlp& net, const MlpGrad& grad, double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = opts_.beta1 * m + (1.0 - opts_.beta1) * g;
    v = opts_.beta2 * v + (1.0 - opts_.beta2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + opts_.epsilon);
  };
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    update(net.weights()[l], grad.weights[l], m_.weights[l], v_.weights[l]);
    update(net.biases()[l], grad.biases[l], m_.biases[l], v_.biases[l]);
  }
}

bool AdamState::operator==(const AdamState& other) const {
  if (t_ != other.t_ || m_.weights.size() != other.m_.weights.size()) return false;
  for (std::size_t l = 0; l < m_.weights.size(); ++l) {
    if (m_.weights[l] != other.m_.weights[l] || m_.biases[l] != other.m_.biases[l] ||
        v_.weights[l] != other.v_.weights[l] || v_.biases[l] != other.v_.biases[l]) {
      return false;
    }
  }
  return true;
}

Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double mx = logits.col(c).maxCoeff();
    p.col(c) = (logits.col(c).array() - mx).exp().matrix();
    p.col(c) /= p.col(c).sum();
  }
  return p;
}

}  // namespace qmeta
