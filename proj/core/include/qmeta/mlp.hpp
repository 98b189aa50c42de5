#pragma once

// Small fully connected ReLU networks with explicit backprop and ADAM.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "qmeta/rng.hpp"

namespace qmeta {

/// Gradient (or any same-shaped quantity) for every weight and bias of an Mlp.
struct MlpGrad {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  void set_zero();
  double max_abs() const;
};

/// dims = {in, h1, ..., out}. Hidden layers use ReLU, the output is linear.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> dims);

  const std::vector<int>& dims() const { return dims_; }
  std::size_t n_layers() const { return weights_.size(); }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }

  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  void init_uniform(Rng& rng);
  void scale(double factor);
  void set_zero();

  /// Activations kept for backprop; columns are batch entries.
  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;  // layer inputs (post-activation of previous layer)
    std::vector<Eigen::MatrixXd> pre;     // pre-activations
  };

  /// inputs: input_dim x B. Returns output_dim x B.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs, Cache* cache = nullptr) const;
  Eigen::VectorXd forward_one(double input) const;

  /// Accumulates dL/dparams into `grad` given dL/doutput (output_dim x B).
  void backward(const Cache& cache, const Eigen::MatrixXd& grad_output, MlpGrad& grad) const;

  MlpGrad zero_grad() const;

  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

  std::size_t param_count() const;
  /// Flat parameter view in layer order: W0 (column-major), b0, W1, b1, ...
  double& param(std::size_t flat_index);
  static double grad_at(const MlpGrad& g, std::size_t flat_index);

  bool operator==(const Mlp& other) const;

 private:
  std::vector<int> dims_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment estimates for one network.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const Mlp& net, AdamOptions opts = {});

  /// Descends along `grad` with learning rate `lr`.
  void step(Mlp& net, const MlpGrad& grad, double lr);

  long steps() const { return t_; }
  const AdamOptions& options() const { return opts_; }
  MlpGrad& first_moment() { return m_; }
  MlpGrad& second_moment() { return v_; }
  const MlpGrad& first_moment() const { return m_; }
  const MlpGrad& second_moment() const { return v_; }
  void set_steps(long t) { t_ = t; }

  bool operator==(const AdamState& other) const;

 private:
  AdamOptions opts_;
  MlpGrad m_;
  MlpGrad v_;
  long t_ = 0;
};

/// Numerically stable softmax of each column.
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits);

}  // namespace qmeta
