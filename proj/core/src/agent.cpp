#include "qmeta/agent.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include "qmeta/parallel.hpp"

namespace qmeta {

// ------------------------------------------------------------------ ActionGrid

Action ActionGrid::at(std::size_t index) const {
  if (index >= size()) throw std::out_of_range("action index out of range");
  Action a;
  a.sigma = sigmas[index / etas.size()];
  a.eta = etas[index % etas.size()];
  a.grid_index = static_cast<int>(index);
  return a;
}

std::size_t ActionGrid::nearest(double sigma, double eta) const {
  validate();
  auto closest = [](const std::vector<double>& xs, double x) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double d = std::abs(std::log(xs[i]) - std::log(x));
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };
  return closest(sigmas, sigma) * etas.size() + closest(etas, eta);
}

void ActionGrid::validate() const {
  if (sigmas.empty() || etas.empty()) throw std::invalid_argument("action grid is empty");
  for (double s : sigmas) {
    if (!(s > 0.0)) throw std::invalid_argument("grid sigmas must be > 0");
  }
  for (double e : etas) {
    if (!(e > 0.0)) throw std::invalid_argument("grid etas must be > 0");
  }
}

ActionGrid ActionGrid::table(int n_qubits) {
  if (n_qubits <= 2) return {{1.0, 0.1, 0.01, 0.001}, {1.0, 0.1, 0.01, 0.001}};
  return {{0.1, 0.01, 0.001, 0.0001}, {1.0, 0.33, 0.01, 0.033}};
}

ActionGrid ActionGrid::extended() {
  ActionGrid g;
  for (int i = 1; i <= 13; ++i) {
    const double v = std::pow(10.0, -0.25 * (i - 1));
    g.sigmas.push_back(v);
    g.etas.push_back(v);
  }
  return g;
}

// ------------------------------------------------------------ schedule, value

int ars_schedule(long episode, int t_l, int t_u, int t_threshold) {
  if (t_l < 1 || t_u <= t_l) throw std::invalid_argument("ARS needs t_u > t_l >= 1");
  if (t_threshold < 1) throw std::invalid_argument("ARS threshold must be >= 1");
  if (episode < 0) throw std::invalid_argument("episode index must be >= 0");
  // ceil((t_u T_th - T (t_u - t_l)) / T_th)
  const long long num = static_cast<long long>(t_u) * t_threshold -
                        static_cast<long long>(episode) * (t_u - t_l);
  const long long den = t_threshold;
  long long q = num / den;
  if (num % den != 0 && num > 0) ++q;
  return static_cast<int>(std::max<long long>(q, t_l));
}

double empirical_value(int t, int t_h, int t_max) {
  if (t < 1 || t > t_h || t_h > t_max) {
    throw std::invalid_argument("empirical_value needs 1 <= t <= t_h <= t_max");
  }
  return static_cast<double>(t - t_h) / static_cast<double>(t_max);
}

// ---------------------------------------------------------------- networks

namespace {

std::vector<int> layer_dims(int in, int hidden, int layers, int out) {
  std::vector<int> d{in};
  for (int i = 0; i < layers; ++i) d.push_back(hidden);
  d.push_back(out);
  return d;
}

Eigen::MatrixXd obs_row(std::span<const Transition> batch) {
  Eigen::MatrixXd x(1, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = batch[i].obs;
  return x;
}

double empirical_of(const Transition& tr, int t_max) {
  return empirical_value(tr.t, tr.t_h, t_max);
}

}  // namespace

Mlp make_actor(std::size_t grid_size, int hidden, int hidden_layers) {
  return Mlp(layer_dims(1, hidden, hidden_layers, static_cast<int>(grid_size)));
}

Mlp make_critic(int hidden, int hidden_layers) {
  return Mlp(layer_dims(1, hidden, hidden_layers, 1));
}

std::vector<double> policy_forward(const Mlp& actor, double obs) {
  if (!std::isfinite(obs)) throw std::invalid_argument("observation must be finite");
  Eigen::MatrixXd x(1, 1);
  x(0, 0) = obs;
  const Eigen::MatrixXd p = softmax_columns(actor.forward(x));
  return {p.data(), p.data() + p.size()};
}

double critic_forward(const Mlp& critic, double obs) {
  if (!std::isfinite(obs)) throw std::invalid_argument("observation must be finite");
  return critic.forward_one(obs)(0);
}

double critic_loss(const Mlp& critic, std::span<const Transition> batch, int t_max,
                   MlpGrad* grad) {
  if (batch.empty()) throw std::invalid_argument("critic_loss: empty batch");
  Mlp::Cache cache;
  const Eigen::MatrixXd q = critic.forward(obs_row(batch), grad ? &cache : nullptr);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  Eigen::MatrixXd dq(1, q.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < q.cols(); ++i) {
    const double diff = q(0, i) - empirical_of(batch[static_cast<std::size_t>(i)], t_max);
    loss += 0.5 * diff * diff;
    dq(0, i) = diff * inv_b;
  }
  if (grad) critic.backward(cache, dq, *grad);
  return loss * inv_b;
}

double actor_objective(const Mlp& actor, const Mlp& critic, std::span<const Transition> batch,
                       int t_max, AdvantageSign sign, MlpGrad* grad) {
  if (batch.empty()) throw std::invalid_argument("actor_objective: empty batch");
  const Eigen::MatrixXd x = obs_row(batch);
  const Eigen::MatrixXd q = critic.forward(x);
  Mlp::Cache cache;
  const Eigen::MatrixXd logits = actor.forward(x, grad ? &cache : nullptr);
  const Eigen::MatrixXd p = softmax_columns(logits);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
  double objective = 0.0;
  for (Eigen::Index i = 0; i < logits.cols(); ++i) {
    const auto& tr = batch[static_cast<std::size_t>(i)];
    if (tr.action_index < 0 || tr.action_index >= logits.rows()) {
      throw std::invalid_argument("transition action index outside the actor's grid");
    }
    const double target = empirical_of(tr, t_max);
    const double adv = sign == AdvantageSign::standard ? target - q(0, i) : q(0, i) - target;
    const Eigen::Index a = tr.action_index;
    objective += adv * std::log(std::max(p(a, i), 1e-300));
    // d(-adv log p_a)/dz = -adv (e_a - p)
    dz.col(i) = adv * inv_b * p.col(i);
    dz(a, i) -= adv * inv_b;
  }
  if (grad) actor.backward(cache, dz, *grad);
  return objective * inv_b;
}

UpdateStats actor_critic_update(Mlp& actor, Mlp& critic, AdamState& actor_adam,
                                AdamState& critic_adam, std::span<const Transition> value_batch,
                                std::span<const Transition> policy_batch, double lr, int t_max,
                                AdvantageSign sign) {
  if (value_batch.empty() && policy_batch.empty()) {
    throw std::invalid_argument("actor_critic_update: empty batch");
  }
  UpdateStats stats;
  stats.value_batch = value_batch.size();
  stats.policy_batch = policy_batch.size();

  if (!policy_batch.empty()) {
    MlpGrad g = actor.zero_grad();
    stats.actor_objective = actor_objective(actor, critic, policy_batch, t_max, sign, &g);
    double abs_adv = 0.0;
    for (const auto& tr : policy_batch) {
      abs_adv += std::abs(empirical_of(tr, t_max) - critic_forward(critic, tr.obs));
    }
    stats.mean_abs_advantage = abs_adv / static_cast<double>(policy_batch.size());
    actor_adam.step(actor, g, lr);
  }
  if (!value_batch.empty()) {
    MlpGrad g = critic.zero_grad();
    stats.critic_loss = critic_loss(critic, value_batch, t_max, &g);
    critic_adam.step(critic, g, lr);
  }
  return stats;
}

UpdateStats actor_critic_update(Mlp& actor, Mlp& critic, AdamState& actor_adam,
                                AdamState& critic_adam, std::span<const Transition> batch,
                                double lr, int t_max, AdvantageSign sign) {
  if (batch.empty()) throw std::invalid_argument("actor_critic_update: empty batch");
  std::vector<Transition> decisions;
  for (const auto& tr : batch) {
    if (tr.decision && tr.action_index >= 0) decisions.push_back(tr);
  }
  return actor_critic_update(actor, critic, actor_adam, critic_adam, batch, decisions, lr, t_max,
                             sign);
}

// --------------------------------------------------------------- ReplayBuffer

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw std::invalid_argument("replay buffer capacity must be >= 1");
}

void ReplayBuffer::push(const Transition& t) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(t);
}

void ReplayBuffer::append(std::span<const Transition> ts) {
  for (const auto& t : ts) push(t);
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  const std::size_t n = items_.size();
  const std::size_t k = std::min(batch_size, n);
  std::vector<Transition> out;
  out.reserve(k);
  // Floyd's algorithm: k distinct indices in O(k log k)
  std::set<std::size_t> chosen;
  for (std::size_t j = n - k; j < n; ++j) {
    const auto t = static_cast<std::size_t>(rng.uniform_index(j + 1));
    const std::size_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    out.push_back(items_[pick]);
  }
  return out;
}

// --------------------------------------------------------------------- Agent

Agent::Agent(AgentConfig config)
    : config_(std::move(config)),
      actor_(make_actor(config_.grid.size(), config_.actor_hidden, config_.hidden_layers)),
      critic_(make_critic(config_.critic_hidden, config_.hidden_layers)),
      actor_adam_(actor_),
      critic_adam_(critic_),
      buffer_(config_.buffer_capacity),
      decisions_(config_.buffer_capacity) {
  config_.grid.validate();
}

Agent::Agent(AgentConfig config, Rng& init_rng) : Agent(std::move(config)) {
  actor_.init_uniform(init_rng);
  critic_.init_uniform(init_rng);
}

std::size_t pick_action(std::span<const double> probs, Rng& rng, bool greedy) {
  if (probs.empty()) throw std::invalid_argument("empty action distribution");
  if (greedy) {
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  }
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

Action Agent::sample_action(double obs, Rng& rng) const {
  return config_.grid.at(pick_action(policy(obs), rng, false));
}

Action Agent::greedy_action(double obs) const {
  Rng unused(0);
  return config_.grid.at(pick_action(policy(obs), unused, true));
}

void Agent::record(std::span<const Transition> transitions) {
  for (const auto& tr : transitions) {
    buffer_.push(tr);
    if (tr.decision && tr.action_index >= 0) decisions_.push(tr);
  }
}

UpdateStats Agent::update(Rng& rng, int t_max) {
  if (buffer_.size() == 0) throw std::invalid_argument("agent update with an empty buffer");
  const auto values = buffer_.sample(config_.batch_size, rng);
  const auto decisions = decisions_.sample(config_.batch_size, rng);
  return actor_critic_update(actor_, critic_, actor_adam_, critic_adam_, values, decisions,
                             config_.lr, t_max, config_.advantage_sign);
}

PolicyTable::PolicyTable(const Agent& agent, std::uint64_t c_target) : c_target_(c_target) {
  if (c_target < 1 || c_target > kPolicyTableLimit) {
    throw std::invalid_argument("policy table c_target out of range");
  }
  Eigen::MatrixXd x(1, static_cast<Eigen::Index>(c_target + 1));
  for (std::uint64_t c = 0; c <= c_target; ++c) {
    x(0, static_cast<Eigen::Index>(c)) = encode_observation(c, c_target);
  }
  probs_ = softmax_columns(agent.actor().forward(x));
}

std::span<const double> PolicyTable::probs(std::uint64_t count) const {
  const auto col = static_cast<Eigen::Index>(std::min(count, c_target_));
  return {probs_.data() + col * probs_.rows(), static_cast<std::size_t>(probs_.rows())};
}

Action AgentPolicy::select(std::uint64_t observation) {
  if (table_ && table_->c_target() == c_target_) {
    return agent_.grid().at(pick_action(table_->probs(observation), rng_, greedy_));
  }
  const double obs = encode_observation(observation, c_target_);
  return greedy_ ? agent_.greedy_action(obs) : agent_.sample_action(obs, rng_);
}

// ---------------------------------------------------------------- rollouts

std::vector<LearnOutcome> collect_rollouts(Agent& agent, std::span<const Problem> problems,
                                           const HeaSpec& spec, EsConfig es_config, int t_rep,
                                           bool greedy, int threads) {
  es_config.t_rep = t_rep;
  es_config.validate();
  std::vector<LearnOutcome> outcomes(problems.size());
  const Agent& reader = agent;
  std::optional<PolicyTable> table;
  if (es_config.c_target <= kPolicyTableLimit) table.emplace(reader, es_config.c_target);
  parallel_for(problems.size(), threads, [&](std::size_t i) {
    AgentPolicy policy(reader, es_config.c_target, problems[i].policy_seed, greedy,
                       table ? &*table : nullptr);
    Rng rng(problems[i].es_seed);
    outcomes[i] = run_learning(problems[i].state, spec, policy, es_config, rng);
  });
  for (const auto& o : outcomes) agent.record(o.transitions);
  return outcomes;
}

}  // namespace qmeta
