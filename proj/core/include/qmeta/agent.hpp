#pragma once

// Actor-critic agent that picks (sigma, eta) for the evolution strategy from
// the observed success count.

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "qmeta/es.hpp"
#include "qmeta/mlp.hpp"
#include "qmeta/observation.hpp"
#include "qmeta/rng.hpp"

namespace qmeta {

/// Discrete (sigma, eta) grid; action index = sigma_index * etas.size() + eta_index.
struct ActionGrid {
  std::vector<double> sigmas;
  std::vector<double> etas;

  std::size_t size() const { return sigmas.size() * etas.size(); }
  Action at(std::size_t index) const;
  /// Index of the cell closest to (sigma, eta) in log space.
  std::size_t nearest(double sigma, double eta) const;
  void validate() const;

  /// The 4x4 grid used for `n_qubits` training.
  static ActionGrid table(int n_qubits);
  /// 13x13 grid with values 10^(-0.25 (i - 1)), i = 1..13.
  static ActionGrid extended();

  bool operator==(const ActionGrid&) const = default;
};

/// t_rep = max(ceil(t_u - (T / T_th)(t_u - t_l)), t_l), in exact integer arithmetic.
int ars_schedule(long episode, int t_l, int t_u, int t_threshold);

/// (t - t_h) / t_max: normalized empirical return from step t.
double empirical_value(int t, int t_h, int t_max);

enum class AdvantageSign {
  standard,  // ascend (Q_empirical - Q_critic) log pi
  literal    // ascend (Q_critic - Q_empirical) log pi
};

/// Actor: 1 -> 3 x 50 -> |grid| (softmax). Critic: 1 -> 3 x 100 -> 1.
Mlp make_actor(std::size_t grid_size, int hidden = 50, int hidden_layers = 3);
Mlp make_critic(int hidden = 100, int hidden_layers = 3);

std::vector<double> policy_forward(const Mlp& actor, double obs);
double critic_forward(const Mlp& critic, double obs);

/// Mean over the batch of 0.5 (Q(o) - Q_empirical)^2; accumulates the
/// gradient into `grad` when given.
double critic_loss(const Mlp& critic, std::span<const Transition> batch, int t_max,
                   MlpGrad* grad = nullptr);

/// Mean over the batch of A(o) log pi(a|o) with the advantage A taken as a
/// constant. `grad` receives the gradient of the *negated* objective, i.e. a
/// descent direction for the actor.
double actor_objective(const Mlp& actor, const Mlp& critic, std::span<const Transition> batch,
                       int t_max, AdvantageSign sign, MlpGrad* grad = nullptr);

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
  double mean_abs_advantage = 0.0;
  std::size_t value_batch = 0;
  std::size_t policy_batch = 0;
};

/// One ADAM step for each network. The advantage is evaluated with the
/// critic before its update. Transitions whose action was not drawn at that
/// step (`decision == false`) only train the critic.
UpdateStats actor_critic_update(Mlp& actor, Mlp& critic, AdamState& actor_adam,
                                AdamState& critic_adam, std::span<const Transition> batch,
                                double lr, int t_max, AdvantageSign sign);
/// Separate batches for the critic and the actor.
UpdateStats actor_critic_update(Mlp& actor, Mlp& critic, AdamState& actor_adam,
                                AdamState& critic_adam, std::span<const Transition> value_batch,
                                std::span<const Transition> policy_batch, double lr, int t_max,
                                AdvantageSign sign);

/// FIFO transition store with uniform sampling without replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1'000'000);

  void push(const Transition& t);
  void append(std::span<const Transition> ts);
  std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<Transition>& items() const { return items_; }
  void clear() { items_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

struct AgentConfig {
  ActionGrid grid = ActionGrid::table(1);
  int actor_hidden = 50;
  int critic_hidden = 100;
  int hidden_layers = 3;
  double lr = 1e-4;
  AdvantageSign advantage_sign = AdvantageSign::standard;
  std::size_t buffer_capacity = 1'000'000;
  std::size_t batch_size = 256;
};

class Agent {
 public:
  explicit Agent(AgentConfig config);
  Agent(AgentConfig config, Rng& init_rng);

  const AgentConfig& config() const { return config_; }
  const ActionGrid& grid() const { return config_.grid; }

  std::vector<double> policy(double obs) const { return policy_forward(actor_, obs); }
  double value(double obs) const { return critic_forward(critic_, obs); }
  Action sample_action(double obs, Rng& rng) const;
  Action greedy_action(double obs) const;

  void record(std::span<const Transition> transitions);
  /// Samples a value batch from all transitions and a policy batch from the
  /// decision steps, then applies one actor-critic update.
  UpdateStats update(Rng& rng, int t_max);

  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  AdamState& actor_adam() { return actor_adam_; }
  AdamState& critic_adam() { return critic_adam_; }
  const AdamState& actor_adam() const { return actor_adam_; }
  const AdamState& critic_adam() const { return critic_adam_; }
  ReplayBuffer& buffer() { return buffer_; }
  ReplayBuffer& decision_buffer() { return decisions_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const ReplayBuffer& decision_buffer() const { return decisions_; }

 private:
  AgentConfig config_;
  Mlp actor_;
  Mlp critic_;
  AdamState actor_adam_;
  AdamState critic_adam_;
  ReplayBuffer buffer_;
  ReplayBuffer decisions_;
};

/// Action probabilities for every count 0..c_target, evaluated in one batch.
/// Valid while the actor is unchanged.
class PolicyTable {
 public:
  PolicyTable(const Agent& agent, std::uint64_t c_target);

  std::uint64_t c_target() const { return c_target_; }
  /// Probabilities for `count` (clamped to c_target).
  std::span<const double> probs(std::uint64_t count) const;

 private:
  std::uint64_t c_target_;
  Eigen::MatrixXd probs_;  // grid x (c_target + 1)
};

/// Largest c_target for which rollouts precompute a PolicyTable.
inline constexpr std::uint64_t kPolicyTableLimit = 1'000'000;

/// Policy adapter used inside learning runs; owns its sampling stream.
class AgentPolicy final : public Policy {
 public:
  AgentPolicy(const Agent& agent, std::uint64_t c_target, std::uint64_t seed, bool greedy = false,
              const PolicyTable* table = nullptr)
      : agent_(agent), c_target_(c_target), rng_(seed), greedy_(greedy), table_(table) {}

  Action select(std::uint64_t observation) override;

 private:
  const Agent& agent_;
  std::uint64_t c_target_;
  Rng rng_;
  bool greedy_;
  const PolicyTable* table_;
};

/// Index drawn from `probs` with one uniform deviate, or the first argmax.
std::size_t pick_action(std::span<const double> probs, Rng& rng, bool greedy);

/// One problem of a rollout batch: the state to learn and the seeds of its
/// ES and policy streams.
struct Problem {
  QuantumState state;
  std::uint64_t es_seed = 0;
  std::uint64_t policy_seed = 0;
};

/// Runs one learning episode per problem with actions sampled from the
/// agent (greedy when requested), then appends every transition to the
/// agent's buffers in problem order.
std::vector<LearnOutcome> collect_rollouts(Agent& agent, std::span<const Problem> problems,
                                           const HeaSpec& spec, EsConfig es_config, int t_rep,
                                           bool greedy = false, int threads = 0);

}  // namespace qmeta
