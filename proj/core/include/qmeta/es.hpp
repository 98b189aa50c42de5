#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmeta/measure.hpp"
#include "qmeta/qsim.hpp"
#include "qmeta/rng.hpp"
#include "qmeta/state_io.hpp"

namespace qmeta {

struct EsConfig {
  int k = 5;                     // population size per step
  std::uint64_t c_target = 10000;
  int t_max = 3000;
  int t_rep = 1;                 // action repetition time

  /// Per-qubit defaults (population sizes 5/10/30/100, RL horizons 3e3/1e4/2e4).
  static EsConfig for_qubits(int n_qubits);
  void validate() const;
};

/// ES hyperparameters chosen for one or more steps.
struct Action {
  double sigma = 0.1;  // sampling range
  double eta = 0.01;   // learning rate
  int grid_index = -1;

  bool operator==(const Action&) const = default;
};

/// One ES time step as seen by the agent.
struct Transition {
  double obs = 0.0;               // encoded observation o_t
  std::uint64_t obs_count = 0;    // raw success count behind `obs`
  int action_index = -1;
  double reward = -1.0;           // 0 at the halting step, -1 otherwise
  double next_obs = 0.0;
  std::uint64_t next_obs_count = 0;
  bool done = false;
  bool decision = false;          // the action was (re)drawn at this step
  int t = 0;
  int t_h = 0;
};
using RolloutLog = std::vector<Transition>;

/// Source of actions during a learning run.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action select(std::uint64_t observation) = 0;
};

/// Baseline mode: the same action at every step.
class FixedPolicy final : public Policy {
 public:
  explicit FixedPolicy(Action a) : action_(a) {}
  Action select(std::uint64_t) override { return action_; }

 private:
  Action action_;
};

/// (1 / (c_target sigma k)) sum_i C_i eps_i.
ParamVector estimate_gradient(std::span<const std::uint64_t> counts,
                              std::span<const ParamVector> epsilons, double sigma,
                              std::uint64_t c_target);

struct StepResult {
  ParamVector theta_next;
  Action action;
  std::uint64_t observation = 0;              // C(theta_t)
  std::vector<std::uint64_t> sample_counts;   // C(theta_t + sigma eps_i)
  bool halted = false;
  std::optional<ParamVector> theta_halt;
};

using ActionSelector = std::function<Action(std::uint64_t observation)>;

/// One iteration: observe C(theta_t), get the action for this step from
/// `select`, draw k perturbations, halt if any count (observation included)
/// reaches c_target, otherwise ascend the estimated gradient.
StepResult es_step(const ParamVector& theta, const ActionSelector& select, Environment& env,
                   const EsConfig& config, Rng& rng);
StepResult es_step(const ParamVector& theta, const Action& action, Environment& env,
                   const EsConfig& config, Rng& rng);

struct LearnOutcome {
  ParamVector theta_train;
  std::uint64_t c_total = 0;   // success shots over every measurement of the run
  std::uint64_t c_fail = 0;
  int t_h = 0;                 // halting step, or t_max when the run did not halt
  bool halted = false;
  double infidelity = 1.0;
  RolloutLog transitions;
};

/// Full learning run from a random initial theta. The action is refreshed at
/// t = 1 and whenever t % t_rep == 0.
LearnOutcome run_learning(const QuantumState& input_state, const HeaSpec& spec, Policy& policy,
                          const EsConfig& config, Rng& rng,
                          SamplingMode mode = SamplingMode::closed_form);

/// Same, on an arbitrary environment; `estimate` maps theta_train to an
/// infidelity (may be empty, then infidelity stays at 1).
LearnOutcome run_learning(Environment& env, Policy& policy, const EsConfig& config,
                          const ParamVector& theta0, Rng& rng,
                          const std::function<double(const ParamVector&)>& infidelity_of = {});

/// Row of the per-run outcome log.
struct OutcomeRecord {
  std::uint64_t instance_id = 0;
  std::uint64_t seed = 0;
  int n_qubits = 1;
  int layers = 0;
  std::uint64_t c_target = 0;
  std::uint64_t c_total = 0;
  int t_h = 0;
  bool halted = false;
  double infidelity = 1.0;
};

OutcomeRecord make_record(const LearnOutcome& o, std::uint64_t instance_id, std::uint64_t seed,
                          const HeaSpec& spec, std::uint64_t c_target);
std::string to_jsonl(const OutcomeRecord& r);
OutcomeRecord outcome_from_jsonl(const std::string& line);

}  // namespace qmeta
