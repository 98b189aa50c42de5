#pragma once

// Outer meta-learning loop over RL episodes, and evaluation of trained or
// fixed-action policies on fresh Haar-random instances.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qmeta/agent.hpp"
#include "qmeta/checkpoint.hpp"
#include "qmeta/es.hpp"

namespace qmeta {

struct TrainingConfig {
  int n_qubits = 1;
  int layers = 0;
  int k = 5;
  std::uint64_t c_target = 10000;
  int t_max = 3000;
  ActionGrid grid = ActionGrid::table(1);
  int t_l = 1;
  int t_u = 50;
  int t_threshold = 100;
  int instances_per_episode = 100;
  long episodes = 300;
  std::uint64_t seed = 1;
  AdvantageSign advantage_sign = AdvantageSign::standard;
  double lr = 1e-4;
  std::size_t batch_size = 256;
  std::size_t buffer_capacity = 1'000'000;
  int updates_per_episode = 50;
  int checkpoint_every = 1;   // episodes between checkpoint writes; 0 = final only
  int rolling_window = 10;
  int threads = 0;            // 0 = QMETA_THREADS or hardware

  /// Defaults of the 1-, 2- and 3-qubit training rows.
  static TrainingConfig for_qubits(int n_qubits);
  void validate() const;
  HeaSpec spec() const;
  EsConfig es_config() const;
  AgentConfig agent_config() const;

  bool operator==(const TrainingConfig&) const = default;
};

struct EpisodeMetrics {
  long T = 0;
  double mean_c_total = 0.0;
  double mean_infidelity = 0.0;
  double mean_t_h = 0.0;
  int t_rep = 1;
  double halted_fraction = 0.0;
  double critic_loss = 0.0;
  double actor_objective = 0.0;
  double rolling_c_total = 0.0;  // mean over the last `rolling_window` episodes, 0 before
};

std::string to_jsonl(const EpisodeMetrics& m);
EpisodeMetrics episode_metrics_from_jsonl(const std::string& line);

struct TrainingOutputs {
  std::optional<std::filesystem::path> metrics_path;    // JSONL, appended per episode
  std::optional<std::filesystem::path> outcomes_path;   // JSONL of every training rollout
  std::optional<std::filesystem::path> checkpoint_path; // latest; best goes to <stem>.best.json
  bool save_buffers = false;  // write replay-buffer sidecars next to the checkpoint
  std::optional<std::filesystem::path> resume_from;
  std::function<void(const EpisodeMetrics&)> on_episode;
};

struct TrainingResult {
  std::vector<EpisodeMetrics> metrics;
  Checkpoint final_checkpoint;
  std::optional<Checkpoint> best_checkpoint;
};

/// Path of the best-rolling checkpoint written alongside `checkpoint_path`.
std::filesystem::path best_checkpoint_path(const std::filesystem::path& checkpoint_path);

TrainingResult run_training(const TrainingConfig& config, const TrainingOutputs& outputs = {});

struct EvalConfig {
  int n_qubits = 1;
  int layers = 0;
  int k = 5;
  int t_max = 3000;
  int t_rep = 1;
  std::vector<std::uint64_t> c_targets{10000};
  int n_states = 100;
  std::uint64_t seed = 1;
  bool greedy = false;
  double depolarizing_mu = 0.0;        // > 0 learns mu-depolarized Haar states
  std::optional<QuantumState> state;   // learn this state for every instance instead
  SamplingMode mode = SamplingMode::closed_form;
  int threads = 0;

  HeaSpec spec() const;
  void validate() const;
};

struct EvalRow {
  std::uint64_t c_target = 0;
  double mean_c_total = 0.0;
  double mean_infidelity = 0.0;
  double mean_t_h = 0.0;
  double halted_fraction = 0.0;
  int n = 0;
};

struct EvalResult {
  std::vector<EvalRow> rows;
  std::vector<OutcomeRecord> outcomes;
};

EvalResult evaluate_agent(const Agent& agent, const EvalConfig& config);
EvalResult evaluate_fixed(const Action& action, const EvalConfig& config);

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows);
void write_outcomes_jsonl(std::ostream& out, const std::vector<OutcomeRecord>& outcomes);

/// Target state of instance `index` as used by evaluation and training.
QuantumState instance_state(int n_qubits, double mu, std::uint64_t seed, std::uint64_t index,
                            const char* tag);

}  // namespace qmeta
