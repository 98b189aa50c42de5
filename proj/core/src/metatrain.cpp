#include "qmeta/metatrain.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <stdexcept>

#include <json.hpp>

#include "qmeta/parallel.hpp"

namespace qmeta {

// ------------------------------------------------------------ configuration

TrainingConfig TrainingConfig::for_qubits(int n_qubits) {
  TrainingConfig c;
  c.n_qubits = n_qubits;
  c.grid = ActionGrid::table(n_qubits);
  const EsConfig es = EsConfig::for_qubits(n_qubits);
  c.k = es.k;
  c.t_max = es.t_max;
  switch (n_qubits) {
    case 1:
      c.layers = 0;
      c.t_l = 1; c.t_u = 50; c.t_threshold = 100;
      c.lr = 1e-4;
      c.episodes = 300;
      break;
    case 2:
      c.layers = 1;
      c.t_l = 80; c.t_u = 800; c.t_threshold = 100;
      c.lr = 3e-5;
      c.episodes = 150;
      break;
    case 3:
      c.layers = 5;
      c.t_l = 300; c.t_u = 2000; c.t_threshold = 500;
      c.lr = 3e-5;
      c.episodes = 100;
      break;
    default:
      throw std::invalid_argument("training defaults exist for 1 to 3 qubits");
  }
  return c;
}

void TrainingConfig::validate() const {
  spec().validate();
  es_config().validate();
  grid.validate();
  ars_schedule(0, t_l, t_u, t_threshold);
  if (instances_per_episode < 1) throw std::invalid_argument("instances_per_episode must be >= 1");
  if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be > 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (buffer_capacity < 1) throw std::invalid_argument("buffer_capacity must be >= 1");
  if (updates_per_episode < 0) throw std::invalid_argument("updates_per_episode must be >= 0");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every must be >= 0");
  if (rolling_window < 1) throw std::invalid_argument("rolling_window must be >= 1");
}

HeaSpec TrainingConfig::spec() const { return HeaSpec::for_qubits(n_qubits, layers); }

EsConfig TrainingConfig::es_config() const {
  EsConfig e;
  e.k = k;
  e.c_target = c_target;
  e.t_max = t_max;
  e.t_rep = 1;
  return e;
}

AgentConfig TrainingConfig::agent_config() const {
  AgentConfig a;
  a.grid = grid;
  a.lr = lr;
  a.advantage_sign = advantage_sign;
  a.buffer_capacity = buffer_capacity;
  a.batch_size = batch_size;
  return a;
}

// ------------------------------------------------------------------ metrics

std::string to_jsonl(const EpisodeMetrics& m) {
  nlohmann::ordered_json j;
  j["T"] = m.T;
  j["mean_c_total"] = m.mean_c_total;
  j["mean_infidelity"] = m.mean_infidelity;
  j["mean_t_h"] = m.mean_t_h;
  j["t_rep"] = m.t_rep;
  j["halted_fraction"] = m.halted_fraction;
  j["critic_loss"] = m.critic_loss;
  j["actor_objective"] = m.actor_objective;
  j["rolling_c_total"] = m.rolling_c_total;
  return j.dump();
}

EpisodeMetrics episode_metrics_from_jsonl(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  EpisodeMetrics m;
  m.T = j.at("T").get<long>();
  m.mean_c_total = j.at("mean_c_total").get<double>();
  m.mean_infidelity = j.at("mean_infidelity").get<double>();
  m.mean_t_h = j.at("mean_t_h").get<double>();
  m.t_rep = j.at("t_rep").get<int>();
  m.halted_fraction = j.at("halted_fraction").get<double>();
  m.critic_loss = j.at("critic_loss").get<double>();
  m.actor_objective = j.at("actor_objective").get<double>();
  m.rolling_c_total = j.at("rolling_c_total").get<double>();
  return m;
}

// ------------------------------------------------------------------ instances

QuantumState instance_state(int n_qubits, double mu, std::uint64_t seed, std::uint64_t index,
                            const char* tag) {
  Rng rng(derive_subseed(seed, index, tag));
  StateVector psi = haar_random_state(n_qubits, rng);
  if (mu > 0.0) return depolarize(psi, mu);
  return psi;
}

namespace {

struct Means {
  double c_total = 0.0;
  double infidelity = 0.0;
  double t_h = 0.0;
  double halted = 0.0;
};

template <class Outcome>
Means means_of(const std::vector<Outcome>& outcomes) {
  Means m;
  if (outcomes.empty()) return m;
  for (const auto& o : outcomes) {
    m.c_total += static_cast<double>(o.c_total);
    m.infidelity += o.infidelity;
    m.t_h += static_cast<double>(o.t_h);
    m.halted += o.halted ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(outcomes.size());
  m.c_total /= n;
  m.infidelity /= n;
  m.t_h /= n;
  m.halted /= n;
  return m;
}

std::filesystem::path sidecar(const std::filesystem::path& ckpt, const char* suffix) {
  return std::filesystem::path(ckpt.string() + suffix);
}

std::vector<EpisodeMetrics> read_metrics_before(const std::filesystem::path& path, long episode_T) {
  std::vector<EpisodeMetrics> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto m = episode_metrics_from_jsonl(line);
    if (m.T < episode_T) out.push_back(m);
  }
  return out;
}

}  // namespace

std::filesystem::path best_checkpoint_path(const std::filesystem::path& checkpoint_path) {
  auto p = checkpoint_path;
  p.replace_filename(checkpoint_path.stem().string() + ".best" +
                     checkpoint_path.extension().string());
  return p;
}

// ------------------------------------------------------------------ training

TrainingResult run_training(const TrainingConfig& config, const TrainingOutputs& outputs) {
  config.validate();
  const HeaSpec spec = config.spec();
  const EsConfig es = config.es_config();

  Rng init_rng(derive_subseed(config.seed, 0, "agent-init"));
  Agent agent(config.agent_config(), init_rng);
  Rng update_rng(derive_subseed(config.seed, 0, "update"));
  long start = 0;
  double best = 0.0;
  long best_episode = -1;
  TrainingResult result;

  std::vector<EpisodeMetrics> history;
  if (outputs.resume_from) {
    const Checkpoint ckpt = load_checkpoint(*outputs.resume_from);
    if (ckpt.n_qubits != config.n_qubits || ckpt.layers != config.layers ||
        !(ckpt.agent_config.grid == config.grid)) {
      throw std::runtime_error("checkpoint does not match the training configuration");
    }
    agent = restore_agent(ckpt);
    update_rng.set_state(ckpt.rng_state);
    start = ckpt.episode_T;
    best = ckpt.best_rolling_c_total;
    best_episode = ckpt.best_episode;
    const auto buf = sidecar(*outputs.resume_from, ".buffer.jsonl");
    const auto dec = sidecar(*outputs.resume_from, ".decisions.jsonl");
    if (std::filesystem::exists(buf)) load_buffer(buf, agent.buffer());
    if (std::filesystem::exists(dec)) load_buffer(dec, agent.decision_buffer());
    if (outputs.metrics_path && std::filesystem::exists(*outputs.metrics_path)) {
      history = read_metrics_before(*outputs.metrics_path, start);
    }
  }

  std::ofstream metrics_out;
  std::ofstream outcomes_out;
  const auto mode = outputs.resume_from ? std::ios::app : std::ios::trunc;
  if (outputs.metrics_path) {
    metrics_out.open(*outputs.metrics_path, std::ios::binary | mode);
    if (!metrics_out) throw std::runtime_error("cannot write " + outputs.metrics_path->string());
  }
  if (outputs.outcomes_path) {
    outcomes_out.open(*outputs.outcomes_path, std::ios::binary | mode);
    if (!outcomes_out) throw std::runtime_error("cannot write " + outputs.outcomes_path->string());
  }

  auto snapshot = [&](long episodes_done) {
    Checkpoint c = capture_checkpoint(agent, episodes_done, config.n_qubits, config.layers,
                                      update_rng);
    c.best_rolling_c_total = best;
    c.best_episode = best_episode;
    return c;
  };
  auto write_checkpoint = [&](const Checkpoint& c) {
    if (!outputs.checkpoint_path) return;
    save_checkpoint(*outputs.checkpoint_path, c);
    if (outputs.save_buffers) {
      save_buffer(sidecar(*outputs.checkpoint_path, ".buffer.jsonl"), agent.buffer());
      save_buffer(sidecar(*outputs.checkpoint_path, ".decisions.jsonl"), agent.decision_buffer());
    }
  };

  const auto per_episode = static_cast<std::uint64_t>(config.instances_per_episode);
  for (long T = start; T < config.episodes; ++T) {
    const int t_rep = ars_schedule(T, config.t_l, config.t_u, config.t_threshold);
    std::vector<Problem> problems;
    problems.reserve(per_episode);
    for (std::uint64_t i = 0; i < per_episode; ++i) {
      const std::uint64_t index = static_cast<std::uint64_t>(T) * per_episode + i;
      problems.push_back({instance_state(config.n_qubits, 0.0, config.seed, index, "train-state"),
                          derive_subseed(config.seed, index, "train-es"),
                          derive_subseed(config.seed, index, "train-policy")});
    }
    const auto outcomes = collect_rollouts(agent, problems, spec, es, t_rep, false, config.threads);

    EpisodeMetrics m;
    m.T = T;
    m.t_rep = t_rep;
    for (int u = 0; u < config.updates_per_episode; ++u) {
      const UpdateStats s = agent.update(update_rng, config.t_max);
      m.critic_loss += s.critic_loss;
      m.actor_objective += s.actor_objective;
    }
    if (config.updates_per_episode > 0) {
      m.critic_loss /= config.updates_per_episode;
      m.actor_objective /= config.updates_per_episode;
    }
    const Means means = means_of(outcomes);
    m.mean_c_total = means.c_total;
    m.mean_infidelity = means.infidelity;
    m.mean_t_h = means.t_h;
    m.halted_fraction = means.halted;

    history.push_back(m);
    const auto w = static_cast<std::size_t>(config.rolling_window);
    bool improved = false;
    if (history.size() >= w) {
      double sum = 0.0;
      for (std::size_t i = history.size() - w; i < history.size(); ++i) sum += history[i].mean_c_total;
      history.back().rolling_c_total = sum / static_cast<double>(w);
      if (best_episode < 0 || history.back().rolling_c_total < best) {
        best = history.back().rolling_c_total;
        best_episode = T;
        improved = true;
      }
    }
    m = history.back();
    result.metrics.push_back(m);

    if (outcomes_out.is_open()) {
      for (std::uint64_t i = 0; i < per_episode; ++i) {
        const std::uint64_t index = static_cast<std::uint64_t>(T) * per_episode + i;
        outcomes_out << to_jsonl(make_record(outcomes[i], index, problems[i].es_seed, spec,
                                             config.c_target))
                     << '\n';
      }
      outcomes_out.flush();
    }
    if (metrics_out.is_open()) {
      metrics_out << to_jsonl(m) << '\n';
      metrics_out.flush();
    }
    if (improved) {
      result.best_checkpoint = snapshot(T + 1);
      if (outputs.checkpoint_path) {
        save_checkpoint(best_checkpoint_path(*outputs.checkpoint_path), *result.best_checkpoint);
      }
    }
    const bool last = T + 1 == config.episodes;
    if (!last && config.checkpoint_every > 0 && (T + 1) % config.checkpoint_every == 0) {
      write_checkpoint(snapshot(T + 1));
    }
    if (outputs.on_episode) outputs.on_episode(m);
  }

  result.final_checkpoint = snapshot(std::max(start, config.episodes));
  write_checkpoint(result.final_checkpoint);
  return result;
}

// ---------------------------------------------------------------- evaluation

HeaSpec EvalConfig::spec() const { return HeaSpec::for_qubits(n_qubits, layers); }

void EvalConfig::validate() const {
  spec().validate();
  if (k < 1 || t_max < 1 || t_rep < 1) throw std::invalid_argument("k, t_max, t_rep must be >= 1");
  if (c_targets.empty()) throw std::invalid_argument("at least one c_target is required");
  for (auto c : c_targets) {
    if (c < 1) throw std::invalid_argument("c_target must be >= 1");
  }
  if (n_states < 1) throw std::invalid_argument("n_states must be >= 1");
  if (depolarizing_mu < 0.0 || depolarizing_mu > 1.0) {
    throw std::invalid_argument("depolarizing mu must be in [0, 1]");
  }
  if (state && n_qubits_of(*state) != n_qubits) {
    throw std::invalid_argument("state qubit count does not match n_qubits");
  }
}

namespace {

using PolicyFactory =
    std::function<std::unique_ptr<Policy>(std::uint64_t c_target, std::uint64_t seed)>;

EvalResult evaluate_with(const EvalConfig& config, const PolicyFactory& make_policy,
                         const std::function<void(std::uint64_t)>& prepare) {
  config.validate();
  const HeaSpec spec = config.spec();
  EvalResult result;
  const auto n = static_cast<std::size_t>(config.n_states);
  for (const std::uint64_t c_target : config.c_targets) {
    if (prepare) prepare(c_target);
    EsConfig es;
    es.k = config.k;
    es.c_target = c_target;
    es.t_max = config.t_max;
    es.t_rep = config.t_rep;
    const std::string es_tag = "eval-es-" + std::to_string(c_target);
    const std::string policy_tag = "eval-policy-" + std::to_string(c_target);
    std::vector<LearnOutcome> outcomes(n);
    std::vector<std::uint64_t> seeds(n);
    parallel_for(n, config.threads, [&](std::size_t i) {
      const QuantumState target =
          config.state ? *config.state
                       : instance_state(config.n_qubits, config.depolarizing_mu, config.seed, i,
                                        "eval-state");
      seeds[i] = derive_subseed(config.seed, i, es_tag);
      auto policy = make_policy(c_target, derive_subseed(config.seed, i, policy_tag));
      Rng rng(seeds[i]);
      outcomes[i] = run_learning(target, spec, *policy, es, rng, config.mode);
      outcomes[i].transitions.clear();
      outcomes[i].transitions.shrink_to_fit();
    });
    const Means m = means_of(outcomes);
    result.rows.push_back({c_target, m.c_total, m.infidelity, m.t_h, m.halted,
                           config.n_states});
    for (std::size_t i = 0; i < n; ++i) {
      result.outcomes.push_back(make_record(outcomes[i], i, seeds[i], spec, c_target));
    }
  }
  return result;
}

}  // namespace

EvalResult evaluate_agent(const Agent& agent, const EvalConfig& config) {
  std::optional<PolicyTable> table;
  return evaluate_with(
      config,
      [&](std::uint64_t c_target, std::uint64_t seed) -> std::unique_ptr<Policy> {
        return std::make_unique<AgentPolicy>(agent, c_target, seed, config.greedy,
                                             table ? &*table : nullptr);
      },
      [&](std::uint64_t c_target) {
        table.reset();
        if (c_target <= kPolicyTableLimit) table.emplace(agent, c_target);
      });
}

EvalResult evaluate_fixed(const Action& action, const EvalConfig& config) {
  return evaluate_with(
      config,
      [&](std::uint64_t, std::uint64_t) -> std::unique_ptr<Policy> {
        return std::make_unique<FixedPolicy>(action);
      },
      {});
}

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows) {
  out << "c_target,mean_c_total,mean_infidelity,mean_t_h,n\n";
  const auto old = out.precision(17);
  for (const auto& r : rows) {
    out << r.c_target << ',' << r.mean_c_total << ',' << r.mean_infidelity << ',' << r.mean_t_h
        << ',' << r.n << '\n';
  }
  out.precision(old);
}

void write_outcomes_jsonl(std::ostream& out, const std::vector<OutcomeRecord>& outcomes) {
  for (const auto& o : outcomes) out << to_jsonl(o) << '\n';
}

}  // namespace qmeta
