#include "qmeta/es.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qmeta/observation.hpp"

namespace qmeta {

EsConfig EsConfig::for_qubits(int n_qubits) {
  EsConfig c;
  switch (n_qubits) {
    case 1: c.k = 5; c.t_max = 3000; break;
    case 2: c.k = 10; c.t_max = 10000; break;
    case 3: c.k = 30; c.t_max = 20000; break;
    default: c.k = 100; c.t_max = 20000; break;
  }
  return c;
}

void EsConfig::validate() const {
  if (k < 1) throw std::invalid_argument("population size k must be >= 1");
  if (c_target < 1) throw std::invalid_argument("c_target must be >= 1");
  if (t_max < 1) throw std::invalid_argument("t_max must be >= 1");
  if (t_rep < 1) throw std::invalid_argument("t_rep must be >= 1");
}

ParamVector estimate_gradient(std::span<const std::uint64_t> counts,
                              std::span<const ParamVector> epsilons, double sigma,
                              std::uint64_t c_target) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (counts.empty() || counts.size() != epsilons.size()) {
    throw std::invalid_argument("need one count per perturbation");
  }
  if (c_target < 1) throw std::invalid_argument("c_target must be >= 1");
  const std::size_t n = epsilons.front().size();
  ParamVector g(n);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (epsilons[i].size() != n) throw std::invalid_argument("perturbation length mismatch");
    const double c = static_cast<double>(counts[i]);
    if (c == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) g[j] += c * epsilons[i][j];
  }
  const double scale =
      1.0 / (static_cast<double>(c_target) * sigma * static_cast<double>(counts.size()));
  for (auto& x : g.angles) x *= scale;
  return g;
}

StepResult es_step(const ParamVector& theta, const ActionSelector& select, Environment& env,
                   const EsConfig& config, Rng& rng) {
  if (theta.size() != env.param_count()) throw std::invalid_argument("theta length mismatch");
  StepResult r;
  const auto obs = env.measure(theta, rng);
  r.observation = obs.count;
  r.action = select(obs.count);
  if (obs.count >= config.c_target) {
    r.halted = true;
    r.theta_halt = theta;
    r.theta_next = theta;
    return r;
  }
  if (!(r.action.sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");

  const std::size_t n = theta.size();
  std::vector<ParamVector> eps(static_cast<std::size_t>(config.k), ParamVector(n));
  r.sample_counts.reserve(eps.size());
  ParamVector probe(n);
  for (auto& e : eps) {
    for (std::size_t j = 0; j < n; ++j) {
      e[j] = rng.normal();
      probe[j] = theta[j] + r.action.sigma * e[j];
    }
    const auto s = env.measure(probe, rng);
    r.sample_counts.push_back(s.count);
    if (!r.halted && s.count >= config.c_target) {
      r.halted = true;
      r.theta_halt = probe;
    }
  }
  if (r.halted) {
    r.theta_next = theta;
    return r;
  }
  r.theta_next = theta;
  if (r.action.eta != 0.0) {
    const ParamVector g = estimate_gradient(r.sample_counts, eps, r.action.sigma, config.c_target);
    for (std::size_t j = 0; j < n; ++j) r.theta_next[j] += r.action.eta * g[j];
  }
  return r;
}

StepResult es_step(const ParamVector& theta, const Action& action, Environment& env,
                   const EsConfig& config, Rng& rng) {
  return es_step(theta, [&](std::uint64_t) { return action; }, env, config, rng);
}

LearnOutcome run_learning(Environment& env, Policy& policy, const EsConfig& config,
                          const ParamVector& theta0, Rng& rng,
                          const std::function<double(const ParamVector&)>& infidelity_of) {
  config.validate();
  auto encode = [&](std::uint64_t c) { return encode_observation(c, config.c_target); };

  LearnOutcome out;
  ParamVector theta = theta0;
  Action current{};
  bool have_action = false;
  out.transitions.reserve(64);

  int t = 1;
  for (; t <= config.t_max; ++t) {
    const bool decision = !have_action || t % config.t_rep == 0;
    Transition tr;
    const ActionSelector select = [&](std::uint64_t obs) {
      if (decision) {
        current = policy.select(obs);
        have_action = true;
      }
      return current;
    };
    StepResult step = es_step(theta, select, env, config, rng);
    tr.obs_count = step.observation;
    tr.obs = encode(step.observation);
    tr.action_index = step.action.grid_index;
    tr.decision = decision;
    tr.t = t;
    if (!out.transitions.empty()) {
      out.transitions.back().next_obs_count = step.observation;
      out.transitions.back().next_obs = tr.obs;
    }
    if (step.halted) {
      tr.reward = 0.0;
      tr.done = true;
      tr.next_obs_count = config.c_target;
      tr.next_obs = 1.0;
      out.transitions.push_back(tr);
      out.halted = true;
      out.theta_train = std::move(*step.theta_halt);
      break;
    }
    tr.next_obs_count = tr.obs_count;
    tr.next_obs = tr.obs;
    out.transitions.push_back(tr);
    theta = std::move(step.theta_next);
  }

  if (!out.halted) {
    out.theta_train = theta;
    out.t_h = config.t_max;
  } else {
    out.t_h = t;
  }
  for (auto& tr : out.transitions) tr.t_h = out.t_h;
  out.c_total = env.ledger().total_success();
  out.c_fail = env.ledger().total_fail();
  if (infidelity_of) out.infidelity = infidelity_of(out.theta_train);
  return out;
}

LearnOutcome run_learning(const QuantumState& input_state, const HeaSpec& spec, Policy& policy,
                          const EsConfig& config, Rng& rng, SamplingMode mode) {
  constexpr std::size_t kSuccessBasis = 0;
  CircuitEnvironment env(input_state, spec, kSuccessBasis, config.c_target, mode);
  const ParamVector theta0 = random_params(spec, rng);
  auto fid = [&](const ParamVector& th) {
    const StateVector est = reconstruct_state(spec, th, kSuccessBasis);
    return std::visit([&](const auto& target) { return infidelity(target, est); }, input_state);
  };
  return run_learning(env, policy, config, theta0, rng, fid);
}

OutcomeRecord make_record(const LearnOutcome& o, std::uint64_t instance_id, std::uint64_t seed,
                          const HeaSpec& spec, std::uint64_t c_target) {
  OutcomeRecord r;
  r.instance_id = instance_id;
  r.seed = seed;
  r.n_qubits = spec.n_qubits;
  r.layers = spec.n_layers;
  r.c_target = c_target;
  r.c_total = o.c_total;
  r.t_h = o.t_h;
  r.halted = o.halted;
  r.infidelity = o.infidelity;
  return r;
}

std::string to_jsonl(const OutcomeRecord& r) {
  nlohmann::ordered_json j;
  j["instance_id"] = r.instance_id;
  j["seed"] = r.seed;
  j["n_qubits"] = r.n_qubits;
  j["layers"] = r.layers;
  j["c_target"] = r.c_target;
  j["c_total"] = r.c_total;
  j["t_h"] = r.t_h;
  j["halted"] = r.halted;
  j["infidelity"] = r.infidelity;
  return j.dump();
}

OutcomeRecord outcome_from_jsonl(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  OutcomeRecord r;
  r.instance_id = j.at("instance_id").get<std::uint64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.n_qubits = j.at("n_qubits").get<int>();
  r.layers = j.at("layers").get<int>();
  r.c_target = j.at("c_target").get<std::uint64_t>();
  r.c_total = j.at("c_total").get<std::uint64_t>();
  r.t_h = j.at("t_h").get<int>();
  r.halted = j.at("halted").get<bool>();
  r.infidelity = j.at("infidelity").get<double>();
  return r;
}

}  // namespace qmeta
