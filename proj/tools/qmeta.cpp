// qmeta: command-line front end for state learning, agent training,
// tomography and scaling fits.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmeta/analysis.hpp"
#include "qmeta/checkpoint.hpp"
#include "qmeta/config.hpp"
#include "qmeta/manifest.hpp"
#include "qmeta/metatrain.hpp"
#include "qmeta/parallel.hpp"
#include "qmeta/qst.hpp"
#include "qmeta/state_io.hpp"

namespace {

using namespace qmeta;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::string manifest_path_for(const std::string& explicit_path, const std::string& output) {
  if (!explicit_path.empty()) return explicit_path;
  return output + ".manifest.json";
}

void finish_manifest(RunManifest m, const std::string& path) {
  m.finished_at = utc_timestamp();
  write_manifest(path, m);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Action parse_action(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError("--action", "expected sigma,eta");
  Action a;
  a.sigma = std::stod(text.substr(0, comma));
  a.eta = std::stod(text.substr(comma + 1));
  if (!(a.sigma > 0.0) || !(a.eta >= 0.0)) {
    throw CLI::ValidationError("--action", "sigma must be > 0 and eta >= 0");
  }
  return a;
}

// ------------------------------------------------------------------ state

struct StateOpts {
  std::string kind;
  int qubits = 1;
  std::uint64_t seed = 1;
  double mu = 0.0;
  std::string out;
  std::string in;
};

int cmd_state_gen(const StateOpts& o) {
  QuantumState s = StateVector::basis(1, 0);
  if (o.kind == "haar") {
    Rng rng(derive_subseed(o.seed, 0, "state-gen"));
    StateVector psi = haar_random_state(o.qubits, rng);
    if (o.mu > 0.0) {
      s = depolarize(psi, o.mu);
    } else {
      s = psi;
    }
  } else if (o.kind == "shen-castan") {
    s = shen_castan_state();
  } else {
    throw CLI::ValidationError("kind", "expected haar or shen-castan");
  }
  write_state_file(o.out, s);
  return 0;
}

int cmd_state_info(const StateOpts& o) {
  const QuantumState s = read_state_file(o.in);
  const DensityMatrix rho = std::visit(
      [](const auto& x) -> DensityMatrix {
        if constexpr (std::is_same_v<std::decay_t<decltype(x)>, StateVector>) {
          return DensityMatrix::from_pure(x);
        } else {
          return x;
        }
      },
      s);
  std::cout << "n_qubits " << rho.n_qubits() << "\n"
            << "purity " << num(rho.purity()) << "\n";
  for (int q = 0; q < rho.n_qubits(); ++q) {
    std::cout << "entropy_q" << q << " " << num(subsystem_entropy(rho, q)) << "\n";
  }
  return 0;
}

// ------------------------------------------------------------------ learn

struct LearnOpts {
  int qubits = 1;
  int layers = -1;
  int k = 0;
  int t_max = 0;
  int t_rep = 1;
  std::vector<std::uint64_t> c_targets{10000};
  int instances = 100;
  std::string action = "0.1,0.01";
  std::string agent;
  bool greedy = false;
  std::string state;
  double mu = 0.0;
  std::uint64_t seed = 1;
  bool shot_by_shot = false;
  std::string out = "outcomes.jsonl";
  std::string csv;
  std::string manifest;
};

EvalConfig eval_config_from(const LearnOpts& o) {
  EvalConfig c;
  c.n_qubits = o.qubits;
  const EsConfig defaults = EsConfig::for_qubits(o.qubits);
  c.layers = o.layers >= 0 ? o.layers : (o.qubits == 1 ? 0 : o.qubits == 2 ? 1 : o.qubits == 3 ? 5 : 10);
  c.k = o.k > 0 ? o.k : defaults.k;
  c.t_max = o.t_max > 0 ? o.t_max : defaults.t_max;
  c.t_rep = o.t_rep;
  c.c_targets = o.c_targets;
  c.n_states = o.instances;
  c.seed = o.seed;
  c.greedy = o.greedy;
  c.depolarizing_mu = o.mu;
  c.mode = o.shot_by_shot ? SamplingMode::shot_by_shot : SamplingMode::closed_form;
  if (!o.state.empty()) {
    c.state = read_state_file(o.state);
    if (n_qubits_of(*c.state) != o.qubits) {
      throw std::runtime_error("state file has " + std::to_string(n_qubits_of(*c.state)) +
                               " qubits, --qubits is " + std::to_string(o.qubits));
    }
  }
  return c;
}

int cmd_learn(const LearnOpts& o, const std::vector<std::string>& argv) {
  const EvalConfig cfg = eval_config_from(o);
  RunManifest m = make_manifest("learn", argv, o.seed);
  m.config = {{"n_qubits", std::to_string(cfg.n_qubits)}, {"layers", std::to_string(cfg.layers)},
              {"k", std::to_string(cfg.k)},               {"t_max", std::to_string(cfg.t_max)},
              {"t_rep", std::to_string(cfg.t_rep)},       {"instances", std::to_string(cfg.n_states)},
              {"mu", num(cfg.depolarizing_mu)},           {"greedy", cfg.greedy ? "true" : "false"}};
  EvalResult r;
  if (!o.agent.empty()) {
    const Checkpoint ckpt = load_checkpoint(o.agent);
    m.config["agent"] = o.agent;
    r = evaluate_agent(restore_agent(ckpt), cfg);
  } else {
    const Action a = parse_action(o.action);
    m.config["action"] = o.action;
    r = evaluate_fixed(a, cfg);
  }
  {
    auto out = open_out(o.out);
    write_outcomes_jsonl(out, r.outcomes);
  }
  m.outputs.push_back(o.out);
  if (!o.csv.empty()) {
    auto out = open_out(o.csv);
    write_eval_csv(out, r.rows);
    m.outputs.push_back(o.csv);
  }
  for (const auto& row : r.rows) {
    std::cout << "c_target=" << row.c_target << " mean_c_total=" << num(row.mean_c_total)
              << " mean_infidelity=" << num(row.mean_infidelity)
              << " mean_t_h=" << num(row.mean_t_h) << " halted=" << num(row.halted_fraction)
              << " n=" << row.n << "\n";
  }
  finish_manifest(m, manifest_path_for(o.manifest, o.out));
  return 0;
}

// ------------------------------------------------------------ train-agent

struct TrainOpts {
  std::string config;
  int qubits = 0;
  long episodes = -1;
  int instances = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string advantage_sign;
  std::string metrics = "metrics.jsonl";
  std::string outcomes;
  std::string checkpoint = "agent.json";
  std::string resume;
  bool save_buffers = false;
  bool print_config = false;
  std::string manifest;
};

int cmd_train(const TrainOpts& o, const std::vector<std::string>& argv) {
  TrainingConfig c = !o.config.empty() ? load_training_config(o.config)
                                       : TrainingConfig::for_qubits(o.qubits > 0 ? o.qubits : 1);
  if (o.config.empty() || o.qubits > 0) {
    if (o.qubits > 0 && o.qubits != c.n_qubits) c = TrainingConfig::for_qubits(o.qubits);
  }
  if (o.episodes >= 0) c.episodes = o.episodes;
  if (o.instances > 0) c.instances_per_episode = o.instances;
  if (o.seed_set) c.seed = o.seed;
  if (!o.advantage_sign.empty()) c.advantage_sign = advantage_sign_from_string(o.advantage_sign);
  c.validate();
  if (o.print_config) {
    std::cout << to_config_text(c);
    return 0;
  }

  RunManifest m = make_manifest("train-agent", argv, c.seed);
  for (const auto& e : parse_config_text(to_config_text(c))) m.config[e.section + "." + e.key] = e.value;

  TrainingOutputs out;
  out.metrics_path = o.metrics;
  if (!o.outcomes.empty()) out.outcomes_path = o.outcomes;
  out.checkpoint_path = o.checkpoint;
  out.save_buffers = o.save_buffers;
  if (!o.resume.empty()) out.resume_from = o.resume;
  out.on_episode = [](const EpisodeMetrics& e) {
    std::cerr << "episode " << e.T << " t_rep=" << e.t_rep << " mean_c_total=" << e.mean_c_total
              << " mean_t_h=" << e.mean_t_h << " halted=" << e.halted_fraction
              << " infidelity=" << e.mean_infidelity;
    if (e.rolling_c_total > 0.0) std::cerr << " rolling=" << e.rolling_c_total;
    std::cerr << "\n";
  };
  const TrainingResult r = run_training(c, out);
  m.outputs = {o.metrics, o.checkpoint};
  if (r.best_checkpoint) m.outputs.push_back(best_checkpoint_path(o.checkpoint).string());
  if (!o.outcomes.empty()) m.outputs.push_back(o.outcomes);
  finish_manifest(m, manifest_path_for(o.manifest, o.checkpoint));
  return 0;
}

// ---------------------------------------------------------- baseline-grid

struct GridOpts {
  int qubits = 1;
  int layers = -1;
  int k = 0;
  int t_max = 10000;
  std::uint64_t c_target = 10000;
  int instances = 100;
  std::uint64_t seed = 1;
  std::string grid = "table";
  std::string out = "baseline_grid.csv";
  std::string manifest;
};

int cmd_baseline_grid(const GridOpts& o, const std::vector<std::string>& argv) {
  LearnOpts lo;
  lo.qubits = o.qubits;
  lo.layers = o.layers;
  lo.k = o.k;
  lo.t_max = o.t_max;
  lo.c_targets = {o.c_target};
  lo.instances = o.instances;
  lo.seed = o.seed;
  const EvalConfig cfg = eval_config_from(lo);
  ActionGrid grid;
  if (o.grid == "table") {
    grid = ActionGrid::table(o.qubits);
  } else if (o.grid == "extended") {
    grid = ActionGrid::extended();
  } else {
    throw CLI::ValidationError("--grid", "expected table or extended");
  }
  RunManifest m = make_manifest("baseline-grid", argv, o.seed);
  m.config = {{"n_qubits", std::to_string(cfg.n_qubits)}, {"layers", std::to_string(cfg.layers)},
              {"k", std::to_string(cfg.k)},               {"t_max", std::to_string(cfg.t_max)},
              {"c_target", std::to_string(o.c_target)},   {"instances", std::to_string(cfg.n_states)},
              {"grid", o.grid}};
  auto out = open_out(o.out);
  out << "sigma,eta,mean_c_total,mean_infidelity,mean_t_h,halted_fraction,n\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Action a = grid.at(i);
    const EvalRow row = evaluate_fixed(a, cfg).rows.front();
    out << num(a.sigma) << ',' << num(a.eta) << ',' << num(row.mean_c_total) << ','
        << num(row.mean_infidelity) << ',' << num(row.mean_t_h) << ','
        << num(row.halted_fraction) << ',' << row.n << '\n';
    std::cerr << "sigma=" << a.sigma << " eta=" << a.eta << " mean_c_total=" << row.mean_c_total
              << " mean_infidelity=" << row.mean_infidelity << " halted=" << row.halted_fraction
              << "\n";
  }
  m.outputs.push_back(o.out);
  finish_manifest(m, manifest_path_for(o.manifest, o.out));
  return 0;
}

// -------------------------------------------------------------------- qst

struct QstOpts {
  int qubits = 1;
  std::vector<std::uint64_t> shots{10000};
  int instances = 20;
  std::uint64_t seed = 1;
  double alpha = 0.5;
  int max_iters = 5000;
  double tol = 1e-10;
  bool random_init = false;
  std::string out = "qst.csv";
  std::string manifest;
};

int cmd_qst(const QstOpts& o, const std::vector<std::string>& argv) {
  const PauliSettings settings = build_settings(o.qubits);
  RrhoROptions ropt;
  ropt.alpha = o.alpha;
  ropt.max_iters = o.max_iters;
  ropt.tol = o.tol;
  RunManifest m = make_manifest("qst", argv, o.seed);
  m.config = {{"n_qubits", std::to_string(o.qubits)}, {"instances", std::to_string(o.instances)},
              {"alpha", num(o.alpha)},                {"max_iters", std::to_string(o.max_iters)},
              {"tol", num(o.tol)},                    {"random_init", o.random_init ? "true" : "false"}};
  std::vector<QstRow> rows;
  for (const std::uint64_t n : o.shots) {
    const auto count = static_cast<std::size_t>(o.instances);
    std::vector<QstRow> batch(count);
    parallel_for(count, 0, [&](std::size_t i) {
      const StateVector psi = std::get<StateVector>(instance_state(o.qubits, 0.0, o.seed, i, "qst-state"));
      Rng rng(derive_subseed(o.seed, i, "qst-shots-" + std::to_string(n)));
      const FrequencyTable f = simulate_frequencies(DensityMatrix::from_pure(psi), settings, n, rng);
      const DensityMatrix init = o.random_init ? random_initial_state(o.qubits, rng)
                                               : DensityMatrix::maximally_mixed(o.qubits);
      const RrhoRResult r = rrhor_estimate(f, settings, init, ropt);
      batch[i] = {i, o.qubits, n, n * settings.size(), infidelity(r.rho, psi), r.iterations,
                  r.loglik};
    });
    rows.insert(rows.end(), batch.begin(), batch.end());
    double mean = 0.0;
    for (const auto& r : batch) mean += r.infidelity;
    std::cerr << "shots_per_setting=" << n << " mean_infidelity=" << mean / o.instances << "\n";
  }
  auto out = open_out(o.out);
  out << qst_csv_header() << '\n';
  for (const auto& r : rows) out << to_csv(r) << '\n';
  m.outputs.push_back(o.out);
  finish_manifest(m, manifest_path_for(o.manifest, o.out));
  return 0;
}

// ------------------------------------------------------------ fit-scaling

struct FitOpts {
  std::string in;
  std::string out;
};

int cmd_fit(const FitOpts& o) {
  std::vector<EvalRow> rows;
  if (o.in.size() >= 6 && o.in.substr(o.in.size() - 6) == ".jsonl") {
    const auto outcomes = read_outcomes_jsonl(o.in);
    rows = rows_from_outcomes(outcomes);
  } else if (o.in.size() >= 4 && o.in.substr(o.in.size() - 4) == ".csv") {
    std::ifstream probe(o.in);
    std::string header;
    std::getline(probe, header);
    if (header == qst_csv_header()) {
      // mean infidelity per shots_per_setting against total shots
      std::map<std::uint64_t, std::pair<double, int>> acc;
      std::map<std::uint64_t, std::uint64_t> totals;
      std::string line;
      while (std::getline(probe, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::vector<std::string> cells;
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        const auto n = std::stoull(cells.at(2));
        totals[n] = std::stoull(cells.at(3));
        acc[n].first += std::stod(cells.at(4));
        acc[n].second += 1;
      }
      for (const auto& [n, a] : acc) {
        rows.push_back({n, static_cast<double>(totals[n]), a.first / a.second, 0.0, 0.0, a.second});
      }
    } else {
      rows = read_eval_csv(o.in);
    }
  } else {
    throw CLI::ValidationError("--in", "expected a .jsonl outcome log or a .csv table");
  }
  const ScalingFit fit = fit_scaling(rows);
  std::cout << scaling_report(rows, fit);
  if (!o.out.empty()) {
    auto out = open_out(o.out);
    out << "alpha,beta,r_squared,n_points\n"
        << num(fit.alpha) << ',' << num(fit.beta) << ',' << num(fit.r_squared) << ','
        << fit.n_points << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-learned evolution strategies for quantum state learning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());
  const std::vector<std::string> args(argv, argv + argc);

  StateOpts so;
  auto* state = app.add_subcommand("state", "Generate or inspect state files");
  state->require_subcommand(1);
  auto* gen = state->add_subcommand("gen", "Write a state file");
  gen->add_option("kind", so.kind, "haar | shen-castan")->required();
  gen->add_option("--qubits", so.qubits, "Number of qubits (haar)")->check(CLI::Range(1, 12));
  gen->add_option("--seed", so.seed, "Master seed (haar)");
  gen->add_option("--mu", so.mu, "Depolarizing strength (haar)")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--out", so.out, "Output JSON")->required();
  auto* info = state->add_subcommand("info", "Print purity and single-qubit entropies");
  info->add_option("--in", so.in, "State JSON")->required()->check(CLI::ExistingFile);

  LearnOpts lo;
  auto* learn = app.add_subcommand("learn", "Learn states with a fixed action or a trained agent");
  learn->add_option("--qubits", lo.qubits)->check(CLI::Range(1, 12));
  learn->add_option("--layers", lo.layers, "HEA layers (default by qubit count)");
  learn->add_option("--k", lo.k, "Perturbations per step (default by qubit count)");
  learn->add_option("--t-max", lo.t_max, "Step limit (default by qubit count)");
  learn->add_option("--t-rep", lo.t_rep, "Action repetition time")->check(CLI::PositiveNumber);
  learn->add_option("--c-target,--c-targets", lo.c_targets, "Target success count(s)")
      ->delimiter(',');
  learn->add_option("--instances", lo.instances)->check(CLI::PositiveNumber);
  auto* act = learn->add_option("--action", lo.action, "Fixed sigma,eta");
  learn->add_option("--agent", lo.agent, "Agent checkpoint")->excludes(act)->check(CLI::ExistingFile);
  learn->add_flag("--greedy", lo.greedy, "Argmax actions instead of sampling");
  learn->add_option("--state", lo.state, "Learn this state file")->check(CLI::ExistingFile);
  learn->add_option("--mu", lo.mu, "Depolarize Haar targets")->check(CLI::Range(0.0, 1.0));
  learn->add_option("--seed", lo.seed);
  learn->add_flag("--shot-by-shot", lo.shot_by_shot, "Draw every measurement shot");
  learn->add_option("--out", lo.out, "Outcome JSONL");
  learn->add_option("--csv", lo.csv, "Per-c_target summary CSV");
  learn->add_option("--manifest", lo.manifest);

  TrainOpts to;
  auto* train = app.add_subcommand("train-agent", "Meta-train the actor-critic agent");
  train->add_option("--config", to.config, "Training config file")->check(CLI::ExistingFile);
  train->add_option("--qubits", to.qubits)->check(CLI::Range(1, 3));
  train->add_option("--episodes", to.episodes);
  train->add_option("--instances", to.instances, "Instances per episode");
  train->add_option("--seed", to.seed)->each([&](const std::string&) { to.seed_set = true; });
  train->add_option("--advantage-sign", to.advantage_sign, "standard | literal");
  train->add_option("--metrics", to.metrics, "Episode metrics JSONL");
  train->add_option("--outcomes", to.outcomes, "Outcome JSONL of every training rollout");
  train->add_option("--checkpoint", to.checkpoint, "Checkpoint JSON");
  train->add_option("--resume", to.resume, "Resume from checkpoint")->check(CLI::ExistingFile);
  train->add_flag("--save-buffers", to.save_buffers, "Write replay buffers next to the checkpoint");
  train->add_flag("--print-config", to.print_config, "Print the effective config and exit");
  train->add_option("--manifest", to.manifest);

  GridOpts go;
  auto* grid = app.add_subcommand("baseline-grid", "Evaluate every fixed action of a grid");
  grid->add_option("--qubits", go.qubits)->check(CLI::Range(1, 12));
  grid->add_option("--layers", go.layers);
  grid->add_option("--k", go.k);
  grid->add_option("--t-max", go.t_max);
  grid->add_option("--c-target", go.c_target);
  grid->add_option("--instances", go.instances)->check(CLI::PositiveNumber);
  grid->add_option("--seed", go.seed);
  grid->add_option("--grid", go.grid, "table | extended");
  grid->add_option("--out", go.out);
  grid->add_option("--manifest", go.manifest);

  QstOpts qo;
  auto* qst = app.add_subcommand("qst", "Pauli tomography with the RrhoR estimator");
  qst->add_option("--qubits", qo.qubits)->check(CLI::Range(1, 6));
  qst->add_option("--shots", qo.shots, "Shots per setting (list)")->delimiter(',');
  qst->add_option("--instances", qo.instances)->check(CLI::PositiveNumber);
  qst->add_option("--seed", qo.seed);
  qst->add_option("--alpha", qo.alpha)->check(CLI::Range(0.0, 0.999999));
  qst->add_option("--max-iters", qo.max_iters);
  qst->add_option("--tol", qo.tol);
  qst->add_flag("--random-init", qo.random_init);
  qst->add_option("--out", qo.out);
  qst->add_option("--manifest", qo.manifest);

  FitOpts fo;
  auto* fit = app.add_subcommand("fit-scaling", "Power-law fit of infidelity against total counts");
  fit->add_option("--in", fo.in, "Outcome JSONL, evaluation CSV or QST CSV")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--out", fo.out, "Fit CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) return cmd_state_gen(so);
    if (*info) return cmd_state_info(so);
    if (*learn) return cmd_learn(lo, args);
    if (*train) return cmd_train(to, args);
    if (*grid) return cmd_baseline_grid(go, args);
    if (*qst) return cmd_qst(qo, args);
    if (*fit) return cmd_fit(fo);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "qmeta: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
