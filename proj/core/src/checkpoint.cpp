#include "qmeta/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qmeta {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json matrix_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void read_matrix(const json& j, Eigen::MatrixXd& m) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != m.rows()) {
    throw std::runtime_error("checkpoint: weight matrix shape mismatch");
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != m.cols()) {
      throw std::runtime_error("checkpoint: weight matrix shape mismatch");
    }
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
}

void read_vector(const json& j, Eigen::VectorXd& v) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != v.size()) {
    throw std::runtime_error("checkpoint: bias vector shape mismatch");
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
}

ordered_json grad_json(const MlpGrad& g) {
  ordered_json w = ordered_json::array();
  ordered_json b = ordered_json::array();
  for (const auto& m : g.weights) w.push_back(matrix_json(m));
  for (const auto& v : g.biases) b.push_back(vector_json(v));
  return {{"weights", w}, {"biases", b}};
}

void read_grad(const json& j, MlpGrad& g) {
  const auto& w = j.at("weights");
  const auto& b = j.at("biases");
  if (w.size() != g.weights.size() || b.size() != g.biases.size()) {
    throw std::runtime_error("checkpoint: optimizer moment layer count mismatch");
  }
  for (std::size_t l = 0; l < g.weights.size(); ++l) {
    read_matrix(w[l], g.weights[l]);
    read_vector(b[l], g.biases[l]);
  }
}

ordered_json mlp_json(const Mlp& net) {
  ordered_json w = ordered_json::array();
  ordered_json b = ordered_json::array();
  for (const auto& m : net.weights()) w.push_back(matrix_json(m));
  for (const auto& v : net.biases()) b.push_back(vector_json(v));
  return {{"dims", net.dims()}, {"weights", w}, {"biases", b}};
}

Mlp read_mlp(const json& j) {
  Mlp net(j.at("dims").get<std::vector<int>>());
  const auto& w = j.at("weights");
  const auto& b = j.at("biases");
  if (w.size() != net.n_layers() || b.size() != net.n_layers()) {
    throw std::runtime_error("checkpoint: network layer count mismatch");
  }
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    read_matrix(w[l], net.weights()[l]);
    read_vector(b[l], net.biases()[l]);
  }
  return net;
}

ordered_json adam_json(const AdamState& a) {
  return {{"steps", a.steps()},
          {"beta1", a.options().beta1},
          {"beta2", a.options().beta2},
          {"epsilon", a.options().epsilon},
          {"first_moment", grad_json(a.first_moment())},
          {"second_moment", grad_json(a.second_moment())}};
}

AdamState read_adam(const json& j, const Mlp& net) {
  AdamOptions opts;
  opts.beta1 = j.at("beta1").get<double>();
  opts.beta2 = j.at("beta2").get<double>();
  opts.epsilon = j.at("epsilon").get<double>();
  AdamState a(net, opts);
  read_grad(j.at("first_moment"), a.first_moment());
  read_grad(j.at("second_moment"), a.second_moment());
  a.set_steps(j.at("steps").get<long>());
  return a;
}

ordered_json transition_json(const Transition& t) {
  return {{"obs", t.obs},           {"obs_count", t.obs_count}, {"action_index", t.action_index},
          {"reward", t.reward},     {"next_obs", t.next_obs},   {"next_obs_count", t.next_obs_count},
          {"done", t.done},         {"decision", t.decision},   {"t", t.t},
          {"t_h", t.t_h}};
}

Transition read_transition(const json& j) {
  Transition t;
  t.obs = j.at("obs").get<double>();
  t.obs_count = j.at("obs_count").get<std::uint64_t>();
  t.action_index = j.at("action_index").get<int>();
  t.reward = j.at("reward").get<double>();
  t.next_obs = j.at("next_obs").get<double>();
  t.next_obs_count = j.at("next_obs_count").get<std::uint64_t>();
  t.done = j.at("done").get<bool>();
  t.decision = j.at("decision").get<bool>();
  t.t = j.at("t").get<int>();
  t.t_h = j.at("t_h").get<int>();
  return t;
}

}  // namespace

std::string to_string(AdvantageSign sign) {
  return sign == AdvantageSign::standard ? "standard" : "literal";
}

AdvantageSign advantage_sign_from_string(const std::string& s) {
  if (s == "standard") return AdvantageSign::standard;
  if (s == "literal") return AdvantageSign::literal;
  throw std::invalid_argument("advantage sign must be 'standard' or 'literal', got '" + s + "'");
}

Checkpoint capture_checkpoint(const Agent& agent, long episode_T, int n_qubits, int layers,
                              const Rng& rng) {
  Checkpoint c;
  c.episode_T = episode_T;
  c.n_qubits = n_qubits;
  c.layers = layers;
  c.agent_config = agent.config();
  c.actor = agent.actor();
  c.critic = agent.critic();
  c.actor_adam = agent.actor_adam();
  c.critic_adam = agent.critic_adam();
  c.rng_state = rng.state();
  return c;
}

Agent restore_agent(const Checkpoint& ckpt) {
  Agent agent(ckpt.agent_config);
  if (agent.actor().dims() != ckpt.actor.dims() || agent.critic().dims() != ckpt.critic.dims()) {
    throw std::runtime_error("checkpoint networks do not match the agent configuration");
  }
  agent.actor() = ckpt.actor;
  agent.critic() = ckpt.critic;
  agent.actor_adam() = ckpt.actor_adam;
  agent.critic_adam() = ckpt.critic_adam;
  return agent;
}

std::string checkpoint_to_json(const Checkpoint& c) {
  const auto& cfg = c.agent_config;
  ordered_json j;
  j["version"] = c.version;
  j["episode_T"] = c.episode_T;
  j["n_qubits"] = c.n_qubits;
  j["layers"] = c.layers;
  j["grid"] = {{"sigmas", cfg.grid.sigmas}, {"etas", cfg.grid.etas}};
  j["agent"] = {{"actor_hidden", cfg.actor_hidden},
                {"critic_hidden", cfg.critic_hidden},
                {"hidden_layers", cfg.hidden_layers},
                {"lr", cfg.lr},
                {"advantage_sign", to_string(cfg.advantage_sign)},
                {"buffer_capacity", cfg.buffer_capacity},
                {"batch_size", cfg.batch_size}};
  j["actor"] = mlp_json(c.actor);
  j["critic"] = mlp_json(c.critic);
  j["adam"] = {{"actor", adam_json(c.actor_adam)}, {"critic", adam_json(c.critic_adam)}};
  j["rng_state"] = c.rng_state;
  j["best_rolling_c_total"] = c.best_rolling_c_total;
  j["best_episode"] = c.best_episode;
  return j.dump();
}

Checkpoint checkpoint_from_json(const std::string& text) {
  const json j = json::parse(text);
  Checkpoint c;
  c.version = j.at("version").get<int>();
  if (c.version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(c.version));
  }
  c.episode_T = j.at("episode_T").get<long>();
  c.n_qubits = j.at("n_qubits").get<int>();
  c.layers = j.at("layers").get<int>();
  auto& cfg = c.agent_config;
  cfg.grid.sigmas = j.at("grid").at("sigmas").get<std::vector<double>>();
  cfg.grid.etas = j.at("grid").at("etas").get<std::vector<double>>();
  cfg.grid.validate();
  const auto& a = j.at("agent");
  cfg.actor_hidden = a.at("actor_hidden").get<int>();
  cfg.critic_hidden = a.at("critic_hidden").get<int>();
  cfg.hidden_layers = a.at("hidden_layers").get<int>();
  cfg.lr = a.at("lr").get<double>();
  cfg.advantage_sign = advantage_sign_from_string(a.at("advantage_sign").get<std::string>());
  cfg.buffer_capacity = a.at("buffer_capacity").get<std::size_t>();
  cfg.batch_size = a.at("batch_size").get<std::size_t>();
  c.actor = read_mlp(j.at("actor"));
  c.critic = read_mlp(j.at("critic"));
  if (static_cast<std::size_t>(c.actor.output_dim()) != cfg.grid.size()) {
    throw std::runtime_error("checkpoint actor output does not match the action grid");
  }
  c.actor_adam = read_adam(j.at("adam").at("actor"), c.actor);
  c.critic_adam = read_adam(j.at("adam").at("critic"), c.critic);
  c.rng_state = j.at("rng_state").get<std::string>();
  c.best_rolling_c_total = j.at("best_rolling_c_total").get<double>();
  c.best_episode = j.at("best_episode").get<long>();
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    out << checkpoint_to_json(ckpt) << '\n';
    if (!out) throw std::runtime_error("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

void save_buffer(const std::filesystem::path& path, const ReplayBuffer& buffer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write buffer " + path.string());
  for (const auto& t : buffer.items()) out << transition_json(t).dump() << '\n';
}

void load_buffer(const std::filesystem::path& path, ReplayBuffer& buffer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read buffer " + path.string());
  buffer.clear();
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) buffer.push(read_transition(json::parse(line)));
  }
}

}  // namespace qmeta
