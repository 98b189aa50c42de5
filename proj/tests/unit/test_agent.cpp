#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "qmeta/agent.hpp"

using namespace qmeta;

TEST(Observation, Encoding) {
  EXPECT_EQ(encode_observation(0, 10000), 0.0);
  EXPECT_EQ(encode_observation(10000, 10000), 1.0);
  EXPECT_EQ(encode_observation(20000, 10000), 1.0);
  // log10(101) / log10(10001)
  EXPECT_NEAR(encode_observation(100, 10000), 0.5010749033660213, 1e-15);
  EXPECT_THROW(encode_observation(0, 0), std::invalid_argument);
}

TEST(Ars, ScheduleExamples) {
  EXPECT_EQ(ars_schedule(0, 1, 50, 100), 50);
  EXPECT_EQ(ars_schedule(50, 1, 50, 100), 26);
  EXPECT_EQ(ars_schedule(100, 1, 50, 100), 1);
  EXPECT_EQ(ars_schedule(1000, 1, 50, 100), 1);
  EXPECT_EQ(ars_schedule(0, 300, 2000, 500), 2000);
  EXPECT_EQ(ars_schedule(500, 300, 2000, 500), 300);
}

TEST(Ars, MonotoneAndBounded) {
  const int rows[][3] = {{1, 50, 100}, {80, 800, 100}, {300, 2000, 500}, {1, 2, 1}};
  for (const auto& r : rows) {
    int prev = r[1];
    for (long T = 0; T <= 2000; ++T) {
      const int t = ars_schedule(T, r[0], r[1], r[2]);
      ASSERT_LE(t, prev);
      ASSERT_GE(t, r[0]);
      ASSERT_LE(t, r[1]);
      prev = t;
    }
  }
}

TEST(Ars, RejectsBadParameters) {
  EXPECT_THROW(ars_schedule(0, 5, 5, 100), std::invalid_argument);
  EXPECT_THROW(ars_schedule(0, 0, 5, 100), std::invalid_argument);
  EXPECT_THROW(ars_schedule(0, 1, 5, 0), std::invalid_argument);
  EXPECT_THROW(ars_schedule(-1, 1, 5, 10), std::invalid_argument);
}

TEST(EmpiricalValue, Examples) {
  EXPECT_EQ(empirical_value(100, 100, 3000), 0.0);
  EXPECT_NEAR(empirical_value(1, 100, 3000), -0.033, 1e-15);
  EXPECT_NEAR(empirical_value(1, 3000, 3000), -2999.0 / 3000.0, 1e-15);
  EXPECT_THROW(empirical_value(0, 10, 100), std::invalid_argument);
  EXPECT_THROW(empirical_value(11, 10, 100), std::invalid_argument);
  EXPECT_THROW(empirical_value(1, 101, 100), std::invalid_argument);
}

TEST(ActionGrid, TablesAndExtended) {
  const ActionGrid g1 = ActionGrid::table(1);
  EXPECT_EQ(g1.size(), 16u);
  EXPECT_EQ(g1.at(5).sigma, 0.1);
  EXPECT_EQ(g1.at(5).eta, 0.1);
  EXPECT_EQ(g1.at(6).eta, 0.01);
  EXPECT_EQ(g1.nearest(0.1, 0.01), 6u);
  const ActionGrid g3 = ActionGrid::table(3);
  EXPECT_EQ(g3.sigmas.front(), 0.1);
  EXPECT_EQ(g3.etas[1], 0.33);
  const ActionGrid ext = ActionGrid::extended();
  EXPECT_EQ(ext.size(), 169u);
  EXPECT_EQ(ext.sigmas.front(), 1.0);
  EXPECT_NEAR(ext.sigmas.back(), 1e-3, 1e-18);
  EXPECT_NEAR(ext.etas[1], std::pow(10.0, -0.25), 1e-16);
  EXPECT_THROW(g1.at(16), std::out_of_range);
}

TEST(Networks, ArchitectureAndSoftmax) {
  Rng rng(1);
  Mlp actor = make_actor(16);
  actor.init_uniform(rng);
  EXPECT_EQ(actor.dims(), (std::vector<int>{1, 50, 50, 50, 16}));
  EXPECT_EQ(make_critic().dims(), (std::vector<int>{1, 100, 100, 100, 1}));
  for (int i = 0; i < 10000; ++i) {
    const auto p = policy_forward(actor, rng.uniform(-5.0, 5.0));
    ASSERT_EQ(p.size(), 16u);
    double s = 0.0;
    for (double x : p) {
      ASSERT_GE(x, 0.0);
      s += x;
    }
    ASSERT_NEAR(s, 1.0, 1e-8);
  }
}

TEST(Networks, NearZeroWeightsGiveNearUniformPolicy) {
  Rng rng(2);
  Mlp actor = make_actor(16);
  actor.init_uniform(rng);
  actor.scale(1e-3);
  const auto p = policy_forward(actor, 0.7);
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  EXPECT_LT(*hi - *lo, 0.05);
}

TEST(Networks, CriticZeroWeightsAndDeterminism) {
  Mlp critic = make_critic();
  EXPECT_EQ(critic_forward(critic, 0.3), 0.0);
  Rng rng(3);
  critic.init_uniform(rng);
  EXPECT_EQ(critic_forward(critic, 0.3), critic_forward(critic, 0.3));
  EXPECT_THROW(critic_forward(critic, NAN), std::invalid_argument);
}

namespace {

std::vector<Transition> random_batch(Rng& rng, int n, int n_actions, int t_max) {
  std::vector<Transition> b;
  for (int i = 0; i < n; ++i) {
    Transition t;
    t.obs = rng.uniform();
    t.action_index = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n_actions)));
    t.t_h = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(t_max)));
    t.t = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(t.t_h)));
    t.decision = true;
    b.push_back(t);
  }
  return b;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

}  // namespace

TEST(Backprop, CriticLossMatchesCentralDifferences) {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    Mlp critic(std::vector<int>{1, 6, 5, 1});
    critic.init_uniform(rng);
    const auto batch = random_batch(rng, 7, 4, 50);
    MlpGrad g = critic.zero_grad();
    critic_loss(critic, batch, 50, &g);
    for (std::size_t i = 0; i < critic.param_count(); ++i) {
      const double w = critic.param(i);
      const double h = 1e-5;
      critic.param(i) = w + h;
      const double up = critic_loss(critic, batch, 50);
      critic.param(i) = w - h;
      const double down = critic_loss(critic, batch, 50);
      critic.param(i) = w;
      const double fd = (up - down) / (2 * h);
      ASSERT_LT(rel_err(fd, Mlp::grad_at(g, i)), 1e-4) << "param " << i;
    }
  }
}

TEST(Backprop, ActorObjectiveMatchesCentralDifferences) {
  Rng rng(5);
  for (auto sign : {AdvantageSign::standard, AdvantageSign::literal}) {
    Mlp actor(std::vector<int>{1, 5, 4, 4});
    Mlp critic(std::vector<int>{1, 6, 1});
    actor.init_uniform(rng);
    critic.init_uniform(rng);
    const auto batch = random_batch(rng, 9, 4, 30);
    MlpGrad g = actor.zero_grad();
    actor_objective(actor, critic, batch, 30, sign, &g);
    for (std::size_t i = 0; i < actor.param_count(); ++i) {
      const double w = actor.param(i);
      const double h = 1e-5;
      actor.param(i) = w + h;
      const double up = actor_objective(actor, critic, batch, 30, sign);
      actor.param(i) = w - h;
      const double down = actor_objective(actor, critic, batch, 30, sign);
      actor.param(i) = w;
      // the gradient is of the negated objective
      const double fd = -(up - down) / (2 * h);
      ASSERT_LT(rel_err(fd, Mlp::grad_at(g, i)), 1e-4) << "param " << i;
    }
  }
}

TEST(ActorCritic, ZeroAdvantageLeavesActorUnchanged) {
  Rng rng(6);
  Mlp actor = make_actor(4, 8, 2);
  actor.init_uniform(rng);
  Mlp critic(std::vector<int>{1, 3, 1});  // zero network: Q = 0 everywhere
  std::vector<Transition> batch(5);
  for (int i = 0; i < 5; ++i) {
    batch[i].obs = 0.2 * i;
    batch[i].action_index = i % 4;
    batch[i].t = batch[i].t_h = 10 + i;  // empirical value 0
    batch[i].decision = true;
  }
  const Mlp before = actor;
  AdamState aa(actor), ca(critic);
  const UpdateStats s = actor_critic_update(actor, critic, aa, ca, batch, 1e-3, 100,
                                            AdvantageSign::standard);
  EXPECT_TRUE(actor == before);
  EXPECT_EQ(s.critic_loss, 0.0);
  EXPECT_EQ(s.mean_abs_advantage, 0.0);
}

TEST(ActorCritic, PositiveAdvantageRaisesActionProbability) {
  Rng rng(7);
  Mlp actor = make_actor(4, 8, 2);
  actor.init_uniform(rng);
  Mlp critic(std::vector<int>{1, 3, 1});
  critic.biases().back()(0) = -0.5;  // Q = -0.5, below the empirical value
  Transition t;
  t.obs = 0.4;
  t.action_index = 2;
  t.t = 5;
  t.t_h = 10;  // empirical -0.05
  t.decision = true;
  const std::vector<Transition> batch{t};
  const double before = std::log(policy_forward(actor, t.obs)[2]);
  AdamState aa(actor), ca(critic);
  actor_critic_update(actor, critic, aa, ca, batch, 1e-4, 100, AdvantageSign::standard);
  EXPECT_GT(std::log(policy_forward(actor, t.obs)[2]), before);
}

TEST(ActorCritic, LiteralSignLowersIt) {
  Rng rng(7);
  Mlp actor = make_actor(4, 8, 2);
  actor.init_uniform(rng);
  Mlp critic(std::vector<int>{1, 3, 1});
  critic.biases().back()(0) = -0.5;
  Transition t;
  t.obs = 0.4;
  t.action_index = 2;
  t.t = 5;
  t.t_h = 10;
  t.decision = true;
  const std::vector<Transition> batch{t};
  const double before = std::log(policy_forward(actor, t.obs)[2]);
  AdamState aa(actor), ca(critic);
  actor_critic_update(actor, critic, aa, ca, batch, 1e-4, 100, AdvantageSign::literal);
  EXPECT_LT(std::log(policy_forward(actor, t.obs)[2]), before);
}

TEST(ActorCritic, NonDecisionStepsOnlyTrainTheCritic) {
  Rng rng(8);
  Mlp actor = make_actor(4, 8, 2);
  Mlp critic = make_critic(8, 2);
  actor.init_uniform(rng);
  critic.init_uniform(rng);
  auto batch = random_batch(rng, 6, 4, 40);
  for (auto& t : batch) t.decision = false;
  const Mlp before = actor;
  AdamState aa(actor), ca(critic);
  const UpdateStats s = actor_critic_update(actor, critic, aa, ca, batch, 1e-3, 40,
                                            AdvantageSign::standard);
  EXPECT_TRUE(actor == before);
  EXPECT_EQ(s.policy_batch, 0u);
  EXPECT_EQ(s.value_batch, 6u);
}

TEST(ActorCritic, EmptyBatchThrows) {
  Mlp actor = make_actor(4, 8, 2);
  Mlp critic = make_critic(8, 2);
  AdamState aa(actor), ca(critic);
  EXPECT_THROW(actor_critic_update(actor, critic, aa, ca, std::span<const Transition>{}, 1e-3, 10,
                                   AdvantageSign::standard),
               std::invalid_argument);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Rng rng(9);
  Mlp net(std::vector<int>{1, 4, 2});
  net.init_uniform(rng);
  const Mlp before = net;
  AdamState a(net);
  for (int i = 0; i < 3; ++i) a.step(net, net.zero_grad(), 0.1);
  EXPECT_TRUE(net == before);
  EXPECT_EQ(a.steps(), 3);
}

TEST(Adam, FirstStepMovesEachParameterByLr) {
  Mlp net(std::vector<int>{1, 1});
  AdamState a(net);
  MlpGrad g = net.zero_grad();
  g.weights[0](0, 0) = 3.0;
  g.biases[0](0) = -0.2;
  a.step(net, g, 0.01);
  // bias-corrected first step is lr * sign(g) up to epsilon
  EXPECT_NEAR(net.weights()[0](0, 0), -0.01, 1e-9);
  EXPECT_NEAR(net.biases()[0](0), 0.01, 1e-9);
}

TEST(ReplayBuffer, CapacityAndFifoEviction) {
  ReplayBuffer b(3);
  for (int i = 1; i <= 5; ++i) {
    Transition t;
    t.t = i;
    b.push(t);
    ASSERT_LE(b.size(), 3u);
  }
  EXPECT_EQ(b.items().front().t, 3);
  EXPECT_EQ(b.items().back().t, 5);
  EXPECT_THROW(ReplayBuffer(0), std::invalid_argument);
}

TEST(ReplayBuffer, SamplesWithoutReplacement) {
  ReplayBuffer b(1000);
  for (int i = 0; i < 300; ++i) {
    Transition t;
    t.t = i;
    b.push(t);
  }
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = b.sample(256, rng);
    ASSERT_EQ(s.size(), 256u);
    std::set<int> ids;
    for (const auto& t : s) ids.insert(t.t);
    ASSERT_EQ(ids.size(), 256u);
  }
  EXPECT_EQ(b.sample(1000, rng).size(), 300u);
}

TEST(ReplayBuffer, SamplingIsRoughlyUniform) {
  ReplayBuffer b(100);
  for (int i = 0; i < 10; ++i) {
    Transition t;
    t.t = i;
    b.push(t);
  }
  Rng rng(11);
  std::vector<int> hits(10, 0);
  const int trials = 20000;
  for (int k = 0; k < trials; ++k) {
    for (const auto& t : b.sample(3, rng)) ++hits[t.t];
  }
  for (int h : hits) EXPECT_NEAR(h / static_cast<double>(trials), 0.3, 0.02);
}

namespace {

std::vector<Problem> problems(int n, std::uint64_t seed) {
  std::vector<Problem> ps;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    ps.push_back({haar_random_state(1, rng), derive_subseed(seed, i, "es"),
                  derive_subseed(seed, i, "policy")});
  }
  return ps;
}

}  // namespace

TEST(Rollouts, BufferGrowsBySumOfHaltingTimes) {
  AgentConfig cfg;
  Rng init(12);
  Agent agent(cfg, init);
  EsConfig es = EsConfig::for_qubits(1);
  es.c_target = 30;
  es.t_max = 300;
  const auto ps = problems(6, 3);
  const auto out = collect_rollouts(agent, ps, HeaSpec::for_qubits(1, 0), es, 4, false, 2);
  std::size_t total = 0;
  std::size_t decisions = 0;
  for (const auto& o : out) {
    total += static_cast<std::size_t>(o.t_h);
    for (const auto& t : o.transitions) decisions += t.decision;
  }
  EXPECT_EQ(agent.buffer().size(), total);
  EXPECT_EQ(agent.decision_buffer().size(), decisions);
}

TEST(Rollouts, GreedyRunsAreReproducibleAndThreadIndependent) {
  AgentConfig cfg;
  Rng init(13);
  Agent a(cfg, init);
  Agent b = a;
  EsConfig es = EsConfig::for_qubits(1);
  es.c_target = 50;
  es.t_max = 200;
  const auto ps = problems(5, 4);
  const auto x = collect_rollouts(a, ps, HeaSpec::for_qubits(1, 0), es, 1, true, 1);
  const auto y = collect_rollouts(b, ps, HeaSpec::for_qubits(1, 0), es, 1, true, 3);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    ASSERT_EQ(x[i].transitions.size(), y[i].transitions.size());
    for (std::size_t j = 0; j < x[i].transitions.size(); ++j) {
      ASSERT_EQ(x[i].transitions[j].action_index, y[i].transitions[j].action_index);
    }
    EXPECT_EQ(x[i].c_total, y[i].c_total);
  }
}

TEST(Agent, UpdateChangesNetworksAfterRollouts) {
  AgentConfig cfg;
  cfg.lr = 1e-3;
  Rng init(14);
  Agent agent(cfg, init);
  EsConfig es = EsConfig::for_qubits(1);
  es.c_target = 30;
  es.t_max = 100;
  collect_rollouts(agent, problems(4, 5), HeaSpec::for_qubits(1, 0), es, 1);
  const Mlp critic_before = agent.critic();
  Rng rng(15);
  agent.update(rng, es.t_max);
  EXPECT_FALSE(agent.critic() == critic_before);
  EXPECT_EQ(agent.critic_adam().steps(), 1);
}

TEST(PolicyTable, MatchesPerObservationForwardPasses) {
  Rng init(21);
  Agent agent(AgentConfig{}, init);
  const std::uint64_t c_target = 300;
  const PolicyTable table(agent, c_target);
  for (std::uint64_t c = 0; c <= c_target; ++c) {
    const auto direct = agent.policy(encode_observation(c, c_target));
    const auto cached = table.probs(c);
    ASSERT_EQ(cached.size(), direct.size());
    for (std::size_t a = 0; a < direct.size(); ++a) ASSERT_NEAR(cached[a], direct[a], 1e-12);
  }
  EXPECT_EQ(table.probs(c_target + 50).data(), table.probs(c_target).data());

  AgentPolicy plain(agent, c_target, 99);
  AgentPolicy tabled(agent, c_target, 99, false, &table);
  Rng counts(5);
  for (int i = 0; i < 1000; ++i) {
    const auto c = counts.uniform_index(c_target + 1);
    ASSERT_EQ(plain.select(c).grid_index, tabled.select(c).grid_index);
  }
}
