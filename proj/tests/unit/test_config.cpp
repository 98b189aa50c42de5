#include <gtest/gtest.h>

#include "qmeta/config.hpp"

using namespace qmeta;

TEST(Config, RoundTripOfDefaultsAndEdits) {
  for (int n = 1; n <= 3; ++n) {
    TrainingConfig c = TrainingConfig::for_qubits(n);
    EXPECT_EQ(training_config_from_text(to_config_text(c)), c);
  }
  TrainingConfig c = TrainingConfig::for_qubits(2);
  c.grid = ActionGrid::extended();
  c.lr = 0.1 + 0.2;  // not exactly representable in short form
  c.advantage_sign = AdvantageSign::literal;
  c.seed = 18446744073709551615ull;
  const TrainingConfig back = training_config_from_text(to_config_text(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(to_config_text(back), to_config_text(c));
}

TEST(Config, QubitCountSelectsDefaults) {
  const TrainingConfig c = training_config_from_text("[circuit]\nn_qubits = 3\n");
  EXPECT_EQ(c.layers, 5);
  EXPECT_EQ(c.k, 30);
  EXPECT_EQ(c.t_u, 2000);
}

TEST(Config, CommentsAndWhitespace) {
  const TrainingConfig c = training_config_from_text(
      "# training run\n\n[training]\n  episodes = 12   # short\nseed=9\n[actions]\nsigmas = 1, 0.5\n");
  EXPECT_EQ(c.episodes, 12);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.grid.sigmas, (std::vector<double>{1.0, 0.5}));
}

TEST(Config, UnknownKeysAreErrors) {
  EXPECT_THROW(training_config_from_text("[training]\nepisode = 3\n"), std::invalid_argument);
  EXPECT_THROW(training_config_from_text("[es]\nn_qubits = 1\n"), std::invalid_argument);
  EXPECT_THROW(training_config_from_text("episodes = 3\n"), std::invalid_argument);
}

TEST(Config, MalformedInputIsAnError) {
  EXPECT_THROW(training_config_from_text("[training\n"), std::invalid_argument);
  EXPECT_THROW(training_config_from_text("[training]\nepisodes\n"), std::invalid_argument);
  EXPECT_THROW(training_config_from_text("[training]\nepisodes = ten\n"), std::invalid_argument);
  EXPECT_THROW(training_config_from_text("[training]\nepisodes = 1\nepisodes = 2\n"),
               std::invalid_argument);
  EXPECT_THROW(training_config_from_text("[training]\nseed = -4\n"), std::invalid_argument);
  EXPECT_THROW(training_config_from_text("[training]\nadvantage_sign = flipped\n"),
               std::invalid_argument);
  EXPECT_THROW(training_config_from_text("[ars]\nt_l = 60\n"), std::invalid_argument);
}
