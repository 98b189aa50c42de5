#pragma once

// JSON checkpoints of the agent and training loop. Doubles are written in
// shortest round-trip form, so a reload is bit-exact.

#include <cstdint>
#include <filesystem>
#include <string>

#include "qmeta/agent.hpp"

namespace qmeta {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int version = kCheckpointVersion;
  long episode_T = 0;           // episodes completed
  int n_qubits = 1;
  int layers = 0;
  AgentConfig agent_config;
  Mlp actor;
  Mlp critic;
  AdamState actor_adam;
  AdamState critic_adam;
  std::string rng_state;        // training-loop generator
  double best_rolling_c_total = 0.0;  // 0 when no window has completed
  long best_episode = -1;
};

Checkpoint capture_checkpoint(const Agent& agent, long episode_T, int n_qubits, int layers,
                              const Rng& rng);
/// Agent with the checkpoint's networks and optimizer state; buffers empty.
Agent restore_agent(const Checkpoint& ckpt);

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Replay buffer sidecar, one JSON transition per line.
void save_buffer(const std::filesystem::path& path, const ReplayBuffer& buffer);
void load_buffer(const std::filesystem::path& path, ReplayBuffer& buffer);

std::string to_string(AdvantageSign sign);
AdvantageSign advantage_sign_from_string(const std::string& s);

}  // namespace qmeta
