#pragma once

#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cpceval/agents.hpp"

namespace cpceval::bandit {

inline constexpr int kNumArms = 3;

enum class Policy { random_policy, intuitive, greedy, ucb };
enum class AnswerMode { one_token, cot };

std::string to_string(Policy p);
std::string to_string(AnswerMode m);

struct BanditConfig {
  std::array<double, kNumArms> arm_means{50.0, 100.0, 150.0};
  double arm_std = 10.0;  // difficulty knob
  int horizon = 25;
  Policy policy = Policy::greedy;
  AnswerMode mode = AnswerMode::one_token;
  bool shuffle_labels = true;  // display letters permuted per episode
};

// Per-arm reward history, internal (unshuffled) arm indexing.
struct ArmHistory {
  std::array<std::vector<double>, kNumArms> rewards;
  int total_pulls() const;
  std::optional<double> mean(int arm) const;
};

// One Gaussian payout.
double step(const BanditConfig& config, int arm, std::mt19937_64& rng);

struct PromptState {
  ArmHistory history;        // in display-label order
  int turns_elapsed = 0;
};

// Compressed single-message prompt: rules, per-arm summary, turns remaining,
// policy instruction block in one of three phrasing variations.
std::string render_prompt(const PromptState& state, const BanditConfig& config, int variation);

// Untried arm first (lowest index), then argmax of sample means, ties to the
// earliest index.
int reference_greedy(const ArmHistory& history);

// UCB1: untried arm first, then argmax of mean_i + sqrt(2*ln(t)/n_i),
// t = total pulls so far + 1.
int reference_ucb(const ArmHistory& history, int t);

struct BanditEpisode {
  BanditConfig config;
  std::vector<int> pulls;       // internal arm indices
  std::vector<double> rewards;  // rendered to 2 decimals in prompts
  std::array<int, kNumArms> label_perm{0, 1, 2};  // display label -> internal arm
  int best_arm_pulls = 0;
  int invalid_answers = 0;  // malformed agent answers substituted uniformly
  double accuracy() const;
};

// Reference-policy episode (random/greedy/ucb; intuitive has no reference).
BanditEpisode run_episode(Policy policy, const BanditConfig& config, std::mt19937_64& rng);

// LLM-driven episode: one-token forced choice over the display labels, or
// chain of thought followed by extraction.
BanditEpisode run_episode(agents::AgentBackend& backend, const BanditConfig& config,
                          std::mt19937_64& rng, agents::RunLog* log = nullptr);

struct SweepRow {
  std::string policy, mode, model;
  double arm_std = 0;
  int episodes = 0;
  double mean_accuracy = 0;
  double mean_invalid = 0;
};

// Reference-policy sweep over a std grid; per-episode rng substreams derive
// from the seed so results are exactly reproducible.
std::vector<SweepRow> reference_sweep(Policy policy, const BanditConfig& base,
                                      const std::vector<double>& std_grid, int episodes,
                                      std::uint64_t seed);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace cpceval::bandit
