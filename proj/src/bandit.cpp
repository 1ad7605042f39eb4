#include "cpceval/bandit.hpp"

#include "cpceval/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cpceval::bandit {

std::string to_string(Policy p) {
  switch (p) {
    case Policy::random_policy: return "random";
    case Policy::intuitive: return "intuitive";
    case Policy::greedy: return "greedy";
    case Policy::ucb: return "ucb";
  }
  return "?";
}

std::string to_string(AnswerMode m) {
  return m == AnswerMode::one_token ? "one_token" : "cot";
}

int ArmHistory::total_pulls() const {
  int n = 0;
  for (const auto& r : rewards) n += static_cast<int>(r.size());
  return n;
}

std::optional<double> ArmHistory::mean(int arm) const {
  const auto& r = rewards.at(arm);
  if (r.empty()) return std::nullopt;
  return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

double step(const BanditConfig& config, int arm, std::mt19937_64& rng) {
  if (arm < 0 || arm >= kNumArms) throw std::invalid_argument("step: bad arm index");
  if (config.arm_std == 0.0) return config.arm_means[arm];
  std::normal_distribution<double> dist(config.arm_means[arm], config.arm_std);
  return dist(rng);
}

namespace {

constexpr char kLabels[kNumArms] = {'A', 'B', 'C'};

std::string fmt2(double x) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << x;
  return os.str();
}

std::string rules_text(int variation) {
  switch (variation) {
    case 0:
      return "You are playing a slot machine game with three levers: A, B, and C. Each "
             "lever pays out a random amount each time it is pulled. Your goal is to "
             "earn as much as possible over the whole game.";
    case 1:
      return "This is a three-armed bandit game. Arms A, B, and C each give a noisy "
             "payout when chosen. Maximize your total payout across all turns.";
    default:
      return "Three levers (A, B, C) are in front of you. Pulling a lever yields a "
             "randomly varying reward. Collect the largest total reward you can by "
             "the end of the game.";
  }
}

std::string policy_text(Policy policy, int variation) {
  switch (policy) {
    case Policy::random_policy:
      switch (variation) {
        case 0: return "Choose uniformly at random from the available levers.";
        case 1: return "Pick one of the three arms completely at random each turn.";
        default: return "Select your lever randomly, giving each an equal chance.";
      }
    case Policy::intuitive:
      // The explicit exploration reminder is part of every phrasing.
      switch (variation) {
        case 0:
          return "Choose the best lever you can. Remember to try each lever at least "
                 "once before settling on one.";
        case 1:
          return "Use your judgement to pick the most promising arm. Make sure you try "
                 "each arm at least once.";
        default:
          return "Pick whichever lever seems best to you, but be sure to try every "
                 "lever at least once.";
      }
    case Policy::greedy:
      switch (variation) {
        case 0:
          return "Follow the greedy strategy: try each lever once, and thereafter "
                 "always choose the lever with the highest average return so far.";
        case 1:
          return "Strategy: first pull every arm once. After that, on each turn pick "
                 "the arm whose observed average payout is highest.";
        default:
          return "Play greedily: sample each lever one time, then always select the "
                 "lever whose mean observed reward is the largest.";
      }
    case Policy::ucb:
      switch (variation) {
        case 0:
          return "Follow the UCB (Upper Confidence Bound) algorithm. First try each "
                 "lever once. Then, on turn t, compute for each lever the score "
                 "mean_i + sqrt(2*ln(t)/n_i), where mean_i is the average observed "
                 "payout of lever i and n_i is the number of times it has been pulled. "
                 "Choose the lever with the highest score.";
        case 1:
          return "Use the UCB1 rule: after pulling every arm once, assign each arm the "
                 "value (its average reward) + sqrt(2*ln(t)/n), with t the current "
                 "turn number and n that arm's pull count, and pick the arm with the "
                 "largest value.";
        default:
          return "Apply Upper Confidence Bound selection. Pull each lever once to "
                 "start. Afterwards score every lever as average reward plus "
                 "sqrt(2*ln(t)/n) - t is the turn index, n the lever's pulls - and "
                 "choose the top-scoring lever.";
      }
  }
  return "";
}

}  // namespace

std::string render_prompt(const PromptState& state, const BanditConfig& config, int variation) {
  if (variation < 0 || variation > 2)
    throw std::invalid_argument("render_prompt: variation must be 0..2");
  std::ostringstream os;
  os << rules_text(variation) << "\n\n";
  os << "Turns so far:\n";
  for (int j = 0; j < kNumArms; ++j) {
    const auto& r = state.history.rewards[j];
    os << "  Lever " << kLabels[j] << ": pulled " << r.size() << " time"
       << (r.size() == 1 ? "" : "s");
    if (!r.empty()) os << ", average payout " << fmt2(*state.history.mean(j));
    os << "\n";
  }
  os << "Turns remaining: " << (config.horizon - state.turns_elapsed) << "\n\n";
  os << policy_text(config.policy, variation) << "\n\n";
  os << "Which lever do you pull this turn?";
  return os.str();
}

int reference_greedy(const ArmHistory& history) {
  for (int a = 0; a < kNumArms; ++a)
    if (history.rewards[a].empty()) return a;
  int best = 0;
  double best_mean = *history.mean(0);
  for (int a = 1; a < kNumArms; ++a) {
    const double m = *history.mean(a);
    if (m > best_mean) {
      best_mean = m;
      best = a;
    }
  }
  return best;
}

int reference_ucb(const ArmHistory& history, int t) {
  for (int a = 0; a < kNumArms; ++a)
    if (history.rewards[a].empty()) return a;
  int best = 0;
  double best_score = -1e300;
  for (int a = 0; a < kNumArms; ++a) {
    const double n = static_cast<double>(history.rewards[a].size());
    const double score = *history.mean(a) + std::sqrt(2.0 * std::log(static_cast<double>(t)) / n);
    if (score > best_score) {
      best_score = score;
      best = a;
    }
  }
  return best;
}

double BanditEpisode::accuracy() const {
  if (pulls.empty()) return 0.0;
  return static_cast<double>(best_arm_pulls) / static_cast<double>(pulls.size());
}

namespace {

int best_arm(const BanditConfig& config) {
  return static_cast<int>(std::distance(
      config.arm_means.begin(),
      std::max_element(config.arm_means.begin(), config.arm_means.end())));
}

void validate(const BanditConfig& config) {
  if (config.horizon < kNumArms) throw std::invalid_argument("horizon must be >= number of arms");
  if (config.arm_std < 0) throw std::invalid_argument("arm_std must be >= 0");
  std::array<double, kNumArms> m = config.arm_means;
  std::sort(m.begin(), m.end());
  if (std::adjacent_find(m.begin(), m.end()) != m.end())
    throw std::invalid_argument("arm means must be distinct");
}

}  // namespace

BanditEpisode run_episode(Policy policy, const BanditConfig& config, std::mt19937_64& rng) {
  validate(config);
  if (policy == Policy::intuitive)
    throw std::invalid_argument("no reference implementation for the intuitive policy");
  BanditEpisode ep;
  ep.config = config;
  ArmHistory history;
  const int target = best_arm(config);
  std::uniform_int_distribution<int> uniform_arm(0, kNumArms - 1);
  for (int t = 0; t < config.horizon; ++t) {
    int arm = 0;
    switch (policy) {
      case Policy::random_policy: arm = uniform_arm(rng); break;
      case Policy::greedy: arm = reference_greedy(history); break;
      case Policy::ucb: arm = reference_ucb(history, t + 1); break;
      default: break;
    }
    const double reward = step(config, arm, rng);
    history.rewards[arm].push_back(reward);
    ep.pulls.push_back(arm);
    ep.rewards.push_back(reward);
    if (arm == target) ++ep.best_arm_pulls;
  }
  return ep;
}

BanditEpisode run_episode(agents::AgentBackend& backend, const BanditConfig& config,
                          std::mt19937_64& rng, agents::RunLog* log) {
  validate(config);
  BanditEpisode ep;
  ep.config = config;
  if (config.shuffle_labels)
    std::shuffle(ep.label_perm.begin(), ep.label_perm.end(), rng);

  ArmHistory display_history;  // indexed by display label
  const int target = best_arm(config);
  std::uniform_int_distribution<int> uniform_arm(0, kNumArms - 1);
  std::uniform_int_distribution<int> pick_variation(0, 2);

  for (int t = 0; t < config.horizon; ++t) {
    PromptState state{display_history, t};
    const std::string prompt = render_prompt(state, config, pick_variation(rng));

    int display_choice = -1;
    try {
      std::string token;
      if (config.mode == AnswerMode::one_token) {
        token = agents::forced_choice(backend, prompt, {"A", "B", "C"}, {}, log).token;
      } else {
        agents::CotResult cot = agents::elicit_cot(backend, prompt, {}, log);
        token = agents::forced_choice(backend,
                                      prompt + "\n\n" + cot.text +
                                          "\n\nAnswer with the single letter of your choice.",
                                      {"A", "B", "C"}, {}, log)
                    .token;
      }
      display_choice = token[0] - 'A';
    } catch (const std::exception&) {
      // Malformed answer after fallback: substitute uniformly, keep count.
      ++ep.invalid_answers;
      display_choice = uniform_arm(rng);
    }

    const int arm = ep.label_perm[display_choice];
    const double reward = step(config, arm, rng);
    display_history.rewards[display_choice].push_back(reward);
    ep.pulls.push_back(arm);
    ep.rewards.push_back(reward);
    if (arm == target) ++ep.best_arm_pulls;
  }
  return ep;
}

std::vector<SweepRow> reference_sweep(Policy policy, const BanditConfig& base,
                                      const std::vector<double>& std_grid, int episodes,
                                      std::uint64_t seed) {
  std::vector<SweepRow> rows;
  for (double std_dev : std_grid) {
    BanditConfig config = base;
    config.arm_std = std_dev;
    double acc_sum = 0;
    for (int e = 0; e < episodes; ++e) {
      auto rng = substream(seed, "bandit-episode/" + to_string(policy) + "/" + fmt2(std_dev),
                           static_cast<std::uint64_t>(e));
      acc_sum += run_episode(policy, config, rng).accuracy();
    }
    SweepRow row;
    row.policy = to_string(policy);
    row.mode = "reference";
    row.model = "reference";
    row.arm_std = std_dev;
    row.episodes = episodes;
    row.mean_accuracy = acc_sum / episodes;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "policy,mode,model,std,episodes,mean_accuracy,mean_invalid\n";
  for (const auto& r : rows) {
    os << r.policy << ',' << r.mode << ',' << r.model << ',' << r.arm_std << ',' << r.episodes
       << ',' << r.mean_accuracy << ',' << r.mean_invalid << '\n';
  }
  return os.str();
}

}  // namespace cpceval::bandit
