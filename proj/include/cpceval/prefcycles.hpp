#pragma once

#include <array>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cpceval/agents.hpp"
#include "cpceval/problems.hpp"

namespace cpceval::prefcycles {

// Complete off-diagonal pairwise preferences over a 6-card set (a tournament).
struct PreferenceMatrix {
  problems::CardSet cards;
  // prefers[i][j] true iff card i preferred over card j; prefers[i][j] ==
  // !prefers[j][i] for i != j.
  std::array<std::array<bool, 6>, 6> prefers{};
  std::vector<std::string> prompts_used;
};

struct PrefDigraph {
  int n = 0;
  std::vector<std::vector<bool>> edge;  // edge[i][j]: i -> j (i preferred over j)
};

PrefDigraph to_digraph(const PreferenceMatrix& matrix);
PrefDigraph make_digraph(int n);
bool is_tournament(const PrefDigraph& g);
bool is_acyclic(const PrefDigraph& g);

// All simple directed cycles, each once, canonicalized with the minimal node
// first. Guarded at 12 nodes.
std::vector<std::vector<int>> enumerate_cycles(const PrefDigraph& g);

// Exact minimum feedback arc set via ordering DP over node subsets (cost =
// backward edges), ties broken by the lexicographically smallest optimal
// ordering. Guarded at 16 nodes; beyond that callers must use the greedy
// fallback and report it as heuristic.
std::vector<std::pair<int, int>> min_feedback_arc_set(const PrefDigraph& g);

// Heuristic fallback for large graphs (never reported as exact): repeatedly
// removes an edge from some remaining cycle.
std::vector<std::pair<int, int>> greedy_feedback_arc_set(const PrefDigraph& g);

enum class Polarity { positive, negative };  // positive asks "remove?", negative asks "keep?"

// Three phrasings x two polarities.
struct RemovalTemplates {
  std::array<std::string, 3> positive;  // contain "{cycle}" placeholder
  std::array<std::string, 3> negative;
};

RemovalTemplates default_removal_templates();

// Elicits the full matrix at temperature 0; each cell is a two-way forced
// choice between the two card names. Any missing cell aborts the matrix.
PreferenceMatrix elicit_matrix(const problems::CardSet& cards, agents::AgentBackend& backend,
                               const std::string& state_prompt,
                               agents::RunLog* log = nullptr);

// Presents the cycle's chain of stated preferences and asks whether to modify
// them. Returns true when the agent wants the cycle removed, normalized
// across polarity.
bool elicit_cycle_removal(const std::vector<int>& cycle, const PreferenceMatrix& matrix,
                          agents::AgentBackend& backend, int phrasing, Polarity polarity,
                          const RemovalTemplates& templates = default_removal_templates(),
                          agents::RunLog* log = nullptr);

struct CycleReport {
  PreferenceMatrix matrix;
  std::vector<std::vector<int>> cycles;
  std::vector<std::pair<int, int>> fas;
  // removal_decisions[cycle][phrasing * 2 + polarity] = remove?
  std::vector<std::array<bool, 6>> removal_decisions;
};

CycleReport analyze_matrix(const PreferenceMatrix& matrix, agents::AgentBackend& backend,
                           const RemovalTemplates& templates = default_removal_templates(),
                           agents::RunLog* log = nullptr);

// Per-pair correct counts for the four strict-dominance pairs, N samples each.
std::array<int, 4> validate_dominance(agents::AgentBackend& backend,
                                      const std::vector<problems::Card>& pool,
                                      const std::string& state_prompt, int samples = 100,
                                      agents::RunLog* log = nullptr);

struct CycleStats {
  double mean_cycles = 0;
  std::array<double, 6> removal_rate{};  // per prompt configuration
  int reports = 0;
  int cycles_total = 0;
};

CycleStats cycle_stats(const std::vector<CycleReport>& batch);

// Scripted preference agent: answers pairwise-choice prompts from a fixed
// card ranking, with optional directed-edge overrides (to script cycles) and
// optional per-pair noise; answers cycle-removal prompts from a fixed policy.
class ScriptedPreferenceAgent : public agents::AgentBackend {
 public:
  struct Options {
    std::vector<std::string> ranking;  // best first; must cover the pool
    // Directed overrides (winner, loser) taking precedence over the ranking.
    std::vector<std::pair<std::string, std::string>> overrides;
    // Pair flipped with `noise_rate` probability (unordered names).
    std::pair<std::string, std::string> noisy_pair;
    double noise_rate = 0.0;
    bool remove_cycles = true;  // removal policy
    std::uint64_t noise_seed = 0;
  };

  explicit ScriptedPreferenceAgent(Options opts);

  std::string model_name() const override { return "scripted-preference"; }
  std::string raw_complete(const std::vector<agents::ChatMessage>& messages,
                           const agents::DecodingParams& params) override;

 private:
  Options opts_;
  std::mt19937_64 noise_rng_;
};

// Prompt markers the scripted agent relies on; elicitation prompts embed them.
inline constexpr std::string_view kOptionOneMarker = "OPTION 1: ";
inline constexpr std::string_view kOptionTwoMarker = "OPTION 2: ";

}  // namespace cpceval::prefcycles
