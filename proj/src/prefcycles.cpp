#include "cpceval/prefcycles.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "cpceval/rng.hpp"

namespace cpceval::prefcycles {

PrefDigraph make_digraph(int n) {
  PrefDigraph g;
  g.n = n;
  g.edge.assign(n, std::vector<bool>(n, false));
  return g;
}

PrefDigraph to_digraph(const PreferenceMatrix& matrix) {
  PrefDigraph g = make_digraph(6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      if (i != j) g.edge[i][j] = matrix.prefers[i][j];
  return g;
}

bool is_tournament(const PrefDigraph& g) {
  for (int i = 0; i < g.n; ++i) {
    if (g.edge[i][i]) return false;
    for (int j = i + 1; j < g.n; ++j)
      if (g.edge[i][j] == g.edge[j][i]) return false;
  }
  return true;
}

bool is_acyclic(const PrefDigraph& g) {
  // Kahn peeling.
  std::vector<int> indeg(g.n, 0);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (g.edge[i][j]) ++indeg[j];
  std::vector<int> queue;
  for (int i = 0; i < g.n; ++i)
    if (indeg[i] == 0) queue.push_back(i);
  int seen = 0;
  while (!queue.empty()) {
    int u = queue.back();
    queue.pop_back();
    ++seen;
    for (int v = 0; v < g.n; ++v) {
      if (g.edge[u][v] && --indeg[v] == 0) queue.push_back(v);
    }
  }
  return seen == g.n;
}

namespace {

// DFS restricted to vertices >= start, so every cycle is emitted exactly once
// with its minimal vertex first (canonical rotation for free).
void cycle_dfs(const PrefDigraph& g, int start, int u, std::vector<int>& path,
               std::vector<bool>& on_path, std::vector<std::vector<int>>& out) {
  for (int v = start; v < g.n; ++v) {
    if (!g.edge[u][v]) continue;
    if (v == start) {
      if (path.size() >= 2) out.push_back(path);
    } else if (!on_path[v]) {
      path.push_back(v);
      on_path[v] = true;
      cycle_dfs(g, start, v, path, on_path, out);
      on_path[v] = false;
      path.pop_back();
    }
  }
}

}  // namespace

std::vector<std::vector<int>> enumerate_cycles(const PrefDigraph& g) {
  if (g.n > 12) throw std::invalid_argument("enumerate_cycles: node bound (12) exceeded");
  std::vector<std::vector<int>> out;
  std::vector<bool> on_path(g.n, false);
  for (int start = 0; start < g.n; ++start) {
    std::vector<int> path{start};
    on_path[start] = true;
    cycle_dfs(g, start, start, path, on_path, out);
    on_path[start] = false;
  }
  return out;
}

std::vector<std::pair<int, int>> min_feedback_arc_set(const PrefDigraph& g) {
  if (g.n > 16)
    throw std::invalid_argument(
        "min_feedback_arc_set: node bound (16) exceeded; use greedy_feedback_arc_set "
        "(heuristic, never exact)");
  const int n = g.n;
  if (n == 0) return {};
  const std::size_t full = (std::size_t{1} << n) - 1;

  // g_cost[mask] = cheapest number of backward edges achievable when the
  // nodes in `mask` are already placed (leftmost positions) and the rest are
  // still to be ordered. Placing v next makes every edge w->v with w
  // unplaced a backward edge.
  std::vector<int> g_cost(full + 1, 0);
  auto place_cost = [&](std::size_t mask, int v) {
    int c = 0;
    for (int w = 0; w < n; ++w) {
      if (w != v && !(mask >> w & 1) && g.edge[w][v]) ++c;
    }
    return c;
  };
  for (std::size_t mask = full; mask-- > 0;) {
    int best = INT32_MAX;
    for (int v = 0; v < n; ++v) {
      if (mask >> v & 1) continue;
      best = std::min(best, place_cost(mask, v) + g_cost[mask | (std::size_t{1} << v)]);
    }
    g_cost[mask] = best;
  }

  // Reconstruct the lexicographically smallest optimal ordering.
  std::vector<int> order;
  std::size_t mask = 0;
  while (mask != full) {
    for (int v = 0; v < n; ++v) {
      if (mask >> v & 1) continue;
      if (place_cost(mask, v) + g_cost[mask | (std::size_t{1} << v)] == g_cost[mask]) {
        order.push_back(v);
        mask |= std::size_t{1} << v;
        break;
      }
    }
  }

  std::vector<int> pos(n);
  for (int i = 0; i < n; ++i) pos[order[i]] = i;
  std::vector<std::pair<int, int>> fas;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (g.edge[u][v] && pos[u] > pos[v]) fas.emplace_back(u, v);
  return fas;
}

std::vector<std::pair<int, int>> greedy_feedback_arc_set(const PrefDigraph& g) {
  // Order nodes by out-degree minus in-degree; backward edges of any ordering
  // form a feedback arc set.
  std::vector<int> order(g.n);
  for (int i = 0; i < g.n; ++i) order[i] = i;
  std::vector<int> score(g.n, 0);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if (g.edge[i][j]) {
        ++score[i];
        --score[j];
      }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score[a] > score[b]; });
  std::vector<int> pos(g.n);
  for (int i = 0; i < g.n; ++i) pos[order[i]] = i;
  std::vector<std::pair<int, int>> fas;
  for (int u = 0; u < g.n; ++u)
    for (int v = 0; v < g.n; ++v)
      if (g.edge[u][v] && pos[u] > pos[v]) fas.emplace_back(u, v);
  return fas;
}

RemovalTemplates default_removal_templates() {
  RemovalTemplates t;
  t.positive = {
      "Earlier you stated the following chain of preferences: {cycle}. These preferences "
      "form a loop. Do you want to remove this preference cycle by revising one of these "
      "preferences?",
      "Your pairwise choices imply the circular preference {cycle}. Would you like to "
      "remove this preference cycle?",
      "The preferences you expressed contain the cycle {cycle}. Should your preferences "
      "be changed to remove this preference cycle?",
  };
  t.negative = {
      "Earlier you stated the following chain of preferences: {cycle}. These preferences "
      "form a loop. Do you want to keep this preference cycle exactly as it is?",
      "Your pairwise choices imply the circular preference {cycle}. Would you like to "
      "keep this preference cycle?",
      "The preferences you expressed contain the cycle {cycle}. Should your preferences "
      "be left alone to keep this preference cycle?",
  };
  return t;
}

PreferenceMatrix elicit_matrix(const problems::CardSet& cards, agents::AgentBackend& backend,
                               const std::string& state_prompt, agents::RunLog* log) {
  if (cards.cards.size() != 6) throw std::invalid_argument("elicit_matrix: need 6 cards");
  PreferenceMatrix matrix;
  matrix.cards = cards;
  agents::DecodingParams params;  // temperature 0
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) {
      const std::string& a = cards.cards[i].name;
      const std::string& b = cards.cards[j].name;
      std::ostringstream prompt;
      prompt << state_prompt << "\n\n"
             << "Which of these two cards would you rather have?\n"
             << kOptionOneMarker << a << "\n"
             << kOptionTwoMarker << b << "\n"
             << "Answer with the card name only.";
      auto fc = agents::forced_choice(backend, prompt.str(), {a, b}, params, log);
      matrix.prefers[i][j] = fc.token == a;
      matrix.prefers[j][i] = !matrix.prefers[i][j];
      matrix.prompts_used.push_back(prompt.str());
    }
  }
  return matrix;
}

namespace {

std::string cycle_text(const std::vector<int>& cycle, const PreferenceMatrix& matrix) {
  std::ostringstream os;
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    os << matrix.cards.cards[cycle[k]].name << " > ";
  }
  os << matrix.cards.cards[cycle[0]].name;
  return os.str();
}

std::string substitute(std::string tmpl, const std::string& value) {
  const std::string placeholder = "{cycle}";
  std::size_t p = tmpl.find(placeholder);
  if (p == std::string::npos)
    throw std::runtime_error("removal template missing {cycle} placeholder");
  tmpl.replace(p, placeholder.size(), value);
  return tmpl;
}

}  // namespace

bool elicit_cycle_removal(const std::vector<int>& cycle, const PreferenceMatrix& matrix,
                          agents::AgentBackend& backend, int phrasing, Polarity polarity,
                          const RemovalTemplates& templates, agents::RunLog* log) {
  if (phrasing < 0 || phrasing > 2)
    throw std::invalid_argument("elicit_cycle_removal: phrasing must be 0..2");
  const auto& tmpl = polarity == Polarity::positive ? templates.positive[phrasing]
                                                    : templates.negative[phrasing];
  const std::string prompt = substitute(tmpl, cycle_text(cycle, matrix));
  const bool yes = agents::extract_yes_no(backend, prompt, {}, log);
  // Normalize so true always means "remove the cycle".
  return polarity == Polarity::positive ? yes : !yes;
}

CycleReport analyze_matrix(const PreferenceMatrix& matrix, agents::AgentBackend& backend,
                           const RemovalTemplates& templates, agents::RunLog* log) {
  CycleReport report;
  report.matrix = matrix;
  PrefDigraph g = to_digraph(matrix);
  report.cycles = enumerate_cycles(g);
  report.fas = min_feedback_arc_set(g);
  for (const auto& cycle : report.cycles) {
    std::array<bool, 6> decisions{};
    for (int phrasing = 0; phrasing < 3; ++phrasing) {
      for (int pol = 0; pol < 2; ++pol) {
        decisions[phrasing * 2 + pol] = elicit_cycle_removal(
            cycle, matrix, backend, phrasing,
            pol == 0 ? Polarity::positive : Polarity::negative, templates, log);
      }
    }
    report.removal_decisions.push_back(decisions);
  }
  return report;
}

std::array<int, 4> validate_dominance(agents::AgentBackend& backend,
                                      const std::vector<problems::Card>& pool,
                                      const std::string& state_prompt, int samples,
                                      agents::RunLog* log) {
  auto pairs = problems::dominance_pairs(pool);
  std::array<int, 4> correct{};
  agents::DecodingParams params;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& [better, worse] = pairs[p];
    for (int s = 0; s < samples; ++s) {
      // Alternate presentation order so position bias cannot masquerade as
      // dominance knowledge.
      const std::string& first = (s % 2 == 0) ? better.name : worse.name;
      const std::string& second = (s % 2 == 0) ? worse.name : better.name;
      std::ostringstream prompt;
      prompt << state_prompt << "\n\n"
             << "Which of these two cards would you rather have?\n"
             << kOptionOneMarker << first << "\n"
             << kOptionTwoMarker << second << "\n"
             << "Answer with the card name only.";
      auto fc = agents::forced_choice(backend, prompt.str(), {first, second}, params, log);
      if (fc.token == better.name) ++correct[p];
    }
  }
  return correct;
}

CycleStats cycle_stats(const std::vector<CycleReport>& batch) {
  if (batch.empty()) throw std::invalid_argument("cycle_stats: empty batch");
  CycleStats stats;
  stats.reports = static_cast<int>(batch.size());
  std::array<int, 6> removed{};
  for (const auto& report : batch) {
    stats.cycles_total += static_cast<int>(report.cycles.size());
    for (const auto& decisions : report.removal_decisions) {
      for (int c = 0; c < 6; ++c)
        if (decisions[c]) ++removed[c];
    }
  }
  stats.mean_cycles = static_cast<double>(stats.cycles_total) / stats.reports;
  for (int c = 0; c < 6; ++c) {
    stats.removal_rate[c] =
        stats.cycles_total == 0 ? 0.0 : static_cast<double>(removed[c]) / stats.cycles_total;
  }
  return stats;
}

ScriptedPreferenceAgent::ScriptedPreferenceAgent(Options opts)
    : opts_(std::move(opts)), noise_rng_(substream(opts_.noise_seed, "preference-noise")) {
  if (opts_.ranking.empty())
    throw std::invalid_argument("ScriptedPreferenceAgent: empty ranking");
}

std::string ScriptedPreferenceAgent::raw_complete(
    const std::vector<agents::ChatMessage>& messages, const agents::DecodingParams&) {
  std::string text;
  for (const auto& m : messages) text += m.content + "\n";

  auto after = [&](std::string_view marker) -> std::optional<std::string> {
    std::size_t p = text.find(marker);
    if (p == std::string::npos) return std::nullopt;
    p += marker.size();
    std::size_t end = text.find('\n', p);
    return text.substr(p, end == std::string::npos ? std::string::npos : end - p);
  };

  if (auto a = after(kOptionOneMarker)) {
    auto b = after(kOptionTwoMarker);
    if (!b) throw std::runtime_error("scripted preference agent: OPTION 2 missing");
    for (const auto& [winner, loser] : opts_.overrides) {
      if ((*a == winner && *b == loser) || (*b == winner && *a == loser)) return winner;
    }
    auto rank = [&](const std::string& name) {
      auto it = std::find(opts_.ranking.begin(), opts_.ranking.end(), name);
      if (it == opts_.ranking.end())
        throw std::runtime_error("scripted preference agent: unranked card: " + name);
      return std::distance(opts_.ranking.begin(), it);
    };
    std::string better = rank(*a) < rank(*b) ? *a : *b;
    std::string other = better == *a ? *b : *a;
    const bool is_noisy_pair =
        (opts_.noisy_pair.first == *a && opts_.noisy_pair.second == *b) ||
        (opts_.noisy_pair.first == *b && opts_.noisy_pair.second == *a);
    if (is_noisy_pair && opts_.noise_rate > 0) {
      std::bernoulli_distribution flip(opts_.noise_rate);
      if (flip(noise_rng_)) return other;
    }
    return better;
  }

  if (text.find("remove this preference cycle") != std::string::npos)
    return opts_.remove_cycles ? "Yes" : "No";
  if (text.find("keep this preference cycle") != std::string::npos)
    return opts_.remove_cycles ? "No" : "Yes";
  return "Yes";
}

}  // namespace cpceval::prefcycles
