#include "cpceval/switchjudge.hpp"

#include <sstream>
#include <stdexcept>

namespace cpceval::switchjudge {

std::vector<std::string> chunk(std::string_view text, std::size_t chunk_size) {
  if (chunk_size < 1) throw std::invalid_argument("chunk_size must be >= 1");
  std::vector<std::string> prefixes;
  for (std::size_t len = chunk_size; len < text.size(); len += chunk_size)
    prefixes.emplace_back(text.substr(0, len));
  if (!text.empty()) prefixes.emplace_back(text);
  return prefixes;
}

Transcript make_transcript(std::string problem_id, std::string agent_id, std::string text,
                           std::size_t chunk_size) {
  Transcript t;
  t.problem_id = std::move(problem_id);
  t.agent_id = std::move(agent_id);
  t.text = std::move(text);
  t.chunk_size = chunk_size;
  for (std::size_t len = chunk_size; len < t.text.size(); len += chunk_size)
    t.prefix_boundaries.push_back(len);
  if (!t.text.empty()) t.prefix_boundaries.push_back(t.text.size());
  return t;
}

SwitchJudgement monotone_correct(const std::vector<bool>& raw, std::mt19937_64& rng) {
  if (raw.empty()) throw std::invalid_argument("monotone_correct: empty judgement series");
  const std::size_t n = raw.size();

  // Candidate monotone sequences are F^k T^(n-k), k = 0..n.
  // dist(k) = trues before k + falses at/after k.
  std::vector<int> trues_before(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i)
    trues_before[i + 1] = trues_before[i] + (raw[i] ? 1 : 0);
  const int total_trues = trues_before[n];

  int best = static_cast<int>(n) + 1;
  std::vector<std::size_t> argmins;
  for (std::size_t k = 0; k <= n; ++k) {
    const int falses_after = static_cast<int>(n - k) - (total_trues - trues_before[k]);
    const int dist = trues_before[k] + falses_after;
    if (dist < best) {
      best = dist;
      argmins.assign(1, k);
    } else if (dist == best) {
      argmins.push_back(k);
    }
  }

  std::size_t k = argmins.front();
  if (argmins.size() > 1) {
    std::uniform_int_distribution<std::size_t> pick(0, argmins.size() - 1);
    k = argmins[pick(rng)];
  }

  SwitchJudgement out;
  out.raw = raw;
  out.corrected.assign(n, false);
  for (std::size_t i = k; i < n; ++i) out.corrected[i] = true;
  out.edits = best;
  out.tie_broken = argmins.size() > 1;
  return out;
}

std::optional<std::size_t> switch_index(const SwitchJudgement& judgement) {
  for (std::size_t i = 0; i < judgement.corrected.size(); ++i)
    if (judgement.corrected[i]) return i;
  return std::nullopt;
}

std::string render_judge_prompt(std::string_view prefix, std::string_view full_text) {
  std::ostringstream os;
  os << "You are judging a math problem-solving transcript. The solver was told to "
        "start by factoring the quadratic and to switch to the quadratic formula only "
        "if factoring fails. Below is the complete transcript, followed by a prefix of "
        "it. Considering only what has happened within the prefix, has the solver "
        "already switched from factoring to using the quadratic formula at this point? "
        "A switch means the solver has abandoned factoring and begun applying the "
        "quadratic formula.\n\n"
     << "--- FULL TRANSCRIPT ---\n"
     << full_text << "\n"
     << kPrefixMarker << "\n"
     << prefix;
  return os.str();
}

bool judge_switch(const std::string& prefix, const std::string& full_text,
                  agents::AgentBackend& judge, const agents::DecodingParams& params,
                  agents::RunLog* log) {
  if (full_text.compare(0, prefix.size(), prefix) != 0)
    throw std::invalid_argument("judge_switch: prefix is not a prefix of full_text");
  return agents::extract_yes_no(judge, render_judge_prompt(prefix, full_text), params, log);
}

std::unique_ptr<agents::ScriptedAgent> make_scripted_judge() {
  std::vector<agents::ScriptedAgent::Rule> rules = {
      {"quadratic formula", "Yes"},
      {"*", "No"},
  };
  return std::make_unique<agents::ScriptedAgent>("scripted-judge", std::move(rules),
                                                 std::string(kPrefixMarker));
}

SyntheticSet make_synthetic_validation_set(const std::vector<problems::Quadratic>& problems,
                                           agents::AgentBackend& backend,
                                           const agents::DecodingParams& params,
                                           agents::RunLog* log) {
  SyntheticSet set;
  int index = 0;
  for (const auto& q : problems) {
    const std::string eq = q.render();
    std::string factoring = agents::complete(
        backend, {{"user", "Solve the quadratic equation " + eq + " by factoring. Show your work."}},
        params, log);
    std::string formula = agents::complete(
        backend,
        {{"user", "Solve the quadratic equation " + eq +
                      " using the quadratic formula. Show your work."}},
        params, log);
    ++index;
    if (factoring.size() < 200 || formula.size() < 200) {
      ++set.skipped;
      continue;
    }
    SyntheticItem item;
    item.problem_id = "synthetic-" + std::to_string(index);
    item.text = factoring.substr(0, 200) + formula.substr(0, 200);
    item.labels = {false, false, false, false, true, true, true, true};
    set.items.push_back(std::move(item));
  }
  return set;
}

PositionAccuracy score_judge(const SyntheticSet& set, agents::AgentBackend& judge,
                             const agents::DecodingParams& params, agents::RunLog* log) {
  PositionAccuracy acc;
  for (const auto& item : set.items) {
    auto prefixes = chunk(item.text, kDefaultChunkSize);
    if (acc.total.size() < prefixes.size()) {
      acc.total.resize(prefixes.size(), 0);
      acc.correct.resize(prefixes.size(), 0);
    }
    for (std::size_t i = 0; i < prefixes.size(); ++i) {
      const bool verdict = judge_switch(prefixes[i], item.text, judge, params, log);
      ++acc.total[i];
      if (verdict == item.labels.at(i)) ++acc.correct[i];
    }
  }
  return acc;
}

}  // namespace cpceval::switchjudge
