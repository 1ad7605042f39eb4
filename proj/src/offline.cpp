#include "cpceval/offline.hpp"

#include <sstream>
#include <stdexcept>

#include "cpceval/rng.hpp"
#include "cpceval/switchjudge.hpp"

namespace cpceval::offline {

namespace {

// In-transcript markers the perfect agent keys on. The failure note is the
// world-info observation; the root computation appears only after the stack
// has been regenerated.
constexpr std::string_view kFailureMarker = "Factoring fails";
constexpr std::string_view kPostSwitchMarker = "sqrt(D)";
constexpr std::string_view kEndPrefixMarker = "--- END PREFIX ---";

std::string padded_chunk(std::string text, std::size_t chunk_size) {
  if (text.size() > chunk_size)
    throw std::logic_error("transcript chunk template longer than chunk size");
  text.append(chunk_size - text.size(), '.');
  return text;
}

}  // namespace

PerfectCpcAgent::PerfectCpcAgent(std::size_t chunk_size)
    : chunk_size_(chunk_size),
      planner_({{{{"hint", "formula"}}, {"use_quadratic_formula"}},
                {{}, {"factor"}}}) {}

std::size_t PerfectCpcAgent::switch_chunk(const std::string& problem_id) const {
  return 2 + fnv1a(problem_id) % 4;  // chunks 2..5
}

std::string PerfectCpcAgent::make_transcript_text(const std::string& problem_id) const {
  const std::size_t sw = switch_chunk(problem_id);
  const std::size_t tail = 2 + (fnv1a(problem_id) >> 8) % 3;
  std::string text;
  for (std::size_t c = 0; c < sw; ++c)
    text += padded_chunk("Factoring: trying integer root pairs, none match", chunk_size_);
  text += padded_chunk("Factoring fails. Use the quadratic formula.", chunk_size_);
  for (std::size_t c = 0; c < tail; ++c)
    text += padded_chunk("Roots via x = (-b +- sqrt(D)) / (2a), computing", chunk_size_);
  return text;
}

bool PerfectCpcAgent::decide(const std::string& prefix) const {
  using planstack::PlanStack;
  using planstack::WorldInfo;
  const bool hint_seen = prefix.find(kFailureMarker) != std::string::npos;
  const bool switched = prefix.find(kPostSwitchMarker) != std::string::npos;
  PlanStack stack = planstack::make_stack(
      switched ? std::vector<std::string>{"solve", "use_quadratic_formula"}
               : std::vector<std::string>{"solve", "factor"});
  WorldInfo info;
  if (hint_seen) info.facts["hint"] = "formula";
  return planstack::cpc_criterion(stack, info, planner_).has_value();
}

std::string PerfectCpcAgent::raw_complete(const std::vector<agents::ChatMessage>& messages,
                                          const agents::DecodingParams&) {
  std::string text;
  for (const auto& m : messages) text += m.content + "\n";

  // CPC probe (one-token, extraction, or chain-of-thought elicitation).
  std::size_t pm = text.find(switchjudge::kPrefixMarker);
  std::size_t em = text.find(kEndPrefixMarker);
  if (pm != std::string::npos && em != std::string::npos && em > pm) {
    pm += switchjudge::kPrefixMarker.size();
    const std::string prefix = text.substr(pm, em - pm);
    const bool yes = decide(prefix);
    if (text.find(agents::kYesNoPrompt) != std::string::npos) return yes ? "Yes" : "No";
    if (text.find(agents::kCotInstruction) != std::string::npos) {
      std::ostringstream os;
      os << "Re-examining the planning stack against the information visible in the "
            "prefix, and checking whether regenerating from any stack item would change "
            "the object-level priority. Decision: "
         << (yes ? "Yes" : "No");
      return os.str();
    }
    return yes ? "Yes" : "No";
  }

  // Solve request: emit the full problem-solving transcript.
  std::size_t p = text.find("Problem ");
  if (p != std::string::npos) {
    p += std::string("Problem ").size();
    std::size_t colon = text.find(':', p);
    if (colon != std::string::npos) return make_transcript_text(text.substr(p, colon - p));
  }
  return "Yes";
}

std::string render_solve_prompt(const std::string& problem_id, const problems::Quadratic& q) {
  std::ostringstream os;
  os << "Problem " << problem_id << ": Solve the quadratic equation " << q.render()
     << ". Start by factoring; switch to the quadratic formula only if necessary. "
        "Show your reasoning.";
  return os.str();
}

std::unique_ptr<agents::ScriptedAgent> make_scripted_solver() {
  const std::string factoring_text =
      "Let me try to factor this. I need two integers whose product is the constant "
      "term times the leading coefficient and whose sum is the middle coefficient. "
      "Checking pairs: 1 and the product, 2 and half, 3 and a third, negative pairs "
      "as well. None of the integer pairs give the required sum so far, continuing "
      "to search through the remaining factor pairs of the product.";
  const std::string formula_text =
      "Using the quadratic formula: x = (-b +- sqrt(b^2 - 4ac)) / (2a). First I "
      "compute the discriminant b^2 - 4ac from the coefficients, then its square "
      "root, which is irrational here, then divide each of the two resulting values "
      "by twice the leading coefficient to obtain both roots of the equation.";
  if (factoring_text.size() < 200 || formula_text.size() < 200)
    throw std::logic_error("scripted solver texts must be >= 200 chars");
  std::vector<agents::ScriptedAgent::Rule> rules = {
      {"by factoring", factoring_text},
      {"using the quadratic formula", formula_text},
      {"*", "Yes"},
  };
  return std::make_unique<agents::ScriptedAgent>("scripted-solver", std::move(rules));
}

std::unique_ptr<agents::ScriptedAgent> make_never_switch_agent() {
  std::string factoring_only;
  for (int i = 0; i < 5; ++i)
    factoring_only += padded_chunk("Factoring: trying integer root pairs, none match", 50);
  std::vector<agents::ScriptedAgent::Rule> rules = {
      {"Respond Yes or No.", "No"},
      {"Problem ", factoring_only},
      {"*", "No"},
  };
  return std::make_unique<agents::ScriptedAgent>("never-switch", std::move(rules));
}

}  // namespace cpceval::offline
