#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpceval::planstack {

struct Goal {
  std::string id;  // non-empty
  int level = 0;   // equals position in its containing stack
  bool operator==(const Goal&) const = default;
};

// Ordered highest-level strategy (index 0) down to the current
// object-level priority (back()).
using PlanStack = std::vector<Goal>;

struct WorldInfo {
  std::map<std::string, std::string> facts;
  bool operator==(const WorldInfo&) const = default;
};

// Deterministic static planner: completes a goal prefix into a full stack.
// Output must extend the given prefix.
using StaticPlanner = std::function<PlanStack(const WorldInfo&, const PlanStack& prefix)>;

// Builds a stack from ids, assigning levels by position.
PlanStack make_stack(const std::vector<std::string>& ids);

// Renumbers levels to positions. Invariant repair after concatenation.
void relevel(PlanStack& stack);

// Smallest i in [1, len(stack)] such that regenerating from prefix
// stack[:i] yields a different final object-level priority than
// stack.back(); absent when no such i exists.
std::optional<std::size_t> cpc_criterion(const PlanStack& stack, const WorldInfo& info,
                                         const StaticPlanner& planner);

enum class ReplanMode {
  repaired,  // regenerate below the first unstable index (default)
  verbatim,  // the published pseudocode executed literally
};

PlanStack dynamic_replan(const PlanStack& stack, const WorldInfo& info,
                         const StaticPlanner& planner,
                         ReplanMode mode = ReplanMode::repaired);

// Declarative scripted planner: the first rule whose `require` entries all
// match the world info supplies a goal suffix. The planner treats a stack
// already ending with that suffix as complete; otherwise it appends the
// suffix. The final rule must be a catch-all (empty require).
struct PlannerRule {
  std::map<std::string, std::string> require;
  std::vector<std::string> suffix;  // non-empty goal ids
};

class RulePlanner {
 public:
  explicit RulePlanner(std::vector<PlannerRule> rules);

  PlanStack operator()(const WorldInfo& info, const PlanStack& prefix) const;
  const std::vector<PlannerRule>& rules() const { return rules_; }

 private:
  const PlannerRule& match(const WorldInfo& info) const;
  std::vector<PlannerRule> rules_;
};

// Loads rules from a JSON file: [{"require": {...}, "suffix": [...]}, ...].
RulePlanner load_planner_rules(const std::string& path);

}  // namespace cpceval::planstack
