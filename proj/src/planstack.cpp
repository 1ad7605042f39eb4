#include "cpceval/planstack.hpp"

#include <fstream>

#include <json.hpp>

namespace cpceval::planstack {

PlanStack make_stack(const std::vector<std::string>& ids) {
  PlanStack s;
  s.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].empty()) throw std::invalid_argument("goal id must be non-empty");
    s.push_back(Goal{ids[i], static_cast<int>(i)});
  }
  return s;
}

void relevel(PlanStack& stack) {
  for (std::size_t i = 0; i < stack.size(); ++i) stack[i].level = static_cast<int>(i);
}

namespace {

PlanStack regen(const StaticPlanner& planner, const WorldInfo& info, const PlanStack& stack,
                std::size_t prefix_len) {
  PlanStack prefix(stack.begin(), stack.begin() + static_cast<long>(prefix_len));
  PlanStack out = planner(info, prefix);
  if (out.size() < prefix.size())
    throw std::runtime_error("planner output does not extend its prefix");
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (out[i].id != prefix[i].id)
      throw std::runtime_error("planner output does not extend its prefix");
  }
  return out;
}

}  // namespace

std::optional<std::size_t> cpc_criterion(const PlanStack& stack, const WorldInfo& info,
                                         const StaticPlanner& planner) {
  if (stack.empty()) throw std::invalid_argument("cpc_criterion: empty stack");
  for (std::size_t i = 1; i <= stack.size(); ++i) {
    PlanStack out = regen(planner, info, stack, i);
    if (out.empty() || out.back().id != stack.back().id) return i;
  }
  return std::nullopt;
}

PlanStack dynamic_replan(const PlanStack& stack, const WorldInfo& info,
                         const StaticPlanner& planner, ReplanMode mode) {
  if (stack.empty()) throw std::invalid_argument("dynamic_replan: empty stack");
  if (mode == ReplanMode::repaired) {
    auto idx = cpc_criterion(stack, info, planner);
    if (!idx) return stack;
    PlanStack out = regen(planner, info, stack, *idx);
    relevel(out);
    return out;
  }
  // Verbatim: the pseudocode as published, ambiguities preserved. The return
  // expression concatenates prefix with a plan regenerated from prefix[:-1],
  // which duplicates goals; that is what the text says.
  for (std::size_t i = 1; i <= stack.size(); ++i) {
    PlanStack prefix(stack.begin(), stack.begin() + static_cast<long>(i));
    PlanStack regenerated = planner(info, prefix);
    if (regenerated.empty() || regenerated.back().id != stack.back().id) {
      PlanStack shorter(prefix.begin(), prefix.end() - 1);
      PlanStack tail = planner(info, shorter);
      PlanStack out = prefix;
      out.insert(out.end(), tail.begin(), tail.end());
      relevel(out);
      return out;
    }
  }
  return stack;
}

RulePlanner::RulePlanner(std::vector<PlannerRule> rules) : rules_(std::move(rules)) {
  if (rules_.empty()) throw std::invalid_argument("RulePlanner: no rules");
  if (!rules_.back().require.empty())
    throw std::invalid_argument("RulePlanner: last rule must be a catch-all");
  for (const auto& r : rules_) {
    if (r.suffix.empty()) throw std::invalid_argument("RulePlanner: empty suffix");
  }
}

const PlannerRule& RulePlanner::match(const WorldInfo& info) const {
  for (const auto& r : rules_) {
    bool ok = true;
    for (const auto& [k, v] : r.require) {
      auto it = info.facts.find(k);
      if (it == info.facts.end() || it->second != v) {
        ok = false;
        break;
      }
    }
    if (ok) return r;
  }
  return rules_.back();  // unreachable: catch-all always matches
}

PlanStack RulePlanner::operator()(const WorldInfo& info, const PlanStack& prefix) const {
  const PlannerRule& rule = match(info);
  const auto& sfx = rule.suffix;
  if (prefix.size() >= sfx.size()) {
    bool ends_with = true;
    for (std::size_t i = 0; i < sfx.size(); ++i) {
      if (prefix[prefix.size() - sfx.size() + i].id != sfx[i]) {
        ends_with = false;
        break;
      }
    }
    if (ends_with) return prefix;  // plan already achieves the priority
  }
  PlanStack out = prefix;
  for (const auto& id : sfx) out.push_back(Goal{id, 0});
  relevel(out);
  return out;
}

RulePlanner load_planner_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open planner rules file: " + path);
  nlohmann::json j;
  in >> j;
  std::vector<PlannerRule> rules;
  for (const auto& item : j) {
    PlannerRule r;
    if (item.contains("require"))
      r.require = item.at("require").get<std::map<std::string, std::string>>();
    r.suffix = item.at("suffix").get<std::vector<std::string>>();
    rules.push_back(std::move(r));
  }
  return RulePlanner(std::move(rules));
}

}  // namespace cpceval::planstack
