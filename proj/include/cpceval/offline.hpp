#pragma once

#include <memory>
#include <string>

#include "cpceval/agents.hpp"
#include "cpceval/planstack.hpp"
#include "cpceval/problems.hpp"

namespace cpceval::offline {

// Offline agent with perfect stepping-back behavior, backed by the plan-stack
// reference model. It solves quadratics with a transcript that switches from
// factoring to the quadratic formula at a per-problem chunk, and answers CPC
// probes by evaluating the criterion on the plan stack it would hold at that
// prefix: Yes exactly at the prefix where the switch evidence has just
// arrived and the stack has not been regenerated yet.
class PerfectCpcAgent : public agents::AgentBackend {
 public:
  explicit PerfectCpcAgent(std::size_t chunk_size = 50);

  std::string model_name() const override { return "perfect-cpc"; }
  std::string raw_complete(const std::vector<agents::ChatMessage>& messages,
                           const agents::DecodingParams& params) override;

  // Chunk-aligned transcript; the switch chunk index varies per problem id.
  std::string make_transcript_text(const std::string& problem_id) const;
  std::size_t switch_chunk(const std::string& problem_id) const;

  const planstack::RulePlanner& planner() const { return planner_; }

 private:
  bool decide(const std::string& prefix) const;
  std::size_t chunk_size_;
  planstack::RulePlanner planner_;
};

// Render the solve prompt the offline pipelines send; PerfectCpcAgent parses
// the problem id back out of it.
std::string render_solve_prompt(const std::string& problem_id, const problems::Quadratic& q);

// Playback solver for the synthetic judge dataset: >=200 characters of
// factoring work and >=200 characters of quadratic-formula work.
std::unique_ptr<agents::ScriptedAgent> make_scripted_solver();

// Offline agent that never switches: answers No to every probe and produces
// factoring-only transcripts.
std::unique_ptr<agents::ScriptedAgent> make_never_switch_agent();

}  // namespace cpceval::offline
