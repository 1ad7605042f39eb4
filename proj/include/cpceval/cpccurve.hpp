#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpceval/agents.hpp"
#include "cpceval/switchjudge.hpp"

namespace cpceval::cpccurve {

enum class ProbeMode { one_token, cot };

std::string to_string(ProbeMode mode);

struct CpcProbe {
  std::string transcript_id;
  std::size_t prefix_index = 0;
  ProbeMode mode = ProbeMode::one_token;
  bool decision = false;                // true = "switch"
  std::optional<std::string> cot_text;  // present iff mode == cot
};

// p_hat +/- z*sqrt(p_hat*(1-p_hat)/n), clamped to [0,1]. Zero width at
// p_hat in {0,1}.
std::pair<double, double> wald_ci(int true_count, int n, double z);

struct CurvePoint {
  long offset = 0;  // prefix index relative to the in-fact switch (switch = 0)
  int true_count = 0;
  int n = 0;
  double rate = 0, ci_low = 0, ci_high = 0;
};

struct CpcCurve {
  ProbeMode mode = ProbeMode::one_token;
  std::vector<CurvePoint> points;  // ascending offset
};

// Interrupt the transcript at a prefix and ask for the step-back decision.
// The CPC prompt is configuration; there is no default.
std::string render_probe_prompt(std::string_view prefix, std::string_view cpc_prompt);

CpcProbe probe_cpc(const std::string& transcript_id, std::size_t prefix_index,
                   const std::string& prefix, agents::AgentBackend& backend, ProbeMode mode,
                   const std::string& cpc_prompt, const agents::DecodingParams& params = {},
                   agents::RunLog* log = nullptr);

// Aligns probes at the judged switch (offset 0) and aggregates per offset.
// Probes whose transcript has no switch index must be filtered by the caller;
// an empty probe set is an error.
CpcCurve build_curve(const std::vector<CpcProbe>& probes,
                     const std::map<std::string, std::size_t>& switch_indices, ProbeMode mode,
                     double z = 1.96);

// CSV columns: mode, offset, n, true_count, rate, ci_low, ci_high.
std::string curve_csv(const std::vector<CpcCurve>& curves);

// Series + CI structure consumable by any plotting tool, one entry per mode.
nlohmann::json curve_plot_json(const std::vector<CpcCurve>& curves);

}  // namespace cpceval::cpccurve
