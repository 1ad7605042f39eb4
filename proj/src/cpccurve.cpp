#include "cpceval/cpccurve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cpceval::cpccurve {

std::string to_string(ProbeMode mode) {
  return mode == ProbeMode::one_token ? "one_token" : "cot";
}

std::pair<double, double> wald_ci(int true_count, int n, double z) {
  if (n < 1 || true_count < 0 || true_count > n || z <= 0)
    throw std::invalid_argument("wald_ci: bad arguments");
  const double p = static_cast<double>(true_count) / n;
  const double margin = z * std::sqrt(p * (1.0 - p) / n);
  return {std::max(0.0, p - margin), std::min(1.0, p + margin)};
}

std::string render_probe_prompt(std::string_view prefix, std::string_view cpc_prompt) {
  std::ostringstream os;
  os << "You are partway through solving a problem. Here is your reasoning so far:\n"
     << switchjudge::kPrefixMarker << "\n"
     << prefix << "\n--- END PREFIX ---\n\n"
     << cpc_prompt;
  return os.str();
}

CpcProbe probe_cpc(const std::string& transcript_id, std::size_t prefix_index,
                   const std::string& prefix, agents::AgentBackend& backend, ProbeMode mode,
                   const std::string& cpc_prompt, const agents::DecodingParams& params,
                   agents::RunLog* log) {
  if (cpc_prompt.empty())
    throw std::invalid_argument("probe_cpc: cpc_prompt must be configured");
  CpcProbe probe;
  probe.transcript_id = transcript_id;
  probe.prefix_index = prefix_index;
  probe.mode = mode;
  const std::string prompt = render_probe_prompt(prefix, cpc_prompt);
  if (mode == ProbeMode::one_token) {
    auto fc = agents::forced_choice(backend, prompt + "\n\nRespond Yes or No.", {"Yes", "No"},
                                    params, log);
    probe.decision = fc.token == "Yes";
  } else {
    agents::CotResult cot = agents::elicit_cot(backend, prompt, params, log);
    probe.cot_text = cot.text;
    probe.decision = agents::extract_yes_no(backend, prompt + "\n\n" + cot.text, params, log);
  }
  return probe;
}

CpcCurve build_curve(const std::vector<CpcProbe>& probes,
                     const std::map<std::string, std::size_t>& switch_indices, ProbeMode mode,
                     double z) {
  std::map<long, std::pair<int, int>> per_offset;  // offset -> (true_count, n)
  for (const auto& p : probes) {
    if (p.mode != mode) continue;
    auto it = switch_indices.find(p.transcript_id);
    if (it == switch_indices.end())
      throw std::invalid_argument("build_curve: probe for transcript without switch index: " +
                                  p.transcript_id);
    const long offset = static_cast<long>(p.prefix_index) - static_cast<long>(it->second);
    auto& cell = per_offset[offset];
    if (p.decision) ++cell.first;
    ++cell.second;
  }
  if (per_offset.empty()) throw std::invalid_argument("build_curve: empty probe set");

  CpcCurve curve;
  curve.mode = mode;
  for (const auto& [offset, cell] : per_offset) {
    CurvePoint pt;
    pt.offset = offset;
    pt.true_count = cell.first;
    pt.n = cell.second;
    pt.rate = static_cast<double>(pt.true_count) / pt.n;
    std::tie(pt.ci_low, pt.ci_high) = wald_ci(pt.true_count, pt.n, z);
    curve.points.push_back(pt);
  }
  return curve;
}

std::string curve_csv(const std::vector<CpcCurve>& curves) {
  std::ostringstream os;
  os << "mode,offset,n,true_count,rate,ci_low,ci_high\n";
  for (const auto& curve : curves) {
    for (const auto& p : curve.points) {
      os << to_string(curve.mode) << ',' << p.offset << ',' << p.n << ',' << p.true_count << ','
         << p.rate << ',' << p.ci_low << ',' << p.ci_high << '\n';
    }
  }
  return os.str();
}

nlohmann::json curve_plot_json(const std::vector<CpcCurve>& curves) {
  nlohmann::json series = nlohmann::json::array();
  for (const auto& curve : curves) {
    nlohmann::json offsets = nlohmann::json::array(), rates = nlohmann::json::array(),
                   lows = nlohmann::json::array(), highs = nlohmann::json::array(),
                   ns = nlohmann::json::array();
    for (const auto& p : curve.points) {
      offsets.push_back(p.offset);
      rates.push_back(p.rate);
      lows.push_back(p.ci_low);
      highs.push_back(p.ci_high);
      ns.push_back(p.n);
    }
    series.push_back({{"mode", to_string(curve.mode)},
                      {"offset", offsets},
                      {"rate", rates},
                      {"ci_low", lows},
                      {"ci_high", highs},
                      {"n", ns}});
  }
  return {{"series", series}};
}

}  // namespace cpceval::cpccurve
