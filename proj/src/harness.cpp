#include "cpceval/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <httplib.h>

#include "cpceval/bandit.hpp"
#include "cpceval/cpccurve.hpp"
#include "cpceval/offline.hpp"
#include "cpceval/prefcycles.hpp"
#include "cpceval/problems.hpp"
#include "cpceval/rng.hpp"
#include "cpceval/switchjudge.hpp"

namespace fs = std::filesystem;

namespace cpceval::harness {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, delim)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside of values' quoted parts (simple: # starts a comment
    // unless escaped).
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    // Quoted values keep inner whitespace verbatim.
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

std::optional<std::string> Config::get(const std::string& section, const std::string& key) const {
  auto sit = sections_.find(section);
  if (sit == sections_.end()) return std::nullopt;
  auto kit = sit->second.find(key);
  if (kit == sit->second.end()) return std::nullopt;
  return kit->second;
}

std::string Config::require(const std::string& section, const std::string& key) const {
  auto v = get(section, key);
  if (!v) throw std::runtime_error("missing required config key [" + section + "] " + key);
  return *v;
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  return get(section, key).value_or(fallback);
}

long Config::get_int(const std::string& section, const std::string& key, long fallback) const {
  auto v = get(section, key);
  return v ? std::stol(*v) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  auto v = get(section, key);
  return v ? std::stod(*v) : fallback;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = value;
}

nlohmann::json Config::snapshot() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, kv] : sections_) j[name] = kv;
  return j;
}

std::string Config::fingerprint() const {
  std::ostringstream os;
  for (const auto& [name, kv] : sections_) {
    os << '[' << name << ']';
    for (const auto& [k, v] : kv) os << k << '=' << v << ';';
  }
  std::ostringstream hex;
  hex << std::hex << fnv1a(os.str());
  return hex.str();
}

std::unique_ptr<agents::AgentBackend> make_backend(const Config& config,
                                                   const std::string& section) {
  const std::string kind = config.get_or(section, "kind", "scripted");
  if (kind == "perfect_cpc") return std::make_unique<offline::PerfectCpcAgent>();
  if (kind == "never_switch") return offline::make_never_switch_agent();
  if (kind == "scripted_solver") return offline::make_scripted_solver();
  if (kind == "scripted_judge") return switchjudge::make_scripted_judge();
  if (kind == "scripted") return agents::load_scripted_agent(config.require(section, "rules_file"));
  if (kind == "preference") {
    prefcycles::ScriptedPreferenceAgent::Options opts;
    opts.ranking = split(config.require(section, "ranking"), ',');
    for (const auto& edge : split(config.get_or(section, "overrides", ""), ';')) {
      auto parts = split(edge, '>');
      if (parts.size() != 2) throw std::runtime_error("bad preference override: " + edge);
      opts.overrides.emplace_back(parts[0], parts[1]);
    }
    auto noisy = split(config.get_or(section, "noisy_pair", ""), ',');
    if (noisy.size() == 2) opts.noisy_pair = {noisy[0], noisy[1]};
    opts.noise_rate = config.get_double(section, "noise_rate", 0.0);
    opts.noise_seed = static_cast<std::uint64_t>(config.get_int(section, "noise_seed", 0));
    opts.remove_cycles = config.get_or(section, "remove_cycles", "true") == "true";
    return std::make_unique<prefcycles::ScriptedPreferenceAgent>(std::move(opts));
  }
  if (kind == "http") {
    agents::HttpChatBackend::Options opts;
    opts.base_url = config.require(section, "base_url");
    opts.path = config.get_or(section, "path", "/v1/chat/completions");
    opts.model = config.require(section, "model");
    opts.api_key_env = config.get_or(section, "api_key_env", "CPCEVAL_API_KEY");
    return std::make_unique<agents::HttpChatBackend>(opts);
  }
  throw std::runtime_error("unknown backend kind: " + kind);
}

namespace {

void fail_fast_if_unreachable(const Config& config, const std::string& section) {
  if (config.get_or(section, "kind", "scripted") != "http") return;
  const std::string base_url = config.require(section, "base_url");
  httplib::Client client(base_url);
  client.set_connection_timeout(5, 0);
  auto res = client.Get("/");
  if (!res) throw std::runtime_error("backend unreachable, aborting before generation: " + base_url);
}

struct Ctx {
  const Config& config;
  const RunOptions& options;
  std::string out_dir;
  std::string fingerprint;
  std::uint64_t seed = 0;
  int missing = 0;
  std::unique_ptr<agents::RunLog> log;

  std::string key(const std::string& kind, const std::string& item_id) const {
    std::ostringstream os;
    os << std::hex << fnv1a(fingerprint + "|" + kind + "|" + item_id);
    return os.str();
  }

  JsonlStore store(const std::string& kind) const {
    return JsonlStore(out_dir + "/" + kind + ".jsonl");
  }

  void checkpoint() const {
    if (options.checkpoint_hook) options.checkpoint_hook();
  }

  void write_file(const std::string& name, const std::string& content) const {
    std::ofstream out(out_dir + "/" + name, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + name);
    out << content;
  }
};

nlohmann::json matrix_to_json(const prefcycles::PreferenceMatrix& m) {
  nlohmann::json cards = nlohmann::json::array();
  for (const auto& c : m.cards.cards) {
    nlohmann::json jc = {{"name", c.name},
                         {"kind", c.kind == problems::CardKind::treasure   ? "treasure"
                                  : c.kind == problems::CardKind::victory ? "victory"
                                                                          : "kingdom"}};
    if (c.dominance_rank) jc["dominance_rank"] = *c.dominance_rank;
    cards.push_back(jc);
  }
  nlohmann::json prefers = nlohmann::json::array();
  for (int i = 0; i < 6; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < 6; ++j) row.push_back(m.prefers[i][j]);
    prefers.push_back(row);
  }
  return {{"cards", cards}, {"prefers", prefers}};
}

prefcycles::PreferenceMatrix matrix_from_json(const nlohmann::json& j) {
  prefcycles::PreferenceMatrix m;
  for (const auto& jc : j.at("cards")) {
    problems::Card c;
    c.name = jc.at("name").get<std::string>();
    const std::string kind = jc.at("kind").get<std::string>();
    c.kind = kind == "treasure"  ? problems::CardKind::treasure
             : kind == "victory" ? problems::CardKind::victory
                                 : problems::CardKind::kingdom;
    if (jc.contains("dominance_rank")) c.dominance_rank = jc.at("dominance_rank").get<int>();
    m.cards.cards.push_back(c);
  }
  for (int i = 0; i < 6; ++i)
    for (int j2 = 0; j2 < 6; ++j2) m.prefers[i][j2] = j.at("prefers").at(i).at(j2).get<bool>();
  return m;
}

// ---------------------------------------------------------------------------
// cpc_curves

nlohmann::json run_cpc_curves(Ctx& ctx) {
  const int n_transcripts = static_cast<int>(ctx.config.get_int("cpc", "transcripts", 50));
  const int coeff_bound = static_cast<int>(ctx.config.get_int("cpc", "coeff_bound", 12));
  const std::size_t chunk_size =
      static_cast<std::size_t>(ctx.config.get_int("cpc", "chunk_size", 50));
  const double z = ctx.config.get_double("cpc", "z", 1.96);
  // No paper-given default exists for the CPC prompt; it must be configured.
  const std::string cpc_prompt = ctx.config.require("cpc", "cpc_prompt");

  auto backend = make_backend(ctx.config, "backend");
  auto judge = make_backend(ctx.config, "judge");

  // Problems (regenerated deterministically from the seed; only missing ones
  // are appended on resume).
  auto problems_store = ctx.store("problems");
  auto gen_rng = substream(ctx.seed, "problems");
  std::vector<std::pair<std::string, problems::Quadratic>> problem_list;
  for (int i = 0; i < n_transcripts; ++i) {
    problems::Quadratic q = problems::gen_quadratic(coeff_bound, gen_rng);
    std::string id = "p" + std::to_string(i);
    problem_list.emplace_back(id, q);
    if (problems_store.append(ctx.key("problems", id),
                              {{"id", id}, {"a", q.a}, {"b", q.b}, {"c", q.c}}))
      ctx.checkpoint();
  }

  // Transcripts.
  auto transcripts_store = ctx.store("transcripts");
  std::vector<switchjudge::Transcript> transcripts;
  for (const auto& [id, q] : problem_list) {
    const std::string key = ctx.key("transcripts", id);
    std::string text;
    if (transcripts_store.has(key)) {
      text = transcripts_store.get(key).at("text").get<std::string>();
    } else {
      try {
        text = agents::complete(*backend, {{"user", offline::render_solve_prompt(id, q)}}, {},
                                ctx.log.get());
      } catch (const std::exception&) {
        ++ctx.missing;
        continue;
      }
      transcripts_store.append(key, {{"id", id}, {"text", text}});
      ctx.checkpoint();
    }
    transcripts.push_back(
        switchjudge::make_transcript(id, backend->model_name(), text, chunk_size));
  }

  // Switch judging + monotone correction.
  auto judgements_store = ctx.store("judgements");
  std::map<std::string, std::size_t> switch_indices;
  int never_switched = 0;
  for (const auto& t : transcripts) {
    const std::string key = ctx.key("judgements", t.problem_id);
    std::optional<std::size_t> sw;
    if (judgements_store.has(key)) {
      auto rec = judgements_store.get(key);
      if (!rec.at("switch_index").is_null()) sw = rec.at("switch_index").get<std::size_t>();
    } else {
      auto prefixes = switchjudge::chunk(t.text, t.chunk_size);
      std::vector<bool> raw;
      for (const auto& prefix : prefixes)
        raw.push_back(switchjudge::judge_switch(prefix, t.text, *judge, {}, ctx.log.get()));
      // Tie-break stream is separate from generation and keyed per transcript
      // so judge reruns and resume order cannot perturb it.
      auto tie_rng = substream(ctx.seed, "tie-break/" + t.problem_id);
      auto judgement = switchjudge::monotone_correct(raw, tie_rng);
      sw = switchjudge::switch_index(judgement);
      nlohmann::json rec = {{"transcript_id", t.problem_id},
                            {"raw", judgement.raw},
                            {"corrected", judgement.corrected},
                            {"edits", judgement.edits},
                            {"tie_broken", judgement.tie_broken},
                            {"switch_index", sw ? nlohmann::json(*sw) : nlohmann::json()}};
      judgements_store.append(key, rec);
      ctx.checkpoint();
    }
    if (sw) switch_indices[t.problem_id] = *sw;
    else ++never_switched;
  }

  // CPC probes, both modes on the identical prefix grid (paired design).
  auto probes_store = ctx.store("probes");
  std::vector<cpccurve::CpcProbe> probes;
  for (const auto& t : transcripts) {
    if (!switch_indices.count(t.problem_id)) continue;  // excluded, reported
    auto prefixes = switchjudge::chunk(t.text, t.chunk_size);
    for (std::size_t j = 0; j < prefixes.size(); ++j) {
      for (auto mode : {cpccurve::ProbeMode::one_token, cpccurve::ProbeMode::cot}) {
        const std::string item =
            t.problem_id + "/" + std::to_string(j) + "/" + cpccurve::to_string(mode);
        const std::string key = ctx.key("probes", item);
        if (probes_store.has(key)) {
          auto rec = probes_store.get(key);
          cpccurve::CpcProbe p;
          p.transcript_id = t.problem_id;
          p.prefix_index = j;
          p.mode = mode;
          p.decision = rec.at("decision").get<bool>();
          probes.push_back(p);
          continue;
        }
        try {
          auto p = cpccurve::probe_cpc(t.problem_id, j, prefixes[j], *backend, mode, cpc_prompt,
                                       {}, ctx.log.get());
          nlohmann::json rec = {{"transcript_id", p.transcript_id},
                                {"prefix_index", p.prefix_index},
                                {"mode", cpccurve::to_string(p.mode)},
                                {"decision", p.decision}};
          if (p.cot_text) rec["cot_text"] = *p.cot_text;
          probes_store.append(key, rec);
          ctx.checkpoint();
          probes.push_back(std::move(p));
        } catch (const std::exception&) {
          ++ctx.missing;
        }
      }
    }
  }

  std::vector<cpccurve::CpcCurve> curves = {
      cpccurve::build_curve(probes, switch_indices, cpccurve::ProbeMode::one_token, z),
      cpccurve::build_curve(probes, switch_indices, cpccurve::ProbeMode::cot, z)};
  ctx.write_file("summary.csv", cpccurve::curve_csv(curves));
  ctx.write_file("plot.json", cpccurve::curve_plot_json(curves).dump(2) + "\n");

  return {{"transcripts", transcripts.size()},
          {"never_switched", never_switched},
          {"probes", probes.size()}};
}

// ---------------------------------------------------------------------------
// bandit

nlohmann::json run_bandit(Ctx& ctx) {
  const int episodes = static_cast<int>(ctx.config.get_int("bandit", "episodes", 100));
  const int horizon = static_cast<int>(ctx.config.get_int("bandit", "horizon", 25));
  auto std_grid_s = split(ctx.config.get_or("bandit", "std_grid", "10,20,40,80"), ',');
  auto policies_s = split(ctx.config.get_or("bandit", "policies", "random,greedy,ucb"), ',');
  auto means_s = split(ctx.config.get_or("bandit", "means", "50,100,150"), ',');
  const bool reference = ctx.config.get_or("backend", "kind", "reference") == "reference";
  const bool shuffle = ctx.config.get_or("bandit", "shuffle_labels", "true") == "true";
  auto modes_s = split(ctx.config.get_or("bandit", "modes", "one_token,cot"), ',');

  bandit::BanditConfig base;
  base.horizon = horizon;
  base.shuffle_labels = shuffle;
  if (means_s.size() != 3) throw std::runtime_error("bandit means must list 3 values");
  for (int i = 0; i < 3; ++i) base.arm_means[i] = std::stod(means_s[i]);

  std::unique_ptr<agents::AgentBackend> backend;
  if (!reference) backend = make_backend(ctx.config, "backend");

  auto parse_policy = [](const std::string& s) {
    if (s == "random") return bandit::Policy::random_policy;
    if (s == "intuitive") return bandit::Policy::intuitive;
    if (s == "greedy") return bandit::Policy::greedy;
    if (s == "ucb") return bandit::Policy::ucb;
    throw std::runtime_error("unknown bandit policy: " + s);
  };

  auto episodes_store = ctx.store("episodes");
  std::vector<bandit::SweepRow> rows;
  for (const auto& policy_s : policies_s) {
    const bandit::Policy policy = parse_policy(policy_s);
    for (const auto& mode_s : reference ? std::vector<std::string>{"reference"} : modes_s) {
      for (const auto& std_s : std_grid_s) {
        bandit::BanditConfig config = base;
        config.policy = policy;
        config.arm_std = std::stod(std_s);
        config.mode = mode_s == "cot" ? bandit::AnswerMode::cot : bandit::AnswerMode::one_token;
        double acc_sum = 0;
        double invalid_sum = 0;
        for (int e = 0; e < episodes; ++e) {
          const std::string item = policy_s + "/" + mode_s + "/" + std_s + "/" + std::to_string(e);
          const std::string key = ctx.key("episodes", item);
          if (episodes_store.has(key)) {
            auto rec = episodes_store.get(key);
            acc_sum += rec.at("accuracy").get<double>();
            invalid_sum += rec.at("invalid").get<int>();
            continue;
          }
          auto rng = substream(ctx.seed, "bandit-episode/" + policy_s + "/" + mode_s + "/" + std_s,
                               static_cast<std::uint64_t>(e));
          bandit::BanditEpisode ep = reference
                                         ? bandit::run_episode(policy, config, rng)
                                         : bandit::run_episode(*backend, config, rng, ctx.log.get());
          episodes_store.append(key, {{"policy", policy_s},
                                      {"mode", mode_s},
                                      {"std", config.arm_std},
                                      {"episode", e},
                                      {"pulls", ep.pulls},
                                      {"best_arm_pulls", ep.best_arm_pulls},
                                      {"invalid", ep.invalid_answers},
                                      {"accuracy", ep.accuracy()}});
          ctx.checkpoint();
          acc_sum += ep.accuracy();
          invalid_sum += ep.invalid_answers;
        }
        bandit::SweepRow row;
        row.policy = policy_s;
        row.mode = mode_s;
        row.model = reference ? "reference" : backend->model_name();
        row.arm_std = config.arm_std;
        row.episodes = episodes;
        row.mean_accuracy = acc_sum / episodes;
        row.mean_invalid = invalid_sum / episodes;
        rows.push_back(row);
      }
    }
  }

  ctx.write_file("summary.csv", bandit::sweep_csv(rows));
  return {{"rows", rows.size()}, {"episodes_per_cell", episodes}};
}

// ---------------------------------------------------------------------------
// pref_cycles

nlohmann::json run_pref_cycles(Ctx& ctx) {
  const int n_sets = static_cast<int>(ctx.config.get_int("cycles", "cardsets", 50));
  const std::string state_prompt = ctx.config.get_or(
      "cycles", "state_prompt",
      "You are playing Dominion (First Game setup). It is the buy phase of turn 8; your "
      "deck currently holds 7 Coppers, 3 Estates, and 2 Silvers, and you have 5 coins "
      "to spend.");
  auto pool = ctx.config.get("cycles", "card_pool_file")
                  ? problems::load_card_pool(*ctx.config.get("cycles", "card_pool_file"))
                  : problems::default_card_pool();

  auto backend = make_backend(ctx.config, "backend");
  auto rng = substream(ctx.seed, "cardsets");
  problems::CardSetSampler sampler(pool);

  auto matrices_store = ctx.store("matrices");
  auto reports_store = ctx.store("reports");
  std::vector<prefcycles::CycleReport> reports;
  for (int s = 0; s < n_sets; ++s) {
    problems::CardSet set = sampler.next(rng);
    const std::string id = "set" + std::to_string(s);
    const std::string mkey = ctx.key("matrices", id);
    prefcycles::PreferenceMatrix matrix;
    if (matrices_store.has(mkey)) {
      matrix = matrix_from_json(matrices_store.get(mkey));
    } else {
      try {
        matrix = prefcycles::elicit_matrix(set, *backend, state_prompt, ctx.log.get());
      } catch (const std::exception&) {
        ++ctx.missing;  // missing cells abort the whole matrix
        continue;
      }
      matrices_store.append(mkey, matrix_to_json(matrix));
      ctx.checkpoint();
    }

    const std::string rkey = ctx.key("reports", id);
    prefcycles::CycleReport report;
    if (reports_store.has(rkey)) {
      auto rec = reports_store.get(rkey);
      report.matrix = matrix;
      report.cycles = rec.at("cycles").get<std::vector<std::vector<int>>>();
      for (const auto& d : rec.at("removal_decisions")) {
        std::array<bool, 6> decisions{};
        for (int c = 0; c < 6; ++c) decisions[c] = d.at(c).get<bool>();
        report.removal_decisions.push_back(decisions);
      }
      for (const auto& e : rec.at("fas"))
        report.fas.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    } else {
      report = prefcycles::analyze_matrix(matrix, *backend,
                                          prefcycles::default_removal_templates(), ctx.log.get());
      nlohmann::json fas = nlohmann::json::array();
      for (const auto& [u, v] : report.fas) fas.push_back({u, v});
      nlohmann::json decisions = nlohmann::json::array();
      for (const auto& d : report.removal_decisions) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < 6; ++c) row.push_back(d[c]);
        decisions.push_back(row);
      }
      reports_store.append(
          rkey, {{"id", id}, {"cycles", report.cycles}, {"fas", fas},
                 {"removal_decisions", decisions}});
      ctx.checkpoint();
    }
    reports.push_back(std::move(report));
  }

  if (reports.empty()) throw std::runtime_error("pref_cycles: no completed card sets");
  auto stats = prefcycles::cycle_stats(reports);
  std::ostringstream csv;
  csv << "model,prompt_config,mean_cycles,removal_rate\n";
  const char* names[6] = {"phrasing1_positive", "phrasing1_negative", "phrasing2_positive",
                          "phrasing2_negative", "phrasing3_positive", "phrasing3_negative"};
  for (int c = 0; c < 6; ++c) {
    csv << backend->model_name() << ',' << names[c] << ',' << stats.mean_cycles << ','
        << stats.removal_rate[c] << '\n';
  }
  ctx.write_file("summary.csv", csv.str());
  return {{"cardsets", reports.size()},
          {"mean_cycles", stats.mean_cycles},
          {"cycles_total", stats.cycles_total}};
}

// ---------------------------------------------------------------------------
// validate_judge

nlohmann::json run_validate_judge(Ctx& ctx) {
  const int n_problems = static_cast<int>(ctx.config.get_int("judge_validation", "problems", 20));
  const int coeff_bound =
      static_cast<int>(ctx.config.get_int("judge_validation", "coeff_bound", 12));

  Config solver_cfg = ctx.config;
  if (!ctx.config.get("backend", "kind")) solver_cfg.set("backend", "kind", "scripted_solver");
  auto solver = make_backend(solver_cfg, "backend");
  auto judge = make_backend(ctx.config, "judge");

  auto gen_rng = substream(ctx.seed, "judge-validation-problems");
  std::vector<problems::Quadratic> quads;
  for (int i = 0; i < n_problems; ++i)
    quads.push_back(problems::gen_quadratic(coeff_bound, gen_rng));

  auto set = switchjudge::make_synthetic_validation_set(quads, *solver, {}, ctx.log.get());
  auto items_store = ctx.store("synthetic_items");
  for (const auto& item : set.items) {
    if (items_store.append(ctx.key("synthetic_items", item.problem_id),
                           {{"id", item.problem_id}, {"text", item.text},
                            {"labels", item.labels}}))
      ctx.checkpoint();
  }

  auto acc = switchjudge::score_judge(set, *judge, {}, ctx.log.get());
  std::ostringstream csv;
  csv << "position,correct,total,accuracy\n";
  for (std::size_t i = 0; i < acc.total.size(); ++i) {
    csv << i << ',' << acc.correct[i] << ',' << acc.total[i] << ','
        << (acc.total[i] ? static_cast<double>(acc.correct[i]) / acc.total[i] : 0.0) << '\n';
  }
  ctx.write_file("summary.csv", csv.str());

  auto scores_store = ctx.store("judge_scores");
  scores_store.append(ctx.key("judge_scores", "all"),
                      {{"correct", acc.correct}, {"total", acc.total},
                       {"skipped_items", set.skipped}});
  ctx.checkpoint();
  return {{"items", set.items.size()},
          {"skipped", set.skipped},
          {"positions", acc.total.size()}};
}

// ---------------------------------------------------------------------------
// validate_dominance

nlohmann::json run_validate_dominance(Ctx& ctx) {
  const int samples = static_cast<int>(ctx.config.get_int("dominance", "samples", 100));
  const std::string state_prompt =
      ctx.config.get_or("dominance", "state_prompt", "You are playing Dominion.");
  auto pool = ctx.config.get("dominance", "card_pool_file")
                  ? problems::load_card_pool(*ctx.config.get("dominance", "card_pool_file"))
                  : problems::default_card_pool();
  auto backend = make_backend(ctx.config, "backend");

  auto store = ctx.store("dominance");
  const std::string key = ctx.key("dominance", "counts");
  std::array<int, 4> counts{};
  if (store.has(key)) {
    auto rec = store.get(key);
    for (int i = 0; i < 4; ++i) counts[i] = rec.at("correct").at(i).get<int>();
  } else {
    counts = prefcycles::validate_dominance(*backend, pool, state_prompt, samples, ctx.log.get());
    store.append(key, {{"correct", counts}, {"samples", samples}});
    ctx.checkpoint();
  }

  auto pairs = problems::dominance_pairs(pool);
  std::ostringstream csv;
  csv << "better,worse,correct,samples\n";
  for (int i = 0; i < 4; ++i) {
    csv << pairs[i].first.name << ',' << pairs[i].second.name << ',' << counts[i] << ','
        << samples << '\n';
  }
  ctx.write_file("summary.csv", csv.str());
  nlohmann::json jcounts = counts;
  return {{"correct", jcounts}, {"samples", samples}};
}

}  // namespace

RunRecord run_experiment(const Config& config, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string experiment = config.require("run", "experiment");
  if (!config.get("run", "seed")) throw std::runtime_error("[run] seed is mandatory");

  Ctx ctx{config, options};
  ctx.out_dir = config.require("run", "out_dir");
  ctx.fingerprint = config.fingerprint();
  ctx.seed = static_cast<std::uint64_t>(config.get_int("run", "seed", 0));
  fs::create_directories(ctx.out_dir);
  ctx.log = std::make_unique<agents::RunLog>(ctx.out_dir + "/run_log.jsonl");

  fail_fast_if_unreachable(config, "backend");

  RunRecord record;
  record.config_snapshot = config.snapshot();
  record.out_dir = ctx.out_dir;

  if (experiment == "cpc_curves") record.summary = run_cpc_curves(ctx);
  else if (experiment == "bandit") record.summary = run_bandit(ctx);
  else if (experiment == "pref_cycles") record.summary = run_pref_cycles(ctx);
  else if (experiment == "validate_judge") record.summary = run_validate_judge(ctx);
  else if (experiment == "validate_dominance") record.summary = run_validate_dominance(ctx);
  else throw std::runtime_error("unknown experiment: " + experiment);

  record.missing = ctx.missing;
  record.summary_files = {ctx.out_dir + "/summary.csv"};
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::json jrec = {{"experiment", experiment},
                         {"config", record.config_snapshot},
                         {"summary", record.summary},
                         {"missing", record.missing},
                         {"wall_seconds", record.wall_seconds}};
  ctx.write_file("run_record.json", jrec.dump(2) + "\n");
  return record;
}

void report(const std::string& out_dir, const std::string& format, std::ostream& out) {
  const std::string record_path = out_dir + "/run_record.json";
  std::ifstream rec_in(record_path);
  if (!rec_in) throw std::runtime_error("incomplete record: missing " + record_path);
  nlohmann::json record;
  rec_in >> record;
  const std::string experiment = record.at("experiment").get<std::string>();

  std::vector<std::string> required;
  if (experiment == "cpc_curves") required = {"problems", "transcripts", "judgements", "probes"};
  else if (experiment == "bandit") required = {"episodes"};
  else if (experiment == "pref_cycles") required = {"matrices", "reports"};
  else if (experiment == "validate_judge") required = {"synthetic_items", "judge_scores"};
  else if (experiment == "validate_dominance") required = {"dominance"};

  std::vector<std::string> missing;
  for (const auto& kind : required) {
    const std::string path = out_dir + "/" + kind + ".jsonl";
    std::ifstream f(path);
    std::string line;
    if (!f || !std::getline(f, line) || line.empty()) missing.push_back(path);
  }
  if (!missing.empty()) {
    std::string msg = "incomplete record, missing artifacts:";
    for (const auto& m : missing) msg += " " + m;
    throw std::runtime_error(msg);
  }

  if (format == "csv") {
    std::ifstream f(out_dir + "/summary.csv");
    if (!f) throw std::runtime_error("incomplete record: missing summary.csv");
    out << f.rdbuf();
  } else if (format == "plot_json") {
    std::ifstream f(out_dir + "/plot.json");
    if (f) {
      out << f.rdbuf();
    } else {
      out << record.at("summary").dump(2) << "\n";
    }
  } else if (format == "text_table") {
    std::ifstream f(out_dir + "/summary.csv");
    if (!f) throw std::runtime_error("incomplete record: missing summary.csv");
    std::string line;
    while (std::getline(f, line)) {
      for (auto& c : line)
        if (c == ',') c = '\t';
      out << line << '\n';
    }
  } else {
    throw std::runtime_error("unknown report format: " + format);
  }
}

}  // namespace cpceval::harness
