// Acceptance gate: ten end-to-end criteria, one PASS/FAIL line each.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "cpceval/bandit.hpp"
#include "cpceval/cpccurve.hpp"
#include "cpceval/harness.hpp"
#include "cpceval/offline.hpp"
#include "cpceval/planstack.hpp"
#include "cpceval/prefcycles.hpp"
#include "cpceval/problems.hpp"
#include "cpceval/rng.hpp"
#include "cpceval/switchjudge.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool pass, const std::string& detail = "") {
  std::cout << "[" << (idx < 10 ? " " : "") << idx << "] " << (pass ? "PASS" : "FAIL") << "  "
            << name;
  if (!pass && !detail.empty()) std::cout << "  (" << detail << ")";
  std::cout << std::endl;
  if (!pass) ++failures;
}

std::string fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("cpceval_acceptance_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

cpceval::harness::Config cpc_config(const std::string& out_dir, int transcripts) {
  return cpceval::harness::Config::parse_string(
      "[run]\n"
      "experiment = cpc_curves\n"
      "seed = 11\n"
      "out_dir = " + out_dir + "\n"
      "[backend]\n"
      "kind = perfect_cpc\n"
      "[judge]\n"
      "kind = scripted_judge\n"
      "[cpc]\n"
      "transcripts = " + std::to_string(transcripts) + "\n"
      "cpc_prompt = \"Step back: has new information made your current approach obsolete, "
      "so that you should switch strategies now?\"\n");
}

// --------------------------------------------------------------------------
// 1. Perfect-CPC delta spike over the full pipeline.

void criterion_1() {
  const std::string dir = fresh_dir("spike");
  bool pass = true;
  std::string detail;
  try {
    auto record = cpceval::harness::run_experiment(cpc_config(dir, 50));
    if (record.missing != 0 || record.summary.at("never_switched") != 0) {
      pass = false;
      detail = "missing items or unswitched transcripts";
    }
    std::ifstream csv(dir + "/summary.csv");
    std::string line;
    std::getline(csv, line);  // header
    int rows = 0, spikes = 0;
    while (std::getline(csv, line)) {
      std::stringstream ss(line);
      std::string mode, offset, n, true_count, rate;
      std::getline(ss, mode, ',');
      std::getline(ss, offset, ',');
      std::getline(ss, n, ',');
      std::getline(ss, true_count, ',');
      std::getline(ss, rate, ',');
      ++rows;
      const bool at_switch = offset == "0";
      if (at_switch && (rate != "1" || true_count != n)) pass = false;
      if (!at_switch && (rate != "0" || true_count != "0")) pass = false;
      if (at_switch) ++spikes;
      if (!pass && detail.empty()) detail = "bad row: " + line;
    }
    if (rows < 4 || spikes != 2) {
      pass = false;
      if (detail.empty()) detail = "unexpected row layout";
    }
  } catch (const std::exception& e) {
    pass = false;
    detail = e.what();
  }
  fs::remove_all(dir);
  report(1, "perfect-CPC agent yields the exact delta spike (rate 1.0 at offset 0)", pass,
         detail);
}

// --------------------------------------------------------------------------
// 2. Monotone correction vs exhaustive oracle; worked examples; tie split.

void criterion_2() {
  bool pass = true;
  std::string detail;
  const std::size_t n = 12;
  auto rng = cpceval::substream(2, "acceptance/monotone");
  for (unsigned mask = 0; mask < (1u << n) && pass; ++mask) {
    std::vector<bool> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = (mask >> i) & 1;

    int min_dist = static_cast<int>(n) + 1;
    std::set<std::size_t> argmins;
    for (std::size_t k = 0; k <= n; ++k) {
      int dist = 0;
      for (std::size_t i = 0; i < n; ++i)
        if ((i >= k) != raw[i]) ++dist;
      if (dist < min_dist) {
        min_dist = dist;
        argmins = {k};
      } else if (dist == min_dist) {
        argmins.insert(k);
      }
    }

    auto j = cpceval::switchjudge::monotone_correct(raw, rng);
    std::size_t k = n;
    for (std::size_t i = 0; i < n; ++i)
      if (j.corrected[i]) {
        k = i;
        break;
      }
    if (j.edits != min_dist || argmins.count(k) == 0 ||
        j.tie_broken != (argmins.size() > 1)) {
      pass = false;
      detail = "mismatch at mask " + std::to_string(mask);
    }
  }

  // Worked example 1: unique single edit at position 1.
  std::vector<bool> ex1 = {false, true, false, false, false, false, true, true, true, true};
  auto j1 = cpceval::switchjudge::monotone_correct(ex1, rng);
  std::vector<bool> want1 = {false, false, false, false, false, false, true, true, true, true};
  if (j1.edits != 1 || j1.tie_broken || j1.corrected != want1) {
    pass = false;
    detail = "worked example 1";
  }

  // Worked example 2: tie between switch positions 4 and 6, split 1/2 each.
  std::vector<bool> ex2 = {false, false, false, false, true, false, true, true, true, true};
  int k4 = 0;
  const int trials = 10000;
  auto tie_rng = cpceval::substream(7, "acceptance/tie");
  for (int t = 0; t < trials; ++t) {
    auto j2 = cpceval::switchjudge::monotone_correct(ex2, tie_rng);
    if (j2.edits != 1 || !j2.tie_broken) {
      pass = false;
      detail = "worked example 2 structure";
      break;
    }
    std::size_t k = 0;
    while (!j2.corrected[k]) ++k;
    if (k == 4) ++k4;
    else if (k != 6) {
      pass = false;
      detail = "worked example 2 argmin set";
      break;
    }
  }
  // Binomial(10000, 1/2): 3 sigma = 150.
  if (std::abs(k4 - trials / 2) > 150) {
    pass = false;
    detail = "tie split " + std::to_string(k4) + "/" + std::to_string(trials);
  }

  report(2, "monotone correction matches the exhaustive oracle on all 2^12 inputs", pass,
         detail);
}

// --------------------------------------------------------------------------
// 3. Synthetic judge dataset labels + scripted judge 100%.

void criterion_3() {
  bool pass = true;
  std::string detail;
  try {
    auto gen_rng = cpceval::substream(3, "acceptance/judge-problems");
    std::vector<cpceval::problems::Quadratic> quads;
    for (int i = 0; i < 20; ++i)
      quads.push_back(cpceval::problems::gen_quadratic(12, gen_rng));
    auto solver = cpceval::offline::make_scripted_solver();
    auto set = cpceval::switchjudge::make_synthetic_validation_set(quads, *solver);
    if (set.items.size() != 20 || set.skipped != 0) {
      pass = false;
      detail = "item count";
    }
    const std::vector<bool> want = {false, false, false, false, true, true, true, true};
    for (const auto& item : set.items) {
      if (item.labels != want || item.text.size() != 400) {
        pass = false;
        detail = "labels/text for " + item.problem_id;
      }
    }
    auto judge = cpceval::switchjudge::make_scripted_judge();
    auto acc = cpceval::switchjudge::score_judge(set, *judge);
    if (acc.total.size() != 8) {
      pass = false;
      detail = "position count " + std::to_string(acc.total.size());
    }
    for (std::size_t i = 0; i < acc.total.size(); ++i) {
      if (acc.correct[i] != acc.total[i]) {
        pass = false;
        detail = "judge error at position " + std::to_string(i);
      }
    }
  } catch (const std::exception& e) {
    pass = false;
    detail = e.what();
  }
  report(3, "synthetic set labels F4T4; scripted judge scores 100% over 8 positions", pass,
         detail);
}

// --------------------------------------------------------------------------
// 4 & 5 helpers.

cpceval::prefcycles::PrefDigraph random_tournament(int n, std::mt19937_64& rng) {
  auto g = cpceval::prefcycles::make_digraph(n);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (coin(rng))
        g.edge[i][j] = true;
      else
        g.edge[j][i] = true;
    }
  return g;
}

std::set<std::vector<int>> cycle_oracle(const cpceval::prefcycles::PrefDigraph& g) {
  std::set<std::vector<int>> out;
  for (unsigned mask = 0; mask < (1u << g.n); ++mask) {
    std::vector<int> verts;
    for (int v = 0; v < g.n; ++v)
      if (mask >> v & 1) verts.push_back(v);
    if (verts.size() < 2) continue;
    std::vector<int> rest(verts.begin() + 1, verts.end());
    do {
      std::vector<int> cyc{verts[0]};
      cyc.insert(cyc.end(), rest.begin(), rest.end());
      bool ok = true;
      for (std::size_t k = 0; k < cyc.size() && ok; ++k)
        ok = g.edge[cyc[k]][cyc[(k + 1) % cyc.size()]];
      if (ok) out.insert(cyc);
    } while (std::next_permutation(rest.begin(), rest.end()));
  }
  return out;
}

void criterion_4() {
  bool pass = true;
  std::string detail;
  auto rng = cpceval::substream(4, "acceptance/cycles");
  std::uniform_int_distribution<int> size(4, 7);
  for (int trial = 0; trial < 200 && pass; ++trial) {
    auto g = random_tournament(size(rng), rng);
    auto got = cpceval::prefcycles::enumerate_cycles(g);
    std::set<std::vector<int>> got_set(got.begin(), got.end());
    if (got_set.size() != got.size() || got_set != cycle_oracle(g)) {
      pass = false;
      detail = "trial " + std::to_string(trial);
    }
  }
  report(4, "cycle enumeration equals brute force on 200 random tournaments (n=4..7)", pass,
         detail);
}

void criterion_5() {
  bool pass = true;
  std::string detail;
  auto rng = cpceval::substream(5, "acceptance/fas");
  for (int trial = 0; trial < 100 && pass; ++trial) {
    auto g = random_tournament(6, rng);
    auto fas = cpceval::prefcycles::min_feedback_arc_set(g);

    std::vector<int> order(6);
    std::iota(order.begin(), order.end(), 0);
    int best = 36;
    do {
      std::vector<int> pos(6);
      for (int i = 0; i < 6; ++i) pos[order[i]] = i;
      int backward = 0;
      for (int u = 0; u < 6; ++u)
        for (int v = 0; v < 6; ++v)
          if (g.edge[u][v] && pos[u] > pos[v]) ++backward;
      best = std::min(best, backward);
    } while (std::next_permutation(order.begin(), order.end()));

    auto pruned = g;
    for (const auto& [u, v] : fas) {
      if (!g.edge[u][v]) pass = false;  // FAS edge must exist in the graph
      pruned.edge[u][v] = false;
    }
    if (static_cast<int>(fas.size()) != best || !cpceval::prefcycles::is_acyclic(pruned)) {
      pass = false;
      detail = "trial " + std::to_string(trial) + ": got " + std::to_string(fas.size()) +
               " vs brute " + std::to_string(best);
    }
  }
  report(5, "exact feedback arc set matches 720-permutation brute force on 100 tournaments",
         pass, detail);
}

// --------------------------------------------------------------------------
// 6. Wald CI values.

void criterion_6() {
  bool pass = true;
  std::string detail;
  auto [lo, hi] = cpceval::cpccurve::wald_ci(5, 10, 1.96);
  if (std::abs(lo - 0.190) > 1e-3 || std::abs(hi - 0.810) > 1e-3) {
    pass = false;
    detail = "(5,10,1.96) -> " + std::to_string(lo) + "," + std::to_string(hi);
  }
  for (int n = 1; n <= 20; ++n) {
    auto [l0, h0] = cpceval::cpccurve::wald_ci(0, n, 1.96);
    auto [l1, h1] = cpceval::cpccurve::wald_ci(n, n, 1.96);
    if (l0 != 0.0 || h0 != 0.0 || l1 != 1.0 || h1 != 1.0) {
      pass = false;
      detail = "nonzero width at degenerate rate, n=" + std::to_string(n);
    }
  }
  report(6, "Wald CI: (5,10,1.96) -> (0.190, 0.810); zero width at rates 0 and 1", pass,
         detail);
}

// --------------------------------------------------------------------------
// 7. Reference bandit policies, 1000 episodes, horizon 50.

void criterion_7() {
  bool pass = true;
  std::string detail;
  const std::vector<double> grid = {0, 10, 20, 40, 80};
  cpceval::bandit::BanditConfig base;
  base.horizon = 50;
  const int episodes = 1000;
  const std::uint64_t seed = 1;

  auto rand_rows =
      cpceval::bandit::reference_sweep(cpceval::bandit::Policy::random_policy, base, grid,
                                       episodes, seed);
  for (const auto& row : rand_rows) {
    if (std::abs(row.mean_accuracy - 1.0 / 3.0) > 0.03) {
      pass = false;
      detail = "random policy off at std " + std::to_string(row.arm_std);
    }
  }

  auto greedy_rows = cpceval::bandit::reference_sweep(cpceval::bandit::Policy::greedy, base,
                                                      grid, episodes, seed);
  auto ucb_rows =
      cpceval::bandit::reference_sweep(cpceval::bandit::Policy::ucb, base, grid, episodes, seed);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (greedy_rows[i].mean_accuracy > greedy_rows[i - 1].mean_accuracy + 1e-12 ||
        ucb_rows[i].mean_accuracy > ucb_rows[i - 1].mean_accuracy + 1e-12) {
      pass = false;
      detail = "non-monotone accuracy at std " + std::to_string(grid[i]);
    }
  }
  // Every noise-free episode scores exactly 48/50; the mean only accrues
  // summation rounding in the last ulps.
  if (std::abs(greedy_rows[0].mean_accuracy - 48.0 / 50.0) > 1e-12) {
    pass = false;
    detail = "greedy at std=0: " + std::to_string(greedy_rows[0].mean_accuracy);
  }
  if (ucb_rows[3].mean_accuracy < greedy_rows[3].mean_accuracy) {
    pass = false;
    detail = "ucb " + std::to_string(ucb_rows[3].mean_accuracy) + " < greedy " +
             std::to_string(greedy_rows[3].mean_accuracy) + " at std=40";
  }
  report(7, "reference bandit sweep: random ~1/3, greedy/UCB monotone, UCB>=greedy at std=40",
         pass, detail);
}

// --------------------------------------------------------------------------
// 8. Dominance validation, rational and noisy scripted agents.

void criterion_8() {
  bool pass = true;
  std::string detail;
  const std::string state_prompt = "You are picking cards in a deck-building game.";
  auto pool = cpceval::problems::default_card_pool();
  cpceval::prefcycles::ScriptedPreferenceAgent::Options opts;
  opts.ranking = {"Gold",    "Silver", "Copper",   "Province", "Duchy",   "Estate",
                  "Cellar",  "Market", "Merchant", "Militia",  "Mine",    "Moat",
                  "Remodel", "Smithy", "Village",  "Workshop"};
  cpceval::prefcycles::ScriptedPreferenceAgent rational(opts);
  auto correct = cpceval::prefcycles::validate_dominance(rational, pool, state_prompt, 100);
  for (int c : correct) {
    if (c != 100) {
      pass = false;
      detail = "rational agent scored " + std::to_string(c) + "/100";
    }
  }

  // 10% noise on Province vs Duchy (pair index 2).
  opts.noisy_pair = {"Province", "Duchy"};
  opts.noise_rate = 0.1;
  opts.noise_seed = 8;
  cpceval::prefcycles::ScriptedPreferenceAgent noisy(opts);
  auto noisy_correct = cpceval::prefcycles::validate_dominance(noisy, pool, state_prompt, 100);
  if (noisy_correct[0] != 100 || noisy_correct[1] != 100 || noisy_correct[3] != 100) {
    pass = false;
    detail = "noise leaked into a clean pair";
  }
  // Binomial(100, 0.9): 3 sigma = 9.
  if (std::abs(noisy_correct[2] - 90) > 9) {
    pass = false;
    detail = "noisy pair " + std::to_string(noisy_correct[2]) + "/100";
  }
  report(8, "dominance: rational agent (100,100,100,100); 10%-noise pair within 3 sigma of 90",
         pass, detail);
}

// --------------------------------------------------------------------------
// 9. Determinism and interrupted-run resume.

nlohmann::json store_records_sans_keys(const std::string& path) {
  nlohmann::json out = nlohmann::json::array();
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    j.erase("key");  // keys embed the out_dir fingerprint
    out.push_back(j);
  }
  return out;
}

void criterion_9() {
  bool pass = true;
  std::string detail;
  const std::string dir_a = fresh_dir("det_a");
  const std::string dir_b = fresh_dir("det_b");
  const std::string dir_c = fresh_dir("det_resume");
  try {
    cpceval::harness::run_experiment(cpc_config(dir_a, 8));
    cpceval::harness::run_experiment(cpc_config(dir_b, 8));
    if (slurp(dir_a + "/summary.csv") != slurp(dir_b + "/summary.csv") ||
        slurp(dir_a + "/plot.json") != slurp(dir_b + "/plot.json")) {
      pass = false;
      detail = "rerun summaries differ";
    }

    // Interrupt mid generation, then resume.
    int appends = 0;
    cpceval::harness::RunOptions interrupting;
    interrupting.checkpoint_hook = [&] {
      if (++appends == 5) throw std::runtime_error("simulated crash");
    };
    bool threw = false;
    try {
      cpceval::harness::run_experiment(cpc_config(dir_c, 8), interrupting);
    } catch (const std::exception&) {
      threw = true;
    }
    if (!threw) {
      pass = false;
      detail = "interruption hook did not abort the run";
    }
    cpceval::harness::run_experiment(cpc_config(dir_c, 8));
    if (slurp(dir_c + "/summary.csv") != slurp(dir_a + "/summary.csv")) {
      pass = false;
      detail = "resumed summary differs";
    }
    for (const char* kind : {"problems", "transcripts", "judgements", "probes"}) {
      auto resumed = store_records_sans_keys(dir_c + "/" + kind + ".jsonl");
      auto straight = store_records_sans_keys(dir_a + "/" + kind + ".jsonl");
      if (resumed != straight) {
        pass = false;
        detail = std::string("artifact mismatch in ") + kind;
      }
    }
  } catch (const std::exception& e) {
    pass = false;
    detail = e.what();
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  fs::remove_all(dir_c);
  report(9, "byte-identical rerun summaries; resumed run matches artifact-for-artifact", pass,
         detail);
}

// --------------------------------------------------------------------------
// 10. Replanning properties over randomized scripted planners.

void criterion_10() {
  using namespace cpceval::planstack;
  bool pass = true;
  std::string detail;
  auto rng = cpceval::substream(10, "acceptance/replanning");
  static const std::vector<std::string> goals = {"g0", "g1", "g2", "g3", "g4", "g5"};
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<std::size_t> goal_pick(0, goals.size() - 1);
  std::uniform_int_distribution<int> sfx_len(1, 3);
  std::uniform_int_distribution<int> n_rules(1, 3);
  std::uniform_int_distribution<int> stack_len(1, 5);

  for (int trial = 0; trial < 1000 && pass; ++trial) {
    auto random_suffix = [&] {
      std::vector<std::string> sfx;
      int len = sfx_len(rng);
      for (int i = 0; i < len; ++i) sfx.push_back(goals[goal_pick(rng)]);
      return sfx;
    };
    std::vector<PlannerRule> rules;
    int nr = n_rules(rng);
    for (int r = 0; r < nr; ++r)
      rules.push_back({{{"k" + std::to_string(r), coin(rng) ? "a" : "b"}}, random_suffix()});
    rules.push_back({{}, random_suffix()});
    RulePlanner planner(rules);

    std::vector<std::string> ids;
    int len = stack_len(rng);
    for (int i = 0; i < len; ++i) ids.push_back(goals[goal_pick(rng)]);
    PlanStack stack = make_stack(ids);
    WorldInfo info;
    for (int r = 0; r < nr; ++r)
      if (coin(rng)) info.facts["k" + std::to_string(r)] = coin(rng) ? "a" : "b";

    const bool stable = !cpc_criterion(stack, info, planner).has_value();
    PlanStack once = dynamic_replan(stack, info, planner);
    if (stable && once != stack) {
      pass = false;
      detail = "stable stack modified, trial " + std::to_string(trial);
    }
    if (cpc_criterion(once, info, planner).has_value()) {
      pass = false;
      detail = "criterion still fires after replanning, trial " + std::to_string(trial);
    }
    if (dynamic_replan(once, info, planner) != once) {
      pass = false;
      detail = "replanning not idempotent, trial " + std::to_string(trial);
    }
  }
  report(10, "replanning: idempotent, criterion-free afterwards, no-op when stable (1000 cases)",
         pass, detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::cout << (failures == 0 ? "ALL ACCEPTANCE CRITERIA PASSED"
                              : std::to_string(failures) + " CRITERIA FAILED")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
