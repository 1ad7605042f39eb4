#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpceval/harness.hpp"
#include "cpceval/jsonl.hpp"
#include "cpceval/problems.hpp"
#include "cpceval/rng.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;  // section.key=value
};

cpceval::harness::Config load_config(const CommonOpts& opts) {
  auto config = cpceval::harness::Config::parse_file(opts.config_path);
  for (const auto& o : opts.overrides) {
    auto eq = o.find('=');
    auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw std::runtime_error("override must be section.key=value: " + o);
    config.set(o.substr(0, dot), o.substr(dot + 1, eq - dot - 1), o.substr(eq + 1));
  }
  return config;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-c,--config", opts.config_path, "run config file")->required();
  cmd->add_option("-s,--set", opts.overrides, "override, section.key=value");
}

int run_with_experiment(const CommonOpts& opts, const std::string& experiment) {
  auto config = load_config(opts);
  if (!experiment.empty()) config.set("run", "experiment", experiment);
  auto record = cpceval::harness::run_experiment(config);
  std::cout << "run complete: " << record.out_dir << "\n"
            << record.summary.dump(2) << "\n"
            << "missing items: " << record.missing << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluation harness for CPC stepping-back and preference-stability experiments"};
  app.require_subcommand(1);

  // generate: problem datasets only (JSONL, one problem per line).
  auto* gen = app.add_subcommand("generate", "generate a quadratic problem dataset");
  int gen_count = 100, gen_bound = 12;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "problems.jsonl";
  gen->add_option("-n,--count", gen_count, "number of problems");
  gen->add_option("-b,--coeff-bound", gen_bound, "coefficient bound");
  gen->add_option("--seed", gen_seed, "rng seed")->required();
  gen->add_option("-o,--out", gen_out, "output JSONL path");

  CommonOpts cpc_opts, mab_opts, cycles_opts, vj_opts, vd_opts;
  add_common(app.add_subcommand("run-cpc", "run the CPC curve experiment"), cpc_opts);
  add_common(app.add_subcommand("run-mab", "run the multi-armed bandit experiment"), mab_opts);
  add_common(app.add_subcommand("run-cycles", "run the preference cycle experiment"), cycles_opts);
  add_common(app.add_subcommand("validate-judge", "score the switch judge on synthetic data"),
             vj_opts);
  add_common(app.add_subcommand("validate-dominance", "check strict-dominance competence"),
             vd_opts);

  auto* rep = app.add_subcommand("report", "re-render summaries from stored artifacts");
  std::string rep_dir, rep_format = "csv";
  rep->add_option("-d,--dir", rep_dir, "run output directory")->required();
  rep->add_option("-f,--format", rep_format, "csv | plot_json | text_table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      auto rng = cpceval::substream(gen_seed, "problems");
      cpceval::JsonlWriter out(gen_out, /*append=*/false);
      for (int i = 0; i < gen_count; ++i) {
        auto q = cpceval::problems::gen_quadratic(gen_bound, rng);
        out.write({{"id", "p" + std::to_string(i)}, {"a", q.a}, {"b", q.b}, {"c", q.c},
                   {"equation", q.render()}});
      }
      std::cout << "wrote " << gen_count << " problems to " << gen_out << "\n";
      return 0;
    }
    if (app.get_subcommand("run-cpc")->parsed())
      return run_with_experiment(cpc_opts, "cpc_curves");
    if (app.get_subcommand("run-mab")->parsed())
      return run_with_experiment(mab_opts, "bandit");
    if (app.get_subcommand("run-cycles")->parsed())
      return run_with_experiment(cycles_opts, "pref_cycles");
    if (app.get_subcommand("validate-judge")->parsed())
      return run_with_experiment(vj_opts, "validate_judge");
    if (app.get_subcommand("validate-dominance")->parsed())
      return run_with_experiment(vd_opts, "validate_dominance");
    if (rep->parsed()) {
      cpceval::harness::report(rep_dir, rep_format, std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
