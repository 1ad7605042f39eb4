#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpceval/agents.hpp"
#include "cpceval/jsonl.hpp"

namespace cpceval::harness {

// Declarative key/value + nested-section config:
//   [section]
//   key = value      # comment
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string require(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  long get_int(const std::string& section, const std::string& key, long fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  void set(const std::string& section, const std::string& key, const std::string& value);

  nlohmann::json snapshot() const;  // stored with every run record
  // Stable fingerprint of the config contents; artifact keys derive from it.
  std::string fingerprint() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Backend factory. Kinds: scripted (rules_file), perfect_cpc, never_switch,
// scripted_solver, preference (ranking/overrides/noise), http.
std::unique_ptr<agents::AgentBackend> make_backend(const Config& config,
                                                   const std::string& section);

struct RunOptions {
  // Test hook: invoked after every artifact append; throwing simulates an
  // interrupted run, which can then be resumed into the same out_dir.
  std::function<void()> checkpoint_hook;
};

struct RunRecord {
  nlohmann::json config_snapshot;
  std::string out_dir;
  nlohmann::json summary;  // per-experiment summary numbers
  std::vector<std::string> summary_files;
  int missing = 0;  // items lost to backend failures
  double wall_seconds = 0;
};

// Dispatches on [run] experiment: cpc_curves | bandit | pref_cycles |
// validate_judge | validate_dominance. Artifacts persist incrementally under
// out_dir; rerunning with the same config and seed skips completed items.
RunRecord run_experiment(const Config& config, const RunOptions& options = {});

// Re-renders summary files from the stored artifacts of a completed run
// without touching any backend. Formats: csv | plot_json | text_table.
void report(const std::string& out_dir, const std::string& format, std::ostream& out);

}  // namespace cpceval::harness
