#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cpceval/jsonl.hpp"

namespace cpceval::agents {

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

struct DecodingParams {
  double temperature = 0.0;
  int max_tokens = 1024;
  std::map<std::string, double> token_bias;  // token string -> weight
};

// Pluggable completion backend hosting the target LLM (or an offline double).
class AgentBackend {
 public:
  virtual ~AgentBackend() = default;
  virtual std::string model_name() const = 0;
  virtual bool supports_token_bias() const { return false; }
  // Single completion attempt; throws on transport or protocol failure.
  virtual std::string raw_complete(const std::vector<ChatMessage>& messages,
                                   const DecodingParams& params) = 0;
};

// JSONL log of every request/response pair in a run, prompts verbatim.
class RunLog {
 public:
  RunLog() = default;  // disabled log
  explicit RunLog(const std::string& path);

  void record(const std::vector<ChatMessage>& messages, const DecodingParams& params,
              const std::string& response, const std::string& mechanism,
              std::int64_t t_start_ms, std::int64_t t_end_ms);
  std::size_t count() const { return count_; }

 private:
  std::shared_ptr<JsonlWriter> writer_;
  std::size_t count_ = 0;
};

struct RetryPolicy {
  int attempts = 3;
  int base_delay_ms = 250;  // doubled per retry
};

// Completion with logging and bounded exponential-backoff retry. After the
// last failed attempt the error propagates; callers mark the sample missing
// rather than dropping it silently.
std::string complete(AgentBackend& backend, const std::vector<ChatMessage>& messages,
                     const DecodingParams& params, RunLog* log = nullptr,
                     RetryPolicy retry = {}, const std::string& mechanism = "free");

inline constexpr std::string_view kCotInstruction =
    "Think through the question but do not answer yet.";
inline constexpr std::string_view kYesNoPrompt = "Respond Yes or No.";

enum class AnswerPosition { early, late, none };

// Position of the first "yes"/"no" substring: first half, second half, or absent.
AnswerPosition classify_answer_position(std::string_view text);

struct CotResult {
  std::string text;
  AnswerPosition answer_position = AnswerPosition::none;
};

CotResult elicit_cot(AgentBackend& backend, const std::string& question,
                     const DecodingParams& params = {}, RunLog* log = nullptr);

struct ForcedChoice {
  std::string token;      // always a member of the allowed set
  std::string mechanism;  // "logit_bias" | "scan"
};

// Single-step answer constrained to `allowed`. Uses logit bias when the
// backend supports it (known caveat: biasing can distort the answer when the
// model prefers out-of-set tokens); otherwise falls back to a case-insensitive
// first-allowed-token scan of a free completion, if enabled.
ForcedChoice forced_choice(AgentBackend& backend, const std::string& prompt,
                           const std::vector<std::string>& allowed,
                           DecodingParams params = {}, RunLog* log = nullptr,
                           bool allow_scan_fallback = true);

// Appends the fixed extraction prompt, forces {Yes, No}, returns Yes -> true.
bool extract_yes_no(AgentBackend& backend, const std::string& context,
                    DecodingParams params = {}, RunLog* log = nullptr);

// Playback backend: first matching substring pattern wins; "*" matches
// anything and a catch-all rule is mandatory so the agent is total. When
// `match_after_marker` is set, patterns are matched only against the prompt
// text after the last occurrence of that marker.
class ScriptedAgent : public AgentBackend {
 public:
  struct Rule {
    std::string pattern;
    std::string response;
  };

  ScriptedAgent(std::string name, std::vector<Rule> rules,
                std::string match_after_marker = "");

  std::string model_name() const override { return name_; }
  std::string raw_complete(const std::vector<ChatMessage>& messages,
                           const DecodingParams& params) override;

 private:
  std::string name_;
  std::vector<Rule> rules_;
  std::string marker_;
};

// JSON rules file: {"name": ..., "match_after_marker"?: ...,
//                   "rules": [{"pattern": ..., "response": ...}, ...]}.
std::unique_ptr<ScriptedAgent> load_scripted_agent(const std::string& path);

// Chat-completions JSON endpoint. API key read from an environment variable,
// never from configuration files.
class HttpChatBackend : public AgentBackend {
 public:
  struct Options {
    std::string base_url;  // e.g. "http://localhost:8080"
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env = "CPCEVAL_API_KEY";
    int timeout_s = 120;
  };

  explicit HttpChatBackend(Options opts);

  std::string model_name() const override { return opts_.model; }
  bool supports_token_bias() const override { return true; }
  std::string raw_complete(const std::vector<ChatMessage>& messages,
                           const DecodingParams& params) override;

 private:
  Options opts_;
};

}  // namespace cpceval::agents
