#include "cpceval/agents.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include <httplib.h>

namespace cpceval::agents {

namespace {

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

nlohmann::json messages_json(const std::vector<ChatMessage>& messages) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : messages) arr.push_back({{"role", m.role}, {"content", m.content}});
  return arr;
}

}  // namespace

RunLog::RunLog(const std::string& path) : writer_(std::make_shared<JsonlWriter>(path)) {}

void RunLog::record(const std::vector<ChatMessage>& messages, const DecodingParams& params,
                    const std::string& response, const std::string& mechanism,
                    std::int64_t t_start_ms, std::int64_t t_end_ms) {
  ++count_;
  if (!writer_) return;
  nlohmann::json req = {{"messages", messages_json(messages)},
                        {"temperature", params.temperature},
                        {"max_tokens", params.max_tokens}};
  if (!params.token_bias.empty()) req["logit_bias"] = params.token_bias;
  writer_->write({{"request", req},
                  {"response", response},
                  {"mechanism", mechanism},
                  {"t_start_ms", t_start_ms},
                  {"t_end_ms", t_end_ms}});
}

std::string complete(AgentBackend& backend, const std::vector<ChatMessage>& messages,
                     const DecodingParams& params, RunLog* log, RetryPolicy retry,
                     const std::string& mechanism) {
  if (messages.empty()) throw std::invalid_argument("complete: no messages");
  int delay_ms = retry.base_delay_ms;
  for (int attempt = 1;; ++attempt) {
    const std::int64_t t0 = now_ms();
    try {
      std::string out = backend.raw_complete(messages, params);
      if (log) log->record(messages, params, out, mechanism, t0, now_ms());
      return out;
    } catch (const std::exception&) {
      if (attempt >= retry.attempts) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      delay_ms *= 2;
    }
  }
}

AnswerPosition classify_answer_position(std::string_view text) {
  const std::string lower = to_lower(text);
  std::size_t pos = std::string::npos;
  for (const char* needle : {"yes", "no"}) {
    std::size_t p = lower.find(needle);
    if (p != std::string::npos) pos = std::min(pos, p);
  }
  if (pos == std::string::npos) return AnswerPosition::none;
  return pos < lower.size() / 2 ? AnswerPosition::early : AnswerPosition::late;
}

CotResult elicit_cot(AgentBackend& backend, const std::string& question,
                     const DecodingParams& params, RunLog* log) {
  if (question.empty()) throw std::invalid_argument("elicit_cot: empty question");
  std::vector<ChatMessage> messages = {
      {"user", question + "\n\n" + std::string(kCotInstruction)}};
  CotResult result;
  result.text = complete(backend, messages, params, log, {}, "cot");
  result.answer_position = classify_answer_position(result.text);
  return result;
}

ForcedChoice forced_choice(AgentBackend& backend, const std::string& prompt,
                           const std::vector<std::string>& allowed, DecodingParams params,
                           RunLog* log, bool allow_scan_fallback) {
  if (allowed.empty()) throw std::invalid_argument("forced_choice: empty answer set");
  std::vector<ChatMessage> messages = {{"user", prompt}};

  if (backend.supports_token_bias()) {
    params.max_tokens = 1;
    params.token_bias.clear();
    for (const auto& tok : allowed) params.token_bias[tok] = 100.0;
    std::string out = complete(backend, messages, params, log, {}, "logit_bias");
    // Trim and compare case-insensitively; an out-of-set token is a protocol
    // error rather than something to reinterpret.
    std::string trimmed = out;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
    trimmed.erase(trimmed.find_last_not_of(" \t\r\n") + 1);
    for (const auto& tok : allowed) {
      if (to_lower(trimmed) == to_lower(tok)) return {tok, "logit_bias"};
    }
    throw std::runtime_error("forced_choice: biased completion outside answer set: " + out);
  }

  if (!allow_scan_fallback)
    throw std::runtime_error("forced_choice: backend lacks token bias and fallback disabled");

  std::string out = complete(backend, messages, params, log, {}, "scan");
  const std::string lower = to_lower(out);
  std::size_t best_pos = std::string::npos;
  const std::string* best = nullptr;
  for (const auto& tok : allowed) {
    std::size_t p = lower.find(to_lower(tok));
    if (p < best_pos) {
      best_pos = p;
      best = &tok;
    }
  }
  if (!best)
    throw std::runtime_error("forced_choice: no allowed token found in completion: " + out);
  return {*best, "scan"};
}

bool extract_yes_no(AgentBackend& backend, const std::string& context, DecodingParams params,
                    RunLog* log) {
  if (context.empty()) throw std::invalid_argument("extract_yes_no: empty context");
  const std::string prompt = context + "\n\n" + std::string(kYesNoPrompt);
  ForcedChoice fc = forced_choice(backend, prompt, {"Yes", "No"}, std::move(params), log);
  return fc.token == "Yes";
}

ScriptedAgent::ScriptedAgent(std::string name, std::vector<Rule> rules,
                             std::string match_after_marker)
    : name_(std::move(name)), rules_(std::move(rules)), marker_(std::move(match_after_marker)) {
  bool has_catchall =
      std::any_of(rules_.begin(), rules_.end(), [](const Rule& r) { return r.pattern == "*"; });
  if (!has_catchall)
    throw std::invalid_argument("ScriptedAgent: catch-all rule \"*\" required");
}

std::string ScriptedAgent::raw_complete(const std::vector<ChatMessage>& messages,
                                        const DecodingParams&) {
  std::string text;
  for (const auto& m : messages) text += m.content + "\n";
  if (!marker_.empty()) {
    std::size_t p = text.rfind(marker_);
    if (p != std::string::npos) text = text.substr(p + marker_.size());
  }
  for (const auto& rule : rules_) {
    if (rule.pattern == "*" || text.find(rule.pattern) != std::string::npos)
      return rule.response;
  }
  return rules_.back().response;  // unreachable: catch-all enforced
}

std::unique_ptr<ScriptedAgent> load_scripted_agent(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scripted agent file: " + path);
  nlohmann::json j;
  in >> j;
  std::vector<ScriptedAgent::Rule> rules;
  for (const auto& r : j.at("rules"))
    rules.push_back({r.at("pattern").get<std::string>(), r.at("response").get<std::string>()});
  return std::make_unique<ScriptedAgent>(
      j.value("name", std::string("scripted")), std::move(rules),
      j.value("match_after_marker", std::string()));
}

HttpChatBackend::HttpChatBackend(Options opts) : opts_(std::move(opts)) {
  if (opts_.base_url.empty()) throw std::invalid_argument("HttpChatBackend: base_url required");
}

std::string HttpChatBackend::raw_complete(const std::vector<ChatMessage>& messages,
                                          const DecodingParams& params) {
  httplib::Client client(opts_.base_url);
  client.set_read_timeout(opts_.timeout_s, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv(opts_.api_key_env.c_str()))
    headers.emplace("Authorization", std::string("Bearer ") + key);

  nlohmann::json body = {{"model", opts_.model},
                         {"messages", messages_json(messages)},
                         {"temperature", params.temperature},
                         {"max_tokens", params.max_tokens}};
  if (!params.token_bias.empty()) body["logit_bias"] = params.token_bias;

  auto res = client.Post(opts_.path, headers, body.dump(), "application/json");
  if (!res) throw std::runtime_error("chat endpoint unreachable: " + opts_.base_url);
  if (res->status != 200)
    throw std::runtime_error("chat endpoint HTTP " + std::to_string(res->status) + ": " +
                             res->body);
  nlohmann::json reply = nlohmann::json::parse(res->body);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error("malformed chat completion response: " + res->body);
  }
}

}  // namespace cpceval::agents
