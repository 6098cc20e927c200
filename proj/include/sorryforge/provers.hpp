#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sorryforge/core_model.hpp"

namespace sorryforge {

struct ProverTask {
  SorryRecord record;
  std::string file_text;
  std::size_t context_window = 20000;  // characters of file context in the prompt
};

struct TokenUsage {
  std::int64_t prompt = 0;
  std::int64_t completion = 0;

  std::int64_t total() const { return prompt + completion; }
  TokenUsage& operator+=(const TokenUsage& o) {
    prompt += o.prompt;
    completion += o.completion;
    return *this;
  }
  bool operator==(const TokenUsage&) const = default;
};

struct AttemptRecord {
  ProofProposal proposal;
  VerificationVerdict verdict;
  TokenUsage tokens;
  std::int64_t wall_ms = 0;
  int tool_rounds = 0;

  bool operator==(const AttemptRecord&) const = default;
};

json to_json(const AttemptRecord& attempt);
AttemptRecord attempt_from_json(const json& j);

// Attempts plus the failures that did not produce one (client errors).
struct ProverOutcome {
  std::vector<AttemptRecord> attempts;
  std::vector<std::string> errors;
};

using VerifyFn = std::function<VerificationVerdict(const ProofProposal&)>;

// Chat transcripts ------------------------------------------------------------

struct ChatMessage {
  std::string role;  // system | user | assistant | tool
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct Sampling {
  double temperature = 1.0;
  int max_tokens = 4096;
};

struct LlmExchange {
  std::vector<ChatMessage> messages;  // messages[0] is the system prompt
  std::string model_id;
  Sampling sampling;
};

json to_json(const LlmExchange& exchange);

struct ChatCompletion {
  std::string content;
  TokenUsage tokens;
};

// One conversation partner. Instances are used by one prover run at a time.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  /// Throws Error(ClientError).
  virtual ChatCompletion complete(const LlmExchange& exchange) = 0;
};

using ClientFactory = std::function<std::unique_ptr<ChatClient>()>;

// Canned completions. A JSON list is replayed in order; an object
// {"rules": [{"match", "completions"}], "default": [...]} replays the
// completions of the first rule whose `match` occurs in the first user
// message. A completion is a string, {content, prompt_tokens,
// completion_tokens}, or {"error": text}.
struct ClientScript {
  struct Entry {
    std::optional<std::string> error;
    ChatCompletion completion;
  };
  struct Rule {
    std::string match;
    std::vector<Entry> completions;
  };
  std::vector<Rule> rules;      // a plain list becomes one rule matching ""
  std::vector<Entry> fallback;  // "default"
};

ClientScript parse_client_script(const json& document);
ClientScript load_client_script(const std::filesystem::path& path);

class ScriptedClient final : public ChatClient {
 public:
  explicit ScriptedClient(std::shared_ptr<const ClientScript> script);
  ChatCompletion complete(const LlmExchange& exchange) override;
  /// Every exchange this client has seen, for inspection.
  const std::vector<LlmExchange>& transcript() const { return seen_; }

 private:
  std::shared_ptr<const ClientScript> script_;
  std::map<int, std::size_t> cursors_;  // rule index (-1: default) -> next entry
  std::vector<LlmExchange> seen_;
};

struct HttpClientConfig {
  std::string base_url;  // e.g. "https://api.openai.com/v1"
  std::string api_key;   // sent as a bearer token when non-empty
  std::chrono::seconds timeout{600};
};

// OpenAI-compatible POST {base_url}/chat/completions.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(HttpClientConfig config);
  ChatCompletion complete(const LlmExchange& exchange) override;

 private:
  HttpClientConfig config_;
};

// Search tools ----------------------------------------------------------------

struct SearchResult {
  std::string name;
  std::string statement;
};

class SearchTool {
 public:
  virtual ~SearchTool() = default;
  virtual std::vector<SearchResult> search(const std::string& query) = 0;
};

// Results from a fixed corpus, ranked by shared lowercase word tokens.
class StaticSearchTool final : public SearchTool {
 public:
  explicit StaticSearchTool(std::vector<SearchResult> corpus, std::size_t limit = 5);
  static StaticSearchTool from_json(const json& document);
  std::vector<SearchResult> search(const std::string& query) override;

 private:
  std::vector<SearchResult> corpus_;
  std::size_t limit_;
};

// POST {"query", "num_results"} to `url`; expects a list of {name, statement}
// (or {"results": [...]}).
class HttpSearchTool final : public SearchTool {
 public:
  HttpSearchTool(std::string url, std::size_t limit = 5, std::chrono::seconds timeout = std::chrono::seconds(60));
  std::vector<SearchResult> search(const std::string& query) override;

 private:
  std::string url_;
  std::size_t limit_;
  std::chrono::seconds timeout_;
};

using ToolSet = std::map<std::string, std::shared_ptr<SearchTool>>;

// Prompting -------------------------------------------------------------------

/// System prompt plus one user message with the remote, path, goal and the
/// file text cut symmetrically around the sorry to context_window characters.
/// Each cut is marked by a line "-- [... N characters omitted ...]".
LlmExchange build_prompt(const ProverTask& task);

/// First fenced code block, or the whole completion when there is none.
std::string extract_proposal(std::string_view completion);

struct ToolCall {
  std::string tool;
  std::string query;
};

/// A line outside code fences holding a JSON object with a "tool" key.
/// Throws Error(MalformedToolCall) when such a line does not parse into
/// {tool, query}.
std::optional<ToolCall> parse_tool_call(std::string_view completion);

// Strategies ------------------------------------------------------------------

std::vector<std::string> default_tactics();

ProverOutcome tactic_prover(const ProverTask& task, const std::vector<std::string>& tactics,
                            const VerifyFn& verify, const std::string& origin = "tactic");

ProverOutcome sample_llm(const ProverTask& task, ChatClient& client, int n, const VerifyFn& verify,
                         const std::string& origin = "sample", const std::string& model_id = "",
                         Sampling sampling = {1.0, 4096});

ProverOutcome self_correct_loop(const ProverTask& task, ChatClient& client, const VerifyFn& verify,
                                int max_iter = 16, const std::string& origin = "self_correct",
                                const std::string& model_id = "", Sampling sampling = {0.7, 4096});

ProverOutcome agentic_loop(const ProverTask& task, ChatClient& client, const ToolSet& tools,
                           const VerifyFn& verify, int max_iter = 16, int max_tool_rounds = 5,
                           const std::string& origin = "agentic", const std::string& model_id = "",
                           Sampling sampling = {0.7, 4096});

enum class ProverKind { Tactic, Sample, SelfCorrect, Agentic };

std::string_view to_string(ProverKind kind);
std::optional<ProverKind> parse_prover_kind(std::string_view text);

struct ProverConfig {
  std::string id;
  std::string label;  // report row name; defaults to id
  std::string group;  // report section; defaults by kind
  ProverKind kind = ProverKind::Tactic;
  std::vector<std::string> tactics = default_tactics();
  int n = 32;
  int max_iter = 16;
  int max_tool_rounds = 5;
  std::string model_id;
  Sampling sampling;
  json client;  // {"type": "scripted", "script"} | {"type": "http", "base_url", "api_key_env"}
  json tools;   // [{"name", "type": "static", "path"} | {"name", "type": "http", "url"}]
};

json to_json(const ProverConfig& config);

/// {"provers": [...]} or a bare list. Throws Error(MalformedDocument).
std::vector<ProverConfig> load_prover_configs(const json& document);

class Prover {
 public:
  virtual ~Prover() = default;
  virtual const ProverConfig& config() const = 0;
  virtual ProverOutcome run(const ProverTask& task, const VerifyFn& verify) = 0;
};

/// Relative paths inside client/tool configs resolve against `base_dir`.
std::unique_ptr<Prover> make_prover(const ProverConfig& config, const std::filesystem::path& base_dir);

}  // namespace sorryforge
