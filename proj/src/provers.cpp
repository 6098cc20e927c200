#include "sorryforge/provers.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>
#include <sstream>

#include "sorryforge/errors.hpp"
#include "sorryforge/fs_util.hpp"
#include "sorryforge/lean_syntax.hpp"

namespace fs = std::filesystem;

namespace sorryforge {

namespace {

std::int64_t ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
}

std::string_view trim_view(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  for (;;) {
    std::size_t nl = text.find('\n', start);
    lines.push_back(text.substr(start, nl == std::string_view::npos ? text.npos : nl - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

bool is_fence(std::string_view line) {
  auto t = trim_view(line);
  return t.substr(0, 3) == "```";
}

}  // namespace

// JSON ------------------------------------------------------------------------

json to_json(const AttemptRecord& a) {
  return {{"proposal", to_json(a.proposal)},
          {"verdict", to_json(a.verdict)},
          {"tokens", {{"prompt", a.tokens.prompt}, {"completion", a.tokens.completion}}},
          {"wall_ms", a.wall_ms},
          {"tool_rounds", a.tool_rounds}};
}

AttemptRecord attempt_from_json(const json& j) {
  try {
    AttemptRecord a;
    a.proposal = proposal_from_json(j.at("proposal"));
    a.verdict = verdict_from_json(j.at("verdict"));
    a.tokens.prompt = j.at("tokens").at("prompt").get<std::int64_t>();
    a.tokens.completion = j.at("tokens").at("completion").get<std::int64_t>();
    a.wall_ms = j.at("wall_ms").get<std::int64_t>();
    a.tool_rounds = j.value("tool_rounds", 0);
    return a;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("attempt record: ") + e.what());
  }
}

json to_json(const LlmExchange& ex) {
  json messages = json::array();
  for (const auto& m : ex.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  return {{"model", ex.model_id},
          {"messages", std::move(messages)},
          {"temperature", ex.sampling.temperature},
          {"max_tokens", ex.sampling.max_tokens}};
}

// Scripted client -------------------------------------------------------------

namespace {

ClientScript::Entry parse_entry(const json& j) {
  ClientScript::Entry e;
  if (j.is_string()) {
    e.completion.content = j.get<std::string>();
    return e;
  }
  if (!j.is_object()) throw Error(ErrorCode::MalformedDocument, "client script entry must be a string or object");
  if (j.contains("error")) {
    e.error = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
    return e;
  }
  e.completion.content = j.value("content", std::string());
  e.completion.tokens.prompt = j.value("prompt_tokens", std::int64_t{0});
  e.completion.tokens.completion = j.value("completion_tokens", std::int64_t{0});
  return e;
}

std::vector<ClientScript::Entry> parse_entries(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::MalformedDocument, "client script completions must be a list");
  std::vector<ClientScript::Entry> out;
  for (const auto& e : j) out.push_back(parse_entry(e));
  return out;
}

}  // namespace

ClientScript parse_client_script(const json& document) {
  ClientScript script;
  if (document.is_array()) {
    script.rules.push_back({"", parse_entries(document)});
    return script;
  }
  if (!document.is_object()) throw Error(ErrorCode::MalformedDocument, "client script must be a list or object");
  for (const auto& r : document.value("rules", json::array())) {
    if (!r.is_object() || !r.contains("match")) throw Error(ErrorCode::MalformedDocument, "rule needs \"match\"");
    script.rules.push_back({r["match"].get<std::string>(), parse_entries(r.value("completions", json::array()))});
  }
  if (document.contains("default")) script.fallback = parse_entries(document["default"]);
  return script;
}

ClientScript load_client_script(const fs::path& path) {
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::MalformedDocument, "client script is not JSON: " + path.string());
  return parse_client_script(doc);
}

ScriptedClient::ScriptedClient(std::shared_ptr<const ClientScript> script) : script_(std::move(script)) {}

ChatCompletion ScriptedClient::complete(const LlmExchange& exchange) {
  seen_.push_back(exchange);
  std::string_view first_user;
  for (const auto& m : exchange.messages) {
    if (m.role == "user") {
      first_user = m.content;
      break;
    }
  }
  int rule = -1;
  for (std::size_t i = 0; i < script_->rules.size(); ++i) {
    if (first_user.find(script_->rules[i].match) != std::string_view::npos) {
      rule = static_cast<int>(i);
      break;
    }
  }
  const auto& entries = rule < 0 ? script_->fallback : script_->rules[static_cast<std::size_t>(rule)].completions;
  std::size_t& cursor = cursors_[rule];
  if (cursor >= entries.size()) throw Error(ErrorCode::ClientError, "scripted client has no completion left");
  const auto& entry = entries[cursor++];
  if (entry.error) throw Error(ErrorCode::ClientError, *entry.error);
  return entry.completion;
}

// Search ----------------------------------------------------------------------

namespace {

std::set<std::string> word_tokens(std::string_view text) {
  std::set<std::string> words;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || (static_cast<unsigned char>(c) & 0x80)) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      words.insert(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.insert(std::move(cur));
  return words;
}

}  // namespace

StaticSearchTool::StaticSearchTool(std::vector<SearchResult> corpus, std::size_t limit)
    : corpus_(std::move(corpus)), limit_(limit) {}

StaticSearchTool StaticSearchTool::from_json(const json& document) {
  if (!document.is_array()) throw Error(ErrorCode::MalformedDocument, "search corpus must be a list");
  std::vector<SearchResult> corpus;
  for (const auto& e : document) corpus.push_back({e.at("name").get<std::string>(), e.value("statement", "")});
  return StaticSearchTool(std::move(corpus));
}

std::vector<SearchResult> StaticSearchTool::search(const std::string& query) {
  const auto q = word_tokens(query);
  std::vector<std::pair<int, std::size_t>> scored;
  for (std::size_t i = 0; i < corpus_.size(); ++i) {
    auto doc = word_tokens(corpus_[i].name + " " + corpus_[i].statement);
    int score = 0;
    for (const auto& w : q) score += doc.count(w) ? 1 : 0;
    if (score > 0) scored.emplace_back(-score, i);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<SearchResult> out;
  for (std::size_t k = 0; k < scored.size() && k < limit_; ++k) out.push_back(corpus_[scored[k].second]);
  return out;
}

// Prompting -------------------------------------------------------------------

namespace {

constexpr const char* kSystemPrompt =
    "You are an expert Lean 4 and Mathlib user. The file below contains a `sorry` placeholder at the "
    "indicated position. Write Lean code that replaces exactly that one `sorry` token so the file "
    "compiles. Do not restate the theorem, add imports, add declarations, or use `sorry`. Answer with "
    "one fenced code block containing only the replacement.";

std::string omitted(std::size_t n) { return "-- [... " + std::to_string(n) + " characters omitted ...]"; }

}  // namespace

LlmExchange build_prompt(const ProverTask& task) {
  const auto& loc = task.record.location;
  const std::u32string text = lean::decode_utf8(task.file_text);
  const std::size_t n = text.size();

  // Code-point offsets of the sorry and of its line.
  std::size_t line_start = 0;
  for (int line = 1; line < loc.start_line && line_start < n; ++line) {
    std::size_t nl = text.find(U'\n', line_start);
    line_start = nl == std::u32string::npos ? n : nl + 1;
  }
  std::size_t at = std::min(n, line_start + static_cast<std::size_t>(std::max(0, loc.start_column)));
  std::size_t line_end = text.find(U'\n', at);
  if (line_end == std::u32string::npos) line_end = n;

  std::size_t lo = 0, hi = n;
  const std::size_t budget = task.context_window;
  if (n > budget) {
    lo = at > budget / 2 ? at - budget / 2 : 0;
    hi = std::min(n, lo + budget);
    lo = hi > budget ? hi - budget : 0;
    lo = std::min(lo, line_start);
    hi = std::max(hi, line_end);
  }
  std::string context;
  if (lo > 0) context += omitted(lo) + "\n";
  context += lean::encode_utf8(std::u32string_view(text).substr(lo, hi - lo));
  if (hi < n) context += "\n" + omitted(n - hi);

  std::ostringstream user;
  user << "Repository: " << task.record.repo.remote << "\n"
       << "File: " << loc.path << "\n"
       << "The `sorry` to replace is at line " << loc.start_line << ", column " << loc.start_column
       << ". Its goal is:\n"
       << task.record.debug_info.goal << "\n\n"
       << "```lean\n"
       << context << "\n```\n";

  LlmExchange ex;
  ex.messages.push_back({"system", kSystemPrompt});
  ex.messages.push_back({"user", user.str()});
  return ex;
}

std::string extract_proposal(std::string_view completion) {
  const auto lines = split_lines(completion);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_fence(lines[i])) continue;
    std::vector<std::string_view> body;
    for (std::size_t j = i + 1; j < lines.size() && !is_fence(lines[j]); ++j) body.push_back(lines[j]);
    while (!body.empty() && trim_view(body.front()).empty()) body.erase(body.begin());
    while (!body.empty() && trim_view(body.back()).empty()) body.pop_back();
    // Strip the indentation common to all non-blank lines.
    std::size_t common = std::string_view::npos;
    for (auto l : body) {
      if (trim_view(l).empty()) continue;
      common = std::min(common, l.find_first_not_of(" \t"));
    }
    std::string out;
    for (std::size_t k = 0; k < body.size(); ++k) {
      if (k) out += '\n';
      std::string_view l = body[k];
      if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
      out += l.size() > common ? l.substr(common) : std::string_view(trim_view(l));
    }
    return out;
  }
  return std::string(trim_view(completion));
}

std::optional<ToolCall> parse_tool_call(std::string_view completion) {
  bool in_fence = false;
  for (std::string_view line : split_lines(completion)) {
    if (is_fence(line)) {
      in_fence = !in_fence;
      continue;
    }
    if (in_fence) continue;
    std::string_view t = trim_view(line);
    if (t.empty() || t.front() != '{' || t.find("\"tool\"") == std::string_view::npos) continue;
    json j = json::parse(t, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::MalformedToolCall, "tool call is not a JSON object: " + std::string(t));
    }
    auto tool = j.find("tool");
    auto query = j.find("query");
    if (tool == j.end() || !tool->is_string() || query == j.end() || !query->is_string()) {
      throw Error(ErrorCode::MalformedToolCall, "tool call needs string fields \"tool\" and \"query\"");
    }
    return ToolCall{tool->get<std::string>(), query->get<std::string>()};
  }
  return std::nullopt;
}

// Strategies ------------------------------------------------------------------

std::vector<std::string> default_tactics() {
  return {"trivial", "rfl", "simp", "ring", "linarith", "norm_num", "aesop", "exact?", "grind"};
}

ProverOutcome tactic_prover(const ProverTask& task, const std::vector<std::string>& tactics,
                            const VerifyFn& verify, const std::string& origin) {
  ProverOutcome out;
  for (std::size_t i = 0; i < tactics.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    ProofProposal p{task.record.id, tactics[i], origin, static_cast<int>(i)};
    VerificationVerdict v = verify(p);
    out.attempts.push_back({p, v, {}, ms_since(t0), 0});
    if (v.accepted()) break;
    if (v.status == VerdictStatus::EnvironmentError) {
      out.errors.push_back("environment error at tactic " + tactics[i]);
      break;
    }
  }
  return out;
}

ProverOutcome sample_llm(const ProverTask& task, ChatClient& client, int n, const VerifyFn& verify,
                         const std::string& origin, const std::string& model_id, Sampling sampling) {
  ProverOutcome out;
  LlmExchange seed = build_prompt(task);
  seed.model_id = model_id;
  seed.sampling = sampling;
  for (int i = 0; i < n; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    ChatCompletion c;
    try {
      c = client.complete(seed);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ClientError) throw;
      out.errors.push_back("sample " + std::to_string(i) + ": " + e.what());
      continue;
    }
    ProofProposal p{task.record.id, extract_proposal(c.content), origin, i};
    VerificationVerdict v = verify(p);
    out.attempts.push_back({p, v, c.tokens, ms_since(t0), 0});
    if (v.status == VerdictStatus::EnvironmentError) {
      out.errors.push_back("environment error at sample " + std::to_string(i));
      break;
    }
  }
  return out;
}

namespace {

std::string feedback_message(const VerificationVerdict& v) {
  std::string text = "The proof was rejected: " + std::string(to_string(v.status)) + "\n";
  for (const auto& m : v.messages) text += m + "\n";
  text += "Please reply with a corrected replacement in one fenced code block.";
  return text;
}

std::string tool_instructions(int max_tool_rounds) {
  return "\n\nBefore answering you may search the library. To search, reply with a single line holding only "
         "a JSON object such as {\"tool\": \"search\", \"query\": \"sum of squares is nonnegative\"}, "
         "outside any code block. Results arrive in a tool message. You have at most " +
         std::to_string(max_tool_rounds) + " searches per attempt.";
}

std::string run_tool(const ToolSet& tools, const ToolCall& call) {
  auto it = tools.find(call.tool);
  if (it == tools.end()) return "error: unknown tool \"" + call.tool + "\"";
  try {
    json results = json::array();
    for (const auto& r : it->second->search(call.query)) {
      results.push_back({{"name", r.name}, {"statement", r.statement}});
    }
    return results.dump();
  } catch (const std::exception& e) {
    return std::string("error: ") + e.what();
  }
}

ProverOutcome iterate(const ProverTask& task, ChatClient& client, const ToolSet* tools, const VerifyFn& verify,
                      int max_iter, int max_tool_rounds, const std::string& origin, const std::string& model_id,
                      Sampling sampling) {
  ProverOutcome out;
  LlmExchange ex = build_prompt(task);
  ex.model_id = model_id;
  ex.sampling = sampling;
  if (tools) ex.messages.front().content += tool_instructions(max_tool_rounds);

  for (int iter = 0; iter < max_iter; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    TokenUsage used;
    int rounds = 0;
    bool refused = false;
    std::string proposal_text;
    for (;;) {
      ChatCompletion c;
      try {
        c = client.complete(ex);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ClientError) throw;
        out.errors.push_back("iteration " + std::to_string(iter) + ": " + e.what());
        return out;
      }
      used += c.tokens;
      ex.messages.push_back({"assistant", c.content});

      if (tools) {
        std::optional<ToolCall> call;
        std::optional<std::string> malformed;
        try {
          call = parse_tool_call(c.content);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::MalformedToolCall) throw;
          malformed = e.what();
        }
        if (call || malformed) {
          if (rounds < max_tool_rounds) {
            ++rounds;
            ex.messages.push_back({"tool", malformed ? "error: " + *malformed : run_tool(*tools, *call)});
            continue;
          }
          if (!refused) {
            refused = true;
            ex.messages.push_back({"user", "Tool budget exhausted (" + std::to_string(max_tool_rounds) +
                                               " calls). You must now propose a proof in one fenced code block."});
            continue;
          }
          // Still calling tools after the refusal: take the text as the proposal.
        }
      }
      proposal_text = extract_proposal(c.content);
      break;
    }

    ProofProposal p{task.record.id, proposal_text, origin, iter};
    VerificationVerdict v = verify(p);
    out.attempts.push_back({p, v, used, ms_since(t0), rounds});
    if (v.accepted()) break;
    if (v.status == VerdictStatus::EnvironmentError) {
      out.errors.push_back("environment error at iteration " + std::to_string(iter));
      break;
    }
    ex.messages.push_back({"user", feedback_message(v)});
  }
  return out;
}

}  // namespace

ProverOutcome self_correct_loop(const ProverTask& task, ChatClient& client, const VerifyFn& verify, int max_iter,
                                const std::string& origin, const std::string& model_id, Sampling sampling) {
  return iterate(task, client, nullptr, verify, max_iter, 0, origin, model_id, sampling);
}

ProverOutcome agentic_loop(const ProverTask& task, ChatClient& client, const ToolSet& tools, const VerifyFn& verify,
                           int max_iter, int max_tool_rounds, const std::string& origin,
                           const std::string& model_id, Sampling sampling) {
  return iterate(task, client, &tools, verify, max_iter, max_tool_rounds, origin, model_id, sampling);
}

// Configuration ---------------------------------------------------------------

std::string_view to_string(ProverKind kind) {
  switch (kind) {
    case ProverKind::Tactic: return "tactic";
    case ProverKind::Sample: return "sample";
    case ProverKind::SelfCorrect: return "self_correct";
    case ProverKind::Agentic: return "agentic";
  }
  return "tactic";
}

std::optional<ProverKind> parse_prover_kind(std::string_view text) {
  for (ProverKind k : {ProverKind::Tactic, ProverKind::Sample, ProverKind::SelfCorrect, ProverKind::Agentic}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

namespace {

std::string default_group(ProverKind kind) {
  switch (kind) {
    case ProverKind::Tactic: return "Deterministic";
    case ProverKind::Sample: return "General-purpose LLM";
    default: return "Iterative";
  }
}

}  // namespace

json to_json(const ProverConfig& c) {
  json j = {{"id", c.id},
            {"label", c.label},
            {"group", c.group},
            {"kind", std::string(to_string(c.kind))},
            {"model", c.model_id},
            {"temperature", c.sampling.temperature},
            {"max_tokens", c.sampling.max_tokens}};
  switch (c.kind) {
    case ProverKind::Tactic: j["tactics"] = c.tactics; break;
    case ProverKind::Sample: j["n"] = c.n; break;
    case ProverKind::Agentic: j["max_tool_rounds"] = c.max_tool_rounds; [[fallthrough]];
    case ProverKind::SelfCorrect: j["max_iter"] = c.max_iter; break;
  }
  if (!c.client.is_null()) j["client"] = c.client;
  if (!c.tools.is_null()) j["tools"] = c.tools;
  return j;
}

std::vector<ProverConfig> load_prover_configs(const json& document) {
  const json& list = document.is_object() ? document.value("provers", json()) : document;
  if (!list.is_array()) throw Error(ErrorCode::MalformedDocument, "prover config needs a \"provers\" list");
  std::vector<ProverConfig> out;
  std::set<std::string> ids;
  for (const auto& p : list) {
    try {
      ProverConfig c;
      c.id = p.at("id").get<std::string>();
      if (c.id.empty() || c.id.find('/') != std::string::npos) {
        throw Error(ErrorCode::MalformedDocument, "prover id must be a non-empty file name: " + c.id);
      }
      if (!ids.insert(c.id).second) throw Error(ErrorCode::MalformedDocument, "duplicate prover id " + c.id);
      auto kind = parse_prover_kind(p.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::MalformedDocument, "unknown prover kind " + p["kind"].dump());
      c.kind = *kind;
      c.label = p.value("label", c.id);
      c.group = p.value("group", default_group(c.kind));
      if (p.contains("tactics")) c.tactics = p["tactics"].get<std::vector<std::string>>();
      c.n = p.value("n", c.n);
      c.max_iter = p.value("max_iter", c.max_iter);
      c.max_tool_rounds = p.value("max_tool_rounds", c.max_tool_rounds);
      c.model_id = p.value("model", std::string());
      c.sampling.temperature = p.value("temperature", c.kind == ProverKind::Sample ? 1.0 : 0.7);
      c.sampling.max_tokens = p.value("max_tokens", c.sampling.max_tokens);
      c.client = p.value("client", json());
      c.tools = p.value("tools", json());
      if (c.kind == ProverKind::Tactic && c.tactics.empty()) {
        throw Error(ErrorCode::MalformedDocument, "prover " + c.id + " has no tactics");
      }
      if (c.kind != ProverKind::Tactic && !c.client.is_object()) {
        throw Error(ErrorCode::MalformedDocument, "prover " + c.id + " needs a client");
      }
      if (c.n < 1 || c.max_iter < 1 || c.max_tool_rounds < 0) {
        throw Error(ErrorCode::MalformedDocument, "prover " + c.id + " has a non-positive budget");
      }
      out.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedDocument, std::string("prover config: ") + e.what());
    }
  }
  return out;
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

ClientFactory make_client_factory(const json& cfg, const fs::path& base_dir) {
  const std::string type = cfg.value("type", std::string("scripted"));
  if (type == "scripted") {
    auto script = std::make_shared<const ClientScript>(
        load_client_script(resolve(base_dir, cfg.at("script").get<std::string>())));
    return [script] { return std::make_unique<ScriptedClient>(script); };
  }
  if (type == "http") {
    HttpClientConfig http;
    http.base_url = cfg.at("base_url").get<std::string>();
    if (auto env = cfg.value("api_key_env", std::string()); !env.empty()) {
      if (const char* key = std::getenv(env.c_str())) http.api_key = key;
    }
    http.timeout = std::chrono::seconds(cfg.value("timeout_s", 600));
    return [http] { return std::make_unique<HttpChatClient>(http); };
  }
  throw Error(ErrorCode::MalformedDocument, "unknown client type " + type);
}

ToolSet make_tools(const json& cfg, const fs::path& base_dir) {
  ToolSet tools;
  if (cfg.is_null()) return tools;
  for (const auto& t : cfg) {
    const std::string name = t.value("name", std::string("search"));
    const std::string type = t.value("type", std::string("static"));
    if (type == "static") {
      json corpus = json::parse(read_file(resolve(base_dir, t.at("path").get<std::string>())));
      tools[name] = std::make_shared<StaticSearchTool>(StaticSearchTool::from_json(corpus));
    } else if (type == "http") {
      tools[name] = std::make_shared<HttpSearchTool>(t.at("url").get<std::string>(), t.value("limit", 5));
    } else {
      throw Error(ErrorCode::MalformedDocument, "unknown tool type " + type);
    }
  }
  return tools;
}

class ConfiguredProver final : public Prover {
 public:
  ConfiguredProver(ProverConfig config, ClientFactory clients, ToolSet tools)
      : config_(std::move(config)), clients_(std::move(clients)), tools_(std::move(tools)) {}

  const ProverConfig& config() const override { return config_; }

  ProverOutcome run(const ProverTask& task, const VerifyFn& verify) override {
    const auto& c = config_;
    switch (c.kind) {
      case ProverKind::Tactic:
        return tactic_prover(task, c.tactics, verify, c.id);
      case ProverKind::Sample: {
        auto client = clients_();
        return sample_llm(task, *client, c.n, verify, c.id, c.model_id, c.sampling);
      }
      case ProverKind::SelfCorrect: {
        auto client = clients_();
        return self_correct_loop(task, *client, verify, c.max_iter, c.id, c.model_id, c.sampling);
      }
      case ProverKind::Agentic: {
        auto client = clients_();
        return agentic_loop(task, *client, tools_, verify, c.max_iter, c.max_tool_rounds, c.id, c.model_id,
                            c.sampling);
      }
    }
    return {};
  }

 private:
  ProverConfig config_;
  ClientFactory clients_;
  ToolSet tools_;
};

}  // namespace

std::unique_ptr<Prover> make_prover(const ProverConfig& config, const fs::path& base_dir) {
  try {
    ClientFactory clients;
    if (config.kind != ProverKind::Tactic) clients = make_client_factory(config.client, base_dir);
    return std::make_unique<ConfiguredProver>(config, std::move(clients), make_tools(config.tools, base_dir));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, "prover " + config.id + ": " + e.what());
  }
}

}  // namespace sorryforge
