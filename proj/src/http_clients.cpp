#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "sorryforge/errors.hpp"
#include "sorryforge/provers.hpp"

namespace sorryforge {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

SplitUrl split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorCode::ClientError, "not an absolute URL: " + url);
  auto slash = url.find('/', scheme + 3);
  SplitUrl out{url.substr(0, slash), slash == std::string::npos ? "" : url.substr(slash)};
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

json post_json(const std::string& url, const json& body, const std::string& bearer, std::chrono::seconds timeout) {
  SplitUrl u = split_url(url);
  httplib::Client client(u.origin);
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);
  auto res = client.Post(u.path.empty() ? "/" : u.path, headers, body.dump(), "application/json");
  if (!res) throw Error(ErrorCode::ClientError, url + ": " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::ClientError, url + ": HTTP " + std::to_string(res->status) + " " + res->body.substr(0, 500));
  }
  json j = json::parse(res->body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ClientError, url + ": response is not JSON");
  return j;
}

}  // namespace

HttpChatClient::HttpChatClient(HttpClientConfig config) : config_(std::move(config)) {}

ChatCompletion HttpChatClient::complete(const LlmExchange& exchange) {
  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  json reply = post_json(url + "/chat/completions", to_json(exchange), config_.api_key, config_.timeout);
  try {
    ChatCompletion c;
    const json& message = reply.at("choices").at(0).at("message");
    c.content = message.at("content").is_null() ? std::string() : message.at("content").get<std::string>();
    if (auto usage = reply.find("usage"); usage != reply.end() && usage->is_object()) {
      c.tokens.prompt = usage->value("prompt_tokens", std::int64_t{0});
      c.tokens.completion = usage->value("completion_tokens", std::int64_t{0});
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ClientError, std::string("unexpected chat completion shape: ") + e.what());
  }
}

HttpSearchTool::HttpSearchTool(std::string url, std::size_t limit, std::chrono::seconds timeout)
    : url_(std::move(url)), limit_(limit), timeout_(timeout) {}

std::vector<SearchResult> HttpSearchTool::search(const std::string& query) {
  json reply = post_json(url_, {{"query", query}, {"num_results", limit_}}, "", timeout_);
  const json& list = reply.is_object() ? reply.value("results", json::array()) : reply;
  std::vector<SearchResult> out;
  if (!list.is_array()) return out;
  for (const auto& r : list) {
    if (!r.is_object()) continue;
    out.push_back({r.value("name", std::string()), r.value("statement", std::string())});
    if (out.size() >= limit_) break;
  }
  return out;
}

}  // namespace sorryforge
