#include "sorryforge/verifier.hpp"

#include <algorithm>
#include <set>

#include "sorryforge/fs_util.hpp"
#include "sorryforge/lean_syntax.hpp"
#include "sorryforge/scanner.hpp"

namespace fs = std::filesystem;

namespace sorryforge {

namespace {

[[noreturn]] void span_mismatch(const SourceLocation& loc, const std::string& why) {
  throw Error(ErrorCode::SpanMismatch, loc.path + ":" + std::to_string(loc.start_line) + ":" +
                                           std::to_string(loc.start_column) + ": " + why);
}

bool is_continuation_byte(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

}  // namespace

SpliceResult splice_proposal(std::string_view source, const SourceLocation& location,
                             std::string_view proposal) {
  if (location.start_line < 1 || location.start_column < 0) span_mismatch(location, "invalid position");

  std::size_t offset = 0;
  for (int line = 1; line < location.start_line; ++line) {
    std::size_t nl = source.find('\n', offset);
    if (nl == std::string_view::npos) span_mismatch(location, "line past end of file");
    offset = nl + 1;
  }
  for (int col = 0; col < location.start_column; ++col) {
    if (offset >= source.size() || source[offset] == '\n') span_mismatch(location, "column past end of line");
    ++offset;
    while (offset < source.size() && is_continuation_byte(source[offset])) ++offset;
  }
  constexpr std::string_view kSorry = "sorry";
  if (source.substr(offset, kSorry.size()) != kSorry) {
    span_mismatch(location, "expected sorry, found \"" + std::string(source.substr(offset, kSorry.size())) + "\"");
  }

  while (!proposal.empty() && (proposal.back() == '\n' || proposal.back() == '\r' || proposal.back() == ' ' ||
                               proposal.back() == '\t')) {
    proposal.remove_suffix(1);
  }
  const std::string indent(static_cast<std::size_t>(location.start_column), ' ');
  std::string replacement;
  replacement.reserve(proposal.size());
  std::size_t start = 0;
  for (bool first = true;; first = false) {
    std::size_t nl = proposal.find('\n', start);
    std::string_view line = proposal.substr(start, nl == std::string_view::npos ? proposal.npos : nl - start);
    if (!first) {
      replacement += '\n';
      if (!line.empty() && line != "\r") replacement += indent;
    }
    replacement += line;
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }

  SpliceResult result;
  result.text.reserve(source.size() + replacement.size());
  result.text.append(source.substr(0, offset));
  result.text.append(replacement);
  result.text.append(source.substr(offset + kSorry.size()));
  result.replaced_span = location;
  result.replaced_span.end_line = location.start_line;
  result.replaced_span.end_column = location.start_column + static_cast<int>(kSorry.size());
  return result;
}

std::optional<std::string> enclosing_declaration(std::string_view source, int line) {
  static const std::set<std::string> kDeclKeywords = {"theorem", "lemma", "def", "instance", "abbrev", "example"};
  const std::vector<ScanHit> idents = scan_identifiers(source);

  // Code-point lines, to see what lies between a keyword and the next identifier.
  std::vector<std::u32string> lines;
  {
    std::u32string all = lean::decode_utf8(source);
    std::size_t start = 0;
    for (;;) {
      std::size_t nl = all.find(U'\n', start);
      lines.push_back(all.substr(start, nl == std::u32string::npos ? std::u32string::npos : nl - start));
      if (nl == std::u32string::npos) break;
      start = nl + 1;
    }
  }
  auto gap_is_blank = [&](const ScanHit& a, const ScanHit& b) {
    if (a.location.start_line != b.location.start_line) return false;
    const std::u32string& text = lines[static_cast<std::size_t>(a.location.start_line - 1)];
    for (int c = a.location.end_column; c < b.location.start_column; ++c) {
      char32_t ch = text[static_cast<std::size_t>(c)];
      if (ch != ' ' && ch != '\t') return false;
    }
    return true;
  };

  // Each scope is a namespace (with its name) or an anonymous/named section.
  struct Scope {
    bool is_namespace;
    std::string name;
  };
  std::vector<Scope> scopes;
  std::optional<std::string> current;
  bool inside = false;

  for (std::size_t i = 0; i < idents.size() && idents[i].location.start_line <= line; ++i) {
    const ScanHit& tok = idents[i];
    const ScanHit* next = i + 1 < idents.size() ? &idents[i + 1] : nullptr;
    const bool next_on_line = next && next->location.start_line == tok.location.start_line;
    if (tok.token == "namespace" && next_on_line) {
      scopes.push_back({true, next->token});
      ++i;
    } else if (tok.token == "section") {
      scopes.push_back({false, next_on_line ? next->token : ""});
      if (next_on_line) ++i;
    } else if (tok.token == "end") {
      // Only pop when the name matches the innermost scope.
      std::string name = next_on_line ? next->token : "";
      if (!scopes.empty() && scopes.back().name == name) {
        scopes.pop_back();
        if (next_on_line) ++i;
      }
    } else if (kDeclKeywords.count(tok.token)) {
      inside = true;
      current.reset();
      if (tok.token != "example" && next && gap_is_blank(tok, *next)) {
        std::string name = next->token;
        if (name.rfind("_root_.", 0) == 0) {
          name = name.substr(7);
        } else {
          std::string prefix;
          for (const auto& s : scopes) {
            if (s.is_namespace) prefix += s.name + ".";
          }
          name = prefix + name;
        }
        current = name;
        ++i;
      }
    }
  }
  if (!inside) return std::nullopt;
  return current;
}

std::vector<std::string> parse_axiom_report(std::string_view text) {
  std::vector<std::string> axioms;
  constexpr std::string_view kMarker = "depends on axioms:";
  std::size_t at = text.find(kMarker);
  if (at == std::string_view::npos) return axioms;
  std::size_t open = text.find('[', at);
  std::size_t close = text.find(']', open == std::string_view::npos ? at : open);
  if (open == std::string_view::npos || close == std::string_view::npos) return axioms;
  std::string_view list = text.substr(open + 1, close - open - 1);
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t comma = list.find(',', start);
    std::string_view item = list.substr(start, comma == std::string_view::npos ? list.npos : comma - start);
    auto b = item.find_first_not_of(" \t\r\n");
    auto e = item.find_last_not_of(" \t\r\n");
    if (b != std::string_view::npos) axioms.emplace_back(item.substr(b, e - b + 1));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return axioms;
}

namespace {

class TempFile {
 public:
  TempFile(fs::path path, std::string_view contents) : path_(std::move(path)) {
    write_file_atomic(path_, contents);
  }
  ~TempFile() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

 private:
  fs::path path_;
};

std::string spliced_name(const fs::path& original) {
  std::string suffix = unique_suffix();
  std::replace(suffix.begin(), suffix.end(), '-', '_');
  return original.stem().string() + "_sorryforge_" + suffix + original.extension().string();
}

std::vector<std::string> normalized_goals(const std::vector<ReplSorry>& sorries) {
  std::vector<std::string> goals;
  goals.reserve(sorries.size());
  for (const auto& s : sorries) goals.push_back(normalize_goal(s.goal));
  std::sort(goals.begin(), goals.end());
  return goals;
}

std::string base_name(const std::string& ident) {
  auto dot = ident.rfind('.');
  return dot == std::string::npos ? ident : ident.substr(dot + 1);
}

}  // namespace

VerificationVerdict verify_proposal(ReplSession& session, const SorryRecord& record,
                                    const ProofProposal& proposal, const VerifyOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  auto verdict = [&](VerdictStatus status, std::vector<std::string> messages = {}) {
    VerificationVerdict v;
    v.status = status;
    v.messages = std::move(messages);
    v.elapsed_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    return v;
  };

  const fs::path root = session.workspace().root;
  const fs::path relative = record.location.path;

  try {
    const std::string original = read_file(root / relative);
    const SpliceResult spliced = splice_proposal(original, record.location, proposal.text);

    const ReplResponse baseline = session.check_file(FileRequest{relative.string(), std::nullopt}, options.timeout);
    if (baseline.has_errors()) {
      std::vector<std::string> msgs{"original file does not elaborate"};
      for (auto& m : baseline.error_messages()) msgs.push_back(std::move(m));
      return verdict(VerdictStatus::EnvironmentError, std::move(msgs));
    }
    const ReplPosition target_pos{record.location.start_line, record.location.start_column};
    auto target = std::find_if(baseline.sorries.begin(), baseline.sorries.end(),
                               [&](const ReplSorry& s) { return s.pos == target_pos; });
    if (target == baseline.sorries.end()) {
      return verdict(VerdictStatus::EnvironmentError,
                     {"stale record: no sorry reported at " + std::to_string(target_pos.line) + ":" +
                      std::to_string(target_pos.column)});
    }

    const fs::path spliced_rel = relative.parent_path() / spliced_name(relative);
    TempFile guard(root / spliced_rel, spliced.text);
    const ReplResponse after = session.check_file(FileRequest{spliced_rel.string(), std::nullopt}, options.timeout);

    // (1) the file must elaborate
    if (after.has_errors()) return verdict(VerdictStatus::BuildFailure, after.error_messages());

    // (2) exactly one sorry fewer
    const std::size_t before = baseline.sorries.size();
    const std::size_t now = after.sorries.size();
    auto count_message = [&] {
      return "sorry count " + std::to_string(before) + " -> " + std::to_string(now);
    };
    if (now + 1 > before) return verdict(VerdictStatus::SorryCountUnchanged, {count_message()});
    if (now + 1 < before) return verdict(VerdictStatus::SorryCountOverDecreased, {count_message()});

    // (3) every other goal unchanged
    std::vector<std::string> expected = normalized_goals(baseline.sorries);
    expected.erase(std::find(expected.begin(), expected.end(), normalize_goal(target->goal)));
    if (normalized_goals(after.sorries) != expected) {
      return verdict(VerdictStatus::OtherGoalChanged, {"remaining goals differ from the original file"});
    }

    // (4) forbidden axioms, named in the proposal or reported by the kernel
    const std::set<std::string> forbidden(options.forbidden_axioms.begin(), options.forbidden_axioms.end());
    for (const ScanHit& ident : scan_identifiers(proposal.text)) {
      if (forbidden.count(ident.token) || forbidden.count(base_name(ident.token))) {
        return verdict(VerdictStatus::ForbiddenAxiom, {"proposal mentions " + ident.token});
      }
    }
    if (auto decl = enclosing_declaration(spliced.text, record.location.start_line); decl && after.env) {
      const ReplResponse axioms =
          session.check_file(CommandRequest{"#print axioms " + *decl, after.env}, options.timeout);
      if (axioms.has_errors()) {
        std::vector<std::string> msgs{"axiom query for " + *decl + " failed"};
        for (auto& m : axioms.error_messages()) msgs.push_back(std::move(m));
        return verdict(VerdictStatus::EnvironmentError, std::move(msgs));
      }
      for (const auto& m : axioms.messages) {
        for (const auto& ax : parse_axiom_report(m.data)) {
          if (forbidden.count(ax)) {
            return verdict(VerdictStatus::ForbiddenAxiom, {"'" + *decl + "' depends on " + ax});
          }
        }
      }
    }
    return verdict(VerdictStatus::Accepted);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Timeout) return verdict(VerdictStatus::Timeout, {e.what()});
    return verdict(VerdictStatus::EnvironmentError, {e.what()});
  }
}

}  // namespace sorryforge
