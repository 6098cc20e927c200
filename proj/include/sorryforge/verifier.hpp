#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sorryforge/core_model.hpp"
#include "sorryforge/lean_bridge.hpp"

namespace sorryforge {

struct SpliceResult {
  std::string text;
  SourceLocation replaced_span;  // the original `sorry` token
};

/// Replaces the `sorry` at location.start with `proposal`. Continuation lines
/// of the proposal are indented by the sorry's start column; trailing
/// newlines of the proposal are dropped. Throws Error(SpanMismatch).
SpliceResult splice_proposal(std::string_view source, const SourceLocation& location,
                             std::string_view proposal);

struct VerifyOptions {
  std::chrono::seconds timeout{300};
  std::vector<std::string> forbidden_axioms{"sorryAx"};
};

/// Fully qualified name of the declaration enclosing `line`, following
/// `namespace`/`section`/`end`. nullopt for `example` and unnamed instances.
std::optional<std::string> enclosing_declaration(std::string_view source, int line);

/// Axiom names from a `#print axioms` answer ("'x' depends on axioms: [a, b]").
std::vector<std::string> parse_axiom_report(std::string_view text);

/// Splice, elaborate the original (baseline) and the spliced file in the same
/// session, then check in order: error messages, sorry count, remaining goal
/// multiset, axioms. Session and workspace failures come back as Timeout or
/// EnvironmentError verdicts rather than exceptions. The spliced file is a
/// temporary sibling of the original and is always removed.
VerificationVerdict verify_proposal(ReplSession& session, const SorryRecord& record,
                                    const ProofProposal& proposal, const VerifyOptions& options = {});

}  // namespace sorryforge
