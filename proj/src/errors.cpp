#include "sorryforge/errors.hpp"

namespace sorryforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::CloneFailed: return "CloneFailed";
    case ErrorCode::CheckoutFailed: return "CheckoutFailed";
    case ErrorCode::ToolchainMissing: return "ToolchainMissing";
    case ErrorCode::BuildTimeout: return "BuildTimeout";
    case ErrorCode::SpawnFailed: return "SpawnFailed";
    case ErrorCode::ScriptExhausted: return "ScriptExhausted";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::SessionDead: return "SessionDead";
    case ErrorCode::NoMatchingSorry: return "NoMatchingSorry";
    case ErrorCode::ElaborationFailed: return "ElaborationFailed";
    case ErrorCode::GitQueryFailed: return "GitQueryFailed";
    case ErrorCode::BlameFailed: return "BlameFailed";
    case ErrorCode::SpanMismatch: return "SpanMismatch";
    case ErrorCode::ClientError: return "ClientError";
    case ErrorCode::MalformedToolCall: return "MalformedToolCall";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace sorryforge
