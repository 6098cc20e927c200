#pragma once

#include <filesystem>
#include <string>

#include "sorryforge/core_model.hpp"

namespace sorryforge {

// On-disk snapshot: {name, cutoff, sorries: [...], manifest: {...}}.
struct Database {
  std::filesystem::path path;
  DatasetSnapshot snapshot;
};

json snapshot_to_json(const DatasetSnapshot& snapshot);

/// Validates every record in order and stops at the first violation with
/// Error(SchemaViolation) naming the record index. A missing manifest is
/// recomputed without categories.
DatasetSnapshot snapshot_from_json(const json& document);

/// Sorted keys, two-space indent, trailing newline.
std::string serialize_snapshot(const DatasetSnapshot& snapshot);

/// Throws Error(IoError | SchemaViolation).
Database load_database(const std::filesystem::path& path);

/// Atomic (temp file + rename) under an advisory lock on "<path>.lock".
void save_database(const Database& db);

}  // namespace sorryforge
