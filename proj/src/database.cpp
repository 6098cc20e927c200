#include "sorryforge/database.hpp"

#include "sorryforge/errors.hpp"
#include "sorryforge/fs_util.hpp"

namespace fs = std::filesystem;

namespace sorryforge {

json snapshot_to_json(const DatasetSnapshot& s) {
  json sorries = json::array();
  for (const auto& r : s.records) sorries.push_back(to_json(r));
  return {{"name", s.name}, {"cutoff", s.cutoff.to_string()}, {"sorries", std::move(sorries)},
          {"manifest", to_json(s.manifest)}};
}

namespace {

[[noreturn]] void violation(const std::string& what) { throw Error(ErrorCode::SchemaViolation, what); }

}  // namespace

DatasetSnapshot snapshot_from_json(const json& doc) {
  if (!doc.is_object()) violation("database: not a JSON object");
  DatasetSnapshot s;
  auto name = doc.find("name");
  if (name == doc.end() || !name->is_string()) violation("database: name missing");
  s.name = name->get<std::string>();
  auto cutoff = doc.find("cutoff");
  if (cutoff == doc.end() || !cutoff->is_string()) violation("database: cutoff missing");
  auto parsed = UtcTime::parse(cutoff->get<std::string>());
  if (!parsed) violation("database: cutoff is not an RFC 3339 timestamp");
  s.cutoff = *parsed;
  auto sorries = doc.find("sorries");
  if (sorries == doc.end() || !sorries->is_array()) violation("database: sorries missing");

  for (std::size_t i = 0; i < sorries->size(); ++i) {
    const std::string at = "record " + std::to_string(i) + ": ";
    SorryRecord r;
    try {
      r = record_from_json((*sorries)[i]);
    } catch (const Error& e) {
      violation(at + e.what());
    }
    auto problems = validate_record(r);
    if (!problems.empty()) violation(at + problems.front());
    s.records.push_back(std::move(r));
  }

  if (auto m = doc.find("manifest"); m != doc.end() && !m->is_null()) {
    try {
      s.manifest = manifest_from_json(*m);
    } catch (const Error& e) {
      violation(std::string("manifest: ") + e.what());
    }
  } else {
    s.manifest = tally_manifest(s.records, {});
  }
  auto problems = validate_snapshot(s);
  if (!problems.empty()) violation(problems.front());
  return s;
}

std::string serialize_snapshot(const DatasetSnapshot& snapshot) {
  return snapshot_to_json(snapshot).dump(2, ' ', false, json::error_handler_t::strict) + "\n";
}

Database load_database(const fs::path& path) {
  json doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) violation(path.string() + ": not valid JSON");
  return {path, snapshot_from_json(doc)};
}

void save_database(const Database& db) {
  std::string bytes = serialize_snapshot(db.snapshot);
  if (db.path.has_parent_path()) fs::create_directories(db.path.parent_path());
  fs::path lock = db.path;
  lock += ".lock";
  FileLock guard(lock);
  write_file_atomic(db.path, bytes);
}

}  // namespace sorryforge
