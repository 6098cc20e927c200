#include "sorryforge/cli.hpp"

#include <algorithm>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sorryforge/database.hpp"
#include "sorryforge/eval_harness.hpp"
#include "sorryforge/fs_util.hpp"
#include "sorryforge/indexer.hpp"
#include "sorryforge/repo_registry.hpp"
#include "sorryforge/verifier.hpp"

namespace fs = std::filesystem;

namespace sorryforge {

namespace {

json read_json(const fs::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::MalformedDocument, path.string() + " is not valid JSON");
  return j;
}

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

void emit(const std::string& data, const std::string& out_path, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << data;
  } else {
    fs::path p(out_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_file_atomic(p, data);
  }
}

// Options shared by every subcommand that touches workspaces or the REPL.
struct EnvOptions {
  std::string cache_dir;
  std::string build_cmd = "lake build";
  int build_timeout = 3600;
  std::string mock_repl;
  std::string repl_cmd;
  int repl_timeout = 300;

  void attach(CLI::App* cmd) {
    cmd->add_option("--cache-dir", cache_dir, "Workspace cache (default: $SORRYFORGE_CACHE_DIR or .sorryforge/cache)");
    cmd->add_option("--build-cmd", build_cmd, "Project build command")->capture_default_str();
    cmd->add_option("--build-timeout", build_timeout, "Build timeout in seconds")->capture_default_str();
    cmd->add_option("--mock-repl", mock_repl, "Answer REPL requests from this mock script");
    cmd->add_option("--repl-cmd", repl_cmd, "REPL command (default: $SORRYFORGE_REPL_CMD or `lake env repl`)");
    cmd->add_option("--repl-timeout", repl_timeout, "Seconds per REPL request")->capture_default_str();
  }

  fs::path cache() const {
    return cache_dir.empty() ? resolve_cache_dir(fs::path(".sorryforge") / "cache") : fs::path(cache_dir);
  }
  BuildOptions build() const {
    BuildOptions b;
    b.command = split_words(build_cmd);
    if (b.command.empty()) throw Error(ErrorCode::UsageError, "--build-cmd is empty");
    b.timeout = std::chrono::seconds(build_timeout);
    return b;
  }
  Backend backend() const {
    if (!mock_repl.empty()) return MockBackend{mock_repl};
    return RealBackend{split_words(repl_cmd)};
  }
};

std::string snapshot_name(UtcTime t) {
  std::string s = t.to_string();  // YYYY-MM-DD...
  return "sorryforge-" + s.substr(2, 2) + s.substr(5, 2);
}

std::vector<CategoryRule> rules_from(const std::string& path) {
  return path.empty() ? default_category_rules() : load_category_rules(read_json(path));
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Index sorry obligations from Lean repositories, verify proposals and evaluate provers",
               "sorryforge"};
  app.require_subcommand(1);
  std::function<int()> action;

  // registry ------------------------------------------------------------------
  auto* registry = app.add_subcommand("registry", "Ingest and filter a package registry listing");
  registry->require_subcommand(1);

  std::string ingest_input, ingest_out;
  auto* ingest = registry->add_subcommand("ingest", "Registry document -> listings");
  ingest->add_option("--input", ingest_input, "Registry JSON document")->required();
  ingest->add_option("--out", ingest_out, "Output file (default: stdout)");
  ingest->callback([&] {
    action = [&] {
      IngestResult r = ingest_registry(read_json(ingest_input));
      for (const auto& reason : r.drop_reasons) err << "dropped: " << reason << "\n";
      err << r.listings.size() << " listings, " << r.dropped << " dropped\n";
      emit(to_json(r.listings).dump(2) + "\n", ingest_out, out);
      return 0;
    };
  });

  std::string filter_input, filter_out, filter_policy = "window:90", filter_now, filter_licenses, filter_rules;
  auto* filter = registry->add_subcommand("filter", "Keep eligible listings and assign categories");
  filter->add_option("--input", filter_input, "Listings JSON (output of `registry ingest`)")->required();
  filter->add_option("--policy", filter_policy, "since:<date> or window:<days>")->capture_default_str();
  filter->add_option("--now", filter_now, "Reference time (RFC 3339; default: now)");
  filter->add_option("--licenses", filter_licenses, "License allow-list JSON");
  filter->add_option("--rules", filter_rules, "Category rules JSON");
  filter->add_option("--out", filter_out, "Output file (default: stdout)");
  filter->callback([&] {
    action = [&] {
      auto policy = parse_policy(filter_policy);
      if (!policy) throw Error(ErrorCode::UsageError, "--policy: expected since:<date> or window:<days>");
      UtcTime now = UtcTime::now();
      if (!filter_now.empty()) {
        auto t = UtcTime::parse(filter_now);
        if (!t) throw Error(ErrorCode::UsageError, "--now: not an RFC 3339 timestamp");
        now = *t;
      }
      auto licenses = filter_licenses.empty() ? default_license_allowlist()
                                              : load_license_allowlist(read_json(filter_licenses));
      auto rules = rules_from(filter_rules);
      auto eligible = filter_eligible(listings_from_json(read_json(filter_input)), *policy, now, licenses);
      for (auto& l : eligible) {
        if (!l.category) l.category = assign_category(l, rules);
      }
      err << eligible.size() << " eligible listings\n";
      emit(to_json(eligible).dump(2) + "\n", filter_out, out);
      return 0;
    };
  });

  // index ---------------------------------------------------------------------
  std::string index_repos, index_db, index_name, index_rules, index_stats;
  int index_workers = 4;
  EnvOptions index_env;
  auto* index = app.add_subcommand("index", "Index sorries of the listed repositories into a database");
  index->add_option("--repos", index_repos, "Listings JSON")->required();
  index->add_option("--db", index_db, "Database file to write")->required();
  index->add_option("--name", index_name, "Snapshot name (default: sorryforge-YYMM)");
  index->add_option("--rules", index_rules, "Category rules JSON for listings without a category");
  index->add_option("--workers", index_workers, "Repositories indexed in parallel")->capture_default_str();
  index->add_option("--stats", index_stats, "Also write the stats JSON to this file");
  index_env.attach(index);
  index->callback([&] {
    action = [&] {
      IndexOptions options;
      options.cache_dir = index_env.cache();
      options.build = index_env.build();
      options.backend = index_env.backend();
      options.repl_timeout = std::chrono::seconds(index_env.repl_timeout);
      options.inclusion_date = UtcTime::now();
      auto listings = listings_from_json(read_json(index_repos));
      BatchResult batch = index_batch(listings, options, rules_from(index_rules), index_workers);

      DatasetSnapshot snap;
      snap.name = index_name.empty() ? snapshot_name(options.inclusion_date) : index_name;
      snap.cutoff = options.inclusion_date;
      snap.records = std::move(batch.records);
      snap.manifest = tally_manifest(snap.records, batch.categories);
      // Keep repositories that produced nothing visible in the manifest.
      for (const auto& [remote, cat] : batch.categories) snap.manifest.repos[remote].category = cat;
      save_database({index_db, snap});

      json stats = to_json(batch.stats);
      json errors = json::object();
      for (const auto& r : batch.repos) {
        if (r.error) {
          errors[r.remote] = *r.error;
          err << "repository failed: " << r.remote << ": " << *r.error << "\n";
        }
      }
      json summary = {{"records", snap.records.size()}, {"stats", stats}, {"errors", errors}};
      if (!index_stats.empty()) emit(summary.dump(2) + "\n", index_stats, out);
      out << summary.dump(2) << "\n";
      return 0;
    };
  });

  // dedup ---------------------------------------------------------------------
  std::string dedup_db, dedup_out;
  auto* dedup = app.add_subcommand("dedup", "Keep the newest record per (remote, goal)");
  dedup->add_option("--db", dedup_db, "Database file")->required();
  dedup->add_option("--out", dedup_out, "Output database (default: rewrite --db)");
  dedup->callback([&] {
    action = [&] {
      Database db = load_database(dedup_db);
      const std::size_t before = db.snapshot.records.size();
      db.snapshot.records = deduplicate(std::move(db.snapshot.records));
      auto categories = categories_of(db.snapshot.manifest);
      Manifest m = tally_manifest(db.snapshot.records, categories);
      for (const auto& [remote, tally] : db.snapshot.manifest.repos) m.repos[remote].category = tally.category;
      db.snapshot.manifest = m;
      if (!dedup_out.empty()) db.path = dedup_out;
      save_database(db);
      err << "removed " << (before - db.snapshot.records.size()) << " duplicates\n";
      return 0;
    };
  });

  // select --------------------------------------------------------------------
  std::string select_db, select_out;
  std::size_t select_n = 0;
  auto* select = app.add_subcommand("select", "Pick a round-robin test slice, newest first");
  select->add_option("--db", select_db, "Database file")->required();
  select->add_option("--n", select_n, "Slice size")->required()->check(CLI::PositiveNumber);
  select->add_option("--out", select_out, "Output database (default: stdout)");
  select->callback([&] {
    action = [&] {
      Database db = load_database(select_db);
      DatasetSnapshot slice = select_test_slice(db.snapshot, select_n);
      if (select_out.empty()) {
        out << serialize_snapshot(slice);
      } else {
        save_database({select_out, slice});
        err << "selected " << slice.records.size() << " records\n";
      }
      return 0;
    };
  });

  // verify --------------------------------------------------------------------
  std::string verify_db, verify_id, verify_proposal_path, verify_origin = "cli";
  std::vector<std::string> verify_forbid;
  EnvOptions verify_env;
  auto* verify = app.add_subcommand("verify", "Splice a proposal into its record's file and check it");
  verify->add_option("--db", verify_db, "Database file")->required();
  verify->add_option("--id", verify_id, "Record id (a unique prefix is enough)")->required();
  verify->add_option("--proposal", verify_proposal_path, "File holding the replacement text")->required();
  verify->add_option("--origin", verify_origin, "Origin recorded in the verdict")->capture_default_str();
  verify->add_option("--forbid", verify_forbid, "Extra forbidden axiom (repeatable)");
  verify_env.attach(verify);
  verify->callback([&] {
    action = [&]() -> int {
      Database db = load_database(verify_db);
      std::vector<const SorryRecord*> matches;
      for (const auto& r : db.snapshot.records) {
        if (r.id.rfind(verify_id, 0) == 0) matches.push_back(&r);
      }
      if (matches.size() != 1) {
        throw Error(ErrorCode::UsageError, "--id: " + std::to_string(matches.size()) + " records match " + verify_id);
      }
      const SorryRecord& record = *matches.front();
      ProofProposal proposal{record.id, read_file(verify_proposal_path), verify_origin, 0};

      Workspace ws = build_workspace(prepare_workspace(record.repo, verify_env.cache()), verify_env.build());
      if (ws.build_state.status != BuildStatus::Built) {
        for (const auto& m : ws.build_state.messages) err << m << "\n";
        throw Error(ErrorCode::SpawnFailed, "workspace build failed");
      }
      VerifyOptions vo;
      vo.timeout = std::chrono::seconds(verify_env.repl_timeout);
      vo.forbidden_axioms.insert(vo.forbidden_axioms.end(), verify_forbid.begin(), verify_forbid.end());
      auto session = open_session(ws, verify_env.backend());
      VerificationVerdict v = verify_proposal(*session, record, proposal, vo);
      session->close();
      out << verdict_report(proposal, v).dump(2) << "\n";
      err << to_string(v.status) << "\n";
      return v.accepted() ? 0 : 1;
    };
  });

  // run -----------------------------------------------------------------------
  std::string run_slice, run_provers, run_out;
  int run_workers = 4;
  std::size_t run_context = 20000;
  std::size_t run_max_pairs = 0;
  EnvOptions run_env;
  auto* run = app.add_subcommand("run", "Run provers over a slice, resuming from earlier results");
  run->add_option("--slice", run_slice, "Slice database")->required();
  run->add_option("--provers", run_provers, "Prover config JSON")->required();
  run->add_option("--out", run_out, "Results directory")->required();
  run->add_option("--workers", run_workers, "Pairs run in parallel")->capture_default_str();
  run->add_option("--context-window", run_context, "Prompt context characters")->capture_default_str();
  run->add_option("--max-pairs", run_max_pairs, "Stop after this many new pairs (0: no limit)");
  run_env.attach(run);
  run->callback([&] {
    action = [&] {
      Database slice = load_database(run_slice);
      const fs::path config_path(run_provers);
      auto configs = load_prover_configs(read_json(config_path));
      std::vector<std::unique_ptr<Prover>> provers;
      for (const auto& c : configs) provers.push_back(make_prover(c, config_path.parent_path()));

      EvalOptions options;
      options.out_dir = run_out;
      options.workers = run_workers;
      options.cache_dir = run_env.cache();
      options.build = run_env.build();
      options.backend = run_env.backend();
      options.verify.timeout = std::chrono::seconds(run_env.repl_timeout);
      options.context_window = run_context;
      if (run_max_pairs > 0) options.max_pairs = run_max_pairs;
      auto runs = run_evaluation(slice.snapshot, provers, options);
      const auto solved = std::count_if(runs.begin(), runs.end(), [](const RunRecord& r) { return r.solved; });
      err << runs.size() << " runs, " << solved << " solved\n";
      return 0;
    };
  });

  // report --------------------------------------------------------------------
  std::string report_runs, report_format = "markdown", report_out;
  auto* report = app.add_subcommand("report", "Metrics table from a results directory");
  report->add_option("--runs", report_runs, "Results directory written by `run`")->required();
  report->add_option("--format", report_format, "markdown | csv | json")->capture_default_str();
  report->add_option("--out", report_out, "Output file (default: stdout)");
  report->callback([&] {
    action = [&] {
      auto format = parse_report_format(report_format);
      if (!format) throw Error(ErrorCode::UsageError, "--format: expected markdown, csv or json");
      std::vector<ProverConfig> configs;
      const fs::path manifest = fs::path(report_runs) / "manifest.json";
      if (fs::exists(manifest)) configs = load_prover_configs(read_json(manifest).value("provers", json::array()));
      auto metrics = compute_metrics(load_runs(report_runs), configs);
      emit(emit_report(metrics, *format), report_out, out);
      return 0;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  if (!action) {
    err << "usage error: no subcommand\n";
    return 2;
  }
  try {
    return action();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::UsageError ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace sorryforge
