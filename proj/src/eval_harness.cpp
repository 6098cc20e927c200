#include "sorryforge/eval_harness.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "pool.hpp"
#include "sorryforge/fs_util.hpp"

namespace fs = std::filesystem;

namespace sorryforge {

// Selection -------------------------------------------------------------------

DatasetSnapshot select_test_slice(const DatasetSnapshot& snapshot, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::UsageError, "slice size must be at least 1");
  std::map<std::string, std::vector<const SorryRecord*>> by_repo;
  for (const auto& r : snapshot.records) by_repo[r.repo.remote].push_back(&r);
  for (auto& [remote, recs] : by_repo) {
    std::sort(recs.begin(), recs.end(), [](const SorryRecord* a, const SorryRecord* b) {
      if (a->metadata.blame_date != b->metadata.blame_date) return a->metadata.blame_date > b->metadata.blame_date;
      return a->id < b->id;
    });
  }

  DatasetSnapshot out;
  out.name = snapshot.name;
  out.cutoff = snapshot.cutoff;
  std::map<std::string, std::size_t> taken;
  bool progress = true;
  while (out.records.size() < n && progress) {
    progress = false;
    for (const auto& [remote, recs] : by_repo) {
      if (out.records.size() >= n) break;
      std::size_t& next = taken[remote];
      if (next >= recs.size()) continue;
      out.records.push_back(*recs[next++]);
      progress = true;
    }
  }
  out.manifest = tally_manifest(out.records, categories_of(snapshot.manifest));
  return out;
}

// Run records -----------------------------------------------------------------

json to_json(const RunRecord& run) {
  json attempts = json::array();
  for (const auto& a : run.attempts) attempts.push_back(to_json(a));
  return {{"sorry_id", run.sorry_id},
          {"prover_id", run.prover_id},
          {"solved", run.solved},
          {"category", run.category ? json(std::string(to_string(*run.category))) : json()},
          {"attempts", std::move(attempts)},
          {"diagnostics", run.diagnostics}};
}

RunRecord run_from_json(const json& j) {
  try {
    RunRecord r;
    r.sorry_id = j.at("sorry_id").get<std::string>();
    r.prover_id = j.at("prover_id").get<std::string>();
    r.solved = j.at("solved").get<bool>();
    if (auto c = j.find("category"); c != j.end() && !c->is_null()) {
      r.category = parse_category(c->get<std::string>());
      if (!r.category) throw Error(ErrorCode::MalformedDocument, "unknown category " + c->dump());
    }
    for (const auto& a : j.at("attempts")) r.attempts.push_back(attempt_from_json(a));
    r.diagnostics = j.value("diagnostics", std::vector<std::string>{});
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("run record: ") + e.what());
  }
}

namespace {

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n"; }

// Drops a partially written last line so new lines start cleanly.
void repair_tail(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) return;
  std::string text = read_file(path);
  if (text.empty() || text.back() == '\n') return;
  auto nl = text.rfind('\n');
  fs::resize_file(path, nl == std::string::npos ? 0 : nl + 1);
}

std::vector<RunRecord> read_log(const fs::path& path) {
  std::vector<RunRecord> runs;
  std::string text = read_file(path);
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) break;  // unterminated tail: an interrupted write
    std::string_view line(text.data() + start, nl - start);
    start = nl + 1;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::MalformedDocument, path.string() + ": corrupt line before end of log");
    }
    runs.push_back(run_from_json(j));
  }
  return runs;
}

// Single writer fed by a queue; each record is flushed as one line.
class ResultLog {
 public:
  explicit ResultLog(std::map<std::string, fs::path> files) {
    for (auto& [id, path] : files) {
      repair_tail(path);
      streams_[id].open(path, std::ios::app | std::ios::binary);
      if (!streams_[id]) throw Error(ErrorCode::IoError, "cannot append to " + path.string());
    }
    writer_ = std::thread([this] { drain(); });
  }
  ~ResultLog() { close(); }

  void push(const RunRecord& run) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(dump_line(to_json(run)));
      ids_.push_back(run.prover_id);
    }
    cv_.notify_one();
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      if (closing_) return;
      closing_ = true;
    }
    cv_.notify_one();
    writer_.join();
  }

 private:
  void drain() {
    std::unique_lock lock(mu_);
    for (;;) {
      cv_.wait(lock, [&] { return closing_ || !queue_.empty(); });
      while (!queue_.empty()) {
        std::string line = std::move(queue_.front());
        std::string id = std::move(ids_.front());
        queue_.pop_front();
        ids_.pop_front();
        lock.unlock();
        auto& out = streams_.at(id);
        out << line;
        out.flush();
        lock.lock();
      }
      if (closing_) return;
    }
  }

  std::map<std::string, std::ofstream> streams_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  std::deque<std::string> ids_;
  bool closing_ = false;
  std::thread writer_;
};

// Prepared and built workspaces shared by all pairs of one run.
class WorkspacePool {
 public:
  WorkspacePool(const fs::path& cache_dir, const BuildOptions& build) : cache_dir_(cache_dir), build_(build) {}

  Workspace get(const RepoCoordinates& coords) {
    std::shared_ptr<Slot> slot;
    {
      std::lock_guard lock(mu_);
      auto& s = slots_[coords.remote + "\n" + coords.commit];
      if (!s) s = std::make_shared<Slot>();
      slot = s;
    }
    std::call_once(slot->once, [&] {
      try {
        slot->workspace = build_workspace(prepare_workspace(coords, cache_dir_), build_);
      } catch (...) {
        slot->error = std::current_exception();
      }
    });
    if (slot->error) std::rethrow_exception(slot->error);
    Workspace ws = *slot->workspace;
    ws.coords.branch = coords.branch;
    return ws;
  }

 private:
  struct Slot {
    std::once_flag once;
    std::optional<Workspace> workspace;
    std::exception_ptr error;
  };
  fs::path cache_dir_;
  BuildOptions build_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
};

RunRecord execute_pair(const SorryRecord& record, Prover& prover, std::optional<RepoCategory> category,
                       WorkspacePool& workspaces, const EvalOptions& options) {
  RunRecord run;
  run.sorry_id = record.id;
  run.prover_id = prover.config().id;
  run.category = category;
  try {
    Workspace ws = workspaces.get(record.repo);
    if (ws.build_state.status != BuildStatus::Built) {
      run.diagnostics.push_back("workspace build failed");
      for (const auto& m : ws.build_state.messages) run.diagnostics.push_back(m);
      return run;
    }
    auto session = open_session(ws, options.backend);
    ProverTask task{record, read_file(ws.root / record.location.path), options.context_window};
    VerifyFn verify = [&](const ProofProposal& p) { return verify_proposal(*session, record, p, options.verify); };
    ProverOutcome outcome = prover.run(task, verify);
    session->close();
    run.attempts = std::move(outcome.attempts);
    run.diagnostics = std::move(outcome.errors);
    run.solved = std::any_of(run.attempts.begin(), run.attempts.end(),
                             [](const AttemptRecord& a) { return a.verdict.accepted(); });
  } catch (const std::exception& e) {
    run.diagnostics.push_back(e.what());
  }
  return run;
}

}  // namespace

std::vector<RunRecord> load_runs(const fs::path& out_dir) {
  std::vector<RunRecord> runs;
  const fs::path dir = out_dir / "runs";
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return runs;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".ndjson") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto part = read_log(f);
    std::move(part.begin(), part.end(), std::back_inserter(runs));
  }
  return runs;
}

std::vector<RunRecord> run_evaluation(const DatasetSnapshot& slice, const std::vector<std::unique_ptr<Prover>>& provers,
                                      const EvalOptions& options) {
  const fs::path runs_dir = options.out_dir / "runs";
  fs::create_directories(runs_dir);

  std::map<std::string, fs::path> files;
  json configs = json::array();
  for (const auto& p : provers) {
    files[p->config().id] = runs_dir / (p->config().id + ".ndjson");
    configs.push_back(to_json(p->config()));
  }
  json manifest = {{"slice", slice.name},
                   {"cutoff", slice.cutoff.to_string()},
                   {"records", slice.records.size()},
                   {"provers", configs},
                   {"workers", options.workers}};
  write_file_atomic(options.out_dir / "manifest.json", manifest.dump(2) + "\n");

  std::map<std::pair<std::string, std::string>, RunRecord> known;
  for (const auto& [id, path] : files) {
    std::error_code ec;
    if (!fs::exists(path, ec)) continue;
    for (auto& r : read_log(path)) {
      auto key = std::make_pair(r.sorry_id, r.prover_id);
      known.emplace(std::move(key), std::move(r));
    }
  }

  const auto categories = categories_of(slice.manifest);
  struct Pair {
    std::size_t record;
    std::size_t prover;
  };
  std::vector<Pair> pending;
  for (std::size_t r = 0; r < slice.records.size(); ++r) {
    for (std::size_t p = 0; p < provers.size(); ++p) {
      if (!known.count({slice.records[r].id, provers[p]->config().id})) pending.push_back({r, p});
    }
  }
  if (options.max_pairs && pending.size() > *options.max_pairs) pending.resize(*options.max_pairs);

  std::vector<RunRecord> fresh(pending.size());
  {
    ResultLog log(files);
    WorkspacePool workspaces(options.cache_dir, options.build);
    parallel_for(pending.size(), options.workers, [&](std::size_t i) {
      const SorryRecord& record = slice.records[pending[i].record];
      std::optional<RepoCategory> category;
      if (auto it = categories.find(record.repo.remote); it != categories.end()) category = it->second;
      fresh[i] = execute_pair(record, *provers[pending[i].prover], category, workspaces, options);
      log.push(fresh[i]);
    });
    log.close();
  }
  for (auto& r : fresh) {
    auto key = std::make_pair(r.sorry_id, r.prover_id);
    known.insert_or_assign(std::move(key), std::move(r));
  }

  std::vector<RunRecord> out;
  for (const auto& record : slice.records) {
    for (const auto& p : provers) {
      if (auto it = known.find({record.id, p->config().id}); it != known.end()) out.push_back(it->second);
    }
  }
  return out;
}

// Metrics ---------------------------------------------------------------------

double pass_at_k(const std::vector<std::vector<bool>>& outcomes, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::InsufficientSamples, "k must be at least 1");
  if (outcomes.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t t = 0; t < outcomes.size(); ++t) {
    const auto& o = outcomes[t];
    if (o.size() < k) {
      throw Error(ErrorCode::InsufficientSamples,
                  "task " + std::to_string(t) + " has " + std::to_string(o.size()) + " samples, need " + std::to_string(k));
    }
    if (std::any_of(o.begin(), o.begin() + static_cast<std::ptrdiff_t>(k), [](bool b) { return b; })) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

std::map<std::string, std::map<RepoCategory, CategoryCell>> category_breakdown(const std::vector<RunRecord>& runs) {
  std::map<std::string, std::map<RepoCategory, CategoryCell>> out;
  for (const auto& r : runs) {
    if (!r.category) continue;
    auto& cell = out[r.prover_id][*r.category];
    ++cell.total;
    if (r.solved) ++cell.solved;
  }
  return out;
}

std::map<std::vector<std::string>, int> intersection_counts(const std::vector<RunRecord>& runs) {
  std::map<std::string, std::set<std::string>> solvers;
  for (const auto& r : runs) {
    if (r.solved) solvers[r.sorry_id].insert(r.prover_id);
  }
  std::map<std::vector<std::string>, int> out;
  for (const auto& [id, set] : solvers) ++out[std::vector<std::string>(set.begin(), set.end())];
  return out;
}

namespace {

std::int64_t nearest_rank(const std::vector<std::int64_t>& sorted, int pct) {
  std::size_t n = sorted.size();
  std::size_t rank = (static_cast<std::size_t>(pct) * n + 99) / 100;
  return sorted[std::max<std::size_t>(rank, 1) - 1];
}

}  // namespace

MetricsTable compute_metrics(const std::vector<RunRecord>& runs, const std::vector<ProverConfig>& provers) {
  MetricsTable m;
  std::set<std::string> tasks, solved_tasks;
  std::map<std::string, std::vector<const RunRecord*>> by_prover;
  for (const auto& r : runs) {
    tasks.insert(r.sorry_id);
    if (r.solved) solved_tasks.insert(r.sorry_id);
    by_prover[r.prover_id].push_back(&r);
  }
  m.task_count = static_cast<int>(tasks.size());
  m.combined_count = static_cast<int>(solved_tasks.size());

  std::vector<ProverConfig> configs = provers;
  for (const auto& [id, list] : by_prover) {
    bool listed = std::any_of(configs.begin(), configs.end(), [&](const ProverConfig& c) { return c.id == id; });
    if (!listed) {
      ProverConfig c;
      c.id = c.label = id;
      c.group = "Other";
      configs.push_back(std::move(c));
    }
  }

  for (const auto& c : configs) {
    ProverMetrics pm;
    pm.id = c.id;
    pm.label = c.label.empty() ? c.id : c.label;
    pm.group = c.group;
    const auto& list = by_prover[c.id];
    pm.tasks = static_cast<int>(list.size());
    std::vector<std::int64_t> solved_tokens;
    for (const RunRecord* r : list) {
      if (!r->solved) continue;
      ++pm.solved;
      std::int64_t total = 0;
      for (const auto& a : r->attempts) total += a.tokens.total();
      solved_tokens.push_back(total);
    }
    if (c.kind == ProverKind::Sample) {
      const auto n = static_cast<std::size_t>(c.n);
      std::vector<std::vector<bool>> outcomes;
      for (const RunRecord* r : list) {
        std::vector<bool> o(n, false);
        for (const auto& a : r->attempts) {
          auto i = static_cast<std::size_t>(a.proposal.iteration);
          if (i < n && a.verdict.accepted()) o[i] = true;
        }
        outcomes.push_back(std::move(o));
      }
      pm.pass_at_1 = pass_at_k(outcomes, 1);
      pm.k = c.n;
      pm.pass_at_k = pass_at_k(outcomes, n);
    } else {
      pm.pass_at_1 = pm.tasks ? static_cast<double>(pm.solved) / pm.tasks : 0.0;
    }
    if (c.kind != ProverKind::Tactic && !solved_tokens.empty()) {
      std::sort(solved_tokens.begin(), solved_tokens.end());
      m.tokens[c.id] = {static_cast<int>(solved_tokens.size()), nearest_rank(solved_tokens, 50),
                        nearest_rank(solved_tokens, 90), solved_tokens.back()};
    }
    m.provers.push_back(std::move(pm));
  }
  m.categories = category_breakdown(runs);
  m.intersections = intersection_counts(runs);
  return m;
}

json to_json(const MetricsTable& m) {
  json provers = json::array();
  for (const auto& p : m.provers) {
    provers.push_back({{"id", p.id},
                       {"label", p.label},
                       {"group", p.group},
                       {"tasks", p.tasks},
                       {"solved", p.solved},
                       {"pass_at_1", p.pass_at_1},
                       {"k", p.k ? json(*p.k) : json()},
                       {"pass_at_k", p.pass_at_k ? json(*p.pass_at_k) : json()}});
  }
  json categories = json::object();
  for (const auto& [id, cells] : m.categories) {
    json row = json::object();
    for (const auto& [cat, cell] : cells) row[std::string(to_string(cat))] = {{"solved", cell.solved}, {"total", cell.total}};
    categories[id] = std::move(row);
  }
  json intersections = json::array();
  for (const auto& [subset, count] : m.intersections) intersections.push_back({{"provers", subset}, {"count", count}});
  json tokens = json::object();
  for (const auto& [id, t] : m.tokens) tokens[id] = {{"runs", t.runs}, {"p50", t.p50}, {"p90", t.p90}, {"max", t.max}};
  return {{"task_count", m.task_count},
          {"combined_count", m.combined_count},
          {"provers", std::move(provers)},
          {"categories", std::move(categories)},
          {"intersections", std::move(intersections)},
          {"tokens", std::move(tokens)}};
}

MetricsTable metrics_from_json(const json& j) {
  try {
    MetricsTable m;
    m.task_count = j.at("task_count").get<int>();
    m.combined_count = j.at("combined_count").get<int>();
    for (const auto& p : j.at("provers")) {
      ProverMetrics pm;
      pm.id = p.at("id").get<std::string>();
      pm.label = p.at("label").get<std::string>();
      pm.group = p.at("group").get<std::string>();
      pm.tasks = p.at("tasks").get<int>();
      pm.solved = p.at("solved").get<int>();
      pm.pass_at_1 = p.at("pass_at_1").get<double>();
      if (!p.at("k").is_null()) pm.k = p["k"].get<int>();
      if (!p.at("pass_at_k").is_null()) pm.pass_at_k = p["pass_at_k"].get<double>();
      m.provers.push_back(std::move(pm));
    }
    for (const auto& [id, row] : j.at("categories").items()) {
      for (const auto& [cat, cell] : row.items()) {
        auto c = parse_category(cat);
        if (!c) throw Error(ErrorCode::MalformedDocument, "unknown category " + cat);
        m.categories[id][*c] = {cell.at("solved").get<int>(), cell.at("total").get<int>()};
      }
    }
    for (const auto& e : j.at("intersections")) {
      m.intersections[e.at("provers").get<std::vector<std::string>>()] = e.at("count").get<int>();
    }
    for (const auto& [id, t] : j.at("tokens").items()) {
      m.tokens[id] = {t.at("runs").get<int>(), t.at("p50").get<std::int64_t>(), t.at("p90").get<std::int64_t>(),
                      t.at("max").get<std::int64_t>()};
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("metrics: ") + e.what());
  }
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "markdown" || text == "md") return ReportFormat::Markdown;
  if (text == "csv") return ReportFormat::Csv;
  if (text == "json") return ReportFormat::Json;
  return std::nullopt;
}

namespace {

std::string percent(double rate) { return fmt::format("{:.1f}%", rate * 100.0); }

std::string markdown(const MetricsTable& m) {
  int k = 0;
  for (const auto& p : m.provers) k = std::max(k, p.k.value_or(0));
  if (k == 0) k = 32;

  std::map<std::string, std::string> label_of;
  for (const auto& p : m.provers) label_of[p.id] = p.label;

  std::string out = fmt::format("| Approach | Pass@1 | Pass@{} |\n| :-- | --: | --: |\n", k);

  std::vector<std::string> groups = {"Deterministic", "General-purpose LLM", "Specialized LLM", "Iterative"};
  std::set<std::string> extra;
  for (const auto& p : m.provers) {
    if (std::find(groups.begin(), groups.end(), p.group) == groups.end()) extra.insert(p.group);
  }
  groups.insert(groups.end(), extra.begin(), extra.end());
  for (const auto& g : groups) {
    bool header = false;
    for (const auto& p : m.provers) {
      if (p.group != g) continue;
      if (!header) {
        out += fmt::format("| *{}* | | |\n", g);
        header = true;
      }
      std::string at_k = "n/a";
      if (p.pass_at_k) {
        at_k = percent(*p.pass_at_k);
        if (p.k && *p.k != k) at_k += fmt::format(" (k={})", *p.k);
      }
      out += fmt::format("| {} | {} | {} |\n", p.label, percent(p.pass_at_1), at_k);
    }
  }
  double combined = m.task_count ? static_cast<double>(m.combined_count) / m.task_count : 0.0;
  out += fmt::format("| **Combined** | {} ({}/{}) | |\n", percent(combined), m.combined_count, m.task_count);

  if (!m.categories.empty()) {
    out += "\n### Success by repository category\n\n| Prover |";
    for (auto c : kAllCategories) out += fmt::format(" {} |", to_string(c));
    out += "\n| :-- |";
    for (std::size_t i = 0; i < std::size(kAllCategories); ++i) out += " --: |";
    out += "\n";
    for (const auto& [id, cells] : m.categories) {
      out += "| " + (label_of.count(id) ? label_of[id] : id) + " |";
      for (auto c : kAllCategories) {
        auto it = cells.find(c);
        if (it == cells.end()) {
          out += " n/a |";
        } else {
          out += fmt::format(" {} ({}/{}) |", percent(it->second.rate()), it->second.solved, it->second.total);
        }
      }
      out += "\n";
    }
  }

  if (!m.intersections.empty()) {
    out += "\n### Tasks solved by exactly these provers\n\n| Provers | Tasks |\n| :-- | --: |\n";
    for (const auto& [subset, count] : m.intersections) {
      std::string names;
      for (const auto& id : subset) {
        if (!names.empty()) names += ", ";
        names += label_of.count(id) ? label_of[id] : id;
      }
      out += fmt::format("| {} | {} |\n", names, count);
    }
  }

  if (!m.tokens.empty()) {
    out += "\n### Tokens per solved task\n\n| Prover | Solved | p50 | p90 | Max |\n| :-- | --: | --: | --: | --: |\n";
    for (const auto& [id, t] : m.tokens) {
      out += fmt::format("| {} | {} | {} | {} | {} |\n", label_of.count(id) ? label_of[id] : id, t.runs, t.p50, t.p90,
                         t.max);
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string csv(const MetricsTable& m) {
  std::string out = "section,key,field,value\n";
  auto row = [&](const std::string& section, const std::string& key, const std::string& field, const json& value) {
    std::string v = value.is_string() ? value.get<std::string>() : value.dump();
    out += csv_field(section) + "," + csv_field(key) + "," + csv_field(field) + "," + csv_field(v) + "\n";
  };
  row("summary", "", "task_count", m.task_count);
  row("summary", "", "combined_count", m.combined_count);
  for (const auto& p : m.provers) {
    row("prover", p.id, "label", p.label);
    row("prover", p.id, "group", p.group);
    row("prover", p.id, "tasks", p.tasks);
    row("prover", p.id, "solved", p.solved);
    row("prover", p.id, "pass_at_1", p.pass_at_1);
    if (p.k) row("prover", p.id, "k", *p.k);
    if (p.pass_at_k) row("prover", p.id, "pass_at_k", *p.pass_at_k);
  }
  for (const auto& [id, cells] : m.categories) {
    for (const auto& [cat, cell] : cells) {
      row("category", id, std::string(to_string(cat)) + ".solved", cell.solved);
      row("category", id, std::string(to_string(cat)) + ".total", cell.total);
    }
  }
  for (const auto& [subset, count] : m.intersections) row("intersection", json(subset).dump(), "count", count);
  for (const auto& [id, t] : m.tokens) {
    row("tokens", id, "runs", t.runs);
    row("tokens", id, "p50", t.p50);
    row("tokens", id, "p90", t.p90);
    row("tokens", id, "max", t.max);
  }
  return out;
}

}  // namespace

std::string emit_report(const MetricsTable& metrics, ReportFormat format) {
  switch (format) {
    case ReportFormat::Markdown: return markdown(metrics);
    case ReportFormat::Csv: return csv(metrics);
    case ReportFormat::Json: return to_json(metrics).dump(2) + "\n";
  }
  return {};
}

}  // namespace sorryforge
