#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sorryforge/core_model.hpp"
#include "sorryforge/lean_bridge.hpp"
#include "sorryforge/provers.hpp"
#include "sorryforge/verifier.hpp"

namespace sorryforge {

/// Round-robin over repos in ascending remote order, each turn taking the
/// repo's newest remaining record (blame_date descending, id ascending).
/// The manifest is recomputed for the selection.
DatasetSnapshot select_test_slice(const DatasetSnapshot& snapshot, std::size_t n);

struct RunRecord {
  std::string sorry_id;
  std::string prover_id;
  std::vector<AttemptRecord> attempts;
  bool solved = false;
  std::optional<RepoCategory> category;
  std::vector<std::string> diagnostics;

  bool operator==(const RunRecord&) const = default;
};

json to_json(const RunRecord& run);
RunRecord run_from_json(const json& j);

struct EvalOptions {
  std::filesystem::path out_dir;  // runs/<prover_id>.ndjson and manifest.json
  int workers = 4;
  std::filesystem::path cache_dir;
  BuildOptions build;
  Backend backend = RealBackend{};
  VerifyOptions verify;
  std::size_t context_window = 20000;
  // Stop after this many newly executed pairs; used to simulate interruption.
  std::optional<std::size_t> max_pairs;
};

/// Executes every (record, prover) pair not already present in the results
/// log, appending each finished pair as one NDJSON line. A failing pair is
/// recorded as unsolved with a diagnostic. Returns the runs for all pairs
/// known so far, in slice order then prover order.
std::vector<RunRecord> run_evaluation(const DatasetSnapshot& slice,
                                      const std::vector<std::unique_ptr<Prover>>& provers,
                                      const EvalOptions& options);

/// Every complete line of out_dir/runs/*.ndjson; a truncated last line is skipped.
std::vector<RunRecord> load_runs(const std::filesystem::path& out_dir);

// Metrics ---------------------------------------------------------------------

/// Fraction of tasks where any of the first k samples succeeded.
/// Throws Error(InsufficientSamples) if a task has fewer than k samples.
double pass_at_k(const std::vector<std::vector<bool>>& outcomes, std::size_t k);

struct CategoryCell {
  int solved = 0;
  int total = 0;

  double rate() const { return total ? static_cast<double>(solved) / total : 0.0; }
  bool operator==(const CategoryCell&) const = default;
};

/// prover -> category -> cell; cells without tasks are absent. Runs without
/// a category are skipped.
std::map<std::string, std::map<RepoCategory, CategoryCell>> category_breakdown(const std::vector<RunRecord>& runs);

/// Sorted prover ids -> number of tasks solved by exactly those provers.
std::map<std::vector<std::string>, int> intersection_counts(const std::vector<RunRecord>& runs);

struct ProverMetrics {
  std::string id;
  std::string label;
  std::string group;
  int tasks = 0;
  int solved = 0;
  double pass_at_1 = 0.0;
  std::optional<int> k;  // sampling provers only
  std::optional<double> pass_at_k;

  bool operator==(const ProverMetrics&) const = default;
};

struct TokenStats {
  int runs = 0;  // solved runs measured
  std::int64_t p50 = 0;
  std::int64_t p90 = 0;
  std::int64_t max = 0;

  bool operator==(const TokenStats&) const = default;
};

struct MetricsTable {
  std::vector<ProverMetrics> provers;
  int task_count = 0;
  int combined_count = 0;
  std::map<std::string, std::map<RepoCategory, CategoryCell>> categories;
  std::map<std::vector<std::string>, int> intersections;
  std::map<std::string, TokenStats> tokens;  // LLM provers with any solved run

  bool operator==(const MetricsTable&) const = default;
};

/// Missing samples (client errors) count as failures.
MetricsTable compute_metrics(const std::vector<RunRecord>& runs, const std::vector<ProverConfig>& provers);

json to_json(const MetricsTable& metrics);
MetricsTable metrics_from_json(const json& j);

enum class ReportFormat { Markdown, Csv, Json };
std::optional<ReportFormat> parse_report_format(std::string_view text);

std::string emit_report(const MetricsTable& metrics, ReportFormat format);

}  // namespace sorryforge
