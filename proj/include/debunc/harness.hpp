#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "debunc/backends.hpp"
#include "debunc/debate.hpp"
#include "debunc/question.hpp"

namespace debunc::harness {

// --- Datasets ---------------------------------------------------------

/// Reads one JSON object per line: {"id", "kind", "question", "choices"?,
/// "answer", "few_shot"?}. Malformed lines raise ParseError naming the line
/// number; duplicate ids raise ParseError.
std::vector<Question> load_dataset(const std::filesystem::path& path);

/// Writes the same format (atomic temp-then-rename).
void write_dataset(const std::filesystem::path& path, std::span<const Question> questions);

/// Deterministic K-question sample (without replacement) of a dataset.
std::vector<Question> sample_questions(std::span<const Question> all, std::size_t k,
                                       std::uint64_t seed);

/// a + b*c + d problems with operands in [0, 30); ground truth uses
/// standard precedence.
std::vector<Question> gen_arithmetic(std::uint64_t seed, std::size_t count);

/// Two-choice questions for simulation runs; answers split between the two
/// letters by seed.
std::vector<Question> gen_binary_questions(std::uint64_t seed, std::size_t count);

// --- Experiments ------------------------------------------------------

using BackendSet = std::vector<std::shared_ptr<backends::Backend>>;

/// One grid: every configured method (x metric, for methods that
/// communicate uncertainty) over the same dataset and backends. The
/// standard method ignores the metric for communication, so it contributes
/// a single cell measured with the first configured metric.
struct GridConfig {
  std::vector<debate::Method> methods{debate::Method::standard};
  std::vector<metrics::Metric> metrics{metrics::Metric::entropy};
  int n_agents = 3;
  int n_rounds = 3;
  int runs = 5;
  double temperature = 1.0;
  int max_tokens = 64;
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct ExperimentResult {
  debate::DebateConfig config;
  /// False for the standard cell: its metric is measured on transcripts but
  /// never communicated (reports show "N/A").
  bool metric_communicated = true;
  std::vector<double> run_accuracies;
  double mean_accuracy = 0.0;
  /// Pooled over every response of every round and run; absent when only
  /// one correctness class occurred.
  std::optional<double> auroc;
  int failed_questions = 0;  // pooled over runs; excluded from denominators
  /// mean_accuracy / standard-cell mean accuracy; absent without a
  /// baseline. The standard cell itself reports 1.
  std::optional<double> improvement_ratio;
};

/// Called for every finished debate (possibly from worker threads, but
/// never concurrently).
using TranscriptSink = std::function<void(const debate::DebateTranscript&, int run)>;

/// Executes the grid: runs x questions debates per cell, question-level
/// parallelism, per-task seeds derived up front so results do not depend
/// on scheduling. Questions whose debate raises BackendError are recorded
/// as failed and excluded from accuracy denominators. All questions must
/// share one benchmark kind.
std::vector<ExperimentResult> run_experiment(const GridConfig& grid,
                                             std::span<const Question> dataset,
                                             const BackendSet& agent_backends,
                                             const TranscriptSink& sink = {});

// --- AUROC sweep (simulation) ------------------------------------------

/// Uniform(0,1) vs Uniform(delta, 1+delta) separation needed for a target
/// AUROC in [0.5, 1]: delta = 1 - sqrt(2(1 - target)).
double delta_for_auroc(double target);

struct SweepConfig {
  std::vector<double> auroc_targets{0.5, 0.7, 0.9, 1.0};
  std::vector<debate::Method> methods{debate::Method::prompt,
                                      debate::Method::attn_others,
                                      debate::Method::attn_all};
  int n_questions = 800;
  int runs = 3;
  int n_agents = 3;
  int n_rounds = 3;
  double p_correct = 0.5;
  double stubbornness = 0.0;
  std::uint64_t seed = 1;
  int workers = 0;

  void validate() const;
};

/// For each AUROC target, runs a synthetic grid (standard baseline plus the
/// configured methods) on binary questions with the correct/incorrect
/// uncertainty ranges set to hit the target. Returns all cells,
/// improvement ratios taken against each target's own standard cell.
std::vector<ExperimentResult> run_auroc_sweep(const SweepConfig& config);

// --- Regression ---------------------------------------------------------

struct MethodRegression {
  debate::Method method = debate::Method::prompt;
  double slope = 0.0;
  double intercept = 0.0;
  double spearman = 0.0;
  std::vector<std::pair<double, double>> points;  // (auroc, improvement ratio)
};

struct RegressionSummary {
  std::vector<MethodRegression> methods;
};

/// Ordinary least squares of improvement ratio on AUROC per method, plus
/// Spearman rank correlation. Standard cells are the baseline (ratio
/// identically 1) and are skipped; methods need >= 2 usable points.
RegressionSummary improvement_vs_auroc(std::span<const ExperimentResult> results);

// --- Persistence and report ---------------------------------------------

/// results.json in `dir` (atomic write); read_results reproduces the values
/// bit-exactly.
void write_results(const std::filesystem::path& dir, std::span<const ExperimentResult> results);
std::vector<ExperimentResult> read_results(const std::filesystem::path& dir);

/// Accuracy table: rows = estimator x method, columns = benchmarks +
/// average, failed-question count as a footnote.
std::string render_table(std::span<const ExperimentResult> results);

std::string render_regression(const RegressionSummary& summary);
void write_regression(const std::filesystem::path& dir, const RegressionSummary& summary);

// --- Utilities ----------------------------------------------------------

/// Runs fn(0..n-1) on up to `workers` threads (0 = hardware concurrency).
/// The first exception is rethrown after all workers join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Flat key-value config file ("key = value", '#' comments): endpoint_url,
/// model, concurrency. Unknown keys are errors so typos surface.
struct FileConfig {
  std::string endpoint_url;
  std::string model;
  int concurrency = 4;
};
FileConfig parse_config_file(const std::filesystem::path& path);

}  // namespace debunc::harness
