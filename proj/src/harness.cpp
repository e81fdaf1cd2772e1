#include "debunc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "debunc/errors.hpp"
#include "debunc/rng.hpp"
#include "json.hpp"

namespace debunc::harness {

namespace {

using nlohmann::json;

[[noreturn]] void fail_line(const std::filesystem::path& path, int line,
                            const std::string& why) {
  throw ParseError(path.string() + ":" + std::to_string(line) + ": " + why);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::vector<Question> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset " + path.string());

  std::vector<Question> out;
  std::unordered_map<std::string, int> seen_ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail_line(path, lineno, "invalid JSON object");

    Question q;
    try {
      if (!j.contains("id") || !j["id"].is_string()) {
        fail_line(path, lineno, "missing string field 'id'");
      }
      q.id = j["id"].get<std::string>();
      if (!j.contains("kind") || !j["kind"].is_string()) {
        fail_line(path, lineno, "missing string field 'kind'");
      }
      q.kind = benchmark_kind_from_string(j["kind"].get<std::string>());
      if (!j.contains("question") || !j["question"].is_string()) {
        fail_line(path, lineno, "missing string field 'question'");
      }
      q.prompt = j["question"].get<std::string>();
      if (j.contains("choices") && !j["choices"].is_null()) {
        if (!j["choices"].is_array()) fail_line(path, lineno, "'choices' must be an array");
        for (const json& c : j["choices"]) {
          if (!c.is_string()) fail_line(path, lineno, "'choices' entries must be strings");
          q.choices.push_back(c.get<std::string>());
        }
      }
      if (j.contains("few_shot") && !j["few_shot"].is_null()) {
        if (!j["few_shot"].is_string()) fail_line(path, lineno, "'few_shot' must be a string");
        q.few_shot = j["few_shot"].get<std::string>();
      }
      if (!j.contains("answer")) fail_line(path, lineno, "missing field 'answer'");
      const json& ans = j["answer"];
      if (is_multiple_choice(q.kind)) {
        if (!ans.is_string() || ans.get<std::string>().size() != 1) {
          fail_line(path, lineno, "'answer' must be a single choice letter");
        }
        q.answer = Answer::of_letter(ans.get<std::string>()[0]);
      } else if (ans.is_number_integer()) {
        q.answer = Answer::of_integer(ans.get<std::int64_t>());
      } else if (ans.is_string()) {
        const std::string s = ans.get<std::string>();
        std::int64_t value = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
          fail_line(path, lineno, "'answer' is not an integer");
        }
        q.answer = Answer::of_integer(value);
      } else {
        fail_line(path, lineno, "'answer' must be an integer or integer string");
      }
      q.validate();
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      fail_line(path, lineno, e.what());
    }

    auto [it, inserted] = seen_ids.emplace(q.id, lineno);
    if (!inserted) {
      fail_line(path, lineno,
                "duplicate question id '" + q.id + "' (first seen on line " +
                    std::to_string(it->second) + ")");
    }
    out.push_back(std::move(q));
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, std::span<const Question> questions) {
  std::string body;
  for (const Question& q : questions) {
    json j;
    j["id"] = q.id;
    j["kind"] = to_string(q.kind);
    j["question"] = q.prompt;
    if (!q.choices.empty()) j["choices"] = q.choices;
    if (q.answer.kind() == Answer::Kind::letter) {
      j["answer"] = std::string(1, q.answer.letter());
    } else {
      j["answer"] = q.answer.integer();
    }
    if (q.few_shot.has_value()) j["few_shot"] = *q.few_shot;
    body += j.dump();
    body += "\n";
  }
  write_text_atomic(path, body);
}

std::vector<Question> sample_questions(std::span<const Question> all, std::size_t k,
                                       std::uint64_t seed) {
  if (k > all.size()) {
    throw ConfigError("sample size " + std::to_string(k) + " exceeds dataset size " +
                      std::to_string(all.size()));
  }
  std::vector<std::size_t> index(all.size());
  std::iota(index.begin(), index.end(), std::size_t{0});
  Rng rng(seed);
  std::vector<Question> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(index.size() - i);
    std::swap(index[i], index[j]);
    out.push_back(all[index[i]]);
  }
  return out;
}

std::vector<Question> gen_arithmetic(std::uint64_t seed, std::size_t count) {
  if (count < 1) throw ConfigError("arithmetic generator needs count >= 1");
  Rng rng(seed);
  std::vector<Question> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::int64_t a = static_cast<std::int64_t>(rng.below(30));
    const std::int64_t b = static_cast<std::int64_t>(rng.below(30));
    const std::int64_t c = static_cast<std::int64_t>(rng.below(30));
    const std::int64_t d = static_cast<std::int64_t>(rng.below(30));
    Question q;
    q.id = "arith-" + std::to_string(i);
    q.kind = BenchmarkKind::arithmetic;
    q.prompt = std::to_string(a) + "+" + std::to_string(b) + "*" + std::to_string(c) +
               "+" + std::to_string(d);
    q.answer = Answer::of_integer(a + b * c + d);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Question> gen_binary_questions(std::uint64_t seed, std::size_t count) {
  if (count < 1) throw ConfigError("binary question generator needs count >= 1");
  Rng rng(seed);
  std::vector<Question> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Question q;
    q.id = "sim-" + std::to_string(i);
    q.kind = BenchmarkKind::mmlu;
    q.prompt = "Simulated decision " + std::to_string(i) +
               ": exactly one option is correct.";
    q.choices = {"first option", "second option"};
    q.answer = Answer::of_letter(rng.below(2) == 0 ? 'A' : 'B');
    out.push_back(std::move(q));
  }
  return out;
}

void GridConfig::validate() const {
  if (methods.empty()) throw ConfigError("grid needs at least one method");
  if (metrics.empty()) throw ConfigError("grid needs at least one metric");
  if (n_agents < 2) throw ConfigError("grid needs at least 2 agents");
  if (n_rounds < 1) throw ConfigError("grid needs at least 1 round");
  if (runs < 1) throw ConfigError("grid needs at least 1 run");
  if (temperature < 0.0) throw ConfigError("temperature must be non-negative");
  if (max_tokens < 1) throw ConfigError("max_tokens must be at least 1");
}

namespace {

struct TaskOutcome {
  bool failed = false;
  bool correct = false;
  std::vector<std::pair<metrics::UncertaintyScore, bool>> samples;
};

}  // namespace

std::vector<ExperimentResult> run_experiment(const GridConfig& grid,
                                             std::span<const Question> dataset,
                                             const BackendSet& agent_backends,
                                             const TranscriptSink& sink) {
  grid.validate();
  if (dataset.empty()) throw EmptyInputError("experiment needs at least one question");
  const BenchmarkKind kind = dataset.front().kind;
  for (const Question& q : dataset) {
    q.validate();
    if (q.kind != kind) {
      throw ConfigError("experiment dataset mixes benchmark kinds; run them separately");
    }
  }
  if (agent_backends.size() != static_cast<std::size_t>(grid.n_agents)) {
    throw PreconditionError("one backend per agent is required");
  }

  struct Cell {
    debate::Method method;
    metrics::Metric metric;
    bool communicated;
  };
  std::vector<Cell> cells;
  for (debate::Method method : grid.methods) {
    if (method == debate::Method::standard) {
      cells.push_back({method, grid.metrics.front(), false});
    } else {
      for (metrics::Metric metric : grid.metrics) {
        cells.push_back({method, metric, true});
      }
    }
  }

  const std::size_t n_questions = dataset.size();
  const std::size_t tasks_per_cell = static_cast<std::size_t>(grid.runs) * n_questions;

  std::vector<ExperimentResult> results;
  results.reserve(cells.size());
  std::mutex sink_mu;

  for (std::size_t cell_idx = 0; cell_idx < cells.size(); ++cell_idx) {
    const Cell& cell = cells[cell_idx];
    debate::DebateConfig dc;
    dc.n_agents = grid.n_agents;
    dc.n_rounds = grid.n_rounds;
    dc.method = cell.method;
    dc.metric = cell.metric;
    dc.benchmark = kind;
    dc.temperature = grid.temperature;
    dc.max_tokens = grid.max_tokens;

    std::vector<TaskOutcome> outcomes(tasks_per_cell);
    parallel_for(tasks_per_cell, grid.workers, [&](std::size_t t) {
      const std::size_t run = t / n_questions;
      const std::size_t qi = t % n_questions;
      // Seeds are task-keyed up front so scheduling cannot change results.
      const std::uint64_t seed =
          Rng::mix(Rng::mix(Rng::mix(grid.seed, cell_idx), run), qi);
      Rng rng(seed);
      TaskOutcome& out = outcomes[t];
      try {
        debate::DebateTranscript transcript =
            debate::run_debate(dataset[qi], dc, agent_backends, rng);
        out.correct = transcript.correct;
        for (const auto& round : transcript.rounds) {
          for (const auto& entry : round) {
            out.samples.emplace_back(
                entry.response.uncertainty,
                matches(entry.response.extracted_answer, dataset[qi].answer));
          }
        }
        if (sink) {
          std::lock_guard lock(sink_mu);
          sink(transcript, static_cast<int>(run));
        }
      } catch (const BackendError&) {
        out.failed = true;
      }
    });

    ExperimentResult result;
    result.config = dc;
    result.metric_communicated = cell.communicated;
    std::vector<std::pair<metrics::UncertaintyScore, bool>> pooled;
    for (int run = 0; run < grid.runs; ++run) {
      int correct = 0;
      int failed = 0;
      for (std::size_t qi = 0; qi < n_questions; ++qi) {
        const TaskOutcome& out =
            outcomes[static_cast<std::size_t>(run) * n_questions + qi];
        if (out.failed) {
          ++failed;
          continue;
        }
        correct += out.correct ? 1 : 0;
        pooled.insert(pooled.end(), out.samples.begin(), out.samples.end());
      }
      const int denom = static_cast<int>(n_questions) - failed;
      result.run_accuracies.push_back(
          denom > 0 ? static_cast<double>(correct) / denom : 0.0);
      result.failed_questions += failed;
    }
    result.mean_accuracy =
        std::accumulate(result.run_accuracies.begin(), result.run_accuracies.end(), 0.0) /
        static_cast<double>(result.run_accuracies.size());
    try {
      result.auroc = metrics::auroc(pooled);
    } catch (const UndefinedAurocError&) {
      result.auroc = std::nullopt;
    }
    results.push_back(std::move(result));
  }

  // Improvement ratios against the standard cell, when one exists.
  const auto baseline =
      std::find_if(results.begin(), results.end(), [](const ExperimentResult& r) {
        return r.config.method == debate::Method::standard;
      });
  if (baseline != results.end() && baseline->mean_accuracy > 0.0) {
    for (ExperimentResult& r : results) {
      r.improvement_ratio = r.mean_accuracy / baseline->mean_accuracy;
    }
  }
  return results;
}

double delta_for_auroc(double target) {
  if (target < 0.5 || target > 1.0) {
    throw ConfigError("AUROC target must lie in [0.5, 1.0]");
  }
  return 1.0 - std::sqrt(2.0 * (1.0 - target));
}

void SweepConfig::validate() const {
  if (auroc_targets.empty()) throw ConfigError("sweep needs at least one AUROC target");
  for (double t : auroc_targets) {
    if (t < 0.5 || t > 1.0) throw ConfigError("AUROC targets must lie in [0.5, 1.0]");
  }
  if (n_questions < 1) throw ConfigError("sweep needs at least one question");
  if (runs < 1) throw ConfigError("sweep needs at least one run");
  if (n_agents < 2) throw ConfigError("sweep needs at least 2 agents");
  if (n_rounds < 1) throw ConfigError("sweep needs at least 1 round");
  if (p_correct < 0.0 || p_correct > 1.0) throw ConfigError("p_correct must lie in [0,1]");
  if (stubbornness < 0.0 || stubbornness > 1.0) {
    throw ConfigError("stubbornness must lie in [0,1]");
  }
}

std::vector<ExperimentResult> run_auroc_sweep(const SweepConfig& config) {
  config.validate();
  const std::vector<Question> questions =
      gen_binary_questions(config.seed, static_cast<std::size_t>(config.n_questions));

  std::vector<ExperimentResult> all;
  for (std::size_t ti = 0; ti < config.auroc_targets.size(); ++ti) {
    const double target = config.auroc_targets[ti];
    const double delta = delta_for_auroc(target);

    backends::SyntheticAgentProfile profile;
    profile.p_correct = config.p_correct;
    profile.uncertainty_given_correct = {0.0, 1.0};
    profile.uncertainty_given_incorrect = {delta, 1.0 + delta};
    profile.influence_rule =
        backends::SyntheticAgentProfile::InfluenceRule::confidence_weighted;
    profile.stubbornness = config.stubbornness;

    BackendSet set;
    for (int a = 0; a < config.n_agents; ++a) {
      set.push_back(std::make_shared<backends::SyntheticBackend>(profile));
    }

    GridConfig grid;
    grid.methods = {debate::Method::standard};
    for (debate::Method m : config.methods) {
      if (m != debate::Method::standard) grid.methods.push_back(m);
    }
    grid.metrics = {metrics::Metric::entropy};
    grid.n_agents = config.n_agents;
    grid.n_rounds = config.n_rounds;
    grid.runs = config.runs;
    grid.seed = Rng::mix(config.seed, ti);
    grid.workers = config.workers;

    std::vector<ExperimentResult> results = run_experiment(grid, questions, set);
    all.insert(all.end(), std::make_move_iterator(results.begin()),
               std::make_move_iterator(results.end()));
  }
  return all;
}

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

RegressionSummary improvement_vs_auroc(std::span<const ExperimentResult> results) {
  std::map<debate::Method, std::vector<std::pair<double, double>>> points;
  for (const ExperimentResult& r : results) {
    if (r.config.method == debate::Method::standard) continue;  // the baseline itself
    if (!r.auroc.has_value() || !r.improvement_ratio.has_value()) continue;
    points[r.config.method].emplace_back(*r.auroc, *r.improvement_ratio);
  }

  RegressionSummary summary;
  for (auto& [method, pts] : points) {
    if (pts.size() < 2) continue;
    std::sort(pts.begin(), pts.end());

    std::vector<double> xs, ys;
    for (const auto& [x, y] : pts) {
      xs.push_back(x);
      ys.push_back(y);
    }
    const double mx =
        std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double my =
        std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx == 0.0) {
      throw PreconditionError("regression needs varying AUROC values for method " +
                              debate::to_string(method));
    }

    MethodRegression line;
    line.method = method;
    line.slope = sxy / sxx;
    line.intercept = my - line.slope * mx;
    const std::vector<double> rx = average_ranks(xs);
    const std::vector<double> ry = average_ranks(ys);
    line.spearman = pearson(rx, ry);
    line.points = pts;
    summary.methods.push_back(std::move(line));
  }
  if (summary.methods.empty()) {
    throw PreconditionError(
        "regression needs at least two results per non-standard method");
  }
  return summary;
}

namespace {

json result_to_json(const ExperimentResult& r) {
  json j;
  j["config"] = {
      {"n_agents", r.config.n_agents},
      {"n_rounds", r.config.n_rounds},
      {"method", debate::to_string(r.config.method)},
      {"metric", metrics::to_string(r.config.metric)},
      {"benchmark", to_string(r.config.benchmark)},
      {"temperature", r.config.temperature},
      {"max_tokens", r.config.max_tokens},
  };
  j["metric_communicated"] = r.metric_communicated;
  j["run_accuracies"] = r.run_accuracies;
  j["mean_accuracy"] = r.mean_accuracy;
  j["auroc"] = r.auroc.has_value() ? json(*r.auroc) : json(nullptr);
  j["failed_questions"] = r.failed_questions;
  j["improvement_ratio"] =
      r.improvement_ratio.has_value() ? json(*r.improvement_ratio) : json(nullptr);
  return j;
}

ExperimentResult result_from_json(const json& j) {
  ExperimentResult r;
  const json& c = j.at("config");
  r.config.n_agents = c.at("n_agents").get<int>();
  r.config.n_rounds = c.at("n_rounds").get<int>();
  r.config.method = debate::method_from_string(c.at("method").get<std::string>());
  r.config.metric = metrics::metric_from_string(c.at("metric").get<std::string>());
  r.config.benchmark = benchmark_kind_from_string(c.at("benchmark").get<std::string>());
  r.config.temperature = c.at("temperature").get<double>();
  r.config.max_tokens = c.at("max_tokens").get<int>();
  r.metric_communicated = j.at("metric_communicated").get<bool>();
  r.run_accuracies = j.at("run_accuracies").get<std::vector<double>>();
  r.mean_accuracy = j.at("mean_accuracy").get<double>();
  if (!j.at("auroc").is_null()) r.auroc = j.at("auroc").get<double>();
  r.failed_questions = j.at("failed_questions").get<int>();
  if (!j.at("improvement_ratio").is_null()) {
    r.improvement_ratio = j.at("improvement_ratio").get<double>();
  }
  return r;
}

std::string method_display(debate::Method m, bool communicated) {
  switch (m) {
    case debate::Method::standard: return "Standard";
    case debate::Method::prompt: return "Confidence in Prompt";
    case debate::Method::attn_others: return "Attention-Others";
    case debate::Method::attn_all: return "Attention-All";
  }
  (void)communicated;
  return "?";
}

std::string metric_display(const ExperimentResult& r) {
  if (!r.metric_communicated) return "N/A";
  switch (r.config.metric) {
    case metrics::Metric::entropy: return "Mean Token Entropy";
    case metrics::Metric::tokensar: return "TokenSAR";
    case metrics::Metric::oracle: return "Oracle";
  }
  return "?";
}

std::string format_accuracy(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << v;
  return out.str();
}

}  // namespace

void write_results(const std::filesystem::path& dir,
                   std::span<const ExperimentResult> results) {
  json j;
  j["results"] = json::array();
  for (const ExperimentResult& r : results) j["results"].push_back(result_to_json(r));
  std::filesystem::create_directories(dir);
  write_text_atomic(dir / "results.json", j.dump(2) + "\n");
}

std::vector<ExperimentResult> read_results(const std::filesystem::path& dir) {
  const std::string body = read_text(dir / "results.json");
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("results")) {
    throw ParseError((dir / "results.json").string() + ": not a results file");
  }
  std::vector<ExperimentResult> out;
  for (const json& r : j["results"]) out.push_back(result_from_json(r));
  return out;
}

std::string render_table(std::span<const ExperimentResult> results) {
  // Benchmarks become columns; (estimator, method) pairs become rows.
  std::vector<std::string> benchmarks;
  for (const ExperimentResult& r : results) {
    const std::string b = to_string(r.config.benchmark);
    if (std::find(benchmarks.begin(), benchmarks.end(), b) == benchmarks.end()) {
      benchmarks.push_back(b);
    }
  }
  std::sort(benchmarks.begin(), benchmarks.end());

  struct Row {
    std::string estimator;
    std::string method;
    // (sum, count) per benchmark: several results for one cell (e.g. sweep
    // points) report their mean.
    std::map<std::string, std::pair<double, int>> by_benchmark;
  };
  std::vector<Row> rows;
  auto row_for = [&](const std::string& est, const std::string& method) -> Row& {
    for (Row& row : rows) {
      if (row.estimator == est && row.method == method) return row;
    }
    rows.push_back({est, method, {}});
    return rows.back();
  };
  int total_failed = 0;
  for (const ExperimentResult& r : results) {
    Row& row = row_for(metric_display(r), method_display(r.config.method, r.metric_communicated));
    auto& [sum, count] = row.by_benchmark[to_string(r.config.benchmark)];
    sum += r.mean_accuracy;
    count += 1;
    total_failed += r.failed_questions;
  }
  // Standard (the baseline, estimator N/A) sorts first, then by estimator.
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    const bool a_na = a.estimator == "N/A";
    const bool b_na = b.estimator == "N/A";
    if (a_na != b_na) return a_na;
    return a.estimator < b.estimator;
  });

  std::vector<std::string> header{"Estimator", "Method"};
  header.insert(header.end(), benchmarks.begin(), benchmarks.end());
  header.push_back("Average");

  std::vector<std::vector<std::string>> body;
  for (const Row& row : rows) {
    std::vector<std::string> cells{row.estimator, row.method};
    double sum = 0.0;
    int present = 0;
    for (const std::string& b : benchmarks) {
      auto it = row.by_benchmark.find(b);
      if (it == row.by_benchmark.end()) {
        cells.push_back("-");
      } else {
        const double mean = it->second.first / it->second.second;
        cells.push_back(format_accuracy(mean));
        sum += mean;
        ++present;
      }
    }
    cells.push_back(present > 0 ? format_accuracy(sum / present) : "-");
    body.push_back(std::move(cells));
  }

  std::vector<std::size_t> widths(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
  for (const auto& cells : body) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      widths[c] = std::max(widths[c], cells[c].size());
    }
  }

  std::ostringstream out;
  auto emit_row = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out << "  ";
      out << std::left << std::setw(static_cast<int>(widths[c])) << cells[c];
    }
    out << "\n";
  };
  emit_row(header);
  std::size_t total_width = 0;
  for (std::size_t c = 0; c < widths.size(); ++c) {
    total_width += widths[c] + (c > 0 ? 2 : 0);
  }
  out << std::string(total_width, '-') << "\n";
  for (const auto& cells : body) emit_row(cells);
  out << "\n";
  out << "Failed questions excluded from accuracy denominators: " << total_failed << "\n";
  return out.str();
}

std::string render_regression(const RegressionSummary& summary) {
  std::ostringstream out;
  out << "Improvement ratio vs AUROC (OLS per method)\n";
  for (const MethodRegression& line : summary.methods) {
    out << "  " << debate::to_string(line.method) << ": slope "
        << std::fixed << std::setprecision(4) << line.slope << ", intercept "
        << line.intercept << ", spearman " << line.spearman << ", points";
    for (const auto& [x, y] : line.points) {
      out << " (" << std::setprecision(4) << x << ", " << y << ")";
    }
    out << "\n";
  }
  return out.str();
}

void write_regression(const std::filesystem::path& dir, const RegressionSummary& summary) {
  json j;
  j["methods"] = json::array();
  for (const MethodRegression& line : summary.methods) {
    json m;
    m["method"] = debate::to_string(line.method);
    m["slope"] = line.slope;
    m["intercept"] = line.intercept;
    m["spearman"] = line.spearman;
    m["points"] = json::array();
    for (const auto& [x, y] : line.points) m["points"].push_back({x, y});
    j["methods"].push_back(std::move(m));
  }
  std::filesystem::create_directories(dir);
  write_text_atomic(dir / "regression.json", j.dump(2) + "\n");
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t w = workers > 0 ? static_cast<std::size_t>(workers)
                              : std::max(1u, std::thread::hardware_concurrency());
  w = std::min(w, n);
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex err_mu;
  std::exception_ptr error;

  auto worker = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        {
          std::lock_guard lock(err_mu);
          if (!error) error = std::current_exception();
        }
        stop.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t i = 0; i < w; ++i) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

FileConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());

  auto trim = [](std::string s) {
    const std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return std::string();
    const std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  };

  FileConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      fail_line(path, lineno, "sections are not supported; use flat key = value lines");
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail_line(path, lineno, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\''))) {
      value = value.substr(1, value.size() - 2);
    }
    if (key == "endpoint_url") {
      cfg.endpoint_url = value;
    } else if (key == "model") {
      cfg.model = value;
    } else if (key == "concurrency") {
      int parsed = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
      if (ec != std::errc() || ptr != value.data() + value.size() || parsed < 1) {
        fail_line(path, lineno, "concurrency must be a positive integer");
      }
      cfg.concurrency = parsed;
    } else {
      fail_line(path, lineno, "unknown key '" + key + "'");
    }
  }
  return cfg;
}

}  // namespace debunc::harness
