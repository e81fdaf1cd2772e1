#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "debunc/api_client.hpp"
#include "debunc/backends.hpp"
#include "debunc/debate.hpp"
#include "debunc/errors.hpp"
#include "debunc/harness.hpp"
#include "debunc/metrics.hpp"
#include "debunc/tinylm.hpp"

namespace {

using namespace debunc;

std::vector<debate::Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<debate::Method> out;
  for (const std::string& name : names) out.push_back(debate::method_from_string(name));
  return out;
}

std::vector<metrics::Metric> parse_metrics(const std::vector<std::string>& names) {
  std::vector<metrics::Metric> out;
  for (const std::string& name : names) out.push_back(metrics::metric_from_string(name));
  return out;
}

struct RunOptions {
  std::string dataset;
  std::vector<std::string> methods{"standard"};
  std::vector<std::string> metrics{"entropy"};
  std::string backend = "synthetic";
  int agents = 3;
  int rounds = 3;
  int runs = 5;
  std::size_t sample = 0;  // 0 = whole dataset
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::string config_path;
  double p_correct = 0.7;
  double profile_auroc = 0.9;
  double temperature = 1.0;
  int max_tokens = 64;
  int workers = 0;
  bool transcripts = false;
};

harness::BackendSet make_backends(const RunOptions& opt) {
  harness::BackendSet set;
  if (opt.backend == "synthetic") {
    backends::SyntheticAgentProfile profile;
    profile.p_correct = opt.p_correct;
    const double delta = harness::delta_for_auroc(opt.profile_auroc);
    profile.uncertainty_given_correct = {0.0, 1.0};
    profile.uncertainty_given_incorrect = {delta, 1.0 + delta};
    for (int a = 0; a < opt.agents; ++a) {
      set.push_back(std::make_shared<backends::SyntheticBackend>(profile));
    }
  } else if (opt.backend == "tinylm") {
    tinylm::TinyModelConfig config;
    config.seed = opt.seed;
    auto model = std::make_shared<const tinylm::TinyModel>(config);
    for (int a = 0; a < opt.agents; ++a) {
      set.push_back(std::make_shared<backends::TinyLmBackend>(model));
    }
  } else if (opt.backend == "api") {
    if (opt.config_path.empty()) {
      throw ConfigError("the api backend needs --config pointing at a config file");
    }
    const harness::FileConfig file = harness::parse_config_file(opt.config_path);
    if (file.endpoint_url.empty() || file.model.empty()) {
      throw ConfigError("config file must set endpoint_url and model");
    }
    api::ApiConfig config;
    config.endpoint_url = file.endpoint_url;
    config.model = file.model;
    config.concurrency = file.concurrency;
    auto backend = std::make_shared<api::ApiBackend>(config);
    for (int a = 0; a < opt.agents; ++a) set.push_back(backend);
  } else {
    throw ConfigError("unknown backend '" + opt.backend +
                      "' (expected synthetic, tinylm, or api)");
  }
  return set;
}

std::string sanitize_for_filename(std::string s) {
  for (char& c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
  }
  return s;
}

int cmd_run(const RunOptions& opt) {
  std::vector<Question> dataset = harness::load_dataset(opt.dataset);
  if (opt.sample > 0) {
    dataset = harness::sample_questions(dataset, opt.sample, opt.seed);
  }

  harness::GridConfig grid;
  grid.methods = parse_methods(opt.methods);
  grid.metrics = parse_metrics(opt.metrics);
  grid.n_agents = opt.agents;
  grid.n_rounds = opt.rounds;
  grid.runs = opt.runs;
  grid.temperature = opt.temperature;
  grid.max_tokens = opt.max_tokens;
  grid.seed = opt.seed;
  grid.workers = opt.workers;

  const harness::BackendSet backends = make_backends(opt);

  harness::TranscriptSink sink;
  const std::filesystem::path out_dir = opt.out_dir;
  if (opt.transcripts) {
    std::filesystem::create_directories(out_dir / "transcripts");
    sink = [&out_dir](const debate::DebateTranscript& t, int run) {
      const std::string name = to_string(t.config.method) + "_" +
                               metrics::to_string(t.config.metric) + "_run" +
                               std::to_string(run) + "_" +
                               sanitize_for_filename(t.question.id) + ".json";
      debate::write_transcript(out_dir / "transcripts" / name, t);
    };
  }

  const std::vector<harness::ExperimentResult> results =
      harness::run_experiment(grid, dataset, backends, sink);
  harness::write_results(out_dir, results);
  const std::string table = harness::render_table(results);
  std::cout << table;
  std::cout << "results written to " << (out_dir / "results.json").string() << "\n";
  return 0;
}

int cmd_gen_arith(std::size_t count, std::uint64_t seed, const std::string& out_path) {
  const std::vector<Question> questions = harness::gen_arithmetic(seed, count);
  harness::write_dataset(out_path, questions);
  std::cout << "wrote " << questions.size() << " questions to " << out_path << "\n";
  return 0;
}

int cmd_simulate(const std::vector<double>& targets, const std::string& profiles_path,
                 const std::string& out_dir, std::uint64_t seed, int workers) {
  harness::SweepConfig config;
  if (!targets.empty()) config.auroc_targets = targets;
  config.seed = seed;
  config.workers = workers;

  if (!profiles_path.empty()) {
    std::ifstream in(profiles_path);
    if (!in) throw ParseError("cannot open profiles file " + profiles_path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ParseError(profiles_path + ": not a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
      if (key == "p_correct") {
        config.p_correct = value.get<double>();
      } else if (key == "stubbornness") {
        config.stubbornness = value.get<double>();
      } else if (key == "n_questions") {
        config.n_questions = value.get<int>();
      } else if (key == "runs") {
        config.runs = value.get<int>();
      } else if (key == "agents") {
        config.n_agents = value.get<int>();
      } else if (key == "rounds") {
        config.n_rounds = value.get<int>();
      } else if (key == "methods") {
        config.methods = parse_methods(value.get<std::vector<std::string>>());
      } else {
        throw ParseError(profiles_path + ": unknown key '" + key + "'");
      }
    }
  }

  const std::vector<harness::ExperimentResult> results = harness::run_auroc_sweep(config);
  harness::write_results(out_dir, results);
  const harness::RegressionSummary summary = harness::improvement_vs_auroc(results);
  harness::write_regression(out_dir, summary);
  std::cout << harness::render_regression(summary);
  std::cout << "results written to " << out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& in_dir, bool fig3) {
  const std::vector<harness::ExperimentResult> results = harness::read_results(in_dir);
  std::cout << harness::render_table(results);
  if (fig3) {
    const harness::RegressionSummary summary = harness::improvement_vs_auroc(results);
    std::cout << "\n" << harness::render_regression(summary);
  }
  return 0;
}

int cmd_metrics(const std::string& logprobs_path) {
  std::ifstream in(logprobs_path);
  if (!in) throw ParseError("cannot open logprob dump " + logprobs_path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("tokens") ||
      !j["tokens"].is_array()) {
    throw ParseError(logprobs_path + ": expected {\"tokens\": [...]}");
  }

  std::map<std::string, std::int32_t> token_ids;
  auto intern = [&token_ids](const std::string& surface) {
    auto [it, inserted] =
        token_ids.emplace(surface, static_cast<std::int32_t>(token_ids.size()));
    return it->second;
  };

  std::vector<metrics::TokenRecord> tokens;
  for (const nlohmann::json& t : j["tokens"]) {
    metrics::TokenRecord record;
    record.surface = t.at("token").get<std::string>();
    record.token_id = intern(record.surface);
    record.logprob = t.at("logprob").get<double>();
    if (t.contains("top_logprobs") && t["top_logprobs"].is_array() &&
        !t["top_logprobs"].empty()) {
      std::map<std::int32_t, double> probs;
      for (const nlohmann::json& alt : t["top_logprobs"]) {
        probs[intern(alt.at("token").get<std::string>())] =
            std::exp(alt.at("logprob").get<double>());
      }
      probs.emplace(record.token_id, std::exp(record.logprob));
      record.distribution = metrics::TokenDistribution::topk_dist(
          std::move(probs), static_cast<int>(t["top_logprobs"].size()));
    }
    tokens.push_back(std::move(record));
  }
  if (tokens.empty()) throw EmptyInputError("logprob dump holds no tokens");

  std::vector<metrics::TokenDistribution> dists;
  bool have_all_dists = true;
  for (const metrics::TokenRecord& t : tokens) {
    if (!t.distribution.has_value()) {
      have_all_dists = false;
      break;
    }
    dists.push_back(*t.distribution);
  }

  if (have_all_dists) {
    const metrics::UncertaintyScore entropy = metrics::mean_token_entropy(dists);
    std::cout << "mean_token_entropy: " << entropy.value
              << (entropy.approximate ? " (approximate: top-k renormalized)" : "")
              << "\n";
  } else {
    std::cout << "mean_token_entropy: unavailable (tokens without top_logprobs)\n";
  }
  const metrics::UncertaintyScore sar =
      metrics::token_sar(tokens, metrics::default_relevance_at);
  std::cout << "token_sar: " << sar.value << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uncertainty-aware multi-agent debate"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "run a debate experiment grid");
  run->add_option("--dataset", run_opt.dataset, "JSONL dataset path")->required();
  run->add_option("--method", run_opt.methods,
                  "debate method(s): standard, prompt, attn_others, attn_all")
      ->delimiter(',');
  run->add_option("--metric", run_opt.metrics,
                  "uncertainty metric(s): entropy, tokensar, oracle")
      ->delimiter(',');
  run->add_option("--backend", run_opt.backend, "synthetic, tinylm, or api");
  run->add_option("--agents", run_opt.agents, "agents per debate");
  run->add_option("--rounds", run_opt.rounds, "debate rounds");
  run->add_option("--runs", run_opt.runs, "independent runs");
  run->add_option("--sample", run_opt.sample, "sample this many questions (0 = all)");
  run->add_option("--seed", run_opt.seed, "root seed");
  run->add_option("--out", run_opt.out_dir, "output directory");
  run->add_option("--config", run_opt.config_path, "config file (api backend)");
  run->add_option("--p-correct", run_opt.p_correct,
                  "synthetic backend round-1 accuracy");
  run->add_option("--profile-auroc", run_opt.profile_auroc,
                  "synthetic backend target metric AUROC");
  run->add_option("--temperature", run_opt.temperature, "sampling temperature");
  run->add_option("--max-tokens", run_opt.max_tokens, "generation budget per response");
  run->add_option("--workers", run_opt.workers, "worker threads (0 = hardware)");
  run->add_flag("--transcripts", run_opt.transcripts, "write per-debate transcripts");
  run->callback([&run_opt] { cmd_run(run_opt); });

  std::size_t gen_count = 100;
  std::uint64_t gen_seed = 0;
  std::string gen_out = "arithmetic.jsonl";
  CLI::App* gen = app.add_subcommand("gen-arith", "generate arithmetic questions");
  gen->add_option("--count", gen_count, "number of questions");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output JSONL path");
  gen->callback([&] { cmd_gen_arith(gen_count, gen_seed, gen_out); });

  std::vector<double> sim_targets;
  std::string sim_profiles;
  std::string sim_out = "sweep";
  std::uint64_t sim_seed = 1;
  int sim_workers = 0;
  CLI::App* sim = app.add_subcommand("simulate", "synthetic AUROC sweep");
  sim->add_option("--auroc-sweep", sim_targets, "AUROC targets, e.g. 0.5,0.7,0.9,1.0")
      ->delimiter(',');
  sim->add_option("--profiles", sim_profiles, "JSON file with sweep overrides");
  sim->add_option("--out", sim_out, "output directory");
  sim->add_option("--seed", sim_seed, "sweep seed");
  sim->add_option("--workers", sim_workers, "worker threads (0 = hardware)");
  sim->callback([&] { cmd_simulate(sim_targets, sim_profiles, sim_out, sim_seed, sim_workers); });

  std::string report_in;
  bool report_fig3 = false;
  CLI::App* report = app.add_subcommand("report", "render tables from saved results");
  report->add_option("--in", report_in, "results directory")->required();
  report->add_flag("--fig3", report_fig3, "also render the improvement-vs-AUROC fit");
  report->callback([&] { cmd_report(report_in, report_fig3); });

  std::string metrics_path;
  CLI::App* metrics_cmd =
      app.add_subcommand("metrics", "compute uncertainty metrics from a logprob dump");
  metrics_cmd->add_option("--logprobs", metrics_path, "JSON logprob dump")->required();
  metrics_cmd->callback([&] { cmd_metrics(metrics_path); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const debunc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
