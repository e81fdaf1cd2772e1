// Acceptance gate: one self-contained check per release criterion, each
// printing a single [PASS]/[FAIL] line. Checks recompute expectations from
// first principles (closed forms, brute-force references, analytic debate
// dynamics) rather than trusting library internals, and every criterion is
// held to a wall-clock budget. Exit status is nonzero when anything fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "debunc/attnscale.hpp"
#include "debunc/backends.hpp"
#include "debunc/confidence.hpp"
#include "debunc/debate.hpp"
#include "debunc/harness.hpp"
#include "debunc/metrics.hpp"
#include "debunc/question.hpp"
#include "debunc/rng.hpp"
#include "debunc/tinylm.hpp"

namespace {

using namespace debunc;
using metrics::TokenDistribution;
using metrics::TokenRecord;
using metrics::UncertaintyScore;

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw CheckFailure(what);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void expect_near(double got, double want, double tol, const std::string& what) {
  expect(std::abs(got - want) <= tol,
         what + ": got " + fmt(got) + ", want " + fmt(want) + " +/- " + fmt(tol));
}

TokenRecord record(std::int32_t id, std::string surface, double prob) {
  TokenRecord r;
  r.token_id = id;
  r.surface = std::move(surface);
  r.logprob = std::log(prob);
  return r;
}

Question binary_question() {
  Question q;
  q.id = "acceptance-binary";
  q.kind = BenchmarkKind::mmlu;
  q.prompt = "Which of the following is the first option?";
  q.choices = {"the first option", "the second option"};
  q.answer = Answer::of_letter('A');
  return q;
}

harness::BackendSet synthetic_panel(int n, double p_correct) {
  harness::BackendSet set;
  for (int i = 0; i < n; ++i) {
    backends::SyntheticAgentProfile profile;
    profile.p_correct = p_correct;
    profile.stubbornness = 0.0;
    set.push_back(std::make_shared<backends::SyntheticBackend>(profile));
  }
  return set;
}

// --- 1: confidence mapping ------------------------------------------------

std::string check_confidence() {
  for (double x : {1e-6, 1.0, 1e6}) {
    const std::vector<double> u{x, x, x};
    for (const auto& level : confidence::map_confidences(u)) {
      expect(level.value == 5, "equal uncertainties at scale " + fmt(x) +
                                   " must map to 5, got " + std::to_string(level.value));
    }
  }

  {
    const std::vector<double> u{1.0, 2.0, 4.0};
    const auto levels = confidence::map_confidences(u);
    const std::array<int, 3> want{8, 4, 2};
    for (std::size_t i = 0; i < want.size(); ++i) {
      expect(levels[i].value == want[i],
             "[1,2,4] must map to [8,4,2], slot " + std::to_string(i) + " got " +
                 std::to_string(levels[i].value));
    }
  }

  Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(7);
    std::vector<double> u, u10;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::pow(10.0, -6.0 + 12.0 * rng.next_unit());
      u.push_back(v);
      u10.push_back(10.0 * v);
    }

    const auto s = confidence::scaled_confidences(u);
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
    expect(std::abs(mean - 5.0) <= 1e-12,
           "pre-clamp mean must be 5, got " + fmt(mean) + " on trial " + std::to_string(trial));

    const auto s10 = confidence::scaled_confidences(u10);
    for (std::size_t i = 0; i < n; ++i) {
      expect(std::abs(s[i] - s10[i]) <= 1e-9 * std::max(1.0, std::abs(s[i])),
             "scaled confidences must survive a x10 rescale: " + fmt(s[i]) + " vs " +
                 fmt(s10[i]));
    }
    const auto c = confidence::map_confidences(u);
    const auto c10 = confidence::map_confidences(u10);
    for (std::size_t i = 0; i < n; ++i) {
      expect(c[i].value == c10[i].value,
             "integer levels must survive a x10 rescale: " + std::to_string(c[i].value) +
                 " vs " + std::to_string(c10[i].value));
    }
  }
  return "neutral and [1,2,4] examples, mean-5 within 1e-12 and x10 invariance on 1000 inputs";
}

// --- 2: attention rescaling -----------------------------------------------

// Independent reference: multiply span weights by their agent's multiplier,
// then restore the union's original mass with one shared factor.
attnscale::AttentionVector reference_rescale(const attnscale::AttentionVector& w,
                                             const attnscale::SpanMap& spans,
                                             const attnscale::MultiplierSet& m) {
  attnscale::AttentionVector f = w;
  double span_mass = 0.0, scaled_mass = 0.0;
  for (const auto& span : spans.entries) {
    for (std::size_t i = span.start; i < span.end; ++i) {
      f[i] = w[i] * m.at(span.agent_id);
      span_mass += w[i];
      scaled_mass += f[i];
    }
  }
  if (scaled_mass == 0.0) return w;
  const double restore = span_mass / scaled_mass;
  for (const auto& span : spans.entries) {
    for (std::size_t i = span.start; i < span.end; ++i) f[i] *= restore;
  }
  return f;
}

std::string check_rescale() {
  Rng rng(1234);
  int brute_compared = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const bool small = trial % 4 == 0;
    const std::size_t len = small ? 6 + rng.below(3) : 9 + rng.below(56);

    attnscale::AttentionVector w(len);
    double total = 0.0;
    for (auto& x : w) {
      x = 0.01 + rng.next_unit();
      total += x;
    }
    for (auto& x : w) x /= total;

    const std::size_t n_spans = rng.below(4);
    attnscale::SpanMap spans;
    attnscale::MultiplierSet mult;
    if (n_spans > 0) {
      std::set<std::size_t> cuts;
      while (cuts.size() < 2 * n_spans) cuts.insert(rng.below(len + 1));
      const std::vector<std::size_t> c(cuts.begin(), cuts.end());
      for (std::size_t j = 0; j < n_spans; ++j) {
        spans.entries.push_back({static_cast<int>(j), c[2 * j], c[2 * j + 1]});
        mult.set(static_cast<int>(j), std::pow(10.0, -5.0 + 7.0 * rng.next_unit()));
      }
    }
    spans.validate();

    const auto f = attnscale::rescale_weights(w, spans, mult);
    expect(f.size() == len, "rescale must preserve length");

    const double fsum = std::accumulate(f.begin(), f.end(), 0.0);
    expect(std::abs(fsum - 1.0) <= 1e-9,
           "rescaled mass must stay 1, got " + fmt(fsum) + " on trial " + std::to_string(trial));

    std::vector<bool> in_span(len, false);
    for (const auto& span : spans.entries) {
      for (std::size_t i = span.start; i < span.end; ++i) in_span[i] = true;
    }
    for (std::size_t i = 0; i < len; ++i) {
      if (!in_span[i]) {
        expect(f[i] == w[i], "weights outside every span must come back bit-identical");
      }
    }

    attnscale::MultiplierSet scaled_mult;
    const double factor = std::pow(10.0, -3.0 + 6.0 * rng.next_unit());
    for (const auto& [agent, value] : mult.by_agent) scaled_mult.set(agent, value * factor);
    const auto f_scaled = attnscale::rescale_weights(w, spans, scaled_mult);
    for (std::size_t i = 0; i < len; ++i) {
      expect(std::abs(f_scaled[i] - f[i]) <= 1e-12,
             "multiplying every multiplier by " + fmt(factor) + " must not move weight " +
                 std::to_string(i));
    }

    if (len <= 8) {
      const auto ref = reference_rescale(w, spans, mult);
      for (std::size_t i = 0; i < len; ++i) {
        expect(std::abs(f[i] - ref[i]) <= 1e-12,
               "brute-force reference disagrees at position " + std::to_string(i) + ": " +
                   fmt(f[i]) + " vs " + fmt(ref[i]));
      }
      ++brute_compared;
    }
  }
  return "10000 random instances: conservation, bit-exact bystanders, multiplier-scale "
         "invariance, " +
         std::to_string(brute_compared) + " brute-force comparisons";
}

// --- 3: decoder attention hook ---------------------------------------------

std::string check_tinylm_hook() {
  const tinylm::TinyModel model((tinylm::TinyModelConfig()));

  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t len = 16 + rng.below(200);
    std::vector<std::int32_t> prompt(len);
    for (auto& t : prompt) t = static_cast<std::int32_t>(rng.below(256));

    attnscale::SpanMap spans;
    spans.entries = {{0, 0, len / 3}, {1, len / 2, len / 2 + len / 4}};
    attnscale::MultiplierSet ones;
    ones.set(0, 1.0);
    ones.set(1, 1.0);

    tinylm::SamplingParams sampling;
    sampling.temperature = 1.0;
    sampling.seed = 1000 + static_cast<std::uint64_t>(trial);
    sampling.max_tokens = 12;

    const auto hooked = model.generate(prompt, spans, ones, sampling);
    const auto plain = model.generate(prompt, sampling);
    expect(hooked.tokens.size() == plain.tokens.size(),
           "unit multipliers changed the generation length on prompt " + std::to_string(trial));
    for (std::size_t i = 0; i < hooked.tokens.size(); ++i) {
      expect(hooked.tokens[i].token_id == plain.tokens[i].token_id,
             "unit multipliers changed token " + std::to_string(i) + " on prompt " +
                 std::to_string(trial));
    }
  }

  int steps_checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::int32_t> prompt(96);
    for (auto& t : prompt) t = static_cast<std::int32_t>(rng.below(256));

    attnscale::SpanMap spans;
    spans.entries = {{0, 0, 32}, {1, 48, 80}};
    attnscale::MultiplierSet oracle;
    oracle.set(0, attnscale::kOracleIncorrectMultiplier);
    oracle.set(1, 1.0);

    tinylm::SamplingParams sampling;
    sampling.seed = 500 + static_cast<std::uint64_t>(trial);
    sampling.max_tokens = 12;

    const auto trace = model.generate(prompt, spans, oracle, sampling);
    expect(!trace.steps.empty(), "suppression run produced no decode steps");
    for (const auto& step : trace.steps) {
      for (const auto& heads : step.layers) {
        for (const auto& snap : heads) {
          double suppressed = 0.0, boosted = 0.0;
          for (std::size_t i = 0; i < 32; ++i) suppressed += snap.post[i];
          for (std::size_t i = 48; i < 80; ++i) boosted += snap.post[i];
          expect(boosted > 0.0, "boosted span lost all attention mass");
          expect(suppressed < 1e-3 * boosted,
                 "suppressed span keeps " + fmt(suppressed) + " against boosted " +
                     fmt(boosted) + " on prompt " + std::to_string(trial));
          ++steps_checked;
        }
      }
    }
  }
  return "hooked generation token-identical on 100 prompts; mass ratio under 1e-3 across " +
         std::to_string(steps_checked) + " attention rows";
}

// --- 4: AUROC separation -----------------------------------------------------

std::string check_auroc() {
  const Question q = binary_question();
  backends::SyntheticAgentProfile profile;
  profile.p_correct = 0.5;

  Rng rng(11);
  std::vector<std::pair<double, bool>> samples;
  samples.reserve(10000);
  for (int i = 0; i < 10000; ++i) {
    const auto r = backends::synthetic_generate(profile, q, {}, rng);
    samples.emplace_back(r.uncertainty.scalar_value(), matches(r.extracted_answer, q.answer));
  }
  const double measured = metrics::auroc(std::span<const std::pair<double, bool>>(samples));
  expect_near(measured, 0.875, 0.02, "U(0,1) vs U(0.5,1.5) separation");

  std::vector<std::pair<UncertaintyScore, bool>> oracle_samples;
  oracle_samples.reserve(10000);
  for (int i = 0; i < 10000; ++i) {
    const auto r =
        backends::synthetic_generate(profile, q, {}, rng, metrics::Metric::oracle);
    oracle_samples.emplace_back(r.uncertainty, matches(r.extracted_answer, q.answer));
  }
  const double oracle_auroc =
      metrics::auroc(std::span<const std::pair<UncertaintyScore, bool>>(oracle_samples));
  expect(oracle_auroc == 1.0, "oracle metric must score exactly 1.0, got " + fmt(oracle_auroc));

  return "measured " + fmt(measured) + " within 0.875 +/- 0.02; oracle exactly 1.0";
}

// --- 5: debate dynamics -------------------------------------------------------

std::string check_debate_dynamics() {
  const auto dataset = harness::gen_binary_questions(3, 2000);
  const auto panel = synthetic_panel(3, 0.5);

  harness::GridConfig grid;
  grid.methods = {debate::Method::standard, debate::Method::attn_all};
  grid.metrics = {metrics::Metric::oracle};
  grid.runs = 1;
  grid.seed = 17;
  const auto results = harness::run_experiment(grid, dataset, panel);
  expect(results.size() == 2, "expected a standard cell and an attn_all cell");

  const auto& standard = results[0];
  expect(standard.config.method == debate::Method::standard, "first cell must be standard");
  expect_near(standard.mean_accuracy, 0.50, 0.03, "standard-method accuracy");

  const auto& attn = results[1];
  expect(attn.config.method == debate::Method::attn_all &&
             attn.config.metric == metrics::Metric::oracle,
         "second cell must be attn_all with the oracle metric");
  expect_near(attn.mean_accuracy, 0.875, 0.02, "oracle attn_all accuracy (1 - 0.5^3)");

  return "standard " + fmt(standard.mean_accuracy) + " in 0.50 +/- 0.03; oracle attn_all " +
         fmt(attn.mean_accuracy) + " in 0.875 +/- 0.02 over 2000 questions";
}

// --- 6: improvement-ratio slopes ---------------------------------------------

std::string check_slope_ordering() {
  harness::SweepConfig sweep;  // stock targets {0.5, 0.7, 0.9, 1.0} and methods
  const auto results = harness::run_auroc_sweep(sweep);
  const auto summary = harness::improvement_vs_auroc(results);

  std::map<debate::Method, double> slopes;
  for (const auto& m : summary.methods) slopes[m.method] = m.slope;
  for (debate::Method m :
       {debate::Method::prompt, debate::Method::attn_others, debate::Method::attn_all}) {
    expect(slopes.count(m) == 1, "missing regression for " + debate::to_string(m));
  }

  const double s_prompt = slopes[debate::Method::prompt];
  const double s_others = slopes[debate::Method::attn_others];
  const double s_all = slopes[debate::Method::attn_all];
  expect(s_all > 0.0, "attn_all slope must be strictly positive, got " + fmt(s_all));
  expect(s_all >= s_others, "slope(attn_all) " + fmt(s_all) + " must be >= slope(attn_others) " +
                                fmt(s_others));
  expect(s_others >= s_prompt, "slope(attn_others) " + fmt(s_others) +
                                   " must be >= slope(prompt) " + fmt(s_prompt));

  return "slopes attn_all " + fmt(s_all) + " >= attn_others " + fmt(s_others) + " >= prompt " +
         fmt(s_prompt) + ", attn_all positive";
}

// --- 7: metric reference values ------------------------------------------------

std::string check_metric_values() {
  {
    const auto d = TokenDistribution::full_dist({{7, 1.0}});
    const auto u = metrics::mean_token_entropy(std::vector{d});
    expect(u.value == 0.0, "one-hot entropy must be exactly 0, got " + fmt(u.value));
  }
  {
    const auto d =
        TokenDistribution::full_dist({{0, 0.25}, {1, 0.25}, {2, 0.25}, {3, 0.25}});
    const auto u = metrics::mean_token_entropy(std::vector{d});
    expect_near(u.value, std::log(4.0), 1e-9, "uniform-4 entropy");
  }
  {
    const std::vector<TokenRecord> tokens{record(0, "a", 0.5), record(1, "b", 0.25)};
    const auto u = metrics::token_sar(tokens, [](auto, std::size_t) { return 1.0; });
    expect_near(u.value, 1.0397, 1e-4, "two-token weighted-average example");
  }

  Rng rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<TokenRecord> tokens;
    std::vector<double> raw;
    for (std::size_t i = 0; i < n; ++i) {
      tokens.push_back(record(static_cast<std::int32_t>(i),
                              std::string(1, static_cast<char>('a' + i % 26)),
                              0.05 + 0.95 * rng.next_unit()));
      raw.push_back(0.01 + rng.next_unit());
    }
    const double scale = 0.001 + 1000.0 * rng.next_unit();
    const double base =
        metrics::token_sar(tokens, [&](auto, std::size_t i) { return raw[i]; }).value;
    const double scaled =
        metrics::token_sar(tokens, [&](auto, std::size_t i) { return raw[i] * scale; }).value;
    expect(std::abs(scaled - base) <= 1e-9 * std::max(1.0, std::abs(base)),
           "relevance scaling moved the score: " + fmt(base) + " vs " + fmt(scaled));
  }
  return "one-hot 0, uniform-4 ln4, hand example 1.0397, scale invariance on 1000 inputs";
}

// --- 8: extraction, votes, transcripts ------------------------------------------

std::string check_formats_votes_transcripts() {
  // Answer-format round trips for every benchmark.
  for (char letter : {'A', 'B', 'C', 'D'}) {
    const Answer got = debate::extract_answer(
        std::string("Working it through.\nAnswer: ") + letter, BenchmarkKind::mmlu);
    expect(matches(got, Answer::of_letter(letter)),
           std::string("MMLU round trip lost letter ") + letter);
  }
  for (char letter : {'A', 'E', 'G'}) {
    const Answer got = debate::extract_answer(
        std::string("My best guess.\nAnswer: ") + letter, BenchmarkKind::truthfulqa);
    expect(matches(got, Answer::of_letter(letter)),
           std::string("TruthfulQA round trip lost letter ") + letter);
  }
  for (std::int64_t v : {0LL, 7LL, -7LL, 1234LL}) {
    const Answer got = debate::extract_answer(
        "Carrying the one.\nAnswer: " + std::to_string(v), BenchmarkKind::gsm8k);
    expect(matches(got, Answer::of_integer(v)),
           "GSM8k round trip lost value " + std::to_string(v));
  }
  for (std::int64_t v : {15LL, 899LL, -5LL}) {
    const Answer got = debate::extract_answer(
        "Multiply first, then add; the total comes to " + std::to_string(v),
        BenchmarkKind::arithmetic);
    expect(matches(got, Answer::of_integer(v)),
           "arithmetic round trip lost value " + std::to_string(v));
  }

  // Vote ties: lower summed uncertainty, then lowest proposing agent,
  // invalid answers never win, all-invalid stays invalid.
  const Answer A = Answer::of_letter('A');
  const Answer B = Answer::of_letter('B');
  const auto scalar = [](double v) {
    return UncertaintyScore::scalar(v, metrics::Metric::entropy);
  };
  {
    const std::vector<Answer> answers{A, B, A, B};
    const std::vector<UncertaintyScore> unc{scalar(0.9), scalar(0.1), scalar(0.8),
                                            scalar(0.1)};
    debate::VoteDetail detail;
    const Answer winner = debate::majority_vote(answers, unc, &detail);
    expect(matches(winner, B) && detail.tie_broken,
           "2-2 tie must break toward the lower summed uncertainty (B)");
  }
  {
    const std::vector<Answer> answers{A, B, A, B};
    const std::vector<UncertaintyScore> unc{scalar(0.1), scalar(0.9), scalar(0.1),
                                            scalar(0.8)};
    const Answer winner = debate::majority_vote(answers, unc, nullptr);
    expect(matches(winner, A), "reversing the uncertainties must flip the tie to A");
  }
  {
    const std::vector<Answer> answers{B, A, A, B};
    const std::vector<UncertaintyScore> unc{scalar(0.5), scalar(0.5), scalar(0.5),
                                            scalar(0.5)};
    const Answer winner = debate::majority_vote(answers, unc, nullptr);
    expect(matches(winner, B), "a residual tie must go to the earliest proposing agent");
  }
  {
    const std::vector<Answer> answers{Answer::invalid(), Answer::invalid(),
                                      Answer::of_letter('D')};
    const std::vector<UncertaintyScore> unc{scalar(0.0), scalar(0.0), scalar(2.0)};
    const Answer winner = debate::majority_vote(answers, unc, nullptr);
    expect(matches(winner, Answer::of_letter('D')), "an invalid answer must never win a vote");
  }
  {
    const std::vector<Answer> answers{Answer::invalid(), Answer::invalid()};
    const std::vector<UncertaintyScore> unc{scalar(0.0), scalar(0.0)};
    const Answer winner = debate::majority_vote(answers, unc, nullptr);
    expect(!winner.valid(), "an all-invalid round must yield the invalid sentinel");
  }

  // Transcript serialization is a lossless fixed point for every method.
  const Question q = binary_question();
  const auto panel = synthetic_panel(3, 0.7);
  int round_tripped = 0;
  for (debate::Method method : {debate::Method::standard, debate::Method::prompt,
                                debate::Method::attn_others, debate::Method::attn_all}) {
    debate::DebateConfig config;
    config.method = method;
    config.benchmark = BenchmarkKind::mmlu;
    config.n_rounds = 2;
    Rng rng(77);
    const auto transcript = debate::run_debate(q, config, panel, rng);
    const std::string once = debate::transcript_to_json(transcript);
    const auto back = debate::transcript_from_json(once);
    const std::string twice = debate::transcript_to_json(back);
    expect(once == twice,
           "transcript JSON must round-trip byte-identically for " + debate::to_string(method));
    ++round_tripped;
  }

  return "format round trips on all four benchmarks, every tie rule, " +
         std::to_string(round_tripped) + " lossless transcript round trips";
}

// --- driver ---------------------------------------------------------------------

struct Criterion {
  int number;
  const char* label;
  double budget_seconds;  // 0 = no stated budget
  std::string (*run)();
};

const Criterion kCriteria[] = {
    {1, "confidence mapping", 1.0, check_confidence},
    {2, "attention rescaling", 5.0, check_rescale},
    {3, "decoder attention hook", 30.0, check_tinylm_hook},
    {4, "uncertainty AUROC", 5.0, check_auroc},
    {5, "debate dynamics", 60.0, check_debate_dynamics},
    {6, "improvement-ratio slope ordering", 300.0, check_slope_ordering},
    {7, "metric reference values", 1.0, check_metric_values},
    {8, "extraction, votes, transcripts", 0.0, check_formats_votes_transcripts},
};

bool run_criterion(const Criterion& c) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  std::string failure;
  try {
    detail = c.run();
  } catch (const std::exception& e) {
    failure = e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  char timing[96];
  if (c.budget_seconds > 0.0) {
    std::snprintf(timing, sizeof timing, "%.2fs, budget %.0fs", elapsed, c.budget_seconds);
  } else {
    std::snprintf(timing, sizeof timing, "%.2fs", elapsed);
  }

  if (failure.empty() && c.budget_seconds > 0.0 && elapsed > c.budget_seconds) {
    failure = "over budget";
  }
  if (failure.empty()) {
    std::printf("[PASS] criterion %d: %s — %s (%s)\n", c.number, c.label, detail.c_str(),
                timing);
    return true;
  }
  std::printf("[FAIL] criterion %d: %s — %s (%s)\n", c.number, c.label, failure.c_str(),
              timing);
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > 8) {
      std::fprintf(stderr, "usage: %s [criterion 1-8 ...]\n", argv[0]);
      return 2;
    }
    wanted.push_back(n);
  }

  bool all_ok = true;
  for (const Criterion& c : kCriteria) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), c.number) == wanted.end()) {
      continue;
    }
    all_ok = run_criterion(c) && all_ok;
  }
  return all_ok ? 0 : 1;
}
