#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"

#include "debunc/backends.hpp"
#include "debunc/errors.hpp"
#include "debunc/metrics.hpp"
#include "debunc/rng.hpp"
#include "debunc/tinylm.hpp"

using namespace debunc;
using backends::PeerInfluence;
using backends::SyntheticAgentProfile;
using backends::SyntheticBackend;

namespace {

Question binary_question() {
  Question q;
  q.id = "q0";
  q.kind = BenchmarkKind::mmlu;
  q.prompt = "pick one";
  q.choices = {"first", "second"};
  q.answer = Answer::of_letter('A');
  return q;
}

PeerInfluence peer(int agent_id, Answer answer, double weight, bool self = false) {
  PeerInfluence p;
  p.agent_id = agent_id;
  p.answer = answer;
  p.weight = weight;
  p.self = self;
  return p;
}

}  // namespace

TEST_SUITE("backends") {

TEST_CASE("round one follows p_correct at the extremes") {
  const Question q = binary_question();
  SyntheticAgentProfile sure;
  sure.p_correct = 1.0;
  Rng rng(61);
  for (int i = 0; i < 200; ++i) {
    const backends::AgentResponse r = backends::synthetic_generate(sure, q, {}, rng);
    CHECK(matches(r.extracted_answer, q.answer));
    CHECK(r.uncertainty.scalar_value() >= 0.0);
    CHECK(r.uncertainty.scalar_value() <= 1.0);
  }

  SyntheticAgentProfile never;
  never.p_correct = 0.0;
  for (int i = 0; i < 200; ++i) {
    const backends::AgentResponse r = backends::synthetic_generate(never, q, {}, rng);
    CHECK_FALSE(matches(r.extracted_answer, q.answer));
    CHECK(r.uncertainty.scalar_value() >= 0.5);
    CHECK(r.uncertainty.scalar_value() <= 1.5);
  }
}

TEST_CASE("free-response distractors stay near the truth") {
  Question q;
  q.id = "a0";
  q.kind = BenchmarkKind::arithmetic;
  q.prompt = "3+4*5+6";
  q.answer = Answer::of_integer(29);
  SyntheticAgentProfile never;
  never.p_correct = 0.0;
  Rng rng(67);
  for (int i = 0; i < 200; ++i) {
    const backends::AgentResponse r = backends::synthetic_generate(never, q, {}, rng);
    const std::int64_t v = r.extracted_answer.integer();
    CHECK(v != 29);
    CHECK(std::abs(v - 29) <= 2);
  }
}

TEST_CASE("synthetic generation is deterministic under one rng stream") {
  const Question q = binary_question();
  SyntheticAgentProfile profile;
  Rng a(71), b(71);
  for (int i = 0; i < 50; ++i) {
    const auto ra = backends::synthetic_generate(profile, q, {}, a);
    const auto rb = backends::synthetic_generate(profile, q, {}, b);
    CHECK(ra.text == rb.text);
    CHECK(ra.uncertainty.scalar_value() == rb.uncertainty.scalar_value());
  }
}

TEST_CASE("a correct oracle peer dominates a revision") {
  // Oracle weights: correct peers carry 1, incorrect 1e-5. The correct
  // answer's bucket always beats any pile of 1e-5 weights.
  const Question q = binary_question();
  SyntheticAgentProfile profile;
  profile.stubbornness = 0.0;
  Rng rng(73);
  const std::vector<PeerInfluence> peers{
      peer(0, Answer::of_letter('B'), 1e-5, /*self=*/true),
      peer(1, Answer::of_letter('A'), 1.0),
      peer(2, Answer::of_letter('B'), 1e-5),
  };
  for (int i = 0; i < 100; ++i) {
    const auto r = backends::synthetic_generate(profile, q, peers, rng);
    CHECK(matches(r.extracted_answer, q.answer));
  }
}

TEST_CASE("uniform influence reduces to headcount") {
  const Question q = binary_question();
  SyntheticAgentProfile profile;
  profile.influence_rule = SyntheticAgentProfile::InfluenceRule::uniform;
  profile.stubbornness = 0.0;
  Rng rng(79);
  // Peers both say A (weights irrelevant under the uniform rule), self says B.
  const std::vector<PeerInfluence> peers{
      peer(0, Answer::of_letter('B'), 100.0, /*self=*/true),
      peer(1, Answer::of_letter('A'), 0.001),
      peer(2, Answer::of_letter('A'), 0.001),
  };
  for (int i = 0; i < 100; ++i) {
    const auto r = backends::synthetic_generate(profile, q, peers, rng);
    CHECK(r.extracted_answer == Answer::of_letter('A'));
  }
}

TEST_CASE("full stubbornness never lets go") {
  const Question q = binary_question();
  SyntheticAgentProfile profile;
  profile.stubbornness = 1.0;
  Rng rng(83);
  const std::vector<PeerInfluence> peers{
      peer(0, Answer::of_letter('B'), 0.001, /*self=*/true),
      peer(1, Answer::of_letter('A'), 100.0),
      peer(2, Answer::of_letter('A'), 100.0),
  };
  for (int i = 0; i < 100; ++i) {
    const auto r = backends::synthetic_generate(profile, q, peers, rng);
    CHECK(r.extracted_answer == Answer::of_letter('B'));
  }
}

TEST_CASE("peer context must contain exactly one self entry") {
  const Question q = binary_question();
  SyntheticAgentProfile profile;
  Rng rng(89);
  const std::vector<PeerInfluence> no_self{peer(1, Answer::of_letter('A'), 1.0)};
  CHECK_THROWS_AS(backends::synthetic_generate(profile, q, no_self, rng),
                  PreconditionError);
}

TEST_CASE("profile bounds are validated") {
  SyntheticAgentProfile bad;
  bad.p_correct = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = SyntheticAgentProfile{};
  bad.uncertainty_given_correct = {2.0, 1.0};  // lo > hi
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = SyntheticAgentProfile{};
  bad.stubbornness = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("uncertainty separation hits the analytic AUROC") {
  // U(0,1) for correct vs U(0.5,1.5) for incorrect: P(X < Y) = 0.875.
  const Question q = binary_question();
  SyntheticAgentProfile profile;
  profile.p_correct = 0.5;
  Rng rng(97);
  std::vector<std::pair<double, bool>> samples;
  for (int i = 0; i < 10000; ++i) {
    const auto r = backends::synthetic_generate(profile, q, {}, rng);
    samples.emplace_back(r.uncertainty.scalar_value(), matches(r.extracted_answer, q.answer));
  }
  CHECK(metrics::auroc(samples) == doctest::Approx(0.875).epsilon(0.025));
}

TEST_CASE("oracle metric flags correctness") {
  const Question q = binary_question();
  SyntheticAgentProfile profile;
  profile.p_correct = 0.5;
  Rng rng(101);
  int seen_correct = 0, seen_incorrect = 0;
  for (int i = 0; i < 200; ++i) {
    const auto r =
        backends::synthetic_generate(profile, q, {}, rng, metrics::Metric::oracle);
    REQUIRE(r.uncertainty.is_oracle());
    const bool right = matches(r.extracted_answer, q.answer);
    CHECK(r.uncertainty.correct == right);
    (right ? seen_correct : seen_incorrect) += 1;
  }
  CHECK(seen_correct > 0);
  CHECK(seen_incorrect > 0);
}

TEST_CASE("backend capability flags describe the implementations") {
  SyntheticBackend synthetic{SyntheticAgentProfile{}};
  CHECK(synthetic.capabilities().supports_attention_scaling);
  CHECK_FALSE(synthetic.capabilities().has_full_distributions);

  tinylm::TinyModelConfig config;
  config.seed = 7;
  backends::TinyLmBackend lm(std::make_shared<const tinylm::TinyModel>(config));
  CHECK(lm.capabilities().has_full_distributions);
  CHECK(lm.capabilities().supports_attention_scaling);
  CHECK(lm.count_tokens("four") == 4);
}

TEST_CASE("tinylm backend truncates long histories instead of failing") {
  tinylm::TinyModelConfig config;
  config.seed = 7;
  auto model = std::make_shared<const tinylm::TinyModel>(config);
  backends::TinyLmBackend lm(model);

  Question q;
  q.id = "long";
  q.kind = BenchmarkKind::arithmetic;
  q.prompt = "1+1*1+1";
  q.answer = Answer::of_integer(3);

  backends::GenerationRequest request;
  request.question = &q;
  request.prompt = std::string(2000, 'h') + " Answer: 3";
  request.max_tokens = 8;
  request.seed = 5;
  // A span that survives truncation (near the end) and one that does not.
  request.spans.entries = {{0, 10, 20}, {1, 1990, 2000}};
  request.multipliers.set(0, 2.0);
  request.multipliers.set(1, 0.5);
  request.metric = metrics::Metric::entropy;

  const backends::AgentResponse r = lm.generate(request);
  CHECK(r.tokens.size() == 8);
  CHECK(r.uncertainty.is_scalar());
}

TEST_CASE("entropy scoring requires distributions") {
  std::vector<metrics::TokenRecord> tokens(2);
  tokens[0].logprob = -0.5;
  tokens[1].logprob = -0.5;  // no distributions attached
  CHECK_THROWS_AS(backends::score_response(metrics::Metric::entropy, tokens,
                                           Answer::of_integer(1), Answer::of_integer(1)),
                  CapabilityError);
}

}  // TEST_SUITE
