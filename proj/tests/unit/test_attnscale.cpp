#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"

#include "debunc/attnscale.hpp"
#include "debunc/errors.hpp"
#include "debunc/rng.hpp"

using namespace debunc;
using attnscale::AttentionVector;
using attnscale::MultiplierSet;
using attnscale::Span;
using attnscale::SpanMap;

namespace {

// Literal per-position evaluation of the two rescaling formulas, written
// independently of the library implementation:
//   a_i = w_i * m_j for i in t_j, else w_i
//   f_i = a_i * (sum of w over span positions)/(sum of a over span positions)
// for span positions, f_i = a_i otherwise.
AttentionVector rescale_by_formula(const AttentionVector& w, const SpanMap& spans,
                                   const MultiplierSet& m) {
  auto agent_at = [&](std::size_t i) -> const Span* {
    for (const Span& s : spans.entries) {
      if (i >= s.start && i < s.end) return &s;
    }
    return nullptr;
  };
  AttentionVector a(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Span* s = agent_at(i);
    a[i] = s ? w[i] * m.at(s->agent_id) : w[i];
  }
  double w_mass = 0.0, a_mass = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (agent_at(i) != nullptr) {
      w_mass += w[i];
      a_mass += a[i];
    }
  }
  if (w_mass == 0.0) return w;
  AttentionVector f(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    f[i] = agent_at(i) ? a[i] * (w_mass / a_mass) : a[i];
  }
  return f;
}

struct RandomInstance {
  AttentionVector w;
  SpanMap spans;
  MultiplierSet m;
};

RandomInstance random_instance(Rng& rng, std::size_t min_len, std::size_t max_len) {
  RandomInstance inst;
  const std::size_t n = min_len + rng.below(max_len - min_len + 1);
  inst.w.resize(n);
  double total = 0.0;
  for (double& x : inst.w) {
    x = rng.next_unit() + 1e-6;
    total += x;
  }
  for (double& x : inst.w) x /= total;

  // Carve up to three disjoint spans out of the prefix.
  std::size_t cursor = 0;
  int agent = 0;
  while (cursor < n && agent < 3) {
    const std::size_t len = 1 + rng.below(std::max<std::size_t>(1, n / 3));
    const std::size_t end = std::min(n, cursor + len);
    if (rng.bernoulli(0.8)) {
      inst.spans.entries.push_back({agent, cursor, end});
      inst.m.set(agent, std::pow(10.0, -5.0 + 10.0 * rng.next_unit()));
      ++agent;
    }
    cursor = end + rng.below(3);
  }
  return inst;
}

}  // namespace

TEST_SUITE("attnscale") {

TEST_CASE("scalar uncertainties invert into multipliers") {
  const std::vector<metrics::UncertaintyScore> scores{
      metrics::UncertaintyScore::scalar(0.5, metrics::Metric::entropy),
      metrics::UncertaintyScore::scalar(2.0, metrics::Metric::entropy)};
  const MultiplierSet m = attnscale::multipliers_from_uncertainty(scores);
  CHECK(m.at(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(m.at(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("oracle flags map to 1 and 1e-5") {
  const std::vector<metrics::UncertaintyScore> scores{
      metrics::UncertaintyScore::oracle(true), metrics::UncertaintyScore::oracle(false)};
  const MultiplierSet m = attnscale::multipliers_from_uncertainty(scores);
  CHECK(m.at(0) == 1.0);
  CHECK(m.at(1) == attnscale::kOracleIncorrectMultiplier);
}

TEST_CASE("zero uncertainty clamps to epsilon before inversion") {
  const std::vector<metrics::UncertaintyScore> scores{
      metrics::UncertaintyScore::scalar(0.0, metrics::Metric::entropy)};
  const MultiplierSet m = attnscale::multipliers_from_uncertainty(scores);
  CHECK(m.at(0) == doctest::Approx(1e9).epsilon(1e-9));
}

TEST_CASE("mixed score kinds are inconsistent") {
  const std::vector<metrics::UncertaintyScore> scores{
      metrics::UncertaintyScore::scalar(0.5, metrics::Metric::entropy),
      metrics::UncertaintyScore::oracle(true)};
  CHECK_THROWS_AS(attnscale::multipliers_from_uncertainty(scores),
                  InconsistentMetricError);
}

TEST_CASE("unit multipliers leave weights bit-identical") {
  const AttentionVector w{0.2, 0.3, 0.5};
  SpanMap spans;
  spans.entries = {{1, 0, 2}};
  MultiplierSet m;
  m.set(1, 1.0);
  const AttentionVector f = attnscale::rescale_weights(w, spans, m);
  CHECK(f == w);
}

TEST_CASE("the worked three-position example") {
  const AttentionVector w{0.2, 0.3, 0.5};
  SpanMap spans;
  spans.entries = {{1, 1, 2}, {2, 2, 3}};
  MultiplierSet m;
  m.set(1, 2.0);
  m.set(2, 0.5);
  const AttentionVector f = attnscale::rescale_weights(w, spans, m);
  // a = [0.2, 0.6, 0.25], joint factor 0.8/0.85.
  CHECK(f[0] == 0.2);  // outside all spans: untouched
  CHECK(f[1] == doctest::Approx(0.564706).epsilon(1e-6));
  CHECK(f[2] == doctest::Approx(0.235294).epsilon(1e-6));
  CHECK(f[1] == doctest::Approx(0.6 * 0.8 / 0.85).epsilon(1e-12));
  CHECK(f[2] == doctest::Approx(0.25 * 0.8 / 0.85).epsilon(1e-12));
  CHECK(std::accumulate(f.begin(), f.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  // Uniformly doubling the multipliers changes nothing.
  MultiplierSet m2;
  m2.set(1, 4.0);
  m2.set(2, 1.0);
  const AttentionVector f2 = attnscale::rescale_weights(w, spans, m2);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f2[i] == doctest::Approx(f[i]).epsilon(1e-12));
  }
}

TEST_CASE("zero span mass makes rescaling the identity") {
  const AttentionVector w{0.0, 0.0, 1.0};
  SpanMap spans;
  spans.entries = {{0, 0, 2}};
  MultiplierSet m;
  m.set(0, 100.0);
  CHECK(attnscale::rescale_weights(w, spans, m) == w);
}

TEST_CASE("random instances: conservation, locality, scale invariance, formula match") {
  Rng rng(53);
  int brute_checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const RandomInstance inst = random_instance(rng, 2, 16);
    const AttentionVector f = attnscale::rescale_weights(inst.w, inst.spans, inst.m);

    const double mass = std::accumulate(f.begin(), f.end(), 0.0);
    REQUIRE(std::abs(mass - 1.0) < 1e-9);

    auto in_span = [&](std::size_t i) {
      for (const Span& s : inst.spans.entries) {
        if (i >= s.start && i < s.end) return true;
      }
      return false;
    };
    for (std::size_t i = 0; i < inst.w.size(); ++i) {
      if (!in_span(i)) REQUIRE(f[i] == inst.w[i]);
    }

    MultiplierSet scaled = inst.m;
    const double c = std::pow(10.0, -3.0 + 6.0 * rng.next_unit());
    for (auto& [agent, mult] : scaled.by_agent) mult *= c;
    const AttentionVector fc = attnscale::rescale_weights(inst.w, inst.spans, scaled);
    for (std::size_t i = 0; i < f.size(); ++i) {
      REQUIRE(fc[i] == doctest::Approx(f[i]).epsilon(1e-12));
    }

    if (inst.w.size() <= 8) {
      ++brute_checked;
      const AttentionVector ref = rescale_by_formula(inst.w, inst.spans, inst.m);
      for (std::size_t i = 0; i < f.size(); ++i) {
        REQUIRE(f[i] == doctest::Approx(ref[i]).epsilon(1e-12));
      }
    }
  }
  CHECK(brute_checked > 1000);
}

TEST_CASE("within-span ordering is preserved") {
  Rng rng(59);
  for (int trial = 0; trial < 200; ++trial) {
    const RandomInstance inst = random_instance(rng, 4, 12);
    const AttentionVector f = attnscale::rescale_weights(inst.w, inst.spans, inst.m);
    for (const Span& s : inst.spans.entries) {
      for (std::size_t i = s.start; i < s.end; ++i) {
        for (std::size_t k = s.start; k < s.end; ++k) {
          // f_i/f_k = w_i/w_k within one agent's span.
          CHECK(f[i] * inst.w[k] == doctest::Approx(f[k] * inst.w[i]).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("cross-agent scaling follows the multiplier ratio") {
  const AttentionVector w{0.25, 0.25, 0.25, 0.25};
  SpanMap spans;
  spans.entries = {{0, 0, 2}, {1, 2, 4}};
  MultiplierSet m;
  m.set(0, 3.0);
  m.set(1, 0.75);
  const AttentionVector f = attnscale::rescale_weights(w, spans, m);
  // Equal input weights: the rescaled ratio equals m_0/m_1 = 4 exactly.
  CHECK(f[0] / f[2] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("span maps reject malformed entries") {
  SpanMap overlap;
  overlap.entries = {{0, 0, 3}, {1, 2, 5}};
  CHECK_THROWS_AS(overlap.validate(), PreconditionError);

  SpanMap inverted;
  inverted.entries = {{0, 3, 3}};
  CHECK_THROWS_AS(inverted.validate(), PreconditionError);

  SpanMap duplicate;
  duplicate.entries = {{0, 0, 2}, {0, 4, 6}};
  CHECK_THROWS_AS(duplicate.validate(), PreconditionError);

  SpanMap fine;
  fine.entries = {{0, 0, 2}, {1, 4, 6}};
  CHECK_NOTHROW(fine.validate());
  CHECK_THROWS_AS(fine.validate_within(5), PreconditionError);
  CHECK_NOTHROW(fine.validate_within(6));
}

TEST_CASE("rescaling demands a multiplier per span agent") {
  const AttentionVector w{0.5, 0.5};
  SpanMap spans;
  spans.entries = {{3, 0, 1}};
  MultiplierSet m;  // nothing for agent 3
  CHECK_THROWS_AS(attnscale::rescale_weights(w, spans, m), PreconditionError);
}

TEST_CASE("multiplier sets reject non-positive values") {
  MultiplierSet m;
  m.set(0, 0.0);
  CHECK_THROWS_AS(m.validate(), PreconditionError);
  m.set(0, -1.0);
  CHECK_THROWS_AS(m.validate(), PreconditionError);
  m.set(0, 1e-5);
  CHECK_NOTHROW(m.validate());
}

}  // TEST_SUITE
