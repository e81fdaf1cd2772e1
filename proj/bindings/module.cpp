#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "debunc/attnscale.hpp"
#include "debunc/confidence.hpp"
#include "debunc/debate.hpp"
#include "debunc/harness.hpp"
#include "debunc/metrics.hpp"

namespace py = pybind11;

namespace {

using namespace debunc;

std::vector<metrics::TokenRecord> records_from_pairs(
    const std::vector<std::pair<std::string, double>>& tokens) {
  std::map<std::string, std::int32_t> ids;
  std::vector<metrics::TokenRecord> records;
  records.reserve(tokens.size());
  for (const auto& [surface, logprob] : tokens) {
    metrics::TokenRecord r;
    r.surface = surface;
    r.token_id = ids.emplace(surface, static_cast<std::int32_t>(ids.size())).first->second;
    r.logprob = logprob;
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "core operations of the uncertainty-aware debate engine";

  m.def(
      "mean_token_entropy",
      [](const std::vector<std::map<std::int32_t, double>>& distributions, bool full,
         int top_k) {
        std::vector<metrics::TokenDistribution> dists;
        dists.reserve(distributions.size());
        for (const auto& probs : distributions) {
          dists.push_back(full ? metrics::TokenDistribution::full_dist(probs)
                               : metrics::TokenDistribution::topk_dist(probs, top_k));
        }
        const metrics::UncertaintyScore u = metrics::mean_token_entropy(dists);
        return py::make_tuple(u.value, u.approximate);
      },
      py::arg("distributions"), py::arg("full") = true, py::arg("top_k") = 0,
      "Mean per-token Shannon entropy. Returns (value, approximate).");

  m.def(
      "token_sar",
      [](const std::vector<std::pair<std::string, double>>& tokens) {
        const std::vector<metrics::TokenRecord> records = records_from_pairs(tokens);
        return metrics::token_sar(records, metrics::default_relevance_at).value;
      },
      py::arg("tokens"),
      "TokenSAR over (surface, logprob) pairs with the built-in relevance rule.");

  m.def(
      "auroc",
      [](const std::vector<std::pair<double, bool>>& samples) {
        return metrics::auroc(samples);
      },
      py::arg("samples"), "AUROC of (uncertainty, correct) samples.");

  m.def(
      "scaled_confidences",
      [](const std::vector<double>& uncertainties) {
        return confidence::scaled_confidences(uncertainties);
      },
      py::arg("uncertainties"), "Pre-clamp scaled confidences (mean exactly 5).");

  m.def(
      "map_confidences",
      [](const std::vector<double>& uncertainties) {
        std::vector<int> out;
        for (const confidence::ConfidenceLevel& c :
             confidence::map_confidences(uncertainties)) {
          out.push_back(c.value);
        }
        return out;
      },
      py::arg("uncertainties"), "Integer confidence levels on the 1-10 scale.");

  m.def(
      "rescale_weights",
      [](const std::vector<double>& weights,
         const std::vector<std::tuple<int, std::size_t, std::size_t>>& spans,
         const std::map<int, double>& multipliers) {
        attnscale::SpanMap span_map;
        for (const auto& [agent_id, start, end] : spans) {
          span_map.entries.push_back({agent_id, start, end});
        }
        attnscale::MultiplierSet ms;
        ms.by_agent = multipliers;
        return attnscale::rescale_weights(weights, span_map, ms);
      },
      py::arg("weights"), py::arg("spans"), py::arg("multipliers"),
      "Span-wise attention rescaling; spans are (agent_id, start, end) tuples.");

  m.def(
      "multipliers_from_uncertainty",
      [](const std::vector<double>& uncertainties) {
        std::vector<metrics::UncertaintyScore> scores;
        scores.reserve(uncertainties.size());
        for (double u : uncertainties) {
          scores.push_back(metrics::UncertaintyScore::scalar(u, metrics::Metric::entropy));
        }
        return attnscale::multipliers_from_uncertainty(scores).by_agent;
      },
      py::arg("uncertainties"), "Per-agent attention multipliers (agent id = position).");

  m.def(
      "extract_answer",
      [](const std::string& text, const std::string& kind) -> std::optional<std::string> {
        const Answer a = debate::extract_answer(text, benchmark_kind_from_string(kind));
        if (!a.valid()) return std::nullopt;
        return a.str();
      },
      py::arg("text"), py::arg("kind"),
      "Extracted answer as a string, or None when the text holds no answer.");

  m.def(
      "gen_arithmetic",
      [](std::uint64_t seed, std::size_t count) {
        py::list out;
        for (const Question& q : harness::gen_arithmetic(seed, count)) {
          py::dict d;
          d["id"] = q.id;
          d["question"] = q.prompt;
          d["answer"] = q.answer.integer();
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("seed"), py::arg("count"), "Seeded a+b*c+d questions.");

  m.def("delta_for_auroc", &harness::delta_for_auroc, py::arg("target"),
        "Uniform-shift separation needed for a target AUROC.");
}
