#pragma once

#include <optional>
#include <string>
#include <vector>

#include "debunc/answer.hpp"

namespace debunc {

enum class BenchmarkKind { mmlu, gsm8k, truthfulqa, arithmetic };

std::string to_string(BenchmarkKind kind);
BenchmarkKind benchmark_kind_from_string(const std::string& s);

/// True for benchmarks whose answers are choice letters.
inline bool is_multiple_choice(BenchmarkKind kind) {
  return kind == BenchmarkKind::mmlu || kind == BenchmarkKind::truthfulqa;
}

struct Question {
  std::string id;
  BenchmarkKind kind = BenchmarkKind::arithmetic;
  std::string prompt;
  std::vector<std::string> choices;      // multiple-choice kinds only
  Answer answer;                         // ground truth
  std::optional<std::string> few_shot;   // exemplar block (MMLU 5-shot)

  /// Letters permitted for this question ("ABCD" for 4 choices). Empty for
  /// free-response kinds.
  std::string option_letters() const;

  /// The question as shown to an agent: the stem plus lettered choices for
  /// multiple-choice kinds, the bare expression/stem otherwise.
  std::string rendered_text() const;

  /// Throws ConfigError when invariants are violated (missing choices,
  /// ground truth outside the choice labels, ...).
  void validate() const;
};

}  // namespace debunc
