#include "debunc/question.hpp"

#include "debunc/errors.hpp"

namespace debunc {

std::string to_string(BenchmarkKind kind) {
  switch (kind) {
    case BenchmarkKind::mmlu: return "mmlu";
    case BenchmarkKind::gsm8k: return "gsm8k";
    case BenchmarkKind::truthfulqa: return "truthfulqa";
    case BenchmarkKind::arithmetic: return "arithmetic";
  }
  return "arithmetic";
}

BenchmarkKind benchmark_kind_from_string(const std::string& s) {
  if (s == "mmlu") return BenchmarkKind::mmlu;
  if (s == "gsm8k") return BenchmarkKind::gsm8k;
  if (s == "truthfulqa") return BenchmarkKind::truthfulqa;
  if (s == "arithmetic") return BenchmarkKind::arithmetic;
  throw ParseError("unknown benchmark kind: " + s);
}

std::string Question::option_letters() const {
  if (!is_multiple_choice(kind)) return "";
  std::string letters;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    letters.push_back(static_cast<char>('A' + i));
  }
  return letters;
}

std::string Question::rendered_text() const {
  if (!is_multiple_choice(kind)) return prompt;
  std::string text = prompt;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    text += "\n";
    text += static_cast<char>('A' + i);
    text += ". ";
    text += choices[i];
  }
  return text;
}

void Question::validate() const {
  if (id.empty()) throw ConfigError("question id must not be empty");
  if (prompt.empty()) throw ConfigError("question " + id + ": prompt must not be empty");
  if (is_multiple_choice(kind)) {
    if (choices.size() < 2) {
      throw ConfigError("question " + id + ": multiple-choice kinds need at least 2 choices");
    }
    if (choices.size() > 26) {
      throw ConfigError("question " + id + ": more choices than letters");
    }
    if (answer.kind() != Answer::Kind::letter) {
      throw ConfigError("question " + id + ": ground truth must be a choice letter");
    }
    if (option_letters().find(answer.letter()) == std::string::npos) {
      throw ConfigError("question " + id + ": ground truth outside the choice labels");
    }
  } else {
    if (!choices.empty()) {
      throw ConfigError("question " + id + ": free-response kinds take no choices");
    }
    if (answer.kind() != Answer::Kind::integer) {
      throw ConfigError("question " + id + ": ground truth must be an integer");
    }
  }
}

}  // namespace debunc
