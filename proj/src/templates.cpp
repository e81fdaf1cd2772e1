#include <fstream>
#include <sstream>

#include "debunc/debate.hpp"
#include "debunc/errors.hpp"

namespace debunc::debate {
namespace {

// Built-in template texts. The files under templates/ carry the same
// content (plus a trailing newline); a unit test keeps the two in sync.

constexpr const char* kMmluInitial =
    R"(Answer the following multiple choice question. The last line of your response should be of the following format: 'Answer: $LETTER' (without quotes) where LETTER is one of ABCD. Think step by step before answering.

{question})";

constexpr const char* kMmluInitial5Shot =
    R"(Answer the following multiple choice question.

Examples:

{few_shot}

---

YOUR TASK

Answer the following question. Think step by step before answering. The last line of your response should be of the following format: 'Answer: $LETTER' (without quotes) where LETTER is one of ABCD.

{question})";

constexpr const char* kMmluDebate =
    R"(These are solutions to the problem from other agents:

One agent solution: {agent_response_1}

One agent solution: {agent_response_2}

Based off the opinion of other agents, can you give an updated response? Think step by step before answering. The last line of your response should be of the following format: 'Answer: $LETTER' (without quotes) where LETTER is one of ABCD.)";

constexpr const char* kMmluDebatePrompt =
    R"(These are solutions and confidence values from 1 to 10 (higher means more confident) to the problem from other agents:

One agent solution (confidence level is {confidence_1}): {agent_response_1}

One agent solution (confidence level is {confidence_2}): {agent_response_2}

Based off the opinion of other agents, can you give an updated response? Do not mention your confidence. Think step by step before answering. The last line of your response should be of the following format: 'Answer: $LETTER' (without quotes) where LETTER is one of ABCD.)";

constexpr const char* kGsm8kInitial =
    R"(Answer the following math problem. The last line of your response should be of the following format: 'Answer: $INTEGER' (without quotes) where INTEGER is the integer answer. Think step by step before answering.

{question})";

constexpr const char* kGsm8kDebate =
    R"(These are solutions to the problem from other agents:

One agent solution: {agent_response_1}

One agent solution: {agent_response_2}

Based off the opinion of other agents, can you provide an updated response? The original problem is:

{question}

The last line of your response should be of the following format: 'Answer: $INTEGER' (without quotes) where INTEGER is the integer answer.)";

constexpr const char* kGsm8kDebatePrompt =
    R"(These are solutions and confidence values from 1 to 10 (higher means more confident) to the problem from other agents:

One agent solution (confidence level is {confidence_1}): {agent_response_1}

One agent solution (confidence level is {confidence_2}): {agent_response_2}

Based off the opinion of other agents, can you provide an updated response? The original problem is:

{question}

Do not mention your confidence. The last line of your response should be of the following format: 'Answer: $INTEGER' (without quotes) where INTEGER is the integer answer.)";

constexpr const char* kArithmeticInitial =
    R"(What is the result of {question}? State the final answer at the end of your response.)";

constexpr const char* kArithmeticDebate =
    R"(These are solutions to the problem from other agents:

One agent solution: {agent_response_1}

One agent solution: {agent_response_2}

Based off the opinion of other agents, can you provide an updated answer? State the final answer at the end of your response.)";

constexpr const char* kArithmeticDebatePrompt =
    R"(These are solutions and confidence values from 1 to 10 (higher means more confident) to the problem from other agents:

One agent solution (confidence level is {confidence_1}): {agent_response_1}

One agent solution (confidence level is {confidence_2}): {agent_response_2}

Based off the opinion of other agents, can you provide an updated answer? Do not mention your confidence. State the final answer at the end of your response.)";

constexpr const char* kTruthfulqaInitial =
    R"(Answer the following multiple choice question:

{question}


Think step by step before answering. The last line of your response should be of the following format: 'Answer: $LETTER' (without quotes) where LETTER is one of {options}.)";

constexpr const char* kTruthfulqaDebate =
    R"(These are the selections from other agents:

One agent solution: {agent_response_1}

One agent solution: {agent_response_2}

Can you double check that your response is correct? The last line of your response should be of the following format: 'Answer: $LETTER' (without quotes) where LETTER is one of {options}.)";

constexpr const char* kTruthfulqaDebatePrompt =
    R"(These are the selections and confidence values from 1 to 10 (higher means more confident) from other agents:

One agent solution (confidence level is {confidence_1}): {agent_response_1}

One agent solution (confidence level is {confidence_2}): {agent_response_2}

Can you double check that your response is correct? Do not mention your confidence. The last line of your response should be of the following format: 'Answer: $LETTER' (without quotes) where LETTER is one of {options}.)";

struct NamedTemplate {
  const char* key;
  const char* text;
};

constexpr NamedTemplate kBuiltins[] = {
    {"mmlu_initial", kMmluInitial},
    {"mmlu_initial_5shot", kMmluInitial5Shot},
    {"mmlu_debate", kMmluDebate},
    {"mmlu_debate_prompt", kMmluDebatePrompt},
    {"gsm8k_initial", kGsm8kInitial},
    {"gsm8k_debate", kGsm8kDebate},
    {"gsm8k_debate_prompt", kGsm8kDebatePrompt},
    {"arithmetic_initial", kArithmeticInitial},
    {"arithmetic_debate", kArithmeticDebate},
    {"arithmetic_debate_prompt", kArithmeticDebatePrompt},
    {"truthfulqa_initial", kTruthfulqaInitial},
    {"truthfulqa_debate", kTruthfulqaDebate},
    {"truthfulqa_debate_prompt", kTruthfulqaDebatePrompt},
};

std::string template_key(BenchmarkKind kind, TemplateStore::RoundKind round,
                         bool with_confidence) {
  std::string key = to_string(kind);
  switch (round) {
    case TemplateStore::RoundKind::initial:
      key += "_initial";
      break;
    case TemplateStore::RoundKind::initial_few_shot:
      key += "_initial_5shot";
      break;
    case TemplateStore::RoundKind::debate:
      key += "_debate";
      break;
  }
  if (with_confidence) {
    if (round != TemplateStore::RoundKind::debate) {
      throw ConfigError("only debate templates have a confidence variant");
    }
    key += "_prompt";
  }
  return key;
}

}  // namespace

const TemplateStore& TemplateStore::defaults() {
  static const TemplateStore store = [] {
    TemplateStore s;
    for (const NamedTemplate& t : kBuiltins) s.by_key_[t.key] = t.text;
    return s;
  }();
  return store;
}

TemplateStore TemplateStore::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("template directory does not exist: " + dir.string());
  }
  TemplateStore store = defaults();
  for (auto& [key, text] : store.by_key_) {
    const std::filesystem::path file = dir / (key + ".txt");
    if (!std::filesystem::exists(file)) continue;
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ParseError("cannot read template file " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string content = buf.str();
    if (!content.empty() && content.back() == '\n') content.pop_back();
    if (!content.empty() && content.back() == '\r') content.pop_back();
    text = std::move(content);
  }
  return store;
}

const std::string& TemplateStore::get(BenchmarkKind kind, RoundKind round,
                                      bool with_confidence) const {
  const std::string key = template_key(kind, round, with_confidence);
  auto it = by_key_.find(key);
  if (it == by_key_.end()) {
    throw ConfigError("no template for key " + key);
  }
  return it->second;
}

}  // namespace debunc::debate
