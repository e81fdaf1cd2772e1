#include "debunc/debate.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "debunc/errors.hpp"
#include "json.hpp"

namespace debunc::debate {

std::string to_string(Method m) {
  switch (m) {
    case Method::standard: return "standard";
    case Method::prompt: return "prompt";
    case Method::attn_others: return "attn_others";
    case Method::attn_all: return "attn_all";
  }
  return "standard";
}

Method method_from_string(const std::string& s) {
  if (s == "standard") return Method::standard;
  if (s == "prompt") return Method::prompt;
  if (s == "attn_others") return Method::attn_others;
  if (s == "attn_all") return Method::attn_all;
  throw ParseError("unknown debate method: " + s);
}

bool is_attention_method(Method m) {
  return m == Method::attn_others || m == Method::attn_all;
}

void DebateConfig::validate() const {
  if (n_agents < 2) throw ConfigError("debate needs at least 2 agents");
  if (n_rounds < 1) throw ConfigError("debate needs at least 1 round");
  if (temperature < 0.0) throw ConfigError("temperature must be non-negative");
  if (max_tokens < 1) throw ConfigError("max_tokens must be at least 1");
}

namespace {

std::vector<std::string> split_paragraphs(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = text.find("\n\n", pos);
    if (next == std::string::npos) {
      parts.push_back(text.substr(pos));
      return parts;
    }
    parts.push_back(text.substr(pos, next - pos));
    pos = next + 2;
  }
}

std::string join_paragraphs(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += parts[i];
  }
  return out;
}

void replace_all(std::string& text, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
}

/// The stock templates quote two peers. Debates with other sizes reuse the
/// first peer paragraph as a pattern, repeated once per peer with bumped
/// placeholder indices.
std::string expand_peer_blocks(const std::string& tpl, std::size_t n_peers) {
  std::vector<std::string> paragraphs = split_paragraphs(tpl);
  std::vector<std::string> out;
  std::string pattern;
  bool expanded = false;
  for (const std::string& p : paragraphs) {
    if (p.find("{agent_response_") == std::string::npos) {
      out.push_back(p);
      continue;
    }
    if (expanded) continue;  // later peer paragraphs collapse into the pattern
    pattern = p;
    for (std::size_t i = 1; i <= n_peers; ++i) {
      std::string block = pattern;
      replace_all(block, "{agent_response_1}", "{agent_response_" + std::to_string(i) + "}");
      replace_all(block, "{confidence_1}", "{confidence_" + std::to_string(i) + "}");
      out.push_back(std::move(block));
    }
    expanded = true;
  }
  return join_paragraphs(out);
}

struct PeerSlot {
  int agent_id = 0;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
};

/// Fills placeholders; inserted content is never rescanned, so braces in
/// question or response text stay literal. Unknown brace content is copied
/// verbatim.
std::string substitute(const std::string& tpl, const Question& question,
                       std::span<const backends::AgentResponse> peers,
                       const std::vector<int>* peer_confidences,
                       std::vector<PeerSlot>* slots) {
  std::string out;
  out.reserve(tpl.size() + 256);
  std::size_t pos = 0;

  auto peer_index = [&](const std::string& name, const char* prefix) -> int {
    const std::size_t plen = std::strlen(prefix);
    if (name.compare(0, plen, prefix) != 0) return -1;
    int idx = 0;
    const char* begin = name.data() + plen;
    const char* end = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(begin, end, idx);
    if (ec != std::errc() || ptr != end || idx < 1) return -1;
    return idx;
  };

  while (pos < tpl.size()) {
    const std::size_t open = tpl.find('{', pos);
    if (open == std::string::npos) {
      out.append(tpl, pos, std::string::npos);
      break;
    }
    out.append(tpl, pos, open - pos);
    const std::size_t close = tpl.find('}', open);
    if (close == std::string::npos) {
      out.append(tpl, open, std::string::npos);
      break;
    }
    const std::string name = tpl.substr(open + 1, close - open - 1);
    pos = close + 1;

    if (name == "question") {
      out += question.rendered_text();
    } else if (name == "options") {
      out += question.option_letters();
    } else if (name == "few_shot") {
      out += question.few_shot.value_or("");
    } else if (int idx = peer_index(name, "agent_response_"); idx > 0) {
      if (static_cast<std::size_t>(idx) > peers.size()) {
        throw PreconditionError("template references peer " + std::to_string(idx) +
                                " but only " + std::to_string(peers.size()) +
                                " peers are available");
      }
      const auto& peer = peers[static_cast<std::size_t>(idx) - 1];
      const std::size_t start = out.size();
      out += peer.text;
      if (slots != nullptr) {
        slots->push_back({peer.agent_id, start, out.size()});
      }
    } else if (int idx = peer_index(name, "confidence_"); idx > 0) {
      if (peer_confidences == nullptr ||
          static_cast<std::size_t>(idx) > peer_confidences->size()) {
        throw PreconditionError("confidence list required for the prompt method");
      }
      out += std::to_string((*peer_confidences)[static_cast<std::size_t>(idx) - 1]);
    } else {
      out.append(tpl, open, close - open + 1);  // not a placeholder
    }
  }
  return out;
}

std::string flatten(std::span<const backends::ChatMessage> messages) {
  std::string out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += messages[i].content;
  }
  return out;
}

double uncertainty_as_number(const metrics::UncertaintyScore& u) {
  // For vote tie-breaking only: oracle flags order as 0 (correct) before
  // 1 (incorrect), mirroring "lower uncertainty first".
  return u.is_oracle() ? (u.correct ? 0.0 : 1.0) : u.scalar_value();
}

nlohmann::json answer_to_json(const Answer& a) {
  switch (a.kind()) {
    case Answer::Kind::letter:
      return {{"kind", "letter"}, {"value", std::string(1, a.letter())}};
    case Answer::Kind::integer:
      return {{"kind", "integer"}, {"value", a.integer()}};
    case Answer::Kind::invalid:
      break;
  }
  return {{"kind", "invalid"}};
}

nlohmann::json uncertainty_to_json(const metrics::UncertaintyScore& u) {
  if (u.is_oracle()) {
    return {{"metric", metrics::to_string(u.metric)},
            {"kind", "oracle"},
            {"correct", u.correct}};
  }
  return {{"metric", metrics::to_string(u.metric)},
          {"kind", "scalar"},
          {"value", u.value},
          {"approximate", u.approximate}};
}

}  // namespace

std::string build_initial_prompt(const Question& question, const TemplateStore& templates) {
  const bool few_shot =
      question.kind == BenchmarkKind::mmlu && question.few_shot.has_value();
  const std::string& tpl = templates.get(
      question.kind,
      few_shot ? TemplateStore::RoundKind::initial_few_shot
               : TemplateStore::RoundKind::initial,
      false);
  return substitute(tpl, question, {}, nullptr, nullptr);
}

RoundPrompt build_round_prompt(const Question& question, BenchmarkKind kind,
                               std::span<const backends::AgentResponse> peers,
                               const std::optional<std::vector<confidence::ConfidenceLevel>>& confidences,
                               Method method, const TokenCounter& count_tokens,
                               const TemplateStore& templates) {
  if (peers.empty()) {
    throw PreconditionError("debate rounds need at least one peer response");
  }

  std::vector<backends::AgentResponse> ordered(peers.begin(), peers.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.agent_id < b.agent_id; });

  std::vector<int> peer_confidences;
  if (method == Method::prompt) {
    if (!confidences.has_value()) {
      throw PreconditionError("confidence list required for the prompt method");
    }
    for (const auto& peer : ordered) {
      auto it = std::find_if(confidences->begin(), confidences->end(),
                             [&](const auto& c) { return c.agent_id == peer.agent_id; });
      if (it == confidences->end()) {
        throw PreconditionError("no confidence level for agent " +
                                std::to_string(peer.agent_id));
      }
      peer_confidences.push_back(it->value);
    }
  }

  const std::string& tpl =
      templates.get(kind, TemplateStore::RoundKind::debate, method == Method::prompt);
  const std::string expanded = expand_peer_blocks(tpl, ordered.size());

  std::vector<PeerSlot> slots;
  RoundPrompt result;
  result.text = substitute(expanded, question, ordered,
                           method == Method::prompt ? &peer_confidences : nullptr,
                           &slots);

  if (is_attention_method(method)) {
    if (!count_tokens) {
      throw PreconditionError("attention methods need a token counter for spans");
    }
    for (const PeerSlot& slot : slots) {
      attnscale::Span span;
      span.agent_id = slot.agent_id;
      span.start = count_tokens(std::string_view(result.text).substr(0, slot.char_start));
      span.end = count_tokens(std::string_view(result.text).substr(0, slot.char_end));
      result.spans.entries.push_back(span);
    }
    result.spans.validate();
  }
  return result;
}

Answer majority_vote(std::span<const Answer> answers,
                     std::span<const metrics::UncertaintyScore> uncertainties,
                     VoteDetail* detail) {
  if (answers.size() != uncertainties.size()) {
    throw PreconditionError("vote answer and uncertainty lists are misaligned");
  }
  if (answers.empty()) throw EmptyInputError("majority vote over no answers");

  struct Bucket {
    Answer answer;
    int count = 0;
    double uncertainty_sum = 0.0;
    std::size_t first_agent = 0;
  };
  std::vector<Bucket> buckets;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (!answers[i].valid()) continue;
    auto it = std::find_if(buckets.begin(), buckets.end(),
                           [&](const Bucket& b) { return b.answer == answers[i]; });
    if (it == buckets.end()) {
      buckets.push_back({answers[i], 1, uncertainty_as_number(uncertainties[i]), i});
    } else {
      it->count += 1;
      it->uncertainty_sum += uncertainty_as_number(uncertainties[i]);
    }
  }

  if (detail != nullptr) {
    detail->counts.clear();
    detail->tie_broken = false;
    for (const Bucket& b : buckets) detail->counts.emplace_back(b.answer, b.count);
  }
  if (buckets.empty()) return Answer::invalid();

  const Bucket* winner = &buckets.front();
  for (const Bucket& b : buckets) {
    if (b.count > winner->count ||
        (b.count == winner->count &&
         (b.uncertainty_sum < winner->uncertainty_sum ||
          (b.uncertainty_sum == winner->uncertainty_sum &&
           b.first_agent < winner->first_agent)))) {
      winner = &b;
    }
  }
  if (detail != nullptr) {
    detail->tie_broken = std::count_if(buckets.begin(), buckets.end(),
                                       [&](const Bucket& b) {
                                         return b.count == winner->count;
                                       }) > 1;
  }
  return winner->answer;
}

namespace {

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

/// Last "Answer: X" with X a letter in [lo, hi] at a word boundary.
Answer last_letter_answer(const std::string& text, char lo, char hi) {
  Answer found = Answer::invalid();
  std::size_t pos = 0;
  while ((pos = text.find("Answer:", pos)) != std::string::npos) {
    std::size_t i = pos + 7;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i < text.size() && text[i] >= lo && text[i] <= hi &&
        (i + 1 >= text.size() || !is_word_char(text[i + 1]))) {
      found = Answer::of_letter(text[i]);
    }
    pos += 7;
  }
  return found;
}

/// Last "Answer: N" with N an (optionally signed) integer.
Answer last_tagged_integer(const std::string& text) {
  Answer found = Answer::invalid();
  std::size_t pos = 0;
  while ((pos = text.find("Answer:", pos)) != std::string::npos) {
    std::size_t i = pos + 7;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    std::size_t j = i;
    if (j < text.size() && text[j] == '-') ++j;
    std::size_t digits_end = j;
    while (digits_end < text.size() && text[digits_end] >= '0' && text[digits_end] <= '9') {
      ++digits_end;
    }
    if (digits_end > j) {
      std::int64_t value = 0;
      auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + digits_end, value);
      if (ec == std::errc() && ptr == text.data() + digits_end) {
        found = Answer::of_integer(value);
      }
    }
    pos += 7;
  }
  return found;
}

/// The final integer anywhere in the text; a leading '-' counts as a sign
/// only when it does not follow a digit (so "7-3" yields 3, "is -5" yields
/// -5).
Answer last_integer_anywhere(const std::string& text) {
  std::size_t end = text.size();
  while (end > 0 && !(text[end - 1] >= '0' && text[end - 1] <= '9')) --end;
  if (end == 0) return Answer::invalid();
  std::size_t start = end;
  while (start > 0 && text[start - 1] >= '0' && text[start - 1] <= '9') --start;
  if (start > 0 && text[start - 1] == '-' && (start < 2 || !(text[start - 2] >= '0' && text[start - 2] <= '9'))) {
    --start;
  }
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data() + start, text.data() + end, value);
  if (ec != std::errc() || ptr != text.data() + end) return Answer::invalid();
  return Answer::of_integer(value);
}

}  // namespace

Answer extract_answer(const std::string& text, BenchmarkKind kind) {
  switch (kind) {
    case BenchmarkKind::mmlu: return last_letter_answer(text, 'A', 'D');
    case BenchmarkKind::truthfulqa: return last_letter_answer(text, 'A', 'Z');
    case BenchmarkKind::gsm8k: return last_tagged_integer(text);
    case BenchmarkKind::arithmetic: return last_integer_anywhere(text);
  }
  return Answer::invalid();
}

namespace {

/// Influence weight of proposer `b` as seen by acting agent `a`: what the
/// method actually communicates. Standard debates carry no signal (weight
/// 1); the prompt method shares integer confidences, with the agent's own
/// previous answer weighing in at the neutral level since confidences are
/// never self-addressed; attention methods share multipliers, the agent's
/// own span being neutral (1) under attn_others and its own multiplier
/// under attn_all.
double influence_weight(Method method, int a, int b,
                        const std::vector<confidence::ConfidenceLevel>& confidences,
                        const attnscale::MultiplierSet& multipliers) {
  switch (method) {
    case Method::standard:
      return 1.0;
    case Method::prompt:
      return b == a ? static_cast<double>(confidence::kNeutralConfidence)
                    : static_cast<double>(confidences[static_cast<std::size_t>(b)].value);
    case Method::attn_others:
      return b == a ? 1.0 : multipliers.at(b);
    case Method::attn_all:
      return multipliers.at(b);
  }
  return 1.0;
}

}  // namespace

DebateTranscript run_debate(const Question& question, const DebateConfig& config,
                            std::span<const std::shared_ptr<backends::Backend>> agent_backends,
                            Rng& rng, const TemplateStore& templates) {
  config.validate();
  question.validate();
  if (question.kind != config.benchmark) {
    throw ConfigError("question kind does not match the configured benchmark");
  }
  const int n = config.n_agents;
  if (agent_backends.size() != static_cast<std::size_t>(n)) {
    throw PreconditionError("one backend per agent is required");
  }
  for (const auto& backend : agent_backends) {
    if (!backend) throw PreconditionError("null backend");
    if (is_attention_method(config.method) &&
        !backend->capabilities().supports_attention_scaling) {
      throw CapabilityError("method " + to_string(config.method) +
                            " needs a backend that supports attention scaling");
    }
  }

  const std::uint64_t base_seed = rng.next_u64();
  auto request_seed = [&](int round, int agent) {
    return Rng::mix(base_seed, static_cast<std::uint64_t>(round) * 1000003ULL +
                                   static_cast<std::uint64_t>(agent));
  };

  DebateTranscript transcript;
  transcript.question = question;
  transcript.config = config;

  std::vector<std::vector<backends::ChatMessage>> histories(
      static_cast<std::size_t>(n));

  // Sharing state computed at the end of round k, consumed while building
  // round k+1.
  std::vector<confidence::ConfidenceLevel> shared_confidences;
  attnscale::MultiplierSet shared_multipliers;

  for (int round = 1; round <= config.n_rounds; ++round) {
    std::vector<RoundEntry> entries(static_cast<std::size_t>(n));
    const std::vector<RoundEntry>* previous =
        round > 1 ? &transcript.rounds.back() : nullptr;

    for (int a = 0; a < n; ++a) {
      backends::Backend& backend = *agent_backends[static_cast<std::size_t>(a)];
      RoundEntry& entry = entries[static_cast<std::size_t>(a)];

      backends::GenerationRequest request;
      request.question = &question;
      request.agent_id = a;
      request.round = round;
      request.metric = config.metric;
      request.temperature = config.temperature;
      request.max_tokens = config.max_tokens;
      request.seed = request_seed(round, a);

      if (round == 1) {
        entry.prompt = build_initial_prompt(question, templates);
      } else {
        std::vector<backends::AgentResponse> peers;
        for (int b = 0; b < n; ++b) {
          if (b != a) peers.push_back((*previous)[static_cast<std::size_t>(b)].response);
        }
        std::optional<std::vector<confidence::ConfidenceLevel>> conf;
        if (config.method == Method::prompt) conf = shared_confidences;

        RoundPrompt round_prompt = build_round_prompt(
            question, config.benchmark, peers, conf, config.method,
            [&backend](std::string_view text) { return backend.count_tokens(text); },
            templates);
        entry.prompt = std::move(round_prompt.text);

        if (is_attention_method(config.method)) {
          // Spans move from prompt-local offsets into the agent's flattened
          // history, and the agent's own previous response joins the map:
          // neutral multiplier under attn_others, its own under attn_all.
          const auto& history = histories[static_cast<std::size_t>(a)];
          const std::string history_text = flatten(history);
          const std::size_t offset = backend.count_tokens(history_text + "\n\n");
          for (attnscale::Span span : round_prompt.spans.entries) {
            span.start += offset;
            span.end += offset;
            request.spans.entries.push_back(span);
          }

          const std::string own_prefix =
              flatten(std::span(history).first(history.size() - 1)) + "\n\n";
          attnscale::Span own;
          own.agent_id = a;
          own.start = backend.count_tokens(own_prefix);
          own.end = backend.count_tokens(own_prefix + history.back().content);
          request.spans.entries.push_back(own);
          request.spans.validate();

          request.multipliers = shared_multipliers;
          if (config.method == Method::attn_others) {
            request.multipliers.set(a, 1.0);
          }
          entry.spans = request.spans;
        }

        for (int b = 0; b < n; ++b) {
          backends::PeerInfluence influence;
          influence.agent_id = b;
          influence.answer = (*previous)[static_cast<std::size_t>(b)].response.extracted_answer;
          influence.weight = influence_weight(config.method, a, b, shared_confidences,
                                              request.multipliers);
          influence.self = b == a;
          request.peer_context.push_back(influence);
        }
      }

      request.messages = histories[static_cast<std::size_t>(a)];
      request.messages.push_back({"user", entry.prompt});
      request.prompt = flatten(request.messages);

      entry.response = backend.generate(request);
      if (entry.response.uncertainty.metric != config.metric) {
        throw InconsistentMetricError(
            "backend returned a score for a different metric than configured");
      }

      auto& history = histories[static_cast<std::size_t>(a)];
      history.push_back({"user", entry.prompt});
      history.push_back({"assistant", entry.response.text});
    }

    // Finalize what this round shares with the next one.
    std::vector<metrics::UncertaintyScore> scores;
    scores.reserve(static_cast<std::size_t>(n));
    for (const RoundEntry& entry : entries) scores.push_back(entry.response.uncertainty);

    if (config.method == Method::prompt) {
      if (config.metric == metrics::Metric::oracle) {
        shared_confidences = confidence::oracle_confidences(scores);
      } else {
        std::vector<double> values;
        values.reserve(scores.size());
        for (const auto& s : scores) values.push_back(s.scalar_value());
        shared_confidences = confidence::map_confidences(values);
      }
      for (int a = 0; a < n; ++a) {
        entries[static_cast<std::size_t>(a)].confidence =
            shared_confidences[static_cast<std::size_t>(a)];
      }
    } else if (is_attention_method(config.method)) {
      shared_multipliers = attnscale::multipliers_from_uncertainty(scores);
    }

    transcript.rounds.push_back(std::move(entries));
  }

  const auto& final_round = transcript.rounds.back();
  std::vector<Answer> answers;
  std::vector<metrics::UncertaintyScore> uncertainties;
  for (const RoundEntry& entry : final_round) {
    answers.push_back(entry.response.extracted_answer);
    uncertainties.push_back(entry.response.uncertainty);
  }
  transcript.final_answer = majority_vote(answers, uncertainties, &transcript.vote);
  transcript.correct = matches(transcript.final_answer, question.answer);
  return transcript;
}

std::string transcript_to_json(const DebateTranscript& transcript) {
  nlohmann::json j;
  j["question_id"] = transcript.question.id;
  j["config"] = {
      {"n_agents", transcript.config.n_agents},
      {"n_rounds", transcript.config.n_rounds},
      {"method", to_string(transcript.config.method)},
      {"metric", metrics::to_string(transcript.config.metric)},
      {"benchmark", to_string(transcript.config.benchmark)},
      {"temperature", transcript.config.temperature},
      {"max_tokens", transcript.config.max_tokens},
  };
  j["rounds"] = nlohmann::json::array();
  for (const auto& round : transcript.rounds) {
    nlohmann::json round_json = nlohmann::json::array();
    for (const RoundEntry& entry : round) {
      nlohmann::json e;
      e["agent_id"] = entry.response.agent_id;
      e["prompt"] = entry.prompt;
      e["spans"] = nlohmann::json::array();
      for (const attnscale::Span& span : entry.spans.entries) {
        e["spans"].push_back(
            {{"agent_id", span.agent_id}, {"start", span.start}, {"end", span.end}});
      }
      e["response_text"] = entry.response.text;
      e["answer"] = answer_to_json(entry.response.extracted_answer);
      e["uncertainty"] = uncertainty_to_json(entry.response.uncertainty);
      if (entry.confidence.has_value()) e["confidence"] = entry.confidence->value;
      round_json.push_back(std::move(e));
    }
    j["rounds"].push_back(std::move(round_json));
  }
  j["final_answer"] = answer_to_json(transcript.final_answer);
  j["correct"] = transcript.correct;
  return j.dump(2) + "\n";
}

void write_transcript(const std::filesystem::path& path, const DebateTranscript& transcript) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    const std::string body = transcript_to_json(transcript);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

Answer answer_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "letter") {
    const std::string v = j.at("value").get<std::string>();
    if (v.size() != 1) throw ParseError("answer letter must be a single character");
    return Answer::of_letter(v[0]);
  }
  if (kind == "integer") return Answer::of_integer(j.at("value").get<std::int64_t>());
  if (kind == "invalid") return Answer();
  throw ParseError("unknown answer kind '" + kind + "'");
}

metrics::UncertaintyScore uncertainty_from_json(const nlohmann::json& j) {
  const metrics::Metric metric =
      metrics::metric_from_string(j.at("metric").get<std::string>());
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "oracle") {
    metrics::UncertaintyScore u = metrics::UncertaintyScore::oracle(j.at("correct").get<bool>());
    u.metric = metric;
    return u;
  }
  if (kind == "scalar") {
    return metrics::UncertaintyScore::scalar(j.at("value").get<double>(), metric,
                                             j.at("approximate").get<bool>());
  }
  throw ParseError("unknown uncertainty kind '" + kind + "'");
}

}  // namespace

DebateTranscript transcript_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("transcript is not a JSON object");

  DebateTranscript t;
  try {
    t.question.id = j.at("question_id").get<std::string>();
    const nlohmann::json& c = j.at("config");
    t.config.n_agents = c.at("n_agents").get<int>();
    t.config.n_rounds = c.at("n_rounds").get<int>();
    t.config.method = method_from_string(c.at("method").get<std::string>());
    t.config.metric = metrics::metric_from_string(c.at("metric").get<std::string>());
    t.config.benchmark = benchmark_kind_from_string(c.at("benchmark").get<std::string>());
    t.config.temperature = c.at("temperature").get<double>();
    t.config.max_tokens = c.at("max_tokens").get<int>();
    t.question.kind = t.config.benchmark;

    for (const nlohmann::json& round_json : j.at("rounds")) {
      std::vector<RoundEntry> round;
      for (const nlohmann::json& e : round_json) {
        RoundEntry entry;
        entry.response.agent_id = e.at("agent_id").get<int>();
        entry.response.round = static_cast<int>(t.rounds.size()) + 1;
        entry.prompt = e.at("prompt").get<std::string>();
        for (const nlohmann::json& s : e.at("spans")) {
          attnscale::Span span;
          span.agent_id = s.at("agent_id").get<int>();
          span.start = s.at("start").get<std::size_t>();
          span.end = s.at("end").get<std::size_t>();
          entry.spans.entries.push_back(span);
        }
        entry.response.text = e.at("response_text").get<std::string>();
        entry.response.extracted_answer = answer_from_json(e.at("answer"));
        entry.response.uncertainty = uncertainty_from_json(e.at("uncertainty"));
        if (e.contains("confidence")) {
          entry.confidence = confidence::ConfidenceLevel{
              e.at("confidence").get<int>(), entry.response.agent_id};
        }
        round.push_back(std::move(entry));
      }
      t.rounds.push_back(std::move(round));
    }
    t.final_answer = answer_from_json(j.at("final_answer"));
    t.correct = j.at("correct").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed transcript: ") + e.what());
  }
  return t;
}

}  // namespace debunc::debate
