#pragma once

#include <cstdint>
#include <string>

namespace debunc {

/// An extracted or ground-truth answer. The invalid state is a first-class
/// value: unparseable responses carry it through transcripts and votes, and
/// it never compares equal to anything, including another invalid answer.
class Answer {
 public:
  enum class Kind { invalid, letter, integer };

  Answer() = default;

  static Answer invalid() { return Answer(); }
  static Answer of_letter(char c) {
    Answer a;
    a.kind_ = Kind::letter;
    a.letter_ = c;
    return a;
  }
  static Answer of_integer(std::int64_t v) {
    Answer a;
    a.kind_ = Kind::integer;
    a.value_ = v;
    return a;
  }

  Kind kind() const { return kind_; }
  bool valid() const { return kind_ != Kind::invalid; }
  char letter() const { return letter_; }
  std::int64_t integer() const { return value_; }

  /// Benchmark equality rule: answers match only when both are valid and
  /// hold the same payload. An invalid answer never equals ground truth.
  friend bool matches(const Answer& a, const Answer& b) {
    if (!a.valid() || !b.valid() || a.kind_ != b.kind_) return false;
    return a.kind_ == Kind::letter ? a.letter_ == b.letter_ : a.value_ == b.value_;
  }

  /// Structural equality (invalid == invalid), used for round-trip checks
  /// and vote bucketing. Scoring goes through matches() instead.
  bool operator==(const Answer& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
      case Kind::invalid: return true;
      case Kind::letter: return letter_ == o.letter_;
      case Kind::integer: return value_ == o.value_;
    }
    return false;
  }

  std::string str() const {
    switch (kind_) {
      case Kind::invalid: return "<invalid>";
      case Kind::letter: return std::string(1, letter_);
      case Kind::integer: return std::to_string(value_);
    }
    return "<invalid>";
  }

 private:
  Kind kind_ = Kind::invalid;
  char letter_ = 0;
  std::int64_t value_ = 0;
};

}  // namespace debunc
