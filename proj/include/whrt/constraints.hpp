#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "whrt/errors.hpp"

namespace whrt {

/// Binary loss sequence: entry k is 1 when the control attempt at time k
/// succeeded and 0 when the input was lost. Lifted graphs reuse the same
/// container for their integer labels.
using Word = std::vector<int>;
using LossSequence = Word;

enum class ConstraintKind { AnyHit, RowHit, AnyMiss, RowMiss };

// Window lengths above this make the window automaton impractically large.
inline constexpr int kMaxWindow = 20;

/// A window constraint on loss sequences, parametrised by (r, s): every
/// window of s consecutive attempts must contain
///   AnyHit  - at least r successes,
///   RowHit  - a run of at least r consecutive successes,
///   AnyMiss - at most r losses,
///   RowMiss - no run of more than r consecutive losses.
struct WhrtConstraint {
  ConstraintKind kind = ConstraintKind::AnyHit;
  int r = 1;
  int s = 1;

  static WhrtConstraint make(ConstraintKind kind, int r, int s) {
    if (s < 1 || r < 1 || r > s) {
      throw InvalidConstraint("constraint parameters must satisfy 1 <= r <= s, got r=" +
                              std::to_string(r) + " s=" + std::to_string(s));
    }
    if (s > kMaxWindow) {
      throw InvalidConstraint("window length " + std::to_string(s) + " exceeds the supported maximum " +
                              std::to_string(kMaxWindow));
    }
    return WhrtConstraint{kind, r, s};
  }
  static WhrtConstraint any_hit(int r, int s) { return make(ConstraintKind::AnyHit, r, s); }
  static WhrtConstraint row_hit(int r, int s) { return make(ConstraintKind::RowHit, r, s); }
  static WhrtConstraint any_miss(int r, int s) { return make(ConstraintKind::AnyMiss, r, s); }
  static WhrtConstraint row_miss(int r, int s) { return make(ConstraintKind::RowMiss, r, s); }

  friend bool operator==(const WhrtConstraint&, const WhrtConstraint&) = default;
};

inline std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::AnyHit:
      return "anyhit";
    case ConstraintKind::RowHit:
      return "rowhit";
    case ConstraintKind::AnyMiss:
      return "anymiss";
    case ConstraintKind::RowMiss:
      return "rowmiss";
  }
  return "?";
}

inline std::string to_string(const WhrtConstraint& c) {
  return to_string(c.kind) + "(" + std::to_string(c.r) + "," + std::to_string(c.s) + ")";
}

/// Parses `anyhit(r,s)`, `rowhit(r,s)`, `anymiss(r,s)` or `rowmiss(r,s)`.
/// Case-insensitive; whitespace anywhere is ignored.
inline WhrtConstraint parse_constraint(std::string_view text) {
  std::string t;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) {
      t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  const auto open = t.find('(');
  const auto comma = t.find(',');
  const auto close = t.find(')');
  if (open == std::string::npos || comma == std::string::npos || close == std::string::npos ||
      !(open < comma && comma < close) || close + 1 != t.size()) {
    throw ParseError("malformed constraint '" + std::string(text) + "', expected e.g. anyhit(2,4)");
  }
  const std::string name = t.substr(0, open);
  ConstraintKind kind;
  if (name == "anyhit") {
    kind = ConstraintKind::AnyHit;
  } else if (name == "rowhit") {
    kind = ConstraintKind::RowHit;
  } else if (name == "anymiss") {
    kind = ConstraintKind::AnyMiss;
  } else if (name == "rowmiss") {
    kind = ConstraintKind::RowMiss;
  } else {
    throw ParseError("unknown constraint kind '" + name + "'");
  }
  auto parse_int = [&](const std::string& s) {
    if (s.empty() || s.size() > 6 ||
        !std::all_of(s.begin(), s.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      throw ParseError("constraint parameter '" + s + "' is not a positive integer");
    }
    return std::stoi(s);
  };
  const int r = parse_int(t.substr(open + 1, comma - open - 1));
  const int s = parse_int(t.substr(comma + 1, close - comma - 1));
  try {
    return WhrtConstraint::make(kind, r, s);
  } catch (const InvalidConstraint& e) {
    throw ParseError(e.what());
  }
}

/// Parses a binary word such as "1001110". Whitespace is ignored.
inline LossSequence parse_loss_sequence(std::string_view text) {
  LossSequence seq;
  for (char ch : text) {
    if (ch == '0' || ch == '1') {
      seq.push_back(ch - '0');
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      throw ParseError("loss sequence may only contain 0 and 1, got '" + std::string(1, ch) + "'");
    }
  }
  if (seq.empty()) throw ParseError("empty loss sequence");
  return seq;
}

inline std::string to_string(const Word& word) {
  std::string out;
  for (int b : word) out += std::to_string(b);
  return out;
}

/// Checks a single window of exactly s attempts.
inline bool window_ok(std::span<const int> window, const WhrtConstraint& c) {
  int ones = 0;
  int longest_hit = 0;
  int longest_miss = 0;
  int hit_run = 0;
  int miss_run = 0;
  for (int b : window) {
    if (b != 0) {
      ++ones;
      ++hit_run;
      miss_run = 0;
    } else {
      ++miss_run;
      hit_run = 0;
    }
    longest_hit = std::max(longest_hit, hit_run);
    longest_miss = std::max(longest_miss, miss_run);
  }
  const int zeros = static_cast<int>(window.size()) - ones;
  switch (c.kind) {
    case ConstraintKind::AnyHit:
      return ones >= c.r;
    case ConstraintKind::RowHit:
      return longest_hit >= c.r;
    case ConstraintKind::AnyMiss:
      return zeros <= c.r;
    case ConstraintKind::RowMiss:
      return longest_miss <= c.r;
  }
  return false;
}

/// Start index of the first fully contained window violating `c`, if any.
inline std::optional<std::size_t> first_violation(std::span<const int> seq, const WhrtConstraint& c) {
  const auto s = static_cast<std::size_t>(c.s);
  if (seq.size() < s) return std::nullopt;
  for (std::size_t start = 0; start + s <= seq.size(); ++start) {
    if (!window_ok(seq.subspan(start, s), c)) return start;
  }
  return std::nullopt;
}

/// Finite-prefix semantics: only windows fully inside `seq` are checked.
inline bool satisfies(std::span<const int> seq, const WhrtConstraint& c) {
  return !first_violation(seq, c).has_value();
}

inline constexpr int kMaxEnumerationLength = 24;

/// All binary words of `length` satisfying `c`, in lexicographic order.
/// Brute force over 2^length candidates; intended as a test oracle.
inline std::vector<LossSequence> enumerate_admissible(const WhrtConstraint& c, int length,
                                                      bool require_initial_success) {
  if (length > kMaxEnumerationLength) {
    throw LengthTooLarge("enumeration length " + std::to_string(length) + " exceeds " +
                         std::to_string(kMaxEnumerationLength));
  }
  std::vector<LossSequence> out;
  if (length <= 0) return out;
  const std::uint32_t count = std::uint32_t{1} << length;
  LossSequence word(static_cast<std::size_t>(length));
  for (std::uint32_t code = 0; code < count; ++code) {
    for (int k = 0; k < length; ++k) word[static_cast<std::size_t>(k)] = (code >> (length - 1 - k)) & 1u;
    if (require_initial_success && word[0] != 1) continue;
    if (satisfies(word, c)) out.push_back(word);
  }
  return out;
}

}  // namespace whrt
