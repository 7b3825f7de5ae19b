#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "whrt/constraints.hpp"

using namespace whrt;

TEST_CASE("parse_constraint accepts the four kinds, any case and spacing") {
  CHECK(parse_constraint("anyhit(2,4)") == WhrtConstraint::any_hit(2, 4));
  CHECK(parse_constraint(" RowHit ( 3 , 5 ) ") == WhrtConstraint::row_hit(3, 5));
  CHECK(parse_constraint("AnyMiss(1,3)") == WhrtConstraint::any_miss(1, 3));
  CHECK(parse_constraint("rowmiss(2,6)") == WhrtConstraint::row_miss(2, 6));
  CHECK(to_string(parse_constraint("ANYHIT(4,10)")) == "anyhit(4,10)");
}

TEST_CASE("parse_constraint rejects malformed text and invalid parameters") {
  for (const char* bad : {"anyhit(3,2)", "anyhit(0,3)", "foo(1,2)", "anyhit(2;4)", "anyhit(2,4", "anyhit(-1,4)",
                          "anyhit(2,4)x", "anyhit(1,21)", ""}) {
    INFO(bad);
    CHECK_THROWS_AS(parse_constraint(bad), ParseError);
  }
  CHECK_THROWS_AS(WhrtConstraint::any_hit(3, 2), InvalidConstraint);
  CHECK_THROWS_AS(WhrtConstraint::row_miss(1, kMaxWindow + 1), InvalidConstraint);
}

TEST_CASE("parse_loss_sequence") {
  CHECK(parse_loss_sequence("1001110") == LossSequence{1, 0, 0, 1, 1, 1, 0});
  CHECK(parse_loss_sequence("10 01") == LossSequence{1, 0, 0, 1});
  CHECK_THROWS_AS(parse_loss_sequence("12x"), ParseError);
  CHECK_THROWS_AS(parse_loss_sequence("  "), ParseError);
}

// [PAPER] Fig. 2 shows 1001110 as an AnyHit(2,4)-admissible sequence.
TEST_CASE("paper word satisfies AnyHit(2,4)") {
  CHECK(satisfies(parse_loss_sequence("1001110"), WhrtConstraint::any_hit(2, 4)));
}

TEST_CASE("first_violation reports the first failing window start") {
  const auto c = WhrtConstraint::any_hit(2, 4);
  CHECK(first_violation(parse_loss_sequence("1000"), c) == std::optional<std::size_t>{0});
  CHECK(first_violation(parse_loss_sequence("110001"), c) == std::optional<std::size_t>{1});
  CHECK_FALSE(first_violation(parse_loss_sequence("100"), c).has_value());  // no complete window
}

TEST_CASE("window predicates on single windows") {
  const LossSequence w{1, 1, 0, 1, 0};
  CHECK(window_ok(w, WhrtConstraint::any_hit(3, 5)));
  CHECK_FALSE(window_ok(w, WhrtConstraint::any_hit(4, 5)));
  CHECK(window_ok(w, WhrtConstraint::row_hit(2, 5)));
  CHECK_FALSE(window_ok(w, WhrtConstraint::row_hit(3, 5)));
  CHECK(window_ok(w, WhrtConstraint::any_miss(2, 5)));
  CHECK_FALSE(window_ok(w, WhrtConstraint::any_miss(1, 5)));
  CHECK(window_ok(w, WhrtConstraint::row_miss(1, 5)));
  CHECK_FALSE(window_ok(LossSequence{1, 0, 0, 1, 1}, WhrtConstraint::row_miss(1, 5)));
}

// [DERIVED] Words without two consecutive losses are counted by Fibonacci
// numbers: F(n+2) words of length n avoid "00".
TEST_CASE("AnyHit(1,2) admissible counts follow Fibonacci") {
  std::vector<long> fib{0, 1};
  while (fib.size() < 20) fib.push_back(fib[fib.size() - 1] + fib[fib.size() - 2]);
  for (int n = 2; n <= 16; ++n) {
    CHECK(static_cast<long>(enumerate_admissible(WhrtConstraint::any_hit(1, 2), n, false).size()) ==
          fib[static_cast<std::size_t>(n + 2)]);
  }
}

TEST_CASE("enumerate_admissible is lexicographic, honours the leading success and bounds length") {
  const auto words = enumerate_admissible(WhrtConstraint::any_hit(2, 3), 6, true);
  CHECK(std::is_sorted(words.begin(), words.end()));
  for (const auto& w : words) CHECK(w[0] == 1);
  CHECK_THROWS_AS(enumerate_admissible(WhrtConstraint::any_hit(2, 3), kMaxEnumerationLength + 1, false),
                  LengthTooLarge);
  CHECK(enumerate_admissible(WhrtConstraint::any_hit(2, 3), 0, false).empty());
}

// [DERIVED] satisfies agrees with the oracle's independent window scan on
// every word up to length 12 for all kinds and s <= 5.
TEST_CASE("satisfies matches the oracle window scan") {
  const std::pair<ConstraintKind, oracle::Kind> kinds[] = {{ConstraintKind::AnyHit, oracle::Kind::AnyHit},
                                                           {ConstraintKind::RowHit, oracle::Kind::RowHit},
                                                           {ConstraintKind::AnyMiss, oracle::Kind::AnyMiss},
                                                           {ConstraintKind::RowMiss, oracle::Kind::RowMiss}};
  for (const auto& [kind, ok] : kinds) {
    for (int s = 1; s <= 5; ++s) {
      for (int r = 1; r <= s; ++r) {
        const auto c = WhrtConstraint::make(kind, r, s);
        for (int len = 1; len <= 12; ++len) {
          for (std::uint32_t code = 0; code < (1u << len); ++code) {
            const auto w = oracle::bits(code, len);
            REQUIRE(satisfies(w, c) == oracle::admissible(w, ok, r, s));
          }
        }
      }
    }
  }
}

// Dualities between the kinds, checked exhaustively on short words.
TEST_CASE("constraint dualities") {
  for (int s = 2; s <= 6; ++s) {
    for (int len = s; len <= 12; ++len) {
      for (std::uint32_t code = 0; code < (1u << len); ++code) {
        const auto w = oracle::bits(code, len);
        for (int r = 1; r < s; ++r) {
          // At most r losses <=> at least s - r successes.
          REQUIRE(satisfies(w, WhrtConstraint::any_miss(r, s)) == satisfies(w, WhrtConstraint::any_hit(s - r, s)));
        }
        // One success anywhere is the same as a run of one.
        REQUIRE(satisfies(w, WhrtConstraint::row_hit(1, s)) == satisfies(w, WhrtConstraint::any_hit(1, s)));
        for (int r = 1; r < s; ++r) {
          // Once len >= s every run of r+1 losses sits inside a window.
          bool long_run = false;
          int run = 0;
          for (int b : w) {
            run = b ? 0 : run + 1;
            long_run = long_run || run > r;
          }
          REQUIRE(satisfies(w, WhrtConstraint::row_miss(r, s)) == !long_run);
        }
      }
    }
  }
}
