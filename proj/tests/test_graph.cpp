#include <catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"
#include "whrt/graph.hpp"

using namespace whrt;

namespace {

const std::pair<ConstraintKind, oracle::Kind> kKinds[] = {{ConstraintKind::AnyHit, oracle::Kind::AnyHit},
                                                          {ConstraintKind::RowHit, oracle::Kind::RowHit},
                                                          {ConstraintKind::AnyMiss, oracle::Kind::AnyMiss},
                                                          {ConstraintKind::RowMiss, oracle::Kind::RowMiss}};

std::set<Word> generated(const WhrtGraph& g, int length, bool leading_one) {
  std::set<Word> out;
  for (std::uint32_t code = 0; code < (1u << length); ++code) {
    const Word w = oracle::bits(code, length);
    if (leading_one && w[0] != 1) continue;
    if (generates(g, w)) out.insert(w);
  }
  return out;
}

Word expand(const std::vector<int>& alphas) {
  Word w{1};
  for (int a : alphas) {
    w.insert(w.end(), static_cast<std::size_t>(a), 0);
    w.push_back(1);
  }
  return w;
}

}  // namespace

// [PAPER] §VI: 462 edges / 336 nodes non-lifted, 210 edges / 84 nodes lifted.
TEST_CASE("AnyHit(4,10) graph sizes") {
  const auto c = WhrtConstraint::any_hit(4, 10);
  const auto g = build_graph(c);
  const auto l = build_lifted_graph(c);
  CHECK(g.num_nodes() == 336);
  CHECK(g.num_edges() == 462);
  CHECK(l.num_nodes() == 84);
  CHECK(l.num_edges() == 210);
}

// [PAPER] Fig. 3: AnyHit(2,4) has 7 nodes / 10 edges and 3 nodes / 6 edges lifted.
TEST_CASE("AnyHit(2,4) graph sizes") {
  const auto c = WhrtConstraint::any_hit(2, 4);
  CHECK(build_graph(c).num_nodes() == 7);
  CHECK(build_graph(c).num_edges() == 10);
  CHECK(build_lifted_graph(c).num_nodes() == 3);
  CHECK(build_lifted_graph(c).num_edges() == 6);
}

TEST_CASE("trivial and small lifted graphs") {
  const auto l11 = build_lifted_graph(WhrtConstraint::any_hit(1, 1));
  CHECK(l11.num_nodes() == 1);
  CHECK(l11.num_edges() == 1);
  CHECK(l11.labels() == std::vector<int>{0});

  // [DERIVED] AnyHit(2,3): after a success preceded by a loss, the next
  // attempt must succeed; otherwise one loss is allowed.
  const auto l23 = build_lifted_graph(WhrtConstraint::any_hit(2, 3));
  REQUIRE(l23.num_nodes() == 2);
  CHECK(l23.edges() == std::vector<Edge>{{0, 0, 0}, {0, 1, 1}, {1, 0, 0}});
  CHECK(l23.initial_nodes() == std::vector<int>{0});
  CHECK(l23.deterministic());
}

// [DERIVED] Language equivalence against the suffix-state oracle for every
// kind with s <= 6 and all lengths <= 2s.
TEST_CASE("graph language equals extendable admissible words") {
  for (const auto& [kind, ok] : kKinds) {
    for (int s = 1; s <= 6; ++s) {
      for (int r = 1; r <= s; ++r) {
        const auto c = WhrtConstraint::make(kind, r, s);
        const auto g = build_graph(c);
        const auto w = build_window_graph(c);
        for (int len = 1; len <= 2 * s; ++len) {
          INFO(to_string(c) << " length " << len);
          REQUIRE(generated(g, len, true) == oracle::extendable(ok, r, s, len, true));
          REQUIRE(generated(w, len, false) == oracle::extendable(ok, r, s, len, false));
        }
      }
    }
  }
}

// [DERIVED] Lifted label sequences generate exactly the block words
// 1 0^a1 1 ... 0^am 1 that are extendable.
TEST_CASE("lifted graph language matches expanded words") {
  for (const auto& [kind, ok] : kKinds) {
    for (int s = 1; s <= 5; ++s) {
      for (int r = 1; r <= s; ++r) {
        const auto c = WhrtConstraint::make(kind, r, s);
        WhrtGraph l;
        try {
          l = build_lifted_graph(c);
        } catch (const UnboundedLosses&) {
          continue;
        }
        std::map<int, std::set<Word>> oracle_sets;
        std::vector<int> alphas;
        std::function<void()> rec = [&]() {
          const Word w = expand(alphas);
          const int len = static_cast<int>(w.size());
          if (len > 2 * s + 2) return;
          if (!alphas.empty()) {
            if (!oracle_sets.count(len)) oracle_sets[len] = oracle::extendable(ok, r, s, len, true);
            INFO(to_string(c) << " word " << to_string(w));
            REQUIRE(generates(l, alphas) == (oracle_sets[len].count(w) == 1));
          }
          for (int a = 0; a < s; ++a) {
            alphas.push_back(a);
            rec();
            alphas.pop_back();
          }
        };
        rec();
      }
    }
  }
}

TEST_CASE("unbounded loss constraints fall back to the window graph") {
  for (const auto& c : {WhrtConstraint::any_miss(3, 3), WhrtConstraint::row_miss(4, 4)}) {
    CHECK_THROWS_AS(build_lifted_graph(c), UnboundedLosses);
    const auto g = build_graph(c);
    CHECK(g == build_window_graph(c));
    CHECK(generates(g, Word(12, 0)));
  }
}

TEST_CASE("graph structure predicates") {
  for (const auto& c : {WhrtConstraint::any_hit(2, 3), WhrtConstraint::row_hit(2, 5), WhrtConstraint::any_miss(1, 4),
                        WhrtConstraint::any_hit(4, 10)}) {
    for (const auto& g : {build_graph(c), build_lifted_graph(c), build_window_graph(c)}) {
      const auto st = check_structure(g);
      CHECK(st.labels_in_alphabet);
      CHECK(st.every_node_has_outgoing);
      CHECK(st.every_node_reachable);
    }
    CHECK(check_structure(build_lifted_graph(c)).deterministic);
    CHECK(check_structure(build_window_graph(c)).deterministic);
  }
}

TEST_CASE("minimize is idempotent and canonical") {
  const auto w = build_window_graph(WhrtConstraint::row_hit(2, 5));
  CHECK(minimize(w) == w);
  CHECK(canonicalize(w) == w);
  CHECK_THROWS_AS(minimize(build_graph(WhrtConstraint::any_hit(4, 10))), std::invalid_argument);
}

TEST_CASE("text dump roundtrip and parse errors") {
  for (const auto& g : {build_graph(WhrtConstraint::any_hit(2, 4)), build_lifted_graph(WhrtConstraint::any_hit(4, 10))}) {
    std::istringstream in(dump_text(g));
    CHECK(parse_text(in) == g);
  }
  std::istringstream bad_header("graph 1\n");
  CHECK_THROWS_AS(parse_text(bad_header), ParseError);
  std::istringstream bad_edge("whrt-graph 1\nalphabet 2\nlifted 0\nnodes 1\ninitial 0\nedge 0 3 1\n");
  CHECK_THROWS_AS(parse_text(bad_edge), ParseError);
  std::istringstream bad_record("whrt-graph 1\nalphabet 2\nbogus 1\n");
  CHECK_THROWS_AS(parse_text(bad_record), ParseError);
}

TEST_CASE("DOT export lists every node and edge one-based") {
  const auto g = build_lifted_graph(WhrtConstraint::any_hit(2, 3));
  const auto dot = export_dot(g);
  CHECK(dot.rfind("digraph whrt_lifted {", 0) == 0);
  CHECK(dot.find("v1 [shape=doublecircle]") != std::string::npos);
  CHECK(dot.find("v1 -> v2 [label=\"1\"]") != std::string::npos);
  CHECK(dot.find("v2 -> v1 [label=\"0\"]") != std::string::npos);
}

TEST_CASE("NodeTracker follows deterministic graphs and rejects inadmissible labels") {
  const auto l = build_lifted_graph(WhrtConstraint::any_hit(2, 3));
  auto t = NodeTracker::at_initial(l);
  CHECK(t.current() == 0);
  CHECK(t.indicator(0) == 1);
  CHECK(t.indicator(1) == 0);
  t = t.step(1);
  CHECK(t.current() == 1);
  CHECK_THROWS_AS(t.step(1), InadmissibleLabel);
  CHECK(t.step(0).current() == 0);
  CHECK_THROWS_AS(NodeTracker::at_initial(build_graph(WhrtConstraint::any_hit(4, 10))), std::invalid_argument);
}

TEST_CASE("trace_path returns a consistent path or nothing") {
  const auto g = build_graph(WhrtConstraint::any_hit(2, 4));
  const Word ok = parse_loss_sequence("1001110110");
  const auto path = trace_path(g, ok);
  REQUIRE(path.has_value());
  REQUIRE(path->size() == ok.size() + 1);
  for (std::size_t k = 0; k < ok.size(); ++k) {
    const auto succ = g.successors((*path)[k], ok[k]);
    CHECK(std::find(succ.begin(), succ.end(), (*path)[k + 1]) != succ.end());
  }
  CHECK_FALSE(trace_path(g, parse_loss_sequence("1000")).has_value());
}

TEST_CASE("hardness order") {
  CHECK(is_harder(WhrtConstraint::any_hit(3, 3), WhrtConstraint::any_hit(2, 3), 8) == Hardness::Harder);
  CHECK(is_harder(WhrtConstraint::any_hit(2, 3), WhrtConstraint::any_hit(1, 3), 8) == Hardness::Harder);
  CHECK(is_harder(WhrtConstraint::any_hit(1, 3), WhrtConstraint::any_hit(2, 3), 8) == Hardness::NotHarder);
  CHECK(is_harder(WhrtConstraint::any_miss(1, 4), WhrtConstraint::any_hit(3, 4), 8) == Hardness::Harder);
  CHECK(is_harder(WhrtConstraint::any_hit(3, 4), WhrtConstraint::any_miss(1, 4), 8) == Hardness::Harder);
  CHECK_THROWS_AS(is_harder(WhrtConstraint::any_hit(1, 4), WhrtConstraint::any_hit(2, 4), 3, HardnessMethod::BruteForce),
                  std::invalid_argument);
}

// [DERIVED] The exact automaton product agrees with the brute-force
// comparison of extendable words on every pair with s <= 4.
TEST_CASE("hardness methods agree") {
  std::vector<WhrtConstraint> cs;
  for (const auto& [kind, ok] : kKinds) {
    for (int s = 1; s <= 4; ++s) {
      for (int r = 1; r <= s; ++r) cs.push_back(WhrtConstraint::make(kind, r, s));
    }
  }
  for (const auto& a : cs) {
    for (const auto& b : cs) {
      INFO(to_string(a) << " vs " << to_string(b));
      CHECK(is_harder(a, b, 10, HardnessMethod::Automaton) == is_harder(a, b, 10, HardnessMethod::BruteForce));
    }
  }
}
