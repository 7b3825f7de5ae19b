#include <catch_amalgamated.hpp>

#include "properties.hpp"

using namespace whrt;

// [DERIVED] Lemma 1: the lifted and non-lifted conditions certify the same
// gamma; both certificates bound every simulated admissible run.
TEST_CASE("Lemma 1 agreement and certificate soundness on random loops") {
  int cases = 0;
  for (std::uint64_t seed = 1; cases < 60 && seed < 400; ++seed) {
    const auto res = props::lemma1_case(seed, true);
    if (!res) continue;
    ++cases;
    INFO(res->description << " lifted " << res->gamma_lifted << " non-lifted " << res->gamma_nonlifted);
    CHECK(res->agree);
    INFO(res->lifted_soundness.detail << res->nonlifted_soundness.detail);
    CHECK(res->lifted_soundness.pass);
    CHECK(res->nonlifted_soundness.pass);
    CHECK(res->lifted_soundness.runs == 100);
  }
  CHECK(cases >= 60);
}

TEST_CASE("paper certificates are sound") {
  const auto plant = fixture::paper_plant();
  const auto c = WhrtConstraint::any_hit(2, 3);
  const auto lifted = build_lifted_graph(c);
  const auto family = lift(plant, Strategy::zero(), {0, 1});
  for (const Matrix& K : {fixture::paper_K(), fixture::synthesized_K()}) {
    const auto sys = lifted_system(family, K, lifted);
    const auto cert = analyze(sys);
    const auto rep = props::check_soundness(plant, Controller::fixed(K), Strategy::zero(), c, cert, sys, lifted, true, 17);
    INFO(rep.detail);
    CHECK(rep.pass);
    CHECK(rep.worst_ratio <= 1.0);
    // The worst-case runs come close to the certified bound.
    CHECK(rep.worst_ratio >= 0.9);
    const auto graph = build_graph(c);
    const auto nsys = nonlifted_system(closed_loop(plant, K, Strategy::zero()), graph);
    const auto ncert = analyze(nsys);
    const auto nrep =
        props::check_soundness(plant, Controller::fixed(K), Strategy::zero(), c, ncert, nsys, graph, false, 18);
    INFO(nrep.detail);
    CHECK(nrep.pass);
  }
}

TEST_CASE("a tampered certificate fails the soundness check") {
  const auto plant = fixture::paper_plant();
  const auto c = WhrtConstraint::any_hit(2, 3);
  const auto lifted = build_lifted_graph(c);
  const auto sys = lifted_system(lift(plant, Strategy::zero(), {0, 1}), fixture::paper_K(), lifted);
  auto cert = analyze(sys);
  cert.gamma *= 0.5;
  const auto rep =
      props::check_soundness(plant, Controller::fixed(fixture::paper_K()), Strategy::zero(), c, cert, sys, lifted, true, 3, 20);
  CHECK_FALSE(rep.pass);
}
