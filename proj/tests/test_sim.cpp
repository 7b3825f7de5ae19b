#include <catch_amalgamated.hpp>

#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "whrt/lmi.hpp"
#include "whrt/sim.hpp"

using namespace whrt;

namespace {

std::vector<Vector> gaussian(std::mt19937_64& rng, int q, int horizon) {
  std::normal_distribution<double> N;
  std::vector<Vector> w;
  for (int k = 0; k < horizon; ++k) w.push_back(Vector::NullaryExpr(q, [&](Eigen::Index) { return N(rng); }));
  return w;
}

}  // namespace

TEST_CASE("zero input gives a zero trace") {
  const auto p = fixture::paper_plant();
  const auto w = step_disturbance(1, 0, 20);
  const auto tr = simulate(p, fixture::paper_K(), Strategy::zero(), periodic(parse_loss_sequence("101101"), 20), w);
  CHECK(tr.horizon == 20);
  CHECK(tr.x.size() == 21);
  CHECK(tr.output_energy() == 0.0);
  CHECK_THROWS_AS(empirical_gain(tr), ZeroDisturbance);
}

// [DERIVED] With no losses the loop is the LTI system x+ = (A+BK)x + Bw w.
TEST_CASE("all-success simulation equals the LTI recursion") {
  const auto p = fixture::paper_plant();
  const Matrix K = fixture::paper_K();
  std::mt19937_64 rng(11);
  const auto w = gaussian(rng, 1, 50);
  const auto tr = simulate(p, K, Strategy::hold(), LossSequence(50, 1), w);
  Vector x = Vector::Zero(2);
  for (int k = 0; k < 50; ++k) {
    const Vector z = (p.C + p.D * K) * x + p.Dw * w[static_cast<std::size_t>(k)];
    CHECK((tr.z[static_cast<std::size_t>(k)] - z).norm() <= 1e-12 * (1 + z.norm()));
    x = (p.A + p.B * K) * x + p.Bw * w[static_cast<std::size_t>(k)];
  }
  CHECK((tr.x.back() - x).norm() <= 1e-10 * (1 + x.norm()));
}

TEST_CASE("loss strategies") {
  const auto p = fixture::paper_plant();
  const Matrix K = fixture::paper_K();
  const auto mu = parse_loss_sequence("1001");
  const auto w = step_disturbance(1, 4, 4);
  Vector x0(2);
  x0 << 1.0, -2.0;
  const auto z = simulate(p, K, Strategy::zero(), mu, w, x0);
  CHECK(z.u_a[1].norm() == 0.0);
  CHECK(z.u_a[2].norm() == 0.0);
  const auto h = simulate(p, K, Strategy::hold(), mu, w, x0);
  CHECK(h.u_a[1] == h.u_a[0]);
  CHECK(h.u_a[2] == h.u_a[0]);
  CHECK(h.u_a[0].isApprox(K * x0));
  CHECK_THROWS_AS(simulate(p, K, Strategy::zero(), parse_loss_sequence("0111"), w), InvalidFirstAttempt);
  CHECK_THROWS_AS(simulate(p, K, Strategy::zero(), parse_loss_sequence("11"), w), DimensionMismatch);
  CHECK_THROWS_AS(simulate(p, K, Strategy::hold(Vector::Zero(3)), mu, w), DimensionMismatch);
  CHECK_THROWS_AS(empirical_gain(z), std::invalid_argument);  // nonzero x0
}

// [DERIVED] The lifted closed loop reproduces the simulated state at every
// success instant and the stacked outputs in between.
TEST_CASE("lifted dynamics agree with simulation") {
  const auto p = fixture::paper_plant();
  const Matrix K = fixture::paper_K();
  for (auto strat : {Strategy::zero(), Strategy::hold()}) {
    const auto mu = parse_loss_sequence("10110100110111");
    std::mt19937_64 rng(5);
    const auto w = gaussian(rng, 1, static_cast<int>(mu.size()));
    const auto tr = simulate(p, K, strat, mu, w);
    const auto idx = lift_sequences(mu);
    const auto family = lift(p, strat, {0, 1, 2});
    const auto loops = lifted_closed_loop(family, K);
    Vector x = Vector::Zero(2);
    for (std::size_t b = 0; b < idx.alpha.size(); ++b) {
      const int a = idx.alpha[b];
      const auto& m = loops.at(a).mode;
      Vector ws(a + 1);
      for (int i = 0; i <= a; ++i) ws(i) = w[static_cast<std::size_t>(idx.tau[b] + i)](0);
      const Vector zs = m.C * x + m.Dw * ws;
      for (int i = 0; i <= a; ++i) CHECK(zs(i) == Catch::Approx(tr.z[static_cast<std::size_t>(idx.tau[b] + i)](0)).margin(1e-10));
      x = m.A * x + m.Bw * ws;
      CHECK((x - tr.x[static_cast<std::size_t>(idx.tau[b + 1])]).norm() <= 1e-10);
    }
  }
}

TEST_CASE("switched controller schedule follows the lifted graph") {
  const auto g = build_lifted_graph(WhrtConstraint::any_hit(2, 3));
  const Matrix K1 = fixture::paper_K(), K2 = fixture::synthesized_K();
  const auto ctrl = Controller::switched({K1, K2}, g);
  CHECK(ctrl.schedule(parse_loss_sequence("1011")) == std::vector<int>{0, 0, 1, 0});
  CHECK_THROWS_AS(ctrl.schedule(parse_loss_sequence("10101")), InadmissibleLabel);
  CHECK_THROWS_AS(Controller::switched({K1}, g), DimensionMismatch);
  const auto tr = simulate(fixture::paper_plant(), ctrl, Strategy::zero(), parse_loss_sequence("1011"),
                           step_disturbance(1, 4, 4));
  CHECK(tr.u_a[2].isApprox(K2 * tr.x[2]));
  CHECK(tr.u_a[3].isApprox(K1 * tr.x[3]));
}

TEST_CASE("CSV export") {
  const auto p = fixture::paper_plant();
  const auto tr = simulate(p, fixture::paper_K(), Strategy::zero(), parse_loss_sequence("10110"), step_disturbance(1, 2, 5));
  std::ostringstream os;
  write_csv(os, tr);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,mu_k,x_1,x_2,u_a_1,w_1,z_1");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
  CHECK(os.str().find("\n1,0,") != std::string::npos);
}

TEST_CASE("random admissible sequences are deterministic and admissible") {
  for (const auto& c : {WhrtConstraint::any_hit(2, 3), WhrtConstraint::any_hit(4, 10), WhrtConstraint::row_hit(2, 4),
                        WhrtConstraint::row_miss(2, 5), WhrtConstraint::any_miss(3, 3)}) {
    CHECK(random_admissible(c, 100, 42) == random_admissible(c, 100, 42));
    bool differs = false;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const auto mu = random_admissible(c, 60, seed);
      REQUIRE(mu.size() == 60);
      REQUIRE(mu[0] == 1);
      REQUIRE(satisfies(mu, c));
      differs = differs || mu != random_admissible(c, 60, 0);
    }
    CHECK(differs);
  }
}

TEST_CASE("power iteration improves monotonically") {
  const auto p = fixture::paper_plant();
  const auto ctrl = Controller::fixed(fixture::paper_K());
  const auto mu = periodic(parse_loss_sequence("101101"), 120);
  const auto res = maximize_disturbance(p, ctrl, Strategy::zero(), mu, 120);
  for (std::size_t i = 1; i < res.history.size(); ++i) CHECK(res.history[i] >= res.history[i - 1] * (1 - 1e-12));
  const auto tr = simulate(p, ctrl, Strategy::zero(), mu, res.w);
  CHECK(empirical_gain(tr) == Catch::Approx(res.gain).epsilon(1e-9));
  CHECK(res.gain >= step_sweep(p, ctrl, Strategy::zero(), parse_loss_sequence("101101"), 20).gain * 0.999);
}

TEST_CASE("worst-case search candidates") {
  const auto p = fixture::paper_plant();
  const auto c = WhrtConstraint::any_hit(2, 3);
  const auto one = worst_case_search(p, fixture::paper_K(), Strategy::zero(), c, 60, 1);
  REQUIRE(one.evaluated.size() == 1);
  CHECK(one.evaluated[0] == LossSequence(60, 1));
  const auto res = worst_case_search(p, fixture::paper_K(), Strategy::zero(), c, 120, 32);
  CHECK(res.candidates == 32);
  const auto paper_mu = periodic(parse_loss_sequence("101101"), 120);
  CHECK(std::find(res.evaluated.begin(), res.evaluated.end(), paper_mu) != res.evaluated.end());
  for (const auto& mu : res.evaluated) CHECK(satisfies(mu, c));
  CHECK(res.gain >= 3.4);
  CHECK(res.gain <= 3.53);
}

// [DERIVED] Without losses the finite-horizon worst case approaches the
// H-infinity norm of the LTI closed loop from below.
TEST_CASE("AnyHit(1,1) worst case approaches the H-infinity norm") {
  const auto p = fixture::paper_plant();
  const Matrix K = fixture::paper_K();
  const double ref = oracle::hinf_norm(p.A + p.B * K, p.Bw, p.C + p.D * K, p.Dw);
  const auto res = worst_case_search(p, K, Strategy::zero(), WhrtConstraint::any_hit(1, 1), 400, 4);
  CHECK(res.gain <= ref * (1 + 1e-9));
  CHECK(res.gain >= ref * 0.98);
}
