#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "whrt/systems.hpp"

using namespace whrt;

// [DERIVED] Each lifted block equals stepping the plant through one success
// and alpha losses: x_end = A_a x0 + B_a u + Bw_a w, z = C_a x0 + D_a u + Dw_a w.
TEST_CASE("lift_block matches the stepping oracle") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 1 + trial % 3, m = 1 + trial % 2, q = 1 + (trial / 2) % 2, p = 1 + (trial / 3) % 2;
    const auto pl = fixture::random_plant(rng, n, m, q, p, 0.7);
    for (auto strat : {LossStrategy::Zero, LossStrategy::Hold}) {
      for (int alpha = 0; alpha <= 4; ++alpha) {
        const auto L = lift_block(pl, strat, alpha);
        const Vector x0 = Vector::NullaryExpr(n, [&](Eigen::Index) { return N(rng); });
        const Vector u = Vector::NullaryExpr(m, [&](Eigen::Index) { return N(rng); });
        std::vector<Vector> w;
        Vector wstack(q * (alpha + 1));
        for (int k = 0; k <= alpha; ++k) {
          w.push_back(Vector::NullaryExpr(q, [&](Eigen::Index) { return N(rng); }));
          wstack.segment(k * q, q) = w.back();
        }
        const auto ref = oracle::run_block(pl.A, pl.B, pl.Bw, pl.C, pl.D, pl.Dw, strat == LossStrategy::Hold, alpha,
                                           x0, u, w);
        CHECK((L.A * x0 + L.B * u + L.Bw * wstack - ref.x_end).norm() <= 1e-10 * (1 + ref.x_end.norm()));
        CHECK((L.C * x0 + L.D * u + L.Dw * wstack - ref.z_stack).norm() <= 1e-10 * (1 + ref.z_stack.norm()));
      }
    }
  }
}

TEST_CASE("alpha = 0 lifts to the plant itself") {
  const auto pl = fixture::paper_plant();
  for (auto strat : {LossStrategy::Zero, LossStrategy::Hold}) {
    const auto L = lift_block(pl, strat, 0);
    CHECK(L.A.isApprox(pl.A));
    CHECK(L.B.isApprox(pl.B));
    CHECK(L.C.isApprox(pl.C));
    CHECK(L.D.isApprox(pl.D));
  }
}

TEST_CASE("closed_loop modes") {
  const auto pl = fixture::paper_plant();
  const Matrix K = fixture::paper_K();
  const auto z = closed_loop(pl, K, Strategy::zero());
  CHECK(z.state_dim == 2);
  CHECK(z.mode(1).A.isApprox(pl.A + pl.B * K));
  CHECK(z.mode(0).A.isApprox(pl.A));
  const auto h = closed_loop(pl, K, Strategy::hold());
  CHECK(h.state_dim == 3);
  // A loss keeps the stored input: the last state component is unchanged.
  Vector xi(3);
  xi << 0.3, -0.2, 0.9;
  CHECK((h.mode(0).A * xi)(2) == Catch::Approx(0.9));
  CHECK((h.mode(1).A * xi)(2) == Catch::Approx((K * xi.head(2))(0)));
}

TEST_CASE("lift_sequences") {
  const auto idx = lift_sequences(parse_loss_sequence("1001101"));
  CHECK(idx.tau == std::vector<int>{0, 3, 4, 6});
  CHECK(idx.alpha == std::vector<int>{2, 0, 1});
  CHECK_THROWS_AS(lift_sequences(parse_loss_sequence("0110")), InvalidFirstAttempt);
  CHECK(blocks_to_loss_sequence(std::vector<int>{2, 0, 1}) == parse_loss_sequence("100110"));
}

TEST_CASE("dimension checks") {
  const auto pl = fixture::paper_plant();
  CHECK_THROWS_AS(closed_loop(pl, Matrix::Zero(2, 2), Strategy::zero()), DimensionMismatch);
  CHECK_THROWS_AS(Plant::make(Matrix::Zero(2, 2), Matrix::Zero(3, 1), pl.Bw, pl.C, pl.D, pl.Dw), DimensionMismatch);
  Matrix bad = pl.A;
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(Plant::make(bad, pl.B, pl.Bw, pl.C, pl.D, pl.Dw), DimensionMismatch);
  const auto f = lift(pl, Strategy::zero(), {0, 1});
  CHECK_THROWS_AS(lifted_closed_loop(f, Matrix::Zero(1, 3)), DimensionMismatch);
  CHECK_THROWS_AS(f.at(2), std::out_of_range);
}
