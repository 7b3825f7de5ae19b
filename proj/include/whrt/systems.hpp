#pragma once

#include <array>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "whrt/constraints.hpp"
#include "whrt/errors.hpp"

namespace whrt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Discrete-time plant
///   x+ = A x + B u + Bw w
///   z  = C x + D u + Dw w
/// with n states, m inputs, q disturbances and p performance outputs.
struct Plant {
  Matrix A, B, Bw, C, D, Dw;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int q() const { return static_cast<int>(Bw.cols()); }
  int p() const { return static_cast<int>(C.rows()); }

  /// Throws DimensionMismatch on inconsistent shapes or non-finite entries.
  void validate() const {
    auto require = [](bool ok, const std::string& what) {
      if (!ok) throw DimensionMismatch(what);
    };
    require(A.rows() > 0 && A.rows() == A.cols(), "A must be square and non-empty");
    const auto n = A.rows();
    require(B.rows() == n && B.cols() > 0, "B must have n rows");
    require(Bw.rows() == n && Bw.cols() > 0, "Bw must have n rows");
    require(C.cols() == n && C.rows() > 0, "C must have n columns");
    require(D.rows() == C.rows() && D.cols() == B.cols(), "D must be p x m");
    require(Dw.rows() == C.rows() && Dw.cols() == Bw.cols(), "Dw must be p x q");
    for (const Matrix* M : {&A, &B, &Bw, &C, &D, &Dw}) {
      require(M->allFinite(), "plant matrices must be finite");
    }
  }

  static Plant make(Matrix A, Matrix B, Matrix Bw, Matrix C, Matrix D, Matrix Dw) {
    Plant p{std::move(A), std::move(B), std::move(Bw), std::move(C), std::move(D), std::move(Dw)};
    p.validate();
    return p;
  }
};

enum class LossStrategy { Zero, Hold };

/// What the actuator applies when a control input is lost: nothing (Zero)
/// or the last applied input (Hold, starting from `initial_input`).
struct Strategy {
  LossStrategy kind = LossStrategy::Zero;
  Vector initial_input;  // Hold only; empty means zero.

  static Strategy zero() { return Strategy{LossStrategy::Zero, {}}; }
  static Strategy hold(Vector initial = {}) { return Strategy{LossStrategy::Hold, std::move(initial)}; }
};

inline std::string to_string(LossStrategy s) { return s == LossStrategy::Zero ? "zero" : "hold"; }

inline void check_gain(const Plant& plant, const Matrix& K) {
  if (K.rows() != plant.m() || K.cols() != plant.n()) {
    throw DimensionMismatch("K must be " + std::to_string(plant.m()) + "x" + std::to_string(plant.n()) +
                            ", got " + std::to_string(K.rows()) + "x" + std::to_string(K.cols()));
  }
}

/// One mode of a switched linear system x+ = A x + Bw w, z = C x + Dw w.
struct Mode {
  Matrix A, Bw, C, Dw;
};

/// Closed loop as a two-mode switched system indexed by the loss label
/// (0 = loss, 1 = success).
struct SwitchedClosedLoop {
  std::array<Mode, 2> modes;
  int state_dim = 0;
  LossStrategy strategy = LossStrategy::Zero;

  const Mode& mode(int label) const { return modes.at(static_cast<std::size_t>(label)); }
};

/// Zero strategy acts on x directly. Hold acts on xi = [x; u_prev]:
///   success: xi+ = [A+BK 0; K 0] xi + [Bw; 0] w,  z = [C+DK 0] xi + Dw w
///   loss:    xi+ = [A B; 0 I] xi + [Bw; 0] w,     z = [C D] xi + Dw w
inline SwitchedClosedLoop closed_loop(const Plant& p, const Matrix& K, const Strategy& strat) {
  p.validate();
  check_gain(p, K);
  const int n = p.n();
  const int m = p.m();
  SwitchedClosedLoop cl;
  cl.strategy = strat.kind;
  if (strat.kind == LossStrategy::Zero) {
    cl.state_dim = n;
    cl.modes[0] = {p.A, p.Bw, p.C, p.Dw};
    cl.modes[1] = {p.A + p.B * K, p.Bw, p.C + p.D * K, p.Dw};
    return cl;
  }
  const int na = n + m;
  cl.state_dim = na;
  Matrix Bw_aug = Matrix::Zero(na, p.q());
  Bw_aug.topRows(n) = p.Bw;

  Matrix A1 = Matrix::Zero(na, na);
  A1.topLeftCorner(n, n) = p.A + p.B * K;
  A1.bottomLeftCorner(m, n) = K;
  Matrix C1 = Matrix::Zero(p.p(), na);
  C1.leftCols(n) = p.C + p.D * K;

  Matrix A0 = Matrix::Zero(na, na);
  A0.topLeftCorner(n, n) = p.A;
  A0.topRightCorner(n, m) = p.B;
  A0.bottomRightCorner(m, m) = Matrix::Identity(m, m);
  Matrix C0(p.p(), na);
  C0 << p.C, p.D;

  cl.modes[0] = {A0, Bw_aug, C0, p.Dw};
  cl.modes[1] = {A1, Bw_aug, C1, p.Dw};
  return cl;
}

/// Success instants tau and the loss counts alpha between consecutive
/// successes. Trailing losses after the last success form no complete block.
struct LiftedIndexing {
  std::vector<int> tau;
  std::vector<int> alpha;
};

inline LiftedIndexing lift_sequences(std::span<const int> mu) {
  if (mu.empty() || mu[0] != 1) throw InvalidFirstAttempt("the first control attempt must succeed (mu[0] = 1)");
  LiftedIndexing out;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (mu[k] != 0) out.tau.push_back(static_cast<int>(k));
  }
  for (std::size_t i = 1; i < out.tau.size(); ++i) out.alpha.push_back(out.tau[i] - out.tau[i - 1] - 1);
  return out;
}

/// Loss sequence 1 0^a0 1 0^a1 ... 0^a_last (each block starts with its
/// success), i.e. the blocks the lifted dynamics step over.
inline LossSequence blocks_to_loss_sequence(std::span<const int> alpha) {
  LossSequence mu;
  for (int a : alpha) {
    mu.push_back(1);
    mu.insert(mu.end(), static_cast<std::size_t>(a), 0);
  }
  return mu;
}

/// Open-loop lifted matrices for a block of one success followed by `alpha`
/// losses. Row blocks of C, D, Dw and column blocks of Bw, Dw are ordered
/// oldest first.
struct LiftedMatrices {
  int alpha = 0;
  Matrix A, B, C, D, Bw, Dw;
};

struct LiftedFamily {
  LossStrategy strategy = LossStrategy::Zero;
  int n = 0, m = 0, q = 0, p = 0;
  std::map<int, LiftedMatrices> blocks;

  const LiftedMatrices& at(int alpha) const {
    auto it = blocks.find(alpha);
    if (it == blocks.end()) throw std::out_of_range("no lifted matrices for label " + std::to_string(alpha));
    return it->second;
  }
  bool contains(int alpha) const { return blocks.count(alpha) != 0; }
};

inline LiftedMatrices lift_block(const Plant& pl, LossStrategy strategy, int alpha) {
  if (alpha < 0) throw std::invalid_argument("lifted label must be non-negative");
  const int n = pl.n(), m = pl.m(), q = pl.q(), p = pl.p();
  const int len = alpha + 1;
  // powers[i] = A^i
  std::vector<Matrix> powers{Matrix::Identity(n, n)};
  for (int i = 1; i <= len; ++i) powers.push_back(powers.back() * pl.A);

  LiftedMatrices L;
  L.alpha = alpha;
  L.A = powers[static_cast<std::size_t>(len)];
  L.C.resize(len * p, n);
  for (int i = 0; i < len; ++i) L.C.middleRows(i * p, p) = pl.C * powers[static_cast<std::size_t>(i)];

  L.Bw.resize(n, len * q);
  for (int j = 0; j < len; ++j) L.Bw.middleCols(j * q, q) = powers[static_cast<std::size_t>(alpha - j)] * pl.Bw;
  L.Dw = Matrix::Zero(len * p, len * q);
  for (int i = 0; i < len; ++i) {
    L.Dw.block(i * p, i * q, p, q) = pl.Dw;
    for (int j = 0; j < i; ++j) {
      L.Dw.block(i * p, j * q, p, q) = pl.C * powers[static_cast<std::size_t>(i - j - 1)] * pl.Bw;
    }
  }

  L.D.resize(len * p, m);
  L.D.topRows(p) = pl.D;
  if (strategy == LossStrategy::Zero) {
    L.B = powers[static_cast<std::size_t>(alpha)] * pl.B;
    for (int i = 1; i < len; ++i) L.D.middleRows(i * p, p) = pl.C * powers[static_cast<std::size_t>(i - 1)] * pl.B;
  } else {
    // partial[i] = sum_{j<i} A^j B, the response at step i to an input held since the block start.
    Matrix partial = Matrix::Zero(n, m);
    for (int i = 1; i < len; ++i) {
      partial += powers[static_cast<std::size_t>(i - 1)] * pl.B;
      L.D.middleRows(i * p, p) = pl.C * partial + pl.D;
    }
    L.B = partial + powers[static_cast<std::size_t>(alpha)] * pl.B;
  }
  return L;
}

inline LiftedFamily lift(const Plant& pl, const Strategy& strat, const std::set<int>& labels) {
  pl.validate();
  LiftedFamily f;
  f.strategy = strat.kind;
  f.n = pl.n();
  f.m = pl.m();
  f.q = pl.q();
  f.p = pl.p();
  for (int a : labels) f.blocks.emplace(a, lift_block(pl, strat.kind, a));
  return f;
}

/// Closed-loop lifted mode: A + B K, C + D K; disturbance channels unchanged.
struct LiftedClosedLoop {
  int alpha = 0;
  Mode mode;
};

inline std::map<int, LiftedClosedLoop> lifted_closed_loop(const LiftedFamily& f, const Matrix& K) {
  if (K.rows() != f.m || K.cols() != f.n) throw DimensionMismatch("K must be m x n");
  std::map<int, LiftedClosedLoop> out;
  for (const auto& [a, L] : f.blocks) {
    out.emplace(a, LiftedClosedLoop{a, Mode{L.A + L.B * K, L.Bw, L.C + L.D * K, L.Dw}});
  }
  return out;
}

}  // namespace whrt
