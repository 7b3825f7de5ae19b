#pragma once

// Reference computations used as test oracles. None of them call into the
// library code they check: windows are re-scanned directly, extendability
// comes from a suffix-state fixpoint, gains from a frequency grid, and
// lifted matrices from stepping the plant recursion.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <set>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Word = std::vector<int>;

enum class Kind { AnyHit, RowHit, AnyMiss, RowMiss };

inline bool window_ok(const Word& w, std::size_t start, int s, Kind kind, int r) {
  int ones = 0, best_one = 0, best_zero = 0, run1 = 0, run0 = 0;
  for (std::size_t k = start; k < start + static_cast<std::size_t>(s); ++k) {
    if (w[k]) {
      ++ones;
      best_one = std::max(best_one, ++run1);
      run0 = 0;
    } else {
      best_zero = std::max(best_zero, ++run0);
      run1 = 0;
    }
  }
  switch (kind) {
    case Kind::AnyHit:
      return ones >= r;
    case Kind::RowHit:
      return best_one >= r;
    case Kind::AnyMiss:
      return s - ones <= r;
    case Kind::RowMiss:
      return best_zero <= r;
  }
  return false;
}

inline bool admissible(const Word& w, Kind kind, int r, int s) {
  for (std::size_t start = 0; start + static_cast<std::size_t>(s) <= w.size(); ++start) {
    if (!window_ok(w, start, s, kind, r)) return false;
  }
  return true;
}

inline Word bits(std::uint32_t code, int length) {
  Word w(static_cast<std::size_t>(length));
  for (int k = 0; k < length; ++k) w[static_cast<std::size_t>(k)] = (code >> (length - 1 - k)) & 1u;
  return w;
}

/// Suffix states (last s-1 attempts, as integers) from which an infinite
/// admissible continuation exists: greatest fixpoint of "some next bit
/// completes a valid window and leads to a live state".
inline std::vector<char> live_suffixes(Kind kind, int r, int s) {
  const int h = s - 1;
  const std::uint32_t count = 1u << h;
  std::vector<char> live(count, 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::uint32_t u = 0; u < count; ++u) {
      if (!live[u]) continue;
      bool ok = false;
      for (int b = 0; b <= 1 && !ok; ++b) {
        const Word win = bits((u << 1) | static_cast<std::uint32_t>(b), s);
        const std::uint32_t next = ((u << 1) | static_cast<std::uint32_t>(b)) & (count - 1);
        ok = window_ok(win, 0, s, kind, r) && live[next];
      }
      if (!ok) {
        live[u] = 0;
        changed = true;
      }
    }
  }
  return live;
}

inline std::uint32_t suffix_code(const Word& w, int h) {
  std::uint32_t u = 0;
  for (std::size_t k = w.size() - static_cast<std::size_t>(h); k < w.size(); ++k) u = (u << 1) | static_cast<std::uint32_t>(w[k]);
  return u;
}

/// All words of `length` that satisfy the constraint and extend to an
/// infinite admissible sequence, optionally restricted to a leading 1.
inline std::set<Word> extendable(Kind kind, int r, int s, int length, bool leading_one) {
  const auto live = live_suffixes(kind, r, s);
  const int h = s - 1;
  std::set<Word> out;
  for (std::uint32_t code = 0; code < (1u << length); ++code) {
    const Word w = bits(code, length);
    if (leading_one && (w.empty() || w[0] != 1)) continue;
    if (!admissible(w, kind, r, s)) continue;
    bool ext = false;
    if (length >= h) {
      ext = live[h == 0 ? 0 : suffix_code(w, h)] != 0;
    } else {
      // Pad to s-1 attempts in every way, then look up the suffix state.
      const int pad = h - length;
      for (std::uint32_t p = 0; p < (1u << pad) && !ext; ++p) {
        Word v = w;
        const Word tail = bits(p, pad);
        v.insert(v.end(), tail.begin(), tail.end());
        ext = admissible(v, kind, r, s) && live[suffix_code(v, h)];
      }
    }
    if (ext) out.insert(w);
  }
  return out;
}

/// Peak of sigma_max(C (zI - A)^-1 B + D) over a grid on the unit circle,
/// refined around the best grid point by golden-section search.
inline double hinf_norm(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C,
                        const Eigen::MatrixXd& D, int grid = 20000) {
  using cd = std::complex<double>;
  const auto n = A.rows();
  auto gain = [&](double omega) {
    const Eigen::MatrixXcd zI = std::exp(cd(0.0, omega)) * Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd H =
        C.cast<cd>() * (zI - A.cast<cd>()).partialPivLu().solve(B.cast<cd>()) + D.cast<cd>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H);
    return svd.singularValues()(0);
  };
  const double pi = std::acos(-1.0);
  double best = 0.0, best_w = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double w = pi * i / grid;
    const double g = gain(w);
    if (g > best) {
      best = g;
      best_w = w;
    }
  }
  double lo = std::max(0.0, best_w - pi / grid), hi = std::min(pi, best_w + pi / grid);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 100; ++it) {
    const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    if (gain(a) > gain(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return std::max(best, gain(0.5 * (lo + hi)));
}

/// Spectral radius.
inline double spectral_radius(const Eigen::MatrixXd& A) { return A.eigenvalues().cwiseAbs().maxCoeff(); }

/// Steps the plant through one success (input u applied at the first step)
/// followed by `alpha` losses, with per-step disturbances w[0..alpha]. The
/// zero strategy applies nothing during losses, hold keeps applying u.
/// Returns the final state and the stacked outputs.
struct BlockRun {
  Eigen::VectorXd x_end;
  Eigen::VectorXd z_stack;
};

inline BlockRun run_block(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Bw,
                          const Eigen::MatrixXd& C, const Eigen::MatrixXd& D, const Eigen::MatrixXd& Dw,
                          bool hold, int alpha, const Eigen::VectorXd& x0, const Eigen::VectorXd& u,
                          const std::vector<Eigen::VectorXd>& w) {
  Eigen::VectorXd x = x0;
  const auto p = C.rows();
  BlockRun out;
  out.z_stack.resize(p * (alpha + 1));
  for (int k = 0; k <= alpha; ++k) {
    const Eigen::VectorXd ua = (k == 0 || hold) ? u : Eigen::VectorXd::Zero(u.size());
    out.z_stack.segment(k * p, p) = C * x + D * ua + Dw * w[static_cast<std::size_t>(k)];
    x = A * x + B * ua + Bw * w[static_cast<std::size_t>(k)];
  }
  out.x_end = x;
  return out;
}

}  // namespace oracle
