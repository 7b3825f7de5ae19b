#pragma once

#include <random>

#include "whrt/systems.hpp"

namespace fixture {

// Unstable second-order plant of the numerical example.
inline whrt::Plant paper_plant() {
  whrt::Matrix A(2, 2), B(2, 1), Bw(2, 1), C(1, 2), D(1, 1), Dw(1, 1);
  A << 0, 1, 1, 1;
  B << 1, 1;
  Bw << 1, 1;
  C << 1, 1;
  D << 1;
  Dw << 1;
  return whrt::Plant::make(A, B, Bw, C, D, Dw);
}

inline whrt::Matrix paper_K() {
  whrt::Matrix K(1, 2);
  K << -0.35, -0.85;
  return K;
}

inline whrt::Matrix synthesized_K() {
  whrt::Matrix K(1, 2);
  K << -0.61, -1.00;
  return K;
}

inline whrt::Plant random_plant(std::mt19937_64& rng, int n, int m, int q, int p, double scale = 1.0) {
  std::normal_distribution<double> N(0.0, scale);
  auto rnd = [&](int r, int c) {
    whrt::Matrix M(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) M(i, j) = N(rng);
    return M;
  };
  return whrt::Plant::make(rnd(n, n), rnd(n, m), rnd(n, q), rnd(p, n), rnd(p, m), rnd(p, q));
}

}  // namespace fixture
