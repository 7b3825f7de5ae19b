#pragma once

// Property checks shared by the property tests and the acceptance binary.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "whrt/graph.hpp"
#include "whrt/lmi.hpp"
#include "whrt/sim.hpp"

namespace props {

using namespace whrt;

struct SoundnessReport {
  int runs = 0;
  double worst_ratio = 0.0;        // max sqrt(sum z'z / sum w'w) / gamma
  double worst_dissipation = -1e300;  // max stepwise dissipation residual
  bool pass = true;
  std::string detail;
};

// Simulates `runs` random admissible loss sequences with Gaussian (and, every
// tenth run, power-iteration worst-case) disturbances. Checks the energy bound
// and the per-edge dissipation inequality of the certificate along the path.
// `sys` must be the constrained system the certificate was computed for;
// `graph` is its lifted graph (lifted = true) or its {0,1} graph.
inline SoundnessReport check_soundness(const Plant& plant, const Controller& ctrl, const Strategy& strat,
                                       const WhrtConstraint& c, const AnalysisCertificate& cert,
                                       const ConstrainedSystem& sys, const WhrtGraph& graph, bool lifted,
                                       std::uint64_t seed, int runs = 100, int horizon = 200) {
  SoundnessReport rep;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  auto find_edge = [&](int from, int label, int to) -> const EdgeSystem* {
    for (const EdgeSystem& e : sys.edges) {
      if (e.from == from && e.label == label && (to < 0 || e.to == to)) return &e;
    }
    return nullptr;
  };
  auto fail = [&](const std::string& why) {
    if (rep.pass) rep.detail = why;
    rep.pass = false;
  };
  for (int run = 0; run < runs; ++run) {
    const LossSequence mu = random_admissible(c, horizon, seed * 1000003ULL + static_cast<std::uint64_t>(run));
    std::vector<Vector> w;
    if (run % 10 == 9) {
      w = maximize_disturbance(plant, ctrl, strat, mu, horizon, 100).w;
    } else {
      const double scale = std::exp(N(rng));
      for (int k = 0; k < horizon; ++k) w.push_back(scale * Vector::NullaryExpr(plant.q(), [&](Eigen::Index) { return N(rng); }));
    }
    const auto tr = simulate(plant, ctrl, strat, mu, w);
    ++rep.runs;
    const double ew = tr.input_energy(), ez = tr.output_energy();
    rep.worst_ratio = std::max(rep.worst_ratio, std::sqrt(ez / ew) / cert.gamma);
    if (!(ez <= (cert.gamma + 1e-6) * (cert.gamma + 1e-6) * ew)) {
      fail("energy bound violated on run " + std::to_string(run));
    }
    auto dissipation = [&](const EdgeSystem* e, const Vector& x, const Vector& ws) {
      if (!e) {
        fail("path edge missing from the certified system on run " + std::to_string(run));
        return;
      }
      const double r = dissipation_residual(cert, *e, x, ws);
      rep.worst_dissipation = std::max(rep.worst_dissipation, r);
      if (!(r < 1e-8)) fail("dissipation violated on run " + std::to_string(run));
    };
    if (lifted) {
      const auto idx = lift_sequences(mu);
      int node = graph.initial_nodes().front();
      for (std::size_t b = 0; b < idx.alpha.size(); ++b) {
        const int a = idx.alpha[b];
        Vector ws(plant.q() * (a + 1));
        for (int i = 0; i <= a; ++i) ws.segment(i * plant.q(), plant.q()) = w[static_cast<std::size_t>(idx.tau[b] + i)];
        const EdgeSystem* e = find_edge(node, a, -1);
        dissipation(e, tr.x[static_cast<std::size_t>(idx.tau[b])], ws);
        if (!e) break;
        node = e->to;
      }
    } else {
      const auto path = trace_path(graph, mu);
      if (!path) {
        fail("admissible sequence not generated by the graph on run " + std::to_string(run));
        continue;
      }
      for (int k = 0; k < horizon; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        Vector x = tr.x[kk];
        if (strat.kind == LossStrategy::Hold) {
          Vector xi(plant.n() + plant.m());
          const Vector u_prev = k == 0 ? Vector::Zero(plant.m()) : tr.u_a[kk - 1];
          xi << x, u_prev;
          x = xi;
        }
        dissipation(find_edge((*path)[kk], mu[kk], (*path)[kk + 1]), x, w[kk]);
      }
    }
  }
  return rep;
}

struct Lemma1Case {
  std::string description;
  double gamma_lifted = 0.0;
  double gamma_nonlifted = 0.0;
  bool agree = false;
  SoundnessReport lifted_soundness, nonlifted_soundness;
};

struct RandomLoop {
  Plant plant;
  Matrix K;
  WhrtConstraint c;
  WhrtGraph lifted;
  Strategy strat;
};

// Randomized closed loop: 2-3 states, both modes Schur stable, a random
// constraint with s <= 5 that bounds loss runs; every third draw uses hold.
inline std::optional<RandomLoop> draw_loop(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(2, 3), kind(0, 3);
  std::uniform_real_distribution<double> rho(0.3, 0.95);
  const int n = dim(rng);
  RandomLoop out;
  for (int attempt = 0;; ++attempt) {
    out.plant = fixture::random_plant(rng, n, 1, 1, 1);
    out.plant.A *= rho(rng) / oracle::spectral_radius(out.plant.A);
    std::normal_distribution<double> N(0.0, 0.3);
    out.K = Matrix::NullaryExpr(1, n, [&](Eigen::Index, Eigen::Index) { return N(rng); });
    if (oracle::spectral_radius(out.plant.A + out.plant.B * out.K) < 0.95) break;
    if (attempt > 100) return std::nullopt;
  }
  while (true) {
    const int s = std::uniform_int_distribution<int>(2, 5)(rng);
    const int r = std::uniform_int_distribution<int>(1, s)(rng);
    out.c = WhrtConstraint::make(static_cast<ConstraintKind>(kind(rng)), r, s);
    try {
      out.lifted = build_lifted_graph(out.c);
      break;
    } catch (const UnboundedLosses&) {
    }
  }
  out.strat = seed % 3 == 2 ? Strategy::hold() : Strategy::zero();
  return out;
}

// Lemma 1 comparison on draw_loop(seed). Returns nothing when the LMIs are
// infeasible for the draw.
inline std::optional<Lemma1Case> lemma1_case(std::uint64_t seed, bool with_soundness, int soundness_runs = 100,
                                             const SolveOptions& opts = {}) {
  const auto loop = draw_loop(seed);
  if (!loop) return std::nullopt;
  const auto& [plant, K, c, lifted, strat] = *loop;
  const int n = plant.n();
  const auto labels = lifted.labels();
  const auto family = lift(plant, strat, std::set<int>(labels.begin(), labels.end()));
  const auto graph = build_graph(c);
  const auto lsys = lifted_system(family, K, lifted);
  const auto nsys = nonlifted_system(closed_loop(plant, K, strat), graph);
  Lemma1Case out;
  out.description = to_string(c) + " n=" + std::to_string(n) + " " + to_string(strat.kind);
  AnalysisCertificate lc, nc;
  try {
    lc = analyze(lsys, opts);
    nc = analyze(nsys, opts);
  } catch (const Infeasible&) {
    return std::nullopt;
  }
  out.gamma_lifted = lc.gamma;
  out.gamma_nonlifted = nc.gamma;
  out.agree = std::abs(lc.gamma - nc.gamma) <= 1e-2 * (1 + lc.gamma);
  if (with_soundness) {
    const auto ctrl = Controller::fixed(K);
    out.lifted_soundness = check_soundness(plant, ctrl, strat, c, lc, lsys, lifted, true, seed, soundness_runs);
    out.nonlifted_soundness = check_soundness(plant, ctrl, strat, c, nc, nsys, graph, false, seed + 7, soundness_runs);
  }
  return out;
}

}  // namespace props
