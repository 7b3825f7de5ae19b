#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "whrt/errors.hpp"
#include "whrt/graph.hpp"
#include "whrt/sdp.hpp"
#include "whrt/systems.hpp"

namespace whrt {

/// One edge (i, j, l) of a graph-constrained switched system together with
/// the mode active on it. Synthesis edges additionally carry the input
/// matrices B and D of the open loop.
struct EdgeSystem {
  int from = 0;
  int to = 0;
  int label = 0;
  Mode mode;
  Matrix B, D;  // synthesis only
};

/// Graph-constrained switched system with a common state dimension.
struct ConstrainedSystem {
  int num_nodes = 0;
  int state_dim = 0;
  int input_dim = 0;  // synthesis only
  std::vector<EdgeSystem> edges;
};

/// Closed loop of Theorem 1: edges labeled 0/1 pick the loss/success mode.
inline ConstrainedSystem nonlifted_system(const SwitchedClosedLoop& cl, const WhrtGraph& g) {
  if (g.lifted() || g.alphabet_size() != 2) throw std::invalid_argument("non-lifted analysis needs a {0,1} graph");
  ConstrainedSystem sys{g.num_nodes(), cl.state_dim, 0, {}};
  for (const Edge& e : g.edges()) sys.edges.push_back({e.from, e.to, e.label, cl.mode(e.label), {}, {}});
  return sys;
}

namespace detail {

inline void require_labels(const LiftedFamily& f, const WhrtGraph& g) {
  for (int l : g.labels()) {
    if (!f.contains(l)) throw InadmissibleLabel("lifted family has no matrices for label " + std::to_string(l));
  }
}

}  // namespace detail

/// Lifted closed loop of Theorem 2 with one gain, or one gain per node when
/// `gains` has num_nodes entries (switched controller selected by the
/// start node of the edge).
inline ConstrainedSystem lifted_system(const LiftedFamily& f, const std::vector<Matrix>& gains, const WhrtGraph& g) {
  detail::require_labels(f, g);
  if (gains.size() != 1 && gains.size() != static_cast<std::size_t>(g.num_nodes())) {
    throw DimensionMismatch("expected one gain or one gain per node");
  }
  for (const Matrix& K : gains) {
    if (K.rows() != f.m || K.cols() != f.n) throw DimensionMismatch("K must be m x n");
  }
  ConstrainedSystem sys{g.num_nodes(), f.n, 0, {}};
  for (const Edge& e : g.edges()) {
    const LiftedMatrices& L = f.at(e.label);
    const Matrix& K = gains.size() == 1 ? gains[0] : gains[static_cast<std::size_t>(e.from)];
    sys.edges.push_back({e.from, e.to, e.label, Mode{L.A + L.B * K, L.Bw, L.C + L.D * K, L.Dw}, {}, {}});
  }
  return sys;
}

inline ConstrainedSystem lifted_system(const LiftedFamily& f, const Matrix& K, const WhrtGraph& g) {
  return lifted_system(f, std::vector<Matrix>{K}, g);
}

/// Open-loop lifted system for Theorem 3.
inline ConstrainedSystem lifted_open_loop(const LiftedFamily& f, const WhrtGraph& g) {
  detail::require_labels(f, g);
  ConstrainedSystem sys{g.num_nodes(), f.n, f.m, {}};
  for (const Edge& e : g.edges()) {
    const LiftedMatrices& L = f.at(e.label);
    sys.edges.push_back({e.from, e.to, e.label, Mode{L.A, L.Bw, L.C, L.Dw}, L.B, L.D});
  }
  return sys;
}

/// (gamma, S_i, G_i) witnesses. For a common G the same matrix is stored
/// for every node.
struct AnalysisCertificate {
  double gamma = 0.0;
  std::vector<Matrix> S;
  std::vector<Matrix> G;
  double margin = 0.0;  // smallest eigenvalue over all edge LMIs at gamma
  double solver_gamma = 0.0;
  int solver_iterations = 0;
  double solve_seconds = 0.0;
  int decision_variables = 0;
  std::string backend;

  double norm() const {
    double out = std::abs(gamma);
    for (const Matrix& M : S) out = std::max(out, M.norm());
    for (const Matrix& M : G) out = std::max(out, M.norm());
    return out;
  }
};

struct SynthesisResult {
  bool switched = false;
  Matrix K;                  // non-switched gain
  std::vector<Matrix> K_nodes;  // switched gains, one per node
  std::vector<Matrix> R;
  double gamma = 0.0;               // certified for the returned gain(s)
  AnalysisCertificate certificate;  // witnesses for `gamma`
  double synthesis_gamma = 0.0;     // certified by the synthesis witnesses alone
  AnalysisCertificate synthesis_certificate;

  /// Gains as consumed by lifted_system.
  std::vector<Matrix> gains() const { return switched ? K_nodes : std::vector<Matrix>{K}; }
};

struct SolveOptions {
  std::shared_ptr<const sdp::Backend> backend;  // null selects the default
  // Backend for the synthesis LMIs; null uses `backend`.
  std::shared_ptr<const sdp::Backend> synthesis_backend;
  double margin = -1.0;                          // negative: 1e-7 (1 + max edge data norm)
  double tol_verify = -1.0;                      // negative: 1e-8 (1 + |certificate|)
  double cond_guard = 1e8;
  bool bisection = false;  // feasibility bisection on gamma instead of minimizing it
  double bisection_rel_tol = 1e-4;
  // After synthesis, re-run the analysis LMIs for the extracted gain(s) and
  // keep the better of the two certificates.
  bool reanalyze = true;
};

inline double default_margin(const ConstrainedSystem& sys) {
  double norm = 0.0;
  for (const EdgeSystem& e : sys.edges) {
    Matrix data(e.mode.A.rows() + e.mode.C.rows(), e.mode.A.cols() + e.mode.Bw.cols());
    data << e.mode.A, e.mode.Bw, e.mode.C, e.mode.Dw;
    norm = std::max(norm, data.operatorNorm());
    if (e.B.size() > 0) {
      Matrix in(e.B.rows() + e.D.rows(), e.B.cols());
      in << e.B, e.D;
      norm = std::max(norm, in.operatorNorm());
    }
  }
  return 1e-7 * (1.0 + norm);
}

inline double default_tol_verify(const AnalysisCertificate& c) { return 1e-8 * (1.0 + c.norm()); }

namespace detail {

// Index layout of the decision vector.
struct Layout {
  int N = 0;         // state dimension
  int M = 0;         // input dimension (synthesis)
  int nodes = 0;
  bool per_node_G = true;
  bool has_R = false;
  int gamma = -1;    // -1 when gamma is fixed
  int S0 = 0, G0 = 0, R0 = 0;

  int sym_size() const { return N * (N + 1) / 2; }
  int S(int node, int r, int c) const {
    if (r < c) std::swap(r, c);
    return S0 + node * sym_size() + c * N - c * (c - 1) / 2 + (r - c);
  }
  int G(int node, int r, int c) const { return G0 + (per_node_G ? node : 0) * N * N + c * N + r; }
  int R(int node, int r, int c) const { return R0 + (per_node_G ? node : 0) * M * N + c * M + r; }
};

inline Layout make_layout(sdp::Problem& prob, const ConstrainedSystem& sys, bool per_node_G, bool has_R,
                          bool gamma_variable) {
  Layout L;
  L.N = sys.state_dim;
  L.M = sys.input_dim;
  L.nodes = sys.num_nodes;
  L.per_node_G = per_node_G;
  L.has_R = has_R;
  if (gamma_variable) L.gamma = prob.add_var("gamma");
  L.S0 = prob.num_vars;
  for (int i = 0; i < L.nodes; ++i) {
    for (int c = 0; c < L.N; ++c) {
      for (int r = c; r < L.N; ++r) {
        prob.add_var("S" + std::to_string(i + 1) + "(" + std::to_string(r + 1) + "," + std::to_string(c + 1) + ")");
      }
    }
  }
  L.G0 = prob.num_vars;
  const int g_count = per_node_G ? L.nodes : 1;
  for (int i = 0; i < g_count; ++i) {
    for (int c = 0; c < L.N; ++c) {
      for (int r = 0; r < L.N; ++r) {
        prob.add_var((per_node_G ? "G" + std::to_string(i + 1) : std::string("G")) + "(" + std::to_string(r + 1) +
                     "," + std::to_string(c + 1) + ")");
      }
    }
  }
  L.R0 = prob.num_vars;
  if (has_R) {
    for (int i = 0; i < g_count; ++i) {
      for (int c = 0; c < L.N; ++c) {
        for (int r = 0; r < L.M; ++r) {
          prob.add_var((per_node_G ? "R" + std::to_string(i + 1) : std::string("R")) + "(" + std::to_string(r + 1) +
                       "," + std::to_string(c + 1) + ")");
        }
      }
    }
  }
  return L;
}

// Edge LMI
//   [ G_i + G_i' - S_i   *      *    *   ]
//   [ 0                 gI      *    *   ]
//   [ A G_i + B R_i     Bw     S_j   *   ]
//   [ C G_i + D R_i     Dw      0   gI   ]
inline sdp::LmiBlock edge_block(const Layout& L, const EdgeSystem& e, double gamma_fixed, double margin) {
  const int N = L.N;
  const int q = static_cast<int>(e.mode.Bw.cols());
  const int p = static_cast<int>(e.mode.C.rows());
  const int o1 = N, o2 = N + q, o3 = N + q + N;
  sdp::LmiBlock blk;
  blk.name = "edge v" + std::to_string(e.from + 1) + "->v" + std::to_string(e.to + 1) + " label " +
             std::to_string(e.label);
  blk.dim = o3 + p;
  blk.margin = margin;
  const int i = e.from;
  for (int c = 0; c < N; ++c) {
    for (int r = c; r < N; ++r) {
      blk.add(r, c, L.G(i, r, c), 1.0);
      blk.add(r, c, L.G(i, c, r), 1.0);
      blk.add(r, c, L.S(i, r, c), -1.0);
      blk.add(o2 + r, o2 + c, L.S(e.to, r, c), 1.0);
    }
  }
  auto gamma_diag = [&](int off, int size) {
    for (int d = 0; d < size; ++d) {
      if (L.gamma >= 0) {
        blk.add(off + d, off + d, L.gamma, 1.0);
      } else {
        blk.add_constant(off + d, off + d, gamma_fixed);
      }
    }
  };
  gamma_diag(o1, q);
  gamma_diag(o3, p);
  // X G + Y R written into rows `off`, columns 0..N-1.
  auto product = [&](int off, const Matrix& X, const Matrix& Y) {
    for (int r = 0; r < X.rows(); ++r) {
      for (int c = 0; c < N; ++c) {
        for (int k = 0; k < N; ++k) blk.add(off + r, c, L.G(i, k, c), X(r, k));
        if (L.has_R) {
          for (int k = 0; k < L.M; ++k) blk.add(off + r, c, L.R(i, k, c), Y(r, k));
        }
      }
    }
  };
  product(o2, e.mode.A, e.B);
  product(o3, e.mode.C, e.D);
  for (int r = 0; r < N; ++r) {
    for (int c = 0; c < q; ++c) blk.add_constant(o2 + r, o1 + c, e.mode.Bw(r, c));
  }
  for (int r = 0; r < p; ++r) {
    for (int c = 0; c < q; ++c) blk.add_constant(o3 + r, o1 + c, e.mode.Dw(r, c));
  }
  return blk;
}

inline sdp::Problem build_problem(const ConstrainedSystem& sys, bool per_node_G, bool synthesis,
                                  std::optional<double> gamma_fixed, double margin, Layout& layout) {
  sdp::Problem prob;
  layout = make_layout(prob, sys, per_node_G, synthesis, !gamma_fixed.has_value());
  prob.objective = Eigen::VectorXd::Zero(prob.num_vars);
  if (layout.gamma >= 0) prob.objective(layout.gamma) = 1.0;
  for (const EdgeSystem& e : sys.edges) {
    prob.blocks.push_back(edge_block(layout, e, gamma_fixed.value_or(0.0), margin));
  }
  // S_i > 0 for every node, including transient nodes without incoming edges.
  for (int i = 0; i < sys.num_nodes; ++i) {
    sdp::LmiBlock blk;
    blk.name = "S" + std::to_string(i + 1) + " positive";
    blk.dim = layout.N;
    blk.margin = margin;
    for (int c = 0; c < layout.N; ++c) {
      for (int r = c; r < layout.N; ++r) blk.add(r, c, layout.S(i, r, c), 1.0);
    }
    prob.blocks.push_back(std::move(blk));
  }
  return prob;
}

inline void validate_system(const ConstrainedSystem& sys) {
  if (sys.num_nodes <= 0 || sys.state_dim <= 0) throw DimensionMismatch("empty constrained system");
  for (const EdgeSystem& e : sys.edges) {
    const Mode& m = e.mode;
    const bool ok = m.A.rows() == sys.state_dim && m.A.cols() == sys.state_dim && m.Bw.rows() == sys.state_dim &&
                    m.C.cols() == sys.state_dim && m.Dw.rows() == m.C.rows() && m.Dw.cols() == m.Bw.cols() &&
                    e.from >= 0 && e.from < sys.num_nodes && e.to >= 0 && e.to < sys.num_nodes;
    if (!ok) throw DimensionMismatch("edge data inconsistent with the state dimension");
    if (sys.input_dim > 0 && (e.B.rows() != sys.state_dim || e.B.cols() != sys.input_dim ||
                              e.D.rows() != m.C.rows() || e.D.cols() != sys.input_dim)) {
      throw DimensionMismatch("edge input matrices inconsistent");
    }
  }
}

inline Matrix extract_sym(const Eigen::VectorXd& x, const Layout& L, int node) {
  Matrix S(L.N, L.N);
  for (int c = 0; c < L.N; ++c) {
    for (int r = c; r < L.N; ++r) S(r, c) = S(c, r) = x(L.S(node, r, c));
  }
  return S;
}

inline Matrix extract_G(const Eigen::VectorXd& x, const Layout& L, int node) {
  Matrix G(L.N, L.N);
  for (int c = 0; c < L.N; ++c) {
    for (int r = 0; r < L.N; ++r) G(r, c) = x(L.G(node, r, c));
  }
  return G;
}

inline Matrix extract_R(const Eigen::VectorXd& x, const Layout& L, int node) {
  Matrix R(L.M, L.N);
  for (int c = 0; c < L.N; ++c) {
    for (int r = 0; r < L.M; ++r) R(r, c) = x(L.R(node, r, c));
  }
  return R;
}

// Edge LMI of a closed-loop edge at fixed (gamma, S, G), split as M0 + gamma E.
inline Matrix edge_matrix(const EdgeSystem& e, const Matrix& Si, const Matrix& Sj, const Matrix& Gi, double gamma) {
  const int N = static_cast<int>(Si.rows());
  const int q = static_cast<int>(e.mode.Bw.cols());
  const int p = static_cast<int>(e.mode.C.rows());
  const int dim = 2 * N + q + p;
  Matrix M = Matrix::Zero(dim, dim);
  M.topLeftCorner(N, N) = Gi + Gi.transpose() - Si;
  M.block(N, N, q, q) = gamma * Matrix::Identity(q, q);
  M.block(N + q, 0, N, N) = e.mode.A * Gi;
  M.block(N + q, N, N, q) = e.mode.Bw;
  M.block(N + q, N + q, N, N) = Sj;
  M.block(N + q + N, 0, p, N) = e.mode.C * Gi;
  M.block(N + q + N, N, p, q) = e.mode.Dw;
  M.block(N + q + N, N + q + N, p, p) = gamma * Matrix::Identity(p, p);
  return M.selfadjointView<Eigen::Lower>();
}

inline double min_eig(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// Smallest gamma at which every closed-loop edge LMI has minimum eigenvalue
// >= target with (S, G) fixed. Each edge LMI is M0 + gamma E with E >= 0, so
// feasibility is monotone in gamma and bisection applies.
inline std::optional<double> tighten_gamma(const ConstrainedSystem& sys, const std::vector<Matrix>& S,
                                           const std::vector<Matrix>& G, double start, double target) {
  auto ok = [&](double gamma) {
    for (const EdgeSystem& e : sys.edges) {
      const auto i = static_cast<std::size_t>(e.from);
      const auto j = static_cast<std::size_t>(e.to);
      if (min_eig(edge_matrix(e, S[i], S[j], G[i], gamma)) < target) return false;
    }
    return true;
  };
  double hi = std::max(start, 1e-12);
  int grow = 0;
  while (!ok(hi)) {
    hi *= 2.0;
    if (++grow > 60) return std::nullopt;
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

struct RawSolution {
  Eigen::VectorXd x;
  Layout layout;
  double gamma = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  int num_vars = 0;
};

[[noreturn]] inline void throw_status(const sdp::Solution& sol, const std::string& backend) {
  if (sol.status == sdp::Status::Infeasible) {
    throw Infeasible("LMI conditions are infeasible (" + backend + ": " + sol.message + ")");
  }
  throw SolverFailure("SDP backend " + backend + " failed: " + sdp::to_string(sol.status) + " (" + sol.message + ")");
}

inline RawSolution solve(const ConstrainedSystem& sys, bool per_node_G, bool synthesis, double margin,
                         const SolveOptions& opts) {
  const auto backend = opts.backend ? opts.backend : sdp::default_backend();
  RawSolution raw;
  if (!opts.bisection) {
    sdp::Problem prob = build_problem(sys, per_node_G, synthesis, std::nullopt, margin, raw.layout);
    const sdp::Solution sol = backend->solve(prob);
    raw.iterations = sol.iterations;
    raw.seconds = sol.solve_seconds;
    raw.num_vars = prob.num_vars;
    if (sol.status != sdp::Status::Solved) {
      // A stalled or failed minimization can hide infeasibility; at a very
      // large fixed gamma the solver classifies the problem reliably.
      const bool have_x = sol.status == sdp::Status::SolvedInaccurate;
      Layout probe_layout;
      const double probe_gamma = have_x ? std::max(1e6, 10.0 * std::abs(sol.x(raw.layout.gamma))) : 1e6;
      const sdp::Solution probe =
          backend->solve(build_problem(sys, per_node_G, synthesis, probe_gamma, margin, probe_layout));
      raw.iterations += probe.iterations;
      raw.seconds += probe.solve_seconds;
      if (probe.status == sdp::Status::Infeasible) throw_status(probe, backend->name());
      if (!have_x) throw_status(sol, backend->name());
    }
    raw.x = sol.x;
    raw.gamma = sol.x(raw.layout.gamma);
    return raw;
  }
  // Feasibility bisection: find a feasible upper bound, then shrink. Near
  // the optimum the fixed-gamma problems are nearly infeasible, so only clean
  // solves count as feasible.
  auto feasible = [&](double gamma, RawSolution& out) {
    Layout layout;
    sdp::Problem prob = build_problem(sys, per_node_G, synthesis, gamma, margin, layout);
    const sdp::Solution sol = backend->solve(prob);
    out.iterations += sol.iterations;
    out.seconds += sol.solve_seconds;
    if (sol.status == sdp::Status::SolvedInaccurate) return false;
    if (sol.status == sdp::Status::Solved) {
      out.x = sol.x;
      out.layout = layout;
      out.gamma = gamma;
      out.num_vars = prob.num_vars + 1;
      return true;
    }
    if (sol.status == sdp::Status::Infeasible) return false;
    throw_status(sol, backend->name());
  };
  double hi = 1.0;
  int grow = 0;
  while (!feasible(hi, raw)) {
    hi *= 4.0;
    if (++grow > 25) throw Infeasible("no gamma up to " + std::to_string(hi) + " is feasible");
  }
  double lo = 0.0;
  RawSolution trial;
  while (hi - lo > opts.bisection_rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid, trial)) {
      hi = mid;
      trial.iterations = raw.iterations + trial.iterations;
      trial.seconds = raw.seconds + trial.seconds;
      raw = trial;
      trial = RawSolution{};
    } else {
      lo = mid;
    }
  }
  return raw;
}

// Certificate from solver output: re-derives the tightest gamma valid for
// the witnesses (S, G) and checks S_i > 0.
inline AnalysisCertificate certify(const ConstrainedSystem& closed, std::vector<Matrix> S, std::vector<Matrix> G,
                                   const RawSolution& raw, double margin, const std::string& backend) {
  for (std::size_t i = 0; i < S.size(); ++i) {
    if (!(min_eig(S[i]) > 0.0)) {
      throw SolverFailure("solver returned S_" + std::to_string(i + 1) + " that is not positive definite");
    }
  }
  const auto gamma = tighten_gamma(closed, S, G, raw.gamma, 0.5 * margin);
  if (!gamma) throw SolverFailure("solver output does not satisfy the edge LMIs for any gamma");
  AnalysisCertificate cert;
  cert.gamma = *gamma * (1.0 + 1e-9);
  cert.S = std::move(S);
  cert.G = std::move(G);
  cert.solver_gamma = raw.gamma;
  cert.solver_iterations = raw.iterations;
  cert.solve_seconds = raw.seconds;
  cert.decision_variables = raw.num_vars;
  cert.backend = backend;
  double margin_achieved = std::numeric_limits<double>::infinity();
  for (const EdgeSystem& e : closed.edges) {
    const auto i = static_cast<std::size_t>(e.from);
    const auto j = static_cast<std::size_t>(e.to);
    margin_achieved = std::min(margin_achieved, min_eig(edge_matrix(e, cert.S[i], cert.S[j], cert.G[i], cert.gamma)));
  }
  cert.margin = margin_achieved;
  return cert;
}

}  // namespace detail

/// Number of scalar decision variables of the analysis problem (gamma
/// excluded): one symmetric S_i and one full G_i per node.
inline int analysis_variable_count(int num_nodes, int state_dim) {
  return num_nodes * (state_dim * (state_dim + 1) / 2 + state_dim * state_dim);
}

/// Minimizes gamma over the edge LMIs of a closed-loop constrained system.
inline AnalysisCertificate analyze(const ConstrainedSystem& sys, const SolveOptions& opts = {}) {
  detail::validate_system(sys);
  if (sys.input_dim != 0) throw std::invalid_argument("analyze expects a closed-loop system");
  const auto backend = opts.backend ? opts.backend->name() : sdp::default_backend()->name();
  double margin = opts.margin >= 0.0 ? opts.margin : default_margin(sys);
  // The solver residual can exceed the certification slack of margin / 2;
  // a larger margin buys slack at a small cost in gamma.
  for (int attempt = 0;; ++attempt, margin *= 10.0) {
    const detail::RawSolution raw = detail::solve(sys, true, false, margin, opts);
    std::vector<Matrix> S, G;
    for (int i = 0; i < sys.num_nodes; ++i) {
      S.push_back(detail::extract_sym(raw.x, raw.layout, i));
      G.push_back(detail::extract_G(raw.x, raw.layout, i));
    }
    try {
      return detail::certify(sys, std::move(S), std::move(G), raw, margin, backend);
    } catch (const SolverFailure&) {
      if (attempt == 2) throw;
    }
  }
}

inline AnalysisCertificate analyze_nonlifted(const SwitchedClosedLoop& cl, const WhrtGraph& g,
                                             const SolveOptions& opts = {}) {
  return analyze(nonlifted_system(cl, g), opts);
}

inline AnalysisCertificate analyze_lifted(const LiftedFamily& f, const Matrix& K, const WhrtGraph& g,
                                          const SolveOptions& opts = {}) {
  if (!g.lifted()) throw std::invalid_argument("analyze_lifted expects a lifted graph");
  return analyze(lifted_system(f, K, g), opts);
}

/// State-feedback synthesis on the lifted system. The non-switched variant
/// shares G and R across nodes and returns K = R G^-1; the switched variant
/// uses G_i, R_i and returns K_i = R_i G_i^-1.
inline SynthesisResult synthesize(const LiftedFamily& f, const WhrtGraph& g, bool switched,
                                  const SolveOptions& opts = {}) {
  if (!g.lifted()) throw std::invalid_argument("synthesize expects a lifted graph");
  const ConstrainedSystem open = lifted_open_loop(f, g);
  detail::validate_system(open);
  const double margin = opts.margin >= 0.0 ? opts.margin : default_margin(open);
  SolveOptions synth_opts = opts;
  if (opts.synthesis_backend) synth_opts.backend = opts.synthesis_backend;
  if (!synth_opts.backend) synth_opts.backend = sdp::default_backend();
  const detail::RawSolution raw = detail::solve(open, switched, true, margin, synth_opts);

  SynthesisResult res;
  res.switched = switched;
  const int count = switched ? g.num_nodes() : 1;
  std::vector<Matrix> G_nodes, R_nodes, K_nodes;
  for (int i = 0; i < count; ++i) {
    const Matrix G = detail::extract_G(raw.x, raw.layout, i);
    const Matrix R = detail::extract_R(raw.x, raw.layout, i);
    Eigen::JacobiSVD<Matrix> svd(G);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    if (!(cond <= opts.cond_guard)) {
      throw IllConditionedG("G" + (switched ? std::to_string(i + 1) : std::string()) + " has condition number " +
                            std::to_string(cond) + ", K extraction is unreliable");
    }
    G_nodes.push_back(G);
    R_nodes.push_back(R);
    K_nodes.push_back(G.transpose().partialPivLu().solve(R.transpose()).transpose());
  }
  std::vector<Matrix> S, G;
  for (int i = 0; i < g.num_nodes(); ++i) {
    S.push_back(detail::extract_sym(raw.x, raw.layout, i));
    G.push_back(G_nodes[switched ? static_cast<std::size_t>(i) : 0]);
  }
  const ConstrainedSystem closed = lifted_system(f, K_nodes, g);
  const auto backend = synth_opts.backend->name();
  res.synthesis_certificate = detail::certify(closed, std::move(S), std::move(G), raw, margin, backend);
  res.synthesis_gamma = res.synthesis_certificate.gamma;
  res.certificate = res.synthesis_certificate;
  if (opts.reanalyze) {
    // The synthesis witnesses are feasible for the analysis LMIs of the same
    // closed loop, so a successful re-analysis can only tighten gamma.
    try {
      AnalysisCertificate again = analyze(closed, opts);
      if (again.gamma < res.certificate.gamma) res.certificate = std::move(again);
    } catch (const Error&) {
    }
  }
  res.gamma = res.certificate.gamma;
  res.R = std::move(R_nodes);
  if (switched) {
    res.K_nodes = std::move(K_nodes);
  } else {
    res.K = K_nodes.front();
  }
  return res;
}

struct EdgeResidual {
  int from = 0, to = 0, label = 0;
  double min_eigenvalue = 0.0;
};

struct VerificationReport {
  bool pass = false;
  double tol = 0.0;
  std::vector<EdgeResidual> edges;
  std::vector<double> S_min_eigenvalues;
  std::vector<EdgeResidual> failing_edges;
  std::vector<int> failing_nodes;  // nodes whose S_i is not positive definite
  double worst = 0.0;
};

/// Rebuilds every edge LMI of the closed-loop system from the certificate
/// and reports its smallest eigenvalue.
inline VerificationReport verify_certificate(const AnalysisCertificate& cert, const ConstrainedSystem& sys,
                                             double tol_verify = -1.0) {
  VerificationReport rep;
  rep.tol = tol_verify >= 0.0 ? tol_verify : default_tol_verify(cert);
  rep.worst = std::numeric_limits<double>::infinity();
  const bool dims_ok = cert.S.size() == static_cast<std::size_t>(sys.num_nodes) && cert.G.size() == cert.S.size();
  if (!dims_ok) return rep;
  for (std::size_t i = 0; i < cert.S.size(); ++i) {
    const double e = detail::min_eig(cert.S[i]);
    rep.S_min_eigenvalues.push_back(e);
    if (!(e > 0.0)) rep.failing_nodes.push_back(static_cast<int>(i));
  }
  for (const EdgeSystem& e : sys.edges) {
    const auto i = static_cast<std::size_t>(e.from);
    const auto j = static_cast<std::size_t>(e.to);
    const double ev = detail::min_eig(detail::edge_matrix(e, cert.S[i], cert.S[j], cert.G[i], cert.gamma));
    rep.edges.push_back({e.from, e.to, e.label, ev});
    rep.worst = std::min(rep.worst, ev);
    if (!(ev >= -rep.tol)) rep.failing_edges.push_back(rep.edges.back());
  }
  rep.pass = rep.failing_edges.empty() && rep.failing_nodes.empty();
  return rep;
}

/// V = x' S_i^-1 x for node i.
inline double evaluate_lyapunov(const AnalysisCertificate& cert, int node, const Vector& x) {
  if (node < 0 || static_cast<std::size_t>(node) >= cert.S.size()) throw std::out_of_range("node outside certificate");
  const Matrix& S = cert.S[static_cast<std::size_t>(node)];
  if (x.size() != S.rows()) throw DimensionMismatch("state dimension does not match the certificate");
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  const auto& ev = es.eigenvalues();
  if (!(ev(0) > 1e-14 * std::max(1.0, ev(ev.size() - 1)))) {
    throw SingularS("S_" + std::to_string(node + 1) + " is numerically singular");
  }
  const Vector y = es.eigenvectors().transpose() * x;
  return (y.array().square() / ev.array()).sum();
}

inline double evaluate_lyapunov(const AnalysisCertificate& cert, const NodeTracker& tracker, const Vector& x) {
  return evaluate_lyapunov(cert, tracker.current(), x);
}

/// V(x+) - V(x) - gamma w'w + z'z / gamma along edge `e`; negative when the
/// dissipation inequality holds.
inline double dissipation_residual(const AnalysisCertificate& cert, const EdgeSystem& e, const Vector& x,
                                   const Vector& w) {
  const Vector xn = e.mode.A * x + e.mode.Bw * w;
  const Vector z = e.mode.C * x + e.mode.Dw * w;
  return evaluate_lyapunov(cert, e.to, xn) - evaluate_lyapunov(cert, e.from, x) - cert.gamma * w.squaredNorm() +
         z.squaredNorm() / cert.gamma;
}

/// Backend-neutral analysis problem, e.g. for SDPA export.
inline sdp::Problem analysis_problem(const ConstrainedSystem& sys, double margin = -1.0) {
  detail::validate_system(sys);
  detail::Layout layout;
  return detail::build_problem(sys, true, false, std::nullopt, margin >= 0.0 ? margin : default_margin(sys), layout);
}

inline sdp::Problem synthesis_problem(const ConstrainedSystem& open, bool switched, double margin = -1.0) {
  detail::validate_system(open);
  detail::Layout layout;
  return detail::build_problem(open, switched, true, std::nullopt, margin >= 0.0 ? margin : default_margin(open),
                               layout);
}

}  // namespace whrt
