#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "whrt/constraints.hpp"
#include "whrt/errors.hpp"
#include "whrt/graph.hpp"
#include "whrt/systems.hpp"

namespace whrt {

/// State feedback u^c_k = K x_k, either one fixed gain or one gain per node
/// of a lifted graph (the node reached after the blocks completed so far).
struct Controller {
  std::vector<Matrix> gains;
  std::shared_ptr<const WhrtGraph> lifted;

  static Controller fixed(Matrix K) { return Controller{{std::move(K)}, nullptr}; }
  static Controller switched(std::vector<Matrix> gains, WhrtGraph lifted_graph) {
    if (!lifted_graph.lifted() || !lifted_graph.deterministic()) {
      throw std::invalid_argument("switched controller needs a deterministic lifted graph");
    }
    if (gains.size() != static_cast<std::size_t>(lifted_graph.num_nodes())) {
      throw DimensionMismatch("switched controller needs one gain per lifted node");
    }
    return Controller{std::move(gains), std::make_shared<const WhrtGraph>(std::move(lifted_graph))};
  }

  bool is_switched() const { return lifted != nullptr; }

  /// Index into `gains` used at every step of `mu` (meaningful at successes).
  std::vector<int> schedule(std::span<const int> mu) const {
    std::vector<int> out(mu.size(), 0);
    if (!is_switched()) return out;
    int node = lifted->initial_nodes().front();
    int losses = -1;  // -1 until the first success
    for (std::size_t k = 0; k < mu.size(); ++k) {
      if (mu[k] != 0) {
        if (losses >= 0) {
          const int next = lifted->successor(node, losses);
          if (next < 0) {
            throw InadmissibleLabel("loss run of " + std::to_string(losses) + " at k=" + std::to_string(k) +
                                    " is not admissible for the switched controller's graph");
          }
          node = next;
        }
        losses = 0;
      } else if (losses >= 0) {
        ++losses;
      }
      out[k] = node;
    }
    return out;
  }
};

/// Trajectory of Eqs. (1)-(4): x has horizon + 1 entries, the other
/// signals one per step k = 0..horizon-1.
struct SimulationTrace {
  std::vector<Vector> x;
  std::vector<Vector> u_a;
  std::vector<Vector> w;
  std::vector<Vector> z;
  LossSequence mu;
  int horizon = 0;

  double input_energy() const {
    double e = 0.0;
    for (const Vector& v : w) e += v.squaredNorm();
    return e;
  }
  double output_energy() const {
    double e = 0.0;
    for (const Vector& v : z) e += v.squaredNorm();
    return e;
  }
};

/// Exact forward recursion of plant, controller and loss strategy. The
/// horizon is the length of `w`; `mu` must be at least that long and start
/// with a success.
inline SimulationTrace simulate(const Plant& p, const Controller& ctrl, const Strategy& strat,
                                std::span<const int> mu, const std::vector<Vector>& w, const Vector& x0 = {}) {
  p.validate();
  for (const Matrix& K : ctrl.gains) check_gain(p, K);
  if (ctrl.gains.empty()) throw DimensionMismatch("controller has no gain");
  const auto H = w.size();
  if (mu.size() < H) throw DimensionMismatch("loss sequence shorter than the disturbance");
  if (H > 0 && mu[0] != 1) throw InvalidFirstAttempt("the first control attempt must succeed (mu[0] = 1)");
  const auto sched = ctrl.schedule(mu.first(H));

  SimulationTrace tr;
  tr.horizon = static_cast<int>(H);
  tr.mu.assign(mu.begin(), mu.begin() + static_cast<std::ptrdiff_t>(H));
  Vector x = x0.size() == 0 ? Vector::Zero(p.n()) : x0;
  if (x.size() != p.n()) throw DimensionMismatch("x0 has the wrong dimension");
  Vector u_prev = strat.initial_input.size() == 0 ? Vector::Zero(p.m()) : strat.initial_input;
  if (u_prev.size() != p.m()) throw DimensionMismatch("initial hold input has the wrong dimension");
  tr.x.reserve(H + 1);
  tr.x.push_back(x);
  for (std::size_t k = 0; k < H; ++k) {
    if (w[k].size() != p.q()) throw DimensionMismatch("w_" + std::to_string(k) + " has the wrong dimension");
    Vector ua;
    if (mu[k] != 0) {
      ua = ctrl.gains[static_cast<std::size_t>(sched[k])] * x;
    } else if (strat.kind == LossStrategy::Hold) {
      ua = u_prev;
    } else {
      ua = Vector::Zero(p.m());
    }
    const Vector z = p.C * x + p.D * ua + p.Dw * w[k];
    x = p.A * x + p.B * ua + p.Bw * w[k];
    u_prev = ua;
    tr.u_a.push_back(ua);
    tr.w.push_back(w[k]);
    tr.z.push_back(z);
    tr.x.push_back(x);
  }
  return tr;
}

inline SimulationTrace simulate(const Plant& p, const Matrix& K, const Strategy& strat, std::span<const int> mu,
                                const std::vector<Vector>& w, const Vector& x0 = {}) {
  return simulate(p, Controller::fixed(K), strat, mu, w, x0);
}

/// max over traces of sqrt(sum z'z / sum w'w); a lower bound on the l2 gain.
inline double empirical_gain(const std::vector<SimulationTrace>& traces) {
  double best = 0.0;
  for (const SimulationTrace& tr : traces) {
    const double ew = tr.input_energy();
    if (!(ew > 0.0)) throw ZeroDisturbance("a trace has zero disturbance energy; its gain is undefined");
    if (!tr.x.empty() && tr.x.front().squaredNorm() != 0.0) {
      throw std::invalid_argument("empirical_gain requires traces starting at x0 = 0");
    }
    best = std::max(best, std::sqrt(tr.output_energy() / ew));
  }
  return best;
}

inline double empirical_gain(const SimulationTrace& tr) { return empirical_gain(std::vector<SimulationTrace>{tr}); }

/// `pattern` repeated to `length` entries.
inline LossSequence periodic(std::span<const int> pattern, std::size_t length) {
  if (pattern.empty()) throw ParseError("empty periodic pattern");
  LossSequence mu(length);
  for (std::size_t k = 0; k < length; ++k) mu[k] = pattern[k % pattern.size()];
  return mu;
}

/// Finite-support step: w_k = amplitude for k < T, zero for T <= k < horizon.
inline std::vector<Vector> step_disturbance(int q, int T, int horizon, double amplitude = 1.0) {
  std::vector<Vector> w(static_cast<std::size_t>(horizon), Vector::Zero(q));
  for (int k = 0; k < std::min(T, horizon); ++k) w[static_cast<std::size_t>(k)].setConstant(amplitude);
  return w;
}

/// Uniform random walk on build_graph(c): the first step takes a 1-edge out
/// of an initial node chosen at random, later steps pick any outgoing edge.
inline LossSequence random_admissible(const WhrtConstraint& c, int length, std::uint64_t seed) {
  if (length < 1) throw std::invalid_argument("length must be at least 1");
  const WhrtGraph g = build_graph(c);
  std::mt19937_64 rng(seed);
  std::vector<Edge> starts;
  for (int v : g.initial_nodes()) {
    for (const Edge& e : g.out_edges(v)) {
      if (e.label == 1) starts.push_back(e);
    }
  }
  if (starts.empty()) throw InfeasibleConstraint("no admissible sequence starts with a success");
  LossSequence mu;
  mu.reserve(static_cast<std::size_t>(length));
  const Edge first = starts[std::uniform_int_distribution<std::size_t>(0, starts.size() - 1)(rng)];
  mu.push_back(1);
  int node = first.to;
  while (static_cast<int>(mu.size()) < length) {
    const auto out = g.out_edges(node);
    const Edge& e = out[std::uniform_int_distribution<std::size_t>(0, out.size() - 1)(rng)];
    mu.push_back(e.label);
    node = e.to;
  }
  return mu;
}

/// Per-step closed-loop modes along `mu` (state [x] for zero, [x; u_prev]
/// for hold), used by the input-output operator below.
inline std::vector<Mode> closed_loop_modes(const Plant& p, const Controller& ctrl, const Strategy& strat,
                                           std::span<const int> mu) {
  std::vector<SwitchedClosedLoop> loops;
  for (const Matrix& K : ctrl.gains) loops.push_back(closed_loop(p, K, strat));
  const auto sched = ctrl.schedule(mu);
  std::vector<Mode> modes;
  modes.reserve(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) modes.push_back(loops[static_cast<std::size_t>(sched[k])].mode(mu[k] != 0 ? 1 : 0));
  return modes;
}

namespace detail {

// z = T w for the time-varying system with zero initial state.
inline std::vector<Vector> apply_operator(const std::vector<Mode>& modes, const std::vector<Vector>& w) {
  Vector xi = Vector::Zero(modes.front().A.rows());
  std::vector<Vector> z(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    z[k] = modes[k].C * xi + modes[k].Dw * w[k];
    xi = modes[k].A * xi + modes[k].Bw * w[k];
  }
  return z;
}

// w = T' y by the backward adjoint recursion.
inline std::vector<Vector> apply_adjoint(const std::vector<Mode>& modes, const std::vector<Vector>& y) {
  Vector lambda = Vector::Zero(modes.front().A.rows());
  std::vector<Vector> w(y.size());
  for (std::size_t k = y.size(); k-- > 0;) {
    w[k] = modes[k].Bw.transpose() * lambda + modes[k].Dw.transpose() * y[k];
    lambda = modes[k].A.transpose() * lambda + modes[k].C.transpose() * y[k];
  }
  return w;
}

inline double energy(const std::vector<Vector>& s) {
  double e = 0.0;
  for (const Vector& v : s) e += v.squaredNorm();
  return e;
}

}  // namespace detail

struct PowerIterationResult {
  std::vector<Vector> w;
  double gain = 0.0;
  std::vector<double> history;  // ratio after each iteration
};

/// Largest finite-horizon gain over w for a fixed loss sequence, by power
/// iteration on T'T. The ratio of the returned w is exact for that input.
inline PowerIterationResult maximize_disturbance(const Plant& p, const Controller& ctrl, const Strategy& strat,
                                                 std::span<const int> mu, int horizon, int iterations = 300,
                                                 double rel_tol = 1e-12) {
  if (horizon < 1 || static_cast<int>(mu.size()) < horizon) throw DimensionMismatch("mu shorter than the horizon");
  const auto modes = closed_loop_modes(p, ctrl, strat, mu.first(static_cast<std::size_t>(horizon)));
  PowerIterationResult res;
  std::vector<Vector> w(static_cast<std::size_t>(horizon), Vector::Ones(p.q()));
  double norm = std::sqrt(detail::energy(w));
  for (Vector& v : w) v /= norm;
  for (int it = 0; it < iterations; ++it) {
    const auto z = detail::apply_operator(modes, w);
    const double ratio = std::sqrt(detail::energy(z));
    res.history.push_back(ratio);
    if (ratio >= res.gain) {
      res.gain = ratio;
      res.w = w;
    }
    auto next = detail::apply_adjoint(modes, z);
    norm = std::sqrt(detail::energy(next));
    if (!(norm > 0.0)) break;
    for (Vector& v : next) v /= norm;
    w = std::move(next);
    if (it > 0 && std::abs(res.history[static_cast<std::size_t>(it)] - res.history[static_cast<std::size_t>(it) - 1]) <=
                      rel_tol * res.gain) {
      break;
    }
  }
  return res;
}

struct WorstCaseResult {
  LossSequence mu;
  std::vector<Vector> w;
  double gain = 0.0;  // achieved ratio, a lower bound on the l2 gain
  int candidates = 0;
  bool budget_exhausted = false;
  std::vector<LossSequence> evaluated;  // candidate loss sequences in evaluation order
};

namespace detail {

// Loss sequence spelled by a lifted path starting right after the success
// at k = 0: each label a contributes a losses and one success.
inline LossSequence expand_lifted(std::span<const int> labels) {
  LossSequence mu{1};
  for (int a : labels) {
    mu.insert(mu.end(), static_cast<std::size_t>(a), 0);
    mu.push_back(1);
  }
  return mu;
}

// Shortest label path from `from` to `to` (breadth-first, label order).
inline std::optional<std::vector<int>> shortest_labels(const WhrtGraph& g, int from, int to) {
  std::vector<int> prev(static_cast<std::size_t>(g.num_nodes()), -2);
  std::vector<int> prev_label(static_cast<std::size_t>(g.num_nodes()), -1);
  std::deque<int> queue{from};
  prev[static_cast<std::size_t>(from)] = -1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    if (v == to) break;
    for (const Edge& e : g.out_edges(v)) {
      if (prev[static_cast<std::size_t>(e.to)] == -2) {
        prev[static_cast<std::size_t>(e.to)] = v;
        prev_label[static_cast<std::size_t>(e.to)] = e.label;
        queue.push_back(e.to);
      }
    }
  }
  if (prev[static_cast<std::size_t>(to)] == -2) return std::nullopt;
  std::vector<int> labels;
  for (int v = to; v != from; v = prev[static_cast<std::size_t>(v)]) labels.push_back(prev_label[static_cast<std::size_t>(v)]);
  std::reverse(labels.begin(), labels.end());
  return labels;
}

// Simple cycles (start node = smallest node on the cycle) whose weight is at
// most `max_weight`, in depth-first label order; stops after `limit`.
// Returns true when the enumeration finished before the limit.
inline bool simple_cycles(const WhrtGraph& g, int max_weight, std::size_t limit,
                          const std::function<int(int)>& weight,
                          std::vector<std::pair<int, std::vector<int>>>& out) {
  std::vector<char> on_path(static_cast<std::size_t>(g.num_nodes()), 0);
  std::vector<int> labels;
  bool complete = true;
  std::function<void(int, int, int)> dfs = [&](int start, int v, int w) {
    for (const Edge& e : g.out_edges(v)) {
      if (!complete) return;
      const int nw = w + weight(e.label);
      if (nw > max_weight || e.to < start) continue;
      labels.push_back(e.label);
      if (e.to == start) {
        if (out.size() >= limit) {
          complete = false;
        } else {
          out.emplace_back(start, labels);
        }
      } else if (!on_path[static_cast<std::size_t>(e.to)]) {
        on_path[static_cast<std::size_t>(e.to)] = 1;
        dfs(start, e.to, nw);
        on_path[static_cast<std::size_t>(e.to)] = 0;
      }
      labels.pop_back();
    }
  };
  for (int s = 0; s < g.num_nodes() && complete; ++s) {
    on_path[static_cast<std::size_t>(s)] = 1;
    dfs(s, s, 0);
    on_path[static_cast<std::size_t>(s)] = 0;
  }
  return complete;
}

}  // namespace detail

/// Periodic loss sequences from simple cycles of the lifted graph (loss
/// length of one period at most 3s), each reached by a shortest prefix from
/// the initial node. Constraints without a lifted graph use cycles of the
/// window automaton instead. The all-success sequence comes first.
inline std::vector<LossSequence> candidate_sequences(const WhrtConstraint& c, int horizon, int budget,
                                                     bool* exhausted = nullptr) {
  std::vector<LossSequence> out;
  auto add = [&](LossSequence mu) {
    mu.resize(static_cast<std::size_t>(horizon));
    if (satisfies(mu, c) && std::find(out.begin(), out.end(), mu) == out.end()) out.push_back(std::move(mu));
  };
  add(LossSequence(static_cast<std::size_t>(horizon), 1));
  const auto limit = static_cast<std::size_t>(std::max(budget, 1));
  std::vector<std::pair<int, std::vector<int>>> cycles;
  bool complete = true;
  std::optional<WhrtGraph> lifted;
  try {
    lifted = build_lifted_graph(c);
  } catch (const UnboundedLosses&) {
  }
  if (lifted) {
    complete = detail::simple_cycles(*lifted, 3 * c.s, limit, [](int a) { return a + 1; }, cycles);
    const int init = lifted->initial_nodes().front();
    for (const auto& [start, labels] : cycles) {
      if (out.size() >= limit) break;
      const auto prefix = detail::shortest_labels(*lifted, init, start);
      if (!prefix) continue;
      std::vector<int> path = *prefix;
      while (static_cast<int>(detail::expand_lifted(path).size()) < horizon) path.insert(path.end(), labels.begin(), labels.end());
      add(detail::expand_lifted(path));
    }
  } else {
    const WhrtGraph w = build_window_graph(c);
    complete = detail::simple_cycles(w, 3 * c.s, limit, [](int) { return 1; }, cycles);
    const int after_first = w.successor(w.initial_nodes().front(), 1);
    for (const auto& [start, labels] : cycles) {
      if (out.size() >= limit || after_first < 0) break;
      const auto prefix = detail::shortest_labels(w, after_first, start);
      if (!prefix) continue;
      LossSequence mu{1};
      mu.insert(mu.end(), prefix->begin(), prefix->end());
      while (static_cast<int>(mu.size()) < horizon) mu.insert(mu.end(), labels.begin(), labels.end());
      add(std::move(mu));
    }
  }
  if (out.size() > limit) out.resize(limit);
  if (exhausted) *exhausted = !complete || out.size() >= limit;
  return out;
}

/// Evaluates up to `budget` candidate loss sequences; for each, maximizes
/// the finite-horizon gain over w by power iteration. When the cycle
/// enumeration finishes under budget, the remaining budget goes to random
/// admissible sequences. Ties keep the lexicographically smallest mu.
inline WorstCaseResult worst_case_search(const Plant& p, const Controller& ctrl, const Strategy& strat,
                                         const WhrtConstraint& c, int horizon, int budget,
                                         std::uint64_t seed = 1) {
  if (budget < 1) throw std::invalid_argument("budget must be at least 1");
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  WorstCaseResult res;
  bool exhausted = false;
  auto candidates = candidate_sequences(c, horizon, budget, &exhausted);
  for (std::uint64_t i = 0; static_cast<int>(candidates.size()) < budget && i < static_cast<std::uint64_t>(budget); ++i) {
    LossSequence mu = random_admissible(c, horizon, seed + i);
    if (std::find(candidates.begin(), candidates.end(), mu) == candidates.end()) candidates.push_back(std::move(mu));
  }
  res.budget_exhausted = exhausted;
  for (const LossSequence& mu : candidates) {
    const auto pi = maximize_disturbance(p, ctrl, strat, mu, horizon);
    ++res.candidates;
    res.evaluated.push_back(mu);
    if (pi.gain > res.gain || (pi.gain == res.gain && (res.mu.empty() || mu < res.mu))) {
      res.gain = pi.gain;
      res.mu = mu;
      res.w = pi.w;
    }
  }
  return res;
}

inline WorstCaseResult worst_case_search(const Plant& p, const Matrix& K, const Strategy& strat,
                                         const WhrtConstraint& c, int horizon, int budget) {
  return worst_case_search(p, Controller::fixed(K), strat, c, horizon, budget);
}

struct StepSweepResult {
  double gain = 0.0;
  int best_T = 0;
  SimulationTrace trace;  // trace achieving `gain`
};

/// Sweeps finite-support step disturbances w_k = 1 for k < T over
/// T = 1..T_max with mu = `pattern` repeated. Each run continues until the
/// plant state decays below 1e-9 of its peak (at most `max_tail` extra
/// steps), so the truncated output energy misses only a negligible tail.
inline StepSweepResult step_sweep(const Plant& p, const Controller& ctrl, const Strategy& strat,
                                  std::span<const int> pattern, int T_max, int max_tail = 5000) {
  StepSweepResult best;
  for (int T = 1; T <= T_max; ++T) {
    int horizon = T + 200;
    SimulationTrace tr;
    while (true) {
      const LossSequence mu = periodic(pattern, static_cast<std::size_t>(horizon));
      tr = simulate(p, ctrl, strat, mu, step_disturbance(p.q(), T, horizon));
      double peak = 0.0;
      for (const Vector& x : tr.x) peak = std::max(peak, x.norm());
      if (tr.x.back().norm() <= 1e-9 * peak || horizon >= T + max_tail) break;
      horizon = std::min(2 * horizon, T + max_tail);
    }
    const double g = empirical_gain(tr);
    if (g > best.gain) {
      best.gain = g;
      best.best_T = T;
      best.trace = std::move(tr);
    }
  }
  return best;
}

/// CSV with header k,mu_k,x_1..x_n,u_a_1..u_a_m,w_1..w_q,z_1..z_p; one row
/// per step, x_k being the state at the start of step k.
inline void write_csv(std::ostream& os, const SimulationTrace& tr) {
  if (tr.horizon == 0) {
    os << "k,mu_k\n";
    return;
  }
  const auto n = tr.x.front().size();
  const auto m = tr.u_a.front().size();
  const auto q = tr.w.front().size();
  const auto p = tr.z.front().size();
  os << "k,mu_k";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x_" << i + 1;
  for (Eigen::Index i = 0; i < m; ++i) os << ",u_a_" << i + 1;
  for (Eigen::Index i = 0; i < q; ++i) os << ",w_" << i + 1;
  for (Eigen::Index i = 0; i < p; ++i) os << ",z_" << i + 1;
  os << "\n";
  const auto old_precision = os.precision(17);
  for (int k = 0; k < tr.horizon; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    os << k << ',' << tr.mu[kk];
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << tr.x[kk](i);
    for (Eigen::Index i = 0; i < m; ++i) os << ',' << tr.u_a[kk](i);
    for (Eigen::Index i = 0; i < q; ++i) os << ',' << tr.w[kk](i);
    for (Eigen::Index i = 0; i < p; ++i) os << ',' << tr.z[kk](i);
    os << "\n";
  }
  os.precision(old_precision);
}

}  // namespace whrt
