#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "scs.h"
#include "whrt_clarabel.h"

namespace whrt::sdp {

/// Coefficient of decision variable `var` (or the constant when var < 0) at
/// entry (row, col) of a symmetric block. Only the lower triangle is stored;
/// repeated terms add up.
struct Term {
  int row = 0;
  int col = 0;
  int var = -1;
  double coef = 0.0;
};

/// Constraint  sum_k x_k F_k + F_0  >=  margin * I  on a dim x dim block.
struct LmiBlock {
  std::string name;
  int dim = 0;
  double margin = 0.0;
  std::vector<Term> terms;

  void add(int row, int col, int var, double coef) {
    if (coef == 0.0) return;
    if (row < col) std::swap(row, col);
    terms.push_back({row, col, var, coef});
  }
  void add_constant(int row, int col, double value) { add(row, col, -1, value); }

  /// Dense evaluation at x, both triangles filled.
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
    for (const Term& t : terms) {
      const double v = t.var < 0 ? t.coef : t.coef * x(t.var);
      M(t.row, t.col) += v;
      if (t.row != t.col) M(t.col, t.row) += v;
    }
    return M;
  }
};

/// Linear objective over scalar decision variables subject to LMI blocks.
struct Problem {
  int num_vars = 0;
  std::vector<std::string> var_names;
  Eigen::VectorXd objective;  // minimize objective' x
  std::vector<LmiBlock> blocks;

  int add_var(std::string name) {
    var_names.push_back(std::move(name));
    return num_vars++;
  }
};

enum class Status { Solved, SolvedInaccurate, Infeasible, Unbounded, Failure };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::Solved:
      return "solved";
    case Status::SolvedInaccurate:
      return "solved (inaccurate)";
    case Status::Infeasible:
      return "infeasible";
    case Status::Unbounded:
      return "unbounded";
    case Status::Failure:
      return "failure";
  }
  return "?";
}

struct Solution {
  Status status = Status::Failure;
  Eigen::VectorXd x;
  double objective = NAN;
  int iterations = 0;
  double solve_seconds = 0.0;
  std::string message;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual Solution solve(const Problem& problem) const = 0;
};

struct ScsOptions {
  double eps_abs = 1e-7;
  double eps_rel = 1e-7;
  double eps_infeas = 1e-9;
  int max_iters = 100000;
  double time_limit_secs = 120.0;
  double scale = 0.1;             // initial dual scale, adapted by SCS
  int acceleration_lookback = 10;  // Anderson acceleration memory, 0 disables
  bool verbose = false;
};

namespace detail {

// Position of (row, col), row >= col, in the column-major lower-triangle
// vectorization of a dim x dim block.
inline int svec_index(int dim, int row, int col) { return col * dim - col * (col - 1) / 2 + (row - col); }

// Same for the column-major upper-triangle vectorization, where (row, col)
// is stored as its mirror (col, row).
inline int svec_index_upper(int /*dim*/, int row, int col) { return row * (row + 1) / 2 + col; }

// Standard conic form  min c'x  s.t.  b - A x in PSD_1 x ... x PSD_k,  each
// cone holding svec(F_0 - margin I - sum_k x_k F_k) with off-diagonals
// scaled by sqrt(2). A is in CSC form with sorted row indices.
struct ConicData {
  int m = 0;
  int n = 0;
  std::vector<double> Ax;
  std::vector<int> Ai;
  std::vector<int> Ap{0};
  std::vector<double> b;
  std::vector<double> c;
  std::vector<int> cone_dims;
};

template <class Index>
ConicData conic_form(const Problem& problem, Index&& index) {
  ConicData d;
  d.n = problem.num_vars;
  std::vector<int> offsets;
  for (const LmiBlock& blk : problem.blocks) {
    offsets.push_back(d.m);
    d.cone_dims.push_back(blk.dim);
    d.m += blk.dim * (blk.dim + 1) / 2;
  }
  const double sqrt2 = std::sqrt(2.0);
  d.b.assign(static_cast<std::size_t>(d.m), 0.0);
  // Column-wise triplets accumulated in maps to merge duplicates.
  std::vector<std::map<int, double>> cols(static_cast<std::size_t>(d.n));
  for (std::size_t bi = 0; bi < problem.blocks.size(); ++bi) {
    const LmiBlock& blk = problem.blocks[bi];
    for (int k = 0; k < blk.dim; ++k) d.b[static_cast<std::size_t>(offsets[bi] + index(blk.dim, k, k))] -= blk.margin;
    for (const Term& t : blk.terms) {
      const int row = offsets[bi] + index(blk.dim, t.row, t.col);
      const double scale = t.row == t.col ? 1.0 : sqrt2;
      if (t.var < 0) {
        d.b[static_cast<std::size_t>(row)] += scale * t.coef;
      } else {
        cols[static_cast<std::size_t>(t.var)][row] -= scale * t.coef;
      }
    }
  }
  for (const auto& col : cols) {
    for (const auto& [row, value] : col) {
      if (value == 0.0) continue;
      d.Ai.push_back(row);
      d.Ax.push_back(value);
    }
    d.Ap.push_back(static_cast<int>(d.Ai.size()));
  }
  d.c.assign(static_cast<std::size_t>(d.n), 0.0);
  for (int k = 0; k < d.n && k < problem.objective.size(); ++k) d.c[static_cast<std::size_t>(k)] = problem.objective(k);
  return d;
}

}  // namespace detail

/// Adapter for the SCS splitting conic solver.
class ScsBackend final : public Backend {
 public:
  explicit ScsBackend(ScsOptions options = {}) : options_(options) {}

  std::string name() const override { return "scs"; }

  Solution solve(const Problem& problem) const override {
    detail::ConicData d = detail::conic_form(problem, detail::svec_index);
    const int n = d.n;
    const int m = d.m;
    std::vector<scs_int> Ai(d.Ai.begin(), d.Ai.end()), Ap(d.Ap.begin(), d.Ap.end());
    std::vector<scs_int> cone_sizes(d.cone_dims.begin(), d.cone_dims.end());
    ScsMatrix A{d.Ax.data(), Ai.data(), Ap.data(), m, n};
    ScsData data{m, n, &A, nullptr, d.b.data(), d.c.data()};
    ScsCone cone{};
    cone.s = cone_sizes.data();
    cone.ssize = static_cast<scs_int>(cone_sizes.size());
    ScsSettings settings{};
    scs_set_default_settings(&settings);
    settings.eps_abs = options_.eps_abs;
    settings.eps_rel = options_.eps_rel;
    settings.eps_infeas = options_.eps_infeas;
    settings.max_iters = options_.max_iters;
    settings.time_limit_secs = options_.time_limit_secs;
    settings.scale = options_.scale;
    settings.acceleration_lookback = options_.acceleration_lookback;
    settings.verbose = options_.verbose ? 1 : 0;

    std::vector<scs_float> x(static_cast<std::size_t>(n), 0.0), y(static_cast<std::size_t>(m), 0.0),
        s(static_cast<std::size_t>(m), 0.0);
    ScsSolution sol{x.data(), y.data(), s.data()};
    ScsInfo info{};
    const scs_int flag = scs(&data, &cone, &settings, &sol, &info);

    Solution out;
    out.iterations = static_cast<int>(info.iter);
    out.solve_seconds = (info.setup_time + info.solve_time) / 1000.0;
    out.message = info.status;
    switch (flag) {
      case SCS_SOLVED:
        out.status = Status::Solved;
        break;
      case SCS_SOLVED_INACCURATE:
        out.status = Status::SolvedInaccurate;
        break;
      case SCS_INFEASIBLE:
      case SCS_INFEASIBLE_INACCURATE:
        out.status = Status::Infeasible;
        break;
      case SCS_UNBOUNDED:
      case SCS_UNBOUNDED_INACCURATE:
        out.status = Status::Unbounded;
        break;
      default:
        out.status = Status::Failure;
    }
    if (out.status == Status::Solved || out.status == Status::SolvedInaccurate) {
      out.x = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
      out.objective = info.pobj;
    }
    return out;
  }

 private:
  ScsOptions options_;
};

struct ClarabelOptions {
  int max_iter = 200;
  double time_limit_secs = 120.0;
  double tol_gap_abs = 1e-8;
  double tol_gap_rel = 1e-8;
  double tol_feas = 1e-8;
  bool verbose = false;
};

/// Adapter for the Clarabel interior-point solver.
class ClarabelBackend final : public Backend {
 public:
  explicit ClarabelBackend(ClarabelOptions options = {}) : options_(options) {}

  std::string name() const override { return "clarabel"; }

  Solution solve(const Problem& problem) const override {
    const detail::ConicData d = detail::conic_form(problem, detail::svec_index_upper);
    std::vector<std::size_t> Ap(d.Ap.begin(), d.Ap.end()), Ai(d.Ai.begin(), d.Ai.end());
    std::vector<std::size_t> dims(d.cone_dims.begin(), d.cone_dims.end());
    const WhrtClarabelSettings settings{static_cast<std::uint32_t>(options_.max_iter), options_.time_limit_secs,
                                        options_.tol_gap_abs, options_.tol_gap_rel, options_.tol_feas,
                                        options_.verbose ? 1 : 0};
    std::vector<double> x(static_cast<std::size_t>(d.n), 0.0);
    WhrtClarabelResult res{};
    whrt_clarabel_solve(static_cast<std::size_t>(d.m), static_cast<std::size_t>(d.n), Ap.data(), Ai.data(),
                        d.Ax.data(), d.b.data(), d.c.data(), dims.size(), dims.data(), &settings, x.data(), &res);
    Solution out;
    out.iterations = static_cast<int>(res.iterations);
    out.solve_seconds = res.solve_seconds;
    switch (res.status) {
      case 0:
        out.status = Status::Solved;
        out.message = "solved";
        break;
      case 1:
        out.status = Status::SolvedInaccurate;
        out.message = "almost solved";
        break;
      case 2:
        out.status = Status::Infeasible;
        out.message = "primal infeasible";
        break;
      case 3:
        out.status = Status::Unbounded;
        out.message = "dual infeasible";
        break;
      case 4:
        out.status = Status::Failure;
        out.message = "iteration or time limit";
        break;
      default:
        out.status = Status::Failure;
        out.message = res.status == 6 ? "invalid problem data" : "numerical error";
    }
    if (out.status == Status::Solved || out.status == Status::SolvedInaccurate) {
      out.x = Eigen::Map<const Eigen::VectorXd>(x.data(), d.n);
      out.objective = res.objective;
    }
    return out;
  }

 private:
  ClarabelOptions options_;
};

/// Backend used when none is given.
inline std::shared_ptr<const Backend> default_backend() { return std::make_shared<ClarabelBackend>(); }

/// SDPA sparse format ("dat-s"). SDPA's primal form is
///   min c'x  s.t.  sum_k x_k F_k - F_0 >= 0,
/// so F_0 is written as -(constant part - margin I).
inline std::string to_sdpa(const Problem& problem) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "\"whrt LMI problem: " << problem.num_vars << " variables, " << problem.blocks.size() << " blocks\n";
  os << problem.num_vars << "\n" << problem.blocks.size() << "\n";
  for (std::size_t i = 0; i < problem.blocks.size(); ++i) os << (i ? " " : "") << problem.blocks[i].dim;
  os << "\n";
  for (int k = 0; k < problem.num_vars; ++k) os << (k ? " " : "") << (k < problem.objective.size() ? problem.objective(k) : 0.0);
  os << "\n";
  for (std::size_t bi = 0; bi < problem.blocks.size(); ++bi) {
    const LmiBlock& blk = problem.blocks[bi];
    std::map<std::tuple<int, int, int>, double> merged;  // (matno, i, j) upper triangle, 1-based
    for (const Term& t : blk.terms) {
      const int matno = t.var < 0 ? 0 : t.var + 1;
      const double v = t.var < 0 ? -t.coef : t.coef;
      merged[{matno, t.col + 1, t.row + 1}] += v;
    }
    for (int d = 0; d < blk.dim; ++d) merged[{0, d + 1, d + 1}] += blk.margin;
    for (const auto& [key, value] : merged) {
      if (value == 0.0) continue;
      const auto [matno, i, j] = key;
      os << matno << ' ' << bi + 1 << ' ' << i << ' ' << j << ' ' << value << "\n";
    }
  }
  return os.str();
}

}  // namespace whrt::sdp
