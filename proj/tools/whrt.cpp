// Command-line front end: graph, analyze, synthesize, simulate, check.
//
// Exit codes: 0 success, 1 negative check result, 2 usage or parse error,
// 3 infeasible LMIs, 4 solver failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "whrt/constraints.hpp"
#include "whrt/graph.hpp"
#include "whrt/io.hpp"
#include "whrt/lmi.hpp"
#include "whrt/sim.hpp"
#include "whrt/systems.hpp"

namespace {

using namespace whrt;

enum Exit { kOk = 0, kNegative = 1, kUsage = 2, kInfeasible = 3, kBackend = 4 };

// Four significant digits, trailing zeros kept.
std::string sig4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.4g", v);
  std::string s = buf;
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

std::string format_matrix(const Matrix& M) {
  std::string out = "[";
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    if (r) out += "; ";
    for (Eigen::Index c = 0; c < M.cols(); ++c) out += (c ? ", " : "") + sig4(M(r, c));
  }
  return out + "]";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void timing_line(double s) {
  // Excluded from output comparisons: wall time varies between runs.
  std::printf("# time_s=%.3f (non-deterministic)\n", s);
}

WhrtConstraint resolve_constraint(const std::string& text, const std::optional<RunConfig>& cfg) {
  if (!text.empty()) return parse_constraint(text);
  if (cfg && cfg->constraint) return *cfg->constraint;
  throw ParseError("no constraint given (use --constraint or set 'constraint' in the config)");
}

// ---- graph -----------------------------------------------------------------

struct GraphArgs {
  std::string constraint;
  std::string config;
  bool lifted = false;
  bool stats = false;
  std::string dot_out;
  std::string text_out;
};

int cmd_graph(const GraphArgs& a) {
  std::optional<RunConfig> cfg;
  if (!a.config.empty()) cfg = load_config(a.config);
  const WhrtConstraint c = resolve_constraint(a.constraint, cfg);
  WhrtGraph g;
  try {
    g = a.lifted ? build_lifted_graph(c) : build_graph(c);
  } catch (const UnboundedLosses& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  if (!a.dot_out.empty()) write_atomic(a.dot_out, export_dot(g));
  if (!a.text_out.empty()) write_atomic(a.text_out, dump_text(g));
  if (a.stats || (a.dot_out.empty() && a.text_out.empty())) {
    std::printf("nodes=%d edges=%d\n", g.num_nodes(), g.num_edges());
  }
  return kOk;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  std::string config;
  std::string constraint;
  bool non_lifted = false;
  std::string cert_out;
  std::string sdpa_out;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const RunConfig cfg = load_config(a.config);
  if (!cfg.K) throw ParseError(a.config + ": analyze needs controller.K");
  const WhrtConstraint c = resolve_constraint(a.constraint, cfg);
  const SolveOptions opts = solve_options(cfg.solver);
  ConstrainedSystem sys;
  std::string kind;
  bool lifted = !a.non_lifted;
  std::optional<WhrtGraph> lg;
  if (lifted) {
    try {
      lg = build_lifted_graph(c);
    } catch (const UnboundedLosses&) {
      std::printf("# %s allows unbounded loss runs; using the non-lifted graph\n", to_string(c).c_str());
      lifted = false;
    }
  }
  if (lifted) {
    const auto labels = lg->labels();
    const LiftedFamily f = lift(cfg.plant, cfg.strategy, std::set<int>(labels.begin(), labels.end()));
    sys = lifted_system(f, *cfg.K, *lg);
    kind = "lifted";
  } else {
    const WhrtGraph g = build_graph(c);
    sys = nonlifted_system(closed_loop(cfg.plant, *cfg.K, cfg.strategy), g);
    kind = "non-lifted";
  }
  std::printf("constraint=%s graph=%s nodes=%d edges=%d strategy=%s\n", to_string(c).c_str(), kind.c_str(),
              sys.num_nodes, static_cast<int>(sys.edges.size()), to_string(cfg.strategy.kind).c_str());
  if (!a.sdpa_out.empty()) write_atomic(a.sdpa_out, sdp::to_sdpa(analysis_problem(sys, opts.margin)));
  const auto t0 = std::chrono::steady_clock::now();
  const AnalysisCertificate cert = analyze(sys, opts);
  const double elapsed = seconds_since(t0);
  const VerificationReport rep = verify_certificate(cert, sys, opts.tol_verify);
  std::printf("gamma=%s\n", sig4(cert.gamma).c_str());
  std::printf("verify=%s\n", rep.pass ? "pass" : "fail");
  timing_line(elapsed);
  if (!a.cert_out.empty()) write_atomic(a.cert_out, certificate_to_yaml(cert, to_string(c), kind));
  return kOk;
}

// ---- synthesize ------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::string constraint;
  bool switched = false;
  std::string out;
};

int cmd_synthesize(const SynthArgs& a) {
  const RunConfig cfg = load_config(a.config);
  const WhrtConstraint c = resolve_constraint(a.constraint, cfg);
  WhrtGraph lg;
  try {
    lg = build_lifted_graph(c);
  } catch (const UnboundedLosses& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  const auto labels = lg.labels();
  const LiftedFamily f = lift(cfg.plant, cfg.strategy, std::set<int>(labels.begin(), labels.end()));
  const auto t0 = std::chrono::steady_clock::now();
  const SynthesisResult r = synthesize(f, lg, a.switched, solve_options(cfg.solver));
  const double elapsed = seconds_since(t0);
  std::printf("constraint=%s graph=lifted nodes=%d edges=%d strategy=%s controller=%s\n", to_string(c).c_str(),
              lg.num_nodes(), lg.num_edges(), to_string(cfg.strategy.kind).c_str(),
              a.switched ? "switched" : "static");
  if (a.switched) {
    for (std::size_t i = 0; i < r.K_nodes.size(); ++i) {
      std::printf("K_%zu=%s\n", i + 1, format_matrix(r.K_nodes[i]).c_str());
    }
  } else {
    std::printf("K=%s\n", format_matrix(r.K).c_str());
  }
  std::printf("gamma=%s\n", sig4(r.gamma).c_str());
  timing_line(elapsed);
  if (!a.out.empty()) write_atomic(a.out, synthesis_to_yaml(r, to_string(c)));
  return kOk;
}

// ---- simulate --------------------------------------------------------------

struct SimArgs {
  std::string config;
  std::string constraint;
  std::string mu = "config";
  std::string w = "auto";
  int seeds = -1;
  int horizon = -1;
  int T_max = -1;
  std::string csv_out;
};

int cmd_simulate(const SimArgs& a) {
  const RunConfig cfg = load_config(a.config);
  if (!cfg.K) throw ParseError(a.config + ": simulate needs controller.K");
  const Controller ctrl = Controller::fixed(*cfg.K);
  const int horizon = a.horizon > 0 ? a.horizon : cfg.simulation.horizon;
  const int seeds = a.seeds > 0 ? a.seeds : cfg.simulation.seeds;
  const int T_max = a.T_max > 0 ? a.T_max : cfg.simulation.T_max;

  std::optional<LossSequence> pattern;
  std::string mode = a.mu;
  if (mode == "config") {
    if (!cfg.simulation.mu) throw ParseError("no loss sequence: pass --mu or set simulation.mu");
    pattern = cfg.simulation.mu;
    mode = "periodic";
  } else if (mode.rfind("periodic:", 0) == 0) {
    pattern = parse_loss_sequence(mode.substr(9));
    mode = "periodic";
  } else if (mode != "random" && mode != "worst") {
    pattern = parse_loss_sequence(mode);
    mode = "periodic";
  }
  if (pattern && (*pattern)[0] != 1) throw ParseError("the loss sequence must start with a success (1)");

  std::string wmode = a.w;
  if (wmode == "auto") wmode = mode == "periodic" ? "step" : (mode == "worst" ? "worst" : "random");
  if (wmode != "step" && wmode != "random" && wmode != "worst" && wmode != "zero") {
    throw ParseError("--w must be step, random, worst or zero");
  }

  const auto t0 = std::chrono::steady_clock::now();
  SimulationTrace best;
  double gamma_sim = 0.0;
  std::string detail;
  auto consider = [&](SimulationTrace tr) {
    const double g = empirical_gain(tr);
    if (g > gamma_sim || best.horizon == 0) {
      gamma_sim = std::max(gamma_sim, g);
      best = std::move(tr);
    }
  };
  auto run_one = [&](const LossSequence& mu, std::uint64_t seed) {
    if (wmode == "zero") {
      consider(simulate(cfg.plant, ctrl, cfg.strategy, mu, step_disturbance(cfg.plant.q(), 0, horizon)));
    } else if (wmode == "random") {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> nd;
      std::vector<Vector> w(static_cast<std::size_t>(horizon), Vector(cfg.plant.q()));
      for (Vector& v : w) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = nd(rng);
      }
      consider(simulate(cfg.plant, ctrl, cfg.strategy, mu, w));
    } else if (wmode == "worst") {
      const auto pi = maximize_disturbance(cfg.plant, ctrl, cfg.strategy, mu, horizon);
      consider(simulate(cfg.plant, ctrl, cfg.strategy, mu, pi.w));
    } else {
      const auto sweep = step_sweep(cfg.plant, ctrl, cfg.strategy, mu, T_max);
      detail = "T=" + std::to_string(sweep.best_T);
      consider(sweep.trace);
    }
  };

  if (mode == "periodic") {
    if (cfg.constraint) {
      const auto mu = periodic(*pattern, static_cast<std::size_t>(std::max(horizon, 4 * cfg.constraint->s)));
      if (const auto v = first_violation(mu, *cfg.constraint)) {
        std::printf("# warning: periodic %s violates %s at window [%zu,%zu]\n", to_string(*pattern).c_str(),
                    to_string(*cfg.constraint).c_str(), *v, *v + static_cast<std::size_t>(cfg.constraint->s) - 1);
      }
    }
    if (wmode == "step") {
      run_one(*pattern, cfg.simulation.seed);
    } else {
      run_one(periodic(*pattern, static_cast<std::size_t>(horizon)), cfg.simulation.seed);
    }
    std::printf("mu=periodic:%s w=%s\n", to_string(*pattern).c_str(), wmode.c_str());
  } else if (mode == "random") {
    if (!cfg.constraint) throw ParseError("--mu random needs a constraint in the config");
    for (int i = 0; i < seeds; ++i) {
      const std::uint64_t seed = cfg.simulation.seed + static_cast<std::uint64_t>(i);
      run_one(random_admissible(*cfg.constraint, horizon, seed), seed);
    }
    std::printf("mu=random seeds=%d w=%s\n", seeds, wmode.c_str());
  } else {
    if (!cfg.constraint) throw ParseError("--mu worst needs a constraint in the config");
    const auto wc = worst_case_search(cfg.plant, ctrl, cfg.strategy, *cfg.constraint, horizon, cfg.simulation.budget,
                                      cfg.simulation.seed);
    consider(simulate(cfg.plant, ctrl, cfg.strategy, wc.mu, wc.w));
    std::printf("mu=worst candidates=%d budget_exhausted=%s\n", wc.candidates, wc.budget_exhausted ? "yes" : "no");
  }
  if (!detail.empty()) std::printf("%s\n", detail.c_str());
  std::printf("gamma_sim=%s\n", sig4(gamma_sim).c_str());
  timing_line(seconds_since(t0));
  if (!a.csv_out.empty()) {
    std::ostringstream os;
    write_csv(os, best);
    write_atomic(a.csv_out, os.str());
  }
  return kOk;
}

// ---- check -----------------------------------------------------------------

int cmd_check(const std::string& mu_text, const std::string& constraint_text) {
  const WhrtConstraint c = parse_constraint(constraint_text);
  const LossSequence mu = parse_loss_sequence(mu_text);
  if (const auto v = first_violation(mu, c)) {
    std::printf("violated: window [%zu,%zu] = %s\n", *v, *v + static_cast<std::size_t>(c.s) - 1,
                to_string(Word(mu.begin() + static_cast<std::ptrdiff_t>(*v),
                               mu.begin() + static_cast<std::ptrdiff_t>(*v + static_cast<std::size_t>(c.s))))
                    .c_str());
    return kNegative;
  }
  std::printf("satisfied\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly-hard real-time control: graphs, LMI analysis and synthesis, simulation"};
  app.require_subcommand(1);

  GraphArgs ga;
  auto* graph = app.add_subcommand("graph", "Build the (lifted) graph of a constraint");
  graph->add_option("--constraint", ga.constraint, "e.g. anyhit(4,10)");
  graph->add_option("--config", ga.config, "run configuration (YAML)");
  graph->add_flag("--lifted", ga.lifted, "build the lifted graph");
  graph->add_flag("--stats", ga.stats, "print node and edge counts");
  graph->add_option("--dot-out", ga.dot_out, "write Graphviz DOT");
  graph->add_option("--text-out", ga.text_out, "write the line-oriented graph dump");

  AnalyzeArgs aa;
  auto* analyze_cmd = app.add_subcommand("analyze", "Certify l2-performance of a fixed controller");
  analyze_cmd->add_option("--config", aa.config, "run configuration (YAML)")->required();
  analyze_cmd->add_option("--constraint", aa.constraint, "override the configured constraint");
  analyze_cmd->add_flag("--non-lifted", aa.non_lifted, "use the non-lifted graph (Theorem 1)");
  analyze_cmd->add_option("--cert-out", aa.cert_out, "write the certificate");
  analyze_cmd->add_option("--sdpa-out", aa.sdpa_out, "write the SDP in SDPA sparse format");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synthesize", "Design a state-feedback gain minimizing gamma");
  synth->add_option("--config", sa.config, "run configuration (YAML)")->required();
  synth->add_option("--constraint", sa.constraint, "override the configured constraint");
  synth->add_flag("--switched", sa.switched, "one gain per lifted graph node");
  synth->add_option("--out", sa.out, "write the synthesis result");

  SimArgs ma;
  auto* sim = app.add_subcommand("simulate", "Simulate and report the empirical gain");
  sim->add_option("--config", ma.config, "run configuration (YAML)")->required();
  sim->add_option("--mu", ma.mu, "periodic pattern (e.g. 101101 or periodic:101101), random, or worst");
  sim->add_option("--w", ma.w, "disturbance: step (T sweep), random, worst, zero");
  sim->add_option("--seeds", ma.seeds, "number of random loss sequences");
  sim->add_option("--horizon", ma.horizon, "simulation horizon");
  sim->add_option("--T-max", ma.T_max, "largest step length in the T sweep");
  sim->add_option("--csv-out", ma.csv_out, "write the trace with the largest gain as CSV");

  std::string check_mu, check_constraint;
  auto* check = app.add_subcommand("check", "Check a loss sequence against a constraint");
  check->add_option("--mu", check_mu, "binary loss sequence, e.g. 1001110")->required();
  check->add_option("--constraint", check_constraint, "e.g. anyhit(2,4)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*graph) return cmd_graph(ga);
    if (*analyze_cmd) return cmd_analyze(aa);
    if (*synth) return cmd_synthesize(sa);
    if (*sim) return cmd_simulate(ma);
    if (*check) return cmd_check(check_mu, check_constraint);
  } catch (const Infeasible& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kInfeasible;
  } catch (const SolverFailure& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kBackend;
  } catch (const IllConditionedG& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kBackend;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
