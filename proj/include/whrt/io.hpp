#pragma once

// Run configuration and result files (YAML). Requires yaml-cpp.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <yaml-cpp/yaml.h>

#include "whrt/constraints.hpp"
#include "whrt/errors.hpp"
#include "whrt/lmi.hpp"
#include "whrt/systems.hpp"

namespace whrt {

struct SolverConfig {
  std::optional<double> margin;      // unset: automatic
  std::optional<double> tol_verify;  // unset: automatic
  bool bisection = false;
  std::string backend = "clarabel";  // or "scs"
  std::optional<double> eps;         // unset: backend default
  std::optional<int> max_iters;      // unset: backend default
};

struct SimulationConfig {
  int horizon = 200;
  int seeds = 20;
  int T_max = 200;
  std::optional<LossSequence> mu;  // periodic pattern
  std::uint64_t seed = 1;
  int budget = 64;
};

struct RunConfig {
  Plant plant;
  std::optional<WhrtConstraint> constraint;
  Strategy strategy = Strategy::zero();
  std::optional<Matrix> K;
  SolverConfig solver;
  SimulationConfig simulation;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& source, const YAML::Node& node, const std::string& what) {
  const YAML::Mark m = node.Mark();
  std::string where = source;
  if (m.line >= 0) where += ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
  throw ParseError(where + ": " + what);
}

inline void reject_unknown(const std::string& source, const YAML::Node& map, const std::set<std::string>& allowed,
                           const std::string& section) {
  if (!map.IsMap()) config_error(source, map, section + " must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      config_error(source, kv.first, "unknown key '" + key + "'" + (section.empty() ? "" : " in " + section));
    }
  }
}

template <typename T>
T scalar(const std::string& source, const YAML::Node& node, const std::string& what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    config_error(source, node, what + " has the wrong type");
  }
}

inline Matrix parse_matrix(const std::string& source, const YAML::Node& node, const std::string& name) {
  if (!node.IsSequence() || node.size() == 0) config_error(source, node, name + " must be a non-empty list of rows");
  const auto rows = static_cast<Eigen::Index>(node.size());
  Eigen::Index cols = -1;
  Matrix M;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const YAML::Node row = node[static_cast<std::size_t>(r)];
    if (!row.IsSequence()) config_error(source, row, name + " rows must be lists");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      if (cols == 0) config_error(source, row, name + " rows must not be empty");
      M.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      config_error(source, row, name + " rows have different lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      M(r, c) = scalar<double>(source, row[static_cast<std::size_t>(c)], name + " entry");
    }
  }
  return M;
}

inline Vector parse_vector(const std::string& source, const YAML::Node& node, const std::string& name) {
  if (!node.IsSequence()) config_error(source, node, name + " must be a list");
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) v(static_cast<Eigen::Index>(i)) = scalar<double>(source, node[i], name);
  return v;
}

inline YAML::Node emit_matrix(const Matrix& M) {
  YAML::Node rows(YAML::NodeType::Sequence);
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    YAML::Node row(YAML::NodeType::Sequence);
    row.SetStyle(YAML::EmitterStyle::Flow);
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detail

/// Parses a run configuration. `source` names the input in error messages,
/// which carry line and column of the offending node.
inline RunConfig parse_config(const std::string& text, const std::string& source = "config") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                     ": " + e.msg);
  }
  if (!root.IsMap()) throw ParseError(source + ": top level must be a mapping");
  detail::reject_unknown(source, root, {"plant", "constraint", "strategy", "hold_initial_input", "controller", "solver",
                                        "simulation"},
                         "");
  RunConfig cfg;
  const YAML::Node plant = root["plant"];
  if (!plant) throw ParseError(source + ": missing 'plant'");
  detail::reject_unknown(source, plant, {"A", "B", "Bw", "C", "D", "Dw"}, "plant");
  for (const char* key : {"A", "B", "Bw", "C", "D", "Dw"}) {
    if (!plant[key]) detail::config_error(source, plant, std::string("plant is missing '") + key + "'");
  }
  cfg.plant.A = detail::parse_matrix(source, plant["A"], "A");
  cfg.plant.B = detail::parse_matrix(source, plant["B"], "B");
  cfg.plant.Bw = detail::parse_matrix(source, plant["Bw"], "Bw");
  cfg.plant.C = detail::parse_matrix(source, plant["C"], "C");
  cfg.plant.D = detail::parse_matrix(source, plant["D"], "D");
  cfg.plant.Dw = detail::parse_matrix(source, plant["Dw"], "Dw");
  try {
    cfg.plant.validate();
  } catch (const DimensionMismatch& e) {
    detail::config_error(source, plant, e.what());
  }
  if (const YAML::Node c = root["constraint"]) {
    try {
      cfg.constraint = parse_constraint(detail::scalar<std::string>(source, c, "constraint"));
    } catch (const ParseError& e) {
      detail::config_error(source, c, e.what());
    }
  }
  if (const YAML::Node s = root["strategy"]) {
    const auto name = detail::scalar<std::string>(source, s, "strategy");
    if (name == "zero") {
      cfg.strategy = Strategy::zero();
    } else if (name == "hold") {
      cfg.strategy = Strategy::hold();
    } else {
      detail::config_error(source, s, "strategy must be 'zero' or 'hold'");
    }
  }
  if (const YAML::Node u = root["hold_initial_input"]) {
    cfg.strategy.initial_input = detail::parse_vector(source, u, "hold_initial_input");
    if (cfg.strategy.initial_input.size() != cfg.plant.m()) {
      detail::config_error(source, u, "hold_initial_input must have one entry per input");
    }
  }
  if (const YAML::Node ctrl = root["controller"]) {
    detail::reject_unknown(source, ctrl, {"K"}, "controller");
    if (const YAML::Node K = ctrl["K"]) {
      cfg.K = detail::parse_matrix(source, K, "K");
      if (cfg.K->rows() != cfg.plant.m() || cfg.K->cols() != cfg.plant.n()) {
        detail::config_error(source, K, "K must be " + std::to_string(cfg.plant.m()) + "x" + std::to_string(cfg.plant.n()));
      }
    }
  }
  if (const YAML::Node s = root["solver"]) {
    detail::reject_unknown(source, s, {"margin", "tol_verify", "bisection", "backend", "eps", "max_iters"}, "solver");
    auto auto_or_number = [&](const YAML::Node& n, const std::string& what) -> std::optional<double> {
      if (n.IsScalar() && n.Scalar() == "auto") return std::nullopt;
      const double v = detail::scalar<double>(source, n, what);
      if (!(v >= 0.0)) detail::config_error(source, n, what + " must be non-negative");
      return v;
    };
    if (s["margin"]) cfg.solver.margin = auto_or_number(s["margin"], "margin");
    if (s["tol_verify"]) cfg.solver.tol_verify = auto_or_number(s["tol_verify"], "tol_verify");
    if (s["bisection"]) cfg.solver.bisection = detail::scalar<bool>(source, s["bisection"], "bisection");
    if (s["backend"]) {
      cfg.solver.backend = detail::scalar<std::string>(source, s["backend"], "backend");
      if (cfg.solver.backend != "clarabel" && cfg.solver.backend != "scs") {
        detail::config_error(source, s["backend"], "backend must be clarabel or scs");
      }
    }
    if (s["eps"]) {
      cfg.solver.eps = detail::scalar<double>(source, s["eps"], "eps");
      if (!(*cfg.solver.eps > 0.0)) detail::config_error(source, s["eps"], "eps must be positive");
    }
    if (s["max_iters"]) {
      cfg.solver.max_iters = detail::scalar<int>(source, s["max_iters"], "max_iters");
      if (*cfg.solver.max_iters < 1) detail::config_error(source, s["max_iters"], "max_iters must be positive");
    }
  }
  if (const YAML::Node s = root["simulation"]) {
    detail::reject_unknown(source, s, {"horizon", "seeds", "T_max", "mu", "seed", "budget"}, "simulation");
    auto positive = [&](const char* key, int& out) {
      if (!s[key]) return;
      out = detail::scalar<int>(source, s[key], key);
      if (out < 1) detail::config_error(source, s[key], std::string(key) + " must be positive");
    };
    positive("horizon", cfg.simulation.horizon);
    positive("seeds", cfg.simulation.seeds);
    positive("T_max", cfg.simulation.T_max);
    positive("budget", cfg.simulation.budget);
    if (s["seed"]) cfg.simulation.seed = detail::scalar<std::uint64_t>(source, s["seed"], "seed");
    if (s["mu"]) {
      try {
        cfg.simulation.mu = parse_loss_sequence(detail::scalar<std::string>(source, s["mu"], "mu"));
      } catch (const ParseError& e) {
        detail::config_error(source, s["mu"], e.what());
      }
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

inline SolveOptions solve_options(const SolverConfig& s) {
  SolveOptions o;
  if (s.backend == "scs") {
    sdp::ScsOptions scs;
    if (s.eps) scs.eps_abs = scs.eps_rel = *s.eps;
    if (s.max_iters) scs.max_iters = *s.max_iters;
    // Bisection probes near the optimum stall; cap them.
    if (s.bisection) scs.max_iters = std::min(scs.max_iters, 5000);
    o.backend = std::make_shared<sdp::ScsBackend>(scs);
    // The synthesis optimum is often approached only as S, G grow without
    // bound, where SCS stalls; the re-analysis restores accuracy.
    sdp::ScsOptions loose = scs;
    loose.eps_abs = loose.eps_rel = 10.0 * scs.eps_abs;
    o.synthesis_backend = std::make_shared<sdp::ScsBackend>(loose);
  } else {
    sdp::ClarabelOptions cl;
    if (s.eps) cl.tol_gap_abs = cl.tol_gap_rel = cl.tol_feas = *s.eps;
    if (s.max_iters) cl.max_iter = *s.max_iters;
    o.backend = std::make_shared<sdp::ClarabelBackend>(cl);
  }
  o.margin = s.margin.value_or(-1.0);
  o.tol_verify = s.tol_verify.value_or(-1.0);
  o.bisection = s.bisection;
  return o;
}

inline constexpr int kResultFormatVersion = 1;

/// Writes `content` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  const auto tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move result into " + path.string() + ": " + ec.message());
  }
}

namespace detail {

inline YAML::Node certificate_node(const AnalysisCertificate& c) {
  YAML::Node n;
  n["gamma"] = c.gamma;
  n["margin"] = c.margin;
  n["solver_gamma"] = c.solver_gamma;
  n["backend"] = c.backend;
  n["decision_variables"] = c.decision_variables;
  n["nodes"] = static_cast<int>(c.S.size());
  YAML::Node S(YAML::NodeType::Sequence), G(YAML::NodeType::Sequence);
  for (const Matrix& M : c.S) S.push_back(emit_matrix(M));
  for (const Matrix& M : c.G) G.push_back(emit_matrix(M));
  n["S"] = S;
  n["G"] = G;
  return n;
}

inline std::string emit_document(const std::string& kind, const YAML::Node& body) {
  YAML::Emitter em;
  em.SetDoublePrecision(17);
  em << body;
  return "# whrt-" + kind + " " + std::to_string(kResultFormatVersion) + "\n" + em.c_str() + "\n";
}

}  // namespace detail

/// Analysis certificate file: version header line, then a YAML mapping.
inline std::string certificate_to_yaml(const AnalysisCertificate& c, const std::string& constraint,
                                       const std::string& graph_kind) {
  YAML::Node n;
  n["format_version"] = kResultFormatVersion;
  n["kind"] = "analysis";
  n["constraint"] = constraint;
  n["graph"] = graph_kind;
  n["certificate"] = detail::certificate_node(c);
  return detail::emit_document("certificate", n);
}

inline std::string synthesis_to_yaml(const SynthesisResult& r, const std::string& constraint) {
  YAML::Node n;
  n["format_version"] = kResultFormatVersion;
  n["kind"] = r.switched ? "switched-synthesis" : "synthesis";
  n["constraint"] = constraint;
  n["gamma"] = r.gamma;
  n["synthesis_gamma"] = r.synthesis_gamma;
  if (r.switched) {
    YAML::Node Ks(YAML::NodeType::Sequence);
    for (const Matrix& K : r.K_nodes) Ks.push_back(detail::emit_matrix(K));
    n["K_nodes"] = Ks;
  } else {
    n["K"] = detail::emit_matrix(r.K);
  }
  n["certificate"] = detail::certificate_node(r.certificate);
  return detail::emit_document("synthesis", n);
}

/// Reads the certificate of an analysis or synthesis result file.
inline AnalysisCertificate parse_certificate(const std::string& text, const std::string& source = "certificate") {
  const auto first = text.substr(0, text.find('\n'));
  const std::string v = " " + std::to_string(kResultFormatVersion);
  const bool header_ok = (first.rfind("# whrt-certificate", 0) == 0 || first.rfind("# whrt-synthesis", 0) == 0) &&
                         first.size() >= v.size() && first.compare(first.size() - v.size(), v.size(), v) == 0;
  if (!header_ok) throw ParseError(source + ": missing or unsupported format header");
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  const YAML::Node c = root["certificate"];
  if (!c) throw ParseError(source + ": no certificate section");
  AnalysisCertificate cert;
  cert.gamma = detail::scalar<double>(source, c["gamma"], "gamma");
  cert.margin = c["margin"] ? detail::scalar<double>(source, c["margin"], "margin") : 0.0;
  cert.backend = c["backend"] ? c["backend"].as<std::string>() : "";
  for (const auto& m : c["S"]) cert.S.push_back(detail::parse_matrix(source, m, "S"));
  for (const auto& m : c["G"]) cert.G.push_back(detail::parse_matrix(source, m, "G"));
  if (cert.S.size() != cert.G.size() || cert.S.empty()) throw ParseError(source + ": S and G lists do not match");
  return cert;
}

}  // namespace whrt
