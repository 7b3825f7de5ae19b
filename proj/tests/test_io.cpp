#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "whrt/graph.hpp"
#include "whrt/io.hpp"

using namespace whrt;

namespace {

const char* kConfig = R"(plant:
  A: [[0, 1], [1, 1]]
  B: [[1], [1]]
  Bw: [[1], [1]]
  C: [[1, 1]]
  D: [[1]]
  Dw: [[1]]
constraint: anyhit(2,3)
strategy: zero
controller:
  K: [[-0.35, -0.85]]
solver:
  margin: auto
  tol_verify: 1e-6
simulation:
  horizon: 100
  mu: "101101"
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  s.replace(s.find(from), from.size(), to);
  return s;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(kConfig);
  CHECK(cfg.plant.A.isApprox(fixture::paper_plant().A));
  CHECK(cfg.constraint == WhrtConstraint::any_hit(2, 3));
  CHECK(cfg.strategy.kind == LossStrategy::Zero);
  REQUIRE(cfg.K.has_value());
  CHECK(cfg.K->isApprox(fixture::paper_K()));
  CHECK_FALSE(cfg.solver.margin.has_value());
  CHECK(cfg.solver.tol_verify == std::optional<double>{1e-6});
  CHECK(cfg.simulation.horizon == 100);
  CHECK(cfg.simulation.seeds == 20);
  CHECK(cfg.simulation.mu == parse_loss_sequence("101101"));
}

TEST_CASE("the shipped example configs parse") {
  for (const char* name : {"example.yaml", "example_synthesized.yaml"}) {
    const auto cfg = load_config(std::filesystem::path(WHRT_SOURCE_DIR) / "configs" / name);
    CHECK(cfg.constraint == WhrtConstraint::any_hit(2, 3));
    CHECK(cfg.K.has_value());
  }
}

TEST_CASE("unknown keys are rejected with their position") {
  try {
    parse_config(replace(kConfig, "  horizon: 100", "  horizn: 100"), "run.yaml");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("run.yaml:16:3: unknown key 'horizn' in simulation") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(replace(kConfig, "strategy: zero", "strategy: zero\nplnt: 1")), ParseError);
}

TEST_CASE("invalid configs are rejected") {
  CHECK_THROWS_AS(parse_config(replace(kConfig, "anyhit(2,3)", "anyhit(4,3)")), ParseError);
  CHECK_THROWS_AS(parse_config(replace(kConfig, "strategy: zero", "strategy: drop")), ParseError);
  CHECK_THROWS_AS(parse_config(replace(kConfig, "K: [[-0.35, -0.85]]", "K: [[-0.35]]")), ParseError);
  CHECK_THROWS_AS(parse_config(replace(kConfig, "  B: [[1], [1]]", "  B: [[1], [1], [1]]")), ParseError);
  CHECK_THROWS_AS(parse_config(replace(kConfig, "  D: [[1]]", "  D: [[x]]")), ParseError);
  CHECK_THROWS_AS(parse_config(replace(kConfig, "\"101101\"", "\"10x\"")), ParseError);
  CHECK_THROWS_AS(parse_config(replace(kConfig, "tol_verify: 1e-6", "tol_verify: -1")), ParseError);
  CHECK_THROWS_AS(parse_config("plant: [1"), ParseError);
  CHECK_THROWS_AS(parse_config("constraint: anyhit(2,3)\n"), ParseError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ParseError);
}

TEST_CASE("solver options follow the config") {
  SolverConfig s;
  s.margin = 1e-6;
  s.eps = 1e-6;
  const auto o = solve_options(s);
  CHECK(o.margin == 1e-6);
  CHECK(o.tol_verify < 0.0);
  REQUIRE(o.backend != nullptr);
  CHECK(o.backend->name() == "clarabel");
  CHECK(o.synthesis_backend == nullptr);
  s.backend = "scs";
  const auto scs = solve_options(s);
  REQUIRE(scs.synthesis_backend != nullptr);
  CHECK(scs.backend->name() == "scs");
  CHECK(scs.synthesis_backend->name() == "scs");
  CHECK_THROWS_AS(parse_config(replace(kConfig, "  margin: auto", "  backend: mosek")), ParseError);
  CHECK(parse_config(replace(kConfig, "  margin: auto", "  backend: scs")).solver.backend == "scs");
}

TEST_CASE("certificate files roundtrip") {
  const auto plant = fixture::paper_plant();
  const auto g = build_lifted_graph(WhrtConstraint::any_hit(2, 3));
  const auto f = lift(plant, Strategy::zero(), {0, 1});
  const auto sys = lifted_system(f, fixture::paper_K(), g);
  const auto cert = analyze(sys);
  const auto text = certificate_to_yaml(cert, "anyhit(2,3)", "lifted");
  CHECK(text.rfind("# whrt-certificate 1\n", 0) == 0);
  const auto back = parse_certificate(text);
  CHECK(back.gamma == cert.gamma);
  REQUIRE(back.S.size() == cert.S.size());
  for (std::size_t i = 0; i < cert.S.size(); ++i) {
    CHECK(back.S[i] == cert.S[i]);
    CHECK(back.G[i] == cert.G[i]);
  }
  CHECK(verify_certificate(back, sys).pass);
  CHECK_THROWS_AS(parse_certificate("# other 1\n" + text), ParseError);
  CHECK_THROWS_AS(parse_certificate(replace(text, "# whrt-certificate 1", "# whrt-certificate 2")), ParseError);

  const auto dir = std::filesystem::temp_directory_path() / "whrt_io_test";
  std::filesystem::create_directories(dir);
  write_atomic(dir / "cert.yaml", text);
  std::ifstream in(dir / "cert.yaml");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == text);
  std::filesystem::remove_all(dir);
}
