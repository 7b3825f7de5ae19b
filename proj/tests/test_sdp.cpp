#include <catch_amalgamated.hpp>

#include "whrt/sdp.hpp"

using namespace whrt::sdp;

namespace {

Problem one_var(double obj) {
  Problem p;
  p.add_var("x");
  p.objective = Eigen::VectorXd::Constant(1, obj);
  return p;
}

}  // namespace

// [DERIVED] Closed-form optima of 2x2 LMIs via the determinant condition.
TEMPLATE_TEST_CASE("tiny SDPs with known optima", "", ScsBackend, ClarabelBackend) {
  const TestType backend;
  SECTION("min t s.t. [[t,1],[1,t]] >= 0 gives t = 1") {
    auto p = one_var(1.0);
    LmiBlock b{"b", 2, 0.0, {}};
    b.add(0, 0, 0, 1.0);
    b.add(1, 1, 0, 1.0);
    b.add_constant(1, 0, 1.0);
    p.blocks.push_back(b);
    const auto sol = backend.solve(p);
    REQUIRE(sol.status == Status::Solved);
    CHECK(sol.x(0) == Catch::Approx(1.0).margin(1e-5));
  }
  SECTION("min x s.t. [[x,2],[2,1]] >= 0 gives x = 4") {
    auto p = one_var(1.0);
    LmiBlock b{"b", 2, 0.0, {}};
    b.add(0, 0, 0, 1.0);
    b.add_constant(0, 1, 2.0);
    b.add_constant(1, 1, 1.0);
    p.blocks.push_back(b);
    const auto sol = backend.solve(p);
    REQUIRE(sol.status == Status::Solved);
    CHECK(sol.x(0) == Catch::Approx(4.0).margin(1e-5));
    CHECK(sol.objective == Catch::Approx(4.0).margin(1e-5));
  }
  SECTION("max y s.t. [[1,y],[y,1]] >= 0 gives y = 1") {
    auto p = one_var(-1.0);
    LmiBlock b{"b", 2, 0.0, {}};
    b.add_constant(0, 0, 1.0);
    b.add_constant(1, 1, 1.0);
    b.add(1, 0, 0, 1.0);
    p.blocks.push_back(b);
    const auto sol = backend.solve(p);
    REQUIRE(sol.status == Status::Solved);
    CHECK(sol.x(0) == Catch::Approx(1.0).margin(1e-5));
  }
  SECTION("margin shifts the feasible set") {
    auto p = one_var(1.0);
    LmiBlock b{"b", 1, 0.5, {}};
    b.add(0, 0, 0, 1.0);
    p.blocks.push_back(b);
    const auto sol = backend.solve(p);
    REQUIRE(sol.status == Status::Solved);
    CHECK(sol.x(0) == Catch::Approx(0.5).margin(1e-6));
  }
}

// [DERIVED] min t s.t. t I - M >= 0 is the largest eigenvalue of M; a 3x3
// block exercises the off-diagonal ordering of both vectorizations.
TEMPLATE_TEST_CASE("largest eigenvalue of a dense 3x3 block", "", ScsBackend, ClarabelBackend) {
  const TestType backend;
  Eigen::Matrix3d M;
  M << 1, 2, -3, 2, 4, 0.5, -3, 0.5, -6;
  auto p = one_var(1.0);
  LmiBlock b{"b", 3, 0.0, {}};
  for (int i = 0; i < 3; ++i) {
    b.add(i, i, 0, 1.0);
    for (int j = 0; j <= i; ++j) b.add_constant(i, j, -M(i, j));
  }
  p.blocks.push_back(b);
  const auto sol = backend.solve(p);
  REQUIRE(sol.status == Status::Solved);
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(M).eigenvalues().maxCoeff();
  CHECK(sol.x(0) == Catch::Approx(lmax).margin(1e-5));
}

TEMPLATE_TEST_CASE("infeasible and unbounded problems are classified", "", ScsBackend, ClarabelBackend) {
  const TestType backend;
  {
    auto p = one_var(1.0);
    LmiBlock b{"b", 2, 0.0, {}};
    b.add(0, 0, 0, 1.0);
    b.add_constant(1, 1, -1.0);
    p.blocks.push_back(b);
    CHECK(backend.solve(p).status == Status::Infeasible);
  }
  {
    auto p = one_var(1.0);
    LmiBlock b{"b", 1, 0.0, {}};
    b.add(0, 0, 0, -1.0);
    p.blocks.push_back(b);
    CHECK(backend.solve(p).status == Status::Unbounded);
  }
}

TEST_CASE("block evaluation fills both triangles") {
  LmiBlock b{"b", 2, 0.0, {}};
  b.add(0, 1, 0, 2.0);  // stored in the lower triangle
  b.add_constant(1, 1, 3.0);
  b.add(1, 1, 0, 1.0);
  const auto M = b.evaluate(Eigen::VectorXd::Constant(1, 2.0));
  CHECK(M(0, 1) == 4.0);
  CHECK(M(1, 0) == 4.0);
  CHECK(M(1, 1) == 5.0);
  CHECK(M(0, 0) == 0.0);
}

TEST_CASE("svec index is lower-triangular column-major") {
  using detail::svec_index;
  CHECK(svec_index(3, 0, 0) == 0);
  CHECK(svec_index(3, 1, 0) == 1);
  CHECK(svec_index(3, 2, 0) == 2);
  CHECK(svec_index(3, 1, 1) == 3);
  CHECK(svec_index(3, 2, 1) == 4);
  CHECK(svec_index(3, 2, 2) == 5);
}

TEST_CASE("upper svec index walks the upper triangle column by column") {
  using detail::svec_index_upper;
  // Lower entry (row, col) sits at upper position (col, row).
  CHECK(svec_index_upper(3, 0, 0) == 0);
  CHECK(svec_index_upper(3, 1, 0) == 1);
  CHECK(svec_index_upper(3, 1, 1) == 2);
  CHECK(svec_index_upper(3, 2, 0) == 3);
  CHECK(svec_index_upper(3, 2, 1) == 4);
  CHECK(svec_index_upper(3, 2, 2) == 5);
}

TEST_CASE("SDPA export") {
  auto p = one_var(1.0);
  LmiBlock b{"b", 2, 0.25, {}};
  b.add(0, 0, 0, 1.0);
  b.add_constant(1, 0, 2.0);
  b.add_constant(1, 1, 1.0);
  p.blocks.push_back(b);
  const auto text = to_sdpa(p);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("\"", 0) == 0);
  std::getline(in, line);
  CHECK(line == "1");
  std::getline(in, line);
  CHECK(line == "1");
  std::getline(in, line);
  CHECK(line == "2");
  std::getline(in, line);
  CHECK(line == "1");
  // F0 = -(constant - margin I), upper triangle.
  CHECK(text.find("0 1 1 1 0.25\n") != std::string::npos);
  CHECK(text.find("0 1 1 2 -2\n") != std::string::npos);
  CHECK(text.find("0 1 2 2 -0.75\n") != std::string::npos);
  CHECK(text.find("1 1 1 1 1\n") != std::string::npos);
}
