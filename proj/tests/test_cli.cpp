#include <catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(WHRT_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Run r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string config(const char* name) { return std::string(WHRT_SOURCE_DIR) + "/configs/" + name; }

// Drops the lines flagged as non-deterministic.
std::string stable(const std::string& out) {
  std::istringstream in(out);
  std::string line, kept;
  while (std::getline(in, line)) {
    if (line.find("(non-deterministic)") == std::string::npos) kept += line + "\n";
  }
  return kept;
}

std::filesystem::path scratch() {
  const auto dir = std::filesystem::temp_directory_path() / "whrt_cli_test";
  std::filesystem::create_directories(dir);
  return dir;
}

double value_after(const std::string& out, const std::string& key) {
  const auto pos = out.find(key);
  REQUIRE(pos != std::string::npos);
  return std::stod(out.substr(pos + key.size()));
}

}  // namespace

// [PAPER] graph sizes of the example constraint.
TEST_CASE("graph subcommand") {
  auto r = run("graph --constraint 'anyhit(4,10)' --stats");
  CHECK(r.code == 0);
  CHECK(r.out == "nodes=336 edges=462\n");
  r = run("graph --constraint 'anyhit(4,10)' --lifted --stats");
  CHECK(r.out == "nodes=84 edges=210\n");
  r = run("graph --constraint 'anyhit(1,1)' --lifted --stats");
  CHECK(r.out == "nodes=1 edges=1\n");
  const auto dot = scratch() / "g.dot";
  r = run("graph --constraint 'anyhit(2,4)' --dot-out " + dot.string());
  CHECK(r.code == 0);
  std::ifstream in(dot);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str().rfind("digraph whrt {", 0) == 0);
  CHECK(run("graph --constraint 'anyhit(5,4)' --stats").code == 2);
  CHECK(run("graph").code == 2);
}

TEST_CASE("check subcommand") {
  CHECK(run("check --mu 1001110 --constraint 'anyhit(2,4)'").code == 0);
  const auto r = run("check --mu 1000 --constraint 'anyhit(2,4)'");
  CHECK(r.code == 1);
  CHECK(r.out.find("window [0,3]") != std::string::npos);
  CHECK(run("check --mu 12x --constraint 'anyhit(2,4)'").code == 2);
}

// [PAPER] gamma = 3.52 for the hand-picked gain.
TEST_CASE("analyze subcommand") {
  const auto cert = scratch() / "cert.yaml";
  auto r = run("analyze --config " + config("example.yaml") + " --cert-out " + cert.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("gamma=3.520\n") != std::string::npos);
  CHECK(r.out.find("verify=pass") != std::string::npos);
  std::ifstream in(cert);
  std::string header;
  std::getline(in, header);
  CHECK(header == "# whrt-certificate 1");
  const auto again = run("analyze --config " + config("example.yaml"));
  CHECK(stable(again.out) == stable(r.out));

  r = run("analyze --config " + config("example.yaml") + " --non-lifted");
  CHECK(r.code == 0);
  CHECK(std::abs(value_after(r.out, "gamma=") - 3.52) <= 0.03);
}

TEST_CASE("analyze exit codes") {
  const auto path = scratch() / "unstable.yaml";
  {
    std::ofstream out(path);
    out << "plant:\n  A: [[2]]\n  B: [[1]]\n  Bw: [[1]]\n  C: [[1]]\n  D: [[0]]\n  Dw: [[0]]\n"
           "constraint: anymiss(1,1)\ncontroller:\n  K: [[0]]\n";
  }
  CHECK(run("analyze --config " + path.string()).code == 3);
  {
    std::ofstream out(path);
    out << "plant:\n  A: [[2]]\n  B: [[1]]\n  Bw: [[1]]\n  C: [[1]]\n  D: [[0]]\n  Dw: [[0]]\n"
           "constraint: anymiss(1,1)\ncontroler:\n  K: [[0]]\n";
  }
  const auto r = run("analyze --config " + path.string());
  CHECK(r.code == 2);
  CHECK(r.out.find("unknown key 'controler'") != std::string::npos);
  CHECK(run("analyze --config /nonexistent.yaml").code == 2);
}

// [PAPER] gamma = 2.505 and gamma = 2.488.
TEST_CASE("synthesize subcommand") {
  const auto out = scratch() / "synth.yaml";
  auto r = run("synthesize --config " + config("example.yaml") + " --out " + out.string());
  CHECK(r.code == 0);
  CHECK(std::abs(value_after(r.out, "gamma=") - 2.505) <= 0.02);
  CHECK(r.out.find("K=[") != std::string::npos);
  CHECK(std::filesystem::exists(out));
  r = run("synthesize --config " + config("example.yaml") + " --switched");
  CHECK(r.code == 0);
  CHECK(std::abs(value_after(r.out, "gamma=") - 2.488) <= 0.02);
  CHECK(r.out.find("K_1=[") != std::string::npos);
  CHECK(r.out.find("K_2=[") != std::string::npos);
}

TEST_CASE("simulate subcommand") {
  const auto csv = scratch() / "trace.csv";
  auto r = run("simulate --config " + config("example.yaml") + " --csv-out " + csv.string());
  CHECK(r.code == 0);
  const double g = value_after(r.out, "gamma_sim=");
  CHECK(g >= 3.30);
  CHECK(g <= 3.52);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "k,mu_k,x_1,x_2,u_a_1,w_1,z_1");

  r = run("simulate --config " + config("example.yaml") + " --mu random --seeds 50");
  CHECK(r.code == 0);
  CHECK(value_after(r.out, "gamma_sim=") <= 3.52);
  const auto again = run("simulate --config " + config("example.yaml") + " --mu random --seeds 50");
  CHECK(stable(again.out) == stable(r.out));

  CHECK(run("simulate --config " + config("example.yaml") + " --w zero").code == 2);
  CHECK(run("simulate --config " + config("example.yaml") + " --mu 0110").code == 2);
  // Sequences outside the constraint are simulated but flagged.
  r = run("simulate --config " + config("example.yaml") + " --mu 110 --horizon 60 --T-max 5");
  CHECK(r.code == 0);
  CHECK(r.out.find("# warning: periodic 110 violates anyhit(2,3)") == std::string::npos);
  r = run("simulate --config " + config("example.yaml") + " --mu 100 --horizon 60 --T-max 5");
  CHECK(r.out.find("# warning: periodic 100 violates anyhit(2,3) at window [0,2]") != std::string::npos);
  CHECK(run("simulate --config " + config("example.yaml") + " --mu bogus").code == 2);
}
