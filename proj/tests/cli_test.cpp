#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#ifndef DRMIL_CLI_PATH
#error "DRMIL_CLI_PATH must point at the built CLI"
#endif

namespace {

int run(const std::string& args) {
  const std::string cmd =
      std::string(DRMIL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("gen is deterministic and validates flags") {
  CHECK(run("gen --seed 7 --out cli_gen_a.csv --train-pos 3 --train-neg 3 "
            "--test-pos 2 --test-neg 2 --bag-size 6") == 0);
  CHECK(run("gen --seed 7 --out cli_gen_b.csv --train-pos 3 --train-neg 3 "
            "--test-pos 2 --test-neg 2 --bag-size 6") == 0);
  CHECK(slurp("cli_gen_a.csv") == slurp("cli_gen_b.csv"));
  CHECK(!slurp("cli_gen_a.csv.manifest.json").empty());

  // Missing --out is a usage error.
  CHECK(run("gen --seed 7") == 2);
  // Infeasible sizes are config errors.
  CHECK(run("gen --out cli_gen_bad.csv --bag-size 2 --max-pos 3") == 2);

  std::remove("cli_gen_a.csv");
  std::remove("cli_gen_a.csv.manifest.json");
  std::remove("cli_gen_b.csv");
  std::remove("cli_gen_b.csv.manifest.json");
}

TEST_CASE("al runs end to end and reruns byte-identically") {
  REQUIRE(run("gen --seed 11 --out cli_al_data.csv --train-pos 4 --train-neg 4 "
              "--test-pos 3 --test-neg 3 --bag-size 8 --dim 4") == 0);
  const std::string flags =
      "al --data cli_al_data.csv --strategy pf --steps 2 --bsize 3 "
      "--epochs-init 4 --epochs-step 2 --seed 5 --out cli_al_run1";
  CHECK(run(flags) == 0);
  CHECK(run("al --data cli_al_data.csv --strategy pf --steps 2 --bsize 3 "
            "--epochs-init 4 --epochs-step 2 --seed 5 --out cli_al_run2") == 0);
  const std::string curve1 = slurp("cli_al_run1/pf_curve.csv");
  CHECK(!curve1.empty());
  CHECK(curve1 == slurp("cli_al_run2/pf_curve.csv"));
  CHECK(!slurp("cli_al_run1/manifest.json").empty());
  CHECK(!slurp("cli_al_run1/pf_queries.csv").empty());

  // 2 steps -> 3 curve rows plus header.
  std::istringstream ss(curve1);
  std::string line;
  int lines = 0;
  while (std::getline(ss, line)) ++lines;
  CHECK(lines == 4);

  CHECK(run("al --data no_such_file.csv") == 1);

  [[maybe_unused]] const int rc =
      std::system("rm -rf cli_al_run1 cli_al_run2 cli_al_data.csv "
                  "cli_al_data.csv.manifest.json");
}

TEST_CASE("verify self-test: an injected fault must fail") {
  // Small trial count keeps this cheap; the fault skews solver values.
  CHECK(run("verify --trials 200 --inject-fault") != 0);
}
