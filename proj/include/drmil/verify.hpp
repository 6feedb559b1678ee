#ifndef DRMIL_VERIFY_HPP
#define DRMIL_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace drmil {

// Knobs for the solver property suites surfaced by the `verify` command.
struct VerifyOptions {
  double lambda = 0.01;
  int interior_bags = 1000;
  int oracle_bags = 200;
  int expansion_bags = 500;
  int feasibility_draws = 100000;
  int root_draws = 10000;
  int probability_trials = 10000;
  int probability_n = 100;
  double sigma_sq = 0.25;
  std::uint64_t seed = 1;
  // Self-test hook: added to every solver value inside the checks so a
  // deliberately skewed run fails.
  double fault_bias = 0.0;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  nlohmann::json details;
};

std::vector<CheckResult> run_verification(const VerifyOptions& opt);

nlohmann::json verification_report(const VerifyOptions& opt,
                                   const std::vector<CheckResult>& results);

}  // namespace drmil

#endif  // DRMIL_VERIFY_HPP
