#include "drmil/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "drmil/dro.hpp"
#include "drmil/reference.hpp"

namespace drmil {

namespace {

std::vector<double> random_scores(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> f(n);
  for (double& v : f) v = unif(rng);
  return f;
}

// Closed-form equivalence on interior bags: the chi-square robust value must
// equal mean + sqrt(lambda Var/n) exactly.
CheckResult check_interior_equivalence(const VerifyOptions& opt) {
  CheckResult res{"chi2_interior_equivalence", false, {}};
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<int> size(4, 64);
  double max_gap = 0.0;
  int used = 0;
  for (int b = 0; b < opt.interior_bags; ++b) {
    const auto f = random_scores(rng, size(rng));
    if (variance(f) <= 0.0 || !interior_condition(f, opt.lambda)) continue;
    const RobustWeights w = chi2_robust_weights(f, opt.lambda);
    const double expected =
        variance_regularized_value(f, std::sqrt(opt.lambda));
    max_gap = std::max(max_gap,
                       std::abs(w.value + opt.fault_bias - expected));
    ++used;
  }
  res.passed = used > 0 && max_gap <= 1e-9;
  res.details = {{"bags", opt.interior_bags},
                 {"interior_bags_used", used},
                 {"max_gap", max_gap},
                 {"tolerance", 1e-9}};
  return res;
}

// Small-n sandwich against the independent reference solvers, for both
// divergences and with clipped chi-square cases included.
CheckResult check_oracle_equivalence(const VerifyOptions& opt) {
  CheckResult res{"oracle_equivalence", false, {}};
  std::mt19937_64 rng(opt.seed + 1);
  std::uniform_int_distribution<int> size(2, 5);
  const double lambdas[] = {opt.lambda, 0.1, 0.5, 2.0, 8.0};
  std::uniform_int_distribution<int> pick_lambda(0, 4);
  double worst = 0.0;
  int non_interior = 0;
  bool all_ok = true;
  for (int b = 0; b < opt.oracle_bags; ++b) {
    const auto f = random_scores(rng, size(rng));
    const double lambda = lambdas[pick_lambda(rng)];

    const RobustWeights cw = chi2_robust_weights(f, lambda);
    if (!cw.interior) ++non_interior;
    const auto cb = reference::chi2_bounds(f, lambda);
    const double cv = cw.value + opt.fault_bias;
    const bool chi_ok = reference::verify_chi2_witness(f, lambda, cw.p, 1e-9) &&
                        cv >= cb.lower - 1e-5 && cb.upper - cv <= 1e-5;
    worst = std::max({worst, std::abs(cv - cb.lower), cb.upper - cv});

    const RobustWeights kw = kl_robust_weights(f, lambda);
    const auto kb = reference::kl_bounds(f, lambda);
    const double kv = kw.value + opt.fault_bias;
    const bool kl_ok = reference::verify_kl_witness(f, lambda, kw.p, 1e-9) &&
                       kv >= kb.lower - 1e-5 && kb.upper - kv <= 1e-5;
    worst = std::max(worst, kb.upper - kv);
    if (!chi_ok || !kl_ok) all_ok = false;
  }
  res.passed = all_ok;
  res.details = {{"bags", opt.oracle_bags},
                 {"non_interior_chi2_cases", non_interior},
                 {"worst_enclosure_gap", worst},
                 {"tolerance", 1e-5}};
  return res;
}

CheckResult check_probability_bound(const VerifyOptions& opt) {
  CheckResult res{"theorem_probability_bound", false, {}};
  const TheoremCheckReport rep = theorem1_probability_check(
      opt.probability_n, opt.sigma_sq, opt.lambda, opt.probability_trials,
      opt.seed + 2);
  const double gap = rep.empirical_gap + std::abs(opt.fault_bias);
  res.passed = rep.passed && gap <= 1e-9;
  res.details = {{"n", rep.n},
                 {"sigma_sq", rep.sigma_sq},
                 {"trials", rep.trials},
                 {"bound_rhs", rep.bound_rhs},
                 {"empirical_frequency", rep.empirical_frequency},
                 {"condition_held", rep.condition_held},
                 {"max_equivalence_gap", rep.empirical_gap}};
  return res;
}

// Second-order expansion of the KL robust value for small lambda/n.
CheckResult check_kl_expansion(const VerifyOptions& opt) {
  CheckResult res{"kl_expansion", false, {}};
  std::mt19937_64 rng(opt.seed + 3);
  std::uniform_int_distribution<int> size(4, 64);
  std::uniform_real_distribution<double> log_ratio(-6.0, -3.0);
  double worst_ratio = 0.0;
  int used = 0;
  for (int b = 0; b < opt.expansion_bags; ++b) {
    const auto f = random_scores(rng, size(rng));
    const double var = variance(f);
    if (var < 0.01) continue;
    const double n = static_cast<double>(f.size());
    const double ratio = std::pow(10.0, log_ratio(rng));  // lambda/n
    const double lambda = ratio * n;
    const RobustWeights w = kl_robust_weights(f, lambda);
    const double k3 = third_central_moment(f);
    const double approx = mean(f) + std::sqrt(2.0 * lambda * var / n) +
                          (lambda / (3.0 * n)) * k3 / var;
    const double bound = 10.0 * std::pow(ratio, 1.5);
    worst_ratio = std::max(
        worst_ratio, std::abs(w.value + opt.fault_bias - approx) / bound);
    ++used;
  }
  res.passed = used > 0 && worst_ratio <= 1.0;
  res.details = {{"bags", opt.expansion_bags},
                 {"bags_used", used},
                 {"worst_error_over_bound", worst_ratio}};
  return res;
}

// Bulk feasibility, dominance, monotonicity and value-consistency sweep.
CheckResult check_feasibility(const VerifyOptions& opt) {
  CheckResult res{"feasibility_and_ordering", false, {}};
  std::mt19937_64 rng(opt.seed + 4);
  std::uniform_int_distribution<int> size(2, 64);
  std::uniform_real_distribution<double> log_lambda(-6.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  bool ok = true;
  double worst_div_excess = 0.0;
  for (int t = 0; t < opt.feasibility_draws && ok; ++t) {
    const int n = size(rng);
    std::vector<double> f(n);
    if (unif(rng) < 0.01) {
      std::fill(f.begin(), f.end(), unif(rng));  // degenerate bag
    } else {
      for (double& v : f) v = unif(rng);
    }
    const double lambda = std::pow(10.0, log_lambda(rng));
    const double fbar = mean(f);
    const double fmax = *std::max_element(f.begin(), f.end());

    for (const Divergence div : {Divergence::kChiSquare, Divergence::kKl}) {
      DroConfig cfg;
      cfg.lambda = lambda;
      cfg.divergence = div;
      const RobustWeights w = robust_weights(f, cfg);
      double sum = 0.0, dotv = 0.0, lowest = 0.0;
      for (std::size_t i = 0; i < w.p.size(); ++i) {
        sum += w.p[i];
        dotv += w.p[i] * f[i];
        lowest = std::min(lowest, w.p[i]);
      }
      const double divergence =
          div == Divergence::kChiSquare ? chi2_divergence_from_uniform(w.p)
                                        : kl_divergence_from_uniform(w.p);
      const double excess = divergence - lambda / n;
      worst_div_excess = std::max(worst_div_excess, excess);
      if (std::abs(sum - 1.0) > 1e-12 || lowest < -1e-12 || excess > 1e-10 ||
          std::abs(dotv - w.value) > 1e-12 ||
          w.value < fbar - 1e-12 || w.value > fmax + 1e-12) {
        ok = false;
        res.details["failed_at_draw"] = t;
        break;
      }
      // Monotonicity in lambda.
      cfg.lambda = 2.0 * lambda;
      if (robust_weights(f, cfg).value < w.value - 1e-12) {
        ok = false;
        res.details["failed_monotonicity_at_draw"] = t;
        break;
      }
    }
  }
  res.passed = ok;
  res.details["draws"] = opt.feasibility_draws;
  res.details["worst_divergence_excess"] = worst_div_excess;
  return res;
}

CheckResult check_root_residual(const VerifyOptions& opt) {
  CheckResult res{"kl_root_residual", false, {}};
  std::mt19937_64 rng(opt.seed + 5);
  std::uniform_int_distribution<int> size(2, 64);
  std::uniform_real_distribution<double> log_lambda(-6.0, -1.0);
  double worst = 0.0;
  int with_root = 0;
  for (int t = 0; t < opt.root_draws; ++t) {
    const auto f = random_scores(rng, size(rng));
    const double lambda = std::pow(10.0, log_lambda(rng));
    const RobustWeights w = kl_robust_weights(f, lambda);
    if (!w.beta_star) continue;
    ++with_root;
    const double beta = *w.beta_star;
    const double residual = std::abs(
        beta * log_mgf_prime(beta, f) - log_mgf(beta, f) -
        lambda / static_cast<double>(f.size()));
    worst = std::max(worst, residual);
  }
  res.passed = with_root > 0 && worst <= 1e-10;
  res.details = {{"draws", opt.root_draws},
                 {"draws_with_root", with_root},
                 {"worst_residual", worst},
                 {"tolerance", 1e-10}};
  return res;
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  out.push_back(check_interior_equivalence(opt));
  out.push_back(check_oracle_equivalence(opt));
  out.push_back(check_probability_bound(opt));
  out.push_back(check_kl_expansion(opt));
  out.push_back(check_feasibility(opt));
  out.push_back(check_root_residual(opt));
  return out;
}

nlohmann::json verification_report(const VerifyOptions& opt,
                                   const std::vector<CheckResult>& results) {
  nlohmann::json checks = nlohmann::json::array();
  bool all = true;
  for (const CheckResult& r : results) {
    checks.push_back({{"name", r.name}, {"passed", r.passed},
                      {"details", r.details}});
    all = all && r.passed;
  }
  return {{"options",
           {{"lambda", opt.lambda},
            {"interior_bags", opt.interior_bags},
            {"oracle_bags", opt.oracle_bags},
            {"expansion_bags", opt.expansion_bags},
            {"feasibility_draws", opt.feasibility_draws},
            {"root_draws", opt.root_draws},
            {"probability_trials", opt.probability_trials},
            {"probability_n", opt.probability_n},
            {"sigma_sq", opt.sigma_sq},
            {"seed", opt.seed},
            {"fault_bias", opt.fault_bias}}},
          {"checks", checks},
          {"all_passed", all}};
}

}  // namespace drmil
