#include "drmil/dro.hpp"

#include <algorithm>
#include <stdexcept>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "drmil/reference.hpp"

using namespace drmil;

namespace {

std::vector<double> uniform_scores(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> f(n);
  for (double& v : f) v = unif(rng);
  return f;
}

}  // namespace

TEST_CASE("chi2: constant scores return uniform weights") {
  const std::vector<double> f{0.5, 0.5, 0.5};
  const RobustWeights w = chi2_robust_weights(f, 0.01);
  CHECK(w.value == doctest::Approx(0.5).epsilon(1e-12));
  for (double p : w.p) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(w.interior);
}

TEST_CASE("chi2: interior closed form on the skewed four-score bag") {
  const std::vector<double> f{0.1, 0.1, 0.1, 0.9};
  const RobustWeights w = chi2_robust_weights(f, 0.01);
  // mean 0.3, Var 0.12: value = 0.3 + sqrt(0.01 * 0.12 / 4), independently
  // confirmed by the projection-based reference solver.
  CHECK(w.value == doctest::Approx(0.3173205080756888).epsilon(1e-12));
  CHECK(w.interior);
  CHECK(w.p[0] == doctest::Approx(0.2427831216351297).epsilon(1e-10));
  CHECK(w.p[1] == doctest::Approx(0.2427831216351297).epsilon(1e-10));
  CHECK(w.p[2] == doctest::Approx(0.2427831216351297).epsilon(1e-10));
  CHECK(w.p[3] == doctest::Approx(0.2716506350946109).epsilon(1e-10));

  const auto bounds = reference::chi2_bounds(f, 0.01);
  CHECK(w.value >= bounds.lower - 1e-9);
  CHECK(bounds.upper - w.value <= 1e-9);
}

TEST_CASE("chi2: wide ball clips to the best vertex") {
  const std::vector<double> f{0.0, 1.0};
  CHECK_FALSE(interior_condition(f, 4.0));
  const RobustWeights w = chi2_robust_weights(f, 4.0);
  CHECK(w.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.p[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(w.p[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(w.interior);
}

TEST_CASE("interior_condition matches its defining inequality") {
  const std::vector<double> f{0.1, 0.1, 0.1, 0.9};
  // min term = sqrt(0.01)(0.1-0.3)/sqrt(4*0.12) ~ -0.0289
  CHECK(interior_condition(f, 0.01));
  CHECK(interior_condition(f, 0.0));  // zero numerator
  CHECK_FALSE(interior_condition(std::vector<double>{0.0, 1.0}, 4.0));
  CHECK_THROWS_AS(interior_condition(std::vector<double>{0.3, 0.3}, 0.01),
                  std::invalid_argument);
}

TEST_CASE("kl: degenerate cases return the mean under uniform weights") {
  const std::vector<double> constant{0.4, 0.4, 0.4};
  RobustWeights w = kl_robust_weights(constant, 0.5);
  CHECK(w.value == doctest::Approx(0.4).epsilon(1e-12));
  CHECK_FALSE(w.beta_star.has_value());

  const std::vector<double> f{0.2, 0.7, 0.4};
  w = kl_robust_weights(f, 0.0);
  CHECK(w.value == doctest::Approx((0.2 + 0.7 + 0.4) / 3).epsilon(1e-12));
  for (double p : w.p) CHECK(p == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("kl: tilted optimum on the skewed four-score bag") {
  const std::vector<double> f{0.1, 0.1, 0.1, 0.9};
  const RobustWeights w = kl_robust_weights(f, 0.01);
  // Frozen from two independent routes (constraint-residual bisection and the
  // weak-duality bound minimized over its multiplier), which agree to 1e-10.
  CHECK(w.value == doctest::Approx(0.3248159599).epsilon(1e-8));
  REQUIRE(w.beta_star.has_value());
  CHECK(*w.beta_star == doctest::Approx(0.19900543).epsilon(1e-6));

  // Second-order expansion with kappa3 = mean((f - mean)^3) = 0.048.
  const double var = variance(f);
  const double k3 = third_central_moment(f);
  CHECK(k3 == doctest::Approx(0.048).epsilon(1e-12));
  const double approx = mean(f) + std::sqrt(2.0 * 0.01 * var / 4.0) +
                        (0.01 / 12.0) * k3 / var;
  CHECK(std::abs(w.value - approx) <= 10.0 * std::pow(0.01 / 4.0, 1.5));

  const auto bounds = reference::kl_bounds(f, 0.01);
  CHECK(reference::verify_kl_witness(f, 0.01, w.p, 1e-9));
  CHECK(bounds.upper - w.value <= 1e-9);
  CHECK(w.value >= bounds.lower - 1e-9);
}

TEST_CASE("kl: ball wide enough to reach the argmax vertex saturates") {
  const std::vector<double> f{0.2, 0.8};
  // rho = 0.7 >= log 2, so the vertex at 0.8 is feasible and optimal.
  const RobustWeights w = kl_robust_weights(f, 1.4);
  CHECK(w.value == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(w.p[0] == doctest::Approx(0.0));
  CHECK(w.p[1] == doctest::Approx(1.0));
  CHECK_FALSE(w.beta_star.has_value());
}

TEST_CASE("variance_regularized_value and the closed-form bridge") {
  CHECK(variance_regularized_value(std::vector<double>{0.5, 0.5, 0.5}, 3.0) ==
        doctest::Approx(0.5).epsilon(1e-12));
  const std::vector<double> f{0.1, 0.1, 0.1, 0.9};
  CHECK(variance_regularized_value(f, 0.0) ==
        doctest::Approx(0.3).epsilon(1e-12));
  // C = sqrt(lambda) reproduces the interior chi-square value.
  const double v = variance_regularized_value(f, std::sqrt(0.01));
  CHECK(v == doctest::Approx(0.3173205080756888).epsilon(1e-12));
  CHECK(std::abs(v - chi2_robust_weights(f, 0.01).value) <= 1e-9);
}

TEST_CASE("solver input validation") {
  CHECK_THROWS_AS(chi2_robust_weights(std::vector<double>{}, 0.01),
                  std::invalid_argument);
  CHECK_THROWS_AS(chi2_robust_weights(std::vector<double>{0.1, 0.2}, -1.0),
                  std::invalid_argument);
  const std::vector<double> bad{0.1, std::nan("")};
  CHECK_THROWS_AS(chi2_robust_weights(bad, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(kl_robust_weights(bad, 0.01), std::invalid_argument);
}

TEST_CASE("both solvers stay feasible, dominated and monotone in lambda") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> size(2, 64);
  std::uniform_real_distribution<double> log_lambda(-6.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const auto f = uniform_scores(rng, size(rng));
    const double lambda = std::pow(10.0, log_lambda(rng));
    const double fbar = mean(f);
    const double fmax = *std::max_element(f.begin(), f.end());
    for (const Divergence div : {Divergence::kChiSquare, Divergence::kKl}) {
      DroConfig cfg;
      cfg.lambda = lambda;
      cfg.divergence = div;
      const RobustWeights w = robust_weights(f, cfg);
      double sum = 0.0, dot = 0.0;
      for (std::size_t i = 0; i < w.p.size(); ++i) {
        REQUIRE(w.p[i] >= -1e-12);
        sum += w.p[i];
        dot += w.p[i] * f[i];
      }
      REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-12));
      REQUIRE(std::abs(dot - w.value) <= 1e-12);
      const double d = div == Divergence::kChiSquare
                           ? chi2_divergence_from_uniform(w.p)
                           : kl_divergence_from_uniform(w.p);
      REQUIRE(d <= lambda / static_cast<double>(f.size()) + 1e-10);
      REQUIRE(w.value >= fbar - 1e-12);
      REQUIRE(w.value <= fmax + 1e-12);
      cfg.lambda = 2.0 * lambda;
      REQUIRE(robust_weights(f, cfg).value >= w.value - 1e-12);
    }
  }
}

TEST_CASE("theorem-1 equivalence holds on every interior draw") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> size(4, 64);
  int used = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto f = uniform_scores(rng, size(rng));
    if (variance(f) <= 0.0 || !interior_condition(f, 0.01)) continue;
    ++used;
    const double lhs = chi2_robust_weights(f, 0.01).value;
    const double rhs = variance_regularized_value(f, 0.1);
    REQUIRE(std::abs(lhs - rhs) <= 1e-9);
  }
  CHECK(used > 900);
}

TEST_CASE("solvers sit inside the independent reference enclosures") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> size(2, 6);
  const double lambdas[] = {0.01, 0.1, 0.5, 2.0, 8.0};
  std::uniform_int_distribution<int> pick(0, 4);
  int clipped = 0;
  for (int t = 0; t < 300; ++t) {
    const auto f = uniform_scores(rng, size(rng));
    const double lambda = lambdas[pick(rng)];

    const RobustWeights cw = chi2_robust_weights(f, lambda);
    if (!cw.interior) ++clipped;
    const auto cb = reference::chi2_bounds(f, lambda);
    REQUIRE(reference::verify_chi2_witness(f, lambda, cw.p, 1e-9));
    REQUIRE(cw.value >= cb.lower - 1e-9);
    REQUIRE(cb.upper - cw.value <= 1e-7);

    const RobustWeights kw = kl_robust_weights(f, lambda);
    const auto kb = reference::kl_bounds(f, lambda);
    REQUIRE(reference::verify_kl_witness(f, lambda, kw.p, 1e-9));
    REQUIRE(kw.value >= kb.lower - 1e-9);
    REQUIRE(kb.upper - kw.value <= 1e-7);
  }
  CHECK(clipped > 20);  // the draw mix must actually exercise clipping
}

TEST_CASE("kl root residual and expansion accuracy") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> size(4, 64);
  std::uniform_real_distribution<double> log_ratio(-6.0, -3.0);
  for (int t = 0; t < 300; ++t) {
    const auto f = uniform_scores(rng, size(rng));
    const double var = variance(f);
    if (var < 0.01) continue;
    const double n = static_cast<double>(f.size());
    const double ratio = std::pow(10.0, log_ratio(rng));
    const RobustWeights w = kl_robust_weights(f, ratio * n);
    REQUIRE(w.beta_star.has_value());
    const double beta = *w.beta_star;
    REQUIRE(std::abs(beta * log_mgf_prime(beta, f) - log_mgf(beta, f) - ratio) <=
            1e-10);
    const double approx = mean(f) + std::sqrt(2.0 * ratio * var) +
                          (ratio / 3.0) * third_central_moment(f) / var;
    REQUIRE(std::abs(w.value - approx) <= 10.0 * std::pow(ratio, 1.5));
  }
}

TEST_CASE("theorem-1 probability check against the concentration bound") {
  const TheoremCheckReport rep =
      theorem1_probability_check(100, 0.25, 0.01, 10000, 7);
  CHECK(rep.condition_held);
  CHECK(rep.bound_rhs == doctest::Approx(1.0 - std::exp(-8.75)).epsilon(1e-12));
  CHECK(rep.empirical_frequency >= rep.bound_rhs - 3e-3);
  CHECK(rep.passed);
  CHECK(rep.empirical_gap <= 1e-9);

  // Below the theorem's sample floor the assertion is skipped.
  const TheoremCheckReport below =
      theorem1_probability_check(100, 0.04, 1.0, 200, 7);
  CHECK_FALSE(below.condition_held);
  CHECK(below.passed);

  CHECK_THROWS_AS(theorem1_probability_check(100, 0.0, 0.01, 1000, 7),
                  std::invalid_argument);
  CHECK_THROWS_AS(theorem1_probability_check(100, 0.3, 0.01, 1000, 7),
                  std::invalid_argument);
  CHECK_THROWS_AS(theorem1_probability_check(1, 0.25, 0.01, 1000, 7),
                  std::invalid_argument);
}
