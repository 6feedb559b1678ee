#include "drmil/dro.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace drmil {

namespace {

void check_scores(std::span<const double> f, double lambda) {
  if (f.empty()) throw std::invalid_argument("score sequence is empty");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  for (double v : f) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("non-finite score");
    }
  }
}

RobustWeights uniform_weights(std::size_t n, double value) {
  RobustWeights w;
  w.p.assign(n, 1.0 / static_cast<double>(n));
  w.value = value;
  w.interior = true;
  return w;
}

}  // namespace

double mean(std::span<const double> f) {
  return std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
}

double variance(std::span<const double> f) {
  const double m = mean(f);
  double s = 0.0;
  for (double v : f) s += (v - m) * (v - m);
  return s / static_cast<double>(f.size());
}

double third_central_moment(std::span<const double> f) {
  const double m = mean(f);
  double s = 0.0;
  for (double v : f) s += (v - m) * (v - m) * (v - m);
  return s / static_cast<double>(f.size());
}

double log_mgf(double beta, std::span<const double> f) {
  double hi = -INFINITY;
  for (double v : f) hi = std::max(hi, beta * v);
  double s = 0.0;
  for (double v : f) s += std::exp(beta * v - hi);
  return hi + std::log(s / static_cast<double>(f.size()));
}

double log_mgf_prime(double beta, std::span<const double> f) {
  double hi = -INFINITY;
  for (double v : f) hi = std::max(hi, beta * v);
  double num = 0.0, den = 0.0;
  for (double v : f) {
    const double w = std::exp(beta * v - hi);
    num += v * w;
    den += w;
  }
  return num / den;
}

double chi2_divergence_from_uniform(std::span<const double> p) {
  const double n = static_cast<double>(p.size());
  double s = 0.0;
  for (double v : p) s += (v - 1.0 / n) * (v - 1.0 / n);
  return n * s;
}

double kl_divergence_from_uniform(std::span<const double> p) {
  const double n = static_cast<double>(p.size());
  double s = 0.0;
  for (double v : p) {
    if (v > 0.0) s += v * std::log(n * v);
  }
  return s;
}

bool interior_condition(std::span<const double> f, double lambda) {
  check_scores(f, lambda);
  const double n = static_cast<double>(f.size());
  const double var = variance(f);
  if (var <= 0.0) {
    throw std::invalid_argument("interior_condition needs Var_n(f) > 0");
  }
  const double m = mean(f);
  const double fmin = *std::min_element(f.begin(), f.end());
  return std::sqrt(lambda) * (fmin - m) / std::sqrt(n * var) >= -1.0;
}

RobustWeights chi2_robust_weights(std::span<const double> f, double lambda,
                                  double variance_floor) {
  check_scores(f, lambda);
  const std::size_t n = f.size();
  const double nd = static_cast<double>(n);
  const double fbar = mean(f);
  const double var = variance(f);
  if (lambda == 0.0 || var <= 0.0 || var < variance_floor || n == 1) {
    return uniform_weights(n, fbar);
  }

  if (interior_condition(f, lambda)) {
    RobustWeights w;
    w.p.resize(n);
    const double denom = nd * std::sqrt(nd * var);
    for (std::size_t i = 0; i < n; ++i) {
      w.p[i] = std::max(
          0.0, 1.0 / nd + std::sqrt(lambda) * (f[i] - fbar) / denom);
    }
    w.value = fbar + std::sqrt(lambda * var / nd);
    w.interior = true;
    return w;
  }

  // Clipped case: the ball is wide enough that the closed form leaves the
  // simplex. The optimizer zeroes out the lowest-scored instances, so try
  // each ascending-sorted prefix as the zero set, solve the reduced problem
  // in closed form, and keep the best feasible candidate.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });

  // Suffix sums over the sorted order for O(1) reduced-problem moments.
  std::vector<double> suf(n + 1, 0.0), suf2(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    suf[i] = suf[i + 1] + f[order[i]];
    suf2[i] = suf2[i + 1] + f[order[i]] * f[order[i]];
  }

  RobustWeights best;
  best.value = -INFINITY;
  for (std::size_t z = 1; z < n; ++z) {
    const double zd = static_cast<double>(z);
    const double md = nd - zd;
    // Ball budget left for the support after paying for the zeroed entries.
    const double r2 = (lambda - zd - zd * zd / md) / (nd * nd);
    if (r2 < 0.0) continue;
    const double mean_s = suf[z] / md;
    const double var_s =
        std::max(0.0, suf2[z] / md - mean_s * mean_s);
    RobustWeights cand;
    cand.p.assign(n, 0.0);
    cand.interior = false;
    if (var_s < variance_floor) {
      for (std::size_t i = z; i < n; ++i) cand.p[order[i]] = 1.0 / md;
      cand.value = mean_s;
    } else {
      const double scale = std::sqrt(r2) / std::sqrt(md * var_s);
      double lowest = INFINITY;
      for (std::size_t i = z; i < n; ++i) {
        const double pi = 1.0 / md + scale * (f[order[i]] - mean_s);
        cand.p[order[i]] = pi;
        lowest = std::min(lowest, pi);
      }
      if (lowest < -1e-12) continue;  // reduced closed form infeasible
      for (double& pi : cand.p) pi = std::max(pi, 0.0);
      cand.value = mean_s + std::sqrt(r2 * md * var_s);
    }
    if (cand.value > best.value) best = std::move(cand);
  }
  if (!std::isfinite(best.value)) {
    // Unreachable for valid inputs: z = n-1 always yields r2 >= 0 once the
    // interior condition failed (failure requires lambda > n Var >= ...),
    // but guard against pathological rounding.
    throw std::runtime_error("chi2_robust_weights: no feasible clipped candidate");
  }
  return best;
}

RobustWeights kl_robust_weights(std::span<const double> f, double lambda,
                                double variance_floor) {
  check_scores(f, lambda);
  const std::size_t n = f.size();
  const double nd = static_cast<double>(n);
  const double fbar = mean(f);
  const double var = variance(f);
  if (lambda == 0.0 || var <= 0.0 || var < variance_floor || n == 1) {
    return uniform_weights(n, fbar);
  }
  const double rho = lambda / nd;

  // The KL distance of the tilted family saturates at log(n/c) where c is the
  // multiplicity of the maximum; beyond that the argmax vertex lies inside
  // the ball and is optimal.
  const double fmax = *std::max_element(f.begin(), f.end());
  const std::size_t c = static_cast<std::size_t>(
      std::count(f.begin(), f.end(), fmax));
  const double saturation = std::log(nd / static_cast<double>(c));
  auto constraint = [&](double beta) {
    return beta * log_mgf_prime(beta, f) - log_mgf(beta, f);
  };
  if (rho >= saturation) {
    RobustWeights w;
    w.p.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (f[i] == fmax) w.p[i] = 1.0 / static_cast<double>(c);
    }
    w.value = fmax;
    w.interior = true;
    return w;
  }

  // Bracket the root of the strictly increasing constraint residual.
  double hi = 1.0;
  while (constraint(hi) < rho) {
    hi *= 2.0;
    if (hi > 1e18) {
      throw std::runtime_error("kl_robust_weights: failed to bracket beta");
    }
  }
  double lo = 0.0;
  double beta = hi;
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    beta = 0.5 * (lo + hi);
    const double g = constraint(beta);
    if (std::abs(g - rho) <= 1e-12) {
      converged = true;
      break;
    }
    if (g < rho) {
      lo = beta;
    } else {
      hi = beta;
    }
  }
  if (!converged && std::abs(constraint(beta) - rho) > 1e-10) {
    throw std::runtime_error("kl_robust_weights: bisection did not converge");
  }

  RobustWeights w;
  w.p.resize(n);
  double shift = -INFINITY;
  for (double v : f) shift = std::max(shift, beta * v);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w.p[i] = std::exp(beta * f[i] - shift);
    z += w.p[i];
  }
  for (double& pi : w.p) pi /= z;
  w.value = log_mgf_prime(beta, f);
  w.beta_star = beta;
  w.interior = true;
  return w;
}

RobustWeights robust_weights(std::span<const double> f, const DroConfig& cfg) {
  return cfg.divergence == Divergence::kChiSquare
             ? chi2_robust_weights(f, cfg.lambda, cfg.variance_floor)
             : kl_robust_weights(f, cfg.lambda, cfg.variance_floor);
}

double variance_regularized_value(std::span<const double> f, double c) {
  if (f.empty()) throw std::invalid_argument("score sequence is empty");
  if (c < 0.0) throw std::invalid_argument("C must be >= 0");
  const double nd = static_cast<double>(f.size());
  return mean(f) + c * std::sqrt(variance(f) / nd);
}

TheoremCheckReport theorem1_probability_check(int n, double sigma_sq_target,
                                              double lambda, int trials,
                                              std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  if (trials < 100) throw std::invalid_argument("trials must be >= 100");
  if (!(sigma_sq_target > 0.0) || sigma_sq_target > 0.25) {
    throw std::invalid_argument(
        "sigma_sq_target must lie in (0, 0.25] for scores in [0,1]");
  }
  TheoremCheckReport rep;
  rep.n = n;
  rep.lambda = lambda;
  rep.sigma_sq = sigma_sq_target;
  rep.trials = trials;
  rep.bound_rhs = 1.0 - std::exp(-7.0 * n * sigma_sq_target / 20.0);

  const double sigma = std::sqrt(sigma_sq_target);
  const double floor_n =
      (lambda / sigma_sq_target) * std::max(8.0 * sigma, 44.0);
  rep.condition_held = static_cast<double>(n) >= std::max(2.0, floor_n);

  // Two-point equiprobable scores 0.5 +- sigma have population variance
  // exactly sigma^2 and stay inside [0,1].
  const double a = 0.5 - sigma;
  const double b = 0.5 + sigma;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> f(static_cast<std::size_t>(n));
  long hits = 0;
  double worst_gap = 0.0;
  for (int t = 0; t < trials; ++t) {
    for (auto& v : f) v = coin(rng) ? b : a;
    const double var = variance(f);
    if (var >= sigma_sq_target / 43.0) ++hits;
    if (var > 0.0 && interior_condition(f, lambda)) {
      const RobustWeights w = chi2_robust_weights(f, lambda);
      const double gap =
          std::abs(w.value - variance_regularized_value(f, std::sqrt(lambda)));
      worst_gap = std::max(worst_gap, gap);
    }
  }
  rep.empirical_gap = worst_gap;
  rep.empirical_frequency = static_cast<double>(hits) / trials;
  const double se =
      std::sqrt(std::max(rep.bound_rhs * (1.0 - rep.bound_rhs), 1e-12) /
                trials);
  rep.passed = !rep.condition_held ||
               rep.empirical_frequency >= rep.bound_rhs - 3.0 * se;
  return rep;
}

}  // namespace drmil
