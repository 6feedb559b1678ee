#include "drmil/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace drmil::reference {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double dist2_from_uniform(std::span<const double> p) {
  const double c = 1.0 / static_cast<double>(p.size());
  double s = 0.0;
  for (double v : p) s += (v - c) * (v - c);
  return s;
}

double kl_from_uniform(std::span<const double> p) {
  const double n = static_cast<double>(p.size());
  double s = 0.0;
  for (double v : p) {
    if (v > 0.0) s += v * std::log(n * v);
  }
  return s;
}

double log_mean_exp(std::span<const double> f, double inv_alpha) {
  double hi = -INFINITY;
  for (double v : f) hi = std::max(hi, v * inv_alpha);
  double s = 0.0;
  for (double v : f) s += std::exp(v * inv_alpha - hi);
  return hi + std::log(s / static_cast<double>(f.size()));
}

}  // namespace

std::vector<double> project_to_simplex(std::span<const double> y) {
  const std::size_t n = y.size();
  std::vector<double> u(y.begin(), y.end());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, tau = 0.0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    css += u[i];
    const double cand = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - cand > 0.0) {
      k = i + 1;
      tau = cand;
    }
  }
  (void)k;
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = std::max(y[i] - tau, 0.0);
  return p;
}

Bounds chi2_bounds(std::span<const double> f, double lambda) {
  const std::size_t n = f.size();
  const double nd = static_cast<double>(n);
  const double r2 = lambda / (nd * nd);
  std::vector<double> center(n, 1.0 / nd);

  // For a fixed multiplier mu the inner maximizer of f.p - mu||p - c||^2 over
  // the simplex is the projection of c + f/(2 mu); shrink mu until the ball
  // constraint binds.
  auto inner = [&](double mu) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = center[i] + f[i] / (2.0 * mu);
    return project_to_simplex(y);
  };
  auto upper_at = [&](double mu, std::span<const double> p) {
    return dot(p, f) - mu * dist2_from_uniform(p) + mu * r2;
  };

  const double mu_tiny = 1e-14;
  std::vector<double> p = inner(mu_tiny);
  if (dist2_from_uniform(p) <= r2) {
    // Ball is slack; the simplex vertex at the argmax is optimal.
    Bounds b;
    b.lower = dot(p, f);
    b.upper = upper_at(mu_tiny, p);
    return b;
  }
  double lo = mu_tiny, hi = 1.0;
  while (dist2_from_uniform(inner(hi)) > r2) {
    hi *= 2.0;
    if (hi > 1e18) throw std::runtime_error("chi2_bounds: mu bracket failed");
  }
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dist2_from_uniform(inner(mid)) > r2) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  p = inner(hi);
  Bounds b;
  b.upper = upper_at(hi, p);
  // Scale the step back onto the ball to make the candidate exactly feasible.
  double d2 = dist2_from_uniform(p);
  if (d2 > r2 && d2 > 0.0) {
    const double scale = std::sqrt(r2 / d2);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = center[i] + scale * (p[i] - center[i]);
    }
  }
  b.lower = dot(p, f);
  return b;
}

Bounds kl_bounds(std::span<const double> f, double lambda) {
  const std::size_t n = f.size();
  const double nd = static_cast<double>(n);
  const double rho = lambda / nd;

  // Weak duality: for every alpha > 0 and feasible p, Jensen gives
  // f.p <= alpha*KL(p||u) + alpha*log E_u[exp(f/alpha)] <= alpha*rho + ...
  auto dual = [&](double alpha) {
    return alpha * rho + alpha * log_mean_exp(f, 1.0 / alpha);
  };
  double lo = 1e-9, hi = 1e9;
  for (int it = 0; it < 400; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (dual(m1) < dual(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  Bounds b;
  b.upper = dual(0.5 * (lo + hi));

  // Feasible lower bound: line searches from uniform toward each vertex,
  // keeping the largest feasible step (KL is convex along the segment).
  std::vector<double> uniform(n, 1.0 / nd);
  b.lower = dot(uniform, f);
  for (std::size_t v = 0; v < n; ++v) {
    double t_lo = 0.0, t_hi = 1.0;
    auto point = [&](double t) {
      std::vector<double> p(uniform);
      for (std::size_t i = 0; i < n; ++i) p[i] *= (1.0 - t);
      p[v] += t;
      return p;
    };
    if (kl_from_uniform(point(1.0)) <= rho) {
      t_lo = 1.0;
    } else {
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (t_lo + t_hi);
        if (kl_from_uniform(point(mid)) <= rho) {
          t_lo = mid;
        } else {
          t_hi = mid;
        }
      }
    }
    b.lower = std::max(b.lower, dot(point(t_lo), f));
  }
  return b;
}

bool verify_chi2_witness(std::span<const double> f, double lambda,
                         std::span<const double> p, double tol) {
  if (p.size() != f.size()) return false;
  double sum = 0.0;
  for (double v : p) {
    if (v < -tol) return false;
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) return false;
  const double nd = static_cast<double>(p.size());
  return nd * dist2_from_uniform(p) <= lambda / nd + tol;
}

bool verify_kl_witness(std::span<const double> f, double lambda,
                       std::span<const double> p, double tol) {
  if (p.size() != f.size()) return false;
  double sum = 0.0;
  for (double v : p) {
    if (v < -tol) return false;
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) return false;
  return kl_from_uniform(p) <= lambda / static_cast<double>(p.size()) + tol;
}

}  // namespace drmil::reference
