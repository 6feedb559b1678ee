#ifndef DRMIL_REFERENCE_HPP
#define DRMIL_REFERENCE_HPP

#include <span>
#include <vector>

namespace drmil::reference {

// Independent cross-check solvers for the robust bag likelihood. None of this
// shares code or algorithms with the production solvers: the chi-square route
// runs a Euclidean simplex projection inside a dual bisection, the KL route
// sandwiches the optimum between a weak-duality bound and a feasible witness.

// Euclidean projection onto the probability simplex (sort-and-threshold).
std::vector<double> project_to_simplex(std::span<const double> y);

// Certified enclosure of max p.f over the chi-square ball around uniform.
// lower is attained by an explicitly feasible p, upper is a Lagrangian bound,
// and upper - lower is typically ~1e-12.
struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

Bounds chi2_bounds(std::span<const double> f, double lambda);

// Certified enclosure of max p.f over the KL ball around uniform. The upper
// bound is min_alpha alpha*rho + alpha*log-mean-exp(f/alpha) (weak duality via
// Jensen); the lower bound is the best of several feasible candidates found
// by line searches, so the enclosure may be loose. Pair with a feasible
// witness (verify_kl_witness) to certify a solver value.
Bounds kl_bounds(std::span<const double> f, double lambda);

// True iff p is a probability vector within tol and its divergence from
// uniform is at most lambda/n + tol.
bool verify_chi2_witness(std::span<const double> f, double lambda,
                         std::span<const double> p, double tol);
bool verify_kl_witness(std::span<const double> f, double lambda,
                       std::span<const double> p, double tol);

}  // namespace drmil::reference

#endif  // DRMIL_REFERENCE_HPP
