#ifndef SPINGLASS_RMT_HPP
#define SPINGLASS_RMT_HPP

#include <functional>

#include "spinglass/hamiltonian.hpp"
#include "spinglass/rng.hpp"

namespace spg {

// G(gamma) = gamma - (1/2N) log det(gamma I - A) through the eigenvalues of A.
double g_function(const Vec& eigs, double gamma, int order = 0);

// Unique root of G' above the spectrum.
double gamma_star(const Vec& eigs, double tol = 1e-12);

// Laplace-method prediction log Z_{N,2} = log sqrt(2/G''(g*)) - (N/2) log(2e) + N G(g*).
double z2_prediction(const Vec& eigs, int n);

struct Deg2Analysis {
  Vec eigs;              // eigenvalues of A = (1/2) Hess H(0), ascending
  double gamma_star = 0.0;
  double gamma0 = 0.0;   // (1 + xi''(0))/2
  double g = 0.0, g1 = 0.0, g2 = 0.0;  // G, G', G'' at gamma_star
  double logz2 = 0.0;
};

Deg2Analysis analyze_deg2(const Hamiltonian& h);

struct LogZPrediction {
  double value = 0.0;
  bool valid = false;  // shifted Hessian positive definite (the high-probability event)
};

// Strict-RS full prediction N xi(1)/2 + N xi''(0)/4 + log(1-xi''(0))/2 - logdet(...)/2.
LogZPrediction logz_full_prediction(const Hamiltonian& h);

struct CovPrediction {
  Mat cov;
  double trace_over_n = 0.0;
  bool valid = false;
};

// Gaussian heuristic ((1 + xi''(0)) I - Hess H(0))^{-1}.
CovPrediction cov_prediction(const Hamiltonian& h);

// Quadrature against the semicircle density (1/2pi) sqrt(4 - x^2) on [-2,2].
double semicircle_integral(const std::function<double(double)>& f, int nodes = 2000);

struct McPartition {
  double log_estimate = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // 200-fold bootstrap, central 95%
};

McPartition mc_partition(const Hamiltonian& h, long long samples, Rng& rng);

struct OpnormEstimate {
  double value = 0.0;
  bool converged = false;
};

// Power iteration on the empirical second-moment matrix of the given states (columns).
OpnormEstimate second_moment_opnorm(const Mat& states, double tol = 1e-8, int max_iters = 10000);

}  // namespace spg

#endif
