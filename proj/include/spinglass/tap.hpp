#ifndef SPINGLASS_TAP_HPP
#define SPINGLASS_TAP_HPP

#include <vector>

#include "spinglass/hamiltonian.hpp"
#include "spinglass/mixture.hpp"

namespace spg {

// Analytic data for TAP band/energy formulas; n can be a symbolic dimension
// (no vectors required, only overlaps).
struct TapGeometry {
  MixtureFunction xi_t;  // tilted mixture (tilt folded into the linear coefficient is fine)
  double q_m = 0.0;      // R(m,m)
  double q_x = 0.0;      // R(m,x)
  double n = 0.0;        // dimension, possibly symbolic
};

// Planted context: Hamiltonian with spike x, candidate TAP point m, region half-width iota.
struct TapContext {
  Hamiltonian h;
  MixtureFunction xi;  // analytic tilted mixture for the TAP corrections
  Vec x;
  Vec m;
  double iota = 0.1;

  // Builds the planted model: disorder with mixture xi_t (linear coefficient
  // raised by t) spiked by N*xi_t(R(x, .)).
  static TapContext make(const MixtureFunction& xi, double t, int n, std::uint64_t seed,
                         const Vec& x, double iota);

  double q_m() const { return overlap(m, m); }
  double q_x() const { return overlap(m, x); }
  TapGeometry geometry() const;
  bool in_region(double q_star) const;
};

// TAP free energy H(m) + (N/2) theta(q) + (N/2) log(1-q) and its gradient.
double f_tap(const TapContext& ctx, const Vec& point);
Vec f_tap_gradient(const TapContext& ctx, const Vec& point);

struct TapSearchResult {
  Vec m;
  double residual = 0.0;
  bool converged = false;
  bool exited_region = false;
  int iterations = 0;
  std::vector<double> residual_trace;
};

TapSearchResult find_tap_point(const TapContext& ctx, const Vec& init, double tol,
                               int max_iters = 5000);

struct ConditionalLaw {
  double mean = 0.0;  // E H_TAP(sigma)
  double cov = 0.0;   // Cov(H_TAP(sigma), H_TAP(sigma'))
};

// Closed-form conditional law of the Hamiltonian given the gradient constraint at m.
ConditionalLaw conditional_law(const TapContext& ctx, const Vec& sigma, const Vec& sigma_prime);

// (1/N) E H_TAP(sigma) expressed through the overlaps R(x,sigma), R(m,sigma).
double tap_mean_over_n(const TapGeometry& g, double r_x_sigma, double r_m_sigma);

struct ConditioningOracle {
  Vec means;
  Mat cov;
  bool pseudo_inverse = false;
};

// Brute-force joint-Gaussian conditioning at N <= 8; the arbiter for conditional_law.
ConditioningOracle gaussian_conditioning_oracle(const TapContext& ctx, const std::vector<Vec>& points);

struct BandGeometry {
  double a = 0.0, b = 0.0;
  double vsq = 0.0;  // ||v(a,b)||^2 (normalized so sigma = sqrt(N) v + r sigma_perp)
  double r2 = 0.0;   // r_{a,b}^2
  MixtureFunction xi_ab;
  double v_scalar = 0.0;  // V(a,b)
  Vec center;             // sqrt(N) v(a,b) when vectors are available, else empty
};

BandGeometry band(const TapGeometry& g, double a, double b);
BandGeometry band(const TapContext& ctx, double a, double b);

// Slice free-energy density E-hat_{a,b}; derivatives by central differences (step 1e-4).
double e_hat(const TapGeometry& g, double a, double b);
Eigen::Vector2d e_hat_gradient(const TapGeometry& g, double a, double b);
Eigen::Matrix2d e_hat_hessian(const TapGeometry& g, double a, double b);

}  // namespace spg

#endif
