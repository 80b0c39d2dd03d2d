#ifndef SPINGLASS_FUNCTIONAL_HPP
#define SPINGLASS_FUNCTIONAL_HPP

#include <Eigen/Dense>
#include <vector>

#include "spinglass/hamiltonian.hpp"
#include "spinglass/rng.hpp"

namespace spg {

// Finite measure: atoms are rows of a coordinate matrix, weights sum to 1.
// Zero weights are allowed (support = positive-weight atoms); operations that
// need strict positivity check it themselves.
struct DiscreteMeasure {
  Mat atoms;    // one row per atom
  Vec weights;  // nonnegative, normalized

  DiscreteMeasure() = default;
  DiscreteMeasure(Mat atoms_in, Vec weights_in);

  int size() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(atoms.cols()); }
  bool is_cube() const;  // atoms = {+-1}^n in bitmask order
  int cube_n() const;

  Vec mean() const;
  Mat covariance() const;
  double cov_opnorm() const;

  // Full hypercube in canonical order (atom r has coordinate j = +1 iff bit j of r).
  static DiscreteMeasure cube(int n, const Vec& weights);
  static DiscreteMeasure cube_uniform(int n);
  // Independent bits with P(+1) = biases[j].
  static DiscreteMeasure cube_product(const Vec& biases);
};

struct WeakPI {
  double c = 0.0;
  double eps = 0.0;
};

// Exact Glauber Dirichlet form on the cube:
// (1/n) sum over unordered single-flip pairs of pi(x)pi(y)/(pi(x)+pi(y)) (f(x)-f(y))^2.
double dirichlet_glauber(const DiscreteMeasure& pi, const Vec& f);

// Second-smallest eigenvalue of I - P in the pi-weighted inner product,
// restricted to the support; 0 for flip-disconnected support.
double spectral_gap(const DiscreteMeasure& pi);

struct ProbeVerdict {
  bool refuted = false;
  Vec witness;  // function refuting the inequality, when refuted
  double var = 0.0, dirichlet = 0.0, bound = 0.0;
};

// One-sided check of Var <= (1/c) E + eps * osc^2 on eigenfunctions,
// indicators, and random functions; cannot certify, only refute.
ProbeVerdict weak_pi_probe(const DiscreteMeasure& pi, const WeakPI& w, int trials, Rng& rng);

struct Divergences {
  double tv = 0.0, chi2 = 0.0, kl = 0.0;
};

Divergences divergences(const DiscreteMeasure& nu, const DiscreteMeasure& pi);

struct Chi2Trace {
  std::vector<double> times;
  std::vector<double> chi2;
};

// Exact chi^2(nu_t || pi) under the heat semigroup of I - P.
Chi2Trace chi2_trajectory(const DiscreteMeasure& pi, const DiscreteMeasure& nu0, double T, int grid);

enum class MixingMode { Chi2, Kl };
double mixing_bound(const WeakPI& w, double div0, double T, MixingMode mode);

enum class TransferKind { Decomposition, PerturbLangevin, PerturbGlauber, StoppedScheme, PiToMlsi };

struct TransferArgs {
  WeakPI in;
  double c_var = 1.0;           // decomposition
  double delta = 0.0;           // decomposition / perturbation closeness
  double eta = 0.0;             // decomposition mixture-term error
  double eta1 = 0.0, eta2 = 0.0;  // stopped scheme
  double T = 0.0, K = 0.0;      // stopped scheme
  double pi_min = 0.5;          // pi-to-mlsi
};

struct TransferResult {
  WeakPI out;
  bool is_mlsi = false;
  bool headline_valid = false;  // perturb-glauber: whether (c, 2*delta) dominates
  WeakPI headline;
};

TransferResult transfer(TransferKind kind, const TransferArgs& args);

}  // namespace spg

#endif
