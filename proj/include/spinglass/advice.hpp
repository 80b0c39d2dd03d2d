#ifndef SPINGLASS_ADVICE_HPP
#define SPINGLASS_ADVICE_HPP

#include <vector>

#include "spinglass/hamiltonian.hpp"
#include "spinglass/rng.hpp"

namespace spg {

// Isotropic Gaussian component of a log-concave mixture target.
struct GaussianComponent {
  double weight = 0.0;
  Vec mean;
  double sigma = 1.0;
};

// Mixture of isotropic Gaussians; weights are normalized on construction.
struct MixtureTarget {
  std::vector<GaussianComponent> components;

  explicit MixtureTarget(std::vector<GaussianComponent> comps);

  int dim() const { return static_cast<int>(components.front().mean.size()); }
  double p_star() const;
  double c_pi() const;  // min over components of the smallest precision eigenvalue 1/sigma^2
  double potential(const Vec& x) const;  // -log density, up to the global constant
  Vec sample(Rng& rng) const;
  Vec sample_component(int k, Rng& rng) const;
};

// m = ceil(const * log(1/delta) / (p_star * eps^2)).
int sample_count(double delta, double p_star, double eps, double cnst = 10.0);

enum class AdviceInit { Advice, Adversarial };

struct AdviceTrace {
  std::vector<double> times;
  std::vector<double> tv;    // total variation to the gridded target
  std::vector<double> chi2;  // chi-squared divergence to the gridded target
  double chi2_0 = 0.0;
  double imbalance = 0.0;    // of the drawn advice set
  std::vector<int> counts;
  double c_pi = 0.0;
};

// Grid-exact evolution (d <= 3): the advice samples seed a measure on a grid,
// which relaxes under the detailed-balance jump dynamics whose stationary law
// is the gridded target; divergences are recorded at evenly spaced checkpoints.
AdviceTrace run_advice(const MixtureTarget& target, int m, double T, double step, Rng& rng,
                       AdviceInit init, int checkpoints = 20, double dx = 0.0);

struct WeightReport {
  std::vector<int> counts;  // nearest-mean assignment
  double imbalance = 0.0;   // sum_i p_i (n_i/(m p_i) - 1)^2
};

WeightReport empirical_weights(const std::vector<Vec>& samples, const MixtureTarget& target);

}  // namespace spg

#endif
