#ifndef SPINGLASS_LOCALIZATION_HPP
#define SPINGLASS_LOCALIZATION_HPP

#include <vector>

#include "spinglass/functional.hpp"
#include "spinglass/rng.hpp"

namespace spg {

struct LocalizationPath {
  std::vector<double> times;        // 0 = t_0 < ... < t_m
  Mat y;                            // one row per grid time
  Mat weights;                      // tilted measure weights per grid time
  std::vector<double> cov_opnorm;   // ||Cov(mu_t)||_op per grid time
  double stopped_at = 0.0;          // tau
  int stopped_index = 0;            // grid index of tau
  bool stopped_early = false;

  DiscreteMeasure measure_at(const DiscreteMeasure& pi0, int index) const;
};

// Reweight atoms by exp(<y,x> - (t/2)||x||^2) and renormalize.
DiscreteMeasure tilt_exact(const DiscreteMeasure& pi, const Vec& y, double t);

// Simulate y_t = t*sigma + B_t with sigma ~ pi0, materializing exact tilts on the grid.
LocalizationPath sl_path(const DiscreteMeasure& pi0, double T, int steps, Rng& rng);

// Truncate at the first grid time where ||Cov(mu_t)||_op >= K.
LocalizationPath stop_tau(const LocalizationPath& path, double K, double T);

struct ConservationReport {
  double ratio = 0.0;      // MC estimate of E Var_{mu_tau}[phi] / Var_{pi0}[phi]
  double se = 0.0;
  double lower_bound = 0.0;  // e^{-T K}
  bool violated = false;     // ratio below the bound beyond 3 SE
};

ConservationReport variance_conservation(const DiscreteMeasure& pi0, const Vec& phi, double T,
                                         double K, int paths, Rng& rng);

}  // namespace spg

#endif
