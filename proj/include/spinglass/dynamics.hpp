#ifndef SPINGLASS_DYNAMICS_HPP
#define SPINGLASS_DYNAMICS_HPP

#include <vector>

#include "spinglass/functional.hpp"
#include "spinglass/hamiltonian.hpp"
#include "spinglass/rng.hpp"

namespace spg {

// Piecewise-constant annealing: beta = k*delta for stages k = 0..beta_max/delta,
// each held for stage_time and integrated with step size step.
struct AnnealSchedule {
  double delta = 0.0;
  double stage_time = 1.0;
  double beta_max = 0.0;
  double step = 0.01;

  int stage_count() const;  // beta_max/delta + 1, validated integral
  void validate() const;
  // Dimension-scaled defaults T_N = 5 N^{1/5}, delta_N = 0.5 N^{-4/5} (config-exposed, not asserted).
  static AnnealSchedule scaled_defaults(int n, double beta_max);
};

struct ChainDiagnostics {
  std::vector<double> energy_trace;     // energy per spin, one entry per step
  std::vector<double> stage_seconds;    // wall clock per stage
  bool sl_warning = false;              // (SL) fails at beta_max
  bool blowup = false;                  // integrator aborted a stage
  int steps_per_stage = 0;
};

// One projected Euler-Maruyama step for the Gibbs law ~ e^{beta H}.
Vec langevin_step(const Vec& sigma, const Hamiltonian& h, double beta, double step, Rng& rng);
// Same update with the Gaussian increment supplied by the caller.
Vec langevin_step_with_noise(const Vec& sigma, const Hamiltonian& h, double beta, double step,
                             const Vec& noise);

std::pair<Vec, ChainDiagnostics> run_annealed(const Hamiltonian& h, const AnnealSchedule& s, Rng& rng);

// Exact lazy single-site Glauber transition matrix for a strictly positive cube measure.
Mat glauber_matrix(const DiscreteMeasure& pi);

// Annealing TV bound with the hidden constant fixed at K = 20.
double anneal_tv_bound(double c_pi, double eps, double T, double delta, double beta0, double h_inf,
                       double grad_h_inf);

}  // namespace spg

#endif
