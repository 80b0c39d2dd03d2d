#include "spinglass/dynamics.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace spg {

int AnnealSchedule::stage_count() const {
  if (beta_max == 0.0) return 1;
  const double k = beta_max / delta;
  return static_cast<int>(std::lround(k)) + 1;
}

void AnnealSchedule::validate() const {
  if (stage_time <= 0.0 || step <= 0.0) throw std::invalid_argument("schedule: nonpositive times");
  if (step > stage_time) throw std::invalid_argument("schedule: step exceeds stage time");
  if (beta_max < 0.0) throw std::invalid_argument("schedule: negative beta_max");
  if (beta_max > 0.0) {
    if (delta <= 0.0) throw std::invalid_argument("schedule: delta must be positive");
    const double k = beta_max / delta;
    if (std::abs(k - std::lround(k)) > 1e-9) throw std::invalid_argument("schedule: beta_max/delta must be an integer");
  }
}

AnnealSchedule AnnealSchedule::scaled_defaults(int n, double beta_max) {
  AnnealSchedule s;
  s.stage_time = 5.0 * std::pow(n, 0.2);
  s.delta = 0.5 * std::pow(n, -0.8);
  // round so beta_max/delta is an integer
  if (beta_max > 0.0) {
    const int k = std::max(1, static_cast<int>(std::lround(beta_max / s.delta)));
    s.delta = beta_max / k;
  }
  s.beta_max = beta_max;
  return s;
}

Vec langevin_step_with_noise(const Vec& sigma, const Hamiltonian& h, double beta, double step,
                             const Vec& noise) {
  if (step <= 0.0) throw std::invalid_argument("langevin_step: step must be positive");
  const int n = static_cast<int>(sigma.size());
  Vec drift = beta == 0.0 ? Vec(Vec::Zero(n)) : Vec(beta * h.gradient(sigma, Frame::Spherical));
  if (!drift.allFinite()) {
    std::ostringstream os;
    os << "langevin_step: non-finite drift at ||sigma|| = " << sigma.norm() << ", beta = " << beta;
    throw std::runtime_error(os.str());
  }
  Vec next = sigma + step * drift + std::sqrt(2.0 * step) * tangent_project(sigma, noise);
  return renormalize(next);
}

Vec langevin_step(const Vec& sigma, const Hamiltonian& h, double beta, double step, Rng& rng) {
  Vec noise(sigma.size());
  for (int i = 0; i < noise.size(); ++i) noise[i] = rng.normal();
  return langevin_step_with_noise(sigma, h, beta, step, noise);
}

std::pair<Vec, ChainDiagnostics> run_annealed(const Hamiltonian& h, const AnnealSchedule& s, Rng& rng) {
  s.validate();
  ChainDiagnostics diag;
  diag.steps_per_stage = static_cast<int>(std::floor(s.stage_time / s.step));
  const int stages = s.stage_count();
  diag.sl_warning = !h.mixture().scaled(s.beta_max * s.beta_max).classify(2000).sl;
  Vec sigma = uniform_sphere(h.dim(), rng);
  for (int k = 0; k < stages; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    const double beta = k * s.delta;
    try {
      for (int i = 0; i < diag.steps_per_stage; ++i) {
        sigma = langevin_step(sigma, h, s.beta_max == 0.0 ? 0.0 : beta, s.step, rng);
        diag.energy_trace.push_back(h.energy(sigma) / h.dim());
      }
    } catch (const std::runtime_error&) {
      diag.blowup = true;
      diag.stage_seconds.push_back(0.0);
      break;
    }
    diag.stage_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return {sigma, diag};
}

Mat glauber_matrix(const DiscreteMeasure& pi) {
  const int n = pi.cube_n();
  if (n > 20) throw std::invalid_argument("glauber_matrix: n > 20");
  if (pi.weights.minCoeff() <= 0.0)
    throw std::invalid_argument("glauber_matrix: zero-mass state (detailed balance undefined)");
  const int m = pi.size();
  Mat p = Mat::Zero(m, m);
  for (int x = 0; x < m; ++x) {
    double stay = 1.0;
    for (int j = 0; j < n; ++j) {
      const int y = x ^ (1 << j);
      const double flip = pi.weights[y] / (pi.weights[x] + pi.weights[y]) / n;
      p(x, y) = flip;
      stay -= flip;
    }
    p(x, x) = stay;
  }
  return p;
}

double anneal_tv_bound(double c_pi, double eps, double T, double delta, double beta0, double h_inf,
                       double grad_h_inf) {
  if (c_pi < 0 || eps < 0 || T < 0 || delta < 0 || beta0 < 0 || h_inf < 0 || grad_h_inf < 0)
    throw std::invalid_argument("anneal_tv_bound: negative input");
  if (beta0 == 0.0) return 0.0;
  if (delta <= 0.0) throw std::invalid_argument("anneal_tv_bound: delta must be positive");
  const double k0 = beta0 / delta;
  if (std::abs(k0 - std::lround(k0)) > 1e-9)
    throw std::invalid_argument("anneal_tv_bound: beta0/delta must be an integer");
  constexpr double kHidden = 20.0;  // covers the proof's 16 + 4 coefficient display
  const double stage = (1.0 + delta * grad_h_inf) * std::exp(2.0 * delta * h_inf) - 1.0;
  return k0 * stage * std::sqrt(kHidden * (std::exp(-2.0 * c_pi * T) + eps));
}

}  // namespace spg
