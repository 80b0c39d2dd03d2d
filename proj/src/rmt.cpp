#include "spinglass/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace spg {

double g_function(const Vec& eigs, double gamma, int order) {
  const double lmax = eigs.maxCoeff();
  if (gamma <= lmax) throw std::domain_error("g_function: gamma must exceed the top eigenvalue");
  const double n = static_cast<double>(eigs.size());
  double acc = 0.0;
  for (int i = 0; i < eigs.size(); ++i) {
    const double d = gamma - eigs[i];
    if (order == 0) acc += std::log(d);
    else if (order == 1) acc += 1.0 / d;
    else if (order == 2) acc += 1.0 / (d * d);
    else throw std::invalid_argument("g_function: order must be 0, 1, or 2");
  }
  if (order == 0) return gamma - acc / (2.0 * n);
  if (order == 1) return 1.0 - acc / (2.0 * n);
  return acc / (2.0 * n);
}

double gamma_star(const Vec& eigs, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("gamma_star: tolerance must be positive");
  const double lmax = eigs.maxCoeff();
  double lo = lmax + 1e-14 + 1e-12 * std::abs(lmax);
  double hi = lmax + 1.0;
  while (g_function(eigs, hi, 1) < 0.0) hi = lmax + 2.0 * (hi - lmax);
  while (g_function(eigs, lo, 1) > 0.0) lo = lmax + 0.5 * (lo - lmax);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (g_function(eigs, mid, 1) < 0.0 ? lo : hi) = mid;
  }
  // Newton polish; G' is increasing and smooth here
  double g = 0.5 * (lo + hi);
  for (int it = 0; it < 50; ++it) {
    const double d1 = g_function(eigs, g, 1);
    if (std::abs(d1) <= tol) break;
    const double next = g + d1 / g_function(eigs, g, 2);
    g = next > lmax ? next : 0.5 * (g + lmax);
  }
  if (std::abs(g_function(eigs, g, 1)) > tol)
    throw std::runtime_error("gamma_star: root refinement failed");
  return g;
}

double z2_prediction(const Vec& eigs, int n) {
  const double gs = gamma_star(eigs);
  const double g2 = g_function(eigs, gs, 2);
  return 0.5 * std::log(2.0 / g2) - 0.5 * n * std::log(2.0 * std::exp(1.0)) +
         n * g_function(eigs, gs, 0);
}

Deg2Analysis analyze_deg2(const Hamiltonian& h) {
  Deg2Analysis out;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * h.hessian_origin());
  out.eigs = es.eigenvalues();
  out.gamma0 = 0.5 * (1.0 + h.mixture().eval(0.0, 2, MixturePart::NoLinear));
  out.gamma_star = gamma_star(out.eigs);
  out.g = g_function(out.eigs, out.gamma_star, 0);
  out.g1 = g_function(out.eigs, out.gamma_star, 1);
  out.g2 = g_function(out.eigs, out.gamma_star, 2);
  out.logz2 = z2_prediction(out.eigs, h.dim());
  return out;
}

LogZPrediction logz_full_prediction(const Hamiltonian& h) {
  const auto& m = h.mixture();
  const int n = h.dim();
  if (m.classify(2000).strict_rs_eps <= 0.0)
    throw std::runtime_error("logz_full_prediction: mixture is not strictly replica symmetric");
  if (m.coeff(1) + m.tilt() > std::pow(n, -0.8) + 1e-12)
    throw std::runtime_error("logz_full_prediction: linear coefficient exceeds N^{-4/5}");
  const double xi2 = m.eval(0.0, 2, MixturePart::NoLinear);
  if (xi2 > 1.0 - 1e-3)
    throw std::runtime_error("logz_full_prediction: xi''(0) too close to 1");
  LogZPrediction out;
  Mat shifted = (1.0 + xi2) * Mat::Identity(n, n) - h.hessian_origin();
  Eigen::LLT<Mat> llt(shifted);
  out.valid = llt.info() == Eigen::Success;
  double logdet = 0.0;
  if (out.valid) {
    for (int i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  }
  out.value = 0.5 * n * m.eval(1.0, 0, MixturePart::NoLinear) + 0.25 * n * xi2 +
              0.5 * std::log(1.0 - xi2) - 0.5 * logdet;
  return out;
}

CovPrediction cov_prediction(const Hamiltonian& h) {
  const int n = h.dim();
  const double xi2 = h.mixture().eval(0.0, 2, MixturePart::NoLinear);
  Mat shifted = (1.0 + xi2) * Mat::Identity(n, n) - h.hessian_origin();
  Eigen::LLT<Mat> llt(shifted);
  CovPrediction out;
  out.valid = llt.info() == Eigen::Success;
  if (!out.valid) return out;
  out.cov = shifted.inverse();
  out.trace_over_n = out.cov.trace() / n;
  return out;
}

double semicircle_integral(const std::function<double(double)>& f, int nodes) {
  if (nodes < 1) throw std::invalid_argument("semicircle_integral: need at least one node");
  // Gauss-Chebyshev (second kind): x_i = 2cos(theta_i), weight 2 sin^2(theta_i)/(nodes+1)
  double acc = 0.0;
  for (int i = 1; i <= nodes; ++i) {
    const double theta = M_PI * i / (nodes + 1);
    const double s = std::sin(theta);
    acc += s * s * f(2.0 * std::cos(theta));
  }
  return 2.0 * acc / (nodes + 1);
}

McPartition mc_partition(const Hamiltonian& h, long long samples, Rng& rng) {
  if (samples < 10000) throw std::invalid_argument("mc_partition: need at least 10^4 samples");
  const int n = h.dim();
  constexpr int kBlocks = 200;
  const long long per_block = samples / kBlocks;
  std::vector<double> block_log(kBlocks);  // log sum of e^H within each block
  const int batch = 4096;
  Mat states(n, batch);
  for (int b = 0; b < kBlocks; ++b) {
    double bmax = -std::numeric_limits<double>::infinity();
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(per_block));
    long long done = 0;
    while (done < per_block) {
      const int cur = static_cast<int>(std::min<long long>(batch, per_block - done));
      for (int j = 0; j < cur; ++j) states.col(j) = uniform_sphere(n, rng);
      const Vec e = h.energies(states.leftCols(cur));
      for (int j = 0; j < cur; ++j) {
        vals.push_back(e[j]);
        bmax = std::max(bmax, e[j]);
      }
      done += cur;
    }
    double s = 0.0;
    for (double v : vals) s += std::exp(v - bmax);
    block_log[b] = bmax + std::log(s);
  }
  const auto log_mean = [&](const std::vector<double>& logs, long long count) {
    const double m = *std::max_element(logs.begin(), logs.end());
    double s = 0.0;
    for (double v : logs) s += std::exp(v - m);
    return m + std::log(s) - std::log(static_cast<double>(count));
  };
  McPartition out;
  out.log_estimate = log_mean(block_log, per_block * kBlocks);
  std::vector<double> boots(kBlocks);
  std::vector<double> resampled(kBlocks);
  for (int r = 0; r < kBlocks; ++r) {
    for (int b = 0; b < kBlocks; ++b) resampled[b] = block_log[rng.index(kBlocks)];
    boots[r] = log_mean(resampled, per_block * kBlocks);
  }
  std::sort(boots.begin(), boots.end());
  out.ci_lo = boots[4];
  out.ci_hi = boots[194];
  return out;
}

OpnormEstimate second_moment_opnorm(const Mat& states, double tol, int max_iters) {
  if (states.cols() < 2) throw std::invalid_argument("second_moment_opnorm: need >= 2 samples");
  const int n = static_cast<int>(states.rows());
  const Mat s = states * states.transpose() / static_cast<double>(states.cols());
  Vec v = Vec::Random(n).normalized();
  OpnormEstimate out;
  double prev = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vec w = s * v;
    const double lambda = v.dot(w);
    if (w.norm() == 0.0) {
      out.value = 0.0;
      out.converged = true;
      return out;
    }
    v = w.normalized();
    if (it > 0 && std::abs(lambda - prev) <= tol * std::max(1.0, std::abs(lambda))) {
      out.value = lambda;
      out.converged = true;
      return out;
    }
    prev = lambda;
  }
  out.value = prev;
  return out;
}

}  // namespace spg
