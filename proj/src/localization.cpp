#include "spinglass/localization.hpp"

#include <cmath>
#include <stdexcept>

namespace spg {

DiscreteMeasure LocalizationPath::measure_at(const DiscreteMeasure& pi0, int index) const {
  DiscreteMeasure out = pi0;
  out.weights = weights.row(index).transpose();
  return out;
}

DiscreteMeasure tilt_exact(const DiscreteMeasure& pi, const Vec& y, double t) {
  if (t < 0.0) throw std::invalid_argument("tilt_exact: negative time");
  if (y.size() != pi.dim()) throw std::invalid_argument("tilt_exact: dimension mismatch");
  Vec logw(pi.size());
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < pi.size(); ++i) {
    if (pi.weights[i] <= 0.0) {
      logw[i] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const Vec x = pi.atoms.row(i).transpose();
    logw[i] = std::log(pi.weights[i]) + y.dot(x) - 0.5 * t * x.squaredNorm();
    best = std::max(best, logw[i]);
  }
  if (!std::isfinite(best)) throw std::runtime_error("tilt_exact: all weights underflow");
  Vec w(pi.size());
  for (int i = 0; i < pi.size(); ++i)
    w[i] = std::isfinite(logw[i]) ? std::exp(logw[i] - best) : 0.0;
  const double total = w.sum();
  if (!(total > 0.0)) throw std::runtime_error("tilt_exact: renormalization failed");
  DiscreteMeasure out = pi;
  out.weights = w / total;
  return out;
}

LocalizationPath sl_path(const DiscreteMeasure& pi0, double T, int steps, Rng& rng) {
  if (steps < 1) throw std::invalid_argument("sl_path: steps must be >= 1");
  if (T < 0.0) throw std::invalid_argument("sl_path: negative horizon");
  const int d = pi0.dim();
  // sample sigma ~ pi0 once
  double u = rng.uniform();
  int pick = 0;
  for (; pick < pi0.size() - 1; ++pick) {
    u -= pi0.weights[pick];
    if (u <= 0.0) break;
  }
  const Vec sigma = pi0.atoms.row(pick).transpose();

  const int m = T == 0.0 ? 0 : steps;
  LocalizationPath path;
  path.y = Mat::Zero(m + 1, d);
  path.weights = Mat(m + 1, pi0.size());
  Vec y = Vec::Zero(d);
  const double dt = m == 0 ? 0.0 : T / m;
  for (int k = 0; k <= m; ++k) {
    const double t = dt * k;
    path.times.push_back(t);
    path.y.row(k) = y.transpose();
    auto mu = tilt_exact(pi0, y, t);
    path.weights.row(k) = mu.weights.transpose();
    path.cov_opnorm.push_back(mu.cov_opnorm());
    if (k < m) {
      Vec noise(d);
      for (int i = 0; i < d; ++i) noise[i] = rng.normal();
      y += dt * sigma + std::sqrt(dt) * noise;
    }
  }
  path.stopped_at = T;
  path.stopped_index = m;
  return path;
}

LocalizationPath stop_tau(const LocalizationPath& path, double K, double T) {
  if (K < 0.0) throw std::invalid_argument("stop_tau: K must be >= 0");
  LocalizationPath out = path;
  out.stopped_at = std::min(T, path.times.back());
  out.stopped_index = static_cast<int>(path.times.size()) - 1;
  out.stopped_early = false;
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    if (path.times[k] > T) {
      out.stopped_at = T;
      out.stopped_index = static_cast<int>(k) - 1;
      break;
    }
    if (path.cov_opnorm[k] >= K) {
      out.stopped_at = path.times[k];
      out.stopped_index = static_cast<int>(k);
      out.stopped_early = true;
      break;
    }
  }
  const int keep = out.stopped_index + 1;
  out.times.resize(keep);
  out.cov_opnorm.resize(keep);
  out.y.conservativeResize(keep, Eigen::NoChange);
  out.weights.conservativeResize(keep, Eigen::NoChange);
  return out;
}

ConservationReport variance_conservation(const DiscreteMeasure& pi0, const Vec& phi, double T,
                                         double K, int paths, Rng& rng) {
  if (phi.size() != pi0.size()) throw std::invalid_argument("variance_conservation: table size mismatch");
  const auto var_under = [&](const Vec& w) {
    const double mean = w.dot(phi);
    double v = 0.0;
    for (int i = 0; i < phi.size(); ++i) v += w[i] * (phi[i] - mean) * (phi[i] - mean);
    return v;
  };
  const double var0 = var_under(pi0.weights);
  if (!(var0 > 0.0)) throw std::invalid_argument("variance_conservation: degenerate test function");
  double sum = 0.0, sumsq = 0.0;
  for (int p = 0; p < paths; ++p) {
    auto path = stop_tau(sl_path(pi0, T, 100, rng), K, T);
    const double r = var_under(path.weights.row(path.stopped_index).transpose()) / var0;
    sum += r;
    sumsq += r * r;
  }
  ConservationReport rep;
  rep.ratio = sum / paths;
  rep.se = std::sqrt(std::max(0.0, sumsq / paths - rep.ratio * rep.ratio) / paths);
  rep.lower_bound = std::exp(-T * K);
  rep.violated = rep.ratio < rep.lower_bound - 3.0 * rep.se;
  return rep;
}

}  // namespace spg
