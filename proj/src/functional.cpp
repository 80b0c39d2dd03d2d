#include "spinglass/functional.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Support-restricted symmetrized Glauber generator spectrum for a cube measure.
struct CubeSpectrum {
  std::vector<int> support;       // cube indices with positive weight
  Vec lambda;                     // eigenvalues of I - P, ascending
  Mat phi;                        // orthonormal eigenvectors of the symmetrized generator
  Vec sqrt_w;                     // sqrt(pi) over the support
};

CubeSpectrum cube_spectrum(const DiscreteMeasure& pi) {
  const int n = pi.cube_n();
  CubeSpectrum out;
  std::vector<int> pos(pi.size(), -1);
  for (int i = 0; i < pi.size(); ++i)
    if (pi.weights[i] > 0.0) {
      pos[i] = static_cast<int>(out.support.size());
      out.support.push_back(i);
    }
  const int m = static_cast<int>(out.support.size());
  out.sqrt_w = Vec(m);
  for (int a = 0; a < m; ++a) out.sqrt_w[a] = std::sqrt(pi.weights[out.support[a]]);
  Mat p = Mat::Zero(m, m);
  for (int a = 0; a < m; ++a) {
    const int x = out.support[a];
    double stay = 1.0;
    for (int j = 0; j < n; ++j) {
      const int y = x ^ (1 << j);
      if (pos[y] < 0) continue;  // flip to a zero-mass state never fires
      const double flip = pi.weights[y] / (pi.weights[x] + pi.weights[y]) / n;
      p(a, pos[y]) = flip;
      stay -= flip;
    }
    p(a, a) = stay;
  }
  // symmetrize: S = D^{1/2} (I - P) D^{-1/2}
  Mat s = -p;
  s.diagonal().array() += 1.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) s(a, b) *= out.sqrt_w[a] / out.sqrt_w[b];
  s = 0.5 * (s + Mat(s.transpose()));  // scrub rounding asymmetry
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  out.lambda = es.eigenvalues();
  out.phi = es.eigenvectors();
  return out;
}

double variance(const DiscreteMeasure& pi, const Vec& f) {
  const double mean = pi.weights.dot(f);
  double var = 0.0;
  for (int i = 0; i < pi.size(); ++i) var += pi.weights[i] * (f[i] - mean) * (f[i] - mean);
  return var;
}

double support_osc(const DiscreteMeasure& pi, const Vec& f) {
  double lo = kInf, hi = -kInf;
  for (int i = 0; i < pi.size(); ++i)
    if (pi.weights[i] > 0.0) {
      lo = std::min(lo, f[i]);
      hi = std::max(hi, f[i]);
    }
  return hi - lo;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(Mat atoms_in, Vec weights_in)
    : atoms(std::move(atoms_in)), weights(std::move(weights_in)) {
  if (atoms.rows() != weights.size()) throw std::invalid_argument("measure: atom/weight count mismatch");
  if (weights.minCoeff() < 0.0) throw std::invalid_argument("measure: negative weight");
  const double total = weights.sum();
  if (!(total > 0.0)) throw std::invalid_argument("measure: zero total mass");
  if (std::abs(total - 1.0) > 1e-12) weights /= total;
}

bool DiscreteMeasure::is_cube() const {
  const int n = dim();
  if (n < 1 || n > 24 || size() != (1 << n)) return false;
  for (int r = 0; r < size(); ++r)
    for (int j = 0; j < n; ++j)
      if (atoms(r, j) != (((r >> j) & 1) ? 1.0 : -1.0)) return false;
  return true;
}

int DiscreteMeasure::cube_n() const {
  if (!is_cube()) throw std::invalid_argument("measure is not a canonical hypercube");
  return dim();
}

Vec DiscreteMeasure::mean() const { return atoms.transpose() * weights; }

Mat DiscreteMeasure::covariance() const {
  const Vec m = mean();
  Mat cov = Mat::Zero(dim(), dim());
  for (int i = 0; i < size(); ++i) {
    const Vec d = atoms.row(i).transpose() - m;
    cov += weights[i] * d * d.transpose();
  }
  return cov;
}

double DiscreteMeasure::cov_opnorm() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(covariance());
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

DiscreteMeasure DiscreteMeasure::cube(int n, const Vec& weights) {
  if (n < 1 || n > 24) throw std::invalid_argument("cube dimension out of range");
  if (weights.size() != (1 << n)) throw std::invalid_argument("cube weight count mismatch");
  Mat atoms(1 << n, n);
  for (int r = 0; r < (1 << n); ++r)
    for (int j = 0; j < n; ++j) atoms(r, j) = ((r >> j) & 1) ? 1.0 : -1.0;
  return DiscreteMeasure(std::move(atoms), weights);
}

DiscreteMeasure DiscreteMeasure::cube_uniform(int n) {
  return cube(n, Vec::Constant(1 << n, 1.0 / (1 << n)));
}

DiscreteMeasure DiscreteMeasure::cube_product(const Vec& biases) {
  const int n = static_cast<int>(biases.size());
  Vec w(1 << n);
  for (int r = 0; r < (1 << n); ++r) {
    double p = 1.0;
    for (int j = 0; j < n; ++j) p *= ((r >> j) & 1) ? biases[j] : 1.0 - biases[j];
    w[r] = p;
  }
  return cube(n, w);
}

double dirichlet_glauber(const DiscreteMeasure& pi, const Vec& f) {
  const int n = pi.cube_n();
  if (f.size() != pi.size()) throw std::invalid_argument("dirichlet: function table size mismatch");
  if (!f.allFinite()) throw std::invalid_argument("dirichlet: function table has missing values");
  double e = 0.0;
  for (int x = 0; x < pi.size(); ++x)
    for (int j = 0; j < n; ++j) {
      const int y = x ^ (1 << j);
      if (y < x) continue;  // unordered pairs once
      const double mass = pi.weights[x] + pi.weights[y];
      if (mass <= 0.0) continue;
      const double d = f[x] - f[y];
      e += pi.weights[x] * pi.weights[y] / mass * d * d;
    }
  return e / n;
}

double spectral_gap(const DiscreteMeasure& pi) {
  if (pi.cube_n() > 14) throw std::invalid_argument("spectral_gap: n > 14");
  const CubeSpectrum sp = cube_spectrum(pi);
  if (sp.lambda.size() < 2) return 0.0;
  const double gap = sp.lambda[1];
  return gap < 1e-13 ? 0.0 : gap;  // disconnected support: repeated zero eigenvalue
}

ProbeVerdict weak_pi_probe(const DiscreteMeasure& pi, const WeakPI& w, int trials, Rng& rng) {
  if (pi.cube_n() > 14) throw std::invalid_argument("weak_pi_probe: n > 14");
  if (w.c < 0.0 || w.eps < 0.0) throw std::invalid_argument("weak_pi_probe: negative parameters");
  const CubeSpectrum sp = cube_spectrum(pi);
  const int m = static_cast<int>(sp.support.size());
  std::vector<Vec> funcs;
  for (int k = 0; k < m; ++k) {
    Vec f = Vec::Zero(pi.size());
    for (int a = 0; a < m; ++a) f[sp.support[a]] = sp.phi(a, k) / sp.sqrt_w[a];
    funcs.push_back(std::move(f));
  }
  for (int a = 0; a < m; ++a) {
    Vec f = Vec::Zero(pi.size());
    f[sp.support[a]] = 1.0;
    funcs.push_back(std::move(f));
  }
  for (int t = 0; t < trials; ++t) {
    Vec f(pi.size());
    for (int i = 0; i < pi.size(); ++i)
      f[i] = (t % 2 == 0) ? 2.0 * rng.uniform() - 1.0 : (rng.uniform() < 0.5 ? -1.0 : 1.0);
    funcs.push_back(std::move(f));
  }
  ProbeVerdict verdict;
  for (const Vec& f : funcs) {
    const double var = variance(pi, f);
    const double e = dirichlet_glauber(pi, f);
    const double osc = support_osc(pi, f);
    const double inv_c = w.c > 0.0 ? 1.0 / w.c : kInf;
    const double bound = inv_c * e + w.eps * osc * osc;
    if (var > bound + 1e-12) {
      verdict.refuted = true;
      verdict.witness = f;
      verdict.var = var;
      verdict.dirichlet = e;
      verdict.bound = bound;
      return verdict;
    }
  }
  return verdict;
}

Divergences divergences(const DiscreteMeasure& nu, const DiscreteMeasure& pi) {
  if (nu.size() != pi.size() || nu.atoms != pi.atoms)
    throw std::invalid_argument("divergences: measures must share one atom list");
  Divergences d;
  for (int i = 0; i < pi.size(); ++i) {
    d.tv += 0.5 * std::abs(nu.weights[i] - pi.weights[i]);
    if (pi.weights[i] > 0.0) {
      const double diff = nu.weights[i] - pi.weights[i];
      d.chi2 += diff * diff / pi.weights[i];
      if (nu.weights[i] > 0.0) d.kl += nu.weights[i] * std::log(nu.weights[i] / pi.weights[i]);
    } else if (nu.weights[i] > 0.0) {
      d.chi2 = kInf;
      d.kl = kInf;
    }
  }
  return d;
}

Chi2Trace chi2_trajectory(const DiscreteMeasure& pi, const DiscreteMeasure& nu0, double T, int grid) {
  if (pi.cube_n() > 12) throw std::invalid_argument("chi2_trajectory: n > 12");
  if (nu0.size() != pi.size()) throw std::invalid_argument("chi2_trajectory: size mismatch");
  if (grid < 1) throw std::invalid_argument("chi2_trajectory: empty grid");
  const CubeSpectrum sp = cube_spectrum(pi);
  const int m = static_cast<int>(sp.support.size());
  // g0 = D^{1/2} (dnu0/dpi - 1) on the support
  Vec g0(m);
  for (int a = 0; a < m; ++a) {
    const int x = sp.support[a];
    g0[a] = (nu0.weights[x] / pi.weights[x] - 1.0) * sp.sqrt_w[a];
  }
  for (int i = 0; i < pi.size(); ++i)
    if (pi.weights[i] <= 0.0 && nu0.weights[i] > 0.0)
      throw std::invalid_argument("chi2_trajectory: nu0 not absolutely continuous");
  const Vec coef = sp.phi.transpose() * g0;
  Chi2Trace trace;
  for (int g = 0; g <= grid; ++g) {
    const double t = T * g / grid;
    double chi2 = 0.0;
    for (int k = 0; k < m; ++k) chi2 += coef[k] * coef[k] * std::exp(-2.0 * sp.lambda[k] * t);
    trace.times.push_back(t);
    trace.chi2.push_back(chi2);
  }
  return trace;
}

double mixing_bound(const WeakPI& w, double div0, double T, MixingMode mode) {
  if (div0 < 0.0 || T < 0.0) throw std::invalid_argument("mixing_bound: negative inputs");
  if (mode == MixingMode::Chi2) return std::exp(-2.0 * w.c * T) * div0 + w.eps;
  return std::exp(-w.c * T) * div0 + w.eps;
}

TransferResult transfer(TransferKind kind, const TransferArgs& args) {
  const WeakPI& in = args.in;
  if (in.c < 0.0 || in.eps < 0.0) throw std::invalid_argument("transfer: negative weak-PI pair");
  TransferResult res;
  switch (kind) {
    case TransferKind::Decomposition:
      if (args.c_var <= 0.0) throw std::invalid_argument("transfer: C_var must be positive");
      res.out = {in.c * args.c_var, (args.delta + args.eta) / args.c_var};
      break;
    case TransferKind::PerturbLangevin:
      res.out = {in.c, args.delta * std::max(in.c > 0.0 ? 1.0 / in.c : kInf, 1.0)};
      break;
    case TransferKind::PerturbGlauber: {
      if (in.c <= 0.0) throw std::invalid_argument("transfer: perturb-glauber needs C_PI > 0");
      // proof-derived epsilon; the headline 2*delta only dominates when C_PI >= 1
      res.out = {in.c, args.delta * (1.0 + in.c) / in.c};
      res.headline = {in.c, 2.0 * args.delta};
      res.headline_valid = res.headline.eps >= res.out.eps - 1e-15;
      break;
    }
    case TransferKind::StoppedScheme: {
      if (args.T < 0.0 || args.K < 0.0) throw std::invalid_argument("transfer: negative T or K");
      const double tk = args.T * args.K;
      res.out = {in.c * std::exp(-tk), std::exp(tk) * (args.delta + args.eta1 + args.eta2)};
      break;
    }
    case TransferKind::PiToMlsi: {
      if (args.pi_min <= 0.0 || args.pi_min > 0.5)
        throw std::invalid_argument("transfer: pi_min must lie in (0, 1/2]");
      const double p = args.pi_min;
      const double c_pi = p == 0.5 ? 0.5 : (1.0 - 2.0 * p) / std::log(1.0 / p - 1.0);
      res.out = {4.0 * in.c * c_pi, in.eps / c_pi};
      res.is_mlsi = true;
      break;
    }
  }
  return res;
}

}  // namespace spg
