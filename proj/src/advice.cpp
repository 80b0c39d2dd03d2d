#include "spinglass/advice.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace spg {

MixtureTarget::MixtureTarget(std::vector<GaussianComponent> comps) : components(std::move(comps)) {
  if (components.empty()) throw std::invalid_argument("MixtureTarget: need at least one component");
  double total = 0.0;
  const int d = static_cast<int>(components.front().mean.size());
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw std::invalid_argument("MixtureTarget: weights must be positive");
    if (!(c.sigma > 0.0)) throw std::invalid_argument("MixtureTarget: sigma must be positive");
    if (c.mean.size() != d) throw std::invalid_argument("MixtureTarget: dimension mismatch");
    total += c.weight;
  }
  for (auto& c : components) c.weight /= total;
}

double MixtureTarget::p_star() const {
  double out = 1.0;
  for (const auto& c : components) out = std::min(out, c.weight);
  return out;
}

double MixtureTarget::c_pi() const {
  double out = std::numeric_limits<double>::infinity();
  for (const auto& c : components) out = std::min(out, 1.0 / (c.sigma * c.sigma));
  return out;
}

double MixtureTarget::potential(const Vec& x) const {
  const int d = dim();
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(components.size());
  for (std::size_t k = 0; k < components.size(); ++k) {
    const auto& c = components[k];
    logs[k] = std::log(c.weight) - d * std::log(c.sigma) -
              (x - c.mean).squaredNorm() / (2.0 * c.sigma * c.sigma);
    mx = std::max(mx, logs[k]);
  }
  double s = 0.0;
  for (double l : logs) s += std::exp(l - mx);
  return -(mx + std::log(s));
}

Vec MixtureTarget::sample_component(int k, Rng& rng) const {
  const auto& c = components.at(k);
  Vec x(c.mean.size());
  for (int i = 0; i < x.size(); ++i) x[i] = c.mean[i] + c.sigma * rng.normal();
  return x;
}

Vec MixtureTarget::sample(Rng& rng) const {
  double u = rng.uniform();
  for (std::size_t k = 0; k < components.size(); ++k) {
    u -= components[k].weight;
    if (u <= 0.0) return sample_component(static_cast<int>(k), rng);
  }
  return sample_component(static_cast<int>(components.size()) - 1, rng);
}

int sample_count(double delta, double p_star, double eps, double cnst) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("sample_count: delta in (0,1)");
  if (!(p_star > 0.0 && p_star <= 1.0)) throw std::invalid_argument("sample_count: p_star in (0,1]");
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("sample_count: eps in (0,1]");
  if (!(cnst > 0.0)) throw std::invalid_argument("sample_count: const must be positive");
  return static_cast<int>(std::ceil(cnst * std::log(1.0 / delta) / (p_star * eps * eps)));
}

namespace {

struct Grid {
  int d = 0;
  std::vector<double> lo;
  std::vector<int> n;       // cells per axis
  double dx = 0.0;
  std::vector<long long> stride;
  long long cells = 0;

  Vec point(long long idx) const {
    Vec x(d);
    for (int a = d - 1; a >= 0; --a) {
      x[a] = lo[a] + (idx % n[a] + 0.5) * dx;
      idx /= n[a];
    }
    return x;
  }
  long long locate(const Vec& x) const {
    long long idx = 0;
    for (int a = 0; a < d; ++a) {
      int i = static_cast<int>(std::floor((x[a] - lo[a]) / dx));
      i = std::min(n[a] - 1, std::max(0, i));
      idx = idx * n[a] + i;
    }
    return idx;
  }
};

Grid build_grid(const MixtureTarget& target, double dx) {
  const int d = target.dim();
  if (d > 3) throw std::invalid_argument("run_advice: grid-exact divergences need d <= 3");
  double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
  for (const auto& c : target.components) {
    smin = std::min(smin, c.sigma);
    smax = std::max(smax, c.sigma);
  }
  if (dx <= 0.0) dx = smin / 4.0;
  if (smin < 3.0 * dx)
    throw std::invalid_argument("run_advice: grid underresolved (component sigma < 3 cells)");
  Grid g;
  g.d = d;
  g.dx = dx;
  g.cells = 1;
  for (int a = 0; a < d; ++a) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& c : target.components) {
      lo = std::min(lo, c.mean[a] - 6.0 * smax);
      hi = std::max(hi, c.mean[a] + 6.0 * smax);
    }
    const int cells = static_cast<int>(std::ceil((hi - lo) / dx));
    g.lo.push_back(lo);
    g.n.push_back(cells);
    g.cells *= cells;
    if (g.cells > 2000000) throw std::invalid_argument("run_advice: grid too large");
  }
  g.stride.assign(d, 1);
  for (int a = d - 2; a >= 0; --a) g.stride[a] = g.stride[a + 1] * g.n[a + 1];
  return g;
}

}  // namespace

AdviceTrace run_advice(const MixtureTarget& target, int m, double T, double step, Rng& rng,
                       AdviceInit init, int checkpoints, double dx) {
  if (m < 1) throw std::invalid_argument("run_advice: need at least one advice sample");
  if (!(T >= 0.0) || !(step > 0.0)) throw std::invalid_argument("run_advice: bad T or step");
  if (checkpoints < 1) throw std::invalid_argument("run_advice: need >= 1 checkpoint");
  const Grid grid = build_grid(target, dx);
  const long long nc = grid.cells;

  Vec v(nc);
  for (long long i = 0; i < nc; ++i) v[i] = target.potential(grid.point(i));
  Vec pi(nc);
  const double vmin = v.minCoeff();
  for (long long i = 0; i < nc; ++i) pi[i] = std::exp(vmin - v[i]);
  pi /= pi.sum();

  // jump rates to axis neighbors; stationary for pi by detailed balance
  std::vector<Vec> rate_up(grid.d, Vec::Zero(nc));  // i -> i + stride[a]
  std::vector<Vec> rate_dn(grid.d, Vec::Zero(nc));
  Vec out_rate = Vec::Zero(nc);
  const double inv2 = 1.0 / (grid.dx * grid.dx);
  for (long long i = 0; i < nc; ++i) {
    for (int a = 0; a < grid.d; ++a) {
      const long long pos = (i / grid.stride[a]) % grid.n[a];
      if (pos + 1 < grid.n[a]) {
        rate_up[a][i] = inv2 * std::exp(0.5 * (v[i] - v[i + grid.stride[a]]));
        out_rate[i] += rate_up[a][i];
      }
      if (pos > 0) {
        rate_dn[a][i] = inv2 * std::exp(0.5 * (v[i] - v[i - grid.stride[a]]));
        out_rate[i] += rate_dn[a][i];
      }
    }
  }

  // advice draw and initial measure
  std::vector<Vec> samples;
  samples.reserve(m);
  for (int k = 0; k < m; ++k)
    samples.push_back(init == AdviceInit::Advice ? target.sample(rng) : target.sample_component(0, rng));
  auto weights = empirical_weights(samples, target);
  Vec rho = Vec::Zero(nc);
  for (const auto& s : samples) rho[grid.locate(s)] += 1.0 / m;

  AdviceTrace trace;
  trace.counts = weights.counts;
  trace.imbalance = weights.imbalance;
  trace.c_pi = target.c_pi();
  const auto record = [&](double t) {
    trace.times.push_back(t);
    trace.tv.push_back(0.5 * (rho - pi).cwiseAbs().sum());
    double chi = 0.0;
    for (long long i = 0; i < nc; ++i) chi += (rho[i] - pi[i]) * (rho[i] - pi[i]) / pi[i];
    trace.chi2.push_back(chi);
  };
  record(0.0);
  trace.chi2_0 = trace.chi2.front();

  const double dt = std::min(step, 0.5 / out_rate.maxCoeff());
  double t = 0.0;
  Vec flux(nc);
  for (int cp = 1; cp <= checkpoints; ++cp) {
    const double target_t = T * cp / checkpoints;
    while (t < target_t - 1e-12) {
      const double h = std::min(dt, target_t - t);
      flux = -out_rate.cwiseProduct(rho);
      for (int a = 0; a < grid.d; ++a) {
        const long long s = grid.stride[a];
        for (long long i = 0; i < nc; ++i) {
          if (rate_up[a][i] > 0.0) flux[i + s] += rate_up[a][i] * rho[i];
          if (rate_dn[a][i] > 0.0) flux[i - s] += rate_dn[a][i] * rho[i];
        }
      }
      rho += h * flux;
      t += h;
    }
    record(t);
  }
  return trace;
}

WeightReport empirical_weights(const std::vector<Vec>& samples, const MixtureTarget& target) {
  if (samples.empty()) throw std::invalid_argument("empirical_weights: no samples");
  WeightReport out;
  out.counts.assign(target.components.size(), 0);
  for (const auto& s : samples) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < target.components.size(); ++k) {
      const double d = (s - target.components[k].mean).squaredNorm();
      if (d < bd) {
        bd = d;
        best = static_cast<int>(k);
      }
    }
    ++out.counts[best];
  }
  const double m = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < target.components.size(); ++k) {
    const double p = target.components[k].weight;
    out.imbalance += p * std::pow(out.counts[k] / (m * p) - 1.0, 2.0);
  }
  return out;
}

}  // namespace spg
