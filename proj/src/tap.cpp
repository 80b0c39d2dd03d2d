#include "spinglass/tap.hpp"

#include <cmath>
#include <stdexcept>

namespace spg {

namespace {

void require_qm(const MixtureFunction& xi, double qm) {
  if (!(qm > 0.0 && qm < 1.0)) throw std::domain_error("tap: q_m must lie in (0,1)");
  if (xi.eval(qm, 1) <= 0.0) throw std::domain_error("tap: xi'(q_m) must be positive");
  if (xi.gamma_q(qm, 1) <= 0.0) throw std::domain_error("tap: gamma'(q_m) must be positive");
}

// Onsager-corrected drift coefficient 1/(1-q) - theta'(q), positive on [0,1).
double onsager_denom(const MixtureFunction& xi, double q) {
  return 1.0 / (1.0 - q) - xi.theta(q, 1);
}

}  // namespace

TapContext TapContext::make(const MixtureFunction& xi, double t, int n, std::uint64_t seed,
                            const Vec& x, double iota) {
  if (t < 0.0) throw std::invalid_argument("TapContext: tilt must be nonnegative");
  if (x.size() != n) throw std::invalid_argument("TapContext: spike dimension mismatch");
  std::vector<double> coeffs = xi.coeffs();
  if (coeffs.empty()) coeffs.resize(1, 0.0);
  coeffs[0] += t + xi.tilt();  // fold the tilt into the degree-1 disorder variance
  MixtureFunction folded(coeffs);
  return TapContext{Hamiltonian::sample(folded, n, seed).plant(x, folded), folded, x,
                    Vec::Zero(n), iota};
}

TapGeometry TapContext::geometry() const {
  TapGeometry g;
  g.xi_t = xi;
  g.q_m = q_m();
  g.q_x = q_x();
  g.n = static_cast<double>(x.size());
  return g;
}

bool TapContext::in_region(double q_star) const {
  return std::abs(q_m() - q_star) <= iota && std::abs(q_x() - q_star) <= iota;
}

double f_tap(const TapContext& ctx, const Vec& point) {
  const double q = overlap(point, point);
  if (q >= 1.0) throw std::domain_error("f_tap: point must lie strictly inside the ball");
  const double n = static_cast<double>(point.size());
  return ctx.h.energy(point) + 0.5 * n * (ctx.xi.theta(q) + std::log1p(-q));
}

Vec f_tap_gradient(const TapContext& ctx, const Vec& point) {
  const double q = overlap(point, point);
  if (q >= 1.0) throw std::domain_error("f_tap: point must lie strictly inside the ball");
  return ctx.h.gradient(point) + (ctx.xi.theta(q, 1) - 1.0 / (1.0 - q)) * point;
}

TapSearchResult find_tap_point(const TapContext& ctx, const Vec& init, double tol, int max_iters) {
  if (tol <= 0.0) throw std::invalid_argument("find_tap_point: tolerance must be positive");
  const int n = ctx.h.dim();
  double qstar = -1.0;
  try {
    qstar = ctx.xi.q_star(0.0);
  } catch (const std::exception&) {
    // no (SL) certificate: run without region clipping
  }
  const double alpha = 0.3;
  TapSearchResult out;
  out.m = init;
  const double sqn = std::sqrt(static_cast<double>(n));
  for (int it = 0; it < max_iters; ++it) {
    out.iterations = it + 1;
    const double q = overlap(out.m, out.m);
    if (q >= 1.0) throw std::runtime_error("find_tap_point: iterate left the open ball");
    const Vec grad = f_tap_gradient(ctx, out.m);
    out.residual = grad.norm() / sqn;
    out.residual_trace.push_back(out.residual);
    if (out.residual <= tol) {
      out.converged = true;
      return out;
    }
    Vec next = (1.0 - alpha) * out.m + alpha * ctx.h.gradient(out.m) / onsager_denom(ctx.xi, q);
    if (qstar >= 0.0) {
      // clip back into the slab |q_x - q_*| <= iota along the spike direction
      const double lo_x = qstar - ctx.iota, hi_x = qstar + ctx.iota;
      double qx = overlap(next, ctx.x);
      const double cx = std::min(hi_x, std::max(lo_x, qx));
      if (cx != qx) {
        next += (cx - qx) * ctx.x;
        qx = cx;
        out.exited_region = true;
      }
      // then fix |q_m - q_*| <= iota by rescaling the component orthogonal to x
      const double qm = overlap(next, next);
      double cm = std::min(qstar + ctx.iota, std::max(qstar - ctx.iota, qm));
      if (cm != qm) {
        out.exited_region = true;
        cm = std::max(cm, qx * qx);
        Vec perp = next - qx * ctx.x;
        const double psq = overlap(perp, perp);
        if (psq > 1e-14)
          next = qx * ctx.x + std::sqrt((cm - qx * qx) / psq) * perp;
        else
          next = qx * ctx.x;
      }
    }
    out.m = next;
  }
  const Vec grad = f_tap_gradient(ctx, out.m);
  out.residual = grad.norm() / sqn;
  return out;
}

double tap_mean_over_n(const TapGeometry& g, double r_x_sigma, double r_m_sigma) {
  require_qm(g.xi_t, g.q_m);
  const double d1 = g.xi_t.eval(g.q_m, 1);
  const double d2 = g.xi_t.eval(g.q_m, 2);
  const double gp = g.xi_t.gamma_q(g.q_m, 1);
  const double ds = g.xi_t.eval(r_m_sigma, 1);
  return g.xi_t.eval(r_x_sigma) -
         (ds / d1) * (r_x_sigma - (d2 / gp) * r_m_sigma * g.q_x) * g.xi_t.eval(g.q_x, 1) +
         (ds / gp) * r_m_sigma * ((1.0 - g.q_m) * d2 + 1.0 / (1.0 - g.q_m));
}

ConditionalLaw conditional_law(const TapContext& ctx, const Vec& sigma, const Vec& sigma_prime) {
  const TapGeometry g = ctx.geometry();
  require_qm(g.xi_t, g.q_m);
  const double d1 = g.xi_t.eval(g.q_m, 1);
  const double d2 = g.xi_t.eval(g.q_m, 2);
  const double gp = g.xi_t.gamma_q(g.q_m, 1);
  const double rms = overlap(ctx.m, sigma);
  const double rmsp = overlap(ctx.m, sigma_prime);
  const double rss = overlap(sigma, sigma_prime);
  ConditionalLaw out;
  out.mean = g.n * tap_mean_over_n(g, overlap(ctx.x, sigma), rms);
  out.cov = g.n * (g.xi_t.eval(rss) -
                   rss * g.xi_t.eval(rms, 1) * g.xi_t.eval(rmsp, 1) / d1 +
                   (d2 / (gp * d1)) * (rms * g.xi_t.eval(rms, 1)) * (rmsp * g.xi_t.eval(rmsp, 1)));
  return out;
}

ConditioningOracle gaussian_conditioning_oracle(const TapContext& ctx, const std::vector<Vec>& points) {
  const int n = ctx.h.dim();
  if (n > 8) throw std::invalid_argument("gaussian_conditioning_oracle: N must be <= 8");
  if (points.empty() || points.size() > 10)
    throw std::invalid_argument("gaussian_conditioning_oracle: 1 to 10 points");
  const MixtureFunction& xi = ctx.xi;
  const double qm = ctx.q_m();
  require_qm(xi, qm);
  const double qx = ctx.q_x();
  const int k = static_cast<int>(points.size());
  const double nd = static_cast<double>(n);

  Mat c_hh(k, k), c_hg(k, n);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) c_hh(i, j) = nd * xi.eval(overlap(points[i], points[j]));
    const double dprime = xi.eval(overlap(ctx.m, points[i]), 1);
    for (int l = 0; l < n; ++l) c_hg(i, l) = points[i][l] * dprime;
  }
  Mat c_gg = xi.eval(qm, 1) * Mat::Identity(n, n) +
             (xi.eval(qm, 2) / nd) * ctx.m * ctx.m.transpose();
  const Vec g0 = -xi.eval(qx, 1) * ctx.x -
                 (xi.theta(qm, 1) - 1.0 / (1.0 - qm)) * ctx.m;

  Eigen::SelfAdjointEigenSolver<Mat> es(c_gg);
  const double thresh = 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff();
  Vec inv_eigs = Vec::Zero(n);
  ConditioningOracle out;
  for (int i = 0; i < n; ++i) {
    if (es.eigenvalues()[i] > thresh)
      inv_eigs[i] = 1.0 / es.eigenvalues()[i];
    else
      out.pseudo_inverse = true;
  }
  const Mat ginv = es.eigenvectors() * inv_eigs.asDiagonal() * es.eigenvectors().transpose();

  out.means = c_hg * (ginv * g0);
  for (int i = 0; i < k; ++i) out.means[i] += nd * xi.eval(overlap(ctx.x, points[i]));
  out.cov = c_hh - c_hg * ginv * c_hg.transpose();
  return out;
}

BandGeometry band(const TapGeometry& g, double a, double b) {
  require_qm(g.xi_t, g.q_m);
  if (g.n <= 0.0) throw std::domain_error("band: dimension must be positive");
  if (g.q_m <= g.q_x * g.q_x)
    throw std::domain_error("band: need q_m > q_x^2 (m not collinear with x)");
  const double sn = std::sqrt(g.n);
  const double qma = g.q_m * (1.0 + a / sn);
  if (qma <= 0.0 || qma > 1.0) throw std::domain_error("band: shifted overlap q_m(1+a/sqrt(N)) outside (0,1]");
  const double denom = g.q_m - g.q_x * g.q_x;
  const double c1 = 1.0 + (a * g.q_m - b * g.q_x * g.q_x) / (sn * denom);
  const double c2 = (g.q_m * g.q_x / denom) * (b - a) / sn;
  BandGeometry out;
  out.a = a;
  out.b = b;
  out.vsq = c1 * c1 * g.q_m + 2.0 * c1 * c2 * g.q_x + c2 * c2;
  out.r2 = 1.0 - out.vsq;
  if (out.r2 <= 0.0) throw std::domain_error("band: center leaves the sphere (r^2 <= 0)");

  const double d1 = g.xi_t.eval(g.q_m, 1);
  std::vector<double> coeffs(std::max(2, g.xi_t.max_degree()), 0.0);
  double lin = out.r2 * g.xi_t.eval(out.vsq, 1) -
               out.r2 * std::pow(g.xi_t.eval(qma, 1), 2.0) / d1;
  if (lin < -1e-10) throw std::runtime_error("band: negative linear coefficient");
  coeffs[0] = std::max(0.0, lin);
  double fact = 1.0;
  for (int p = 2; p <= g.xi_t.max_degree(); ++p) {
    fact *= p;
    coeffs[p - 1] = std::pow(out.r2, p) * g.xi_t.eval(out.vsq, p) / fact;
  }
  out.xi_ab = MixtureFunction(coeffs);

  const double d2 = g.xi_t.eval(g.q_m, 2);
  const double gp = g.xi_t.gamma_q(g.q_m, 1);
  out.v_scalar = g.xi_t.eval(out.vsq) -
                 out.vsq * std::pow(g.xi_t.eval(qma, 1), 2.0) / d1 +
                 (d2 / (gp * d1)) * std::pow(g.xi_t.gamma_q(qma), 2.0);
  return out;
}

BandGeometry band(const TapContext& ctx, double a, double b) {
  BandGeometry out = band(ctx.geometry(), a, b);
  const double sn = std::sqrt(static_cast<double>(ctx.h.dim()));
  const double denom = ctx.q_m() - ctx.q_x() * ctx.q_x();
  const double c1 = 1.0 + (a * ctx.q_m() - b * ctx.q_x() * ctx.q_x()) / (sn * denom);
  const double c2 = (ctx.q_m() * ctx.q_x() / denom) * (b - a) / sn;
  out.center = c1 * ctx.m + c2 * ctx.x;
  return out;
}

double e_hat(const TapGeometry& g, double a, double b) {
  const BandGeometry bg = band(g, a, b);
  const double sn = std::sqrt(g.n);
  const double qma = g.q_m * (1.0 + a / sn);
  const double qxb = g.q_x * (1.0 + b / sn);
  // slice entropy + conditional-mean energy density, relative to the full sphere
  return 0.5 * (std::log(bg.r2) - g.xi_t.eval(bg.vsq) -
                bg.r2 * std::pow(g.xi_t.eval(qma, 1), 2.0) / g.xi_t.eval(g.q_m, 1)) +
         tap_mean_over_n(g, qxb, qma);
}

Eigen::Vector2d e_hat_gradient(const TapGeometry& g, double a, double b) {
  const double h = 1e-4;
  Eigen::Vector2d out;
  out[0] = (e_hat(g, a + h, b) - e_hat(g, a - h, b)) / (2.0 * h);
  out[1] = (e_hat(g, a, b + h) - e_hat(g, a, b - h)) / (2.0 * h);
  return out;
}

Eigen::Matrix2d e_hat_hessian(const TapGeometry& g, double a, double b) {
  const double h = 1e-4;
  Eigen::Matrix2d out;
  out(0, 0) = (e_hat(g, a + h, b) - 2.0 * e_hat(g, a, b) + e_hat(g, a - h, b)) / (h * h);
  out(1, 1) = (e_hat(g, a, b + h) - 2.0 * e_hat(g, a, b) + e_hat(g, a, b - h)) / (h * h);
  out(0, 1) = (e_hat(g, a + h, b + h) - e_hat(g, a + h, b - h) - e_hat(g, a - h, b + h) +
               e_hat(g, a - h, b - h)) /
              (4.0 * h * h);
  out(1, 0) = out(0, 1);
  return out;
}

}  // namespace spg
