#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "spinglass/dynamics.hpp"
#include "spinglass/tap.hpp"

using spg::Hamiltonian;
using spg::Mat;
using spg::MixtureFunction;
using spg::Rng;
using spg::TapContext;
using spg::TapGeometry;
using spg::Vec;

namespace {

// m with prescribed q_m = R(m,m) and q_x = R(m,x).
Vec make_m(const Vec& x, double qm, double qx, Rng& rng) {
  const int n = static_cast<int>(x.size());
  Vec perp = spg::tangent_project(x, spg::uniform_sphere(n, rng));
  perp *= std::sqrt((qm - qx * qx) * n) / perp.norm();
  return qx * x + perp;
}

TapContext random_context(int n, Rng& rng) {
  const double g1 = 0.3 + 0.7 * rng.uniform();
  const double g2 = 0.1 + 0.2 * rng.uniform();
  const double g3 = 0.15 * rng.uniform();
  MixtureFunction xi({g1, g2, g3});
  Vec x = spg::uniform_sphere(n, rng);
  TapContext ctx{Hamiltonian::sample(xi, n, rng.engine()()).plant(x, xi), xi, x, Vec::Zero(n), 0.5};
  const double qm = 0.25 + 0.5 * rng.uniform();
  const double qx = (0.2 + 0.7 * rng.uniform()) * std::sqrt(qm);
  ctx.m = make_m(x, qm, qx, rng);
  return ctx;
}

// two-sample Kolmogorov-Smirnov p-value (asymptotic)
double ks_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = a.size(), nb = b.size();
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) ++i; else ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  const double lambda = (en + 0.12 + 0.11 / en) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) p += 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST_CASE("f_tap value and gradient") {
  const int n = 10;
  Rng rng(1);
  // no linear part: F(0) = (N/2) xi(1)
  MixtureFunction pure({0.0, 0.3, 0.2});
  Vec x = spg::uniform_sphere(n, rng);
  TapContext ctx0{Hamiltonian::sample(pure, n, 3), pure, x, Vec::Zero(n), 0.5};
  CHECK(spg::f_tap(ctx0, Vec::Zero(n)) == doctest::Approx(0.5 * n * pure.eval(1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(spg::f_tap(ctx0, 1.1 * x), std::domain_error);

  // FD gradient at a random interior point, planted + tilted context
  auto ctx = TapContext::make(MixtureFunction({0.0, 0.3, 0.1}), 0.7, n, 11, x, 0.5);
  ctx.m = make_m(x, 0.5, 0.4, rng);
  const Vec g = spg::f_tap_gradient(ctx, ctx.m);
  const double h = 1e-5;
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = h;
    const double fd = (spg::f_tap(ctx, ctx.m + e) - spg::f_tap(ctx, ctx.m - e)) / (2.0 * h);
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("find_tap_point zero disorder matches the 1D critical equation") {
  const int n = 40;
  MixtureFunction xi_t({0.5, 0.3, 0.2});
  Rng rng(2);
  Vec x = spg::uniform_sphere(n, rng);
  TapContext ctx{Hamiltonian::sample(MixtureFunction({0.0}), n, 1).plant(x, xi_t), xi_t, x,
                 Vec::Zero(n), 0.6};
  // oracle: xi_t'(c) = c/(1-c^2) + c(1-c^2) xi_t''(c^2), bisected on (0,1)
  const auto f = [&](double c) {
    return xi_t.eval(c, 1) - c / (1.0 - c * c) - c * (1.0 - c * c) * xi_t.eval(c * c, 2);
  };
  double lo = 0.05, hi = 0.95;
  REQUIRE(f(lo) > 0.0);
  REQUIRE(f(hi) < 0.0);
  for (int it = 0; it < 100; ++it) (f(0.5 * (lo + hi)) > 0.0 ? lo : hi) = 0.5 * (lo + hi);
  const double c = 0.5 * (lo + hi);

  auto res = spg::find_tap_point(ctx, 0.4 * x, 1e-9);
  CHECK(res.converged);
  CHECK(res.residual <= 1e-9);
  CHECK((res.m - c * x).norm() / std::sqrt(static_cast<double>(n)) <= 1e-6);
}

TEST_CASE("find_tap_point multi-start uniqueness in the (SL) regime") {
  const int n = 30;
  Rng xrng(3);
  auto ctx = TapContext::make(MixtureFunction({0.0, 0.3}), 1.0, n, 7,
                              spg::uniform_sphere(n, xrng), 0.15);
  const double qs = ctx.xi.q_star(0.0);
  CHECK(qs == doctest::Approx(0.573384417).epsilon(1e-6));
  Rng rng(4);
  std::vector<Vec> found;
  for (int s = 0; s < 20; ++s) {
    const double qm = qs + 0.12 * (2.0 * rng.uniform() - 1.0);
    const double qx = qs + 0.12 * (2.0 * rng.uniform() - 1.0);
    auto res = spg::find_tap_point(ctx, make_m(ctx.x, std::max(qm, qx * qx + 0.01), qx, rng), 1e-7);
    CHECK(res.converged);
    found.push_back(res.m);
  }
  const double sqn = std::sqrt(static_cast<double>(n));
  for (std::size_t i = 1; i < found.size(); ++i)
    CHECK((found[i] - found[0]).norm() / sqn <= 1e-4);
}

TEST_CASE("conditional law closed-form substitutions") {
  const int n = 20;
  Rng rng(5);
  auto ctx = random_context(n, rng);
  const double qm = ctx.q_m();
  const auto& xi = ctx.xi;
  auto at_m = spg::conditional_law(ctx, ctx.m, ctx.m);
  const double pred = xi.eval(qm) - qm * xi.eval(qm, 1) +
                      xi.eval(qm, 2) * std::pow(xi.gamma_q(qm), 2.0) /
                          (xi.gamma_q(qm, 1) * xi.eval(qm, 1));
  CHECK(at_m.cov / n == doctest::Approx(pred).epsilon(1e-12));

  // linear xi: conditioning on the gradient determines the process, cov = 0
  MixtureFunction lin({0.8});
  TapContext lctx{Hamiltonian::sample(lin, n, 9).plant(ctx.x, lin), lin, ctx.x, ctx.m, 0.5};
  for (int k = 0; k < 5; ++k) {
    Vec s = spg::uniform_sphere(n, rng), sp = spg::uniform_sphere(n, rng);
    auto law = spg::conditional_law(lctx, s, sp);
    CHECK(std::abs(law.cov) <= 1e-10);
    CHECK(law.mean / n ==
          doctest::Approx(spg::overlap(lctx.m, s) / (1.0 - lctx.q_m())).epsilon(1e-10));
  }
}

TEST_CASE("conditional law matches the Gaussian conditioning oracle") {
  const int n = 5;
  for (int c = 0; c < 20; ++c) {
    Rng rng(100 + c);
    auto ctx = random_context(n, rng);
    std::vector<Vec> pts;
    for (int k = 0; k < 6; ++k) pts.push_back(spg::uniform_sphere(n, rng));
    auto oracle = spg::gaussian_conditioning_oracle(ctx, pts);
    CHECK_FALSE(oracle.pseudo_inverse);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        auto law = spg::conditional_law(ctx, pts[i], pts[j]);
        CHECK(std::abs(law.cov - oracle.cov(i, j)) / (1.0 + std::abs(oracle.cov(i, j))) <= 1e-8);
        if (i == j)
          CHECK(std::abs(law.mean - oracle.means[i]) / (1.0 + std::abs(oracle.means[i])) <= 1e-8);
      }
    }
  }
}

TEST_CASE("conditional covariance kernel is symmetric PSD") {
  const int n = 7;
  for (int c = 0; c < 10; ++c) {
    Rng rng(300 + c);
    auto ctx = random_context(n, rng);
    const int k = 10;
    std::vector<Vec> pts;
    for (int i = 0; i < k; ++i) pts.push_back(spg::uniform_sphere(n, rng));
    Mat kernel(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) kernel(i, j) = spg::conditional_law(ctx, pts[i], pts[j]).cov;
    CHECK((kernel - kernel.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    Eigen::SelfAdjointEigenSolver<Mat> es(kernel);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("band geometry") {
  MixtureFunction xi({1.0, 0.3, 0.1});
  const double qs = xi.q_star(0.0);
  TapGeometry g{xi, qs, qs, 400.0};

  auto b0 = spg::band(g, 0.0, 0.0);
  CHECK(b0.vsq == doctest::Approx(qs).epsilon(1e-12));
  CHECK(b0.r2 == doctest::Approx(1.0 - qs).epsilon(1e-12));
  CHECK(b0.xi_ab.eval(0.0) == 0.0);
  CHECK(b0.xi_ab.coeff(1) >= 0.0);
  CHECK(b0.xi_ab.coeff(1) <= 1e-14);  // xi'(q_m)^2 cancellation at q_x = q_m case a=b=0

  for (double a : {-0.8, 0.3}) {
    for (double b : {-0.5, 0.6}) {
      auto bg = spg::band(g, a, b);
      // radius identity from the slice construction
      const double sn = std::sqrt(g.n);
      const double alt = 1.0 - g.q_m * std::pow(1.0 + a / sn, 2.0) -
                         (g.q_m * g.q_x * g.q_x / (g.q_m - g.q_x * g.q_x)) *
                             std::pow((a - b) / sn, 2.0);
      CHECK(bg.r2 == doctest::Approx(alt).epsilon(1e-10));
      CHECK(bg.r2 + bg.vsq == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(bg.xi_ab.eval(0.0) == 0.0);
      for (int p = 2; p <= bg.xi_ab.max_degree(); ++p) CHECK(bg.xi_ab.coeff(p) >= 0.0);
      // direct transcription of the slice mixture definition
      for (double s : {0.2, 0.7, 1.0}) {
        const double direct = xi.eval(bg.vsq + bg.r2 * s) - xi.eval(bg.vsq) -
                              s * bg.r2 * std::pow(xi.eval(g.q_m * (1.0 + a / sn), 1), 2.0) /
                                  xi.eval(g.q_m, 1);
        CHECK(bg.xi_ab.eval(s) == doctest::Approx(direct).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(spg::band(g, 25.0, 0.0), std::domain_error);
}

TEST_CASE("band slice models stay strictly replica symmetric with a small field") {
  const double n = 1e4;
  const double eps = 0.5;
  const double lim = eps * std::pow(n, 0.1);
  for (double t : {0.3, 0.7, 1.0}) {
    MixtureFunction xi = MixtureFunction({0.0, 0.3, 0.1}).tilted(t);
    const double qs = xi.q_star(t);
    std::vector<double> folded = {t, 0.3, 0.1};
    TapGeometry g{MixtureFunction(folded), qs, qs, n};
    for (double a : {-lim, 0.0, lim}) {
      for (double b : {-lim, 0.0, lim}) {
        auto bg = spg::band(g, a, b);
        CHECK(bg.xi_ab.coeff(1) <= std::pow(n, -0.8));
        CHECK(bg.xi_ab.classify(2000).strict_rs_eps > 0.0);
      }
    }
  }
}

TEST_CASE("e_hat double entry through the conditioning oracle") {
  const int n = 8;
  Rng rng(17);
  MixtureFunction xi({0.6, 0.25, 0.05});
  Vec x = spg::uniform_sphere(n, rng);
  TapContext ctx{Hamiltonian::sample(xi, n, 23).plant(x, xi), xi, x, Vec::Zero(n), 0.5};
  ctx.m = make_m(x, 0.5, 0.45, rng);
  const TapGeometry g = ctx.geometry();
  for (auto [a, b] : {std::pair{0.0, 0.0}, {0.3, -0.2}, {-0.4, 0.25}}) {
    auto bg = spg::band(ctx, a, b);
    auto oracle = spg::gaussian_conditioning_oracle(ctx, {bg.center});
    const double composed = 0.5 * bg.xi_ab.eval(1.0) + 0.5 * std::log(bg.r2) +
                            oracle.means[0] / n - 0.5 * xi.eval(1.0);
    CHECK(spg::e_hat(g, a, b) == doctest::Approx(composed).epsilon(1e-8));
  }
}

TEST_CASE("e_hat is stationary and concave at the origin for TAP geometries") {
  Rng rng(29);
  int done = 0;
  while (done < 20) {
    const double g1 = 0.3 + 0.7 * rng.uniform();
    const double g2 = 0.1 + 0.25 * rng.uniform();
    const double g3 = 0.12 * rng.uniform();
    MixtureFunction xi({g1, g2, g3});
    if (!xi.classify(1000).sl) continue;
    const double qs = xi.q_star(0.0);
    TapGeometry g{xi, qs, qs, 1e4};
    CHECK(spg::e_hat_gradient(g, 0.0, 0.0).norm() <= 1e-4);
    Eigen::Matrix2d h = spg::e_hat_hessian(g, 0.0, 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
    CHECK(es.eigenvalues().maxCoeff() < 0.0);
    ++done;
  }
}

TEST_CASE("band energy fluctuations scale quartically in (a,b)") {
  const int n = 100;
  Rng rng(31);
  MixtureFunction xi({0.9, 0.3});
  Vec x = spg::uniform_sphere(n, rng);
  TapContext ctx{Hamiltonian::sample(xi, n, 37).plant(x, xi), xi, x, Vec::Zero(n), 0.5};
  const double qs = xi.q_star(0.0);
  ctx.m = make_m(x, qs, qs, rng);
  const auto var_diff = [&](double a, double b) {
    const Vec s = spg::band(ctx, a, b).center;
    const Vec s0 = spg::band(ctx, 0.0, 0.0).center;
    return (spg::conditional_law(ctx, s, s).cov + spg::conditional_law(ctx, s0, s0).cov -
            2.0 * spg::conditional_law(ctx, s, s0).cov) / n;
  };
  const double v1 = var_diff(1.2, -1.0);
  const double v2 = var_diff(0.6, -0.5);
  CHECK(v1 >= 0.0);
  CHECK(v2 >= 0.0);
  // halving (a,b) should shrink the variance by ~16x; allow a factor-2 band
  CHECK(v1 / v2 >= 8.0);
  CHECK(v1 / v2 <= 32.0);
}

TEST_CASE("planted spike is exchangeable with a Gibbs sample") {
  const int n = 12, reps = 200, steps = 4000;
  MixtureFunction xi({1.0, 0.3});
  const auto gibbs = [&](const Hamiltonian& h, Rng& rng) {
    Vec s = spg::uniform_sphere(n, rng);
    for (int i = 0; i < steps; ++i) s = spg::langevin_step(s, h, 1.0, 0.01, rng);
    return s;
  };
  std::vector<double> direct, relay;
  for (int r = 0; r < reps; ++r) {
    Rng rng(5000, r);
    // spike-then-sample
    Vec x = spg::uniform_sphere(n, rng);
    auto h = Hamiltonian::sample(xi, n, rng.engine()()).plant(x, xi);
    direct.push_back(spg::overlap(x, gibbs(h, rng)));
    // sample a Gibbs point first, then treat it as the spike of fresh disorder
    Vec x0 = spg::uniform_sphere(n, rng);
    auto h0 = Hamiltonian::sample(xi, n, rng.engine()()).plant(x0, xi);
    Vec s1 = gibbs(h0, rng);
    auto h1 = Hamiltonian::sample(xi, n, rng.engine()()).plant(s1, xi);
    relay.push_back(spg::overlap(s1, gibbs(h1, rng)));
  }
  CHECK(ks_pvalue(direct, relay) > 0.01);
}
