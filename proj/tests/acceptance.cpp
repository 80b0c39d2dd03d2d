// Acceptance gate: one line per criterion, exit 0 only if all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "spinglass/advice.hpp"
#include "spinglass/dynamics.hpp"
#include "spinglass/localization.hpp"
#include "spinglass/rmt.hpp"
#include "spinglass/tap.hpp"

using spg::DiscreteMeasure;
using spg::Hamiltonian;
using spg::Mat;
using spg::MixtureFunction;
using spg::Rng;
using spg::TapContext;
using spg::TapGeometry;
using spg::Vec;

namespace {

int failures = 0;

void report(int k, const char* what, bool pass, const std::string& detail) {
  std::printf("criterion %2d (%s): %s  [%s]\n", k, what, pass ? "PASS" : "FAIL", detail.c_str());
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Vec make_m(const Vec& x, double qm, double qx, Rng& rng) {
  const int n = static_cast<int>(x.size());
  Vec perp = spg::tangent_project(x, spg::uniform_sphere(n, rng));
  perp *= std::sqrt((qm - qx * qx) * n) / perp.norm();
  return qx * x + perp;
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0, worst_ratio = 1.0;
  for (int p = 3; p <= 16; ++p) {
    const double s = (p - 2.0) / p;
    const double closed_sl = 1.0 / std::sqrt(p * (p - 1.0) * std::pow(s, p - 2) * (1 - s) * (1 - s));
    const double u = (p - 2.0) / (p - 1.0);
    const double closed_sh = 1.0 / std::sqrt(p * std::pow(u, p - 2) * (1 - u));
    worst = std::max(worst, std::abs(spg::beta_sl_pure(p) - closed_sl));
    worst = std::max(worst, std::abs(spg::beta_shatter_pure(p) - closed_sh));
    worst_ratio = std::min(worst_ratio, spg::beta_sl_pure(p) / spg::beta_shatter_pure(p));
  }
  const double el = seconds_since(t0);
  const bool pass = worst <= 1e-6 && worst_ratio >= std::sqrt(std::exp(1.0)) / 2.0 && el < 1.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max dev %.2e, min ratio %.5f, %.2fs", worst, worst_ratio, el);
  report(1, "pure p-spin thresholds", pass, buf);
}

void criterion2() {
  bool pass = std::abs(spg::z2_prediction(Vec::Zero(40), 40)) <= 1e-10;
  double worst_l1 = 0.0, worst_l2 = 0.0;
  for (double xi2 : {0.1, 0.25, 0.5}) {
    const double b = std::sqrt(xi2);
    const double l1 =
        spg::semicircle_integral([&](double x) { return 1.0 - 1.0 / (1.0 + xi2 - b * x); }, 6000);
    const double l2 = spg::semicircle_integral(
        [&](double x) { return 2.0 / std::pow(1.0 + xi2 - b * x, 2.0); }, 6000);
    worst_l1 = std::max(worst_l1, std::abs(l1));
    worst_l2 = std::max(worst_l2, std::abs(l2 - 2.0 / (1.0 - xi2)) / (2.0 / (1.0 - xi2)));
  }
  pass = pass && worst_l1 <= 1e-10 && worst_l2 <= 1e-8;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "L1 %.2e, L2 rel %.2e", worst_l1, worst_l2);
  report(2, "RMT exactness at A=0", pass, buf);
}

void criterion3() {
  const MixtureFunction mix({0.0, 0.125});  // xi''(0) = 0.25
  int ok = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto h = Hamiltonian::sample(mix, 24, 9000 + rep);
    const auto an = spg::analyze_deg2(h);
    Rng rng(9500, rep);
    const auto mc = spg::mc_partition(h, 10000000LL, rng);
    const double dev = std::abs(mc.log_estimate - an.logz2);
    worst = std::max(worst, dev);
    if (dev <= 1.0) ++ok;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%d/20 within 1, worst dev %.3f", ok, worst);
  report(3, "degree-2 partition MC", ok >= 18, buf);
}

void criterion4() {
  const MixtureFunction mix({0.0, 0.1, 0.05});
  int ok = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto h = Hamiltonian::sample(mix, 24, 9100 + rep);
    const auto pred = spg::logz_full_prediction(h);
    Rng rng(9600, rep);
    const auto mc = spg::mc_partition(h, 10000000LL, rng);
    const double dev = std::abs(mc.log_estimate - pred.value);
    worst = std::max(worst, dev);
    if (pred.valid && dev <= 1.5) ++ok;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%d/20 within 1.5, worst dev %.3f", ok, worst);
  report(4, "strict-RS partition MC", ok >= 18, buf);
}

void criterion5() {
  const int n = 60;
  const auto h = Hamiltonian::sample(MixtureFunction({0.0, 0.125}), n, 77);
  const auto pred = spg::cov_prediction(h);
  Rng rng(78);
  Vec s = spg::uniform_sphere(n, rng);
  for (int i = 0; i < 100000; ++i) s = spg::langevin_step(s, h, 1.0, 0.01, rng);
  Mat acc = Mat::Zero(n, n);
  Vec mean = Vec::Zero(n);
  const long long steps = 1000000;
  for (long long i = 0; i < steps; ++i) {
    s = spg::langevin_step(s, h, 1.0, 0.01, rng);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(s);
    mean += s;
  }
  mean /= static_cast<double>(steps);
  Mat emp = Mat(acc.selfadjointView<Eigen::Lower>()) / static_cast<double>(steps) -
            mean * mean.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> diff(emp - pred.cov), base(pred.cov);
  const double rel = diff.eigenvalues().cwiseAbs().maxCoeff() /
                     base.eigenvalues().cwiseAbs().maxCoeff();
  const bool pass = pred.valid && rel <= 0.15 && std::abs(pred.trace_over_n - 1.0) <= 0.05;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "op-norm rel %.3f, trace/N %.4f", rel, pred.trace_over_n);
  report(5, "covariance heuristic", pass, buf);
}

void criterion6() {
  bool pass = true;
  double worst_db = 0.0;
  for (int c = 0; c < 20; ++c) {
    Rng rng(8000, c);
    const int d = 2 + static_cast<int>(rng.index(3));
    Vec w(1 << d);
    for (int i = 0; i < w.size(); ++i) w[i] = 0.1 + rng.uniform();
    const auto pi = DiscreteMeasure::cube(d, w);
    const Mat P = spg::glauber_matrix(pi);
    for (int i = 0; i < P.rows(); ++i)
      for (int j = 0; j < P.cols(); ++j)
        worst_db = std::max(worst_db, std::abs(pi.weights[i] * P(i, j) - pi.weights[j] * P(j, i)));
    const double gap = spg::spectral_gap(pi);
    Vec point = Vec::Zero(1 << d);
    point[static_cast<int>(rng.index(1 << d))] = 1.0;
    const auto traj = spg::chi2_trajectory(pi, DiscreteMeasure(pi.atoms, point), 2.0, 20);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const double env = std::exp(-2.0 * gap * traj.times[k]) * traj.chi2.front();
      if (traj.chi2[k] > env * (1.0 + 1e-9) + 1e-12) pass = false;
      const double mb = spg::mixing_bound({gap, 0.0}, traj.chi2.front(), traj.times[k],
                                          spg::MixingMode::Chi2);
      if (traj.chi2[k] > mb + 1e-12) pass = false;
    }
  }
  pass = pass && worst_db <= 1e-14;
  // balanced disconnected two-component gadget
  Vec gw(4);
  gw << 0.5, 0.0, 0.0, 0.5;
  const auto gadget = DiscreteMeasure::cube(2, gw);
  Rng grng(8999);
  const bool unref = !spg::weak_pi_probe(gadget, {1.0, 0.25 + 1e-6}, 200, grng).refuted;
  const bool ref = spg::weak_pi_probe(gadget, {1.0, 0.0}, 200, grng).refuted;
  pass = pass && unref && ref;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "db residual %.1e, gadget unrefuted=%d refuted=%d", worst_db,
                unref, ref);
  report(6, "functional exactness", pass, buf);
}

void criterion7() {
  Rng wrng(1);
  Mat atoms(10, 6);
  const int picks[10] = {0, 63, 5, 21, 34, 47, 12, 56, 9, 30};
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 6; ++j) atoms(i, j) = ((picks[i] >> j) & 1) ? 1.0 : -1.0;
  Vec w(10);
  for (int i = 0; i < 10; ++i) w[i] = 0.2 + wrng.uniform();
  const DiscreteMeasure pi(atoms, w);

  const int runs = 10000;
  Vec event_mass = Vec::Zero(5);
  const int events[5][3] = {{0, 1, 2}, {3, 4, -1}, {5, -1, -1}, {6, 7, 8}, {9, 0, -1}};
  for (int r = 0; r < runs; ++r) {
    Rng rng(7700, r);
    const auto path = spg::sl_path(pi, 1.0, 25, rng);
    const Vec wt = path.weights.row(path.weights.rows() - 1).transpose();
    for (int e = 0; e < 5; ++e)
      for (int j : events[e])
        if (j >= 0) event_mass[e] += wt[j];
  }
  bool pass = true;
  double worst = 0.0;
  for (int e = 0; e < 5; ++e) {
    double target = 0.0;
    for (int j : events[e])
      if (j >= 0) target += pi.weights[j];
    worst = std::max(worst, std::abs(event_mass[e] / runs - target));
  }
  pass = worst <= 0.02;

  bool cons = true;
  double worst_margin = 1e9;
  for (int f = 0; f < 5; ++f) {
    Rng rng(7800, f);
    Vec phi(10);
    for (int i = 0; i < 10; ++i) phi[i] = rng.uniform();
    const auto rep = spg::variance_conservation(pi, phi, 1.0, 8.0, 2000, rng);
    worst_margin = std::min(worst_margin, rep.ratio - (rep.lower_bound - 3.0 * rep.se));
    cons = cons && rep.ratio >= rep.lower_bound - 3.0 * rep.se;
  }
  char buf[140];
  std::snprintf(buf, sizeof(buf), "martingale dev %.4f, conservation margin %.3f", worst,
                worst_margin);
  report(7, "localization", pass && cons, buf);
}

void criterion8() {
  const int n = 5;
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    Rng rng(100 + c);
    const double g1 = 0.3 + 0.7 * rng.uniform();
    const double g2 = 0.1 + 0.2 * rng.uniform();
    const double g3 = 0.15 * rng.uniform();
    MixtureFunction xi({g1, g2, g3});
    Vec x = spg::uniform_sphere(n, rng);
    TapContext ctx{Hamiltonian::sample(xi, n, rng.engine()()).plant(x, xi), xi, x, Vec::Zero(n),
                   0.5};
    const double qm = 0.25 + 0.5 * rng.uniform();
    ctx.m = make_m(x, qm, (0.2 + 0.7 * rng.uniform()) * std::sqrt(qm), rng);
    std::vector<Vec> pts;
    for (int k = 0; k < 6; ++k) pts.push_back(spg::uniform_sphere(n, rng));
    const auto oracle = spg::gaussian_conditioning_oracle(ctx, pts);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        const auto law = spg::conditional_law(ctx, pts[i], pts[j]);
        worst = std::max(worst,
                         std::abs(law.cov - oracle.cov(i, j)) / (1.0 + std::abs(oracle.cov(i, j))));
        if (i == j)
          worst = std::max(worst, std::abs(law.mean - oracle.means[i]) /
                                      (1.0 + std::abs(oracle.means[i])));
      }
    }
  }
  // FD check of the TAP gradient
  double worst_fd = 0.0;
  {
    const int nn = 10;
    Rng rng(55);
    Vec x = spg::uniform_sphere(nn, rng);
    auto ctx = TapContext::make(MixtureFunction({0.0, 0.3, 0.1}), 0.7, nn, 11, x, 0.5);
    ctx.m = make_m(x, 0.5, 0.4, rng);
    const Vec g = spg::f_tap_gradient(ctx, ctx.m);
    for (int i = 0; i < nn; ++i) {
      Vec e = Vec::Zero(nn);
      e[i] = 1e-5;
      const double fd = (spg::f_tap(ctx, ctx.m + e) - spg::f_tap(ctx, ctx.m - e)) / 2e-5;
      worst_fd = std::max(worst_fd, std::abs(g[i] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  const bool pass = worst <= 1e-8 && worst_fd <= 1e-5;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "oracle rel dev %.2e, FD dev %.2e", worst, worst_fd);
  report(8, "TAP oracle", pass, buf);
}

void criterion9() {
  const double n = 1e4;
  const double lim = 0.5 * std::pow(n, 0.1);
  bool pass = true;
  double worst_lin = 0.0, worst_grad = 0.0, worst_eig = -1e9;
  for (double t : {0.3, 0.7, 1.0}) {
    std::vector<double> folded = {t, 0.3, 0.1};
    MixtureFunction xi(folded);
    const double qs = xi.q_star(0.0);
    TapGeometry g{xi, qs, qs, n};
    for (double a : {-lim, 0.0, lim}) {
      for (double b : {-lim, 0.0, lim}) {
        const auto bg = spg::band(g, a, b);
        worst_lin = std::max(worst_lin, bg.xi_ab.coeff(1));
        if (bg.xi_ab.classify(2000).strict_rs_eps <= 0.0) pass = false;
      }
    }
    worst_grad = std::max(worst_grad, spg::e_hat_gradient(g, 0.0, 0.0).norm());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(spg::e_hat_hessian(g, 0.0, 0.0));
    worst_eig = std::max(worst_eig, es.eigenvalues().maxCoeff());
  }
  pass = pass && worst_lin <= std::pow(n, -0.8) && worst_grad <= 1e-4 && worst_eig < 0.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "xi_ab'(0) max %.2e (cap %.2e), grad %.2e, top hess eig %.2e",
                worst_lin, std::pow(n, -0.8), worst_grad, worst_eig);
  report(9, "band calculus", pass, buf);
}

void criterion10() {
  Vec mu(1);
  mu << -10.0;
  spg::GaussianComponent a{0.5, mu, 1.0};
  mu << 10.0;
  spg::GaussianComponent b{0.5, mu, 1.0};
  const spg::MixtureTarget target({a, b});
  const int m = spg::sample_count(0.1, 0.5, 0.25);
  int good = 0;
  for (int r = 0; r < 50; ++r) {
    Rng rng(6200, r);
    const auto tr = spg::run_advice(target, m, 10.0, 0.05, rng, spg::AdviceInit::Advice, 5);
    if (tr.tv.back() <= 0.05) ++good;
  }
  double adv_min = 1.0;
  for (int r = 0; r < 5; ++r) {
    Rng rng(6300, r);
    const auto tr = spg::run_advice(target, m, 10.0, 0.05, rng, spg::AdviceInit::Adversarial, 5);
    adv_min = std::min(adv_min, tr.tv.back());
  }
  const bool pass = good >= 45 && adv_min >= 0.4;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "advice ok %d/50, adversarial min TV %.3f", good, adv_min);
  report(10, "advice vignette", pass, buf);
}

void criterion11() {
  const int n = 40, runs = 100;
  const MixtureFunction mix({0.0, 0.1, 0.05});
  spg::AnnealSchedule sched;
  sched.beta_max = 1.0;
  sched.delta = 0.25;
  sched.stage_time = 2.0;
  sched.step = 0.01;
  std::vector<double> overlaps;
  for (int r = 0; r < runs; ++r) {
    const auto h = Hamiltonian::sample(mix, n, 4000 + r);
    Rng r1(4100, r, 0), r2(4100, r, 1);
    const auto a = spg::run_annealed(h, sched, r1);
    const auto b = spg::run_annealed(h, sched, r2);
    overlaps.push_back(std::abs(spg::overlap(a.first, b.first)));
  }
  std::sort(overlaps.begin(), overlaps.end());
  const double median = 0.5 * (overlaps[49] + overlaps[50]);
  bool mono = true;
  for (double c : {0.2, 0.5}) {
    for (double eps : {0.001, 0.01, 0.1}) {
      for (double T : {1.0, 2.0, 4.0}) {
        if (spg::anneal_tv_bound(c, eps, 2.0 * T, 0.25, 1.0, 1.0, 1.0) >
            spg::anneal_tv_bound(c, eps, T, 0.25, 1.0, 1.0, 1.0) + 1e-15)
          mono = false;
        if (spg::anneal_tv_bound(c, 2.0 * eps, T, 0.25, 1.0, 1.0, 1.0) <
            spg::anneal_tv_bound(c, eps, T, 0.25, 1.0, 1.0, 1.0) - 1e-15)
          mono = false;
      }
    }
  }
  const bool pass = median <= 5.0 / std::sqrt(static_cast<double>(n)) && mono;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "median |R| %.4f (cap %.4f), bound monotone=%d", median,
                5.0 / std::sqrt(static_cast<double>(n)), mono);
  report(11, "annealing sanity", pass, buf);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();
  if (failures == 0) {
    std::printf("all 11 acceptance criteria pass\n");
    return 0;
  }
  std::printf("%d criteria failing\n", failures);
  return 1;
}
