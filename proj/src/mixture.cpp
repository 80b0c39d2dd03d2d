#include "spinglass/mixture.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace spg {

namespace {

// Golden-section minimization of f on [a,b].
double golden_min(const std::function<double(double)>& f, double a, double b, double tol = 1e-10) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return f(0.5 * (a + b));
}

// Grid scan then local refinement; returns the infimum of f over [lo, hi].
double refined_inf(const std::function<double(double)>& f, double lo, double hi, int grid) {
  double best = std::numeric_limits<double>::infinity();
  double arg = lo;
  for (int i = 0; i <= grid; ++i) {
    const double q = lo + (hi - lo) * i / grid;
    const double v = f(q);
    if (v < best) {
      best = v;
      arg = q;
    }
  }
  const double h = (hi - lo) / grid;
  const double a = std::max(lo, arg - h);
  const double b = std::min(hi, arg + h);
  return std::min(best, golden_min(f, a, b));
}

double safe_log1mq(double q) {
  // Capped near q=1; beyond the cap the margins are strongly negative anyway.
  const double cap = 1.0 - 1e-12;
  if (q >= cap) return std::log(1e-12);
  return std::log1p(-q);
}

}  // namespace

MixtureFunction::MixtureFunction(std::vector<double> coeffs, double tilt)
    : coeffs_(std::move(coeffs)), tilt_(tilt) {
  for (double c : coeffs_)
    if (!(c >= 0.0)) throw std::invalid_argument("mixture coefficients must be nonnegative");
  if (tilt_ < 0.0) throw std::invalid_argument("tilt must be nonnegative");
}

MixtureFunction MixtureFunction::from_pairs(const std::vector<std::pair<int, double>>& pairs, double tilt) {
  int pmax = 0;
  for (auto& [p, c] : pairs) {
    if (p < 1) throw std::invalid_argument("mixture degree must be >= 1");
    pmax = std::max(pmax, p);
  }
  std::vector<double> coeffs(pmax, 0.0);
  for (auto& [p, c] : pairs) coeffs[p - 1] += c;
  return MixtureFunction(std::move(coeffs), tilt);
}

double MixtureFunction::coeff(int p) const {
  if (p < 1 || p > static_cast<int>(coeffs_.size())) return 0.0;
  return coeffs_[p - 1];
}

double MixtureFunction::eval(double q, int order, MixturePart part) const {
  if (std::abs(q) > 1.0 + 1e-15) throw std::domain_error("mixture argument |q| > 1");
  if (order < 0) throw std::invalid_argument("derivative order must be >= 0");
  double out = 0.0;
  for (int p = 1; p <= static_cast<int>(coeffs_.size()); ++p) {
    if (part == MixturePart::NoLinear && p == 1) continue;
    if (part == MixturePart::NoQuadratic && p == 2) continue;
    if (p < order) continue;
    double fall = 1.0;
    for (int k = 0; k < order; ++k) fall *= (p - k);
    out += coeffs_[p - 1] * fall * std::pow(q, p - order);
  }
  if (part != MixturePart::NoLinear && tilt_ != 0.0) {
    if (order == 0) out += tilt_ * q;
    if (order == 1) out += tilt_;
  }
  return out;
}

double MixtureFunction::theta(double s, int order) const {
  if (s < 0.0 || s > 1.0) throw std::domain_error("theta argument outside [0,1]");
  if (order == 0) return eval(1.0) - eval(s) - (1.0 - s) * eval(s, 1);
  if (order == 1) return -(1.0 - s) * eval(s, 2);
  throw std::invalid_argument("theta order must be 0 or 1");
}

double MixtureFunction::gamma_q(double q, int order) const {
  if (q < 0.0 || q > 1.0) throw std::domain_error("gamma_q argument outside [0,1]");
  if (order == 0) return q * eval(q, 1);
  if (order == 1) return eval(q, 1) + q * eval(q, 2);
  throw std::invalid_argument("gamma_q order must be 0 or 1");
}

RegimeReport MixtureFunction::classify(int grid) const {
  if (grid < 1000) throw std::invalid_argument("classification grid must be >= 1000");
  RegimeReport rep;
  rep.linear_excluded = tilt_ > 0.0 || coeff(1) > 0.0;
  const double hi = 1.0 - 1.0 / grid;
  const auto xi1 = [&](double q, int order) { return eval(q, order, MixturePart::NoLinear); };

  rep.sl_margin = refined_inf(
      [&](double q) { return 1.0 / ((1.0 - q) * (1.0 - q)) - xi1(q, 2); }, 0.0, hi, grid);
  rep.sl = rep.sl_margin > 0.0;

  const double two_g2 = 2.0 * coeff(2);
  rep.nonshatter_margin = refined_inf(
      [&](double q) {
        const double ratio = q < 1e-12 ? two_g2 : xi1(q, 1) / q;
        return 1.0 / (1.0 - q) - ratio;
      },
      0.0, hi, grid);
  rep.nonshatter = rep.nonshatter_margin > 0.0;

  // Largest eps with (1/q^2)(xi_{~1}(q) + q + log(1-q)) <= -eps/2 and xi''(0) <= 1-eps.
  const double eps_curve = refined_inf(
      [&](double q) {
        if (q < 1e-9) return 1.0 - two_g2;  // series limit at q -> 0
        return -2.0 * (xi1(q, 0) + q + safe_log1mq(q)) / (q * q);
      },
      0.0, hi, grid);
  rep.strict_rs_eps = std::max(0.0, std::min(eps_curve, 1.0 - two_g2));
  return rep;
}

double MixtureFunction::q_star(double t, double tol) const {
  if (t < 0.0) throw std::invalid_argument("q_star tilt must be nonnegative");
  if (tol <= 0.0) throw std::invalid_argument("q_star tolerance must be positive");
  if (!classify(10000).sl) throw std::runtime_error("q_star requires the (SL) regime");
  const auto deriv = [&](double q) { return eval(q, 1, MixturePart::Full) - tilt_ + t; };
  const auto g = [&](double q) { return deriv(q) * (1.0 - q) - q; };
  const auto residual = [&](double q) { return std::abs(deriv(q) - q / (1.0 - q)); };
  double lo = 0.0, hi = 1.0 - 1e-12;
  if (g(lo) <= 0.0) return 0.0;  // xi_t'(0) = 0 case: root at the origin
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) <= tol) return mid;
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  const double q = 0.5 * (lo + hi);
  if (residual(q) > tol) throw std::runtime_error("q_star bisection did not reach tolerance");
  return q;
}

MixtureFunction MixtureFunction::tilted(double t) const {
  MixtureFunction out = *this;
  out.tilt_ = t;
  return out;
}

MixtureFunction MixtureFunction::scaled(double beta_sq) const {
  if (beta_sq < 0.0) throw std::invalid_argument("beta^2 must be nonnegative");
  MixtureFunction out = *this;
  for (double& c : out.coeffs_) c *= beta_sq;
  out.tilt_ = tilt_ * beta_sq;
  return out;
}

std::string MixtureFunction::describe() const {
  std::ostringstream os;
  for (int p = 1; p <= max_degree(); ++p)
    if (coeffs_[p - 1] > 0.0) os << p << ":" << coeffs_[p - 1] << " ";
  if (tilt_ > 0.0) os << "tilt:" << tilt_;
  return os.str();
}

double beta_sl_pure(int p) {
  if (p < 3) throw std::invalid_argument("pure SL threshold defined for p >= 3");
  const double smax = -golden_min(
      [&](double q) { return -std::pow(q, p - 2) * (1.0 - q) * (1.0 - q); }, 0.0, 1.0, 1e-13);
  return 1.0 / std::sqrt(static_cast<double>(p) * (p - 1) * smax);
}

double beta_shatter_pure(int p) {
  if (p < 3) throw std::invalid_argument("pure shattering threshold defined for p >= 3");
  const double smax = -golden_min(
      [&](double q) { return -std::pow(q, p - 2) * (1.0 - q); }, 0.0, 1.0, 1e-13);
  return 1.0 / std::sqrt(static_cast<double>(p) * smax);
}

}  // namespace spg
