#ifndef SPINGLASS_MIXTURE_HPP
#define SPINGLASS_MIXTURE_HPP

#include <string>
#include <vector>

namespace spg {

// Which terms of xi to include when evaluating.
enum class MixturePart { Full, NoLinear, NoQuadratic };

struct RegimeReport {
  bool sl = false;
  double sl_margin = 0.0;  // inf over q of 1/(1-q)^2 - xi''(q)
  bool nonshatter = false;
  double nonshatter_margin = 0.0;  // inf over q of 1/(1-q) - xi'(q)/q
  double strict_rs_eps = 0.0;      // largest eps in the strict-RS condition, 0 if none
  bool linear_excluded = false;    // classification dropped a linear term (gamma_1^2 or tilt)
};

// Mixture function xi(q) = sum_p gamma_p^2 q^p plus an optional linear tilt t*q.
// coeffs[p-1] = gamma_p^2. Immutable in spirit: operations are const.
class MixtureFunction {
 public:
  MixtureFunction() = default;
  explicit MixtureFunction(std::vector<double> coeffs, double tilt = 0.0);

  // Builder from (p, gamma_p^2) pairs as they appear in configs.
  static MixtureFunction from_pairs(const std::vector<std::pair<int, double>>& pairs, double tilt = 0.0);

  const std::vector<double>& coeffs() const { return coeffs_; }
  double tilt() const { return tilt_; }
  int max_degree() const { return static_cast<int>(coeffs_.size()); }
  double coeff(int p) const;  // gamma_p^2, 0 if beyond the list

  // d^order/dq^order of xi_t at q; the tilt contributes to orders 0 and 1 only
  // and is dropped (together with gamma_1^2) under NoLinear.
  double eval(double q, int order = 0, MixturePart part = MixturePart::Full) const;

  // theta(s) = xi(1) - xi(s) - (1-s)xi'(s); order 1 gives theta'(s) = -(1-s)xi''(s).
  // Invariant under the tilt (the linear pieces cancel).
  double theta(double s, int order = 0) const;

  // gamma(q) = q * xi_t'(q); order 1 gives xi_t'(q) + q xi_t''(q).
  double gamma_q(double q, int order = 0) const;

  // Regime margins on xi_{~1} by grid minimization plus golden-section refinement.
  RegimeReport classify(int grid = 100000) const;

  // Unique root of xi_t'(q) = q/(1-q) on [0,1); requires (SL).
  double q_star(double t, double tol = 1e-12) const;

  // Copy with the tilt field set to t.
  MixtureFunction tilted(double t) const;

  // Copy with every coefficient scaled by beta^2 (the beta-folding convention).
  MixtureFunction scaled(double beta_sq) const;

  std::string describe() const;

 private:
  std::vector<double> coeffs_;
  double tilt_ = 0.0;
};

// Pure p-spin critical temperatures, located numerically (tests hold the
// closed-form argmax expressions).
double beta_sl_pure(int p);
double beta_shatter_pure(int p);

}  // namespace spg

#endif
