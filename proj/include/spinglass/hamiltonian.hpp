#ifndef SPINGLASS_HAMILTONIAN_HPP
#define SPINGLASS_HAMILTONIAN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinglass/mixture.hpp"
#include "spinglass/rng.hpp"

namespace spg {

// States live on the scaled sphere S_N = sqrt(N) * S^{N-1}.
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

double overlap(const Vec& a, const Vec& b);         // <a,b>/N
Vec renormalize(const Vec& v);                      // rescale to ||v||^2 = N
Vec uniform_sphere(int n, Rng& rng);                // uniform on S_N
Vec tangent_project(const Vec& sigma, const Vec& v);  // (I - sigma sigma^T/N) v

enum class Frame { Euclidean, Spherical };

// Mixed p-spin Hamiltonian with dense unsymmetrized Gaussian tensors, an
// optional planted spike N*xi_spike(R(x,sigma)), and an optional explicit
// linear field <y,sigma>.
class Hamiltonian {
 public:
  static Hamiltonian sample(const MixtureFunction& m, int dim, std::uint64_t seed,
                            std::uint64_t memory_cap = 100000000ULL);

  const MixtureFunction& mixture() const { return mixture_; }
  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  bool has_spike() const { return spike_.has_value(); }
  const Vec& spike_direction() const;
  const MixtureFunction& spike_mixture() const;
  const Vec& field() const { return field_; }

  double energy(const Vec& sigma) const;
  Vec energies(const Mat& states) const;  // batched over columns
  Vec gradient(const Vec& sigma, Frame frame = Frame::Euclidean) const;
  Mat hessian_origin() const;

  Hamiltonian plant(const Vec& x, const MixtureFunction& spike_mixture) const;
  Hamiltonian with_field(const Vec& y) const;

  // Raw tensor dump: 32-byte header (magic, version, N, tensor count, padding),
  // then per tensor a u32 degree + flat little-endian doubles.
  void dump_tensors(const std::string& path) const;

 private:
  Hamiltonian() = default;
  double disorder_energy(const Vec& sigma) const;

  MixtureFunction mixture_;
  int dim_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<std::pair<int, Vec>> tensors_;  // (p, flat tensor of size N^p)
  struct Spike {
    Vec x;
    MixtureFunction mix;
  };
  std::optional<Spike> spike_;
  Vec field_;
};

}  // namespace spg

#endif
