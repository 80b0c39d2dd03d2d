#include "spinglass/hamiltonian.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace spg {

namespace {

// Flat index convention: idx = i1*N^(p-1) + ... + ip (last index fastest).
// Contract the last slot with sigma: (N^(p-1)) <- (N^p).
Vec contract_last(const Vec& cur, const Vec& sigma) {
  const int n = static_cast<int>(sigma.size());
  const Eigen::Index rest = cur.size() / n;
  return Eigen::Map<const Mat>(cur.data(), n, rest).transpose() * sigma;
}

// Contract the first slot with sigma.
Vec contract_first(const Vec& cur, const Vec& sigma) {
  const int n = static_cast<int>(sigma.size());
  const Eigen::Index rest = cur.size() / n;
  return Eigen::Map<const Mat>(cur.data(), rest, n) * sigma;
}

std::uint64_t ipow(std::uint64_t base, int e) {
  std::uint64_t out = 1;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

}  // namespace

double overlap(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("overlap: dimension mismatch");
  return a.dot(b) / a.size();
}

Vec renormalize(const Vec& v) {
  const double norm = v.norm();
  if (!(norm > 0.0)) throw std::runtime_error("renormalize: zero vector");
  return v * (std::sqrt(static_cast<double>(v.size())) / norm);
}

Vec uniform_sphere(int n, Rng& rng) {
  Vec z(n);
  for (int i = 0; i < n; ++i) z[i] = rng.normal();
  return renormalize(z);
}

Vec tangent_project(const Vec& sigma, const Vec& v) {
  return v - sigma * (sigma.dot(v) / sigma.size());
}

Hamiltonian Hamiltonian::sample(const MixtureFunction& m, int dim, std::uint64_t seed,
                                std::uint64_t memory_cap) {
  if (dim < 1) throw std::invalid_argument("Hamiltonian dimension must be >= 1");
  Hamiltonian h;
  h.mixture_ = m;
  h.dim_ = dim;
  h.seed_ = seed;
  h.field_ = Vec::Zero(dim);
  std::uint64_t total = 0;
  for (int p = 1; p <= m.max_degree() || p == 1; ++p) {
    // The tilt is a Gaussian external field: it folds into the degree-1 variance.
    const double var = m.coeff(p) + (p == 1 ? m.tilt() : 0.0);
    if (var <= 0.0) {
      if (p > m.max_degree()) break;
      continue;
    }
    const std::uint64_t entries = ipow(dim, p);
    total += entries;
    if (total > memory_cap)
      throw std::runtime_error("Hamiltonian tensor cap exceeded at degree p=" + std::to_string(p));
    Vec flat(static_cast<Eigen::Index>(entries));
    for (std::uint64_t i = 0; i < entries; ++i)
      flat[static_cast<Eigen::Index>(i)] = counter_normal(seed, p, i);
    h.tensors_.emplace_back(p, std::move(flat));
    if (p > m.max_degree()) break;
  }
  return h;
}

const Vec& Hamiltonian::spike_direction() const {
  if (!spike_) throw std::runtime_error("Hamiltonian has no spike");
  return spike_->x;
}

const MixtureFunction& Hamiltonian::spike_mixture() const {
  if (!spike_) throw std::runtime_error("Hamiltonian has no spike");
  return spike_->mix;
}

double Hamiltonian::disorder_energy(const Vec& sigma) const {
  double out = 0.0;
  for (const auto& [p, flat] : tensors_) {
    Vec cur = flat;
    for (int k = 0; k < p; ++k) cur = contract_last(cur, sigma);
    const double var = mixture_.coeff(p) + (p == 1 ? mixture_.tilt() : 0.0);
    out += std::sqrt(var) * std::pow(static_cast<double>(dim_), -0.5 * (p - 1)) * cur[0];
  }
  return out;
}

double Hamiltonian::energy(const Vec& sigma) const {
  if (sigma.size() != dim_) throw std::invalid_argument("energy: dimension mismatch");
  double out = disorder_energy(sigma);
  if (spike_) out += dim_ * spike_->mix.eval(overlap(spike_->x, sigma));
  out += field_.dot(sigma);
  return out;
}

Vec Hamiltonian::energies(const Mat& states) const {
  if (states.rows() != dim_) throw std::invalid_argument("energies: dimension mismatch");
  const Eigen::Index b = states.cols();
  Vec out = Vec::Zero(b);
  for (const auto& [p, flat] : tensors_) {
    const double var = mixture_.coeff(p) + (p == 1 ? mixture_.tilt() : 0.0);
    const double scale = std::sqrt(var) * std::pow(static_cast<double>(dim_), -0.5 * (p - 1));
    if (p == 1) {
      out.noalias() += scale * (states.transpose() * flat);
    } else if (p == 2) {
      const auto m = Eigen::Map<const Mat>(flat.data(), dim_, dim_);
      out.noalias() += scale * (m * states).cwiseProduct(states).colwise().sum().transpose();
    } else if (p == 3) {
      const auto m = Eigen::Map<const Mat>(flat.data(), dim_, static_cast<Eigen::Index>(dim_) * dim_);
      const Mat c = m.transpose() * states;  // (N^2 x b), rows indexed i1*N+i2
      for (Eigen::Index j = 0; j < b; ++j) {
        const auto d = Eigen::Map<const Mat>(c.col(j).data(), dim_, dim_);
        out[j] += scale * states.col(j).dot(d * states.col(j));
      }
    } else {
      for (Eigen::Index j = 0; j < b; ++j) {
        Vec cur = flat;
        for (int k = 0; k < p; ++k) cur = contract_last(cur, states.col(j));
        out[j] += scale * cur[0];
      }
    }
  }
  if (spike_) {
    for (Eigen::Index j = 0; j < b; ++j)
      out[j] += dim_ * spike_->mix.eval(overlap(spike_->x, states.col(j)));
  }
  if (field_.squaredNorm() > 0.0) out.noalias() += states.transpose() * field_;
  return out;
}

Vec Hamiltonian::gradient(const Vec& sigma, Frame frame) const {
  if (sigma.size() != dim_) throw std::invalid_argument("gradient: dimension mismatch");
  Vec grad = Vec::Zero(dim_);
  for (const auto& [p, flat] : tensors_) {
    const double var = mixture_.coeff(p) + (p == 1 ? mixture_.tilt() : 0.0);
    const double scale = std::sqrt(var) * std::pow(static_cast<double>(dim_), -0.5 * (p - 1));
    for (int free = 0; free < p; ++free) {
      Vec cur = flat;
      for (int k = p - 1; k > free; --k) cur = contract_last(cur, sigma);
      for (int k = 0; k < free; ++k) cur = contract_first(cur, sigma);
      grad.noalias() += scale * cur;
    }
  }
  if (spike_) grad.noalias() += spike_->x * spike_->mix.eval(overlap(spike_->x, sigma), 1);
  grad.noalias() += field_;
  if (frame == Frame::Spherical) return tangent_project(sigma, grad);
  return grad;
}

Mat Hamiltonian::hessian_origin() const {
  Mat h = Mat::Zero(dim_, dim_);
  for (const auto& [p, flat] : tensors_) {
    if (p != 2) continue;
    const auto m = Eigen::Map<const Mat>(flat.data(), dim_, dim_);
    h += std::sqrt(mixture_.coeff(2)) / std::sqrt(static_cast<double>(dim_)) *
         (m + Mat(m.transpose()));
  }
  if (spike_) h += spike_->mix.eval(0.0, 2) / dim_ * (spike_->x * spike_->x.transpose());
  return h;
}

Hamiltonian Hamiltonian::plant(const Vec& x, const MixtureFunction& spike_mixture) const {
  if (spike_) throw std::runtime_error("Hamiltonian already planted");
  if (x.size() != dim_) throw std::invalid_argument("plant: dimension mismatch");
  Hamiltonian out = *this;
  out.spike_ = Spike{x, spike_mixture};
  return out;
}

Hamiltonian Hamiltonian::with_field(const Vec& y) const {
  if (y.size() != dim_) throw std::invalid_argument("with_field: dimension mismatch");
  Hamiltonian out = *this;
  out.field_ = y;
  return out;
}

void Hamiltonian::dump_tensors(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open tensor dump file: " + path);
  const char magic[8] = {'S', 'P', 'G', 'T', 'E', 'N', 'S', '\0'};
  const std::uint32_t version = 1, n = static_cast<std::uint32_t>(dim_),
                      count = static_cast<std::uint32_t>(tensors_.size());
  const std::uint32_t pad[3] = {0, 0, 0};
  std::fwrite(magic, 1, 8, f);
  std::fwrite(&version, 4, 1, f);
  std::fwrite(&n, 4, 1, f);
  std::fwrite(&count, 4, 1, f);
  std::fwrite(pad, 4, 3, f);
  for (const auto& [p, flat] : tensors_) {
    const std::uint32_t deg = static_cast<std::uint32_t>(p);
    std::fwrite(&deg, 4, 1, f);
    std::fwrite(flat.data(), 8, static_cast<std::size_t>(flat.size()), f);
  }
  std::fclose(f);
}

}  // namespace spg
