#pragma once

// Seeded instance generators. Every stream is a std::mt19937_64 keyed by a
// 64-bit seed, and derived streams are keyed through splitmix64 so that a
// (seed, suite, trial) triple always reproduces the same instance.

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "cstarframe/cstar_core.hpp"
#include "cstarframe/hilbert_module.hpp"

namespace cstarframe {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a, used to fold string keys (suite names) into seeds.
inline std::uint64_t hash_name(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) { return splitmix64(seed ^ splitmix64(key)); }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  /// Standard complex Gaussian: E|z|^2 = 1.
  Complex complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * kInvSqrt2, im * kInvSqrt2};
  }

  Matrix complex_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_normal();
    }
    return m;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  static constexpr double kInvSqrt2 = 0.70710678118654752440;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

inline AlgebraElement random_element(const AlgebraSpec& spec, Rng& rng) {
  std::vector<Matrix> blocks;
  for (int d : spec.block_dims()) blocks.push_back(rng.complex_matrix(d, d));
  return {spec, std::move(blocks)};
}

/// v v^* for a random v; positive by construction.
inline AlgebraElement random_positive_element(const AlgebraSpec& spec, Rng& rng) {
  const AlgebraElement v = random_element(spec, rng);
  return v * v.adjoint();
}

inline ModuleVector random_vector(const AlgebraSpec& spec, int rank, Rng& rng) {
  std::vector<Matrix> rows;
  for (int d : spec.block_dims()) rows.push_back(rng.complex_matrix(d, static_cast<Eigen::Index>(rank) * d));
  return {spec, rank, std::move(rows)};
}

/// Random vector scaled to module norm one (zero is returned unchanged).
inline ModuleVector random_unit_vector(const AlgebraSpec& spec, int rank, Rng& rng) {
  ModuleVector x = random_vector(spec, rank, rng);
  const double n = vector_norm(x);
  return n > 0.0 ? (1.0 / n) * x : x;
}

inline ModuleOperator random_operator(const AlgebraSpec& spec, int dom_rank, int cod_rank, Rng& rng) {
  std::vector<Matrix> raw;
  for (int d : spec.block_dims()) raw.push_back(rng.complex_matrix(dom_rank * d, cod_rank * d));
  return {spec, dom_rank, cod_rank, std::move(raw)};
}

/// Random operator whose realization has rank at most `max_rank` in every block
/// (a product of Gaussian factors through a rank-`max_rank` bottleneck).
inline ModuleOperator random_low_rank_operator(const AlgebraSpec& spec, int dom_rank, int cod_rank, int max_rank,
                                               Rng& rng) {
  std::vector<Matrix> raw;
  for (int d : spec.block_dims()) {
    const Eigen::Index r = std::max(0, max_rank);
    const Matrix left = rng.complex_matrix(dom_rank * d, r);
    const Matrix right = rng.complex_matrix(r, cod_rank * d);
    raw.push_back(r == 0 ? Matrix(Matrix::Zero(dom_rank * d, cod_rank * d)) : Matrix(left * right));
  }
  return {spec, dom_rank, cod_rank, std::move(raw)};
}

}  // namespace cstarframe
