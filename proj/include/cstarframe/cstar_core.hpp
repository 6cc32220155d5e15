#pragma once

// Finite-dimensional C*-algebras A = M_{d_1}(C) + ... + M_{d_B}(C) and their
// elements. Every finite-dimensional C*-algebra is of this form, so order and
// norm questions reduce to blockwise Hermitian eigenvalue computations.

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "cstarframe/errors.hpp"
#include "cstarframe/linalg.hpp"

namespace cstarframe {

class AlgebraSpec {
 public:
  AlgebraSpec() : dims_{1} {}
  explicit AlgebraSpec(std::vector<int> block_dims) : dims_(std::move(block_dims)) {
    if (dims_.empty()) throw StructuralError("algebra spec needs at least one block");
    for (int d : dims_) {
      if (d < 1) throw StructuralError("algebra block size must be >= 1, got " + std::to_string(d));
    }
  }
  AlgebraSpec(std::initializer_list<int> dims) : AlgebraSpec(std::vector<int>(dims)) {}

  /// The scalar algebra C.
  static AlgebraSpec scalar() { return AlgebraSpec{1}; }

  const std::vector<int>& block_dims() const noexcept { return dims_; }
  std::size_t num_blocks() const noexcept { return dims_.size(); }
  int dim(std::size_t b) const { return dims_.at(b); }
  int max_dim() const noexcept { return *std::max_element(dims_.begin(), dims_.end()); }

  /// Complex dimension sum_b d_b^2.
  int total_dimension() const noexcept {
    return std::accumulate(dims_.begin(), dims_.end(), 0, [](int acc, int d) { return acc + d * d; });
  }

  std::string to_string() const {
    std::string out = "[";
    for (std::size_t b = 0; b < dims_.size(); ++b) out += (b ? "," : "") + std::to_string(dims_[b]);
    return out + "]";
  }

  friend bool operator==(const AlgebraSpec&, const AlgebraSpec&) = default;

 private:
  std::vector<int> dims_;
};

inline void require_same_spec(const AlgebraSpec& a, const AlgebraSpec& b, const char* what) {
  if (a != b) {
    throw StructuralError(std::string(what) + ": algebra spec mismatch " + a.to_string() + " vs " + b.to_string());
  }
}

class AlgebraElement {
 public:
  AlgebraElement() : AlgebraElement(zero(AlgebraSpec{})) {}

  AlgebraElement(AlgebraSpec spec, std::vector<Matrix> blocks) : spec_(std::move(spec)), blocks_(std::move(blocks)) {
    if (blocks_.size() != spec_.num_blocks()) {
      throw StructuralError("algebra element has " + std::to_string(blocks_.size()) + " blocks, spec " +
                            spec_.to_string() + " needs " + std::to_string(spec_.num_blocks()));
    }
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      if (blocks_[b].rows() != spec_.dim(b) || blocks_[b].cols() != spec_.dim(b)) {
        throw StructuralError("block " + std::to_string(b) + " does not conform to spec " + spec_.to_string());
      }
    }
  }

  static AlgebraElement zero(const AlgebraSpec& spec) {
    std::vector<Matrix> blocks;
    for (int d : spec.block_dims()) blocks.push_back(Matrix::Zero(d, d));
    return {spec, std::move(blocks)};
  }

  static AlgebraElement unit(const AlgebraSpec& spec) {
    std::vector<Matrix> blocks;
    for (int d : spec.block_dims()) blocks.push_back(Matrix::Identity(d, d));
    return {spec, std::move(blocks)};
  }

  /// Scalar multiple of the unit.
  static AlgebraElement scalar(const AlgebraSpec& spec, Complex value) { return unit(spec) * value; }

  const AlgebraSpec& spec() const noexcept { return spec_; }
  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }
  const Matrix& block(std::size_t b) const { return blocks_.at(b); }

  AlgebraElement adjoint() const {
    std::vector<Matrix> out;
    out.reserve(blocks_.size());
    for (const auto& m : blocks_) out.push_back(m.adjoint());
    return {spec_, std::move(out)};
  }

  AlgebraElement& operator+=(const AlgebraElement& o) {
    require_same_spec(spec_, o.spec_, "algebra sum");
    for (std::size_t b = 0; b < blocks_.size(); ++b) blocks_[b] += o.blocks_[b];
    return *this;
  }
  AlgebraElement& operator-=(const AlgebraElement& o) {
    require_same_spec(spec_, o.spec_, "algebra difference");
    for (std::size_t b = 0; b < blocks_.size(); ++b) blocks_[b] -= o.blocks_[b];
    return *this;
  }
  AlgebraElement& operator*=(Complex s) {
    for (auto& m : blocks_) m *= s;
    return *this;
  }

  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
  friend AlgebraElement operator*(AlgebraElement a, Complex s) { return a *= s; }
  friend AlgebraElement operator*(Complex s, AlgebraElement a) { return a *= s; }
  friend AlgebraElement operator*(double s, AlgebraElement a) { return a *= Complex(s, 0.0); }

  friend AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) {
    require_same_spec(a.spec_, b.spec_, "algebra product");
    std::vector<Matrix> out;
    out.reserve(a.blocks_.size());
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) out.push_back(a.blocks_[i] * b.blocks_[i]);
    return {a.spec_, std::move(out)};
  }

  /// Exact (bitwise on values) equality.
  friend bool operator==(const AlgebraElement& a, const AlgebraElement& b) {
    if (a.spec_ != b.spec_) return false;
    for (std::size_t i = 0; i < a.blocks_.size(); ++i) {
      if (a.blocks_[i] != b.blocks_[i]) return false;
    }
    return true;
  }

 private:
  AlgebraSpec spec_;
  std::vector<Matrix> blocks_;
};

/// C*-norm: the largest singular value over all blocks.
inline double cstar_norm(const AlgebraElement& a) { return linalg::max_spectral_norm(a.blocks()); }

/// Positive within a relative tolerance: ||a - a*|| <= tol*max(1,||a||) and every
/// eigenvalue of the Hermitized blocks >= -tol*max(1,||a||).
inline bool is_positive(const AlgebraElement& a, double tol) { return linalg::blocks_psd(a.blocks(), tol); }

/// a <= b in the algebra order, i.e. b - a is positive.
inline bool loewner_leq(const AlgebraElement& a, const AlgebraElement& b, double tol) {
  require_same_spec(a.spec(), b.spec(), "loewner_leq");
  return is_positive(b - a, tol);
}

/// Smallest eigenvalue over the Hermitized blocks.
inline double min_eigenvalue(const AlgebraElement& a) { return linalg::min_eigenvalue(a.blocks()); }

/// Positive square root; eigenvalues that are negative within tolerance are clamped to zero.
inline AlgebraElement positive_sqrt(const AlgebraElement& a, double tol) {
  if (!is_positive(a, tol)) throw DomainError("positive_sqrt: element is not positive within tolerance");
  std::vector<Matrix> out;
  for (const auto& m : a.blocks()) {
    out.push_back(linalg::hermitian_apply(m, [](double v) { return std::sqrt(std::max(v, 0.0)); }));
  }
  return {a.spec(), std::move(out)};
}

/// Minimal projection: self-adjoint idempotent of total rank one (eigenvalues above 1/2).
inline bool is_minimal_projection(const AlgebraElement& e, double tol) {
  if (cstar_norm(e * e - e) > tol) return false;
  if (cstar_norm(e.adjoint() - e) > tol) return false;
  long rank = 0;
  for (const auto& m : e.blocks()) {
    const RealVector ev = linalg::hermitian_eigenvalues(m);
    rank += static_cast<long>((ev.array() > 0.5).count());
  }
  return rank == 1;
}

}  // namespace cstarframe
