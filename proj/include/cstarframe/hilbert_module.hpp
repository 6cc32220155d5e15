#pragma once

// The free Hilbert A-module H = A^m.
//
// Vectors are m-tuples x = (x_1, ..., x_m) with left action (a.x)_i = a x_i and
// inner product <x, y> = sum_i x_i y_i^*, linear in the first slot.
// Adjointable operators A^m -> A^k are A-valued m x k matrices acting by right
// coefficients, (Tx)_j = sum_i x_i M_ij.
//
// Storage is per algebra block b. A vector is the d_b x (m d_b) row matrix
// [x_1 ... x_m]; an operator is the (m d_b) x (k d_b) block matrix with block
// (i, j) = M_ij. Then Tx is a plain row-times-matrix product, T* is the
// conjugate transpose and composition multiplies in reverse order. The
// realization phi(T) = raw^T (transpose, no conjugation) turns composition back
// into a homomorphism and is what spectra, norms and ranges are computed on.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cstarframe/cstar_core.hpp"
#include "cstarframe/errors.hpp"
#include "cstarframe/linalg.hpp"

namespace cstarframe {

class ModuleVector {
 public:
  ModuleVector() : ModuleVector(zero(AlgebraSpec{}, 1)) {}

  explicit ModuleVector(const std::vector<AlgebraElement>& entries) {
    if (entries.empty()) throw StructuralError("module vector needs rank >= 1");
    spec_ = entries.front().spec();
    rank_ = static_cast<int>(entries.size());
    for (std::size_t b = 0; b < spec_.num_blocks(); ++b) {
      const int d = spec_.dim(b);
      Matrix row(d, static_cast<Eigen::Index>(rank_) * d);
      for (int i = 0; i < rank_; ++i) {
        require_same_spec(spec_, entries[i].spec(), "module vector entries");
        row.middleCols(static_cast<Eigen::Index>(i) * d, d) = entries[i].block(b);
      }
      rows_.push_back(std::move(row));
    }
  }

  /// Per-block row matrices of shape d_b x (rank * d_b).
  ModuleVector(AlgebraSpec spec, int rank, std::vector<Matrix> rows)
      : spec_(std::move(spec)), rank_(rank), rows_(std::move(rows)) {
    if (rank_ < 1) throw StructuralError("module vector needs rank >= 1");
    if (rows_.size() != spec_.num_blocks()) throw StructuralError("module vector block count mismatch");
    for (std::size_t b = 0; b < rows_.size(); ++b) {
      const int d = spec_.dim(b);
      if (rows_[b].rows() != d || rows_[b].cols() != static_cast<Eigen::Index>(rank_) * d) {
        throw StructuralError("module vector block " + std::to_string(b) + " has wrong shape");
      }
    }
  }

  static ModuleVector zero(const AlgebraSpec& spec, int rank) {
    if (rank < 1) throw StructuralError("module vector needs rank >= 1");
    std::vector<Matrix> rows;
    for (int d : spec.block_dims()) rows.push_back(Matrix::Zero(d, static_cast<Eigen::Index>(rank) * d));
    return {spec, rank, std::move(rows)};
  }

  /// Standard generator e_i: unit in slot i, zero elsewhere.
  static ModuleVector generator(const AlgebraSpec& spec, int rank, int i) {
    if (i < 0 || i >= rank) throw StructuralError("generator index out of range");
    ModuleVector out = zero(spec, rank);
    for (std::size_t b = 0; b < spec.num_blocks(); ++b) {
      const int d = spec.dim(b);
      out.rows_[b].middleCols(static_cast<Eigen::Index>(i) * d, d).setIdentity();
    }
    return out;
  }

  const AlgebraSpec& spec() const noexcept { return spec_; }
  int rank() const noexcept { return rank_; }
  const std::vector<Matrix>& rows() const noexcept { return rows_; }
  const Matrix& row(std::size_t b) const { return rows_.at(b); }

  AlgebraElement entry(int i) const {
    if (i < 0 || i >= rank_) throw StructuralError("module vector entry out of range");
    std::vector<Matrix> blocks;
    for (std::size_t b = 0; b < spec_.num_blocks(); ++b) {
      const int d = spec_.dim(b);
      blocks.push_back(rows_[b].middleCols(static_cast<Eigen::Index>(i) * d, d));
    }
    return {spec_, std::move(blocks)};
  }

  std::vector<AlgebraElement> entries() const {
    std::vector<AlgebraElement> out;
    for (int i = 0; i < rank_; ++i) out.push_back(entry(i));
    return out;
  }

  ModuleVector& operator+=(const ModuleVector& o) {
    require_compatible(o, "vector sum");
    for (std::size_t b = 0; b < rows_.size(); ++b) rows_[b] += o.rows_[b];
    return *this;
  }
  ModuleVector& operator-=(const ModuleVector& o) {
    require_compatible(o, "vector difference");
    for (std::size_t b = 0; b < rows_.size(); ++b) rows_[b] -= o.rows_[b];
    return *this;
  }
  ModuleVector& operator*=(Complex s) {
    for (auto& r : rows_) r *= s;
    return *this;
  }

  friend ModuleVector operator+(ModuleVector a, const ModuleVector& b) { return a += b; }
  friend ModuleVector operator-(ModuleVector a, const ModuleVector& b) { return a -= b; }
  friend ModuleVector operator*(Complex s, ModuleVector x) { return x *= s; }
  friend ModuleVector operator*(double s, ModuleVector x) { return x *= Complex(s, 0.0); }

  /// Left module action (a.x)_i = a x_i.
  friend ModuleVector operator*(const AlgebraElement& a, const ModuleVector& x) {
    require_same_spec(a.spec(), x.spec_, "module action");
    std::vector<Matrix> rows;
    for (std::size_t b = 0; b < x.rows_.size(); ++b) rows.push_back(a.block(b) * x.rows_[b]);
    return {x.spec_, x.rank_, std::move(rows)};
  }

  friend bool operator==(const ModuleVector& a, const ModuleVector& b) {
    if (a.spec_ != b.spec_ || a.rank_ != b.rank_) return false;
    for (std::size_t i = 0; i < a.rows_.size(); ++i) {
      if (a.rows_[i] != b.rows_[i]) return false;
    }
    return true;
  }

  void require_compatible(const ModuleVector& o, const char* what) const {
    require_same_spec(spec_, o.spec_, what);
    if (rank_ != o.rank_) {
      throw StructuralError(std::string(what) + ": rank mismatch " + std::to_string(rank_) + " vs " +
                            std::to_string(o.rank_));
    }
  }

 private:
  AlgebraSpec spec_;
  int rank_ = 0;
  std::vector<Matrix> rows_;
};

/// A-valued inner product <x, y> = sum_i x_i y_i^*.
inline AlgebraElement inner(const ModuleVector& x, const ModuleVector& y) {
  x.require_compatible(y, "inner");
  std::vector<Matrix> blocks;
  for (std::size_t b = 0; b < x.rows().size(); ++b) blocks.push_back(x.row(b) * y.row(b).adjoint());
  return {x.spec(), std::move(blocks)};
}

/// ||x|| = ||<x, x>||^{1/2}, which is the largest singular value of the row blocks.
inline double vector_norm(const ModuleVector& x) { return std::sqrt(cstar_norm(inner(x, x))); }

/// Per-block complex matrices phi(T), each (cod * d_b) x (dom * d_b).
struct BlockRealization {
  AlgebraSpec spec;
  int dom_rank = 0;
  int cod_rank = 0;
  std::vector<Matrix> blocks;
};

class ModuleOperator {
 public:
  ModuleOperator() : ModuleOperator(identity(AlgebraSpec{}, 1)) {}

  /// From the A-valued matrix M (dom_rank rows, cod_rank columns).
  explicit ModuleOperator(const std::vector<std::vector<AlgebraElement>>& mat) {
    if (mat.empty() || mat.front().empty()) throw StructuralError("operator ranks must be >= 1");
    spec_ = mat.front().front().spec();
    dom_ = static_cast<int>(mat.size());
    cod_ = static_cast<int>(mat.front().size());
    for (std::size_t b = 0; b < spec_.num_blocks(); ++b) {
      const Eigen::Index d = spec_.dim(b);
      Matrix raw(dom_ * d, cod_ * d);
      for (int i = 0; i < dom_; ++i) {
        if (static_cast<int>(mat[i].size()) != cod_) throw StructuralError("ragged operator matrix");
        for (int j = 0; j < cod_; ++j) {
          require_same_spec(spec_, mat[i][j].spec(), "operator entries");
          raw.block(i * d, j * d, d, d) = mat[i][j].block(b);
        }
      }
      raw_.push_back(std::move(raw));
    }
  }

  /// From raw per-block matrices of shape (dom * d_b) x (cod * d_b).
  ModuleOperator(AlgebraSpec spec, int dom_rank, int cod_rank, std::vector<Matrix> raw)
      : spec_(std::move(spec)), dom_(dom_rank), cod_(cod_rank), raw_(std::move(raw)) {
    if (dom_ < 1 || cod_ < 1) throw StructuralError("operator ranks must be >= 1");
    if (raw_.size() != spec_.num_blocks()) throw StructuralError("operator block count mismatch");
    for (std::size_t b = 0; b < raw_.size(); ++b) {
      const Eigen::Index d = spec_.dim(b);
      if (raw_[b].rows() != dom_ * d || raw_[b].cols() != cod_ * d) {
        throw StructuralError("operator block " + std::to_string(b) + " has wrong shape");
      }
    }
  }

  static ModuleOperator zero(const AlgebraSpec& spec, int dom_rank, int cod_rank) {
    if (dom_rank < 1 || cod_rank < 1) throw StructuralError("operator ranks must be >= 1");
    std::vector<Matrix> raw;
    for (int d : spec.block_dims()) raw.push_back(Matrix::Zero(dom_rank * d, cod_rank * d));
    return {spec, dom_rank, cod_rank, std::move(raw)};
  }

  static ModuleOperator identity(const AlgebraSpec& spec, int rank) { return scaled_identity(spec, rank, 1.0); }

  static ModuleOperator scaled_identity(const AlgebraSpec& spec, int rank, Complex s) {
    if (rank < 1) throw StructuralError("operator ranks must be >= 1");
    std::vector<Matrix> raw;
    for (int d : spec.block_dims()) raw.push_back(s * Matrix::Identity(rank * d, rank * d));
    return {spec, rank, rank, std::move(raw)};
  }

  /// Inverse of realize().
  static ModuleOperator from_realization(const BlockRealization& r) {
    std::vector<Matrix> raw;
    for (const auto& m : r.blocks) raw.push_back(m.transpose());
    return {r.spec, r.dom_rank, r.cod_rank, std::move(raw)};
  }

  const AlgebraSpec& spec() const noexcept { return spec_; }
  int dom_rank() const noexcept { return dom_; }
  int cod_rank() const noexcept { return cod_; }
  bool is_square() const noexcept { return dom_ == cod_; }
  const std::vector<Matrix>& raw_blocks() const noexcept { return raw_; }

  /// Matrix entry M_ij, 0 <= i < dom_rank, 0 <= j < cod_rank.
  AlgebraElement entry(int i, int j) const {
    if (i < 0 || i >= dom_ || j < 0 || j >= cod_) throw StructuralError("operator entry out of range");
    std::vector<Matrix> blocks;
    for (std::size_t b = 0; b < spec_.num_blocks(); ++b) {
      const Eigen::Index d = spec_.dim(b);
      blocks.push_back(raw_[b].block(i * d, j * d, d, d));
    }
    return {spec_, std::move(blocks)};
  }

  std::vector<std::vector<AlgebraElement>> matrix() const {
    std::vector<std::vector<AlgebraElement>> out(dom_);
    for (int i = 0; i < dom_; ++i) {
      for (int j = 0; j < cod_; ++j) out[i].push_back(entry(i, j));
    }
    return out;
  }

  ModuleOperator& operator+=(const ModuleOperator& o) {
    require_same_shape(o, "operator sum");
    for (std::size_t b = 0; b < raw_.size(); ++b) raw_[b] += o.raw_[b];
    return *this;
  }
  ModuleOperator& operator-=(const ModuleOperator& o) {
    require_same_shape(o, "operator difference");
    for (std::size_t b = 0; b < raw_.size(); ++b) raw_[b] -= o.raw_[b];
    return *this;
  }
  ModuleOperator& operator*=(Complex s) {
    for (auto& m : raw_) m *= s;
    return *this;
  }

  friend ModuleOperator operator+(ModuleOperator a, const ModuleOperator& b) { return a += b; }
  friend ModuleOperator operator-(ModuleOperator a, const ModuleOperator& b) { return a -= b; }
  friend ModuleOperator operator*(Complex s, ModuleOperator t) { return t *= s; }
  friend ModuleOperator operator*(double s, ModuleOperator t) { return t *= Complex(s, 0.0); }

  friend bool operator==(const ModuleOperator& a, const ModuleOperator& b) {
    if (a.spec_ != b.spec_ || a.dom_ != b.dom_ || a.cod_ != b.cod_) return false;
    for (std::size_t i = 0; i < a.raw_.size(); ++i) {
      if (a.raw_[i] != b.raw_[i]) return false;
    }
    return true;
  }

  void require_same_shape(const ModuleOperator& o, const char* what) const {
    require_same_spec(spec_, o.spec_, what);
    if (dom_ != o.dom_ || cod_ != o.cod_) throw StructuralError(std::string(what) + ": operator shape mismatch");
  }

 private:
  AlgebraSpec spec_;
  int dom_ = 0;
  int cod_ = 0;
  std::vector<Matrix> raw_;
};

inline ModuleVector apply(const ModuleOperator& t, const ModuleVector& x) {
  require_same_spec(t.spec(), x.spec(), "apply");
  if (x.rank() != t.dom_rank()) {
    throw StructuralError("apply: operator domain rank " + std::to_string(t.dom_rank()) + " vs vector rank " +
                          std::to_string(x.rank()));
  }
  std::vector<Matrix> rows;
  for (std::size_t b = 0; b < x.rows().size(); ++b) rows.push_back(x.row(b) * t.raw_blocks()[b]);
  return {t.spec(), t.cod_rank(), std::move(rows)};
}

/// T* with matrix entries (T*)_ji = (M_ij)^*.
inline ModuleOperator adjoint_op(const ModuleOperator& t) {
  std::vector<Matrix> raw;
  for (const auto& m : t.raw_blocks()) raw.push_back(m.adjoint());
  return {t.spec(), t.cod_rank(), t.dom_rank(), std::move(raw)};
}

/// outer o inner: apply `inner` first. The raw A-matrix is mat(inner) * mat(outer).
inline ModuleOperator compose(const ModuleOperator& outer, const ModuleOperator& inner_op) {
  require_same_spec(outer.spec(), inner_op.spec(), "compose");
  if (inner_op.cod_rank() != outer.dom_rank()) {
    throw StructuralError("compose: codomain rank " + std::to_string(inner_op.cod_rank()) + " vs domain rank " +
                          std::to_string(outer.dom_rank()));
  }
  std::vector<Matrix> raw;
  for (std::size_t b = 0; b < outer.raw_blocks().size(); ++b) {
    raw.push_back(inner_op.raw_blocks()[b] * outer.raw_blocks()[b]);
  }
  return {outer.spec(), inner_op.dom_rank(), outer.cod_rank(), std::move(raw)};
}

inline BlockRealization realize(const ModuleOperator& t) {
  BlockRealization r{t.spec(), t.dom_rank(), t.cod_rank(), {}};
  for (const auto& m : t.raw_blocks()) r.blocks.push_back(m.transpose());
  return r;
}

/// Column-stacked image of x under the realization: per block x^T, (rank d_b) x d_b.
/// realize(T).blocks[b] * flatten(x)[b] == flatten(apply(T, x))[b].
inline std::vector<Matrix> flatten(const ModuleVector& x) {
  std::vector<Matrix> out;
  for (const auto& r : x.rows()) out.push_back(r.transpose());
  return out;
}

inline double operator_norm(const ModuleOperator& t) { return linalg::max_spectral_norm(t.raw_blocks()); }

inline bool is_positive_operator(const ModuleOperator& t, double tol) {
  if (!t.is_square()) throw StructuralError("is_positive_operator: operator is not square");
  return linalg::blocks_psd(realize(t).blocks, tol);
}

/// Smallest eigenvalue of phi(T) over all blocks (T square, Hermitized).
inline double min_eigenvalue(const ModuleOperator& t) {
  if (!t.is_square()) throw StructuralError("min_eigenvalue: operator is not square");
  return linalg::min_eigenvalue(t.raw_blocks());
}

inline double max_eigenvalue(const ModuleOperator& t) {
  if (!t.is_square()) throw StructuralError("max_eigenvalue: operator is not square");
  return linalg::max_eigenvalue(t.raw_blocks());
}

/// Blockwise Moore-Penrose inverse of phi(T); singular values at or below
/// rank_tol * ||T|| are treated as zero.
inline ModuleOperator pseudo_inverse(const ModuleOperator& t, double rank_tol = kDefaultRankTol) {
  const double cutoff = rank_tol * operator_norm(t);
  BlockRealization r = realize(t);
  BlockRealization out{t.spec(), t.cod_rank(), t.dom_rank(), {}};
  for (const auto& m : r.blocks) out.blocks.push_back(linalg::pseudo_inverse(m, cutoff));
  return ModuleOperator::from_realization(out);
}

/// Rank of phi(T) summed over blocks, cutoff rank_tol * ||T||.
inline long realized_rank(const ModuleOperator& t, double rank_tol = kDefaultRankTol) {
  const double cutoff = rank_tol * operator_norm(t);
  long r = 0;
  for (const auto& m : t.raw_blocks()) r += linalg::rank_above(m, cutoff);
  return r;
}

/// R(S) within R(T), decided blockwise by rank([phi(T) | phi(S)]) == rank(phi(T)).
/// Both operands are normalised to unit norm first so the cutoff rank_tol is scale free.
inline bool range_included(const ModuleOperator& s, const ModuleOperator& t, double rank_tol = kDefaultRankTol) {
  require_same_spec(s.spec(), t.spec(), "range_included");
  if (s.cod_rank() != t.cod_rank()) throw StructuralError("range_included: codomain ranks differ");
  const double ns = operator_norm(s);
  const double nt = operator_norm(t);
  if (ns == 0.0) return true;
  if (nt == 0.0) return false;
  const BlockRealization rs = realize(s);
  const BlockRealization rt = realize(t);
  for (std::size_t b = 0; b < rs.blocks.size(); ++b) {
    const Matrix tb = rt.blocks[b] / nt;
    Matrix aug(tb.rows(), tb.cols() + rs.blocks[b].cols());
    aug << tb, rs.blocks[b] / ns;
    if (linalg::rank_above(aug, rank_tol) != linalg::rank_above(tb, rank_tol)) return false;
  }
  return true;
}

}  // namespace cstarframe
