#pragma once

// Finite frames {f_1, ..., f_N} in A^m: analysis, synthesis and frame
// operators, optimal bounds, canonical duals and reconstruction.
//
// In this model the algebra-order inequalities
//   C <x,x> <= sum_n <x,f_n><f_n,x> <= D <x,x>   for all x
// hold exactly when C I <= phi(S) <= D I blockwise, so the optimal bounds are
// the extreme eigenvalues of the realized frame operator.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cstarframe/cstar_core.hpp"
#include "cstarframe/errors.hpp"
#include "cstarframe/hilbert_module.hpp"
#include "cstarframe/random.hpp"

namespace cstarframe {

/// Default threshold for "frame operator is invertible": lambda_min(phi(S)) > tol.
inline constexpr double kDefaultFrameTol = 1e-8;
/// Condition number of S beyond which reconstruction tolerances cannot be honoured.
inline constexpr double kIllConditioned = 1e12;
inline constexpr int kDefaultSamples = 1000;
inline constexpr std::uint64_t kDefaultSampleSeed = 0x5eed5eedULL;

enum class BoundsFlavor { loewner, norm };

inline const char* to_string(BoundsFlavor f) { return f == BoundsFlavor::loewner ? "loewner" : "norm"; }

struct FrameBounds {
  double lower = 0.0;
  double upper = 0.0;
  BoundsFlavor flavor = BoundsFlavor::loewner;
  /// False when the lower bound is zero: a Bessel sequence but not a frame.
  bool is_frame = false;

  friend bool operator==(const FrameBounds&, const FrameBounds&) = default;
};

class FrameSystem {
 public:
  FrameSystem() : FrameSystem(std::vector<ModuleVector>{ModuleVector::generator(AlgebraSpec{}, 1, 0)}) {}

  explicit FrameSystem(std::vector<ModuleVector> vectors) : vectors_(std::move(vectors)) {
    if (vectors_.empty()) throw StructuralError("frame system needs at least one vector");
    spec_ = vectors_.front().spec();
    rank_ = vectors_.front().rank();
    for (const auto& v : vectors_) v.require_compatible(vectors_.front(), "frame system vectors");
    build_operators();
  }

  const AlgebraSpec& spec() const noexcept { return spec_; }
  int module_rank() const noexcept { return rank_; }
  int size() const noexcept { return static_cast<int>(vectors_.size()); }
  const std::vector<ModuleVector>& vectors() const noexcept { return vectors_; }
  const ModuleVector& vector(int n) const { return vectors_.at(static_cast<std::size_t>(n)); }

  /// T : A^m -> A^N, x |-> (<x, f_n>)_n.
  const ModuleOperator& analysis() const noexcept { return analysis_; }
  /// theta = T* : A^N -> A^m, c |-> sum_n c_n f_n.
  const ModuleOperator& synthesis() const noexcept { return synthesis_; }
  /// S = theta o T.
  const ModuleOperator& frame_operator() const noexcept { return frame_op_; }

  friend bool operator==(const FrameSystem& a, const FrameSystem& b) { return a.vectors_ == b.vectors_; }

 private:
  void build_operators() {
    const int n_vec = size();
    std::vector<Matrix> raw;
    for (std::size_t b = 0; b < spec_.num_blocks(); ++b) {
      const Eigen::Index d = spec_.dim(b);
      Matrix t(rank_ * d, n_vec * d);
      for (int n = 0; n < n_vec; ++n) t.middleCols(n * d, d) = vectors_[n].row(b).adjoint();
      raw.push_back(std::move(t));
    }
    analysis_ = ModuleOperator(spec_, rank_, n_vec, std::move(raw));
    synthesis_ = adjoint_op(analysis_);
    frame_op_ = compose(synthesis_, analysis_);
  }

  AlgebraSpec spec_;
  int rank_ = 0;
  std::vector<ModuleVector> vectors_;
  ModuleOperator analysis_;
  ModuleOperator synthesis_;
  ModuleOperator frame_op_;
};

inline const ModuleOperator& analysis_operator(const FrameSystem& f) { return f.analysis(); }
inline const ModuleOperator& synthesis_operator(const FrameSystem& f) { return f.synthesis(); }
inline const ModuleOperator& frame_operator(const FrameSystem& f) { return f.frame_operator(); }

/// sum_n <x, f_n><f_n, x>, the middle term of the frame inequality.
inline AlgebraElement frame_sum(const FrameSystem& f, const ModuleVector& x) {
  const ModuleVector tx = apply(f.analysis(), x);
  return inner(tx, tx);
}

/// Spectral bounds of phi(S). A lower bound that is numerically zero
/// (at most kDefaultRankTol * upper) is reported as exactly 0.
inline FrameBounds optimal_frame_bounds(const FrameSystem& f, double frame_tol = kDefaultFrameTol) {
  const ModuleOperator& s = f.frame_operator();
  const double upper = std::max(0.0, max_eigenvalue(s));
  double lower = min_eigenvalue(s);
  if (lower <= kDefaultRankTol * upper) lower = 0.0;
  return {lower, upper, BoundsFlavor::loewner, lower > frame_tol};
}

inline double condition_number(const FrameSystem& f) {
  const FrameBounds b = optimal_frame_bounds(f);
  return b.lower > 0.0 ? b.upper / b.lower : std::numeric_limits<double>::infinity();
}

/// Probe vectors for sampled checks: extreme eigenvectors of phi(S) lifted
/// into A^m, followed by seeded random unit vectors. `count` vectors total.
inline std::vector<ModuleVector> probe_vectors(const AlgebraSpec& spec, int rank, const std::vector<Matrix>& herm_raw,
                                               int count, std::uint64_t seed) {
  std::vector<ModuleVector> out;
  for (std::size_t b = 0; b < herm_raw.size() && static_cast<int>(out.size()) < count; ++b) {
    const linalg::HermitianEigen e = linalg::hermitian_eigen(herm_raw[b]);
    for (Eigen::Index c : {Eigen::Index{0}, e.values.size() - 1}) {
      if (static_cast<int>(out.size()) >= count) break;
      ModuleVector x = ModuleVector::zero(spec, rank);
      std::vector<Matrix> rows = x.rows();
      rows[b].row(0) = e.vectors.col(c).adjoint();
      out.emplace_back(spec, rank, std::move(rows));
    }
  }
  Rng rng(seed);
  while (static_cast<int>(out.size()) < count) out.push_back(random_unit_vector(spec, rank, rng));
  return out;
}

/// Loewner flavor decides C I <= phi(S) <= D I exactly (up to tol).
/// Norm flavor checks C ||x||^2 <= ||sum_n <x,f_n><f_n,x>|| <= D ||x||^2 on
/// `samples` probe vectors: a false result is a genuine counterexample, a true
/// result is only probabilistic evidence.
inline bool verify_frame(const FrameSystem& f, double lower, double upper, BoundsFlavor flavor, double tol,
                         int samples = kDefaultSamples, std::uint64_t seed = kDefaultSampleSeed) {
  if (!(lower > 0.0) || !(upper > 0.0)) throw DomainError("verify_frame: bounds must be positive");
  const ModuleOperator& s = f.frame_operator();
  if (flavor == BoundsFlavor::loewner) {
    const int m = f.module_rank();
    return is_positive_operator(s - ModuleOperator::scaled_identity(f.spec(), m, lower), tol) &&
           is_positive_operator(ModuleOperator::scaled_identity(f.spec(), m, upper) - s, tol);
  }
  for (const ModuleVector& x : probe_vectors(f.spec(), f.module_rank(), s.raw_blocks(), samples, seed)) {
    const double nx2 = std::pow(vector_norm(x), 2);
    const double mid = cstar_norm(frame_sum(f, x));
    if (lower * nx2 > mid + tol || mid > upper * nx2 + tol) return false;
  }
  return true;
}

/// S^{-1}; throws DomainError when lambda_min(phi(S)) <= tol.
inline ModuleOperator frame_operator_inverse(const FrameSystem& f, double tol = kDefaultFrameTol) {
  const ModuleOperator& s = f.frame_operator();
  if (!(min_eigenvalue(s) > tol)) throw DomainError("not a frame: frame operator is numerically singular");
  std::vector<Matrix> raw;
  for (const auto& m : s.raw_blocks()) raw.push_back(linalg::hermitian_apply(m, [](double v) { return 1.0 / v; }));
  return {f.spec(), f.module_rank(), f.module_rank(), std::move(raw)};
}

/// {S^{-1} f_n}.
inline FrameSystem canonical_dual(const FrameSystem& f, double tol = kDefaultFrameTol) {
  const ModuleOperator s_inv = frame_operator_inverse(f, tol);
  std::vector<ModuleVector> dual;
  for (const auto& v : f.vectors()) dual.push_back(apply(s_inv, v));
  return FrameSystem(std::move(dual));
}

enum class Expansion {
  /// x = sum_n <x, S^{-1} f_n> f_n
  dual_coefficients,
  /// x = sum_n <x, f_n> S^{-1} f_n
  frame_coefficients,
};

inline ModuleVector reconstruct(const FrameSystem& f, const ModuleVector& x, double tol = kDefaultFrameTol,
                                Expansion which = Expansion::dual_coefficients) {
  const ModuleOperator s_inv = frame_operator_inverse(f, tol);
  ModuleVector out = ModuleVector::zero(f.spec(), f.module_rank());
  for (const auto& fn : f.vectors()) {
    const ModuleVector gn = apply(s_inv, fn);
    out += which == Expansion::dual_coefficients ? inner(x, gn) * fn : inner(x, fn) * gn;
  }
  return out;
}

inline FrameSystem standard_generator_frame(const AlgebraSpec& spec, int m) {
  if (m < 1) throw StructuralError("standard_generator_frame: rank must be >= 1");
  std::vector<ModuleVector> gens;
  for (int i = 0; i < m; ++i) gens.push_back(ModuleVector::generator(spec, m, i));
  return FrameSystem(std::move(gens));
}

inline bool is_parseval(const FrameSystem& f, double tol) {
  const ModuleOperator diff = f.frame_operator() - ModuleOperator::identity(f.spec(), f.module_rank());
  return operator_norm(diff) <= tol;
}

/// Basic elements (<v_i, v_i> a minimal projection) that are pairwise orthogonal.
inline bool is_orthonormal_system(const std::vector<ModuleVector>& vs, double tol) {
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (!is_minimal_projection(inner(vs[i], vs[i]), tol)) return false;
    for (std::size_t j = 0; j < vs.size(); ++j) {
      if (i != j && cstar_norm(inner(vs[i], vs[j])) > tol) return false;
    }
  }
  return true;
}

inline constexpr int kFrameRetryBudget = 32;

/// N vectors with i.i.d. standard complex Gaussian entries. With
/// min_lower_bound > 0, redraws from derived seeds until lambda_min(phi(S))
/// reaches it, throwing GenerationError after kFrameRetryBudget attempts.
inline FrameSystem random_frame(const AlgebraSpec& spec, int m, int n_vectors, std::uint64_t seed,
                                double min_lower_bound = 0.0) {
  if (n_vectors < 1) throw StructuralError("random_frame: need at least one vector");
  for (int attempt = 0; attempt < kFrameRetryBudget; ++attempt) {
    Rng rng(attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<ModuleVector> vs;
    for (int n = 0; n < n_vectors; ++n) vs.push_back(random_vector(spec, m, rng));
    FrameSystem f(std::move(vs));
    if (min_lower_bound <= 0.0 || min_eigenvalue(f.frame_operator()) >= min_lower_bound) return f;
  }
  throw GenerationError("random_frame: no frame with lower bound >= " + std::to_string(min_lower_bound) +
                        " after " + std::to_string(kFrameRetryBudget) + " attempts");
}

}  // namespace cstarframe
