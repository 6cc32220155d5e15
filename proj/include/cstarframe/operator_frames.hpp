#pragma once

// Douglas-type factorization, atomic systems for an operator K and K-frames.
//
// A Bessel sequence {f_n} is a K-frame with bounds (C, D) iff
//   C K K* <= S <= D I,
// and it is an atomic system for K iff K = theta o X for some adjointable X
// (theta the synthesis operator). Both reduce to range inclusion
// R(K) within R(theta), which is decided here three ways: pencil eigenvalues of
// (K K*, S), a rank test on [phi(theta) | phi(K)], and a pseudo-inverse
// solve whose residual is checked.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cstarframe/cstar_core.hpp"
#include "cstarframe/errors.hpp"
#include "cstarframe/frame_core.hpp"
#include "cstarframe/hilbert_module.hpp"
#include "cstarframe/random.hpp"

namespace cstarframe {

/// Eigenvalues of a Gram operator (T T*, S, ...) at or below this fraction of
/// the largest one count as zero. Gram eigenvalues are squared singular values,
/// so this sits just above the double-precision noise floor of the eigensolver.
inline constexpr double kGramRankTol = 1e-12;

inline constexpr int kDouglasSpotChecks = 64;

namespace detail {

struct PencilResult {
  bool range_included = false;
  /// Largest lambda with  lhs v = lambda rhs v  on range(rhs); 0 when lhs = 0.
  double lambda_max = 0.0;
};

/// Least lambda with lhs <= lambda * rhs for Hermitian PSD block families, or
/// a range-inclusion failure when lhs leaks outside range(rhs) by more than
/// leak_tol * ||lhs||.
inline PencilResult pencil_max(const std::vector<Matrix>& lhs, const std::vector<Matrix>& rhs, double leak_tol) {
  const double rhs_top = std::max(0.0, linalg::max_eigenvalue(rhs));
  const double lhs_norm = linalg::max_spectral_norm(lhs);
  PencilResult out{true, 0.0};
  if (lhs_norm == 0.0) return out;
  if (rhs_top == 0.0) return {false, 0.0};
  const double cutoff = kGramRankTol * rhs_top;
  for (std::size_t b = 0; b < lhs.size(); ++b) {
    const linalg::HermitianEigen e = linalg::hermitian_eigen(rhs[b]);
    const Eigen::Index n = e.values.size();
    Eigen::Index r = 0;
    while (r < n && e.values(n - 1 - r) > cutoff) ++r;
    const Matrix range = e.vectors.rightCols(r);
    const Matrix null = e.vectors.leftCols(n - r);
    const Matrix herm = linalg::hermitian_part(lhs[b]);
    if (null.cols() > 0 && linalg::spectral_norm(null.adjoint() * herm * null) > leak_tol * lhs_norm) {
      return {false, 0.0};
    }
    if (r == 0) continue;
    RealVector inv_sqrt = e.values.tail(r).cwiseSqrt().cwiseInverse();
    const Matrix scaled = inv_sqrt.cast<Complex>().asDiagonal() * (range.adjoint() * herm * range) *
                          inv_sqrt.cast<Complex>().asDiagonal();
    const RealVector ev = linalg::hermitian_eigenvalues(scaled);
    out.lambda_max = std::max(out.lambda_max, ev(ev.size() - 1));
  }
  return out;
}

inline std::vector<Matrix> gram_realization(const ModuleOperator& t) {
  return realize(compose(t, adjoint_op(t))).blocks;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Douglas factorization

/// X = T^+ o S, returned when ||T o X - S|| <= tol * max(1, ||S||).
inline ModuleOperator douglas_factorize(const ModuleOperator& s, const ModuleOperator& t, double tol,
                                        double rank_tol = kDefaultRankTol) {
  require_same_spec(s.spec(), t.spec(), "douglas_factorize");
  if (s.cod_rank() != t.cod_rank()) throw StructuralError("douglas_factorize: codomains differ");
  ModuleOperator x = compose(pseudo_inverse(t, rank_tol), s);
  const double residual = operator_norm(compose(t, x) - s);
  if (residual > tol * std::max(1.0, operator_norm(s))) {
    throw DomainError("range inclusion fails: T X = S has no solution (residual " + std::to_string(residual) + ")");
  }
  return x;
}

struct DouglasReport {
  /// Condition (1): least lambda with S S* <= lambda T T*.
  std::optional<double> cond1_lambda;
  /// Condition (2): mu = sqrt(lambda), plus sampled spot checks of ||S* z|| <= mu ||T* z||.
  std::optional<double> cond2_mu;
  int cond2_spot_checks = 0;
  int cond2_violations = 0;
  /// Condition (3): a solution of T X = S.
  std::optional<ModuleOperator> cond3_solution;
  /// Condition (4): R(S) within R(T).
  bool cond4_range_included = false;
  /// ||T o X - S|| of the pseudo-inverse candidate (always computed).
  double residual = 0.0;
  double tol = 0.0;
  double rank_tol = kDefaultRankTol;
  std::uint64_t seed = kDefaultSampleSeed;

  bool consistent() const {
    return cond1_lambda.has_value() == cond3_solution.has_value() && cond3_solution.has_value() == cond4_range_included;
  }
  bool holds() const { return consistent() && cond4_range_included; }
};

/// Evaluates the four equivalent conditions independently and throws
/// ConsistencyError if (1), (3) and (4) disagree.
inline DouglasReport douglas_report(const ModuleOperator& s, const ModuleOperator& t, double tol,
                                    double rank_tol = kDefaultRankTol, std::uint64_t seed = kDefaultSampleSeed) {
  require_same_spec(s.spec(), t.spec(), "douglas_report");
  if (s.cod_rank() != t.cod_rank()) throw StructuralError("douglas_report: codomains differ");
  DouglasReport rep;
  rep.tol = tol;
  rep.rank_tol = rank_tol;
  rep.seed = seed;

  const detail::PencilResult pencil =
      detail::pencil_max(detail::gram_realization(s), detail::gram_realization(t), tol);
  if (pencil.range_included) {
    rep.cond1_lambda = pencil.lambda_max;
    rep.cond2_mu = std::sqrt(pencil.lambda_max);
    const ModuleOperator s_adj = adjoint_op(s);
    const ModuleOperator t_adj = adjoint_op(t);
    Rng rng(seed);
    for (int i = 0; i < kDouglasSpotChecks; ++i) {
      const ModuleVector z = random_unit_vector(s.spec(), s.cod_rank(), rng);
      const double lhs = vector_norm(apply(s_adj, z));
      const double rhs = *rep.cond2_mu * vector_norm(apply(t_adj, z));
      ++rep.cond2_spot_checks;
      if (lhs > rhs + tol * std::max(1.0, operator_norm(s))) ++rep.cond2_violations;
    }
  }

  const ModuleOperator candidate = compose(pseudo_inverse(t, rank_tol), s);
  rep.residual = operator_norm(compose(t, candidate) - s);
  if (rep.residual <= tol * std::max(1.0, operator_norm(s))) rep.cond3_solution = candidate;

  rep.cond4_range_included = range_included(s, t, rank_tol);

  if (!rep.consistent()) {
    std::ostringstream msg;
    msg << "Douglas conditions disagree: (1) " << (rep.cond1_lambda ? "holds" : "fails") << ", (3) "
        << (rep.cond3_solution ? "holds" : "fails") << " (residual " << rep.residual << "), (4) "
        << (rep.cond4_range_included ? "holds" : "fails");
    throw ConsistencyError(msg.str());
  }
  return rep;
}

// ---------------------------------------------------------------------------
// K-frames

inline void require_kframe_shapes(const FrameSystem& f, const ModuleOperator& k, const char* what) {
  require_same_spec(f.spec(), k.spec(), what);
  if (!k.is_square() || k.dom_rank() != f.module_rank()) {
    throw StructuralError(std::string(what) + ": K must be an operator on A^" + std::to_string(f.module_rank()));
  }
}

struct KFrameCertificate {
  FrameSystem frame;
  ModuleOperator k;
  double lower = 0.0;
  double upper = 0.0;
  /// lambda_min(phi(S - C K K*)).
  double psd_margin = 0.0;
  /// lambda_min(phi(D I - S)).
  double upper_margin = 0.0;
  /// L = theta, so L e_n = f_n.
  ModuleOperator witness_l;
  bool range_included = false;
  bool valid = false;
  double tol = 0.0;
  /// Set when cond(S) exceeds kIllConditioned.
  std::optional<std::string> warning;
};

/// valid iff S - C K K* and D I - S are both positive within tol.
inline KFrameCertificate verify_kframe(const FrameSystem& f, const ModuleOperator& k, double lower, double upper,
                                       double tol, double rank_tol = kDefaultRankTol) {
  require_kframe_shapes(f, k, "verify_kframe");
  const ModuleOperator& s = f.frame_operator();
  const ModuleOperator lower_gap = s - lower * compose(k, adjoint_op(k));
  const ModuleOperator upper_gap = ModuleOperator::scaled_identity(f.spec(), f.module_rank(), upper) - s;

  KFrameCertificate cert{f, k, lower, upper, min_eigenvalue(lower_gap), min_eigenvalue(upper_gap),
                         f.synthesis(), range_included(k, f.synthesis(), rank_tol), false, tol, std::nullopt};
  cert.valid = is_positive_operator(lower_gap, tol) && is_positive_operator(upper_gap, tol);
  if (condition_number(f) > kIllConditioned) cert.warning = "frame operator is ill-conditioned";
  return cert;
}

/// sup{C : S >= C K K*}, or 0 when range(K K*) is not inside range(S).
inline double optimal_kframe_lower_bound(const FrameSystem& f, const ModuleOperator& k, double tol) {
  require_kframe_shapes(f, k, "optimal_kframe_lower_bound");
  if (operator_norm(k) == 0.0) throw DomainError("optimal_kframe_lower_bound: K = 0 gives no finite optimum");
  const detail::PencilResult p =
      detail::pencil_max(detail::gram_realization(k), realize(f.frame_operator()).blocks, tol);
  if (!p.range_included || !(p.lambda_max > 0.0)) return 0.0;
  return 1.0 / p.lambda_max;
}

/// L = theta; valid iff rank([phi(L) | phi(K)]) == rank(phi(L)). The verdict is
/// cross-checked against the pencil route and ConsistencyError is thrown on
/// disagreement.
inline KFrameCertificate kframe_via_range(const FrameSystem& f, const ModuleOperator& k, double tol,
                                          double rank_tol = kDefaultRankTol) {
  require_kframe_shapes(f, k, "kframe_via_range");
  const ModuleOperator& l = f.synthesis();
  const bool included = range_included(k, l, rank_tol);
  const bool k_zero = operator_norm(k) == 0.0;
  const double c_opt = k_zero ? 0.0 : optimal_kframe_lower_bound(f, k, tol);
  if (!k_zero && included != (c_opt > 0.0)) {
    throw ConsistencyError("kframe_via_range: rank test says " + std::string(included ? "included" : "not included") +
                           " but optimal lower bound is " + std::to_string(c_opt));
  }
  const double upper = optimal_frame_bounds(f).upper;
  const ModuleOperator& s = f.frame_operator();
  KFrameCertificate cert{f, k, c_opt, upper, 0.0, 0.0, l, included, included, tol, std::nullopt};
  cert.psd_margin = min_eigenvalue(s - c_opt * compose(k, adjoint_op(k)));
  cert.upper_margin = min_eigenvalue(ModuleOperator::scaled_identity(f.spec(), f.module_rank(), upper) - s);
  if (condition_number(f) > kIllConditioned) cert.warning = "frame operator is ill-conditioned";
  return cert;
}

/// M with M^2 I <= phi(K K*), i.e. the smallest singular value of phi(K);
/// 0 when K is not surjective (smallest singular value at or below rank_tol * ||K||).
inline double surjectivity_constant(const ModuleOperator& k, double rank_tol = kDefaultRankTol) {
  if (!k.is_square()) throw StructuralError("surjectivity_constant: K must be square");
  const double top = operator_norm(k);
  if (top == 0.0) return 0.0;
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& m : k.raw_blocks()) {
    const RealVector sv = linalg::singular_values(m);
    smallest = std::min(smallest, sv(sv.size() - 1));
  }
  return smallest <= rank_tol * top ? 0.0 : smallest;
}

/// Frame bounds (M^2 C_K, D) of a K-frame for surjective K.
inline FrameBounds frame_from_kframe(const FrameSystem& f, const ModuleOperator& k, double tol) {
  require_kframe_shapes(f, k, "frame_from_kframe");
  const double m = surjectivity_constant(k);
  if (m == 0.0) throw DomainError("K not surjective");
  const double c_k = optimal_kframe_lower_bound(f, k, tol);
  if (c_k == 0.0) throw DomainError("not a K-frame: range of K is not inside the range of the synthesis operator");
  const FrameBounds opt = optimal_frame_bounds(f);
  return {m * m * c_k, opt.upper, BoundsFlavor::loewner, true};
}

// ---------------------------------------------------------------------------
// Atomic systems

struct AtomicCertificate {
  FrameSystem frame;
  ModuleOperator k;
  /// K = theta o X.
  ModuleOperator solution;
  /// ||X||^2: sum_n a_n a_n* <= coeff_bound <x, x>.
  double coeff_bound = 0.0;
  /// ||theta||^2.
  double bessel_bound = 0.0;
  double residual = 0.0;
  bool valid = false;
  double tol = 0.0;
};

inline AtomicCertificate verify_atomic_system(const FrameSystem& f, const ModuleOperator& k, double tol,
                                              double rank_tol = kDefaultRankTol) {
  require_kframe_shapes(f, k, "verify_atomic_system");
  const ModuleOperator& theta = f.synthesis();
  ModuleOperator x = compose(pseudo_inverse(theta, rank_tol), k);
  const double residual = operator_norm(compose(theta, x) - k);
  const double theta_norm = operator_norm(theta);
  const double x_norm = operator_norm(x);
  AtomicCertificate cert{f, k, std::move(x), x_norm * x_norm, theta_norm * theta_norm, residual, false, tol};
  cert.valid = residual <= tol * std::max(1.0, operator_norm(k));
  return cert;
}

/// a_n = (X x)_n, so that sum_n a_n f_n = K x.
inline std::vector<AlgebraElement> atomic_coefficients(const AtomicCertificate& cert, const ModuleVector& x) {
  if (!cert.valid) throw DomainError("not an atomic system for K");
  return apply(cert.solution, x).entries();
}

inline std::vector<AlgebraElement> atomic_coefficients(const FrameSystem& f, const ModuleOperator& k,
                                                       const ModuleVector& x, double tol) {
  return atomic_coefficients(verify_atomic_system(f, k, tol), x);
}

/// {K x_n} for a Parseval frame {x_n}; the coefficients <x, x_n> expand K x.
inline FrameSystem atomic_system_for(const ModuleOperator& k, const FrameSystem& base, double parseval_tol = 1e-8) {
  require_kframe_shapes(base, k, "atomic_system_for");
  if (!is_parseval(base, parseval_tol)) throw DomainError("atomic_system_for: base frame is not Parseval");
  std::vector<ModuleVector> out;
  for (const auto& v : base.vectors()) out.push_back(apply(k, v));
  return FrameSystem(std::move(out));
}

}  // namespace cstarframe
