#pragma once

// Randomized property suites, one per theorem-level claim, with
// deterministic per-trial seeding and JSON/text reports.
//
// Trial i of suite s under master seed S runs on the instance generated from
//   trial_seed = derive_seed(derive_seed(S, hash(s)), i)
// with its low byte replaced by (i mod kinds(s)), so instance families are
// balanced across trials and a trial seed alone reproduces the instance.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cstarframe/cstar_core.hpp"
#include "cstarframe/errors.hpp"
#include "cstarframe/frame_core.hpp"
#include "cstarframe/hilbert_module.hpp"
#include "cstarframe/operator_frames.hpp"
#include "cstarframe/random.hpp"

namespace cstarframe::harness {

using json = nlohmann::json;

/// Named tolerances and their defaults.
inline std::map<std::string, double> default_tolerances() {
  return {
      {"parseval", 1e-12},        // entrywise Parseval identity error
      {"reconstruction", 1e-8},   // relative reconstruction / dual-bound error
      {"douglas", 1e-8},          // Douglas residual and leak tolerance
      {"atomic", 1e-8},           // atomic residual, coefficient checks
      {"sample", 1e-8},           // sampled inequality slack
      {"psd", 1e-8},              // positivity tolerance when a check must pass
      {"strict", 1e-12},          // positivity tolerance when a check must fail
      {"scalar", 1e-10},          // agreement with the classical Hilbert-space oracle
      {"min_lower_bound", 1e-3},  // lambda_min(S) floor for generated frames
  };
}

struct SuiteConfig {
  std::uint64_t seed = 1;
  int trials = 200;
  /// Fixed instance scale; unset fields are drawn per trial (d <= 3, m <= 4, N <= 8).
  std::optional<AlgebraSpec> spec;
  std::optional<int> m;
  std::optional<int> n;
  std::map<std::string, double> tolerances = default_tolerances();
  std::vector<std::string> suites;
  int samples = kDefaultSamples;

  double tol(const std::string& name) const {
    const auto it = tolerances.find(name);
    if (it == tolerances.end()) throw UsageError("unknown tolerance name: " + name);
    return it->second;
  }
};

struct TrialOutcome {
  bool pass = true;
  /// Worst error quantity observed by the trial (suite specific, smaller is better).
  double margin = 0.0;
  /// Set when a library call threw; `consistency` marks ConsistencyError.
  std::optional<std::string> error;
  bool consistency = false;
};

struct SuiteResult {
  std::string name;
  int trials = 0;
  int passed = 0;
  int failed = 0;
  double worst_margin = 0.0;
  std::uint64_t worst_seed = 0;
  std::vector<std::uint64_t> failing_seeds;
  bool consistency_error = false;
};

struct SuiteReport {
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<SuiteResult> suites;

  bool pass() const {
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.failed == 0; });
  }
  bool consistency_error() const {
    return std::any_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.consistency_error; });
  }
};

namespace detail {

struct Scale {
  AlgebraSpec spec;
  int m = 1;
  int n = 1;
};

inline const std::vector<AlgebraSpec>& default_specs() {
  static const std::vector<AlgebraSpec> specs{{1}, {2}, {3}, {1, 1}, {1, 2}, {2, 3}};
  return specs;
}

/// Draws (spec, m, N) within the configured limits; N is clamped to [n_min, 8].
inline Scale pick_scale(Rng& rng, const SuiteConfig& cfg, int m_min = 1, int n_min_offset = -1) {
  Scale s;
  const auto& specs = default_specs();
  const int which = rng.uniform_int(0, static_cast<int>(specs.size()) - 1);
  const int m_draw = rng.uniform_int(m_min, 4);
  const int n_draw = rng.uniform_int(1, 8);
  s.spec = cfg.spec ? *cfg.spec : specs[static_cast<std::size_t>(which)];
  s.m = cfg.m ? *cfg.m : m_draw;
  const int n_min = n_min_offset < 0 ? 1 : s.m + n_min_offset;
  s.n = cfg.n ? *cfg.n : std::clamp(n_draw, std::min(n_min, 8), 8);
  if (!cfg.n && s.n < n_min) s.n = n_min;
  return s;
}

inline double rel(double err, double scale) { return err / std::max(1.0, scale); }

/// Largest |entry| of a - b over all blocks.
inline double max_entry_diff(const AlgebraElement& a, const AlgebraElement& b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.blocks().size(); ++i) {
    out = std::max(out, (a.block(i) - b.block(i)).cwiseAbs().maxCoeff());
  }
  return out;
}

/// Negative part of lambda_min, relative to max(1, ||a||).
inline double negativity(const std::vector<Matrix>& blocks) {
  const double scale = std::max(1.0, linalg::max_spectral_norm(blocks));
  return std::max(0.0, -linalg::min_eigenvalue(blocks)) / scale;
}

/// Random vector whose rows lie in the kernel of the Hermitian block family
/// `gram` (eigenvalues at most kGramRankTol * top); zero if the kernel is trivial.
inline ModuleVector kernel_vector(const AlgebraSpec& spec, int rank, const std::vector<Matrix>& gram, Rng& rng) {
  const double top = std::max(0.0, linalg::max_eigenvalue(gram));
  std::vector<Matrix> rows;
  for (std::size_t b = 0; b < gram.size(); ++b) {
    const int d = spec.dim(b);
    const linalg::HermitianEigen e = linalg::hermitian_eigen(gram[b]);
    Eigen::Index k = 0;
    while (k < e.values.size() && e.values(k) <= kGramRankTol * top) ++k;
    Matrix coeff = rng.complex_matrix(d, k);
    rows.push_back(k == 0 ? Matrix(Matrix::Zero(d, gram[b].rows())) : Matrix(coeff * e.vectors.leftCols(k).adjoint()));
  }
  ModuleVector x(spec, rank, std::move(rows));
  const double nx = vector_norm(x);
  return nx > 0.0 ? (1.0 / nx) * x : x;
}

/// Sample set for sampled inequalities: extreme eigenvectors of each Hermitian
/// family in `probes`, kernel vectors of `kernel_of` (when given) on every
/// other draw, and random unit vectors.
inline std::vector<ModuleVector> sample_set(const AlgebraSpec& spec, int rank, int count, Rng& rng,
                                            const std::vector<std::vector<Matrix>>& probes,
                                            const std::vector<Matrix>* kernel_of = nullptr) {
  std::vector<ModuleVector> out;
  for (const auto& family : probes) {
    for (ModuleVector& v : probe_vectors(spec, rank, family, 2 * static_cast<int>(family.size()), 0)) {
      if (static_cast<int>(out.size()) < count) out.push_back(std::move(v));
    }
  }
  bool kernel_turn = true;
  while (static_cast<int>(out.size()) < count) {
    if (kernel_of != nullptr && kernel_turn) {
      ModuleVector v = kernel_vector(spec, rank, *kernel_of, rng);
      if (vector_norm(v) > 0.0) {
        out.push_back(std::move(v));
        kernel_turn = false;
        continue;
      }
    }
    kernel_turn = true;
    out.push_back(random_unit_vector(spec, rank, rng));
  }
  return out;
}

/// Square operator on A^m. Kind 0: Gaussian; 1: rank-deficient; 2: zero.
inline ModuleOperator make_k(const AlgebraSpec& spec, int m, int kind, Rng& rng) {
  switch (kind) {
    case 1:
      return random_low_rank_operator(spec, m, m, rng.uniform_int(1, std::max(1, m * spec.max_dim() - 1)), rng);
    case 2:
      return ModuleOperator::zero(spec, m, m);
    default:
      return random_operator(spec, m, m, rng);
  }
}

inline int kind_of(std::uint64_t trial_seed, int kinds) { return static_cast<int>((trial_seed & 0xFFULL) % kinds); }

// --- suites ------------------------------------------------------------------

inline TrialOutcome parseval_identity(std::uint64_t seed, const SuiteConfig& cfg) {
  Rng rng(seed);
  static const std::vector<AlgebraSpec> specs{{1}, {2}, {3}, {1, 2}};
  const AlgebraSpec spec = cfg.spec ? *cfg.spec : specs[static_cast<std::size_t>(rng.uniform_int(0, 3))];
  const int m = cfg.m ? *cfg.m : rng.uniform_int(1, 4);
  const FrameSystem f = standard_generator_frame(spec, m);
  TrialOutcome out;
  for (int i = 0; i < 100; ++i) {
    const ModuleVector x = random_vector(spec, m, rng);
    AlgebraElement sum = AlgebraElement::zero(spec);
    for (const auto& e : f.vectors()) sum += inner(x, e) * inner(e, x);
    out.margin = std::max(out.margin, max_entry_diff(sum, inner(x, x)));
  }
  out.pass = out.margin <= cfg.tol("parseval");
  return out;
}

inline TrialOutcome dual_reconstruction(std::uint64_t seed, const SuiteConfig& cfg) {
  Rng rng(seed);
  const Scale sc = pick_scale(rng, cfg, 1, 0);
  const FrameSystem f = random_frame(sc.spec, sc.m, sc.n, rng.engine()(), cfg.tol("min_lower_bound"));
  const FrameBounds b = optimal_frame_bounds(f);
  const FrameSystem dual = canonical_dual(f);
  const FrameBounds db = optimal_frame_bounds(dual);
  TrialOutcome out;
  out.margin = std::max(std::abs(db.lower - 1.0 / b.upper) / std::max(1.0, 1.0 / b.upper),
                        std::abs(db.upper - 1.0 / b.lower) / std::max(1.0, 1.0 / b.lower));
  for (int i = 0; i < 10; ++i) {
    const ModuleVector x = random_vector(sc.spec, sc.m, rng);
    const double nx = vector_norm(x);
    for (Expansion e : {Expansion::dual_coefficients, Expansion::frame_coefficients}) {
      out.margin = std::max(out.margin, rel(vector_norm(reconstruct(f, x, kDefaultFrameTol, e) - x), nx));
    }
  }
  out.pass = out.margin <= cfg.tol("reconstruction");
  return out;
}

/// Kinds: 0 Gaussian (S, T); 1 rank-deficient T, generic S; 2 rank-deficient T,
/// S = T X0; 3 Gaussian T, S = T X0.
inline TrialOutcome douglas_fourway(std::uint64_t seed, const SuiteConfig& cfg) {
  Rng rng(seed);
  const int kind = kind_of(seed, 4);
  const Scale sc = pick_scale(rng, cfg);
  const int h = sc.m;
  const int f_rank = rng.uniform_int(1, 4);
  const int k_rank = rng.uniform_int(1, 4);
  const int full = std::min(f_rank, h) * sc.spec.max_dim();
  ModuleOperator t = (kind == 1 || kind == 2)
                         ? random_low_rank_operator(sc.spec, f_rank, h, rng.uniform_int(0, std::max(0, full - 1)), rng)
                         : random_operator(sc.spec, f_rank, h, rng);
  ModuleOperator s = (kind == 2 || kind == 3) ? compose(t, random_operator(sc.spec, k_rank, f_rank, rng))
                                              : random_operator(sc.spec, k_rank, h, rng);
  const double tol = cfg.tol("douglas");
  const DouglasReport rep = douglas_report(s, t, tol);
  TrialOutcome out;
  if (rep.cond3_solution) out.margin = rel(rep.residual, operator_norm(s));
  bool ok = rep.consistent() && rep.cond2_violations == 0;
  if (kind >= 2) ok = ok && rep.cond4_range_included;
  if (rep.cond1_lambda && *rep.cond1_lambda > 1e-6) {
    const double lambda = *rep.cond1_lambda;
    const ModuleOperator sss = compose(s, adjoint_op(s));
    const ModuleOperator ttt = compose(t, adjoint_op(t));
    const ModuleOperator above = (lambda + 1e-8) * ttt - sss;
    out.margin = std::max(out.margin, negativity(realize(above).blocks));
    ok = ok && is_positive_operator(above, cfg.tol("psd"));
    ok = ok && !is_positive_operator(0.99 * lambda * ttt - sss, cfg.tol("strict"));
  }
  out.pass = ok;
  return out;
}

/// Random (F, K) pair for the atomic / K-frame suites.
/// Kinds: 0 frame with Gaussian K; 1 deficient F, Gaussian K; 2 deficient F,
/// K = theta o Y (range included); 3 random F, low-rank K.
inline std::pair<FrameSystem, ModuleOperator> make_pair_instance(std::uint64_t seed, const SuiteConfig& cfg, Rng& rng) {
  const int kind = kind_of(seed, 4);
  Scale sc = pick_scale(rng, cfg, kind == 1 || kind == 2 ? 2 : 1);
  if (kind == 0 && !cfg.n) sc.n = std::max(sc.n, sc.m);
  if ((kind == 1 || kind == 2) && !cfg.n) sc.n = std::min(sc.n, sc.m - 1);
  FrameSystem f = random_frame(sc.spec, sc.m, sc.n, rng.engine()(), kind == 0 ? cfg.tol("min_lower_bound") : 0.0);
  ModuleOperator k = ModuleOperator::zero(sc.spec, sc.m, sc.m);
  switch (kind) {
    case 2:
      k = compose(f.synthesis(), random_operator(sc.spec, sc.m, sc.n, rng));
      break;
    case 3:
      k = random_low_rank_operator(sc.spec, sc.m, sc.m, rng.uniform_int(1, std::max(1, sc.m * sc.spec.max_dim() - 1)),
                                   rng);
      break;
    default:
      k = random_operator(sc.spec, sc.m, sc.m, rng);
  }
  return {std::move(f), std::move(k)};
}

inline TrialOutcome thm_t2_equivalence(std::uint64_t seed, const SuiteConfig& cfg) {
  Rng rng(seed);
  const auto [f, k] = make_pair_instance(seed, cfg, rng);
  const double tol = cfg.tol("atomic");
  const AtomicCertificate atomic = verify_atomic_system(f, k, tol);
  const KFrameCertificate range = kframe_via_range(f, k, cfg.tol("douglas"));

  TrialOutcome out;
  // Sampled norm-form inequality C ||K* x||^2 <= ||sum <x,f_n><f_n,x>|| with C = 1/coeff_bound.
  bool sampled_holds = true;
  if (atomic.coeff_bound > 0.0) {
    const double c = 1.0 / atomic.coeff_bound;
    const ModuleOperator k_adj = adjoint_op(k);
    const std::vector<Matrix> s_raw = f.frame_operator().raw_blocks();
    for (const ModuleVector& x : sample_set(f.spec(), f.module_rank(), cfg.samples, rng, {s_raw}, &s_raw)) {
      const double lhs = c * std::pow(vector_norm(apply(k_adj, x)), 2);
      const double rhs = cstar_norm(frame_sum(f, x));
      if (lhs > rhs + cfg.tol("sample")) sampled_holds = false;
      if (atomic.valid) out.margin = std::max(out.margin, lhs - rhs);
    }
  }
  bool ok = atomic.valid == range.valid && atomic.valid == sampled_holds;

  if (atomic.valid) {
    for (int i = 0; i < 20; ++i) {
      const ModuleVector x = random_vector(f.spec(), f.module_rank(), rng);
      const std::vector<AlgebraElement> a = atomic_coefficients(atomic, x);
      ModuleVector kx_rebuilt = ModuleVector::zero(f.spec(), f.module_rank());
      AlgebraElement aa = AlgebraElement::zero(f.spec());
      for (int n = 0; n < f.size(); ++n) {
        kx_rebuilt += a[n] * f.vector(n);
        aa += a[n] * a[n].adjoint();
      }
      const ModuleVector kx = apply(k, x);
      const double err = rel(vector_norm(kx_rebuilt - kx), vector_norm(kx));
      out.margin = std::max(out.margin, err);
      ok = ok && err <= tol;
      ok = ok && loewner_leq(aa, atomic.coeff_bound * inner(x, x), tol);
    }
  }
  out.pass = ok;
  return out;
}

inline TrialOutcome atomic_existence(std::uint64_t seed, const SuiteConfig& cfg) {
  Rng rng(seed);
  const Scale sc = pick_scale(rng, cfg);
  const ModuleOperator k = make_k(sc.spec, sc.m, kind_of(seed, 4) % 3, rng);
  const FrameSystem base = standard_generator_frame(sc.spec, sc.m);
  const FrameSystem f = atomic_system_for(k, base);
  const AtomicCertificate cert = verify_atomic_system(f, k, cfg.tol("atomic"));
  const double k_norm2 = std::pow(operator_norm(k), 2);
  TrialOutcome out;
  out.margin = std::max({0.0, cert.coeff_bound - 1.0, cert.bessel_bound - k_norm2});
  bool ok = cert.valid && cert.coeff_bound <= 1.0 + 1e-8 && cert.bessel_bound <= k_norm2 + 1e-8;
  // Coefficients a_n = <x, x_n> expand K x with sum a_n a_n* = <x, x>.
  for (int i = 0; i < 5; ++i) {
    const ModuleVector x = random_vector(sc.spec, sc.m, rng);
    ModuleVector rebuilt = ModuleVector::zero(sc.spec, sc.m);
    AlgebraElement aa = AlgebraElement::zero(sc.spec);
    for (int n = 0; n < f.size(); ++n) {
      const AlgebraElement a = inner(x, base.vector(n));
      rebuilt += a * f.vector(n);
      aa += a * a.adjoint();
    }
    const ModuleVector kx = apply(k, x);
    const double err = std::max(rel(vector_norm(rebuilt - kx), vector_norm(kx)),
                                rel(max_entry_diff(aa, inner(x, x)), cstar_norm(inner(x, x))));
    out.margin = std::max(out.margin, err);
    ok = ok && err <= cfg.tol("atomic");
  }
  out.pass = ok;
  return out;
}

inline TrialOutcome corollary_atomic_bound(std::uint64_t seed, const SuiteConfig& cfg) {
  Rng rng(seed);
  const Scale sc = pick_scale(rng, cfg, 1, 0);
  const FrameSystem f = random_frame(sc.spec, sc.m, sc.n, rng.engine()(), cfg.tol("min_lower_bound"));
  ModuleOperator k = make_k(sc.spec, sc.m, kind_of(seed, 2), rng);
  const FrameBounds b = optimal_frame_bounds(f);
  const double c = b.lower / std::pow(operator_norm(k), 2);
  const ModuleOperator k_adj = adjoint_op(k);
  const std::vector<Matrix> kk = compose(k, k_adj).raw_blocks();
  TrialOutcome out;
  bool ok = true;
  for (const ModuleVector& x :
       sample_set(sc.spec, sc.m, cfg.samples, rng, {f.frame_operator().raw_blocks(), kk})) {
    const double lhs = c * std::pow(vector_norm(apply(k_adj, x)), 2);
    const double rhs = cstar_norm(frame_sum(f, x));
    out.margin = std::max(out.margin, lhs - rhs);
    ok = ok && lhs <= rhs + cfg.tol("sample");
  }
  out.pass = ok;
  return out;
}

inline TrialOutcome kframe_sggrkk(std::uint64_t seed, const SuiteConfig& cfg) {
  Rng rng(seed);
  const auto [f, k] = make_pair_instance(seed, cfg, rng);
  const double c_opt = optimal_kframe_lower_bound(f, k, cfg.tol("douglas"));
  const double d_opt = optimal_frame_bounds(f).upper;
  TrialOutcome out;
  bool ok = true;
  if (c_opt > 1e-6) {
    const KFrameCertificate at = verify_kframe(f, k, c_opt * (1.0 - 1e-6), d_opt, cfg.tol("psd"));
    const KFrameCertificate over = verify_kframe(f, k, c_opt * 1.01, d_opt, cfg.tol("strict"));
    ok = at.valid && !over.valid;
    out.margin = std::max(0.0, -at.psd_margin);
  }
  // Sampled algebra-order check of C <K*x, K*x> <= sum <x,f_n><f_n,x> <= D <x,x> at C = c_opt.
  const ModuleOperator k_adj = adjoint_op(k);
  const std::vector<Matrix> kk = compose(k, k_adj).raw_blocks();
  for (const ModuleVector& x :
       sample_set(f.spec(), f.module_rank(), cfg.samples, rng, {f.frame_operator().raw_blocks(), kk})) {
    const ModuleVector kx = apply(k_adj, x);
    const AlgebraElement mid = frame_sum(f, x);
    const AlgebraElement low_gap = mid - c_opt * inner(kx, kx);
    const AlgebraElement high_gap = d_opt * inner(x, x) - mid;
    out.margin = std::max({out.margin, negativity(low_gap.blocks()), negativity(high_gap.blocks())});
    ok = ok && is_positive(low_gap, cfg.tol("sample")) && is_positive(high_gap, cfg.tol("sample"));
  }
  out.pass = ok;
  return out;
}

/// Kinds 0, 1: surjective K with a random frame; kind 2: non-surjective K.
inline TrialOutcome corollary_onto(std::uint64_t seed, const SuiteConfig& cfg) {
  Rng rng(seed);
  const int kind = kind_of(seed, 3);
  const Scale sc = pick_scale(rng, cfg, 1, 0);
  const FrameSystem f = random_frame(sc.spec, sc.m, sc.n, rng.engine()(), cfg.tol("min_lower_bound"));
  TrialOutcome out;
  if (kind == 2) {
    const ModuleOperator k =
        random_low_rank_operator(sc.spec, sc.m, sc.m, rng.uniform_int(0, sc.m * sc.spec.dim(0) - 1), rng);
    bool threw = false;
    try {
      (void)frame_from_kframe(f, k, cfg.tol("douglas"));
    } catch (const DomainError&) {
      threw = true;
    }
    out.pass = surjectivity_constant(k) == 0.0 && threw;
    return out;
  }
  const ModuleOperator k = random_operator(sc.spec, sc.m, sc.m, rng);
  const double m_const = surjectivity_constant(k);
  const double c_k = optimal_kframe_lower_bound(f, k, cfg.tol("douglas"));
  const FrameBounds b = frame_from_kframe(f, k, cfg.tol("douglas"));
  const double lam_min = min_eigenvalue(f.frame_operator());
  out.margin = std::max(0.0, m_const * m_const * c_k - lam_min);
  out.pass = m_const > 0.0 && lam_min >= m_const * m_const * c_k - 1e-8 &&
             verify_frame(f, b.lower, b.upper, BoundsFlavor::loewner, cfg.tol("psd"));
  return out;
}

inline TrialOutcome prop_p2_cs(std::uint64_t seed, const SuiteConfig& cfg) {
  Rng rng(seed);
  const Scale sc = pick_scale(rng, cfg);
  const ModuleOperator t = make_k(sc.spec, sc.m, kind_of(seed, 2), rng);
  const ModuleVector x = random_vector(sc.spec, sc.m, rng);
  const ModuleVector tx = apply(t, x);
  const AlgebraElement gap = std::pow(operator_norm(t), 2) * inner(x, x) - inner(tx, tx);
  TrialOutcome out;
  out.margin = negativity(gap.blocks());
  out.pass = is_positive(gap, cfg.tol("psd"));
  return out;
}

/// A = C: compare against plain column-vector linear algebra on the Gram matrix.
inline TrialOutcome scalar_regression(std::uint64_t seed, const SuiteConfig& cfg) {
  Rng rng(seed);
  SuiteConfig scalar_cfg = cfg;
  scalar_cfg.spec = AlgebraSpec::scalar();
  const Scale sc = pick_scale(rng, scalar_cfg, 1, 0);
  const FrameSystem f = random_frame(sc.spec, sc.m, sc.n, rng.engine()(), cfg.tol("min_lower_bound"));
  const ModuleOperator k = random_operator(sc.spec, sc.m, sc.m, rng);

  // Classical picture: f_n as columns of an m x N matrix, K acting on columns.
  Matrix cols(sc.m, sc.n);
  for (int n = 0; n < sc.n; ++n) {
    for (int i = 0; i < sc.m; ++i) cols(i, n) = f.vector(n).entry(i).block(0)(0, 0);
  }
  Matrix k_cl(sc.m, sc.m);
  for (int i = 0; i < sc.m; ++i) {
    for (int j = 0; j < sc.m; ++j) k_cl(j, i) = k.entry(i, j).block(0)(0, 0);
  }
  const Matrix gram = cols * cols.adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const double c_cl = es.eigenvalues()(0);
  const double d_cl = es.eigenvalues()(sc.m - 1);
  const Matrix inv_sqrt = es.operatorInverseSqrt();
  Eigen::SelfAdjointEigenSolver<Matrix> pencil(inv_sqrt * k_cl * k_cl.adjoint() * inv_sqrt, Eigen::EigenvaluesOnly);
  const double ck_cl = 1.0 / pencil.eigenvalues()(sc.m - 1);
  const Matrix dual_cl = gram.ldlt().solve(cols);

  const FrameBounds b = optimal_frame_bounds(f);
  const FrameSystem dual = canonical_dual(f);
  const double ck = optimal_kframe_lower_bound(f, k, cfg.tol("douglas"));
  TrialOutcome out;
  out.margin = std::max({rel(std::abs(b.lower - c_cl), c_cl), rel(std::abs(b.upper - d_cl), d_cl),
                         rel(std::abs(ck - ck_cl), ck_cl)});
  for (int n = 0; n < sc.n; ++n) {
    for (int i = 0; i < sc.m; ++i) {
      out.margin = std::max(out.margin, std::abs(dual.vector(n).entry(i).block(0)(0, 0) - dual_cl(i, n)));
    }
  }
  out.pass = out.margin <= cfg.tol("scalar");
  return out;
}

/// Bessel bound transfers between forms: ||theta|| <= sqrt(D), and Loewner
/// bounds imply norm-form bounds on samples.
inline TrialOutcome prop_w_bessel(std::uint64_t seed, const SuiteConfig& cfg) {
  Rng rng(seed);
  const Scale sc = pick_scale(rng, cfg, 1, 0);
  const FrameSystem f = random_frame(sc.spec, sc.m, sc.n, rng.engine()(), cfg.tol("min_lower_bound"));
  const FrameBounds b = optimal_frame_bounds(f);
  TrialOutcome out;
  out.margin = std::max(0.0, operator_norm(f.synthesis()) - std::sqrt(b.upper));
  const bool loewner = verify_frame(f, b.lower, b.upper, BoundsFlavor::loewner, cfg.tol("psd"));
  const bool norm = verify_frame(f, b.lower, b.upper, BoundsFlavor::norm, cfg.tol("sample"), cfg.samples,
                                 rng.engine()());
  out.pass = out.margin <= cfg.tol("sample") && loewner && norm;
  return out;
}

struct SuiteEntry {
  const char* name;
  int kinds;
  TrialOutcome (*run)(std::uint64_t, const SuiteConfig&);
};

inline const std::vector<SuiteEntry>& registry() {
  static const std::vector<SuiteEntry> suites{
      {"parseval_identity", 1, &parseval_identity},
      {"dual_reconstruction", 1, &dual_reconstruction},
      {"douglas_fourway", 4, &douglas_fourway},
      {"thm_t2_equivalence", 4, &thm_t2_equivalence},
      {"atomic_existence", 4, &atomic_existence},
      {"corollary_atomic_bound", 2, &corollary_atomic_bound},
      {"kframe_sggrkk", 4, &kframe_sggrkk},
      {"corollary_onto", 3, &corollary_onto},
      {"prop_p2_cs", 2, &prop_p2_cs},
      {"scalar_regression", 1, &scalar_regression},
      {"prop_w_bessel", 1, &prop_w_bessel},
  };
  return suites;
}

inline const SuiteEntry& find_suite(const std::string& name) {
  for (const auto& s : registry()) {
    if (name == s.name) return s;
  }
  throw UsageError("unknown suite id: " + name);
}

}  // namespace detail

inline std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& s : detail::registry()) out.emplace_back(s.name);
  return out;
}

inline std::uint64_t trial_seed(std::uint64_t master, const std::string& suite, int index) {
  const detail::SuiteEntry& e = detail::find_suite(suite);
  const std::uint64_t base = derive_seed(derive_seed(master, hash_name(suite)), static_cast<std::uint64_t>(index));
  return (base & ~0xFFULL) | static_cast<std::uint64_t>(index % e.kinds);
}

/// Runs a single trial from its seed; exceptions become failed outcomes.
inline TrialOutcome run_trial(const std::string& suite, std::uint64_t seed, const SuiteConfig& cfg) {
  const detail::SuiteEntry& e = detail::find_suite(suite);
  try {
    return e.run(seed, cfg);
  } catch (const ConsistencyError& ex) {
    return {false, std::numeric_limits<double>::infinity(), std::string(ex.what()), true};
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& ex) {
    return {false, std::numeric_limits<double>::infinity(), std::string(ex.what()), false};
  }
}

inline constexpr std::size_t kMaxReportedFailures = 32;

inline SuiteReport run_property_suite(const SuiteConfig& cfg) {
  if (cfg.trials < 1) throw UsageError("trials must be >= 1");
  for (const auto& [name, v] : cfg.tolerances) {
    if (!(v > 0.0)) throw UsageError("tolerance " + name + " must be positive");
  }
  const std::vector<std::string> names = cfg.suites.empty() ? suite_names() : cfg.suites;
  for (const auto& n : names) (void)detail::find_suite(n);

  SuiteReport rep{cfg.seed, cfg.trials, {}};
  for (const auto& name : names) {
    SuiteResult r;
    r.name = name;
    for (int i = 0; i < cfg.trials; ++i) {
      const std::uint64_t seed = trial_seed(cfg.seed, name, i);
      const TrialOutcome t = run_trial(name, seed, cfg);
      ++r.trials;
      if (i == 0 || t.margin > r.worst_margin) {
        r.worst_margin = t.margin;
        r.worst_seed = seed;
      }
      if (t.pass) {
        ++r.passed;
      } else {
        ++r.failed;
        if (r.failing_seeds.size() < kMaxReportedFailures) r.failing_seeds.push_back(seed);
      }
      r.consistency_error = r.consistency_error || t.consistency;
    }
    rep.suites.push_back(std::move(r));
  }
  return rep;
}

inline json margin_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const SuiteReport& rep) {
  json suites = json::array();
  for (const auto& s : rep.suites) {
    suites.push_back({{"suite", s.name},
                      {"trials", s.trials},
                      {"passed", s.passed},
                      {"failed", s.failed},
                      {"worst_margin", margin_json(s.worst_margin)},
                      {"worst_seed", s.worst_seed},
                      {"failing_seeds", s.failing_seeds},
                      {"consistency_error", s.consistency_error}});
  }
  return {{"seed", rep.seed}, {"trials", rep.trials}, {"pass", rep.pass()}, {"suites", std::move(suites)}};
}

inline std::string to_text(const SuiteReport& rep) {
  std::ostringstream out;
  out << "seed " << rep.seed << ", " << rep.trials << " trials per suite\n";
  for (const auto& s : rep.suites) {
    out << (s.failed == 0 ? "PASS " : "FAIL ") << s.name << "  " << s.passed << "/" << s.trials
        << "  worst margin " << s.worst_margin << " (seed " << s.worst_seed << ")";
    if (!s.failing_seeds.empty()) {
      out << "  failing seeds:";
      for (auto f : s.failing_seeds) out << ' ' << f;
    }
    out << '\n';
  }
  out << (rep.pass() ? "all suites passed\n" : "some suites failed\n");
  return out.str();
}

}  // namespace cstarframe::harness
