#include <gtest/gtest.h>

#include <cmath>

#include "cstarframe/hilbert_module.hpp"
#include "cstarframe/random.hpp"
#include "test_support.hpp"

using namespace cstarframe;
using namespace testing_support;

namespace {

ModuleVector m2vec(const AlgebraElement& a) { return ModuleVector(std::vector<AlgebraElement>{a}); }

ModuleOperator m2op(const AlgebraElement& a) { return ModuleOperator(std::vector<std::vector<AlgebraElement>>{{a}}); }

double oracle_diff(const oracle::CMat& a, const Matrix& b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) out = std::max(out, std::abs(a[i][j] - b(i, j)));
  return out;
}

}  // namespace

TEST(ModuleVector, ConstructionChecksShape) {
  EXPECT_THROW(ModuleVector(std::vector<AlgebraElement>{}), StructuralError);
  EXPECT_THROW(ModuleVector(std::vector<AlgebraElement>{diag({1, 2}), scalar(1)}), StructuralError);
  EXPECT_THROW(ModuleVector(AlgebraSpec{2}, 1, {Matrix::Zero(2, 4)}), StructuralError);
  EXPECT_THROW(ModuleVector::generator(AlgebraSpec{2}, 2, 2), StructuralError);
  const ModuleVector x = cvec({1, 2, 3});
  EXPECT_EQ(x.rank(), 3);
  EXPECT_EQ(x.entry(1), scalar(2));
}

TEST(Inner, Examples) {
  EXPECT_EQ(inner(cvec({1, 2}), cvec({3, 4})), scalar(11));
  EXPECT_EQ(inner(m2vec(diag({1, 0})), m2vec(unit_matrix(2, 0, 1))), AlgebraElement::zero(AlgebraSpec{2}));
  EXPECT_THROW(inner(cvec({1, 2}), cvec({1})), StructuralError);

  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const ModuleVector x = random_vector(AlgebraSpec{2, 3}, 3, rng);
    EXPECT_GE(oracle_min_eig(inner(x, x).blocks()), -1e-10);
  }
}

TEST(Inner, HermitianSymmetryAndFirstSlotLinearity) {
  Rng rng(32);
  const AlgebraSpec spec{1, 2};
  for (int i = 0; i < 20; ++i) {
    const ModuleVector x = random_vector(spec, 2, rng);
    const ModuleVector y = random_vector(spec, 2, rng);
    const AlgebraElement a = random_element(spec, rng);
    EXPECT_EQ(inner(x, y), inner(y, x).adjoint());
    EXPECT_LT(max_abs_diff(inner(a * x, y), a * inner(x, y)), 1e-12);
  }
}

TEST(VectorNorm, Examples) {
  EXPECT_DOUBLE_EQ(vector_norm(m2vec(diag({3, 4}))), 4.0);
  EXPECT_EQ(vector_norm(ModuleVector::zero(AlgebraSpec{2, 1}, 3)), 0.0);

  Rng rng(33);
  for (int i = 0; i < 20; ++i) {
    const ModuleVector x = random_vector(AlgebraSpec::scalar(), 4, rng);
    double sum = 0.0;
    for (const auto& e : x.entries()) sum += std::norm(e.block(0)(0, 0));
    EXPECT_NEAR(vector_norm(x), std::sqrt(sum), 1e-12 * std::sqrt(sum));
  }
}

TEST(Apply, Examples) {
  Rng rng(34);
  const AlgebraSpec spec{2, 1};
  const ModuleVector x = random_vector(spec, 3, rng);
  EXPECT_EQ(apply(ModuleOperator::identity(spec, 3), x), x);
  EXPECT_EQ(apply(cop({{2}}), cvec({3})), cvec({6}));
  EXPECT_THROW(apply(ModuleOperator::identity(spec, 2), x), StructuralError);
}

TEST(Apply, AgreesWithEntrywiseActionAndRealization) {
  Rng rng(35);
  const AlgebraSpec spec{2, 3};
  for (int i = 0; i < 10; ++i) {
    const ModuleOperator t = random_operator(spec, 3, 2, rng);
    const ModuleVector x = random_vector(spec, 3, rng);
    const ModuleVector y = apply(t, x);
    for (int j = 0; j < 2; ++j) {
      AlgebraElement expected = AlgebraElement::zero(spec);
      for (int k = 0; k < 3; ++k) expected = expected + x.entry(k) * t.entry(k, j);
      EXPECT_LT(max_abs_diff(y.entry(j), expected), 1e-12);
    }
    const BlockRealization r = realize(t);
    const auto fx = flatten(x);
    const auto fy = flatten(y);
    for (std::size_t b = 0; b < fx.size(); ++b) EXPECT_LT(max_abs_diff(r.blocks[b] * fx[b], fy[b]), 1e-12);
  }
}

TEST(Apply, IsALinear) {
  Rng rng(36);
  const AlgebraSpec spec{2, 2};
  const ModuleOperator t = random_operator(spec, 2, 3, rng);
  const ModuleVector x = random_vector(spec, 2, rng);
  const AlgebraElement a = random_element(spec, rng);
  EXPECT_LT(max_abs_diff(apply(t, a * x), a * apply(t, x)), 1e-12);
}

TEST(AdjointOp, Examples) {
  const ModuleOperator d = ModuleOperator(std::vector<std::vector<AlgebraElement>>{
      {diag({1, 2}), AlgebraElement::zero(AlgebraSpec{2})}, {AlgebraElement::zero(AlgebraSpec{2}), diag({3, -1})}});
  EXPECT_EQ(adjoint_op(d), d);
  EXPECT_EQ(adjoint_op(cop({{Complex(0, 1)}})), cop({{Complex(0, -1)}}));

  Rng rng(37);
  const ModuleOperator t = random_operator(AlgebraSpec{2, 1}, 2, 3, rng);
  EXPECT_EQ(adjoint_op(adjoint_op(t)), t);
  const BlockRealization rt = realize(t);
  const BlockRealization ra = realize(adjoint_op(t));
  for (std::size_t b = 0; b < rt.blocks.size(); ++b) {
    EXPECT_EQ(ra.blocks[b], Matrix(rt.blocks[b].adjoint()));
    EXPECT_EQ(oracle_diff(oracle::adjoint(realization_from_entries(t, b)), ra.blocks[b]), 0.0);
  }
}

TEST(AdjointOp, AdjointIdentityOnSamples) {
  Rng rng(38);
  const AlgebraSpec spec{3, 1};
  for (int i = 0; i < 20; ++i) {
    const ModuleOperator t = random_operator(spec, 2, 3, rng);
    const ModuleVector x = random_vector(spec, 2, rng);
    const ModuleVector y = random_vector(spec, 3, rng);
    const AlgebraElement lhs = inner(apply(t, x), y);
    const AlgebraElement rhs = inner(x, apply(adjoint_op(t), y));
    EXPECT_LT(max_abs_diff(lhs, rhs), 1e-10 * std::max(1.0, cstar_norm(lhs)));
  }
}

TEST(Compose, Examples) {
  Rng rng(39);
  const AlgebraSpec spec{2};
  const ModuleOperator t = random_operator(spec, 2, 3, rng);
  EXPECT_EQ(compose(ModuleOperator::identity(spec, 3), t), t);
  EXPECT_THROW(compose(t, t), StructuralError);

  // Over C, (Tx)_j = sum_i x_i M_ij is x^T M, so compose(T1, T2) has matrix M2 * M1.
  const ModuleOperator t1 = cop({{1, 2}, {3, 4}});
  const ModuleOperator t2 = cop({{0, 1}, {1, 1}});
  EXPECT_EQ(compose(t1, t2), cop({{3, 4}, {4, 6}}));
}

TEST(Compose, MatchesSequentialApplicationAndRealization) {
  Rng rng(3);
  const AlgebraSpec spec{2};
  for (int i = 0; i < 20; ++i) {
    const ModuleOperator t1 = random_operator(spec, 2, 2, rng);
    const ModuleOperator t2 = random_operator(spec, 2, 2, rng);
    const ModuleVector x = random_vector(spec, 2, rng);
    const ModuleOperator c = compose(t1, t2);
    EXPECT_LT(max_abs_diff(apply(c, x), apply(t1, apply(t2, x))), 1e-12 * std::max(1.0, vector_norm(x)) * 10);
    const oracle::CMat expected = oracle::mul(realization_from_entries(t1, 0), realization_from_entries(t2, 0));
    EXPECT_LT(oracle_diff(expected, realize(c).blocks[0]), 1e-10);
  }
}

TEST(Realize, Examples) {
  const AlgebraSpec spec{2, 3};
  const BlockRealization r = realize(ModuleOperator::identity(spec, 2));
  EXPECT_EQ(r.blocks[0], Matrix(Matrix::Identity(4, 4)));
  EXPECT_EQ(r.blocks[1], Matrix(Matrix::Identity(6, 6)));

  const AlgebraElement p = diag({1, 0});
  EXPECT_EQ(realize(m2op(p)).blocks[0], p.block(0));

  Rng rng(40);
  const ModuleOperator t = random_operator(spec, 2, 3, rng);
  const BlockRealization rt = realize(t);
  EXPECT_EQ(rt.blocks[0].rows(), 6);
  EXPECT_EQ(rt.blocks[0].cols(), 4);
  for (std::size_t b = 0; b < 2; ++b) EXPECT_EQ(oracle_diff(realization_from_entries(t, b), rt.blocks[b]), 0.0);
  EXPECT_EQ(ModuleOperator::from_realization(rt), t);
}

TEST(Realize, Faithful) {
  const AlgebraSpec spec{2, 1};
  EXPECT_EQ(operator_norm(ModuleOperator::zero(spec, 2, 2)), 0.0);
  Rng rng(41);
  const ModuleOperator t = random_operator(spec, 2, 2, rng);
  EXPECT_GT(operator_norm(t), 0.0);
}

TEST(OperatorNorm, Examples) {
  EXPECT_DOUBLE_EQ(operator_norm(ModuleOperator::identity(AlgebraSpec{2, 3}, 2)), 1.0);
  EXPECT_NEAR(operator_norm(cop({{3, 0}, {0, 1}})), 3.0, 1e-14);

  Rng rng(42);
  const AlgebraSpec spec{2, 2};
  for (int i = 0; i < 10; ++i) {
    const ModuleOperator t = random_operator(spec, 2, 3, rng);
    const double nt = operator_norm(t);
    double expected = 0.0;
    for (std::size_t b = 0; b < 2; ++b) expected = std::max(expected, oracle::largest_singular_value(realization_from_entries(t, b)));
    EXPECT_NEAR(nt, expected, 1e-10 * expected);
    for (int s = 0; s < 50; ++s) {
      const ModuleVector x = random_vector(spec, 2, rng);
      EXPECT_LE(vector_norm(apply(t, x)), nt * vector_norm(x) + 1e-10);
    }
    EXPECT_NEAR(operator_norm(compose(adjoint_op(t), t)), nt * nt, 1e-8 * nt * nt);
  }
}

TEST(OperatorNorm, CauchySchwarzLoewnerBound) {
  Rng rng(43);
  const AlgebraSpec spec{3, 1};
  for (int i = 0; i < 50; ++i) {
    const ModuleOperator t = random_operator(spec, 2, 2, rng);
    const ModuleVector x = random_vector(spec, 2, rng);
    const ModuleVector tx = apply(t, x);
    const double nt = operator_norm(t);
    EXPECT_TRUE(loewner_leq(inner(tx, tx), (nt * nt) * inner(x, x), 1e-8));
  }
}

TEST(IsPositiveOperator, Examples) {
  EXPECT_TRUE(is_positive_operator(ModuleOperator::identity(AlgebraSpec{2}, 3), 1e-12));
  EXPECT_TRUE(is_positive_operator(m2op(diag({1, 0})), 1e-12));
  EXPECT_FALSE(is_positive_operator(m2op(diag({1, -1})), 1e-12));
  EXPECT_THROW(is_positive_operator(ModuleOperator::zero(AlgebraSpec{2}, 1, 2), 1e-12), StructuralError);

  Rng rng(44);
  const AlgebraSpec spec{2, 3};
  for (int i = 0; i < 10; ++i) {
    const ModuleOperator t = random_operator(spec, 2, 3, rng);
    const ModuleOperator s = compose(adjoint_op(t), t);
    EXPECT_TRUE(is_positive_operator(s, 1e-10));
    for (std::size_t b = 0; b < 2; ++b) {
      const double lo = oracle::hermitian_eigenvalues(realization_from_entries(s, b)).front();
      EXPECT_GE(lo, -1e-10 * std::max(1.0, operator_norm(s)));
    }
  }
}

TEST(IsPositiveOperator, AgreesWithSampledQuadraticForm) {
  Rng rng(45);
  const AlgebraSpec spec{2};
  const ModuleOperator t = random_operator(spec, 2, 2, rng);
  const ModuleOperator pos = compose(t, adjoint_op(t));
  const ModuleOperator indefinite = pos - 2.0 * ModuleOperator::scaled_identity(spec, 2, max_eigenvalue(pos) / 2.0 + 0.1);
  ASSERT_TRUE(is_positive_operator(pos, 1e-8));
  ASSERT_FALSE(is_positive_operator(indefinite, 1e-8));
  for (int i = 0; i < 1000; ++i) {
    const ModuleVector x = random_vector(spec, 2, rng);
    EXPECT_TRUE(is_positive(inner(apply(pos, x), x), 1e-8));
  }
  // The negative definite operator is refuted by every nonzero sample.
  const ModuleVector x = random_vector(spec, 2, rng);
  EXPECT_FALSE(is_positive(inner(apply(indefinite, x), x), 1e-8));
}

TEST(PseudoInverse, Examples) {
  const ModuleOperator p = pseudo_inverse(cop({{2, 0}, {0, 0}}));
  EXPECT_LT(max_abs_diff(p, cop({{0.5, 0}, {0, 0}})), 1e-15);

  Rng rng(46);
  const AlgebraSpec spec{2, 1};
  const ModuleOperator t = random_operator(spec, 3, 3, rng);
  const ModuleOperator tp = pseudo_inverse(t);
  EXPECT_LT(operator_norm(compose(t, tp) - ModuleOperator::identity(spec, 3)), 1e-8);
  const BlockRealization rp = realize(tp);
  for (std::size_t b = 0; b < 2; ++b) {
    EXPECT_LT(oracle_diff(oracle::inverse(realization_from_entries(t, b)), rp.blocks[b]), 1e-8);
  }
}

TEST(PseudoInverse, PenroseIdentitiesOnRankDeficientOperators) {
  Rng rng(47);
  const AlgebraSpec spec{2, 3};
  for (int i = 0; i < 20; ++i) {
    const ModuleOperator t = random_low_rank_operator(spec, 3, 2, 2, rng);
    const ModuleOperator tp = pseudo_inverse(t);
    const double scale = std::max(1.0, operator_norm(t));
    EXPECT_LT(operator_norm(compose(compose(t, tp), t) - t), 1e-8 * scale);
    EXPECT_LT(operator_norm(compose(compose(tp, t), tp) - tp), 1e-8 * std::max(1.0, operator_norm(tp)));
    const ModuleOperator a = compose(t, tp);
    const ModuleOperator c = compose(tp, t);
    EXPECT_LT(operator_norm(a - adjoint_op(a)), 1e-8);
    EXPECT_LT(operator_norm(c - adjoint_op(c)), 1e-8);
  }
}

TEST(RangeIncluded, DetectsInclusionAndItsFailure) {
  const ModuleOperator t = cop({{1, 0}, {0, 0}});
  EXPECT_TRUE(range_included(t, t));
  EXPECT_FALSE(range_included(cop({{0, 0}, {0, 1}}), t));
  EXPECT_TRUE(range_included(ModuleOperator::zero(AlgebraSpec::scalar(), 2, 2), t));

  Rng rng(48);
  const AlgebraSpec spec{2};
  const ModuleOperator base = random_low_rank_operator(spec, 2, 3, 2, rng);
  const ModuleOperator x0 = random_operator(spec, 2, 2, rng);
  EXPECT_TRUE(range_included(compose(base, x0), base));
  EXPECT_EQ(realized_rank(base), 2);
}
