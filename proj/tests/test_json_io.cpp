#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cstarframe/json_io.hpp"
#include "cstarframe/operator_frames.hpp"
#include "cstarframe/random.hpp"
#include "test_support.hpp"

using namespace cstarframe;
using namespace testing_support;

namespace {

template <class T, class Parse>
T round_trip(const T& value, Parse parse) {
  return parse(io::parse(io::to_json(value).dump()), "$");
}

}  // namespace

TEST(JsonRoundTrip, AlgebraElementWithAwkwardEntries) {
  Matrix m(2, 2);
  m << Complex(-0.1, 1.0 / 3.0), Complex(-0.0, 1e-310), Complex(6.02214076e23, -std::sqrt(2.0)),
      Complex(std::nextafter(1.0, 2.0), -1e-17);
  const AlgebraElement a(AlgebraSpec{2, 1}, {m, Matrix::Constant(1, 1, Complex(-7.25, 0.1))});
  const AlgebraElement back = round_trip(a, io::element_from_json);
  EXPECT_EQ(back, a);
  EXPECT_TRUE(std::signbit(back.block(0)(0, 1).real()));
}

TEST(JsonRoundTrip, RandomValues) {
  Rng rng(81);
  const AlgebraSpec spec{1, 2, 3};
  for (int i = 0; i < 10; ++i) {
    const ModuleVector x = random_vector(spec, 3, rng);
    EXPECT_EQ(round_trip(x, io::vector_from_json), x);
    const ModuleOperator t = random_operator(spec, 2, 3, rng);
    EXPECT_EQ(round_trip(t, io::operator_from_json), t);
    const FrameSystem f = random_frame(spec, 2, 4, static_cast<std::uint64_t>(i));
    EXPECT_EQ(round_trip(f, io::frame_from_json).vectors(), f.vectors());
    EXPECT_EQ(round_trip(spec, io::spec_from_json), spec);
  }
}

TEST(JsonRoundTrip, Bounds) {
  const FrameBounds b{1.0 / 3.0, std::sqrt(7.0), BoundsFlavor::norm, true};
  const FrameBounds back = round_trip(b, io::bounds_from_json);
  EXPECT_EQ(back.lower, b.lower);
  EXPECT_EQ(back.upper, b.upper);
  EXPECT_EQ(back.flavor, b.flavor);
  EXPECT_EQ(back.is_frame, b.is_frame);
}

TEST(JsonRoundTrip, CertificatesWithWitnessOperators) {
  Rng rng(82);
  const AlgebraSpec spec{2, 1};
  const FrameSystem f = random_frame(spec, 2, 4, 82, 1e-3);
  const ModuleOperator k = random_operator(spec, 2, 2, rng);

  const KFrameCertificate kc = verify_kframe(f, k, 0.01, 100.0, 1e-8);
  const KFrameCertificate kb = round_trip(kc, io::kframe_certificate_from_json);
  EXPECT_EQ(kb.frame.vectors(), kc.frame.vectors());
  EXPECT_EQ(kb.k, kc.k);
  EXPECT_EQ(kb.witness_l, kc.witness_l);
  EXPECT_EQ(kb.lower, kc.lower);
  EXPECT_EQ(kb.upper, kc.upper);
  EXPECT_EQ(kb.psd_margin, kc.psd_margin);
  EXPECT_EQ(kb.upper_margin, kc.upper_margin);
  EXPECT_EQ(kb.range_included, kc.range_included);
  EXPECT_EQ(kb.valid, kc.valid);
  EXPECT_EQ(kb.tol, kc.tol);
  EXPECT_EQ(kb.warning, kc.warning);
  EXPECT_EQ(io::to_json(kb).dump(), io::to_json(kc).dump());

  const AtomicCertificate ac = verify_atomic_system(f, k, 1e-8);
  const AtomicCertificate ab = round_trip(ac, io::atomic_certificate_from_json);
  EXPECT_EQ(ab.solution, ac.solution);
  EXPECT_EQ(ab.coeff_bound, ac.coeff_bound);
  EXPECT_EQ(ab.residual, ac.residual);
  EXPECT_EQ(io::to_json(ab).dump(), io::to_json(ac).dump());

  const ModuleOperator t = random_low_rank_operator(spec, 2, 2, 1, rng);
  for (const ModuleOperator& s : {compose(t, random_operator(spec, 2, 2, rng)), random_operator(spec, 2, 2, rng)}) {
    const DouglasReport dr = douglas_report(s, t, 1e-8);
    const DouglasReport db = round_trip(dr, io::douglas_report_from_json);
    EXPECT_EQ(db.cond1_lambda, dr.cond1_lambda);
    EXPECT_EQ(db.cond2_mu, dr.cond2_mu);
    EXPECT_EQ(db.cond3_solution.has_value(), dr.cond3_solution.has_value());
    if (dr.cond3_solution) {
      EXPECT_EQ(*db.cond3_solution, *dr.cond3_solution);
    }
    EXPECT_EQ(db.cond4_range_included, dr.cond4_range_included);
    EXPECT_EQ(io::to_json(db).dump(), io::to_json(dr).dump());
  }
}

TEST(JsonParse, ElementLayout) {
  const AlgebraElement a = io::element_from_json(io::parse(R"({"spec": [2], "blocks": [[[[1,0],[0,2]],[[0,-2],[3,0]]]]})"));
  EXPECT_EQ(a.block(0)(0, 1), Complex(0, 2));
  EXPECT_EQ(a.block(0)(1, 0), Complex(0, -2));
  EXPECT_EQ(a.block(0)(1, 1), Complex(3, 0));
}

TEST(JsonParse, ErrorsCarryLocation) {
  try {
    io::parse("{\"spec\": [2,]");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
  try {
    io::vector_from_json(io::parse(R"({"rank": 1, "entries": [{"spec": [1], "blocks": [[[[1, "x"]]]]}]})"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("$.entries[0].blocks[0]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(io::operator_from_json(io::parse(R"({"dom": 1, "cod": 1})")), ParseError);
  EXPECT_THROW(io::element_from_json(io::parse(R"({"spec": [2], "blocks": [[[[1,0]]]]})")), std::exception);
  EXPECT_THROW(io::read_file("/nonexistent/cstarframe.json"), ParseError);
}
