#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "groupoid/groupoid.hpp"
#include "oracles.hpp"

using namespace groupoid;
namespace fx = groupoid::fixtures;

namespace {

const Matrix kSwap = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
const Matrix kFlip = Matrix::from_rows({{1.0, 0.0}, {0.0, -1.0}});

double svd_norm(const Matrix& m) {
  Eigen::MatrixXcd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(e).singularValues()(0);
}

// U(y,g,x) = L(g) is a representation of the whole gauge groupoid.
Matrix canonical(const GaugeGroupoid& gg, Arrow a) { return left_regular(gg.bundle.group, gg.triple(a).g); }

GroupoidFunction random_on_isotropy(const FiniteGroupoid& g, Rng& rng) {
  GroupoidFunction a = GroupoidFunction::zero(g.arrow_count());
  for (Arrow l : g.arrows())
    if (g.is_loop(l)) a[l] = rng.unit_square();
  return a;
}

}  // namespace

TEST(ValidateRep, TrivialRepOnFixtures) {
  for (const FiniteGroupoid& g : {fx::pair2(), fx::z3(), fx::gauge_2_z2().groupoid, fx::gauge_3_s3().groupoid}) {
    const auto s = validate_rep(g, trivial_rep(g), 1e-12);
    EXPECT_TRUE(s.passed());
    EXPECT_EQ(s.checks.size(), 4u);
    EXPECT_EQ(s.at("measurability").note, "vacuous: finite base");
  }
}

TEST(ValidateRep, RegularRepOfZ2) {
  const auto g = group_as_groupoid(FiniteGroup::cyclic(2));
  const auto r = regular_isotropy_rep(g);
  EXPECT_EQ(r(arrow_at(1)), kSwap);
  EXPECT_TRUE(validate_rep(g, r, 1e-12).passed());
}

TEST(ValidateRep, ScaledMatrixFailsInverseAtThatArrow) {
  const auto g = group_as_groupoid(FiniteGroup::cyclic(2));
  auto r = regular_isotropy_rep(g);
  r.U[1] = Complex(2.0) * kSwap;
  const auto s = validate_rep(g, r, 1e-9);
  EXPECT_FALSE(s.passed());
  const auto& inv = s.at("inverse");
  EXPECT_FALSE(inv.passed);
  EXPECT_EQ(inv.witness, std::vector<Arrow>{arrow_at(1)});
  EXPECT_NEAR(inv.max_deviation, 3.0, 1e-12);  // |4 − 1| on (swap·2)*(swap·2) − I
  EXPECT_TRUE(s.at("identity").passed);
}

TEST(ValidateRep, NonMultiplicativeFamily) {
  const auto gg = fx::gauge_2_z2();
  UnitaryRep r{{{2, 2}}, {}};
  for (Arrow a : gg.groupoid.arrows()) r.U.push_back(canonical(gg, a));
  EXPECT_TRUE(validate_rep(gg.groupoid, r, 1e-12).passed());
  // flip one pair of mutually inverse arrows by a sign: still unitary, no longer multiplicative
  const Arrow t = gg.arrow(base_at(1), element_at(0), base_at(0));
  r.U[idx(t)] = Complex(-1.0) * r.U[idx(t)];
  r.U[idx(gg.groupoid.inv(t))] = Complex(-1.0) * r.U[idx(gg.groupoid.inv(t))];
  const auto s = validate_rep(gg.groupoid, r, 1e-12);
  EXPECT_TRUE(s.at("inverse").passed);
  EXPECT_FALSE(s.at("multiplicative").passed);
}

TEST(ValidateRep, ShapeErrors) {
  const auto g = fx::pair2();
  auto r = trivial_rep(g);
  r.U.pop_back();
  EXPECT_THROW(validate_rep(g, r, 1e-9), PreconditionError);
  auto q = trivial_rep(g);
  q.bundle.dims[0] = 2;
  EXPECT_THROW(validate_rep(g, q, 1e-9), PreconditionError);
  EXPECT_THROW(regular_isotropy_rep(g), PreconditionError);
  EXPECT_THROW(identity_translation_rep(g, {{1, 2}}), PreconditionError);
}

TEST(Extension, MatchesCanonicalRepThroughJ) {
  Rng rng(14);
  for (const auto& b : {fx::bundle_2_z2(), fx::bundle_3_s3(), FinitePrincipalBundle{2, FiniteGroup::quaternion8()}})
    for (int t = 0; t < 3; ++t) {
      const auto ps = poincare_setup(b, random_section(b, rng));
      const auto U0 = lorentz_regular_rep(ps);
      const auto I = section_translation_rep(ps);
      EXPECT_TRUE(validate_rep(ps.sd.isotropy.groupoid, U0, 1e-12).passed());
      EXPECT_TRUE(validate_rep(ps.sd.translations.groupoid, I, 1e-12).passed());
      EXPECT_TRUE(check_commutation(ps.sd, U0, I, 1e-12).passed);
      const auto U = simple_extension(ps.sd, U0, I, 1e-12);
      EXPECT_TRUE(validate_rep(ps.sd.carrier, U, 1e-12).passed());
      const auto J = J_map(ps.sd);
      for (Arrow c : ps.sd.carrier.arrows()) EXPECT_EQ(U(c), canonical(ps.gauge, J.arrow_map[idx(c)]));
    }
}

TEST(Extension, AnticommutingTranslationsAreRejected) {
  // Z2 gauge, identity section, U₀ = regular on both fibers, translations by
  // diag(1,−1): flip·swap·flip = −swap while α sends (0,a,0) to (1,a,1).
  const auto ps = poincare_setup(fx::bundle_2_z2(), identity_section(fx::bundle_2_z2()));
  const auto& sd = ps.sd;
  const auto U0 = lorentz_regular_rep(ps);
  UnitaryRep I{U0.bundle, {}};
  for (Arrow a : sd.translations.groupoid.arrows())
    I.U.push_back(sd.translations.groupoid.is_loop(a) ? Matrix::identity(2) : kFlip);
  ASSERT_TRUE(validate_rep(sd.translations.groupoid, I, 1e-12).passed());
  // expected deviation from the explicit matrices
  const double expected = max_abs_diff(kFlip * kSwap * kFlip, kSwap);
  EXPECT_DOUBLE_EQ(expected, 2.0);

  const auto c = check_commutation(sd, U0, I, 1e-9);
  EXPECT_FALSE(c.passed);
  EXPECT_DOUBLE_EQ(c.max_deviation, expected);
  ASSERT_EQ(c.witness.size(), 2u);
  EXPECT_EQ(ps.gauge.triple(c.witness[0]).g, element_at(1));
  EXPECT_FALSE(sd.parent.is_loop(c.witness[1]));
  EXPECT_THROW(simple_extension(sd, U0, I, 1e-9), PreconditionError);

  // swap itself commutes with swap, so that family extends
  UnitaryRep S{U0.bundle, {}};
  for (Arrow a : sd.translations.groupoid.arrows())
    S.U.push_back(sd.translations.groupoid.is_loop(a) ? Matrix::identity(2) : kSwap);
  EXPECT_TRUE(check_commutation(sd, U0, S, 1e-12).passed);
  EXPECT_TRUE(validate_rep(sd.carrier, simple_extension(sd, U0, S, 1e-12), 1e-12).passed());
}

TEST(Extension, NonRepresentationTranslationsAreRejected) {
  const auto ps = poincare_setup(fx::bundle_2_z2(), identity_section(fx::bundle_2_z2()));
  const auto U0 = lorentz_regular_rep(ps);
  UnitaryRep I{U0.bundle, std::vector<Matrix>(ps.sd.translations.groupoid.arrow_count(), kSwap)};
  EXPECT_THROW(simple_extension(ps.sd, U0, I, 1e-9), PreconditionError);
}

TEST(Quantize, DeltasGiveTheRepresentation) {
  const auto ps = poincare_setup(fx::bundle_3_s3(), identity_section(fx::bundle_3_s3()));
  const auto U0 = lorentz_regular_rep(ps);
  const auto w = HaarWeights::counting(ps.gauge.groupoid);
  for (Base x : ps.gauge.groupoid.bases())
    for (Arrow l : ps.gauge.groupoid.loops_at(x)) {
      const auto q = quantize(ps.sd, U0, GroupoidFunction::delta(ps.gauge.groupoid.arrow_count(), l), x, w);
      EXPECT_EQ(q, U0(ps.sd.isotropy.local(l)));
    }
  const auto other = GroupoidFunction::delta(ps.gauge.groupoid.arrow_count(), ps.gauge.groupoid.identity(base_at(1)));
  EXPECT_THROW(quantize(ps.sd, U0, other, base_at(0), w), PreconditionError);
}

TEST(Quantize, IsAStarHomomorphism) {
  Rng rng(10);
  const auto ps = poincare_setup(fx::bundle_3_s3(), random_section(fx::bundle_3_s3(), rng));
  const auto& g = ps.gauge.groupoid;
  const auto U0 = lorentz_regular_rep(ps);
  for (const auto& w : {HaarWeights::counting(g), HaarWeights::uniform(g, 0.3)})
    for (int t = 0; t < 10; ++t) {
      const Base x = base_at(rng.below(g.base_count()));
      const auto a1 = random_fiber_function(g, x, rng), a2 = random_fiber_function(g, x, rng);
      EXPECT_LE(max_abs_diff(quantize(ps.sd, U0, fiber_convolve(g, a1, a2, x, w), x, w),
                             quantize(ps.sd, U0, a1, x, w) * quantize(ps.sd, U0, a2, x, w)),
                1e-12);
      GroupoidFunction star = GroupoidFunction::zero(g.arrow_count());
      for (Arrow l : g.loops_at(x)) star[l] = std::conj(a1(g.inv(l)));
      EXPECT_LE(max_abs_diff(quantize(ps.sd, U0, star, x, w), quantize(ps.sd, U0, a1, x, w).adjoint()), 1e-14);
    }
}

TEST(RandomOperator, NormExamples) {
  const auto ps = poincare_setup(fx::bundle_3_s3(), identity_section(fx::bundle_3_s3()));
  const auto& g = ps.gauge.groupoid;
  const auto U0 = lorentz_regular_rep(ps);
  const auto w = HaarWeights::counting(g);
  GroupoidFunction eps = GroupoidFunction::zero(g.arrow_count());
  for (Base x : g.bases()) eps[g.identity(x)] = 1.0;
  EXPECT_NEAR(random_operator_from(ps.sd, U0, eps, w).norm(), 1.0, 1e-9);

  const auto z = poincare_setup({1, FiniteGroup::cyclic(2)}, identity_section({1, FiniteGroup::cyclic(2)}));
  const GroupoidFunction one{{1.0, 1.0}};
  const auto r = random_operator_from(z.sd, lorentz_regular_rep(z), one, HaarWeights::counting(z.gauge.groupoid));
  EXPECT_NEAR(r.norm(), 2.0, 1e-9);
  EXPECT_EQ(r.direct_sum(), Matrix::from_rows({{1.0, 1.0}, {1.0, 1.0}}));

  GroupoidFunction bad = GroupoidFunction::zero(g.arrow_count());
  bad[ps.gauge.arrow(base_at(0), element_at(0), base_at(1))] = 1.0;
  EXPECT_THROW(random_operator_from(ps.sd, U0, bad, w), PreconditionError);
}

TEST(RandomOperator, NormBoundAndSvdOracle) {
  Rng rng(66);
  const auto b = fx::bundle_3_s3();
  const auto ps = poincare_setup(b, random_section(b, rng));
  const auto& g = ps.gauge.groupoid;
  const auto U0 = lorentz_regular_rep(ps);
  const auto w = HaarWeights::counting(g);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_on_isotropy(g, rng);
    const auto r = random_operator_from(ps.sd, U0, a, w);
    const auto rep = random_operator_norm(ps.sd, r, a, w);
    EXPECT_TRUE(rep.bound_holds);
    EXPECT_NEAR(rep.norm, svd_norm(r.direct_sum()), 1e-9);
    for (Base x : g.bases()) {
      EXPECT_NEAR(rep.block_norms[idx(x)], svd_norm(r.blocks[idx(x)]), 1e-9);
      EXPECT_LE(rep.block_norms[idx(x)], rep.bounds[idx(x)] + 1e-12);
    }
  }
}

TEST(Equivariance, HoldsForPoincareReps) {
  Rng rng(23);
  for (const auto& b : {fx::bundle_2_z2(), fx::bundle_3_s3()})
    for (int t = 0; t < 5; ++t) {
      const auto ps = poincare_setup(b, random_section(b, rng));
      const auto U0 = lorentz_regular_rep(ps);
      const auto I = section_translation_rep(ps);
      const auto a = random_on_isotropy(ps.gauge.groupoid, rng);
      const auto s = check_equivariance(ps.sd, a, U0, I, HaarWeights::counting(ps.gauge.groupoid), 1e-12);
      EXPECT_TRUE(s.at("isotropy_rule").passed) << s.at("isotropy_rule").max_deviation;
      EXPECT_TRUE(s.at("translation_rule").passed) << s.at("translation_rule").max_deviation;
    }
}

TEST(Equivariance, AlphaStarIsAPushforward) {
  // (α*_γ a)(α_γ(η)) = a(η)
  Rng rng(2);
  const auto& g = fx::gauge_3_s3().groupoid;
  for (Arrow gamma : g.arrows()) {
    const auto a = random_fiber_function(g, g.src(gamma), rng);
    const auto p = alpha_star(g, gamma, a);
    for (Arrow eta : g.loops_at(g.src(gamma))) EXPECT_EQ(p(alpha(g, gamma, eta)), a(eta));
  }
}

TEST(Equivariance, FailsForAnticommutingTranslations) {
  const auto ps = poincare_setup(fx::bundle_2_z2(), identity_section(fx::bundle_2_z2()));
  const auto U0 = lorentz_regular_rep(ps);
  UnitaryRep I{U0.bundle, {}};
  for (Arrow a : ps.sd.translations.groupoid.arrows())
    I.U.push_back(ps.sd.translations.groupoid.is_loop(a) ? Matrix::identity(2) : kFlip);
  const auto a = GroupoidFunction::delta(ps.gauge.groupoid.arrow_count(),
                                         ps.gauge.arrow(base_at(0), element_at(1), base_at(0)));
  const auto s = check_equivariance(ps.sd, a, U0, I, HaarWeights::counting(ps.gauge.groupoid), 1e-9);
  EXPECT_TRUE(s.at("isotropy_rule").passed);
  EXPECT_FALSE(s.at("translation_rule").passed);
  EXPECT_DOUBLE_EQ(s.at("translation_rule").max_deviation, 2.0);
}

TEST(M0, GeneratorsAndCommutant) {
  const auto ps = poincare_setup(fx::bundle_3_s3(), identity_section(fx::bundle_3_s3()));
  const auto U0 = lorentz_regular_rep(ps);
  const auto all = m0_generators(ps.sd, U0);
  EXPECT_EQ(all.size(), 18u);
  EXPECT_EQ(all.front().rows(), 18u);
  // block diagonal, each block the left regular rep: commutant is ⊕ right regular algebras
  EXPECT_EQ(commutant(all, 1).dimension, 18u);
  const auto one = m0_generators(ps.sd, U0, base_at(1));
  EXPECT_EQ(one.size(), 6u);
  const auto r = commutant(one, 2);
  EXPECT_EQ(r.commutant_dimension, 6u);
  EXPECT_EQ(r.bicommutant_dimension, 6u);
  EXPECT_TRUE(r.passed(1e-9));
  EXPECT_THROW(m0_generators(ps.sd, U0, base_at(3)), PreconditionError);
}
