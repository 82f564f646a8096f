#include "wavegal/refinable.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace wavegal;

namespace {

FilterBank hat() { return FilterBank::scalar(-1, {Q(1, 4), Q(1, 2), Q(1, 4)}); }
FilterBank bspline(int n, int lo = 0) {
  std::vector<Q> t;
  for (int k = 0; k <= n; ++k) t.push_back(binomial(n, k) * qpow2(-n));
  return FilterBank::scalar(lo, t);
}

}  // namespace

TEST(EvalDyadic, HatValues) {
  auto rv = eval_dyadic(hat(), 6);
  EXPECT_DOUBLE_EQ(rv.at(0, 0)(0), 1);
  EXPECT_DOUBLE_EQ(rv.at(1, 0)(0), 0);
  EXPECT_DOUBLE_EQ(rv.at(-1, 0)(0), 0);
  EXPECT_DOUBLE_EQ(rv.at(1, 1)(0), 0.5);
  EXPECT_EQ(rv.support_lo, -1);
  EXPECT_EQ(rv.support_hi, 1);
}

TEST(EvalDyadic, HermiteValues) {
  auto rv = eval_dyadic(hermite_cubic_a(), 8);
  EXPECT_NEAR(rv.at(0, 0)(0), 1, 1e-15);
  EXPECT_NEAR(rv.at(0, 0)(1), 0, 1e-15);
  EXPECT_NEAR(rv.at(1, 1)(1), 1.0 / 8, 1e-14);
  EXPECT_NEAR(rv.at(-1, 1)(1), -1.0 / 8, 1e-14);
  EXPECT_NEAR(rv.at(1, 1)(0), 0.5, 1e-14);
  // matches the closed form everywhere on the grid
  auto cf = closed_form_generator(hermite_cubic_a());
  ASSERT_EQ(cf.size(), 2u);
  double worst = 0;
  for (long n = -256; n <= 256; ++n)
    for (int c = 0; c < 2; ++c) worst = std::max(worst, std::abs(rv.at(n, 8)(c) - cf[c].eval(n / 256.0).re));
  EXPECT_LT(worst, 1e-13);
}

TEST(EvalDyadic, RefinementResidualAllFixtures) {
  std::vector<FilterBank> masks = {hat(), bspline(3), bspline(4, -2), hermite_cubic_a(), haar_pair().a};
  for (const auto& a : masks) {
    auto rv = eval_dyadic(a, 10);
    EXPECT_LT(rv.refinement_residual(), 1e-12);
  }
}

TEST(EvalDyadic, PartitionOfUnity) {
  for (const auto& a : {hat(), bspline(3), hermite_cubic_a(), haar_pair().a}) {
    auto rv = eval_dyadic(a, 8);
    auto v0 = sum_rule_order(a).moments.match[0].to_double();
    double worst = 0;
    for (long x = 0; x < 256; ++x) {
      double s = 0;
      for (int k = -8; k <= 8; ++k) s += (v0 * rv.at(x - 256L * k, 8))(0);
      worst = std::max(worst, std::abs(s - 1));
    }
    EXPECT_LT(worst, 1e-12);
  }
}

TEST(UnitVec, HatIntegralsOnUnitInterval) {
  auto u = unit_vec(hat(), 2);
  EXPECT_EQ(u.dim(), 2);
  EXPECT_EQ(u.mu[0](0, 0), Q(1, 2));
  EXPECT_EQ(u.mu[0](1, 0), Q(1, 2));
  // int_0^1 x (1-x) = 1/6, int_0^1 x * x = 1/3
  EXPECT_EQ(u.mu[1](u.index(0, 0), 0), Q(1, 6));
  EXPECT_EQ(u.mu[1](u.index(1, 0), 0), Q(1, 3));
  EXPECT_EQ(u.deps.rows(), 0);
}

TEST(UnitVec, HalfLineMoments) {
  auto u = unit_vec(hat(), 2);
  EXPECT_EQ(halfline_moment(u, 0, 0)(0, 0), Q(1, 2));
  EXPECT_EQ(halfline_moment(u, 1, 1)(0, 0), Q(1));
  EXPECT_EQ(halfline_moment(u, 2, 0)(0, 0), Q(1));
  EXPECT_EQ(halfline_moment(u, -1, 0)(0, 0), Q(0));
  // int_0^inf x^2 phi(x) = int_0^1 x^2 (1-x) = 1/12
  EXPECT_EQ(halfline_moment(u, 0, 2)(0, 0), Q(1, 12));
}

TEST(GramIntegrals, HatMass) {
  auto g = gram_integrals(hat(), hat(), 0);
  EXPECT_EQ(g.entry(0, 0, 0), Q(2, 3));
  EXPECT_EQ(g.entry(0, 0, 1), Q(1, 6));
  EXPECT_EQ(g.entry(0, 0, -1), Q(1, 6));
  EXPECT_EQ(g.entry(0, 0, 2), Q(0));
}

TEST(GramIntegrals, HatStiffness) {
  auto g = gram_integrals(hat(), hat(), 1);
  EXPECT_EQ(g.entry(0, 0, 0), Q(2));
  EXPECT_EQ(g.entry(0, 0, 1), Q(-1));
}

TEST(GramIntegrals, CdfBiorthogonalityExact) {
  auto p = cdf22_pair();
  auto g = gram_integrals(p.a, p.ta, 0);
  for (int k = -4; k <= 4; ++k) EXPECT_EQ(g.entry(0, 0, k), Q(k == 0 ? 1 : 0)) << "k=" << k;
}

TEST(GramIntegrals, HermiteWaveletSecondDerivativeOrthogonal) {
  auto a = hermite_cubic_a();
  auto b = hermite_cubic_b();
  auto G = gram_integrals(a, a, 2);
  // <psi'', phi''(.-k)> = 32 sum_{n,t} b(n) G(2k + t - n) a(t)^T
  for (int k = -3; k <= 3; ++k) {
    QMatrix s(2, 2);
    for (int n = b.lo(); n <= b.hi(); ++n)
      for (int t = a.lo(); t <= a.hi(); ++t) s += b.tap(n) * G.at(2 * k + t - n) * a.tap(t).transpose();
    EXPECT_TRUE(s.is_zero()) << "k=" << k << " " << s.str();
  }
}

TEST(GramIntegrals, AgreesWithClosedForm) {
  struct Case {
    FilterBank a;
    int max_m;
  };
  std::vector<Case> cases = {{hat(), 1}, {bspline(3), 2}, {bspline(4, -2), 2}, {hermite_cubic_a(), 2}};
  for (const auto& c : cases) {
    auto cf = closed_form_generator(c.a);
    ASSERT_FALSE(cf.empty());
    for (int m = 0; m <= c.max_m; ++m) {
      auto g = gram_integrals(c.a, c.a, m);
      auto ref = closed_form_gram(cf, cf, m, g.kmin() - 1, g.kmax() + 1);
      for (const auto& [k, M] : ref) {
        Eigen::MatrixXd got = g.at(k).to_double();
        EXPECT_LT((got - M).cwiseAbs().maxCoeff(), 1e-12) << "m=" << m << " k=" << k;
      }
    }
  }
}

TEST(GramIntegrals, NotEnoughSumRulesThrows) {
  EXPECT_THROW(gram_integrals(hat(), hat(), 2), std::runtime_error);
}

TEST(GramTable, ConjugateSymmetry) {
  auto g = gram_integrals(hermite_cubic_a(), hermite_cubic_a(), 1);
  for (int k = -2; k <= 2; ++k) EXPECT_EQ(g.at(k), g.at(-k).transpose());
}

TEST(GramTable, CsvHeader) {
  auto g = gram_integrals(hat(), hat(), 0);
  std::string csv = g.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "i,j,k,m,value_num,value_den,value_float");
}

TEST(DerivativeGramSymbol, HatSeries) {
  auto s = derivative_gram_symbol(gram_integrals(hat(), hat(), 0));
  EXPECT_NEAR(s.symbol(0)(0, 0).real(), 1, 1e-15);
  EXPECT_NEAR(s.symbol(M_PI)(0, 0).real(), 1.0 / 3, 1e-15);
}

TEST(DerivativeGramSymbol, HermitianPsd) {
  for (int m = 0; m <= 2; ++m) {
    auto s = derivative_gram_symbol(gram_integrals(hermite_cubic_a(), hermite_cubic_a(), m));
    for (double xi : equispaced(64)) {
      Eigen::MatrixXcd H = s.symbol(xi);
      EXPECT_LT((H - H.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
      EXPECT_GT(es.eigenvalues().minCoeff(), -1e-14);
    }
  }
}

TEST(Stability, HatAndHermite) {
  auto h = stability_check(gram_integrals(hat(), hat(), 0));
  EXPECT_TRUE(h.stable);
  EXPECT_NEAR(h.min_eig, 1.0 / 3, 1e-12);
  EXPECT_TRUE(stability_check(gram_integrals(hermite_cubic_a(), hermite_cubic_a(), 0)).stable);
}

TEST(Stability, RedundantPairUnstable) {
  // (B2, B2(.-1)) stacked: shifts are linearly dependent
  auto g = gram_integrals(hat(), hat(), 0);
  GramTable t;
  t.r = t.rt = 2;
  for (int k = -3; k <= 3; ++k) {
    QMatrix m(2, 2);
    m(0, 0) = g.entry(0, 0, k);
    m(0, 1) = g.entry(0, 0, k + 1);
    m(1, 0) = g.entry(0, 0, k - 1);
    m(1, 1) = g.entry(0, 0, k);
    t.entries[k] = m;
  }
  auto rep = stability_check(t);
  EXPECT_FALSE(rep.stable);
  EXPECT_NEAR(rep.min_eig, 0, 1e-12);
}

TEST(RieszBounds, SmallCases) {
  auto b = riesz_bound_estimate(Eigen::MatrixXd::Identity(5, 5));
  EXPECT_DOUBLE_EQ(b.ratio(), 1);
  Eigen::MatrixXd g(2, 2);
  g << 1, 0.5, 0.5, 1;
  auto c = riesz_bound_estimate(g);
  EXPECT_NEAR(c.lower, 0.5, 1e-15);
  EXPECT_NEAR(c.upper, 1.5, 1e-15);
  EXPECT_NEAR(c.ratio(), 3, 1e-14);
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  EXPECT_THROW(riesz_bound_estimate(bad), std::runtime_error);
}
