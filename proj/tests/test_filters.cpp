#include "wavegal/filters.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace wavegal;

namespace {

// Piecewise cubic on [-1,0] and [0,1], ascending coefficients in x.
struct Cubic2 {
  std::vector<Q> left, right;
};

std::vector<Q> deriv(std::vector<Q> p, int m) {
  for (int d = 0; d < m; ++d) {
    std::vector<Q> q;
    for (size_t i = 1; i < p.size(); ++i) q.push_back(p[i] * Q(int(i)));
    p = q;
  }
  return p;
}

// p(x) -> p(x - s)
std::vector<Q> shift(const std::vector<Q>& p, int s) {
  std::vector<Q> out(p.size(), Q(0));
  for (size_t i = 0; i < p.size(); ++i) {
    Q sp = 1;
    for (size_t t = 0; t <= i; ++t) {
      // term x^{i-t} (-s)^t
      out[i - t] += p[i] * binomial(int(i), int(t)) * sp;
      sp *= Q(-s);
    }
  }
  return out;
}

Q integrate(const std::vector<Q>& p, const std::vector<Q>& q, Q a, Q b) {
  std::vector<Q> r(p.size() + q.size(), Q(0));
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  Q s = 0;
  for (size_t i = 0; i < r.size(); ++i) {
    Q bi = 1, ai = 1;
    for (size_t t = 0; t <= i; ++t) {
      bi *= b;
      ai *= a;
    }
    s += r[i] * (bi - ai) / Q(int(i + 1));
  }
  return s;
}

// <f_i^(m), f_j^(m)(. - k)> for the Hermite cubics.
FilterBank hermite_gram(int m) {
  std::vector<Cubic2> h = {{{1, 0, -3, -2}, {1, 0, -3, 2}}, {{0, 1, 2, 1}, {0, 1, -2, 1}}};
  std::vector<QMatrix> taps;
  for (int k = -1; k <= 1; ++k) {
    QMatrix g(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        // unit pieces [-1,0],[0,1] of f_i and [k-1,k],[k,k+1] of f_j(.-k)
        for (int pi = 0; pi < 2; ++pi)
          for (int pj = 0; pj < 2; ++pj) {
            int a = pi - 1, c = k + pj - 1;
            if (a != c) continue;
            auto fi = deriv(pi ? h[i].right : h[i].left, m);
            auto fj = deriv(shift(pj ? h[j].right : h[j].left, k), m);
            g(i, j) += integrate(fi, fj, Q(a), Q(a + 1));
          }
      }
    taps.push_back(g);
  }
  return FilterBank(2, 2, -1, taps);
}

FilterBank hat() { return FilterBank::scalar(-1, {Q(1, 4), Q(1, 2), Q(1, 4)}); }

}  // namespace

TEST(Symbol, HatAtZeroAndPi) {
  EXPECT_NEAR(std::abs(symbol_eval(hat(), 0)(0, 0) - 1.0), 0, 1e-15);
  EXPECT_NEAR(std::abs(symbol_eval(hat(), M_PI)(0, 0)), 0, 1e-15);
}

TEST(Symbol, HermiteAtZero) {
  EXPECT_EQ(hermite_cubic_a().sum(), QMatrix(2, 2, {1, 0, 0, Q(1, 8)}));
  auto s = symbol_eval(hermite_cubic_a(), 0);
  EXPECT_NEAR(std::abs(s(1, 1) - 0.125), 0, 1e-15);
}

TEST(Symbol, Periodic) {
  for (const auto& f : {hat(), hermite_cubic_a(), cdf22_pair().tb})
    for (double xi : equispaced(17))
      EXPECT_LT((f.symbol(xi + 2 * M_PI) - f.symbol(xi)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Eigen, Conditions) {
  EXPECT_TRUE(check_eigenvalue_conditions(hermite_cubic_a()).passed());
  EXPECT_TRUE(check_eigenvalue_conditions(hat()).passed());
  FilterBank id(2, 2, 0, {QMatrix::identity(2)});
  EXPECT_FALSE(check_eigenvalue_conditions(id).one_simple);
  FilterBank two = FilterBank::scalar(0, {Q(2)});
  EXPECT_FALSE(check_eigenvalue_conditions(two).passed());
}

TEST(PerfectReconstruction, CdfExact) {
  auto r = check_perfect_reconstruction(cdf22_pair(), equispaced(64));
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.exact);
  EXPECT_LT(r.max_residual, 1e-14);
}

TEST(PerfectReconstruction, PerturbedFails) {
  auto p = cdf22_pair();
  p.b.set_tap(0, p.b.tap(0) + QMatrix(1, 1, {Q(1, 1000)}));
  auto r = check_perfect_reconstruction(p, equispaced(64));
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.exact);
}

TEST(PerfectReconstruction, Haar) { EXPECT_TRUE(check_perfect_reconstruction(haar_pair(), equispaced(64)).ok); }

TEST(PerfectReconstruction, DimensionMismatch) {
  auto p = cdf22_pair();
  p.b = hermite_cubic_b();
  EXPECT_THROW(check_perfect_reconstruction(p, equispaced(4)), std::invalid_argument);
}

TEST(SumRules, Fixtures) {
  EXPECT_EQ(sum_rule_order(hat()).order, 2);
  EXPECT_EQ(sum_rule_order(hermite_cubic_a()).order, 4);
  EXPECT_EQ(sum_rule_order(cdf22_pair().ta).order, 2);
  EXPECT_EQ(sum_rule_order(haar_pair().a).order, 1);
}

TEST(SumRules, SplineLiftAddsOne) {
  FilterBank half = FilterBank::scalar(0, {Q(1, 2), Q(1, 2)});
  FilterBank f = haar_pair().a;
  for (int d = 1; d <= 5; ++d) {
    EXPECT_EQ(sum_rule_order(f).order, d);
    f = f * half;
  }
  EXPECT_EQ(sum_rule_order(cdf22_pair().ta * half).order, 3);
}

TEST(SumRules, MatchingNormalization) {
  for (const auto& a : {hat(), hermite_cubic_a(), cdf22_pair().ta}) {
    auto md = refinable_moments(a, 4);
    EXPECT_EQ(md.match[0] * md.phi[0], QMatrix(1, 1, {1}));
  }
}

TEST(Moments, HatAndHermite) {
  auto md = refinable_moments(hat(), 3);
  EXPECT_EQ(md.phi[0](0, 0), 1);
  EXPECT_EQ(md.phi[1](0, 0), 0);
  // second moment of the hat: 2 * int_0^1 x^2 (1 - x) = 1/6
  EXPECT_EQ(md.phi[2](0, 0), Q(1, 6));
  auto mh = refinable_moments(hermite_cubic_a(), 3);
  EXPECT_EQ(mh.phi[0], QMatrix(2, 1, {1, 0}));
  // int x h1(x) = 2 * int_0^1 x^2 (1-x)^2 = 1/15
  EXPECT_EQ(mh.phi[1](1, 0), Q(1, 15));
}

TEST(Moments, PolynomialReproductionCoefficients) {
  // hat reproduces x: coefficients c_1(k) = k
  auto md = refinable_moments(hat(), 3);
  for (int k = -3; k <= 3; ++k) EXPECT_EQ(md.poly_coeff(1, Q(k))(0, 0), Q(k));
}

TEST(VanishingMoments, Fixtures) {
  auto p = cdf22_pair();
  EXPECT_EQ(vanishing_moment_order(p.b, refinable_moments(p.a, 6)), 2);
  EXPECT_EQ(vanishing_moment_order(p.tb, refinable_moments(p.ta, 6)), 2);
  EXPECT_EQ(vanishing_moment_order(hermite_cubic_b(), refinable_moments(hermite_cubic_a(), 6)), 0);
}

TEST(DerivativeOrthogonality, Hermite) {
  auto g2 = hermite_gram(2);
  auto r = check_derivative_orthogonality(hermite_cubic_a(), hermite_cubic_b(), 2, g2);
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.det_certified);
  EXPECT_LT(r.max_residual, 1e-13);
  auto g0 = hermite_gram(0);
  EXPECT_FALSE(check_derivative_orthogonality(hermite_cubic_a(), hermite_cubic_b(), 0, g0).ok());
}

TEST(DerivativeOrthogonality, PerturbedTapFails) {
  // Even taps put mass on phi(2.-2n), which is not derivative orthogonal.
  auto g2 = hermite_gram(2);
  for (int k : {-2, 0, 2, 4})
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        FilterBank b = hermite_cubic_b();
        QMatrix t = b.tap(k);
        t(i, j) += Q(1, 1000000);
        b.set_tap(k, t);
        EXPECT_FALSE(check_derivative_orthogonality(hermite_cubic_a(), b, 2, g2).ok()) << k << " " << i << j;
      }
}

TEST(DerivativeOrthogonality, TapOneIsFree) {
  // phi(2.-1) vanishes with its derivative at the integers, so any b supported on odd taps passes
  auto g2 = hermite_gram(2);
  FilterBank b = hermite_cubic_b();
  QMatrix t = b.tap(1);
  t(0, 1) += Q(1, 1000000);
  b.set_tap(1, t);
  EXPECT_TRUE(check_derivative_orthogonality(hermite_cubic_a(), b, 2, g2).ok());
}

TEST(DerivativeOrthogonality, ExistenceNeedsSumRules) {
  // a b with m-th order derivative orthogonality needs sr(a) >= 2m
  EXPECT_GE(sum_rule_order(hat()).order, 2 * 1);
  EXPECT_GE(sum_rule_order(hermite_cubic_a()).order, 2 * 2);
}

TEST(Laurent, UnitCircleRoot) {
  Laurent p{0, {Q(1), Q(1)}};  // 1 + z has root -1
  EXPECT_TRUE(has_unimodular_root_candidate(p));
  Laurent q{0, {Q(2), Q(1)}};
  EXPECT_FALSE(has_unimodular_root_candidate(q));
}

TEST(Json, RoundTrip) {
  for (const auto& f : {hat(), hermite_cubic_a(), cdf22_pair().b}) EXPECT_EQ(FilterBank::from_json(f.to_json()), f);
  auto bad = hat().to_json();
  bad["support"] = {-2, 1};
  EXPECT_THROW(FilterBank::from_json(bad), std::invalid_argument);
}

TEST(Json, ShippedFixtures) {
  auto p = load_pair_file(std::string(WAVEGAL_DATA_DIR) + "/filters/cdf22.json");
  EXPECT_EQ(p.a, cdf22_pair().a);
  EXPECT_EQ(p.tb, cdf22_pair().tb);
  auto h = load_pair_file(std::string(WAVEGAL_DATA_DIR) + "/filters/hermite_cubic.json");
  EXPECT_EQ(h.a, hermite_cubic_a());
  EXPECT_EQ(h.b, hermite_cubic_b());
  auto hr = load_pair_file(std::string(WAVEGAL_DATA_DIR) + "/filters/haar.json");
  EXPECT_EQ(hr.a, haar_pair().a);
}
