#include "wavegal/assembly.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace wavegal;

namespace {

const BasisSpec& dirichlet() {
  static BasisSpec s = load_basis_spec(std::string(WAVEGAL_DATA_DIR) + "/specs/cdf22_dirichlet.json");
  return s;
}

const IntervalBasis& cdf(int N) {
  static std::map<int, IntervalBasis> cache;
  auto it = cache.find(N);
  if (it == cache.end()) it = cache.emplace(N, IntervalBasis::build(dirichlet(), 2, N)).first;
  return it->second;
}

using PF = PiecewiseForm<double>;

PF hat_at(int N, int k) { return generator_forms<double>(cdf22_pair().a)[0].affine(qpow2(N), Q(k)); }

PF diff(PF f, int m) {
  for (int i = 0; i < m; ++i) f = f.derivative();
  return f;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Conditioning, TrivialMatrices) {
  EXPECT_DOUBLE_EQ(condition_number(Eigen::MatrixXd(Eigen::MatrixXd::Identity(3, 3))).kappa, 1.0);
  Eigen::MatrixXd d(2, 2);
  d << 4, 0, 0, 1;
  EXPECT_NEAR(condition_number(d).kappa, 4.0, 1e-14);
  Eigen::MatrixXd s(2, 2);
  s << 1, 1, 1, 1;
  EXPECT_TRUE(condition_number(s).singular());
  // nonsymmetric goes through the SVD
  Eigen::MatrixXd u(2, 2);
  u << 1, 1, 0, 1;
  auto r = condition_number(u);
  EXPECT_EQ(r.method, "svd");
  EXPECT_NEAR(r.kappa, (3 + std::sqrt(5.0)) / 2, 1e-12);
}

TEST(Conditioning, SchurComplement) {
  Eigen::MatrixXcd a(2, 2);
  a << 2, 1, 1, 1;
  auto r = schur_condition(a, 1);
  EXPECT_NEAR(r.kappa_star, 1.0, 1e-14);
  EXPECT_NEAR(r.kappa_a4, 1.0, 1e-14);

  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(3, 3);
  b(0, 0) = 5;
  b(1, 1) = 1;
  b(2, 2) = 7;
  b(0, 1) = b(1, 0) = std::complex<double>(0, 1);
  auto rb = schur_condition(b, 1);
  EXPECT_NEAR(rb.kappa_star, condition_number(Eigen::MatrixXcd(b.topLeftCorner(2, 2))).kappa, 1e-12);

  Eigen::MatrixXcd c = Eigen::MatrixXcd::Identity(3, 3);
  c(2, 2) = 0;
  EXPECT_THROW(schur_condition(c, 1), std::runtime_error);
}

TEST(Conditioning, DiagonalPreconditioner) {
  GalerkinSystem<double> s(2);
  s(0, 0) = 4;
  s(1, 1) = 9;
  s.rhs = {Cx<double>(2), Cx<double>(3)};
  apply_diagonal_preconditioner(s);
  EXPECT_NEAR(abs(s(0, 0) - Cx<double>(1)), 0, 1e-15);
  EXPECT_NEAR(abs(s(1, 1) - Cx<double>(1)), 0, 1e-15);
  EXPECT_TRUE(s(0, 1).is_zero());
  // solution recovered in the original unknowns
  auto x = solve_dense(s);
  EXPECT_NEAR(x[0].re, 0.5, 1e-15);
  EXPECT_NEAR(x[1].re, 1.0 / 3, 1e-15);

  Eigen::MatrixXd h(3, 3);
  h << 4, 1, 0.5, 1, 3, -1, 0.5, -1, 2;
  Eigen::MatrixXd p = apply_diagonal_preconditioner(h);
  EXPECT_LT((p - p.transpose()).norm(), 1e-15);
  EXPECT_NEAR(p.diagonal().cwiseAbs().minCoeff(), 1.0, 1e-15);

  GalerkinSystem<double> z(1);
  EXPECT_THROW(apply_diagonal_preconditioner(z), std::runtime_error);
}

TEST(SolveDense, MatchesEigenAndExtended) {
  Eigen::MatrixXcd a(3, 3);
  a << std::complex<double>(1, 2), 3, -1, 0, std::complex<double>(0, -1), 2, 4, 1, std::complex<double>(2, 2);
  Eigen::VectorXcd b(3);
  b << 1, std::complex<double>(0, 1), -2;
  Eigen::VectorXcd want = a.fullPivLu().solve(b);
  GalerkinSystem<double> s(3);
  GalerkinSystem<Mp> sm(3);
  set_mp_digits(40);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      s(i, j) = Cx<double>(a(i, j).real(), a(i, j).imag());
      sm(i, j) = Cx<Mp>(Mp(a(i, j).real()), Mp(a(i, j).imag()));
    }
    s.rhs[size_t(i)] = Cx<double>(b(i).real(), b(i).imag());
    sm.rhs[size_t(i)] = Cx<Mp>(Mp(b(i).real()), Mp(b(i).imag()));
  }
  auto x = solve_dense(s);
  auto xm = solve_dense(sm);
  for (int i = 0; i < 3; ++i) {
    EXPECT_LT(std::abs(to_std(x[size_t(i)]) - want(i)), 1e-13);
    EXPECT_LT(std::abs(to_std(xm[size_t(i)]) - want(i)), 1e-13);
  }
  GalerkinSystem<double> sing(2);
  sing(0, 0) = sing(0, 1) = sing(1, 0) = sing(1, 1) = 1;
  EXPECT_THROW(solve_dense(sing), std::runtime_error);
}

TEST(LoadVector, HatIntegralsAndZero) {
  int N = 5;
  std::vector<PF> hats;
  for (int k = 1; k < 32; ++k) hats.push_back(hat_at(N, k));
  PF one = PF::polynomial(Q(0), Q(1), {Cx<double>(1)});
  auto b = load_vector(hats, one);
  for (const auto& v : b) EXPECT_NEAR(v.re, std::ldexp(1.0, -N), 1e-15);
  auto z = load_vector(hats, PF());
  for (const auto& v : z) EXPECT_TRUE(v.is_zero());
}

TEST(LoadVector, ExactMatchesGaussOnPolynomials) {
  auto forms = element_forms<double>(cdf(5));
  // degree 9 after multiplication with the piecewise linear elements
  PF f = PF::polynomial(Q(0), Q(1, 3), {Cx<double>(1), Cx<double>(-2), Cx<double>(0.5), Cx<double>(3)});
  f.append(PF::polynomial(Q(1, 3), Q(1), {Cx<double>(0, 1), Cx<double>(0), Cx<double>(0), Cx<double>(0), Cx<double>(0),
                                           Cx<double>(0), Cx<double>(0), Cx<double>(0), Cx<double>(-1)}));
  auto e = load_vector(forms, f, LoadPolicy::Exact);
  auto g = load_vector(forms, f, LoadPolicy::Gauss10);
  for (size_t i = 0; i < e.size(); ++i) EXPECT_LT(abs(e[i] - g[i]), 1e-10) << i;
}

TEST(LoadVector, OscillatoryExactAtHighFrequency) {
  // e^{ikx} against the hat phi(2^N x - k0) has a closed form
  int N = 4, k0 = 3;
  double w = 2e5;
  PF hat = hat_at(N, k0);
  PF f = PF::poly_exp(Q(0), Q(1), {Cx<double>(1)}, w);
  auto b = load_vector(std::vector<PF>{hat}, f);
  double h = std::ldexp(1.0, -N), c = k0 * h;
  // int hat(x) e^{iwx} = e^{iwc} h (sin(wh/2)/(wh/2))^2
  double s = std::sin(w * h / 2) / (w * h / 2);
  std::complex<double> want = std::exp(std::complex<double>(0, w * c)) * h * s * s;
  EXPECT_LT(std::abs(to_std(b[0]) - want), 1e-12 * h);
}

TEST(Gram, SingleNormalizedElement) {
  auto g = gram_matrix(fem_hats(1), 0, Normalization::UnitL2);
  ASSERT_EQ(g.size(), 1);
  EXPECT_NEAR(g.matrix.coeff(0, 0), 1.0, 1e-15);
}

TEST(Gram, FemHatEntries) {
  // unnormalized hat Gram at level N: mass h(2/3, 1/6), stiffness (2, -1)/h
  int N = 4;
  double h = std::ldexp(1.0, -N);
  auto m = gram_matrix(fem_hats(N), 0, Normalization::None).matrix;
  auto k = gram_matrix(fem_hats(N), 1, Normalization::None).matrix;
  EXPECT_NEAR(m.coeff(3, 3), 2 * h / 3, 1e-15);
  EXPECT_NEAR(m.coeff(3, 4), h / 6, 1e-15);
  EXPECT_NEAR(m.coeff(3, 5), 0, 0);
  EXPECT_NEAR(k.coeff(0, 0), 2 / h, 1e-12);
  EXPECT_NEAR(k.coeff(0, 1), -1 / h, 1e-12);
}

TEST(Gram, MatchesPiecewiseIntegration) {
  const IntervalBasis& b = cdf(5);
  auto forms = element_forms<double>(b);
  for (int m = 0; m <= 1; ++m) {
    auto g = gram_matrix(expand(b), m, Normalization::None).matrix;
    Eigen::MatrixXd dense(g);
    double worst = 0;
    for (int i = 0; i < b.size(); ++i)
      for (int j = 0; j < b.size(); ++j) {
        double want = inner(diff(forms[size_t(i)], m), diff(forms[size_t(j)], m)).re;
        worst = std::max(worst, std::abs(dense(i, j) - want) / std::max(1.0, std::abs(want)));
      }
    EXPECT_LT(worst, 1e-12) << "m=" << m;
  }
}

TEST(Gram, HermitianAndPositiveDefinite) {
  Eigen::SparseMatrix<double> S = expand(cdf(7)).S;
  for (int m = 0; m <= 1; ++m) {
    // product without the final symmetrization
    Eigen::SparseMatrix<double> raw = S * coordinate_gram(expand(cdf(7)), m) * Eigen::SparseMatrix<double>(S.transpose());
    Eigen::MatrixXd d(raw);
    EXPECT_LT((d - d.transpose()).cwiseAbs().maxCoeff(), 1e-14 * d.cwiseAbs().maxCoeff());
  }
  auto mass = mass_matrix(cdf(7), Normalization::UnitL2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(mass.matrix)};
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  for (int i = 0; i < mass.size(); ++i) EXPECT_NEAR(mass.matrix.coeff(i, i), 1.0, 1e-14);
}

TEST(Gram, FingerBandwidthWithinLevel) {
  auto run = [](int N) {
    const IntervalBasis& b = cdf(N);
    auto g = mass_matrix(b, Normalization::UnitL2).matrix;
    std::map<int, int> band;  // level -> max |shift difference| among nonzero wavelet pairs
    for (int c = 0; c < g.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(g, c); it; ++it) {
        const auto& e1 = b.elements()[size_t(it.row())];
        const auto& e2 = b.elements()[size_t(it.col())];
        if (e1.role != ElementRole::Wavelet || e2.role != ElementRole::Wavelet || e1.level != e2.level) continue;
        if (std::abs(it.value()) < 1e-15) continue;
        band[e1.level] = std::max(band[e1.level], std::abs(int(it.row()) - int(it.col())));
      }
    return band;
  };
  auto band = run(9);
  int widest = 0;
  for (auto [lvl, w] : band) widest = std::max(widest, w);
  EXPECT_LE(widest, 6);
  EXPECT_EQ(band.rbegin()->second, band[5]);
}

TEST(Gram, HermiteStiffnessIsIdentity) {
  for (int N : {3, 6}) {
    IntervalBasis h = IntervalBasis::hermite_biharmonic(N);
    auto s = stiffness_matrix(h, 2, Normalization::UnitSeminorm);
    EXPECT_EQ(s.size(), (1 << (N + 2)) - 2);
    Eigen::MatrixXd d(s.matrix);
    EXPECT_LT((d - Eigen::MatrixXd::Identity(d.rows(), d.cols())).cwiseAbs().rowwise().sum().maxCoeff(), 1e-12);
  }
}

TEST(Gram, HermiteInterLevelExactlyZero) {
  IntervalBasis h = IntervalBasis::hermite_biharmonic(3);
  auto u = unit_vec(hermite_cubic_a(), 4);
  CrossGram g(u, u, 2);
  const auto& els = h.elements();
  int checked = 0;
  for (size_t i = 0; i < els.size(); ++i)
    for (size_t j = 0; j < els.size(); ++j) {
      if (i == j) {
        EXPECT_GT(g.inner(els[i].combo, els[j].combo, 1), 0);
        continue;
      }
      EXPECT_EQ(g.inner(els[i].combo, els[j].combo, 1), Q(0)) << i << "," << j;
      ++checked;
    }
  EXPECT_EQ(checked, 30 * 29);
}

TEST(TableOne, FemMassConvergesUpwardToThree) {
  double prev = 0;
  for (int N = 8; N <= 13; ++N) {
    double k = condition_number(gram_matrix(fem_hats(N), 0, Normalization::UnitL2).matrix).kappa;
    EXPECT_GT(k, prev - 1e-4) << N;
    EXPECT_LT(k, 3.0 + 1e-9);
    prev = k;
  }
  EXPECT_NEAR(prev, 3.0, 5e-4);
}

TEST(TableOne, SmallRows) {
  EXPECT_LT(rel(condition_number(gram_matrix(fem_hats(11), 1, Normalization::UnitSeminorm).matrix).kappa, 1.6999e6), 5e-3);
  EXPECT_LT(rel(condition_number(mass_matrix(cdf(12), Normalization::UnitL2).matrix).kappa, 19.2825), 5e-3);
}

TEST(Lanczos, AgreesWithDense) {
  auto m = mass_matrix(cdf(10), Normalization::UnitL2).matrix;
  auto k = stiffness_matrix(cdf(10), 1, Normalization::UnitSeminorm).matrix;
  for (const auto* a : {&m, &k}) {
    auto dense = condition_number(*a, 1 << 20);
    auto sparse = condition_number(*a, 0);
    EXPECT_EQ(dense.method, "eig");
    EXPECT_NE(sparse.method, "eig");
    EXPECT_LT(rel(sparse.kappa, dense.kappa), 1e-8);
  }
  // clustered spectrum ends need the inertia bisection
  auto f = gram_matrix(fem_hats(10), 0, Normalization::UnitL2).matrix;
  auto e = extreme_eigenvalues(f);
  auto d = condition_number(f, 1 << 20);
  EXPECT_LT(rel(e.lmax / e.lmin, d.kappa), 1e-8);
}

TEST(Export, MatrixMarketAndCsv) {
  Eigen::SparseMatrix<double> a(2, 2);
  a.insert(0, 0) = 1.5;
  a.insert(1, 0) = -2;
  std::ostringstream os;
  write_matrix_market(os, a);
  EXPECT_EQ(os.str(), "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.5\n2 1 -2\n");
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(1, 2);
  c(0, 1) = std::complex<double>(1, -1);
  std::ostringstream oc;
  write_matrix_market(oc, c);
  EXPECT_EQ(oc.str(), "%%MatrixMarket matrix coordinate complex general\n1 2 1\n1 2 1 -1\n");

  EXPECT_EQ(conditioning_csv_header(), "basis,N,size,normalization,kappa,kappa_star,method");
  ConditioningReport r;
  r.kappa = 3;
  r.size = 7;
  r.method = "eig";
  EXPECT_EQ(conditioning_csv_row("fem", 3, Normalization::UnitL2, r), "fem,3,7,unit_l2,3,,eig");
  EXPECT_EQ(parse_normalization("h1"), Normalization::UnitSeminorm);
  EXPECT_THROW(parse_normalization("bogus"), std::invalid_argument);
}
