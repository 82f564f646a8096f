#include "wavegal/refinable.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wavegal {

Eigen::VectorXd RefinableVector::at(long num, int lvl) const {
  if (lvl > level) throw std::invalid_argument("RefinableVector::at: level above sampled level");
  long i = num * (1L << (level - lvl)) - long(lo) * (1L << level);
  long last = long(hi - lo) << level;
  if (i < 0 || i >= last) return Eigen::VectorXd::Zero(components());
  return values[size_t(i)];
}

double RefinableVector::refinement_residual() const {
  std::vector<Eigen::MatrixXd> taps;
  for (int k = a.lo(); k <= a.hi(); ++k) taps.push_back(a.tap(k).to_double());
  double worst = 0;
  long n = long(values.size());
  for (long i = 0; i < n; ++i) {
    long num = long(lo) * (1L << level) + i;  // x = num / 2^level
    Eigen::VectorXd s = Eigen::VectorXd::Zero(components());
    for (int k = a.lo(); k <= a.hi(); ++k)
      s += 2 * taps[size_t(k - a.lo())] * at(2 * num - long(k) * (1L << level), level);
    worst = std::max(worst, (s - values[size_t(i)]).cwiseAbs().maxCoeff());
  }
  return worst;
}

RefinableVector eval_dyadic(const FilterBank& a, int level) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eval_dyadic: mask must be square");
  if (level < 0 || level > 20) throw std::invalid_argument("eval_dyadic: level out of range");
  int r = a.rows(), l = a.lo(), h = a.hi();
  int nn = h - l;  // nodes l..h-1, phi(h) = 0
  QMatrix T(nn * r, nn * r);
  for (int n = l; n < h; ++n)
    for (int m = l; m < h; ++m) T.set_block((n - l) * r, (m - l) * r, a.tap(2 * n - m) * Q(2));
  QMatrix ns = nullspace(T - QMatrix::identity(nn * r));
  if (ns.cols() != 1)
    throw std::runtime_error("eval_dyadic: eigenvalue 1 of the integer evaluation matrix is not simple");
  SumRuleResult sr = sum_rule_order(a);
  const QMatrix& v0 = sr.moments.match.at(0);
  Q s = 0;
  for (int n = 0; n < nn; ++n) s += (v0 * ns.block(n * r, 0, r, 1))(0, 0);
  if (s == 0) throw std::runtime_error("eval_dyadic: integer values cannot be normalized");
  ns = ns * (1 / s);

  RefinableVector rv;
  rv.a = a;
  rv.lo = l;
  rv.hi = h;
  rv.level = level;
  std::vector<Eigen::VectorXd> cur(size_t(nn) + 1, Eigen::VectorXd::Zero(r));
  for (int n = 0; n < nn; ++n) cur[size_t(n)] = ns.block(n * r, 0, r, 1).to_double();
  std::vector<Eigen::MatrixXd> taps;
  for (int k = l; k <= h; ++k) taps.push_back(a.tap(k).to_double());
  for (int s0 = 0; s0 < level; ++s0) {
    long len = long(nn) << s0;  // last index at level s0
    std::vector<Eigen::VectorXd> nxt(size_t(2 * len) + 1, Eigen::VectorXd::Zero(r));
    for (long i = 0; i <= 2 * len; ++i) {
      // 2x - k at level s0 has index (l - k) 2^s0 + i
      Eigen::VectorXd v = Eigen::VectorXd::Zero(r);
      for (int k = l; k <= h; ++k) {
        long idx = long(l - k) * (1L << s0) + i;
        if (idx < 0 || idx >= len) continue;
        v += 2 * taps[size_t(k - l)] * cur[size_t(idx)];
      }
      nxt[size_t(i)] = v;
    }
    cur = std::move(nxt);
  }
  rv.values = std::move(cur);
  long first = -1, last = -1;
  for (long i = 0; i < long(rv.values.size()); ++i)
    if (rv.values[size_t(i)].cwiseAbs().maxCoeff() > 1e-12) {
      if (first < 0) first = i;
      last = i;
    }
  if (first < 0) throw std::runtime_error("eval_dyadic: generator vanishes");
  rv.support_lo = l + int(std::floor(double(first) / double(1L << level)));
  rv.support_hi = l + int(std::floor(double(last) / double(1L << level))) + 1;
  return rv;
}

QMatrix UnitVec::poly_row(int p) const {
  if (p >= sr) throw std::invalid_argument("poly_row: degree not reproduced");
  QMatrix w(1, dim());
  for (int j = jlo; j <= jhi; ++j) w.set_block(0, index(j, 0), moments.poly_coeff(p, Q(j)));
  return w;
}

UnitVec unit_vec(const FilterBank& a, int moments_up_to) {
  if (a.rows() != a.cols()) throw std::invalid_argument("unit_vec: mask must be square");
  UnitVec u;
  u.a = a;
  u.r = a.rows();
  u.jlo = 1 - a.hi();
  u.jhi = -a.lo();
  int d = u.dim(), r = u.r;
  u.A0 = QMatrix(d, d);
  u.A1 = QMatrix(d, d);
  for (int j = u.jlo; j <= u.jhi; ++j)
    for (int k = u.jlo; k <= u.jhi; ++k) {
      u.A0.set_block(u.index(j, 0), u.index(k, 0), a.tap(k - 2 * j));
      u.A1.set_block(u.index(j, 0), u.index(k, 0), a.tap(k + 1 - 2 * j));
    }
  SumRuleResult sr = sum_rule_order(a);
  u.moments = sr.moments;
  u.sr = sr.order;
  QMatrix S = u.A0 + u.A1;

  // mu_0: fixed vector of A0 + A1 whose blocks sum to phi-hat(0)
  QMatrix sys = QMatrix::vstack(S - QMatrix::identity(d), QMatrix(r, d));
  for (int j = u.jlo; j <= u.jhi; ++j)
    for (int c = 0; c < r; ++c) sys(d + c, u.index(j, c)) = 1;
  QMatrix rhs(d + r, 1);
  for (int c = 0; c < r; ++c) rhs(d + c, 0) = u.moments.phi[0](c, 0);
  auto s0 = solve_linear(sys, rhs);
  if (!s0 || !s0->unique()) throw std::runtime_error("unit_vec: integral of vec phi over [0,1] is not determined");
  u.mu.push_back(s0->particular);

  // span of the values of vec phi: smallest A0, A1 invariant subspace containing mu_0
  QMatrix W = u.mu[0];
  std::vector<QMatrix> frontier{u.mu[0]};
  while (!frontier.empty()) {
    std::vector<QMatrix> next;
    for (const auto& v : frontier)
      for (const QMatrix* A : {&u.A0, &u.A1}) {
        QMatrix w = (*A) * v;
        QMatrix trial = QMatrix::hstack(W, w);
        if (rank(trial) > W.cols()) {
          W = trial;
          next.push_back(w);
        }
      }
    frontier = std::move(next);
  }
  u.deps = left_nullspace(W);

  for (int p = 1; p <= moments_up_to; ++p) {
    QMatrix rhs2(d, 1);
    for (int j = 0; j < p; ++j) rhs2 += u.mu[size_t(j)] * binomial(p, j);
    rhs2 = u.A1 * rhs2 * qpow2(-p);
    QMatrix lhs = QMatrix::identity(d) - S * qpow2(-p);
    if (u.deps.rows() > 0) {
      lhs = QMatrix::vstack(lhs, u.deps);
      rhs2 = QMatrix::vstack(rhs2, QMatrix(u.deps.rows(), 1));
    }
    auto sp = solve_linear(lhs, rhs2);
    if (!sp || !sp->unique()) throw std::runtime_error("unit_vec: moment system on [0,1] is singular");
    u.mu.push_back(sp->particular);
  }
  return u;
}

QMatrix halfline_moment(const UnitVec& u, int k, int p) {
  if (p >= int(u.mu.size())) throw std::invalid_argument("halfline_moment: moment order not computed");
  QMatrix s(u.r, 1);
  for (int j = u.jlo; j <= std::min(u.jhi, k); ++j) {
    Q t = k - j;
    for (int i = 0; i <= p; ++i) {
      Q tp = 1;
      for (int e = 0; e < p - i; ++e) tp *= t;
      s += u.mu[size_t(i)].block(u.index(j, 0), 0, u.r, 1) * (binomial(p, i) * tp);
    }
  }
  return s;
}

QMatrix GramTable::at(int k) const {
  auto it = entries.find(k);
  if (it == entries.end()) return QMatrix(r, rt);
  return it->second;
}

std::string GramTable::to_csv() const {
  std::ostringstream os;
  os << "i,j,k,m,value_num,value_den,value_float\n";
  for (const auto& [k, g] : entries)
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < rt; ++j) {
        const Q& v = g(i, j);
        os << i << "," << j << "," << k << "," << m << "," << numerator(v) << "," << denominator(v) << ","
           << qd(v) << "\n";
      }
  return os.str();
}

namespace {

Q falling(int p, int m) {
  Q f = 1;
  for (int i = 0; i < m; ++i) f *= p - i;
  return f;
}

}  // namespace

QMatrix unit_gram(const UnitVec& u, const UnitVec& ut, int m) {
  int d = u.dim(), dt = ut.dim();
  if (u.sr <= m || ut.sr <= m)
    throw std::runtime_error("gram_integrals: not enough sum rules to normalize derivative order");
  int nv = d * dt;
  auto var = [dt](int i, int j) { return i * dt + j; };
  Q s = qpow2(2 * m + 1);
  std::vector<std::vector<Q>> rows;
  std::vector<Q> rhs;

  // M - s (A0 M tA0^T + A1 M tA1^T) = 0
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < dt; ++j) {
      std::vector<Q> row(static_cast<size_t>(nv));
      row[size_t(var(i, j))] += 1;
      for (int g = 0; g < 2; ++g) {
        const QMatrix& A = g ? u.A1 : u.A0;
        const QMatrix& B = g ? ut.A1 : ut.A0;
        for (int x = 0; x < d; ++x) {
          if (A(i, x) == 0) continue;
          for (int y = 0; y < dt; ++y)
            if (B(j, y) != 0) row[size_t(var(x, y))] -= s * A(i, x) * B(j, y);
        }
      }
      rows.push_back(std::move(row));
      rhs.push_back(0);
    }

  // dependencies of the differentiated vectors: annihilated combinations plus polynomials of degree < m
  auto dep_rows = [m](const UnitVec& v) {
    QMatrix D = v.deps;
    for (int p = 0; p < m; ++p) D = QMatrix::vstack(D, v.poly_row(p));
    return D.rows() ? row_basis(D) : D;
  };
  QMatrix D = dep_rows(u), Dt = dep_rows(ut);
  for (int c = 0; c < D.rows(); ++c)
    for (int j = 0; j < dt; ++j) {
      std::vector<Q> row(static_cast<size_t>(nv));
      for (int i = 0; i < d; ++i) row[size_t(var(i, j))] = D(c, i);
      rows.push_back(std::move(row));
      rhs.push_back(0);
    }
  for (int c = 0; c < Dt.rows(); ++c)
    for (int i = 0; i < d; ++i) {
      std::vector<Q> row(static_cast<size_t>(nv));
      for (int j = 0; j < dt; ++j) row[size_t(var(i, j))] = Dt(c, j);
      rows.push_back(std::move(row));
      rhs.push_back(0);
    }

  // normalization through reproduced polynomials
  for (int p = m; p < u.sr; ++p)
    for (int q = m; q < ut.sr; ++q) {
      QMatrix w = u.poly_row(p), wt = ut.poly_row(q);
      std::vector<Q> row(static_cast<size_t>(nv));
      for (int i = 0; i < d; ++i) {
        if (w(0, i) == 0) continue;
        for (int j = 0; j < dt; ++j) row[size_t(var(i, j))] = w(0, i) * wt(0, j);
      }
      rows.push_back(std::move(row));
      rhs.push_back(falling(p, m) * falling(q, m) / Q(p + q - 2 * m + 1));
    }

  QMatrix A(int(rows.size()), nv), b(int(rows.size()), 1);
  for (size_t e = 0; e < rows.size(); ++e) {
    for (int c = 0; c < nv; ++c) A(int(e), c) = rows[e][size_t(c)];
    b(int(e), 0) = rhs[e];
  }
  auto sol = solve_linear(A, b);
  if (!sol) throw std::runtime_error("gram_integrals: self-consistency system is inconsistent");
  if (!sol->unique()) throw std::runtime_error("gram_integrals: self-consistency system is not uniquely solvable");
  QMatrix M(d, dt);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < dt; ++j) M(i, j) = sol->particular(var(i, j), 0);
  return M;
}

GramTable gram_from_unit(const UnitVec& u, const UnitVec& ut, const QMatrix& M, int m) {
  GramTable t;
  t.r = u.r;
  t.rt = ut.r;
  t.m = m;
  for (int k = ut.jlo - u.jhi; k <= ut.jhi - u.jlo; ++k) {
    QMatrix g(u.r, ut.r);
    for (int j1 = u.jlo; j1 <= u.jhi; ++j1) {
      int j2 = j1 + k;
      if (j2 < ut.jlo || j2 > ut.jhi) continue;
      g += M.block(u.index(j1, 0), ut.index(j2, 0), u.r, ut.r);
    }
    t.entries[k] = g;
  }
  return t;
}

GramTable gram_integrals(const FilterBank& a, const FilterBank& ta, int m) {
  UnitVec u = unit_vec(a, 0), ut = unit_vec(ta, 0);
  return gram_from_unit(u, ut, unit_gram(u, ut, m), m);
}

FilterBank derivative_gram_symbol(const GramTable& t) {
  std::vector<QMatrix> taps;
  for (int k = t.kmin(); k <= t.kmax(); ++k) taps.push_back(t.at(k));
  return FilterBank(t.r, t.rt, t.kmin(), taps);
}

StabilityReport stability_check(const GramTable& t, int samples, double tol) {
  if (t.r != t.rt) throw std::invalid_argument("stability_check: Gram table must be square");
  FilterBank sym = derivative_gram_symbol(t);
  StabilityReport rep;
  rep.min_eig = INFINITY;
  rep.max_eig = -INFINITY;
  for (double xi : equispaced(samples)) {
    Eigen::MatrixXcd H = sym.is_zero() ? Eigen::MatrixXcd::Zero(t.r, t.r) : sym.symbol(xi);
    Eigen::MatrixXcd Hs = (H + H.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Hs);
    rep.min_eig = std::min(rep.min_eig, es.eigenvalues().minCoeff());
    rep.max_eig = std::max(rep.max_eig, es.eigenvalues().maxCoeff());
  }
  rep.stable = rep.min_eig > tol;
  return rep;
}

RieszBounds riesz_bound_estimate(const Eigen::MatrixXd& gram) {
  if (gram.rows() != gram.cols() || gram.rows() == 0) throw std::invalid_argument("riesz_bound_estimate: not square");
  Eigen::VectorXd d = gram.diagonal();
  if ((d.array() <= 0).any()) throw std::runtime_error("riesz_bound_estimate: Gram matrix is not positive definite");
  Eigen::VectorXd s = d.array().rsqrt();
  Eigen::MatrixXd G = s.asDiagonal() * gram * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((G + G.transpose()) / 2, Eigen::EigenvaluesOnly);
  RieszBounds b{es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  if (b.lower <= 0) throw std::runtime_error("riesz_bound_estimate: Gram matrix is not positive definite");
  return b;
}

namespace {

using PF = PiecewiseForm<double>;

template <class R>
std::vector<Cx<R>> to_cx(const std::vector<Q>& c) {
  std::vector<Cx<R>> out;
  for (const auto& v : c) out.emplace_back(to_real<R>(v));
  return out;
}

// cardinal B-spline of order n on [0, n]
template <class R>
PiecewiseForm<R> cardinal_bspline(int n) {
  PiecewiseForm<R> f;
  for (int i = 0; i < n; ++i) {
    std::vector<Q> c(size_t(n), Q(0));
    for (int k = 0; k <= i; ++k) {
      // (-1)^k C(n,k) (x-k)^(n-1) / (n-1)!
      Q coef = binomial(n, k) / factorial(n - 1) * (k % 2 ? -1 : 1);
      for (int e = 0; e < n; ++e) {
        Q term = binomial(n - 1, e) * coef;
        for (int z = 0; z < n - 1 - e; ++z) term *= -k;
        c[size_t(e)] += term;
      }
    }
    f.append(PiecewiseForm<R>::polynomial(Q(i), Q(i + 1), to_cx<R>(c)));
  }
  return f;
}

}  // namespace

template <class R>
std::vector<PiecewiseForm<R>> generator_forms(const FilterBank& a) {
  using F = PiecewiseForm<R>;
  if (a.rows() == 1 && a.cols() == 1) {
    int n = a.hi() - a.lo();
    if (n < 1) return {};
    for (int k = 0; k <= n; ++k)
      if (a.tap(a.lo() + k)(0, 0) != binomial(n, k) * qpow2(-n)) return {};
    return {cardinal_bspline<R>(n).shifted(Q(a.lo()))};
  }
  if (a == hermite_cubic_a()) {
    // (1-x)^2(1+2x), (1-x)^2 x on [0,1] and their reflections
    F p1 = F::polynomial(Q(-1), Q(0), to_cx<R>({1, 0, -3, -2}));
    p1.append(F::polynomial(Q(0), Q(1), to_cx<R>({1, 0, -3, 2})));
    F p2 = F::polynomial(Q(-1), Q(0), to_cx<R>({0, 1, 2, 1}));
    p2.append(F::polynomial(Q(0), Q(1), to_cx<R>({0, 1, -2, 1})));
    return {p1, p2};
  }
  return {};
}
template std::vector<PiecewiseForm<double>> generator_forms<double>(const FilterBank&);
template std::vector<PiecewiseForm<Mp>> generator_forms<Mp>(const FilterBank&);

std::vector<PiecewiseForm<double>> closed_form_generator(const FilterBank& a) { return generator_forms<double>(a); }

std::map<int, Eigen::MatrixXd> closed_form_gram(const std::vector<PiecewiseForm<double>>& phi,
                                                const std::vector<PiecewiseForm<double>>& tphi, int m,
                                                int kmin, int kmax) {
  auto diff = [m](PF f) {
    for (int i = 0; i < m; ++i) f = f.derivative();
    return f;
  };
  std::vector<PF> d, dt;
  for (const auto& f : phi) d.push_back(diff(f));
  for (const auto& f : tphi) dt.push_back(diff(f));
  std::map<int, Eigen::MatrixXd> out;
  for (int k = kmin; k <= kmax; ++k) {
    Eigen::MatrixXd g(d.size(), dt.size());
    for (size_t i = 0; i < d.size(); ++i)
      for (size_t j = 0; j < dt.size(); ++j) g(long(i), long(j)) = inner(d[i], dt[j].shifted(Q(k))).re;
    out[k] = g;
  }
  return out;
}

}  // namespace wavegal
