#include "wavegal/assembly.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace wavegal {

std::string normalization_name(Normalization n) {
  switch (n) {
    case Normalization::UnitL2: return "unit_l2";
    case Normalization::UnitSeminorm: return "unit_seminorm";
    default: return "none";
  }
}

Normalization parse_normalization(const std::string& s) {
  if (s == "unit_l2" || s == "l2") return Normalization::UnitL2;
  if (s == "unit_seminorm" || s == "h1" || s == "seminorm") return Normalization::UnitSeminorm;
  if (s == "none") return Normalization::None;
  throw std::invalid_argument("unknown normalization '" + s + "'");
}

namespace {

struct DoubleCombo {
  int lo = 0, r = 1;
  std::vector<double> c;
};

DoubleCombo refine_double(const DoubleCombo& f, const FilterBank& a, const std::vector<Eigen::MatrixXd>& taps) {
  DoubleCombo g;
  g.r = f.r;
  int n = int(f.c.size()) / f.r;
  g.lo = 2 * f.lo + a.lo();
  int hi = 2 * (f.lo + n - 1) + a.hi();
  g.c.assign(size_t(hi - g.lo + 1) * size_t(f.r), 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < f.r; ++i) {
      double x = f.c[size_t(k * f.r + i)];
      if (x == 0) continue;
      for (int t = 0; t < int(taps.size()); ++t) {
        int dst = 2 * (f.lo + k) + a.lo() + t - g.lo;
        for (int ii = 0; ii < f.r; ++ii) g.c[size_t(dst * f.r + ii)] += 2 * x * taps[size_t(t)](i, ii);
      }
    }
  return g;
}

std::vector<Eigen::MatrixXd> taps_double(const FilterBank& a) {
  std::vector<Eigen::MatrixXd> out;
  for (int k = a.lo(); k <= a.hi(); ++k) {
    const QMatrix& t = a.tap(k);
    Eigen::MatrixXd m(t.rows(), t.cols());
    for (int i = 0; i < t.rows(); ++i)
      for (int j = 0; j < t.cols(); ++j) m(i, j) = qd(t(i, j));
    out.push_back(m);
  }
  return out;
}

// shift range of phi(2^level . - k) alive on [0, L]
std::pair<int, int> live_range(const UnitVec& u, int level, int L) {
  return {u.jlo, (1 << level) * L - 1 + u.jhi};
}

const UnitVec& cached_unit(const FilterBank& a) {
  static std::vector<std::pair<FilterBank, UnitVec>> cache;
  for (const auto& [f, u] : cache)
    if (f == a) return u;
  cache.emplace_back(a, unit_vec(a, 4));
  return cache.back().second;
}

}  // namespace

Expansion expand(const IntervalBasis& b) {
  Expansion e;
  e.a = b.primal_family().a;
  e.r = b.primal_family().r;
  e.L = b.domain();
  for (const auto& el : b.elements()) e.level = std::max(e.level, el.combo.scale);
  const UnitVec& u = cached_unit(e.a);
  auto [klo, khi] = live_range(u, e.level, e.L);
  e.lo = klo;
  int cols = (khi - klo + 1) * e.r;
  auto taps = taps_double(e.a);

  std::vector<Eigen::Triplet<double>> trip;
  for (int id = 0; id < b.size(); ++id) {
    const Combo& c = b.elements()[size_t(id)].combo;
    if (c.empty()) continue;
    DoubleCombo d;
    d.lo = c.lo;
    d.r = c.r;
    for (const auto& q : c.c) d.c.push_back(qd(q));
    for (int s = c.scale; s < e.level; ++s) d = refine_double(d, e.a, taps);
    double sf = b.scale_factor(id);
    int n = int(d.c.size()) / d.r;
    for (int k = 0; k < n; ++k) {
      int kk = d.lo + k;
      if (kk < klo || kk > khi) continue;
      for (int i = 0; i < d.r; ++i) {
        double v = d.c[size_t(k * d.r + i)];
        if (v != 0) trip.emplace_back(id, (kk - klo) * e.r + i, sf * v);
      }
    }
  }
  e.S.resize(b.size(), cols);
  e.S.setFromTriplets(trip.begin(), trip.end());
  return e;
}

Expansion fem_hats(int N) {
  if (N < 1) throw std::invalid_argument("fem_hats: N must be positive");
  Expansion e;
  e.a = cdf22_pair().a;
  e.level = N;
  const UnitVec& u = cached_unit(e.a);
  auto [klo, khi] = live_range(u, N, 1);
  e.lo = klo;
  int n = (1 << N) - 1;
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 1; k <= n; ++k) trip.emplace_back(k - 1, k - klo, 1.0);
  e.S.resize(n, khi - klo + 1);
  e.S.setFromTriplets(trip.begin(), trip.end());
  return e;
}

Eigen::SparseMatrix<double> coordinate_gram(const Expansion& e, int m) {
  const UnitVec& u = cached_unit(e.a);
  QMatrix M = unit_gram(u, u, m);
  double f = std::ldexp(1.0, e.level * (2 * m - 1));
  int cols = int(e.S.cols());
  std::vector<Eigen::Triplet<double>> trip;
  int T = (1 << e.level) * e.L;
  int w = u.jhi - u.jlo + 1;
  std::vector<double> Md(size_t(M.rows() * M.cols()));
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) Md[size_t(i * M.cols() + j)] = qd(M(i, j)) * f;
  for (int t = 0; t < T; ++t)
    for (int j1 = 0; j1 < w; ++j1)
      for (int i1 = 0; i1 < e.r; ++i1) {
        int c1 = (t + u.jlo + j1 - e.lo) * e.r + i1;
        if (c1 < 0 || c1 >= cols) continue;
        int row = j1 * e.r + i1;
        for (int j2 = 0; j2 < w; ++j2)
          for (int i2 = 0; i2 < e.r; ++i2) {
            int c2 = (t + u.jlo + j2 - e.lo) * e.r + i2;
            if (c2 < 0 || c2 >= cols) continue;
            double v = Md[size_t(row * M.cols() + j2 * e.r + i2)];
            if (v != 0) trip.emplace_back(c1, c2, v);
          }
      }
  Eigen::SparseMatrix<double> G(cols, cols);
  G.setFromTriplets(trip.begin(), trip.end());
  return G;
}

namespace {

Eigen::SparseMatrix<double> raw_gram(const Expansion& e, int m) {
  Eigen::SparseMatrix<double> S = e.S;
  Eigen::SparseMatrix<double> G = coordinate_gram(e, m);
  Eigen::SparseMatrix<double> SG = S * G;
  Eigen::SparseMatrix<double> St = S.transpose();
  Eigen::SparseMatrix<double> out = SG * St;
  Eigen::SparseMatrix<double> sym = (out + Eigen::SparseMatrix<double>(out.transpose())) * 0.5;
  sym.prune(0.0);
  return sym;
}

}  // namespace

GramMatrix gram_matrix(const Expansion& e, int m, Normalization mode) {
  GramMatrix g;
  g.m = m;
  g.mode = mode;
  g.matrix = raw_gram(e, m);
  int n = g.size();
  g.scaling.assign(size_t(n), 1.0);
  if (mode == Normalization::None) return g;
  int order = mode == Normalization::UnitL2 ? 0 : std::max(m, 1);
  Eigen::VectorXd d = order == m ? Eigen::VectorXd(g.matrix.diagonal()) : Eigen::VectorXd(raw_gram(e, order).diagonal());
  for (int i = 0; i < n; ++i) {
    if (!(d(i) > 0)) throw std::runtime_error("gram_matrix: element with zero norm");
    g.scaling[size_t(i)] = 1 / std::sqrt(d(i));
  }
  Eigen::VectorXd s = Eigen::Map<Eigen::VectorXd>(g.scaling.data(), n);
  g.matrix = s.asDiagonal() * g.matrix * s.asDiagonal();
  return g;
}

GramMatrix mass_matrix(const IntervalBasis& b, Normalization mode) { return gram_matrix(expand(b), 0, mode); }

GramMatrix stiffness_matrix(const IntervalBasis& b, int m, Normalization mode) {
  return gram_matrix(expand(b), m, mode);
}

namespace {

template <class R>
R sqrt2_pow(int j) {
  using std::sqrt;
  // j >= 0 for every element level
  R s = to_real<R>(qpow2(j / 2));
  if (j % 2) s *= sqrt(R(2));
  return s;
}

template <class R>
PiecewiseForm<R> combo_form(const std::vector<PiecewiseForm<R>>& gens, const Combo& c, const R& s, int L) {
  PiecewiseForm<R> f;
  if (c.empty()) return f;
  Q dil = qpow2(c.scale);
  for (int k = c.lo; k <= c.hi(); ++k)
    for (int i = 0; i < c.r; ++i) {
      const Q& q = c.at(k, i);
      if (q == 0) continue;
      f += gens[size_t(i)].affine(dil, Q(k)).scaled(Cx<R>(to_real<R>(q) * s));
    }
  return f.restrict(Q(0), Q(L));
}

}  // namespace

template <class R>
PiecewiseForm<R> element_form(const IntervalBasis& b, int id) {
  auto gens = generator_forms<R>(b.primal_family().a);
  if (gens.empty()) throw std::runtime_error("element_form: generator has no closed form");
  const Element& e = b.elements().at(size_t(id));
  R s = b.hermite() ? R(1) : sqrt2_pow<R>(e.level);
  return combo_form(gens, e.combo, s, b.domain());
}

template <class R>
std::vector<PiecewiseForm<R>> element_forms(const IntervalBasis& b) {
  auto gens = generator_forms<R>(b.primal_family().a);
  if (gens.empty()) throw std::runtime_error("element_forms: generator has no closed form");
  std::vector<PiecewiseForm<R>> out;
  out.reserve(size_t(b.size()));
  for (int id = 0; id < b.size(); ++id) {
    const Element& e = b.elements()[size_t(id)];
    R s = b.hermite() ? R(1) : sqrt2_pow<R>(e.level);
    out.push_back(combo_form(gens, e.combo, s, b.domain()));
  }
  return out;
}

template <class R>
std::vector<Cx<R>> load_vector(const std::vector<PiecewiseForm<R>>& elems, const PiecewiseForm<R>& f,
                               LoadPolicy policy) {
  std::vector<Cx<R>> out(elems.size());
  if (f.empty()) return out;
  const auto& gauss = cached_gauss<R>(10);
  for (size_t l = 0; l < elems.size(); ++l) {
    if (policy == LoadPolicy::Exact) {
      out[l] = inner(f, elems[l]);
      continue;
    }
    // pieces of the product are aligned with both supports
    PiecewiseForm<R> prod = f * elems[l].conj();
    Cx<R> s;
    for (const auto& pc : prod.pieces()) {
      R h = pc.qr - pc.pr;
      for (int q = 0; q < 10; ++q) {
        R x = pc.pr + gauss.first[size_t(q)] * h;
        s += f.eval(x) * conj(elems[l].eval(x)) * Cx<R>(gauss.second[size_t(q)] * h);
      }
    }
    out[l] = s;
  }
  return out;
}

template <class R>
Eigen::MatrixXcd GalerkinSystem<R>::to_eigen() const {
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = to_std((*this)(i, j));
  return m;
}

template <class R>
void apply_diagonal_preconditioner(GalerkinSystem<R>& s) {
  using std::sqrt;
  std::vector<R> p(size_t(s.n));
  for (int i = 0; i < s.n; ++i) {
    R d = abs(s(i, i));
    if (d == 0) throw std::runtime_error("apply_diagonal_preconditioner: zero diagonal entry " + std::to_string(i));
    p[size_t(i)] = R(1) / sqrt(d);
  }
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.n; ++j) s(i, j) *= Cx<R>(p[size_t(i)] * p[size_t(j)]);
    s.rhs[size_t(i)] *= Cx<R>(p[size_t(i)]);
  }
  if (s.precond.empty()) {
    s.precond = p;
  } else {
    for (int i = 0; i < s.n; ++i) s.precond[size_t(i)] *= p[size_t(i)];
  }
}

Eigen::MatrixXd apply_diagonal_preconditioner(const Eigen::MatrixXd& a) {
  Eigen::VectorXd d = a.diagonal().cwiseAbs();
  if ((d.array() == 0).any()) throw std::runtime_error("apply_diagonal_preconditioner: zero diagonal entry");
  Eigen::VectorXd p = d.cwiseSqrt().cwiseInverse();
  return p.asDiagonal() * a * p.asDiagonal();
}

template <class R>
std::vector<Cx<R>> solve_dense(const GalerkinSystem<R>& s) {
  int n = s.n;
  std::vector<Cx<R>> A = s.a, b = s.rhs;
  R big = 0;
  for (const auto& v : A) big = std::max(big, R(abs(v)));
  R eps = std::is_same_v<R, double> ? R(1e-15) : R(pow(R(10), -R(int(Mp::default_precision())) + 2));
  for (int c = 0; c < n; ++c) {
    int p = c;
    R best = norm2(A[size_t(c) * n + c]);
    for (int i = c + 1; i < n; ++i) {
      R v = norm2(A[size_t(i) * n + c]);
      if (v > best) {
        best = v;
        p = i;
      }
    }
    using std::sqrt;
    if (!(sqrt(best) > eps * big)) throw std::runtime_error("solve_dense: singular system");
    if (p != c) {
      for (int j = 0; j < n; ++j) std::swap(A[size_t(p) * n + j], A[size_t(c) * n + j]);
      std::swap(b[size_t(p)], b[size_t(c)]);
    }
    Cx<R> piv = A[size_t(c) * n + c];
    for (int i = c + 1; i < n; ++i) {
      Cx<R> f = A[size_t(i) * n + c] / piv;
      if (f.is_zero()) continue;
      for (int j = c; j < n; ++j) A[size_t(i) * n + j] -= f * A[size_t(c) * n + j];
      b[size_t(i)] -= f * b[size_t(c)];
    }
  }
  std::vector<Cx<R>> x(static_cast<size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    Cx<R> acc = b[size_t(i)];
    for (int j = i + 1; j < n; ++j) acc -= A[size_t(i) * n + j] * x[size_t(j)];
    x[size_t(i)] = acc / A[size_t(i) * n + i];
  }
  if (!s.precond.empty())
    for (int i = 0; i < n; ++i) x[size_t(i)] *= Cx<R>(s.precond[size_t(i)]);
  return x;
}

namespace {

ConditioningReport finish(double smin, double smax, int n, std::string method) {
  ConditioningReport r;
  r.smin = smin;
  r.smax = smax;
  r.size = n;
  r.method = std::move(method);
  double tol = smax * std::max(n, 1) * std::numeric_limits<double>::epsilon();
  r.kappa = (smax == 0 || smin <= tol) ? std::numeric_limits<double>::infinity() : smax / smin;
  return r;
}

template <class M>
double asymmetry(const M& a) {
  double s = a.norm();
  return s == 0 ? 0 : (a - a.adjoint()).norm() / s;
}

}  // namespace

ConditioningReport condition_number(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw std::invalid_argument("condition_number: need a nonempty square matrix");
  int n = int(a.rows());
  if (asymmetry(a) < 1e-13) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
    return finish(ev.minCoeff(), ev.maxCoeff(), n, "eig");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  Eigen::VectorXd s = svd.singularValues();
  return finish(s.minCoeff(), s.maxCoeff(), n, "svd");
}

ConditioningReport condition_number(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw std::invalid_argument("condition_number: need a nonempty square matrix");
  int n = int(a.rows());
  if (asymmetry(a) < 1e-13) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
    return finish(ev.minCoeff(), ev.maxCoeff(), n, "eig");
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
  Eigen::VectorXd s = svd.singularValues();
  return finish(s.minCoeff(), s.maxCoeff(), n, "svd");
}

namespace {

struct LanczosOut {
  double tmin = 0, tmax = 0, rmin = 0, rmax = 0;
  bool conv_min = false, conv_max = false;
  int steps = 0;
};

// Lanczos with full reorthogonalization; deterministic start vector.
template <class Op>
LanczosOut lanczos(Op&& apply, int n, int kmax, double tol) {
  std::vector<Eigen::VectorXd> V;
  std::vector<double> alpha, beta;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::sin(0.7 * i + 0.3);
  v.normalize();
  LanczosOut out;
  kmax = std::min(kmax, n);
  for (int j = 0; j < kmax; ++j) {
    V.push_back(v);
    Eigen::VectorXd w = apply(v);
    double al = v.dot(w);
    alpha.push_back(al);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : V) w -= q.dot(w) * q;
    double b = w.norm();
    bool last = j + 1 == kmax || b < 1e-14 * std::abs(al);
    if ((j + 1) % 8 == 0 || last) {
      int m = j + 1;
      Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd e(std::max(m - 1, 0));
      for (int i = 0; i + 1 < m; ++i) e(i) = beta[size_t(i)];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
      const auto& th = es.eigenvalues();
      const auto& Z = es.eigenvectors();
      out.tmin = th(0);
      out.tmax = th(m - 1);
      out.rmin = b * std::abs(Z(m - 1, 0));
      out.rmax = b * std::abs(Z(m - 1, m - 1));
      out.conv_min = out.rmin <= tol * std::abs(out.tmin);
      out.conv_max = out.rmax <= tol * std::abs(out.tmax);
      out.steps = m;
      if ((out.conv_min && out.conv_max) || last) break;
    }
    beta.push_back(b);
    v = w / b;
  }
  return out;
}

}  // namespace

ExtremeEigs extreme_eigenvalues(const Eigen::SparseMatrix<double>& a, double tol) {
  int n = int(a.rows());
  auto op = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return a * x; };
  // Ritz value errors go like the residual squared
  LanczosOut l = lanczos(op, n, 300, std::sqrt(tol));
  ExtremeEigs r;
  r.lmax = l.tmax;
  r.lmin = l.tmin;
  r.iterations = l.steps;
  if (l.conv_min && l.conv_max) return r;

  // Clustered ends: bisect with the inertia of shifted LDLT factorizations.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.analyzePattern(a);
  auto definite = [&](double offset, double scale) {
    ldlt.setShift(offset, scale);
    ldlt.factorize(a);
    ++r.factorizations;
    return ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all();
  };
  double floor_step = tol * std::abs(l.tmax);
  if (!l.conv_min) {
    double hi = l.tmin, step = std::max(l.rmin, floor_step), lo = hi - step;
    while (!definite(-lo, 1)) {
      hi = lo;
      step *= 2;
      lo = hi - step;
    }
    while (hi - lo > tol * std::abs(hi)) {
      double mid = 0.5 * (lo + hi);
      if (definite(-mid, 1)) lo = mid;
      else hi = mid;
    }
    r.lmin = 0.5 * (lo + hi);
  }
  if (!l.conv_max) {
    double lo = l.tmax, step = std::max(l.rmax, floor_step), hi = lo + step;
    while (!definite(hi, -1)) {
      lo = hi;
      step *= 2;
      hi = lo + step;
    }
    while (hi - lo > tol * std::abs(hi)) {
      double mid = 0.5 * (lo + hi);
      if (definite(mid, -1)) hi = mid;
      else lo = mid;
    }
    r.lmax = 0.5 * (lo + hi);
  }
  r.bisection = true;
  return r;
}

ConditioningReport condition_number(const Eigen::SparseMatrix<double>& a, int dense_limit) {
  int n = int(a.rows());
  if (n <= dense_limit) return condition_number(Eigen::MatrixXd(a));
  ExtremeEigs e = extreme_eigenvalues(a);
  if (e.lmin <= 0) {
    ConditioningReport r = finish(0, e.lmax, n, "lanczos");
    return r;
  }
  return finish(e.lmin, e.lmax, n, e.bisection ? "lanczos+inertia" : "lanczos");
}

ConditioningReport schur_condition(const Eigen::MatrixXcd& a, int n2) {
  int n = int(a.rows());
  if (n2 <= 0 || n2 >= n) throw std::invalid_argument("schur_condition: block size out of range");
  int n1 = n - n2;
  Eigen::MatrixXcd A1 = a.topLeftCorner(n1, n1), A2 = a.topRightCorner(n1, n2);
  Eigen::MatrixXcd A3 = a.bottomLeftCorner(n2, n1), A4 = a.bottomRightCorner(n2, n2);
  ConditioningReport r4 = condition_number(A4);
  if (r4.singular()) throw std::runtime_error("schur_condition: trailing block is singular");
  Eigen::MatrixXcd Sc = A1 - A2 * A4.fullPivLu().solve(A3);
  ConditioningReport r = condition_number(a);
  r.kappa_star = condition_number(Sc).kappa;
  r.kappa_a4 = r4.kappa;
  r.block = n2;
  return r;
}

void write_matrix_market(std::ostream& os, const Eigen::SparseMatrix<double>& a) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.rows() << " " << a.cols() << " " << a.nonZeros() << "\n";
  os << std::setprecision(17);
  for (int k = 0; k < a.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it)
      os << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

void write_matrix_market(std::ostream& os, const Eigen::MatrixXcd& a) {
  long nnz = 0;
  for (long j = 0; j < a.cols(); ++j)
    for (long i = 0; i < a.rows(); ++i) nnz += a(i, j) != std::complex<double>(0) ? 1 : 0;
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << a.rows() << " " << a.cols() << " " << nnz << "\n";
  os << std::setprecision(17);
  for (long j = 0; j < a.cols(); ++j)
    for (long i = 0; i < a.rows(); ++i)
      if (a(i, j) != std::complex<double>(0))
        os << i + 1 << " " << j + 1 << " " << a(i, j).real() << " " << a(i, j).imag() << "\n";
}

std::string conditioning_csv_header() { return "basis,N,size,normalization,kappa,kappa_star,method"; }

std::string conditioning_csv_row(const std::string& basis, int N, Normalization mode, const ConditioningReport& r) {
  std::ostringstream os;
  os << std::setprecision(10) << basis << "," << N << "," << r.size << "," << normalization_name(mode) << ","
     << r.kappa << ",";
  if (std::isfinite(r.kappa_star)) os << r.kappa_star;
  os << "," << r.method;
  return os.str();
}

template PiecewiseForm<double> element_form<double>(const IntervalBasis&, int);
template PiecewiseForm<Mp> element_form<Mp>(const IntervalBasis&, int);
template std::vector<PiecewiseForm<double>> element_forms<double>(const IntervalBasis&);
template std::vector<PiecewiseForm<Mp>> element_forms<Mp>(const IntervalBasis&);
template std::vector<Cx<double>> load_vector<double>(const std::vector<PiecewiseForm<double>>&,
                                                     const PiecewiseForm<double>&, LoadPolicy);
template std::vector<Cx<Mp>> load_vector<Mp>(const std::vector<PiecewiseForm<Mp>>&, const PiecewiseForm<Mp>&,
                                             LoadPolicy);
template struct GalerkinSystem<double>;
template struct GalerkinSystem<Mp>;
template void apply_diagonal_preconditioner<double>(GalerkinSystem<double>&);
template void apply_diagonal_preconditioner<Mp>(GalerkinSystem<Mp>&);
template std::vector<Cx<double>> solve_dense<double>(const GalerkinSystem<double>&);
template std::vector<Cx<Mp>> solve_dense<Mp>(const GalerkinSystem<Mp>&);

}  // namespace wavegal
