#include "wavegal/filters.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace wavegal {

namespace {

Q ipow(const Q& x, int n) {
  Q r = 1;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

Q parse_q(const nlohmann::json& v) {
  if (v.is_array()) return Q(v.at(0).get<long>(), v.at(1).get<long>());
  if (v.is_number_integer()) return Q(v.get<long>());
  if (v.is_string()) return Q(v.get<std::string>());
  throw std::invalid_argument("filter json: coefficient must be [num, den], integer or string");
}


FilterBank::FilterBank(int rows, int cols, int lo, std::vector<QMatrix> taps)
    : rows_(rows), cols_(cols), lo_(lo), taps_(std::move(taps)) {
  for (const auto& t : taps_)
    if (t.rows() != rows_ || t.cols() != cols_) throw std::invalid_argument("FilterBank: tap shape mismatch");
  trim();
}

FilterBank FilterBank::scalar(int lo, const std::vector<Q>& taps) {
  std::vector<QMatrix> t;
  for (const auto& v : taps) t.push_back(QMatrix(1, 1, {v}));
  return FilterBank(1, 1, lo, t);
}

void FilterBank::trim() {
  size_t b = 0;
  while (b < taps_.size() && taps_[b].is_zero()) ++b;
  size_t e = taps_.size();
  while (e > b && taps_[e - 1].is_zero()) --e;
  if (b == e) {
    taps_.clear();
    lo_ = 0;
    return;
  }
  taps_ = std::vector<QMatrix>(taps_.begin() + b, taps_.begin() + e);
  lo_ += int(b);
}

const QMatrix& FilterBank::tap(int k) const {
  thread_local QMatrix zero;
  if (k < lo_ || k > hi()) {
    if (zero.rows() != rows_ || zero.cols() != cols_) zero = QMatrix(rows_, cols_);
    return zero;
  }
  return taps_[k - lo_];
}

void FilterBank::set_tap(int k, const QMatrix& v) {
  if (taps_.empty()) {
    lo_ = k;
    taps_.push_back(v);
  } else {
    while (k < lo_) {
      taps_.insert(taps_.begin(), QMatrix(rows_, cols_));
      --lo_;
    }
    while (k > hi()) taps_.push_back(QMatrix(rows_, cols_));
    taps_[k - lo_] = v;
  }
  trim();
}

Eigen::MatrixXcd FilterBank::symbol(double xi) const {
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(rows_, cols_);
  for (int k = lo_; k <= hi() && !taps_.empty(); ++k)
    s += taps_[k - lo_].to_double().cast<std::complex<double>>() * std::polar(1.0, -k * xi);
  return s;
}

QMatrix FilterBank::moment(int n) const {
  QMatrix m(rows_, cols_);
  for (int k = lo_; k <= hi() && !taps_.empty(); ++k) m += taps_[k - lo_] * ipow(Q(k), n);
  return m;
}

QMatrix FilterBank::alt_moment(int n) const {
  QMatrix m(rows_, cols_);
  for (int k = lo_; k <= hi() && !taps_.empty(); ++k)
    m += taps_[k - lo_] * (ipow(Q(k), n) * ((k % 2 == 0) ? 1 : -1));
  return m;
}

FilterBank FilterBank::operator*(const FilterBank& o) const {
  if (cols_ != o.rows_) throw std::invalid_argument("FilterBank product: shape mismatch");
  if (is_zero() || o.is_zero()) return FilterBank(rows_, o.cols_);
  int lo = lo_ + o.lo_, hi_ = hi() + o.hi();
  std::vector<QMatrix> t(size_t(hi_ - lo + 1), QMatrix(rows_, o.cols_));
  for (int i = lo_; i <= hi(); ++i)
    for (int j = o.lo_; j <= o.hi(); ++j) t[i + j - lo] += tap(i) * o.tap(j);
  return FilterBank(rows_, o.cols_, lo, t);
}

FilterBank FilterBank::operator+(const FilterBank& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("FilterBank sum: shape mismatch");
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  int lo = std::min(lo_, o.lo_), hi_ = std::max(hi(), o.hi());
  std::vector<QMatrix> t;
  for (int k = lo; k <= hi_; ++k) t.push_back(tap(k) + o.tap(k));
  return FilterBank(rows_, cols_, lo, t);
}

FilterBank FilterBank::operator-(const FilterBank& o) const { return *this + o.scaled(-1); }

FilterBank FilterBank::scaled(const Q& s) const {
  FilterBank f = *this;
  for (auto& t : f.taps_) t = t * s;
  f.trim();
  return f;
}

FilterBank FilterBank::adjoint() const {
  std::vector<QMatrix> t;
  for (int k = hi(); k >= lo_ && !taps_.empty(); --k) t.push_back(tap(k).transpose());
  return FilterBank(cols_, rows_, taps_.empty() ? 0 : -hi(), t);
}

FilterBank FilterBank::modulated() const {
  FilterBank f = *this;
  for (int k = lo_; k <= hi() && !taps_.empty(); ++k)
    if (k % 2 != 0) f.taps_[k - lo_] = f.taps_[k - lo_] * Q(-1);
  return f;
}

FilterBank FilterBank::reflected() const {
  std::vector<QMatrix> t;
  for (int k = hi(); k >= lo_ && !taps_.empty(); --k) t.push_back(tap(k));
  return FilterBank(rows_, cols_, taps_.empty() ? 0 : -hi(), t);
}

FilterBank FilterBank::even_part() const {
  FilterBank f = *this;
  for (int k = lo_; k <= hi() && !taps_.empty(); ++k)
    if (k % 2 != 0) f.taps_[k - lo_] = QMatrix(rows_, cols_);
  f.trim();
  return f;
}

bool FilterBank::operator==(const FilterBank& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && lo_ == o.lo_ && taps_ == o.taps_;
}

nlohmann::json FilterBank::to_json() const {
  nlohmann::json j;
  j["support"] = {lo_, hi()};
  j["rows"] = rows_;
  j["cols"] = cols_;
  nlohmann::json taps = nlohmann::json::object();
  for (int k = lo_; k <= hi() && !taps_.empty(); ++k) {
    nlohmann::json v = nlohmann::json::array();
    const auto& t = tap(k);
    for (int a = 0; a < rows_; ++a)
      for (int b = 0; b < cols_; ++b) {
        const Q& q = t(a, b);
        v.push_back({numerator(q).convert_to<long>(), denominator(q).convert_to<long>()});
      }
    taps[std::to_string(k)] = v;
  }
  j["taps"] = taps;
  return j;
}

FilterBank FilterBank::from_json(const nlohmann::json& j) {
  int r = j.value("rows", 1), c = j.value("cols", 1);
  if (r < 1 || c < 1) throw std::invalid_argument("filter json: rows and cols must be positive");
  auto sup = j.at("support");
  int lo = sup.at(0).get<int>(), hi = sup.at(1).get<int>();
  if (hi < lo) throw std::invalid_argument("filter json: empty support");
  std::vector<QMatrix> taps(size_t(hi - lo + 1), QMatrix(r, c));
  for (auto it = j.at("taps").begin(); it != j.at("taps").end(); ++it) {
    int k = std::stoi(it.key());
    if (k < lo || k > hi) throw std::invalid_argument("filter json: tap " + it.key() + " outside support");
    const auto& v = it.value();
    if (int(v.size()) != r * c) throw std::invalid_argument("filter json: tap " + it.key() + " has wrong size");
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < c; ++b) taps[k - lo](a, b) = parse_q(v.at(size_t(a * c + b)));
  }
  FilterBank f(r, c, lo, taps);
  if (f.is_zero() || f.lo() != lo || f.hi() != hi)
    throw std::invalid_argument("filter json: taps at the support ends must be nonzero");
  return f;
}

FilterBank load_filter_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return FilterBank::from_json(nlohmann::json::parse(in));
}

BiorthPair pair_from_json(const nlohmann::json& j) {
  BiorthPair p;
  p.a = FilterBank::from_json(j.at("a"));
  p.b = FilterBank::from_json(j.at("b"));
  if (j.contains("ta")) p.ta = FilterBank::from_json(j.at("ta"));
  if (j.contains("tb")) p.tb = FilterBank::from_json(j.at("tb"));
  return p;
}

BiorthPair load_pair_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return pair_from_json(nlohmann::json::parse(in));
}

BiorthPair cdf22_pair() {
  BiorthPair p;
  p.a = FilterBank::scalar(-1, {Q(1, 4), Q(1, 2), Q(1, 4)});
  p.b = FilterBank::scalar(-1, {Q(-1, 8), Q(-1, 4), Q(3, 4), Q(-1, 4), Q(-1, 8)});
  p.ta = FilterBank::scalar(-2, {Q(-1, 8), Q(1, 4), Q(3, 4), Q(1, 4), Q(-1, 8)});
  p.tb = FilterBank::scalar(0, {Q(-1, 4), Q(1, 2), Q(-1, 4)});
  return p;
}

BiorthPair haar_pair() {
  BiorthPair p;
  p.a = FilterBank::scalar(0, {Q(1, 2), Q(1, 2)});
  p.b = FilterBank::scalar(0, {Q(1, 2), Q(-1, 2)});
  p.ta = p.a;
  p.tb = p.b;
  return p;
}

FilterBank hermite_cubic_a() {
  return FilterBank(2, 2, -1,
                    {QMatrix(2, 2, {Q(1, 4), Q(3, 8), Q(-1, 16), Q(-1, 16)}),
                     QMatrix(2, 2, {Q(1, 2), 0, 0, Q(1, 4)}),
                     QMatrix(2, 2, {Q(1, 4), Q(-3, 8), Q(1, 16), Q(-1, 16)})});
}

FilterBank hermite_cubic_b() { return FilterBank(2, 2, 1, {QMatrix(2, 2, {Q(1, 2), 0, 0, Q(1, 2)})}); }

Eigen::MatrixXcd symbol_eval(const FilterBank& f, double xi) { return f.symbol(xi); }

EigenReport check_eigenvalue_conditions(const FilterBank& a) {
  EigenReport rep;
  if (a.rows() != a.cols()) throw std::invalid_argument("eigenvalue conditions: filter must be square");
  int r = a.rows();
  QMatrix a0 = a.sum();
  QMatrix m = a0 - QMatrix::identity(r), p = QMatrix::identity(r);
  for (int i = 0; i < r; ++i) p = p * m;
  rep.one_simple = (r - rank(p)) == 1;
  Eigen::MatrixXd d = a0.to_double();
  Eigen::EigenSolver<Eigen::MatrixXd> es(d);
  double rho = 0;
  for (int i = 0; i < r; ++i) {
    rep.eigenvalues.push_back(es.eigenvalues()(i));
    rho = std::max(rho, std::abs(es.eigenvalues()(i)));
  }
  rep.dilation_ok = true;
  for (int j = 1; std::pow(2.0, j) <= 2 * rho + 1; ++j)
    if (rank(QMatrix::identity(r) * qpow2(j) - a0) < r) rep.dilation_ok = false;
  return rep;
}

std::vector<double> equispaced(int n) {
  std::vector<double> x;
  for (int i = 0; i < n; ++i) x.push_back(2 * M_PI * i / n);
  return x;
}

PRReport check_perfect_reconstruction(const BiorthPair& p, const std::vector<double>& samples, double tol) {
  const int r = p.a.rows();
  for (const auto* f : {&p.a, &p.b, &p.ta, &p.tb})
    if (f->rows() != r || f->cols() != r) throw std::invalid_argument("perfect reconstruction: dimension mismatch");
  PRReport rep;
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2 * r, 2 * r);
  for (double xi : samples) {
    Eigen::MatrixXcd L(2 * r, 2 * r), R(2 * r, 2 * r);
    L << p.ta.symbol(xi), p.ta.symbol(xi + M_PI), p.tb.symbol(xi), p.tb.symbol(xi + M_PI);
    R << p.a.symbol(xi).adjoint(), p.b.symbol(xi).adjoint(), p.a.symbol(xi + M_PI).adjoint(),
        p.b.symbol(xi + M_PI).adjoint();
    rep.max_residual = std::max(rep.max_residual, (L * R - id).cwiseAbs().maxCoeff());
  }
  // f(xi) g(xi)* + f(xi+pi) g(xi+pi)* is twice the even part of f g*.
  auto block = [&](const FilterBank& f, const FilterBank& g) { return (f * g.adjoint()).even_part().scaled(2); };
  FilterBank I(r, r, 0, {QMatrix::identity(r)});
  rep.exact = block(p.ta, p.a) == I && block(p.ta, p.b).is_zero() && block(p.tb, p.a).is_zero() &&
              block(p.tb, p.b) == I;
  rep.ok = rep.exact && rep.max_residual <= tol;
  return rep;
}

std::vector<Eigen::VectorXcd> MomentData::phi_hat_derivs() const {
  std::vector<Eigen::VectorXcd> out;
  std::complex<double> f(1, 0);
  for (const auto& m : phi) {
    out.push_back(m.to_double().col(0).cast<std::complex<double>>() * f);
    f *= std::complex<double>(0, -1);
  }
  return out;
}

std::vector<Eigen::RowVectorXcd> MomentData::match_hat_derivs() const {
  std::vector<Eigen::RowVectorXcd> out;
  std::complex<double> f(1, 0);
  for (const auto& m : match) {
    out.push_back(m.to_double().row(0).cast<std::complex<double>>() * f);
    f *= std::complex<double>(0, -1);
  }
  return out;
}

QMatrix MomentData::poly_coeff(int p, const Q& k) const {
  if (match.empty()) throw std::logic_error("poly_coeff: no matching filter jets");
  QMatrix c(1, match[0].cols());
  for (int j = 0; j <= p && j < int(match.size()); ++j) {
    // p^(j)(k) = p!/(p-j)! k^(p-j)
    Q dj = factorial(p) / factorial(p - j) * ipow(k, p - j);
    Q s = (j % 2 == 0 ? 1 : -1) * dj / factorial(j);
    c += match[j] * s;
  }
  return c;
}

namespace {

QMatrix one_eigenvector(const QMatrix& a0, const QMatrix* phi0) {
  int r = a0.rows();
  if (phi0) return *phi0;
  QMatrix ns = nullspace(a0 - QMatrix::identity(r));
  if (ns.cols() != 1) throw std::runtime_error("refinable moments: eigenvalue 1 is not simple");
  QMatrix v = ns;
  Q lead = 0;
  for (int i = 0; i < r && lead == 0; ++i) lead = v(i, 0);
  return v * (1 / lead);
}

// Matching filter jets for orders < m jointly, or nullopt if inconsistent.
std::optional<std::vector<QMatrix>> match_jets(const FilterBank& a, const QMatrix& phi0, int m) {
  int r = a.rows();
  std::vector<QMatrix> A, B;
  for (int n = 0; n < m; ++n) {
    A.push_back(a.moment(n));
    B.push_back(a.alt_moment(n));
  }
  int nu = m * r, ne = 2 * m * r + 1;
  QMatrix C(nu, ne), D(1, ne);
  int col = 0;
  for (int n = 0; n < m; ++n) {
    for (int c = 0; c < r; ++c, ++col) {
      for (int j = 0; j <= n; ++j) {
        Q w = binomial(n, j) * qpow2(j);
        for (int p = 0; p < r; ++p) C(j * r + p, col) += w * A[n - j](p, c);
      }
      C(n * r + c, col) -= 1;
    }
    for (int c = 0; c < r; ++c, ++col)
      for (int j = 0; j <= n; ++j) {
        Q w = binomial(n, j) * qpow2(j);
        for (int p = 0; p < r; ++p) C(j * r + p, col) += w * B[n - j](p, c);
      }
  }
  for (int p = 0; p < r; ++p) C(p, col) = phi0(p, 0);
  D(0, col) = 1;
  auto s = solve_left(C, D);
  if (!s) return std::nullopt;
  std::vector<QMatrix> out;
  for (int n = 0; n < m; ++n) out.push_back(s->particular.block(0, n * r, 1, r));
  return out;
}

}  // namespace

MomentData refinable_moments(const FilterBank& a, int up_to, const QMatrix* phi0) {
  if (!check_eigenvalue_conditions(a).passed())
    throw std::runtime_error("refinable moments: eigenvalue conditions violated");
  int r = a.rows();
  MomentData md;
  md.phi.push_back(one_eigenvector(a.sum(), phi0));
  QMatrix a0 = a.sum();
  for (int n = 1; n <= up_to; ++n) {
    QMatrix rhs(r, 1);
    for (int j = 0; j < n; ++j) rhs += a.moment(n - j) * md.phi[j] * binomial(n, j);
    md.phi.push_back(inverse(QMatrix::identity(r) * qpow2(n) - a0) * rhs);
  }
  int sr = 0;
  std::vector<QMatrix> jets;
  for (int m = 1; m <= kSumRuleCap; ++m) {
    auto j = match_jets(a, md.phi[0], m);
    if (!j) break;
    sr = m;
    jets = *j;
  }
  if (sr == 0) {
    // no sum rules: keep a row with v phi(0) = 1 as the zeroth jet
    QMatrix v(1, r);
    for (int i = 0; i < r; ++i)
      if (md.phi[0](i, 0) != 0) {
        v(0, i) = 1 / md.phi[0](i, 0);
        break;
      }
    jets.push_back(v);
  }
  md.match = jets;
  return md;
}

SumRuleResult sum_rule_order(const FilterBank& a, const QMatrix* phi0) {
  SumRuleResult res;
  res.moments = refinable_moments(a, kSumRuleCap, phi0);
  QMatrix phi00 = res.moments.phi[0];
  res.order = 0;
  for (int m = 1; m <= kSumRuleCap; ++m) {
    if (!match_jets(a, phi00, m)) break;
    res.order = m;
  }
  return res;
}

QMatrix wavelet_moment(const FilterBank& b, const MomentData& pm, int n) {
  QMatrix s(b.rows(), 1);
  for (int j = 0; j <= n; ++j) s += b.moment(n - j) * pm.phi.at(j) * binomial(n, j);
  return s * qpow2(-n);
}

int vanishing_moment_order(const FilterBank& b, const MomentData& pm) {
  if (b.cols() != pm.phi.at(0).rows()) throw std::invalid_argument("vanishing moments: column mismatch");
  int n = 0;
  while (n < int(pm.phi.size()) && wavelet_moment(b, pm, n).is_zero()) ++n;
  return n;
}

Laurent Laurent::operator*(const Laurent& o) const {
  if (is_zero() || o.is_zero()) return {};
  Laurent p;
  p.lo = lo + o.lo;
  p.c.assign(c.size() + o.c.size() - 1, Q(0));
  for (size_t i = 0; i < c.size(); ++i)
    for (size_t j = 0; j < o.c.size(); ++j) p.c[i + j] += c[i] * o.c[j];
  p.trim();
  return p;
}

Laurent Laurent::operator+(const Laurent& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  Laurent s;
  s.lo = std::min(lo, o.lo);
  int hi = std::max(lo + int(c.size()), o.lo + int(o.c.size()));
  s.c.assign(size_t(hi - s.lo), Q(0));
  for (size_t i = 0; i < c.size(); ++i) s.c[lo - s.lo + i] += c[i];
  for (size_t i = 0; i < o.c.size(); ++i) s.c[o.lo - s.lo + i] += o.c[i];
  s.trim();
  return s;
}

Laurent Laurent::operator-() const {
  Laurent n = *this;
  for (auto& v : n.c) v = -v;
  return n;
}

void Laurent::trim() {
  size_t b = 0;
  while (b < c.size() && c[b] == 0) ++b;
  size_t e = c.size();
  while (e > b && c[e - 1] == 0) --e;
  if (b == e) {
    c.clear();
    lo = 0;
    return;
  }
  c = std::vector<Q>(c.begin() + b, c.begin() + e);
  lo += int(b);
}

Laurent laurent_det(std::vector<std::vector<Laurent>> m) {
  size_t n = m.size();
  if (n == 1) return m[0][0];
  Laurent d;
  for (size_t j = 0; j < n; ++j) {
    if (m[0][j].is_zero()) continue;
    std::vector<std::vector<Laurent>> minor;
    for (size_t i = 1; i < n; ++i) {
      std::vector<Laurent> row;
      for (size_t k = 0; k < n; ++k)
        if (k != j) row.push_back(m[i][k]);
      minor.push_back(row);
    }
    Laurent t = m[0][j] * laurent_det(minor);
    d = d + (j % 2 == 0 ? t : -t);
  }
  return d;
}

namespace {

using Poly = std::vector<Q>;  // ascending coefficients

void poly_trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

Poly poly_mod(Poly a, const Poly& b) {
  poly_trim(a);
  while (a.size() >= b.size() && !a.empty()) {
    Q f = a.back() / b.back();
    size_t sh = a.size() - b.size();
    for (size_t i = 0; i < b.size(); ++i) a[sh + i] -= f * b[i];
    poly_trim(a);
  }
  return a;
}

Poly poly_gcd(Poly a, Poly b) {
  poly_trim(a);
  poly_trim(b);
  while (!b.empty()) {
    Poly r = poly_mod(a, b);
    a = b;
    b = r;
  }
  return a;
}

}  // namespace

bool has_unimodular_root_candidate(const Laurent& p) {
  // Roots on |z| = 1 of a real polynomial are shared with its reciprocal.
  Poly a = p.c;
  Poly b(a.rbegin(), a.rend());
  Poly g = poly_gcd(a, b);
  return g.size() > 1;
}

DerivOrthoReport check_derivative_orthogonality(const FilterBank& a, const FilterBank& b, int m,
                                                const FilterBank& gram) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument("derivative orthogonality: a and b must be square of equal size");
  if (gram.rows() != a.rows() || m < 0) throw std::invalid_argument("derivative orthogonality: gram mismatch");
  DerivOrthoReport rep;
  FilterBank x = b * gram * a.adjoint();
  rep.identity_holds = x.even_part().is_zero();
  for (double xi : equispaced(64)) {
    Eigen::MatrixXcd v = b.symbol(xi) * gram.symbol(xi) * a.symbol(xi).adjoint() +
                         b.symbol(xi + M_PI) * gram.symbol(xi + M_PI) * a.symbol(xi + M_PI).adjoint();
    rep.max_residual = std::max(rep.max_residual, v.cwiseAbs().maxCoeff());
  }
  int r = a.rows();
  auto entry = [](const FilterBank& f, int i, int j, bool mod) {
    Laurent l;
    l.lo = f.lo();
    for (int k = f.lo(); k <= f.hi() && !f.is_zero(); ++k)
      l.c.push_back(f.tap(k)(i, j) * ((mod && k % 2 != 0) ? -1 : 1));
    l.trim();
    return l;
  };
  std::vector<std::vector<Laurent>> blk(size_t(2 * r), std::vector<Laurent>(size_t(2 * r)));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      blk[i][j] = entry(a, i, j, false);
      blk[i][j + r] = entry(a, i, j, true);
      blk[i + r][j] = entry(b, i, j, false);
      blk[i + r][j + r] = entry(b, i, j, true);
    }
  Laurent det = laurent_det(blk);
  rep.det_certified = !det.is_zero() && !has_unimodular_root_candidate(det);
  rep.min_abs_det = std::numeric_limits<double>::infinity();
  for (double xi : equispaced(1024)) {
    std::complex<double> v = 0;
    for (size_t k = 0; k < det.c.size(); ++k) v += qd(det.c[k]) * std::polar(1.0, -(det.lo + int(k)) * xi);
    rep.min_abs_det = std::min(rep.min_abs_det, std::abs(v));
  }
  if (det.is_zero()) rep.min_abs_det = 0;
  rep.det_nonvanishing = rep.det_certified || rep.min_abs_det > 1e-10;
  return rep;
}

}  // namespace wavegal
