#include "wavegal/rational.hpp"

#include <sstream>
#include <stdexcept>

namespace wavegal {

std::string qstr(const Q& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

Q qpow2(int e) {
  Q r = 1;
  Q two = e >= 0 ? Q(2) : Q(1, 2);
  for (int i = 0; i < std::abs(e); ++i) r *= two;
  return r;
}

Q binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  Q r = 1;
  for (int i = 1; i <= k; ++i) r = r * Q(n - k + i) / Q(i);
  return r;
}

Q factorial(int n) {
  Q r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

QMatrix::QMatrix(int rows, int cols, std::initializer_list<Q> vals) : QMatrix(rows, cols) {
  if (vals.size() != d_.size()) throw std::invalid_argument("QMatrix: initializer size mismatch");
  std::copy(vals.begin(), vals.end(), d_.begin());
}

QMatrix QMatrix::identity(int n) {
  QMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

bool QMatrix::is_zero() const {
  for (const auto& v : d_)
    if (v != 0) return false;
  return true;
}

QMatrix QMatrix::transpose() const {
  QMatrix t(c_, r_);
  for (int i = 0; i < r_; ++i)
    for (int j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

QMatrix QMatrix::block(int i, int j, int nr, int nc) const {
  QMatrix b(nr, nc);
  for (int a = 0; a < nr; ++a)
    for (int c = 0; c < nc; ++c) b(a, c) = (*this)(i + a, j + c);
  return b;
}

void QMatrix::set_block(int i, int j, const QMatrix& b) {
  for (int a = 0; a < b.rows(); ++a)
    for (int c = 0; c < b.cols(); ++c) (*this)(i + a, j + c) = b(a, c);
}

QMatrix QMatrix::select_rows(const std::vector<int>& idx) const {
  QMatrix m(int(idx.size()), c_);
  for (size_t a = 0; a < idx.size(); ++a)
    for (int j = 0; j < c_; ++j) m(int(a), j) = (*this)(idx[a], j);
  return m;
}

QMatrix QMatrix::select_cols(const std::vector<int>& idx) const {
  QMatrix m(r_, int(idx.size()));
  for (int i = 0; i < r_; ++i)
    for (size_t a = 0; a < idx.size(); ++a) m(i, int(a)) = (*this)(i, idx[a]);
  return m;
}

QMatrix QMatrix::operator*(const QMatrix& o) const {
  if (c_ != o.r_) throw std::invalid_argument("QMatrix: product shape mismatch");
  QMatrix p(r_, o.c_);
  for (int i = 0; i < r_; ++i)
    for (int k = 0; k < c_; ++k) {
      const Q& a = (*this)(i, k);
      if (a == 0) continue;
      for (int j = 0; j < o.c_; ++j)
        if (o(k, j) != 0) p(i, j) += a * o(k, j);
    }
  return p;
}

QMatrix QMatrix::operator+(const QMatrix& o) const {
  QMatrix s = *this;
  s += o;
  return s;
}

QMatrix& QMatrix::operator+=(const QMatrix& o) {
  if (r_ != o.r_ || c_ != o.c_) throw std::invalid_argument("QMatrix: sum shape mismatch");
  for (size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
  return *this;
}

QMatrix QMatrix::operator-(const QMatrix& o) const {
  if (r_ != o.r_ || c_ != o.c_) throw std::invalid_argument("QMatrix: difference shape mismatch");
  QMatrix s = *this;
  for (size_t i = 0; i < d_.size(); ++i) s.d_[i] -= o.d_[i];
  return s;
}

QMatrix QMatrix::operator*(const Q& s) const {
  QMatrix m = *this;
  for (auto& v : m.d_) v *= s;
  return m;
}

bool QMatrix::operator==(const QMatrix& o) const {
  return r_ == o.r_ && c_ == o.c_ && d_ == o.d_;
}

Eigen::MatrixXd QMatrix::to_double() const {
  Eigen::MatrixXd m(r_, c_);
  for (int i = 0; i < r_; ++i)
    for (int j = 0; j < c_; ++j) m(i, j) = qd((*this)(i, j));
  return m;
}

std::string QMatrix::str() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < r_; ++i) {
    if (i) os << "; ";
    for (int j = 0; j < c_; ++j) os << (j ? ", " : "") << (*this)(i, j);
  }
  os << "]";
  return os.str();
}

QMatrix QMatrix::vstack(const QMatrix& a, const QMatrix& b) {
  if (a.rows() == 0) return b;
  if (b.rows() == 0) return a;
  if (a.cols() != b.cols()) throw std::invalid_argument("vstack: column mismatch");
  QMatrix m(a.rows() + b.rows(), a.cols());
  m.set_block(0, 0, a);
  m.set_block(a.rows(), 0, b);
  return m;
}

QMatrix QMatrix::hstack(const QMatrix& a, const QMatrix& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  if (a.rows() != b.rows()) throw std::invalid_argument("hstack: row mismatch");
  QMatrix m(a.rows(), a.cols() + b.cols());
  m.set_block(0, 0, a);
  m.set_block(0, a.cols(), b);
  return m;
}

std::vector<int> rref(QMatrix& m) {
  std::vector<int> piv;
  int r = 0;
  for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
    int p = -1;
    for (int i = r; i < m.rows(); ++i)
      if (m(i, c) != 0) {
        p = i;
        break;
      }
    if (p < 0) continue;
    if (p != r)
      for (int j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
    Q inv = 1 / m(r, c);
    for (int j = c; j < m.cols(); ++j) m(r, j) *= inv;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0) continue;
      Q f = m(i, c);
      for (int j = c; j < m.cols(); ++j)
        if (m(r, j) != 0) m(i, j) -= f * m(r, j);
    }
    piv.push_back(c);
    ++r;
  }
  return piv;
}

int rank(QMatrix m) { return int(rref(m).size()); }

QMatrix nullspace(const QMatrix& a) {
  QMatrix m = a;
  auto piv = rref(m);
  std::vector<bool> is_piv(a.cols(), false);
  for (int p : piv) is_piv[p] = true;
  std::vector<int> free;
  for (int j = 0; j < a.cols(); ++j)
    if (!is_piv[j]) free.push_back(j);
  QMatrix n(a.cols(), int(free.size()));
  for (size_t f = 0; f < free.size(); ++f) {
    n(free[f], int(f)) = 1;
    for (size_t r = 0; r < piv.size(); ++r) n(piv[r], int(f)) = -m(int(r), free[f]);
  }
  return n;
}

QMatrix left_nullspace(const QMatrix& a) { return nullspace(a.transpose()).transpose(); }

QMatrix row_basis(const QMatrix& a) {
  QMatrix m = a;
  auto piv = rref(m);
  return m.block(0, 0, int(piv.size()), a.cols());
}

std::optional<LinearSolution> solve_linear(const QMatrix& a, const QMatrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("solve_linear: shape mismatch");
  QMatrix aug = QMatrix::hstack(a, b);
  if (a.cols() == 0) {
    if (!b.is_zero()) return std::nullopt;
    return LinearSolution{QMatrix(0, b.cols()), QMatrix(0, 0)};
  }
  auto piv = rref(aug);
  for (int p : piv)
    if (p >= a.cols()) return std::nullopt;
  LinearSolution s;
  s.particular = QMatrix(a.cols(), b.cols());
  for (size_t r = 0; r < piv.size(); ++r)
    for (int j = 0; j < b.cols(); ++j) s.particular(piv[r], j) = aug(int(r), a.cols() + j);
  s.kernel = nullspace(a);
  return s;
}

std::optional<LinearSolution> solve_left(const QMatrix& a, const QMatrix& b) {
  auto s = solve_linear(a.transpose(), b.transpose());
  if (!s) return s;
  s->particular = s->particular.transpose();
  s->kernel = s->kernel.transpose();
  return s;
}

QMatrix inverse(const QMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("inverse: not square");
  auto s = solve_linear(a, QMatrix::identity(a.rows()));
  if (!s || !s->unique()) throw std::runtime_error("inverse: singular matrix");
  return s->particular;
}

}  // namespace wavegal
