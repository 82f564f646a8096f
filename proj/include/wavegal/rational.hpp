#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace wavegal {

using Q = boost::multiprecision::mpq_rational;

inline Q qfrac(long num, long den = 1) { return Q(num, den); }
inline double qd(const Q& q) { return q.convert_to<double>(); }
std::string qstr(const Q& q);
Q qpow2(int e);  // 2^e, e may be negative
Q binomial(int n, int k);
Q factorial(int n);

// Dense exact matrix, row-major.
class QMatrix {
 public:
  QMatrix() = default;
  QMatrix(int rows, int cols) : r_(rows), c_(cols), d_(size_t(rows) * size_t(cols)) {}
  QMatrix(int rows, int cols, std::initializer_list<Q> vals);

  static QMatrix identity(int n);
  static QMatrix zero(int r, int c) { return QMatrix(r, c); }

  int rows() const { return r_; }
  int cols() const { return c_; }
  bool empty() const { return r_ == 0 || c_ == 0; }
  Q& operator()(int i, int j) { return d_[size_t(i) * c_ + j]; }
  const Q& operator()(int i, int j) const { return d_[size_t(i) * c_ + j]; }

  bool is_zero() const;
  QMatrix transpose() const;
  QMatrix block(int i, int j, int nr, int nc) const;
  QMatrix row(int i) const { return block(i, 0, 1, c_); }
  QMatrix col(int j) const { return block(0, j, r_, 1); }
  void set_block(int i, int j, const QMatrix& b);
  QMatrix select_rows(const std::vector<int>& idx) const;
  QMatrix select_cols(const std::vector<int>& idx) const;

  QMatrix operator*(const QMatrix& o) const;
  QMatrix operator+(const QMatrix& o) const;
  QMatrix operator-(const QMatrix& o) const;
  QMatrix operator*(const Q& s) const;
  QMatrix& operator+=(const QMatrix& o);
  bool operator==(const QMatrix& o) const;
  bool operator!=(const QMatrix& o) const { return !(*this == o); }

  Eigen::MatrixXd to_double() const;
  std::string str() const;

  static QMatrix vstack(const QMatrix& a, const QMatrix& b);
  static QMatrix hstack(const QMatrix& a, const QMatrix& b);

 private:
  int r_ = 0, c_ = 0;
  std::vector<Q> d_;
};

// In-place reduced row echelon form; returns pivot columns.
std::vector<int> rref(QMatrix& m);
int rank(QMatrix m);
// Columns spanning {x : A x = 0}.
QMatrix nullspace(const QMatrix& a);
// Rows spanning {y : y A = 0}.
QMatrix left_nullspace(const QMatrix& a);
// Basis of the row space in RREF (zero rows dropped).
QMatrix row_basis(const QMatrix& a);

// A X = B. particular has free variables set to zero; kernel columns span null(A).
struct LinearSolution {
  QMatrix particular;
  QMatrix kernel;
  bool unique() const { return kernel.empty(); }
};
std::optional<LinearSolution> solve_linear(const QMatrix& a, const QMatrix& b);
// X A = B, via transposes.
std::optional<LinearSolution> solve_left(const QMatrix& a, const QMatrix& b);
QMatrix inverse(const QMatrix& a);  // throws std::runtime_error when singular

}  // namespace wavegal
