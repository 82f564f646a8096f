#pragma once

#include "wavegal/rational.hpp"

#include <nlohmann/json.hpp>

#include <complex>
#include <string>
#include <vector>

namespace wavegal {

// Finitely supported r x s matrix mask with exact taps on [lo, hi].
// Also used as a matrix Laurent polynomial: tap k multiplies e^{-ik xi}.
class FilterBank {
 public:
  FilterBank() = default;
  FilterBank(int rows, int cols) : rows_(rows), cols_(cols) {}
  FilterBank(int rows, int cols, int lo, std::vector<QMatrix> taps);
  static FilterBank scalar(int lo, const std::vector<Q>& taps);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int lo() const { return lo_; }
  int hi() const { return lo_ + int(taps_.size()) - 1; }
  bool is_zero() const { return taps_.empty(); }
  const QMatrix& tap(int k) const;
  void set_tap(int k, const QMatrix& v);  // re-trims

  Eigen::MatrixXcd symbol(double xi) const;
  QMatrix moment(int n) const;      // sum_k a(k) k^n
  QMatrix alt_moment(int n) const;  // sum_k a(k) (-1)^k k^n
  QMatrix sum() const { return moment(0); }

  FilterBank operator*(const FilterBank& o) const;  // symbol product
  FilterBank operator+(const FilterBank& o) const;
  FilterBank operator-(const FilterBank& o) const;
  FilterBank scaled(const Q& s) const;
  FilterBank adjoint() const;    // symbol conj-transpose
  FilterBank modulated() const;  // symbol at xi + pi
  FilterBank reflected() const;  // k -> -k, the mask of phi(-.)
  FilterBank even_part() const;  // (f(xi) + f(xi+pi)) / 2
  bool operator==(const FilterBank& o) const;

  nlohmann::json to_json() const;
  static FilterBank from_json(const nlohmann::json& j);

 private:
  void trim();
  int rows_ = 1, cols_ = 1, lo_ = 0;
  std::vector<QMatrix> taps_;
};

FilterBank load_filter_file(const std::string& path);
// [num, den], integer, or "num/den" string
Q parse_q(const nlohmann::json& v);

struct BiorthPair {
  FilterBank a, b, ta, tb;
};

// Fixture file holding {"a":..,"b":..,"ta":..,"tb":..}; dual entries optional.
BiorthPair load_pair_file(const std::string& path);
BiorthPair pair_from_json(const nlohmann::json& j);

// Built-in fixtures.
BiorthPair cdf22_pair();
BiorthPair haar_pair();
FilterBank hermite_cubic_a();
FilterBank hermite_cubic_b();

Eigen::MatrixXcd symbol_eval(const FilterBank& f, double xi);

struct EigenReport {
  bool one_simple = false;
  bool dilation_ok = false;  // det(2^j I - a(0)) != 0 for j >= 1
  bool passed() const { return one_simple && dilation_ok; }
  std::vector<std::complex<double>> eigenvalues;
};
EigenReport check_eigenvalue_conditions(const FilterBank& a);

struct PRReport {
  bool ok = false;
  bool exact = false;  // identity holds as trigonometric polynomials
  double max_residual = 0;
};
PRReport check_perfect_reconstruction(const BiorthPair& p, const std::vector<double>& samples,
                                      double tol = 1e-12);
std::vector<double> equispaced(int n);

// Real moment form: phi[j] = integral x^j phi (r x 1), match[j] = sum_k v(k) k^j (1 x r).
// Derivatives at the origin follow as (-i)^j times these.
struct MomentData {
  std::vector<QMatrix> phi;
  std::vector<QMatrix> match;
  std::vector<Eigen::VectorXcd> phi_hat_derivs() const;
  std::vector<Eigen::RowVectorXcd> match_hat_derivs() const;
  // Coefficient of phi(.-k) reproducing x^p: sum_j (-1)^j p^(j)(k)/j! match[j].
  QMatrix poly_coeff(int p, const Q& k) const;
};

constexpr int kSumRuleCap = 20;

// phi0 optionally overrides the normalization of the 1-eigenvector of a(0).
MomentData refinable_moments(const FilterBank& a, int up_to, const QMatrix* phi0 = nullptr);

struct SumRuleResult {
  int order = 0;
  MomentData moments;
};
SumRuleResult sum_rule_order(const FilterBank& a, const QMatrix* phi0 = nullptr);

int vanishing_moment_order(const FilterBank& b, const MomentData& phi_moments);
// integral x^n psi for psi = 2 sum b(k) phi(2.-k)
QMatrix wavelet_moment(const FilterBank& b, const MomentData& phi_moments, int n);

struct DerivOrthoReport {
  bool identity_holds = false;
  bool det_nonvanishing = false;
  bool det_certified = false;  // no unimodular root by gcd with the reciprocal
  double min_abs_det = 0;
  double max_residual = 0;
  bool ok() const { return identity_holds && det_nonvanishing; }
};
// gram: Laurent polynomial with taps <phi^(m), phi^(m)(.-k)>.
DerivOrthoReport check_derivative_orthogonality(const FilterBank& a, const FilterBank& b, int m,
                                                const FilterBank& gram);

// Scalar Laurent polynomial helpers used by the determinant test.
struct Laurent {
  int lo = 0;
  std::vector<Q> c;
  Laurent operator*(const Laurent& o) const;
  Laurent operator+(const Laurent& o) const;
  Laurent operator-() const;
  void trim();
  bool is_zero() const { return c.empty(); }
};
Laurent laurent_det(std::vector<std::vector<Laurent>> m);
bool has_unimodular_root_candidate(const Laurent& p);

}  // namespace wavegal
