#pragma once

#include "wavegal/filters.hpp"
#include "wavegal/piecewise.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace wavegal {

// Dyadic samples of phi = 2 sum_k a(k) phi(2.-k) on the mask support [lo, hi].
struct RefinableVector {
  FilterBank a;
  int lo = 0, hi = 0;                  // mask support
  int support_lo = 0, support_hi = 0;  // numerical fsupp
  int level = 0;
  std::vector<Eigen::VectorXd> values;  // values[i] = phi(lo + i / 2^level)

  int components() const { return a.rows(); }
  // phi(num / 2^lvl) for lvl <= level; zero outside [lo, hi)
  Eigen::VectorXd at(long num, int lvl) const;
  double refinement_residual() const;
};

RefinableVector eval_dyadic(const FilterBank& a, int level = 12);

// vec phi on [0,1]: entries phi(.-j) chi_[0,1] for j = jlo..jhi, r components each.
struct UnitVec {
  FilterBank a;
  int r = 1, jlo = 0, jhi = 0;
  QMatrix A0, A1;
  QMatrix deps;             // rows c with c vec == 0 on [0,1]
  std::vector<QMatrix> mu;  // mu[p] = int_0^1 x^p vec(x) dx
  MomentData moments;
  int sr = 0;
  int dim() const { return (jhi - jlo + 1) * r; }
  int index(int j, int comp) const { return (j - jlo) * r + comp; }
  // row vector w with w vec(x) = x^p on [0,1]
  QMatrix poly_row(int p) const;
};

UnitVec unit_vec(const FilterBank& a, int moments_up_to = 4);

// int_0^inf x^p phi(x - k) dx, r x 1
QMatrix halfline_moment(const UnitVec& u, int k, int p);

// Gram entries <phi_i^(m), tphi_j^(m)(.-k)>.
struct GramTable {
  int r = 1, rt = 1, m = 0;
  std::map<int, QMatrix> entries;
  QMatrix at(int k) const;
  Q entry(int i, int j, int k) const { return at(k)(i, j); }
  int kmin() const { return entries.empty() ? 0 : entries.begin()->first; }
  int kmax() const { return entries.empty() ? -1 : entries.rbegin()->first; }
  std::string to_csv() const;
};

// M = <vec phi^(m), vec tphi^(m)> on [0,1] from the self-consistency system.
QMatrix unit_gram(const UnitVec& u, const UnitVec& ut, int m);
GramTable gram_from_unit(const UnitVec& u, const UnitVec& ut, const QMatrix& M, int m);
GramTable gram_integrals(const FilterBank& a, const FilterBank& ta, int m);

FilterBank derivative_gram_symbol(const GramTable& t);

struct StabilityReport {
  bool stable = false;
  double min_eig = 0, max_eig = 0;
};
StabilityReport stability_check(const GramTable& t, int samples = 1024, double tol = 1e-10);

struct RieszBounds {
  double lower = 0, upper = 0;
  double ratio() const { return upper / lower; }
};
// Extreme eigenvalues of the unit-diagonal scaled Gram; throws if not positive definite.
RieszBounds riesz_bound_estimate(const Eigen::MatrixXd& gram);

// Closed-form piecewise polynomials for B-spline and Hermite cubic masks (empty otherwise).
std::vector<PiecewiseForm<double>> closed_form_generator(const FilterBank& a);
template <class R>
std::vector<PiecewiseForm<R>> generator_forms(const FilterBank& a);
// <phi_i^(m), tphi_j^(m)(.-k)> by exact piecewise integration.
std::map<int, Eigen::MatrixXd> closed_form_gram(const std::vector<PiecewiseForm<double>>& phi,
                                                const std::vector<PiecewiseForm<double>>& tphi, int m,
                                                int kmin, int kmax);

}  // namespace wavegal
