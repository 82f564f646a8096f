#pragma once

#include "wavegal/interval_basis.hpp"
#include "wavegal/piecewise.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace wavegal {

enum class Normalization { None, UnitL2, UnitSeminorm };
std::string normalization_name(Normalization n);
Normalization parse_normalization(const std::string& s);

// Elements written over phi(2^level x - k), k = lo .. lo + cols/r - 1, on [0, L].
struct Expansion {
  FilterBank a;
  int level = 0, lo = 0, r = 1, L = 1;
  Eigen::SparseMatrix<double, Eigen::RowMajor> S;
  int size() const { return int(S.rows()); }
};
Expansion expand(const IntervalBasis& b);
// phi(2^N x - k), k = 1 .. 2^N - 1 for the centred hat
Expansion fem_hats(int N);

// <phi^(m)(2^level . - k), phi^(m)(2^level . - k')> over the expansion coordinates.
Eigen::SparseMatrix<double> coordinate_gram(const Expansion& e, int m);

struct GramMatrix {
  Eigen::SparseMatrix<double> matrix;
  std::vector<double> scaling;  // element i was multiplied by scaling[i]
  Normalization mode = Normalization::None;
  int m = 0;
  int size() const { return int(matrix.rows()); }
};
GramMatrix gram_matrix(const Expansion& e, int m, Normalization mode);
GramMatrix mass_matrix(const IntervalBasis& b, Normalization mode);
GramMatrix stiffness_matrix(const IntervalBasis& b, int m, Normalization mode);

// Element i as an exact piecewise form (2^{j/2} scaling for biorthogonal elements).
template <class R>
PiecewiseForm<R> element_form(const IntervalBasis& b, int id);
template <class R>
std::vector<PiecewiseForm<R>> element_forms(const IntervalBasis& b);

enum class LoadPolicy { Exact, Gauss10 };
// <g_l, f> = int f conj(g_l)
template <class R>
std::vector<Cx<R>> load_vector(const std::vector<PiecewiseForm<R>>& elems, const PiecewiseForm<R>& f,
                               LoadPolicy policy = LoadPolicy::Exact);

// Dense complex system, row l = test function g_l, column n = trial g_n.
template <class R>
struct GalerkinSystem {
  int n = 0;
  std::vector<Cx<R>> a, rhs;
  std::vector<std::string> labels;
  std::vector<R> precond;  // D^{-1/2}, empty when not applied
  Normalization mode = Normalization::None;
  std::string normalization_note;

  GalerkinSystem() = default;
  explicit GalerkinSystem(int size) : n(size), a(size_t(size) * size_t(size)), rhs(size_t(size)) {}
  Cx<R>& operator()(int i, int j) { return a[size_t(i) * size_t(n) + size_t(j)]; }
  const Cx<R>& operator()(int i, int j) const { return a[size_t(i) * size_t(n) + size_t(j)]; }
  Eigen::MatrixXcd to_eigen() const;
};

// D^{-1/2} A D^{-1/2} with D = |diag A| (rhs scaled alongside); throws on a zero diagonal.
template <class R>
void apply_diagonal_preconditioner(GalerkinSystem<R>& s);
Eigen::MatrixXd apply_diagonal_preconditioner(const Eigen::MatrixXd& a);

// Gaussian elimination with partial pivoting; throws std::runtime_error when singular.
template <class R>
std::vector<Cx<R>> solve_dense(const GalerkinSystem<R>& s);

struct ConditioningReport {
  double kappa = 1;
  double kappa_star = std::numeric_limits<double>::quiet_NaN();
  double kappa_a4 = std::numeric_limits<double>::quiet_NaN();
  double smin = 0, smax = 0;
  std::string method;
  int size = 0, block = 0;
  bool singular() const { return !std::isfinite(kappa); }
};

ConditioningReport condition_number(const Eigen::MatrixXd& a);
ConditioningReport condition_number(const Eigen::MatrixXcd& a);
// dense eigenvalues up to dense_limit, Lanczos beyond (symmetric input)
ConditioningReport condition_number(const Eigen::SparseMatrix<double>& a, int dense_limit = 1024);
// kappa of A1 - A2 A4^{-1} A3 for the trailing n2 x n2 block A4
ConditioningReport schur_condition(const Eigen::MatrixXcd& a, int n2);

struct ExtremeEigs {
  double lmin = 0, lmax = 0;
  int iterations = 0, factorizations = 0;
  bool bisection = false;  // an end was pinned by LDLT inertia counts
};
// symmetric positive definite input
ExtremeEigs extreme_eigenvalues(const Eigen::SparseMatrix<double>& a, double tol = 1e-10);

void write_matrix_market(std::ostream& os, const Eigen::SparseMatrix<double>& a);
void write_matrix_market(std::ostream& os, const Eigen::MatrixXcd& a);

std::string conditioning_csv_header();
std::string conditioning_csv_row(const std::string& basis, int N, Normalization mode, const ConditioningReport& r);

}  // namespace wavegal
