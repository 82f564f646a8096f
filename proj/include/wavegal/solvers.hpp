#pragma once

#include "wavegal/assembly.hpp"

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace wavegal {

// polynomial (global x, rational coefficients) on [a, b]
struct SourcePiece {
  Q a, b;
  std::vector<Q> poly;
};

// -u'' - k^2 u = f on (0,1), u(0) = 0, u'(1) - i k u(1) = 0
struct HelmholtzProblem {
  std::string name;
  Q k = 1;
  std::vector<Q> partition{Q(0), Q(1)};  // breakpoints of the special-wave pieces
  std::vector<SourcePiece> source;
  Q scale = 1, scale_sqrt = 1;  // f is multiplied by scale * sqrt(scale_sqrt)

  int pieces() const { return int(partition.size()) - 1; }
  void validate() const;
  template <class R>
  PiecewiseForm<R> source_form() const;
  static HelmholtzProblem from_json(const nlohmann::json& j);
};
HelmholtzProblem load_helmholtz_problem(const std::string& path);

// u^{(4)} = f, u = u' = 0 at both ends; exact solution sin(A pi x)(x - x^2), f = u''''
struct BiharmonicProblem {
  std::string name;
  Q frequency_pi = 50;
  template <class R>
  PiecewiseForm<R> solution_form() const;
  template <class R>
  PiecewiseForm<R> source_form() const;
  static BiharmonicProblem from_json(const nlohmann::json& j);
};
BiharmonicProblem load_biharmonic_problem(const std::string& path);

// "helmholtz" or "biharmonic"
std::string problem_type(const std::string& path);

template <class R>
struct SpecialWave {
  int sign = 1;   // e^{+ikx} or e^{-ikx}
  int piece = 0;
  Cx<R> l1, l2;
  PiecewiseForm<R> form;
};
template <class R>
std::vector<SpecialWave<R>> build_special_waves(const HelmholtzProblem& p);

// g - (l1 + l2 x) on [lg, 1] with the result vanishing at lg and meeting the radiation condition
template <class R>
struct BoundaryCorrection {
  Cx<R> l1, l2;
  Q lg;
};
template <class R>
BoundaryCorrection<R> radiation_correction(const PiecewiseForm<R>& g, const Q& lg, const R& k);
template <class R>
PiecewiseForm<R> apply_correction(const PiecewiseForm<R>& g, const BoundaryCorrection<R>& c);

struct HelmholtzOptions {
  bool enrich = true;
  bool precondition = true;
  LoadPolicy load = LoadPolicy::Exact;
  // 2x2 mixing (row major) of the right boundary wavelet pair at every level, before and after the modification
  std::array<std::complex<double>, 4> pre{1, 0, 0, 1}, post{1, 0, 0, 1};
};

// Element forms of the basis with every element that violates the radiation condition corrected.
template <class R>
std::vector<PiecewiseForm<R>> modify_right_boundary(const IntervalBasis& b, const R& k, const HelmholtzOptions& opt,
                                                    std::vector<int>* modified = nullptr);

template <class R>
struct SolutionField {
  std::vector<Cx<R>> coeffs;
  std::vector<PiecewiseForm<R>> elements;
  PiecewiseForm<R> u;
  int N = 0, M = 0;
  std::string problem;
  Cx<R> eval(const R& x) const { return u.eval(x); }
};

template <class R>
struct HelmholtzResult {
  SolutionField<R> field;
  ConditioningReport cond;
  int n_basis = 0, n_waves = 0;
  double residual = 0;  // relative, preconditioned system
};

// Galerkin system for the given trial/test forms; rows are test functions.
template <class R>
GalerkinSystem<R> helmholtz_system(const std::vector<PiecewiseForm<R>>& g, const R& k, const PiecewiseForm<R>& f,
                                   LoadPolicy load = LoadPolicy::Exact);

template <class R>
HelmholtzResult<R> solve_helmholtz(const HelmholtzProblem& p, const IntervalBasis& b, const HelmholtzOptions& opt = {});
template <class R>
HelmholtzResult<R> solve_helmholtz(const HelmholtzProblem& p, int N, const HelmholtzOptions& opt = {});

// Hats phi(2^N x - k), k = 1..2^N - 1, the last one corrected for the radiation condition.
template <class R>
HelmholtzResult<R> fem_baseline(const HelmholtzProblem& p, int N, bool precondition = true);

// Exact solution: particular polynomial plus e^{+-ikx} per source segment, C^1 at the joints.
template <class R>
PiecewiseForm<R> transmission_solution(const HelmholtzProblem& p);

struct FDResult {
  std::vector<std::complex<double>> U;  // U[n-1] ~ u(n h), n = 1..H
  double h = 0;
  double discrete_error = 0;       // percent
  double interpolation_error = 0;  // percent
  int size() const { return int(U.size()); }
};
// Centred differences, ghost-point closure of u'(1) - ik u(1) = g.
std::vector<std::complex<double>> fd_solve(double k, const std::function<std::complex<double>(double)>& f, int H,
                                           std::complex<double> g = 0);
double fd_discrete_error(const std::vector<std::complex<double>>& U, const std::function<std::complex<double>(double)>& u);
// hat interpolant of U (with U(0) = 0) as a piecewise form
PiecewiseForm<double> fd_interpolant(const std::vector<std::complex<double>>& U);
FDResult fd_baseline(const HelmholtzProblem& p, int NFD, const PiecewiseForm<double>& exact);

template <class R>
struct BiharmonicResult {
  SolutionField<R> field;
  ConditioningReport cond;
  double identity_defect = 0;  // max row sum of |S - I|
  int size = 0;
};
template <class R>
BiharmonicResult<R> solve_biharmonic(const BiharmonicProblem& p, int N);

// 100 ||uN - u|| / ||u||
template <class R>
R relative_L2_error(const PiecewiseForm<R>& uN, const PiecewiseForm<R>& u);

// poly(x) sin(w x) as a piecewise form on [a, b]
template <class R>
PiecewiseForm<R> poly_times_sin(const Q& a, const Q& b, const std::vector<Cx<R>>& poly, const R& w);

}  // namespace wavegal
