#pragma once

#include "wavegal/filters.hpp"
#include "wavegal/piecewise.hpp"
#include "wavegal/refinable.hpp"

#include <Eigen/Sparse>

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace wavegal {

// f(x) = sum_k c_k . phi(2^scale x - k), truncated to the domain in use.
// c_k is a row of r entries, stored flat at (k - lo) * r + i.
struct Combo {
  int scale = 0;
  int lo = 0;
  int r = 1;
  std::vector<Q> c;

  bool empty() const { return c.empty(); }
  int hi() const { return lo + int(c.size()) / r - 1; }
  Q at(int k, int i) const;
  void add(int k, int i, const Q& v);
  void trim();
  Combo scaled(const Q& s) const;
  Combo& operator+=(const Combo& o);
  bool operator==(const Combo& o) const;  // both trimmed
  std::string str() const;
};

Combo unit_combo(int scale, int k, int comp, int r);
// same function at scale + 1 through the refinement mask
Combo refine(const Combo& f, const FilterBank& a);
Combo refine_to(const Combo& f, const FilterBank& a, int scale);
// f(2^j x) for f given at scale s: same taps, scale s + j
Combo dilate(const Combo& f, int j);
// g(x) = f(2^j (L - x)) for f in the reflected family: shifts k -> 2^{s+j} L - k
Combo reflect_place(const Combo& f, int j, int L);
// Stack of the combo as a row over shift coordinates [lo, hi] (length (hi-lo+1) r).
QMatrix combo_row(const Combo& f, int lo, int hi);

// Refinable generator with the data the interval constructions need.
struct Family {
  FilterBank a;
  int r = 1;
  int lphi = 0, hphi = 0;  // fsupp
  UnitVec u;
  MomentData moments;
  int sr = 0;
};
Family make_family(const FilterBank& a);

// Exact <f^(m), g^(m)> for f in family u, g in family v, on [0, L] or [0, inf) when L <= 0.
class CrossGram {
 public:
  CrossGram() = default;
  CrossGram(const UnitVec& u, const UnitVec& v, int m);
  Q inner(const Combo& f, const Combo& g, int L = 0) const;
  const QMatrix& unit() const { return M_; }
  int order() const { return m_; }
  const UnitVec& left() const { return u_; }
  const UnitVec& right() const { return v_; }

 private:
  UnitVec u_, v_;
  int m_ = 0;
  QMatrix M_;
};

// Boundary vector function in refinement form:
//   f = 2 AL f0(2.) + 2 sum_{k >= n} A(k) phi(2.-k),
// where f0 is the boundary scaling vector (f itself for phi^L, phi^L for psi^L).
struct BoundaryFunction {
  std::string name;
  int n_offset = 0;           // first interior shift
  std::vector<int> cshifts;   // shifts of the truncated entries (decreasing), phi^L kinds only
  QMatrix coeffs;             // A_c over the truncated entries (#f x #cshifts*r)
  QMatrix AL;
  std::map<int, QMatrix> A;   // k -> #f x r
  std::vector<Combo> funcs;   // one combo per entry
  int count() const { return int(funcs.size()); }
  int m_upper() const { return A.empty() ? n_offset - 1 : A.rbegin()->first; }
  // Display row: [AL row | A(n) row | A(n+1) row ...].
  std::vector<Q> display_row(int i) const;
};

struct PhiLOptions {
  std::vector<int> exponents;     // p(x) = [x^j0, ...]
  std::optional<int> n_phi;
};
BoundaryFunction construct_phiL(const Family& f, const CrossGram& ff, const PhiLOptions& opt);

struct DualPhiLOptions {
  int m_dual = 0;                 // exponents 0..m_dual-1
  std::optional<int> n_dual;
};
struct DualPhiLResult {
  BoundaryFunction tphiL;
  bool used_fallback = false;
  QMatrix ringphiL_gram;          // <tphi^c, ringphi^L>
};
DualPhiLResult construct_dual_phiL(const Family& primal, const Family& dual, const BoundaryFunction& phiL,
                                   const CrossGram& dp, const CrossGram& dd, const DualPhiLOptions& opt);

struct PsiLOptions {
  std::optional<int> n_psi;
  // Refinement rows of psi^L as displayed: [BL row | B(n_phi) | B(n_phi+1) ...]; empty selects the heuristic.
  std::vector<std::vector<Q>> rows;
};
struct PsiLResult {
  BoundaryFunction psiL;
  int n_psi = 0, m_phi = 0, k_phi = 0;
  int x_dim = 0, y_rows = 0;
  QMatrix X, U, V;
};
PsiLResult construct_psiL(const Family& primal, const Family& dual, const FilterBank& b, const FilterBank& tb,
                          const BoundaryFunction& phiL, const BoundaryFunction& tphiL, const CrossGram& pd,
                          const PsiLOptions& opt);

struct DualPsiLResult {
  BoundaryFunction tpsiL;
  int n_dual_psi = 0, m_dual_phi = 0;
  int conditions = 0;
};
DualPsiLResult construct_dual_psiL(const Family& primal, const Family& dual, const FilterBank& b, const FilterBank& tb,
                                   const BoundaryFunction& phiL, const BoundaryFunction& psiL, int n_psi,
                                   const BoundaryFunction& tphiL, const CrossGram& dp, std::optional<int> n_dual_psi);

// Everything built for one endpoint (left, or the reflected family for the right).
struct EndpointData {
  Family phi, tphi;
  FilterBank b, tb;
  CrossGram pp, pd, dp, dd;
  BoundaryFunction phiL, tphiL, psiL, tpsiL;
  int n_phi = 0, n_tphi = 0, n_psi = 0, n_tpsi = 0;
  bool has_dual = false;
  bool dual_fallback = false;
  PsiLResult psi_info;
};

struct EndpointSpec {
  std::vector<int> exponents;
  int m_dual = 0;
  std::optional<int> n_phi, n_tphi, n_psi, n_tpsi;
  std::vector<std::vector<Q>> psi_rows;
  bool build_dual = true;
};

EndpointData build_endpoint(const BiorthPair& pair, const EndpointSpec& spec);
BiorthPair reflect_pair(const BiorthPair& p);

struct LevelBounds {
  int J0 = 0, tJ0 = 0;
};
// Smallest coarse levels on [0, L] (searched up to jmax).
LevelBounds minimal_levels(const EndpointData& left, const EndpointData& right, int L, int jmax = 12);

enum class ElementKind { Left, Interior, Right };
enum class ElementRole { Scaling, Wavelet };

struct Element {
  ElementKind kind = ElementKind::Interior;
  ElementRole role = ElementRole::Scaling;
  int level = 0;   // j
  int shift = 0;   // k for interior, component index for boundary
  int comp = 0;
  Combo combo;     // unnormalized, in generator coordinates on [0, L]
  double lo = 0, hi = 0;  // support endpoints
};

struct BasisSpec {
  std::string name;
  std::string kind = "biorthogonal";  // or "hermite_biharmonic"
  BiorthPair pair;
  int domain = 1;
  EndpointSpec left, right;
  int coarse = 2, finest = 6;
  static BasisSpec from_json(const nlohmann::json& j, const std::string& base_dir);
};
BasisSpec load_basis_spec(const std::string& path);

class IntervalBasis {
 public:
  // Levels J..N-1 of wavelets on top of Phi_J (J >= J0; duals built when J >= tJ0).
  static IntervalBasis build(const BasisSpec& spec, int J, int N);
  static IntervalBasis hermite_biharmonic(int N);

  int size() const { return int(elements_.size()); }
  const std::vector<Element>& elements() const { return elements_; }
  const std::vector<Element>& dual_elements() const { return dual_; }
  bool has_dual() const { return !dual_.empty(); }
  int coarse() const { return J_; }
  int finest() const { return N_; }
  int domain() const { return L_; }
  bool hermite() const { return hermite_; }
  const Family& primal_family() const { return *fam_; }
  const Family* dual_family() const { return dfam_.get(); }
  const LevelBounds& bounds() const { return bounds_; }
  const EndpointData* left() const { return left_.get(); }
  const EndpointData* right() const { return right_.get(); }

  // Elements of Phi_j and Psi_j (unnormalized combos) for J <= j.
  std::vector<Element> scaling_level(int j, bool dual = false) const;
  std::vector<Element> wavelet_level(int j, bool dual = false) const;

  // Phi_j = A_j Phi_{j+1}, Psi_j = B_j Phi_{j+1}; stacked P_j = [A_j; B_j].
  QMatrix refinement(int j, bool dual = false) const;

  // Analysis / synthesis between single-scale Phi_N coefficients and the multilevel ones
  // (element order of elements()), for elements scaled by 2^{j/2}.
  Eigen::VectorXd analysis(const Eigen::VectorXd& single) const;
  Eigen::VectorXd synthesis(const Eigen::VectorXd& multi) const;
  // Coefficients over the scaled Phi_N of a combo given at scale <= N.
  Eigen::VectorXd single_scale(const Combo& f) const;

  // 2^{j/2} for biorthogonal elements, 1 for the Hermite ones
  double scale_factor(int id) const;
  // scaled element values at x (zero outside [0, L])
  double evaluate(int id, double x) const;
  std::vector<double> evaluate(int id, const std::vector<double>& xs) const;
  // closed form of an element when the generator is a spline or Hermite cubic
  std::optional<PiecewiseForm<double>> piecewise(int id, bool scaled = true) const;

  std::string element_table_csv() const;
  nlohmann::json refinement_json(int j) const;

 private:
  std::vector<Element> elements_, dual_;
  int J_ = 0, N_ = 0, L_ = 1;
  bool hermite_ = false;
  std::shared_ptr<Family> fam_, dfam_;
  std::shared_ptr<EndpointData> left_, right_;
  LevelBounds bounds_;
  std::vector<PiecewiseForm<double>> closed_;
  std::shared_ptr<RefinableVector> samples_;
  std::vector<Element> level_elements(int j, bool wavelet, bool dual) const;
  struct SparseRows {
    int cols = 0;
    std::vector<std::vector<std::pair<int, Q>>> rows;
  };
  // rows of `fs` over the elements `basis` of one finer level (exact)
  SparseRows express(const std::vector<Element>& fs, const std::vector<Element>& basis, bool dual) const;
  SparseRows refinement_rows(int j, bool dual) const;
};

std::string kind_name(ElementKind k);

}  // namespace wavegal
