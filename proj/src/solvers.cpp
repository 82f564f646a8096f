#include "wavegal/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

namespace wavegal {

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open problem file " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

template <class R>
std::vector<Cx<R>> cx_poly(const std::vector<Q>& p, const R& s) {
  std::vector<Cx<R>> out;
  for (const auto& q : p) out.emplace_back(to_real<R>(q) * s);
  return out;
}

std::vector<Q> poly_add(std::vector<Q> a, const std::vector<Q>& b) {
  if (a.size() < b.size()) a.resize(b.size(), Q(0));
  for (size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

std::vector<Q> poly_deriv(const std::vector<Q>& a) {
  std::vector<Q> d;
  for (size_t i = 1; i < a.size(); ++i) d.push_back(a[i] * int(i));
  return d;
}

Q poly_eval(const std::vector<Q>& a, const Q& x) {
  Q s = 0;
  for (size_t i = a.size(); i-- > 0;) s = s * x + a[i];
  return s;
}

template <class R>
R sqrt_r(const R& x) {
  using std::sqrt;
  return sqrt(x);
}

template <class R>
Cx<R> ik_of(const R& k) {
  return Cx<R>(R(0), k);
}

template <class R>
Cx<R> solve2_det(const Cx<R>& a, const Cx<R>& b, const Cx<R>& c, const Cx<R>& d) {
  return a * d - b * c;
}

// last piece end, first piece start
template <class R>
std::pair<double, double> support_of(const PiecewiseForm<R>& f) {
  if (f.empty()) return {0, 0};
  return {qd(f.pieces().front().p), qd(f.pieces().back().q)};
}

template <class R>
R norm_of(const PiecewiseForm<R>& f) {
  return sqrt_r<R>(inner(f, f).re);
}

const BasisSpec& dirichlet_spec() {
  static BasisSpec s = load_basis_spec(std::string(WAVEGAL_DATA_DIR) + "/specs/cdf22_dirichlet.json");
  return s;
}

}  // namespace

void HelmholtzProblem::validate() const {
  if (k <= 0) throw std::invalid_argument("helmholtz problem: wave number must be positive");
  if (partition.size() < 2 || partition.front() != 0 || partition.back() != 1)
    throw std::invalid_argument("helmholtz problem: partition must run from 0 to 1");
  for (size_t i = 0; i + 1 < partition.size(); ++i)
    if (!(partition[i] < partition[i + 1]))
      throw std::invalid_argument("helmholtz problem: partition pieces must have positive length");
  Q prev = 0;
  for (const auto& s : source) {
    if (!(s.a < s.b) || s.a < prev || s.b > 1)
      throw std::invalid_argument("helmholtz problem: source pieces must be ordered, disjoint and inside [0,1]");
    prev = s.b;
  }
  if (scale_sqrt < 0) throw std::invalid_argument("helmholtz problem: negative scale_sqrt");
}

template <class R>
PiecewiseForm<R> HelmholtzProblem::source_form() const {
  R s = to_real<R>(scale) * sqrt_r<R>(to_real<R>(scale_sqrt));
  PiecewiseForm<R> f;
  for (const auto& pc : source) f.append(PiecewiseForm<R>::polynomial(pc.a, pc.b, cx_poly<R>(pc.poly, s)));
  return f;
}

HelmholtzProblem HelmholtzProblem::from_json(const nlohmann::json& j) {
  HelmholtzProblem p;
  p.name = j.value("name", "helmholtz");
  p.k = parse_q(j.at("k"));
  if (j.contains("partition")) {
    p.partition.clear();
    for (const auto& v : j.at("partition")) p.partition.push_back(parse_q(v));
  }
  if (j.contains("source")) {
    const auto& s = j.at("source");
    if (s.contains("scale")) p.scale = parse_q(s.at("scale"));
    if (s.contains("scale_sqrt")) p.scale_sqrt = parse_q(s.at("scale_sqrt"));
    for (const auto& pc : s.at("pieces")) {
      SourcePiece sp;
      sp.a = parse_q(pc.at("interval").at(0));
      sp.b = parse_q(pc.at("interval").at(1));
      for (const auto& c : pc.at("poly")) sp.poly.push_back(parse_q(c));
      p.source.push_back(sp);
    }
  }
  p.validate();
  return p;
}

HelmholtzProblem load_helmholtz_problem(const std::string& path) {
  auto j = read_json(path);
  if (j.value("type", "helmholtz") != "helmholtz") throw std::invalid_argument(path + ": not a helmholtz problem");
  return HelmholtzProblem::from_json(j);
}

template <class R>
PiecewiseForm<R> poly_times_sin(const Q& a, const Q& b, const std::vector<Cx<R>>& poly, const R& w) {
  // sin = (e^{iwx} - e^{-iwx}) / 2i
  std::vector<Cx<R>> p1, p2;
  for (const auto& c : poly) {
    p1.push_back(c * Cx<R>(R(0), R(-0.5)));
    p2.push_back(c * Cx<R>(R(0), R(0.5)));
  }
  return PiecewiseForm<R>::linear_combination(
      {PiecewiseForm<R>::poly_exp(a, b, p1, w), PiecewiseForm<R>::poly_exp(a, b, p2, -w)}, {Cx<R>(1), Cx<R>(1)});
}

template <class R>
PiecewiseForm<R> BiharmonicProblem::solution_form() const {
  R w = to_real<R>(frequency_pi) * pi_value<R>();
  return poly_times_sin<R>(Q(0), Q(1), {Cx<R>(0), Cx<R>(1), Cx<R>(-1)}, w);
}

template <class R>
PiecewiseForm<R> BiharmonicProblem::source_form() const {
  return solution_form<R>().derivative().derivative().derivative().derivative();
}

BiharmonicProblem BiharmonicProblem::from_json(const nlohmann::json& j) {
  BiharmonicProblem p;
  p.name = j.value("name", "biharmonic");
  const auto& s = j.at("solution");
  if (s.value("kind", "") != "sin_bubble") throw std::invalid_argument("biharmonic problem: unknown solution kind");
  p.frequency_pi = parse_q(s.at("frequency_pi"));
  return p;
}

BiharmonicProblem load_biharmonic_problem(const std::string& path) {
  auto j = read_json(path);
  if (j.value("type", "") != "biharmonic") throw std::invalid_argument(path + ": not a biharmonic problem");
  return BiharmonicProblem::from_json(j);
}

std::string problem_type(const std::string& path) { return read_json(path).value("type", "helmholtz"); }

template <class R>
std::vector<SpecialWave<R>> build_special_waves(const HelmholtzProblem& p) {
  p.validate();
  R k = to_real<R>(p.k);
  Cx<R> ik = ik_of(k);
  std::vector<SpecialWave<R>> out;
  int M = p.pieces();
  for (int l = 0; l < M; ++l) {
    const Q& a = p.partition[size_t(l)];
    const Q& b = p.partition[size_t(l) + 1];
    R ar = to_real<R>(a), br = to_real<R>(b);
    for (int sign : {1, -1}) {
      R w = k * R(sign);
      Cx<R> ga = expi<R>(w * ar);
      // rows (c11 c12 | r1), (c21 c22 | r2) for (l1, l2)
      Cx<R> c11(1), c12(ar), c21, c22, r1 = ga, r2;
      if (l + 1 < M) {
        c21 = Cx<R>(1);
        c22 = Cx<R>(br);
        r2 = expi<R>(w * br);
      } else {
        Cx<R> g1 = expi<R>(w), d1 = Cx<R>(R(0), w) * g1;
        c21 = ik;
        c22 = ik - Cx<R>(1);
        r2 = ik * g1 - d1;
      }
      Cx<R> det = solve2_det(c11, c12, c21, c22);
      if (det.is_zero()) throw std::runtime_error("build_special_waves: singular correction system");
      SpecialWave<R> s;
      s.sign = sign;
      s.piece = l;
      s.l1 = (r1 * c22 - c12 * r2) / det;
      s.l2 = (c11 * r2 - c21 * r1) / det;
      s.form = PiecewiseForm<R>::linear_combination(
          {PiecewiseForm<R>::poly_exp(a, b, {Cx<R>(1)}, w), PiecewiseForm<R>::polynomial(a, b, {s.l1, s.l2})},
          {Cx<R>(1), Cx<R>(-1)});
      out.push_back(std::move(s));
    }
  }
  return out;
}

template <class R>
BoundaryCorrection<R> radiation_correction(const PiecewiseForm<R>& g, const Q& lg, const R& k) {
  BoundaryCorrection<R> c;
  c.lg = lg;
  R l = to_real<R>(lg);
  Cx<R> ik = ik_of(k);
  Cx<R> gl = g.eval(l), g1 = g.eval(R(1)), d1 = g.derivative().eval(R(1));
  // l1 + l2 lg = g(lg);  ik l1 + (ik - 1) l2 = ik g(1) - g'(1)
  Cx<R> c11(1), c12(l), c21 = ik, c22 = ik - Cx<R>(1);
  Cx<R> r1 = gl, r2 = ik * g1 - d1;
  Cx<R> det = solve2_det(c11, c12, c21, c22);
  if (det.is_zero()) throw std::runtime_error("radiation_correction: singular correction system");
  c.l1 = (r1 * c22 - c12 * r2) / det;
  c.l2 = (c11 * r2 - c21 * r1) / det;
  return c;
}

template <class R>
PiecewiseForm<R> apply_correction(const PiecewiseForm<R>& g, const BoundaryCorrection<R>& c) {
  return PiecewiseForm<R>::linear_combination({g, PiecewiseForm<R>::polynomial(c.lg, Q(1), {c.l1, c.l2})},
                                              {Cx<R>(1), Cx<R>(-1)});
}

namespace {

template <class R>
Cx<R> to_cx(const std::complex<double>& z) {
  return Cx<R>(R(z.real()), R(z.imag()));
}

bool is_identity(const std::array<std::complex<double>, 4>& m) {
  return m[0] == 1.0 && m[1] == 0.0 && m[2] == 0.0 && m[3] == 1.0;
}

template <class R>
void mix_pair(std::vector<PiecewiseForm<R>>& f, int i, int j, const std::array<std::complex<double>, 4>& m) {
  auto a = f[size_t(i)], b = f[size_t(j)];
  f[size_t(i)] = PiecewiseForm<R>::linear_combination({a, b}, {to_cx<R>(m[0]), to_cx<R>(m[1])});
  f[size_t(j)] = PiecewiseForm<R>::linear_combination({a, b}, {to_cx<R>(m[2]), to_cx<R>(m[3])});
}

template <class R>
bool violates_radiation(const PiecewiseForm<R>& g) {
  if (g.empty() || g.pieces().back().q != 1) return false;
  return !g.eval(R(1)).is_zero() || !g.derivative().eval(R(1)).is_zero();
}

}  // namespace

template <class R>
std::vector<PiecewiseForm<R>> modify_right_boundary(const IntervalBasis& b, const R& k, const HelmholtzOptions& opt,
                                                    std::vector<int>* modified) {
  auto forms = element_forms<R>(b);
  // right boundary wavelet pairs per level, ordered by component
  std::map<int, std::vector<int>> pairs;
  for (int i = 0; i < b.size(); ++i) {
    const auto& e = b.elements()[size_t(i)];
    if (e.kind == ElementKind::Right && e.role == ElementRole::Wavelet) pairs[e.level].push_back(i);
  }
  if (!is_identity(opt.pre))
    for (auto& [lvl, ids] : pairs)
      if (ids.size() == 2) mix_pair(forms, ids[0], ids[1], opt.pre);
  for (int i = 0; i < b.size(); ++i) {
    auto& g = forms[size_t(i)];
    if (!violates_radiation(g)) continue;
    g = apply_correction(g, radiation_correction(g, g.pieces().front().p, k));
    if (modified) modified->push_back(i);
  }
  if (!is_identity(opt.post))
    for (auto& [lvl, ids] : pairs)
      if (ids.size() == 2) mix_pair(forms, ids[0], ids[1], opt.post);
  return forms;
}

template <class R>
GalerkinSystem<R> helmholtz_system(const std::vector<PiecewiseForm<R>>& g, const R& k, const PiecewiseForm<R>& f,
                                   LoadPolicy load) {
  int n = int(g.size());
  GalerkinSystem<R> s(n);
  std::vector<PiecewiseForm<R>> d;
  std::vector<Cx<R>> v1, d1;
  std::vector<std::pair<double, double>> supp;
  for (const auto& x : g) {
    d.push_back(x.derivative());
    v1.push_back(x.eval(R(1)));
    d1.push_back(d.back().eval(R(1)));
    supp.push_back(support_of(x));
  }
  Cx<R> k2(k * k);
  for (int l = 0; l < n; ++l)
    for (int m = l; m < n; ++m) {
      if (!(supp[size_t(l)].first < supp[size_t(m)].second && supp[size_t(m)].first < supp[size_t(l)].second)) continue;
      // int g_m conj(g_l) and the same for the derivatives
      Cx<R> mass = inner(g[size_t(m)], g[size_t(l)]);
      Cx<R> stiff = inner(d[size_t(m)], d[size_t(l)]);
      s(l, m) = stiff - k2 * mass;
      if (m != l) s(m, l) = conj(stiff) - k2 * conj(mass);
    }
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) {
      Cx<R> bt = d1[size_t(m)] * conj(v1[size_t(l)]);
      if (!bt.is_zero()) s(l, m) -= bt;
    }
  s.rhs = load_vector(g, f, load);
  return s;
}

namespace {

template <class R>
void normalize_derivative(std::vector<PiecewiseForm<R>>& g) {
  for (auto& x : g) {
    R nd = norm_of(x.derivative());
    if (!(nd > 0)) throw std::runtime_error("normalize: element with zero derivative");
    x = x.scaled(Cx<R>(R(1) / nd));
  }
}

template <class R>
double relative_residual(const GalerkinSystem<R>& s, const std::vector<Cx<R>>& c) {
  // residual in the preconditioned unknowns
  R num = 0, den = 0;
  for (int i = 0; i < s.n; ++i) {
    Cx<R> acc;
    for (int j = 0; j < s.n; ++j) {
      Cx<R> y = c[size_t(j)];
      if (!s.precond.empty()) y = y * Cx<R>(R(1) / s.precond[size_t(j)]);
      acc += s(i, j) * y;
    }
    num += norm2(acc - s.rhs[size_t(i)]);
    den += norm2(s.rhs[size_t(i)]);
  }
  if (den == 0) return to_double(sqrt_r<R>(num));
  return to_double(sqrt_r<R>(num / den));
}

template <class R>
HelmholtzResult<R> finish_helmholtz(GalerkinSystem<R> sys, std::vector<PiecewiseForm<R>> forms, int n_waves,
                                    bool precondition, const std::string& name, int N, int M) {
  HelmholtzResult<R> r;
  sys.mode = Normalization::UnitSeminorm;
  sys.normalization_note = "derivative norm 1";
  if (precondition) apply_diagonal_preconditioner(sys);
  Eigen::MatrixXcd A = sys.to_eigen();
  r.cond = n_waves > 0 ? schur_condition(A, n_waves) : condition_number(A);
  r.n_waves = n_waves;
  r.n_basis = sys.n - n_waves;
  if (r.cond.singular()) throw std::runtime_error("helmholtz: singular Galerkin system");
  auto c = solve_dense(sys);
  r.residual = relative_residual(sys, c);
  r.field.coeffs = c;
  r.field.u = PiecewiseForm<R>::linear_combination(forms, c);
  r.field.elements = std::move(forms);
  r.field.N = N;
  r.field.M = M;
  r.field.problem = name;
  return r;
}

}  // namespace

template <class R>
HelmholtzResult<R> solve_helmholtz(const HelmholtzProblem& p, const IntervalBasis& b, const HelmholtzOptions& opt) {
  p.validate();
  R k = to_real<R>(p.k);
  auto forms = modify_right_boundary<R>(b, k, opt);
  int nw = 0;
  if (opt.enrich) {
    for (auto& w : build_special_waves<R>(p)) forms.push_back(std::move(w.form));
    nw = 2 * p.pieces();
  }
  normalize_derivative(forms);
  auto sys = helmholtz_system(forms, k, p.source_form<R>(), opt.load);
  for (int i = 0; i < sys.n; ++i) sys.labels.push_back(i < sys.n - nw ? "wavelet" : "wave");
  return finish_helmholtz(std::move(sys), std::move(forms), nw, opt.precondition, p.name, b.finest(),
                          opt.enrich ? p.pieces() : 0);
}

template <class R>
HelmholtzResult<R> solve_helmholtz(const HelmholtzProblem& p, int N, const HelmholtzOptions& opt) {
  if (N < 2) throw std::invalid_argument("solve_helmholtz: N must be at least 2");
  IntervalBasis b = IntervalBasis::build(dirichlet_spec(), 2, N);
  return solve_helmholtz<R>(p, b, opt);
}

template <class R>
HelmholtzResult<R> fem_baseline(const HelmholtzProblem& p, int N, bool precondition) {
  p.validate();
  if (N < 1) throw std::invalid_argument("fem_baseline: N must be positive");
  R k = to_real<R>(p.k);
  auto hat = generator_forms<R>(cdf22_pair().a).at(0);
  std::vector<PiecewiseForm<R>> forms;
  int n = (1 << N) - 1;
  for (int i = 1; i <= n; ++i) forms.push_back(hat.affine(qpow2(N), Q(i)).restrict(Q(0), Q(1)));
  auto& last = forms.back();
  last = apply_correction(last, radiation_correction(last, last.pieces().front().p, k));
  normalize_derivative(forms);
  auto sys = helmholtz_system(forms, k, p.source_form<R>());
  return finish_helmholtz(std::move(sys), std::move(forms), 0, precondition, p.name, N, 0);
}

namespace {

// -p'' - k^2 p = f for polynomial f
std::vector<Q> particular(const std::vector<Q>& f, const Q& k) {
  Q k2 = k * k;
  std::vector<Q> p(f.size(), Q(0));
  for (size_t it = 0; it <= f.size() / 2 + 1; ++it) {
    std::vector<Q> rhs = poly_add(f, poly_deriv(poly_deriv(p)));
    for (auto& c : rhs) c = -c / k2;
    p = rhs;
  }
  return p;
}

}  // namespace

template <class R>
PiecewiseForm<R> transmission_solution(const HelmholtzProblem& p) {
  p.validate();
  std::vector<Q> cuts{Q(0), Q(1)};
  for (const auto& s : p.source) {
    cuts.push_back(s.a);
    cuts.push_back(s.b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  int P = int(cuts.size()) - 1;
  std::vector<std::vector<Q>> part(static_cast<size_t>(P));
  for (int i = 0; i < P; ++i)
    for (const auto& s : p.source)
      if (s.a <= cuts[size_t(i)] && cuts[size_t(i) + 1] <= s.b) part[size_t(i)] = particular(s.poly, p.k);

  R k = to_real<R>(p.k);
  R sc = to_real<R>(p.scale) * sqrt_r<R>(to_real<R>(p.scale_sqrt));
  Cx<R> ik = ik_of(k);
  auto pv = [&](int i, const Q& x) { return Cx<R>(to_real<R>(poly_eval(part[size_t(i)], x)) * sc); };
  auto dv = [&](int i, const Q& x) { return Cx<R>(to_real<R>(poly_eval(poly_deriv(part[size_t(i)]), x)) * sc); };

  // unknowns alpha_i (2i), beta_i (2i+1)
  GalerkinSystem<R> s(2 * P);
  int row = 0;
  s(row, 0) = 1;
  s(row, 1) = 1;
  s.rhs[size_t(row++)] = -pv(0, Q(0));
  for (int i = 1; i < P; ++i) {
    const Q& x = cuts[size_t(i)];
    Cx<R> E = expi<R>(k * to_real<R>(x)), Ei = Cx<R>(1) / E;
    s(row, 2 * (i - 1)) = E;
    s(row, 2 * (i - 1) + 1) = Ei;
    s(row, 2 * i) = -E;
    s(row, 2 * i + 1) = -Ei;
    s.rhs[size_t(row++)] = pv(i, x) - pv(i - 1, x);
    s(row, 2 * (i - 1)) = ik * E;
    s(row, 2 * (i - 1) + 1) = -ik * Ei;
    s(row, 2 * i) = -ik * E;
    s(row, 2 * i + 1) = ik * Ei;
    s.rhs[size_t(row++)] = dv(i, x) - dv(i - 1, x);
  }
  Cx<R> E1 = expi<R>(k);
  s(row, 2 * P - 1) = Cx<R>(R(-2)) * ik / E1;
  s.rhs[size_t(row)] = -(dv(P - 1, Q(1)) - ik * pv(P - 1, Q(1)));
  auto c = solve_dense(s);

  PiecewiseForm<R> u;
  for (int i = 0; i < P; ++i) {
    const Q& a = cuts[size_t(i)];
    const Q& b = cuts[size_t(i) + 1];
    std::vector<PiecewiseForm<R>> parts{PiecewiseForm<R>::poly_exp(a, b, {c[size_t(2 * i)]}, k),
                                        PiecewiseForm<R>::poly_exp(a, b, {c[size_t(2 * i + 1)]}, -k)};
    if (!part[size_t(i)].empty()) parts.push_back(PiecewiseForm<R>::polynomial(a, b, cx_poly<R>(part[size_t(i)], sc)));
    u.append(PiecewiseForm<R>::linear_combination(parts, std::vector<Cx<R>>(parts.size(), Cx<R>(1))));
  }
  return u;
}

std::vector<std::complex<double>> fd_solve(double k, const std::function<std::complex<double>(double)>& f, int H,
                                           std::complex<double> g) {
  if (H < 2) throw std::invalid_argument("fd_solve: need at least two intervals");
  double h = 1.0 / H, h2 = h * h;
  using C = std::complex<double>;
  const C ik(0, k);
  // tridiagonal rows n = 1..H: sub, diag, sup, rhs
  const size_t Hs = static_cast<size_t>(H);
  std::vector<C> sub(Hs), dia(Hs), sup(Hs), rhs(Hs);
  for (int n = 1; n < H; ++n) {
    sub[size_t(n - 1)] = -1 / h2;
    dia[size_t(n - 1)] = 2 / h2 - k * k;
    sup[size_t(n - 1)] = -1 / h2;
    rhs[size_t(n - 1)] = f(n * h);
  }
  // ghost U_{H+1} = U_{H-1} + 2h (ik U_H + g)
  sub[size_t(H - 1)] = -2 / h2;
  dia[size_t(H - 1)] = 2 / h2 - 2.0 * ik / h - k * k;
  rhs[size_t(H - 1)] = f(1.0) + 2.0 * g / h;
  // Thomas sweep
  for (int i = 1; i < H; ++i) {
    if (std::abs(dia[size_t(i - 1)]) == 0) throw std::runtime_error("fd_solve: singular discrete system");
    C w = sub[size_t(i)] / dia[size_t(i - 1)];
    dia[size_t(i)] -= w * sup[size_t(i - 1)];
    rhs[size_t(i)] -= w * rhs[size_t(i - 1)];
  }
  if (std::abs(dia[size_t(H - 1)]) == 0) throw std::runtime_error("fd_solve: singular discrete system");
  std::vector<C> U(Hs);
  U[size_t(H - 1)] = rhs[size_t(H - 1)] / dia[size_t(H - 1)];
  for (int i = H - 2; i >= 0; --i) U[size_t(i)] = (rhs[size_t(i)] - sup[size_t(i)] * U[size_t(i + 1)]) / dia[size_t(i)];
  return U;
}

double fd_discrete_error(const std::vector<std::complex<double>>& U, const std::function<std::complex<double>(double)>& u) {
  double num = 0, den = 0, h = 1.0 / double(U.size());
  for (size_t n = 1; n <= U.size(); ++n) {
    std::complex<double> v = u(double(n) * h);
    num += std::norm(v - U[n - 1]);
    den += std::norm(v);
  }
  if (den == 0) throw std::invalid_argument("fd_discrete_error: exact solution vanishes on the grid");
  return 100 * std::sqrt(num / den);
}

PiecewiseForm<double> fd_interpolant(const std::vector<std::complex<double>>& U) {
  using PF = PiecewiseForm<double>;
  int H = int(U.size());
  PF out;
  std::complex<double> prev = 0;
  double h = 1.0 / H;
  for (int n = 1; n <= H; ++n) {
    std::complex<double> cur = U[size_t(n - 1)], slope = (cur - prev) / h;
    out.append(PF::local(Q(n - 1, H), Q(n, H), {Cx<double>(prev.real(), prev.imag()), Cx<double>(slope.real(), slope.imag())}));
    prev = cur;
  }
  return out;
}

FDResult fd_baseline(const HelmholtzProblem& p, int NFD, const PiecewiseForm<double>& exact) {
  p.validate();
  if (NFD < 1 || NFD > 24) throw std::invalid_argument("fd_baseline: grid exponent out of range");
  FDResult r;
  int H = 1 << NFD;
  r.h = 1.0 / H;
  auto f = p.source_form<double>();
  // nodes on a jump of f take the mean of the one-sided limits
  auto sample = [&](double x) {
    Q xq = Q(long(std::lround(x * H)), H);
    Q d = Q(1, 4 * H);
    std::complex<double> left = to_std(f.restrict(xq - d, xq).eval(x));
    if (xq == 1) return left;
    return 0.5 * (left + to_std(f.restrict(xq, xq + d).eval(x)));
  };
  r.U = fd_solve(qd(p.k), sample, H);
  r.discrete_error = fd_discrete_error(r.U, [&](double x) { return to_std(exact.eval(x)); });
  r.interpolation_error = relative_L2_error(fd_interpolant(r.U), exact);
  return r;
}

template <class R>
BiharmonicResult<R> solve_biharmonic(const BiharmonicProblem& p, int N) {
  BiharmonicResult<R> r;
  IntervalBasis h = IntervalBasis::hermite_biharmonic(N);
  auto forms = element_forms<R>(h);
  for (auto& g : forms) {
    R n2 = norm_of(g.derivative().derivative());
    g = g.scaled(Cx<R>(R(1) / n2));
  }
  auto S = stiffness_matrix(h, 2, Normalization::UnitSeminorm);
  Eigen::MatrixXd dev = Eigen::MatrixXd(S.matrix) - Eigen::MatrixXd::Identity(S.size(), S.size());
  r.identity_defect = dev.cwiseAbs().rowwise().sum().maxCoeff();
  r.cond = condition_number(S.matrix);
  r.size = h.size();
  // identity stiffness: the coefficients are the load entries
  auto c = load_vector(forms, p.source_form<R>());
  r.field.coeffs = c;
  r.field.u = PiecewiseForm<R>::linear_combination(forms, c);
  r.field.elements = std::move(forms);
  r.field.N = N;
  r.field.problem = p.name;
  return r;
}

template <class R>
R relative_L2_error(const PiecewiseForm<R>& uN, const PiecewiseForm<R>& u) {
  R nu = u.l2_norm();
  if (nu == 0) throw std::invalid_argument("relative_L2_error: exact solution has zero norm");
  return R(100) * (uN - u).l2_norm() / nu;
}

#define WAVEGAL_SOLVERS_INSTANTIATE(R)                                                                              \
  template PiecewiseForm<R> HelmholtzProblem::source_form<R>() const;                                              \
  template PiecewiseForm<R> BiharmonicProblem::solution_form<R>() const;                                           \
  template PiecewiseForm<R> BiharmonicProblem::source_form<R>() const;                                             \
  template std::vector<SpecialWave<R>> build_special_waves<R>(const HelmholtzProblem&);                            \
  template BoundaryCorrection<R> radiation_correction<R>(const PiecewiseForm<R>&, const Q&, const R&);            \
  template PiecewiseForm<R> apply_correction<R>(const PiecewiseForm<R>&, const BoundaryCorrection<R>&);           \
  template std::vector<PiecewiseForm<R>> modify_right_boundary<R>(const IntervalBasis&, const R&,                  \
                                                                  const HelmholtzOptions&, std::vector<int>*);     \
  template GalerkinSystem<R> helmholtz_system<R>(const std::vector<PiecewiseForm<R>>&, const R&,                   \
                                                 const PiecewiseForm<R>&, LoadPolicy);                             \
  template HelmholtzResult<R> solve_helmholtz<R>(const HelmholtzProblem&, const IntervalBasis&,                    \
                                                 const HelmholtzOptions&);                                         \
  template HelmholtzResult<R> solve_helmholtz<R>(const HelmholtzProblem&, int, const HelmholtzOptions&);           \
  template HelmholtzResult<R> fem_baseline<R>(const HelmholtzProblem&, int, bool);                                 \
  template PiecewiseForm<R> transmission_solution<R>(const HelmholtzProblem&);                                     \
  template BiharmonicResult<R> solve_biharmonic<R>(const BiharmonicProblem&, int);                                 \
  template R relative_L2_error<R>(const PiecewiseForm<R>&, const PiecewiseForm<R>&);                               \
  template PiecewiseForm<R> poly_times_sin<R>(const Q&, const Q&, const std::vector<Cx<R>>&, const R&);

WAVEGAL_SOLVERS_INSTANTIATE(double)
WAVEGAL_SOLVERS_INSTANTIATE(Mp)

}  // namespace wavegal
