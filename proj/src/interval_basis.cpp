#include "wavegal/interval_basis.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace wavegal {

Q Combo::at(int k, int i) const {
  if (c.empty() || k < lo || k > hi()) return Q(0);
  return c[size_t((k - lo) * r + i)];
}

void Combo::add(int k, int i, const Q& v) {
  if (v == 0) return;
  if (c.empty()) {
    lo = k;
    c.assign(size_t(r), Q(0));
  } else if (k < lo) {
    c.insert(c.begin(), size_t((lo - k) * r), Q(0));
    lo = k;
  } else if (k > hi()) {
    c.resize(size_t((k - lo + 1) * r));
  }
  c[size_t((k - lo) * r + i)] += v;
}

void Combo::trim() {
  auto block_zero = [&](int k) {
    for (int i = 0; i < r; ++i)
      if (at(k, i) != 0) return false;
    return true;
  };
  while (!c.empty() && block_zero(lo)) {
    c.erase(c.begin(), c.begin() + r);
    ++lo;
  }
  while (!c.empty() && block_zero(hi())) c.resize(c.size() - size_t(r));
  if (c.empty()) lo = 0;
}

Combo Combo::scaled(const Q& s) const {
  Combo o = *this;
  for (auto& v : o.c) v *= s;
  o.trim();
  return o;
}

Combo& Combo::operator+=(const Combo& o) {
  if (o.empty()) return *this;
  if (empty()) {
    int keep = scale;
    *this = o;
    if (keep != o.scale && !c.empty()) scale = o.scale;
    return *this;
  }
  if (o.scale != scale || o.r != r) throw std::invalid_argument("Combo: scale mismatch in sum");
  for (int k = o.lo; k <= o.hi(); ++k)
    for (int i = 0; i < r; ++i) add(k, i, o.at(k, i));
  trim();
  return *this;
}

bool Combo::operator==(const Combo& o) const {
  if (empty() || o.empty()) return empty() && o.empty();
  return scale == o.scale && lo == o.lo && r == o.r && c == o.c;
}

std::string Combo::str() const {
  std::ostringstream os;
  os << "s=" << scale << " {";
  for (int k = lo; k <= hi() && !c.empty(); ++k)
    for (int i = 0; i < r; ++i) {
      Q v = at(k, i);
      if (v == 0) continue;
      os << " " << k;
      if (r > 1) os << "." << i;
      os << ":" << qstr(v);
    }
  os << " }";
  return os.str();
}

Combo unit_combo(int scale, int k, int comp, int r) {
  Combo f;
  f.scale = scale;
  f.r = r;
  f.add(k, comp, Q(1));
  return f;
}

Combo refine(const Combo& f, const FilterBank& a) {
  Combo g;
  g.scale = f.scale + 1;
  g.r = f.r;
  if (f.empty()) return g;
  for (int k = f.lo; k <= f.hi(); ++k) {
    QMatrix row(1, f.r);
    bool nz = false;
    for (int i = 0; i < f.r; ++i) {
      row(0, i) = f.at(k, i);
      nz = nz || row(0, i) != 0;
    }
    if (!nz) continue;
    for (int n = a.lo(); n <= a.hi(); ++n) {
      QMatrix t = row * a.tap(n);
      for (int i = 0; i < f.r; ++i) g.add(2 * k + n, i, t(0, i) * 2);
    }
  }
  g.trim();
  return g;
}

Combo refine_to(const Combo& f, const FilterBank& a, int scale) {
  if (scale < f.scale) throw std::invalid_argument("refine_to: target scale below combo scale");
  Combo g = f;
  while (g.scale < scale) g = refine(g, a);
  return g;
}

Combo dilate(const Combo& f, int j) {
  Combo g = f;
  g.scale += j;
  return g;
}

Combo reflect_place(const Combo& f, int j, int L) {
  Combo g;
  g.scale = f.scale + j;
  g.r = f.r;
  long top = (1L << g.scale) * L;
  for (int k = f.lo; k <= f.hi() && !f.empty(); ++k)
    for (int i = 0; i < f.r; ++i) g.add(int(top - k), i, f.at(k, i));
  g.trim();
  return g;
}

QMatrix combo_row(const Combo& f, int lo, int hi) {
  QMatrix row(1, (hi - lo + 1) * f.r);
  for (int k = f.lo; k <= f.hi() && !f.empty(); ++k)
    for (int i = 0; i < f.r; ++i) {
      Q v = f.at(k, i);
      if (v == 0) continue;
      if (k < lo || k > hi) throw std::out_of_range("combo_row: shift outside coordinate range");
      row(0, (k - lo) * f.r + i) = v;
    }
  return row;
}

Family make_family(const FilterBank& a) {
  Family f;
  f.a = a;
  f.r = a.rows();
  f.u = unit_vec(a, 6);
  f.moments = f.u.moments;
  f.sr = f.u.sr;
  if (f.r == 1) {
    f.lphi = a.lo();
    f.hphi = a.hi();
  } else {
    auto rv = eval_dyadic(a, 6);
    f.lphi = rv.support_lo;
    f.hphi = rv.support_hi;
  }
  return f;
}

CrossGram::CrossGram(const UnitVec& u, const UnitVec& v, int m) : u_(u), v_(v), m_(m), M_(unit_gram(u, v, m)) {}

Q CrossGram::inner(const Combo& f, const Combo& g, int L) const {
  if (f.empty() || g.empty()) return Q(0);
  int S = std::max(f.scale, g.scale);
  Combo F = refine_to(f, u_.a, S), G = refine_to(g, v_.a, S);
  if (F.empty() || G.empty()) return Q(0);
  long tlo = std::max({0L, long(F.lo - u_.jhi), long(G.lo - v_.jhi)});
  long thi = std::min(long(F.hi() - u_.jlo), long(G.hi() - v_.jlo));
  if (L > 0) thi = std::min(thi, (1L << S) * L - 1);
  int r = u_.r, rt = v_.r;
  Q s = 0;
  for (long t = tlo; t <= thi; ++t) {
    int k1lo = std::max(F.lo, int(t) + u_.jlo), k1hi = std::min(F.hi(), int(t) + u_.jhi);
    int k2lo = std::max(G.lo, int(t) + v_.jlo), k2hi = std::min(G.hi(), int(t) + v_.jhi);
    for (int k1 = k1lo; k1 <= k1hi; ++k1)
      for (int i = 0; i < r; ++i) {
        const Q& x = F.at(k1, i);
        if (x == 0) continue;
        int row = u_.index(k1 - int(t), i);
        Q acc = 0;
        for (int k2 = k2lo; k2 <= k2hi; ++k2)
          for (int i2 = 0; i2 < rt; ++i2) {
            const Q& y = G.at(k2, i2);
            if (y == 0) continue;
            const Q& mv = M_(row, v_.index(k2 - int(t), i2));
            if (mv != 0) acc += mv * y;
          }
        s += x * acc;
      }
  }
  return s * qpow2(S * (2 * m_ - 1));
}

std::vector<Q> BoundaryFunction::display_row(int i) const {
  std::vector<Q> row;
  for (int c = 0; c < AL.cols(); ++c) row.push_back(AL(i, c));
  for (const auto& [k, m] : A)
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
  return row;
}

namespace {

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
int ceil_div(int a, int b) { return -floor_div(-a, b); }

struct Truncated {
  std::vector<int> shifts;   // decreasing
  std::vector<Combo> entries;
  std::vector<int> kept;     // indices into entries
  QMatrix R;                 // entries = R * kept entries
};

// Truncated shifts phi(.-k) chi_[0,inf) for k = n-1 down to 1-h, with dependencies removed.
Truncated truncated_entries(const Family& f, const CrossGram& self, int n) {
  Truncated t;
  for (int k = n - 1; k >= 1 - f.hphi; --k) t.shifts.push_back(k);
  for (int k : t.shifts)
    for (int i = 0; i < f.r; ++i) t.entries.push_back(unit_combo(0, k, i, f.r));
  int nc = int(t.entries.size());
  QMatrix G(nc, nc);
  for (int e = 0; e < nc; ++e)
    for (int e2 = e; e2 < nc; ++e2) {
      G(e, e2) = self.inner(t.entries[size_t(e)], t.entries[size_t(e2)]);
      G(e2, e) = G(e, e2);
    }
  for (int e = 0; e < nc; ++e) {
    std::vector<int> trial = t.kept;
    trial.push_back(e);
    if (rank(G.select_rows(trial).select_cols(trial)) > int(t.kept.size())) t.kept = trial;
  }
  int nk = int(t.kept.size());
  t.R = QMatrix(nc, nk);
  QMatrix Gkk = G.select_rows(t.kept).select_cols(t.kept);
  for (int e = 0; e < nc; ++e) {
    auto it = std::find(t.kept.begin(), t.kept.end(), e);
    if (it != t.kept.end()) {
      t.R(e, int(it - t.kept.begin())) = 1;
      continue;
    }
    auto sol = solve_left(Gkk, G.row(e).select_cols(t.kept));
    if (!sol) throw std::runtime_error("truncated shifts: dependency not expressible");
    t.R.set_block(e, 0, sol->particular);
  }
  return t;
}

// E_c and E(k) of the truncated-shift refinement, reduced to kept entries.
struct TruncRefinement {
  QMatrix Ec;                  // |K| x |K|
  std::map<int, QMatrix> Ek;   // k -> |K| x r
};

TruncRefinement truncated_refinement(const Family& f, const Truncated& t, int n) {
  int r = f.r, nc = int(t.entries.size());
  QMatrix Ec(nc, nc);
  for (size_t p = 0; p < t.shifts.size(); ++p)
    for (size_t q = 0; q < t.shifts.size(); ++q)
      Ec.set_block(int(p) * r, int(q) * r, f.a.tap(t.shifts[q] - 2 * t.shifts[p]));
  TruncRefinement out;
  out.Ec = Ec.select_rows(t.kept) * t.R;
  int kmax = t.shifts.empty() ? n - 1 : f.a.hi() + 2 * t.shifts.front();
  for (int k = n; k <= kmax; ++k) {
    QMatrix E(nc, r);
    for (size_t p = 0; p < t.shifts.size(); ++p) E.set_block(int(p) * r, 0, f.a.tap(k - 2 * t.shifts[p]));
    QMatrix Ek = E.select_rows(t.kept);
    if (!Ek.is_zero()) out.Ek[k] = Ek;
  }
  return out;
}

// Rows (over kept truncated entries) of the polynomial reproduction of x^e.
QMatrix poly_rows(const Family& f, const Truncated& t, const std::vector<int>& exps) {
  int nc = int(t.entries.size());
  QMatrix Ap(int(exps.size()), nc);
  for (size_t e = 0; e < exps.size(); ++e) {
    if (exps[e] >= f.sr) throw std::invalid_argument("boundary exponent not reproduced by the generator");
    for (size_t p = 0; p < t.shifts.size(); ++p)
      Ap.set_block(int(e), int(p) * f.r, f.moments.poly_coeff(exps[e], Q(t.shifts[p])));
  }
  return Ap * t.R;
}

// Row space of q(E)^d with q(x) = prod_{j<sr} (x - 2^{-j-1}).
QMatrix nonpolynomial_rows(const QMatrix& E, int sr) {
  int d = E.rows();
  QMatrix q = QMatrix::identity(d);
  for (int j = 0; j < sr; ++j) q = q * (E - QMatrix::identity(d) * qpow2(-j - 1));
  QMatrix p = QMatrix::identity(d);
  for (int i = 0; i < d; ++i) p = p * q;
  return p;
}

QMatrix expand_kept(const QMatrix& coeffs, const Truncated& t) {
  QMatrix full(coeffs.rows(), int(t.entries.size()));
  for (int i = 0; i < coeffs.rows(); ++i)
    for (size_t c = 0; c < t.kept.size(); ++c) full(i, t.kept[c]) = coeffs(i, int(c));
  return full;
}

std::vector<Combo> combos_from(const QMatrix& coeffs, const std::vector<Combo>& basis) {
  std::vector<Combo> out;
  for (int i = 0; i < coeffs.rows(); ++i) {
    Combo f;
    f.scale = basis.empty() ? 0 : basis[0].scale;
    f.r = basis.empty() ? 1 : basis[0].r;
    for (int c = 0; c < coeffs.cols(); ++c)
      if (coeffs(i, c) != 0) f += basis[size_t(c)].scaled(coeffs(i, c));
    out.push_back(f);
  }
  return out;
}

Q combo_right_end(const Combo& f, int hphi) {
  if (f.empty()) return Q(0);
  return Q(f.hi() + hphi) * qpow2(-f.scale);
}

}  // namespace

BoundaryFunction construct_phiL(const Family& f, const CrossGram& ff, const PhiLOptions& opt) {
  int nmin = std::max(-f.lphi, -f.a.lo());
  if (opt.n_phi && *opt.n_phi < nmin)
    throw std::invalid_argument("construct_phiL: n_phi = " + std::to_string(*opt.n_phi) +
                                " violates n_phi >= max(-l_phi, -l_a) = " + std::to_string(nmin));
  int n = opt.n_phi ? *opt.n_phi : nmin;
  Truncated t = truncated_entries(f, ff, n);
  TruncRefinement tr = truncated_refinement(f, t, n);
  int nk = int(t.kept.size());
  BoundaryFunction bf;
  bf.name = "phiL";
  bf.n_offset = n;
  bf.cshifts = t.shifts;
  if (nk == 0) {
    bf.coeffs = QMatrix(0, 0);
    bf.AL = QMatrix(0, 0);
    return bf;
  }
  // zero rows: the interior shifts alone reproduce that power on [0, inf)
  QMatrix Ap0 = poly_rows(f, t, opt.exponents);
  std::vector<int> nz;
  for (int i = 0; i < Ap0.rows(); ++i)
    if (!Ap0.row(i).is_zero()) nz.push_back(i);
  QMatrix Ap = Ap0.select_rows(nz);
  if (rank(Ap) < Ap.rows()) throw std::runtime_error("construct_phiL: boundary polynomials are not independent");
  QMatrix span = QMatrix::vstack(Ap, nonpolynomial_rows(tr.Ec, f.sr));
  QMatrix Ac = span;
  std::vector<int> piv = rref(Ac);
  if (piv.empty()) {
    bf.coeffs = QMatrix(0, int(t.entries.size()));
    bf.AL = QMatrix(0, 0);
    return bf;
  }
  Ac = Ac.block(0, 0, int(piv.size()), nk);
  QMatrix AcE = Ac * tr.Ec;
  QMatrix AL = AcE.select_cols(piv);
  if (AL * Ac != AcE) throw std::runtime_error("construct_phiL: no refinable boundary vector for these exponents");
  bf.coeffs = expand_kept(Ac, t);
  bf.AL = AL;
  for (const auto& [k, E] : tr.Ek) {
    QMatrix A = Ac * E;
    if (!A.is_zero()) bf.A[k] = A;
  }
  bf.funcs = combos_from(bf.coeffs, t.entries);
  return bf;
}

DualPhiLResult construct_dual_phiL(const Family& primal, const Family& dual, const BoundaryFunction& phiL,
                                   const CrossGram& dp, const CrossGram& dd, const DualPhiLOptions& opt) {
  int r = primal.r;
  int lb = std::max({-dual.lphi, -dual.a.lo(), phiL.n_offset});
  int nt = lb;
  // S1: last dual shift still seeing phi^L
  Q reach = 0;
  for (const auto& g : phiL.funcs) reach = std::max(reach, combo_right_end(g, primal.hphi));
  int kend = int(ceil(qd(reach))) - dual.lphi + 1;
  for (int k = lb; k <= kend; ++k)
    for (int i = 0; i < dual.r; ++i)
      for (const auto& g : phiL.funcs)
        if (dp.inner(unit_combo(0, k, i, dual.r), g) != 0) nt = std::max(nt, k + 1);
  if (opt.n_dual) {
    if (*opt.n_dual < nt) throw std::invalid_argument("construct_dual_phiL: n offset override below admissible value");
    nt = *opt.n_dual;
  }
  Truncated t = truncated_entries(dual, dd, nt);
  TruncRefinement tr = truncated_refinement(dual, t, nt);

  std::vector<Combo> ring = phiL.funcs;
  for (int k = phiL.n_offset; k < nt; ++k)
    for (int i = 0; i < r; ++i) ring.push_back(unit_combo(0, k, i, r));
  int nR = int(ring.size()), nk = int(t.kept.size());
  DualPhiLResult res;
  BoundaryFunction& bf = res.tphiL;
  bf.name = "tphiL";
  bf.n_offset = nt;
  bf.cshifts = t.shifts;
  if (nR == 0) {
    bf.coeffs = QMatrix(0, int(t.entries.size()));
    bf.AL = QMatrix(0, 0);
    return res;
  }
  if (nk < nR) throw std::runtime_error("construct_dual_phiL: too few truncated dual shifts; enlarge n offset");

  QMatrix G(nk, nR);
  for (int c = 0; c < nk; ++c)
    for (int l = 0; l < nR; ++l) G(c, l) = dp.inner(t.entries[size_t(t.kept[size_t(c)])], ring[size_t(l)]);
  res.ringphiL_gram = G;

  std::vector<int> exps;
  for (int e = 0; e < opt.m_dual; ++e) exps.push_back(e);
  QMatrix Ap = poly_rows(dual, t, exps);
  QMatrix P(int(exps.size()), nR);
  for (size_t e = 0; e < exps.size(); ++e)
    for (int l = 0; l < nR; ++l) {
      const Combo& g = ring[size_t(l)];
      Q s = 0;
      for (int k = g.lo; k <= g.hi() && !g.empty(); ++k) {
        QMatrix mom = halfline_moment(primal.u, k, exps[e]);
        for (int i = 0; i < r; ++i) s += g.at(k, i) * mom(i, 0);
      }
      P(int(e), l) = s;
    }

  // unknowns X(l, c) at l * nk + c
  int nv = nR * nk;
  std::vector<std::vector<Q>> rows;
  std::vector<Q> rhs;
  for (int l = 0; l < nR; ++l)
    for (int l2 = 0; l2 < nR; ++l2) {
      std::vector<Q> row(static_cast<size_t>(nv));
      for (int c = 0; c < nk; ++c) row[size_t(l * nk + c)] = G(c, l2);
      rows.push_back(std::move(row));
      rhs.push_back(l == l2 ? 1 : 0);
    }
  for (int e = 0; e < int(exps.size()); ++e)
    for (int c = 0; c < nk; ++c) {
      std::vector<Q> row(static_cast<size_t>(nv));
      for (int l = 0; l < nR; ++l) row[size_t(l * nk + c)] = P(e, l);
      rows.push_back(std::move(row));
      rhs.push_back(Ap(e, c));
    }
  QMatrix A(int(rows.size()), nv), b(int(rows.size()), 1);
  for (size_t e = 0; e < rows.size(); ++e) {
    for (int v = 0; v < nv; ++v) A(int(e), v) = rows[e][size_t(v)];
    b(int(e), 0) = rhs[e];
  }
  auto sol = solve_linear(A, b);
  if (!sol) throw std::runtime_error("construct_dual_phiL: biorthogonality and moment conditions are inconsistent");

  auto s5 = [&](const QMatrix& X) { return (X * tr.Ec * (QMatrix::identity(nk) - G * X)).is_zero(); };
  auto unpack = [&](const QMatrix& v) {
    QMatrix X(nR, nk);
    for (int l = 0; l < nR; ++l)
      for (int c = 0; c < nk; ++c) X(l, c) = v(l * nk + c, 0);
    return X;
  };
  QMatrix X = unpack(sol->particular);
  if (!sol->unique() || !s5(X)) {
    // remaining freedom: take the refinement-invariant span of the moment rows and the non-polynomial part
    QMatrix W = row_basis(QMatrix::vstack(Ap, nonpolynomial_rows(tr.Ec, dual.sr)));
    bool ok = false;
    if (W.rows() == nR) {
      auto T = solve_left(W * G, QMatrix::identity(nR));
      if (T && T->unique()) {
        QMatrix Y = T->particular * W;
        if (P * Y == Ap && s5(Y)) {
          X = Y;
          ok = true;
          res.used_fallback = true;
        }
      }
    }
    if (!ok) throw std::runtime_error("construct_dual_phiL: refinement consistency fails; enlarge n offset");
  }
  bf.coeffs = expand_kept(X, t);
  bf.AL = X * tr.Ec * G;
  for (const auto& [k, E] : tr.Ek) {
    QMatrix Ak = X * E;
    if (!Ak.is_zero()) bf.A[k] = Ak;
  }
  bf.funcs = combos_from(bf.coeffs, t.entries);
  return res;
}

namespace {

// rows spanning the same space with each row ending as early as possible
QMatrix reverse_echelon(const QMatrix& X) {
  int n = X.cols();
  std::vector<int> rev(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) rev[size_t(i)] = n - 1 - i;
  QMatrix R = X.select_cols(rev);
  auto piv = rref(R);
  R = R.block(0, 0, int(piv.size()), n).select_cols(rev);
  return R;
}

int last_nonzero(const QMatrix& row) {
  for (int c = row.cols() - 1; c >= 0; --c)
    if (row(0, c) != 0) return c;
  return -1;
}

struct Eta {
  std::vector<Combo> funcs;   // scale 1
  int nL = 0;                 // leading dilated boundary functions
  int klo = 0, khi = -1;      // interior shifts
  int clo = 0, chi = 0;       // scale-1 coordinate range
  QMatrix M;                  // funcs over coordinates
};

Eta make_eta(const Family& f, const BoundaryFunction& L, int klo, int khi) {
  Eta e;
  e.nL = L.count();
  e.klo = klo;
  e.khi = khi;
  for (const auto& g : L.funcs) e.funcs.push_back(dilate(g, 1));
  for (int k = klo; k <= khi; ++k)
    for (int i = 0; i < f.r; ++i) e.funcs.push_back(unit_combo(1, k, i, f.r));
  e.clo = std::min(klo, 1 - f.hphi);
  e.chi = khi;
  for (const auto& g : e.funcs) {
    if (g.empty()) continue;
    e.clo = std::min(e.clo, g.lo);
    e.chi = std::max(e.chi, g.hi());
  }
  e.M = QMatrix(int(e.funcs.size()), (e.chi - e.clo + 1) * f.r);
  for (size_t i = 0; i < e.funcs.size(); ++i) e.M.set_block(int(i), 0, combo_row(e.funcs[i], e.clo, e.chi));
  return e;
}

// coordinates of a scale-1 combo in eta, restricted to [0, inf)
std::optional<QMatrix> eta_coords(const Eta& e, const Family& f, const Combo& g) {
  Combo h;
  h.scale = g.scale;
  h.r = g.r;
  for (int k = g.lo; k <= g.hi() && !g.empty(); ++k) {
    if (k + f.hphi <= 0) continue;  // vanishes on [0, inf)
    for (int i = 0; i < g.r; ++i) h.add(k, i, g.at(k, i));
  }
  if (h.empty()) return QMatrix(1, int(e.funcs.size()));
  if (h.lo < e.clo || h.hi() > e.chi) return std::nullopt;
  auto sol = solve_left(e.M, combo_row(h, e.clo, e.chi));
  if (!sol) return std::nullopt;
  return sol->particular;
}

// rows of psi components
std::vector<Combo> wavelet_combos(const FilterBank& b, int k, int r) {
  std::vector<Combo> out;
  for (int i = 0; i < b.rows(); ++i) {
    Combo g;
    g.scale = 1;
    g.r = r;
    for (int n = b.lo(); n <= b.hi(); ++n)
      for (int c = 0; c < r; ++c) g.add(2 * k + n, c, b.tap(n)(i, c) * 2);
    g.trim();
    out.push_back(g);
  }
  return out;
}

void fill_refinement(BoundaryFunction& bf, const QMatrix& C, const Eta& e, int r) {
  bf.AL = C.block(0, 0, C.rows(), e.nL) * Q(1, 2);
  for (int k = e.klo; k <= e.khi; ++k) {
    QMatrix A = C.block(0, e.nL + (k - e.klo) * r, C.rows(), r) * Q(1, 2);
    if (!A.is_zero()) bf.A[k] = A;
  }
  bf.coeffs = C;
  bf.funcs = combos_from(C, e.funcs);
}

}  // namespace

PsiLResult construct_psiL(const Family& primal, const Family& dual, const FilterBank& b, const FilterBank& tb,
                          const BoundaryFunction& phiL, const BoundaryFunction& tphiL, const CrossGram& pd,
                          const PsiLOptions& opt) {
  int r = primal.r;
  int n_phi = phiL.n_offset, n_tphi = tphiL.n_offset;
  int lpsi = floor_div(b.lo() + primal.lphi, 2);
  PsiLResult res;
  res.n_psi = opt.n_psi ? *opt.n_psi : std::max(-lpsi, ceil_div(n_phi - b.lo(), 2));
  res.k_phi = std::max(2 * n_phi + dual.a.hi(), 2 * res.n_psi + tb.hi()) - 1;
  res.m_phi = res.k_phi + std::max(primal.a.hi() - dual.a.lo(), 0);
  Eta eta = make_eta(primal, phiL, n_phi, res.m_phi);
  int ne = int(eta.funcs.size());

  // orthogonality against the dual scaling side
  std::vector<Combo> conds = tphiL.funcs;
  Q reach = Q(eta.chi + primal.hphi, 2);
  int kmax = int(ceil(qd(reach))) - dual.lphi;
  for (int k = n_tphi; k <= kmax; ++k)
    for (int i = 0; i < dual.r; ++i) conds.push_back(unit_combo(0, k, i, dual.r));
  QMatrix Gm(ne, int(conds.size()));
  for (int e = 0; e < ne; ++e)
    for (size_t c = 0; c < conds.size(); ++c) Gm(e, int(c)) = pd.inner(eta.funcs[size_t(e)], conds[c]);
  QMatrix X = left_nullspace(Gm);
  X = X.rows() ? row_basis(X) : X;
  res.X = X;
  res.x_dim = X.rows();
  if (X.rows() == 0) {
    res.psiL.name = "psiL";
    res.psiL.n_offset = n_phi;
    res.psiL.AL = QMatrix(0, eta.nL);
    return res;
  }

  // interior wavelets representable in eta
  QMatrix Ycoef(0, ne);
  for (int k = res.n_psi;; ++k) {
    auto ws = wavelet_combos(b, k, r);
    bool all = true;
    std::vector<QMatrix> cs;
    for (const auto& w : ws) {
      auto c = eta_coords(eta, primal, w);
      if (!c) {
        all = false;
        break;
      }
      cs.push_back(*c);
    }
    if (!all) break;
    for (const auto& c : cs) Ycoef = Ycoef.rows() ? QMatrix::vstack(Ycoef, c) : c;
  }
  res.y_rows = Ycoef.rows();
  QMatrix U(0, X.rows());
  if (Ycoef.rows()) {
    auto su = solve_left(X, Ycoef);
    if (!su) throw std::runtime_error("construct_psiL: interior wavelets violate the orthogonality conditions");
    U = su->particular;
  }
  res.U = U;

  int need = X.rows() - U.rows();
  QMatrix chosen(0, ne);
  if (!opt.rows.empty()) {
    for (const auto& dr : opt.rows) {
      QMatrix row(1, ne);
      if (int(dr.size()) > ne) throw std::invalid_argument("construct_psiL: refinement row longer than eta");
      for (size_t c = 0; c < dr.size(); ++c) row(0, int(c)) = dr[c] * 2;
      chosen = chosen.rows() ? QMatrix::vstack(chosen, row) : row;
    }
  } else if (need > 0) {
    QMatrix base = U.rows() ? U * X : QMatrix(0, ne);
    QMatrix cand = reverse_echelon(X);
    std::vector<int> order(static_cast<size_t>(cand.rows()));
    for (int i = 0; i < cand.rows(); ++i) order[size_t(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return last_nonzero(cand.row(x)) < last_nonzero(cand.row(y)); });
    int have = base.rows() ? rank(base) : 0;
    for (int i : order) {
      if (chosen.rows() == need) break;
      QMatrix trial = base.rows() ? QMatrix::vstack(base, cand.row(i)) : cand.row(i);
      if (chosen.rows()) trial = QMatrix::vstack(trial, chosen);
      if (rank(trial) > have) {
        chosen = chosen.rows() ? QMatrix::vstack(chosen, cand.row(i)) : cand.row(i);
        ++have;
      }
    }
  }
  QMatrix V(0, X.rows());
  if (chosen.rows()) {
    auto sv = solve_left(X, chosen);
    if (!sv) throw std::runtime_error("construct_psiL: supplied boundary wavelet violates the orthogonality conditions");
    V = sv->particular;
  }
  res.V = V;
  QMatrix UV = U.rows() ? (V.rows() ? QMatrix::vstack(U, V) : U) : V;
  if (UV.rows() != X.rows() || rank(UV) != X.rows()) throw std::runtime_error("construct_psiL: [U; V] is singular");
  res.psiL.name = "psiL";
  res.psiL.n_offset = n_phi;
  if (V.rows()) fill_refinement(res.psiL, V * X, eta, r);
  else res.psiL.AL = QMatrix(0, eta.nL);
  return res;
}

DualPsiLResult construct_dual_psiL(const Family& primal, const Family& dual, const FilterBank& b, const FilterBank& tb,
                                   const BoundaryFunction& phiL, const BoundaryFunction& psiL, int n_psi,
                                   const BoundaryFunction& tphiL, const CrossGram& dp, std::optional<int> n_dual_psi) {
  int r = primal.r;
  int n_tphi = tphiL.n_offset;
  int ltpsi = floor_div(tb.lo() + dual.lphi, 2);
  DualPsiLResult res;
  res.n_dual_psi = n_dual_psi ? *n_dual_psi : std::max({-ltpsi, ceil_div(n_tphi - tb.lo(), 2), n_psi});
  res.m_dual_phi = std::max(2 * n_tphi + primal.a.hi(), 2 * res.n_dual_psi + b.hi()) +
                   std::max(dual.a.hi() - primal.a.lo(), 0) - 1;
  Eta eta = make_eta(dual, tphiL, n_tphi, res.m_dual_phi);
  int ne = int(eta.funcs.size());
  res.tpsiL.name = "tpsiL";
  res.tpsiL.n_offset = n_tphi;
  if (psiL.count() == 0) {
    res.tpsiL.AL = QMatrix(0, eta.nL);
    return res;
  }

  Q reach = 0;
  for (const auto& g : eta.funcs) reach = std::max(reach, combo_right_end(g, dual.hphi));
  int lpsi = floor_div(b.lo() + primal.lphi, 2);
  std::vector<Combo> gs = phiL.funcs;
  for (int k = phiL.n_offset; Q(k + primal.lphi) < reach; ++k)
    for (int i = 0; i < r; ++i) gs.push_back(unit_combo(0, k, i, r));
  int first_h = int(gs.size());
  for (const auto& g : psiL.funcs) gs.push_back(g);
  for (int k = n_psi; Q(k + lpsi) < reach; ++k)
    for (const auto& w : wavelet_combos(b, k, r)) gs.push_back(w);
  int nh = psiL.count() + (res.n_dual_psi - n_psi) * b.rows();

  QMatrix Gm(ne, int(gs.size()));
  for (int e = 0; e < ne; ++e)
    for (size_t g = 0; g < gs.size(); ++g) Gm(e, int(g)) = dp.inner(eta.funcs[size_t(e)], gs[g]);
  int nonzero = 0;
  for (int g = 0; g < Gm.cols(); ++g)
    if (!Gm.col(g).is_zero()) ++nonzero;
  res.conditions = nonzero;
  QMatrix D(nh, int(gs.size()));
  for (int h = 0; h < nh; ++h) D(h, first_h + h) = 1;
  auto sol = solve_left(Gm, D);
  if (!sol) throw std::runtime_error("construct_dual_psiL: duality system is inconsistent");
  if (!sol->unique()) throw std::runtime_error("construct_dual_psiL: duality system is not uniquely solvable");
  fill_refinement(res.tpsiL, sol->particular, eta, dual.r);
  return res;
}

BiorthPair reflect_pair(const BiorthPair& p) {
  return {p.a.reflected(), p.b.reflected(), p.ta.reflected(), p.tb.reflected()};
}

EndpointData build_endpoint(const BiorthPair& pair, const EndpointSpec& spec) {
  EndpointData d;
  d.phi = make_family(pair.a);
  d.b = pair.b;
  d.tb = pair.tb;
  d.pp = CrossGram(d.phi.u, d.phi.u, 0);
  d.phiL = construct_phiL(d.phi, d.pp, {spec.exponents, spec.n_phi});
  d.n_phi = d.phiL.n_offset;
  if (!spec.build_dual || pair.ta.is_zero()) return d;
  d.tphi = make_family(pair.ta);
  d.pd = CrossGram(d.phi.u, d.tphi.u, 0);
  d.dp = CrossGram(d.tphi.u, d.phi.u, 0);
  d.dd = CrossGram(d.tphi.u, d.tphi.u, 0);
  auto dual = construct_dual_phiL(d.phi, d.tphi, d.phiL, d.dp, d.dd, {spec.m_dual, spec.n_tphi});
  d.tphiL = dual.tphiL;
  d.dual_fallback = dual.used_fallback;
  d.n_tphi = d.tphiL.n_offset;
  d.psi_info = construct_psiL(d.phi, d.tphi, pair.b, pair.tb, d.phiL, d.tphiL, d.pd, {spec.n_psi, spec.psi_rows});
  d.psiL = d.psi_info.psiL;
  d.n_psi = d.psi_info.n_psi;
  auto tpsi = construct_dual_psiL(d.phi, d.tphi, pair.b, pair.tb, d.phiL, d.psiL, d.n_psi, d.tphiL, d.dp, spec.n_tpsi);
  d.tpsiL = tpsi.tpsiL;
  d.n_tpsi = tpsi.n_dual_psi;
  d.has_dual = true;
  return d;
}

}  // namespace wavegal
