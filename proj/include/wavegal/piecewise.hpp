#pragma once

// Exact piecewise poly * exponential functions on rational pieces.

#include "wavegal/numeric.hpp"
#include "wavegal/rational.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wavegal {

// Coefficients of P(t + d) from those of P(t).
template <class R>
std::vector<Cx<R>> poly_shift(const std::vector<Cx<R>>& c, const R& d) {
  std::vector<Cx<R>> out = c;
  int n = int(c.size());
  // repeated synthetic division (Horner shift)
  for (int i = 0; i < n; ++i)
    for (int j = n - 2; j >= i; --j) out[j] += out[j + 1] * Cx<R>(d);
  return out;
}

template <class R>
std::vector<Cx<R>> poly_mul(const std::vector<Cx<R>>& a, const std::vector<Cx<R>>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<Cx<R>> c(a.size() + b.size() - 1);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_zero()) continue;
    for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

template <class R>
const std::pair<std::vector<R>, std::vector<R>>& cached_gauss(int n) {
  static thread_local std::map<std::pair<int, long>, std::pair<std::vector<R>, std::vector<R>>> cache;
  long prec = 0;
  if constexpr (!std::is_same_v<R, double>) prec = long(Mp::default_precision());
  auto key = std::make_pair(n, prec);
  auto it = cache.find(key);
  if (it == cache.end()) {
    std::pair<std::vector<R>, std::vector<R>> xw;
    gauss_legendre01<R>(n, xw.first, xw.second);
    it = cache.emplace(key, std::move(xw)).first;
  }
  return it->second;
}

// I_j = int_0^L t^j e^{i w t} dt for j = 0..n.
template <class R>
std::vector<Cx<R>> exp_moments(const R& w, const R& L, int n) {
  using std::abs;
  std::vector<Cx<R>> I(n + 1);
  if (w == 0) {
    R Lp = L;
    for (int j = 0; j <= n; ++j) {
      I[j] = Cx<R>(Lp / (j + 1));
      Lp *= L;
    }
    return I;
  }
  R wl = abs(w) * L;
  if (wl >= R(16 + n)) {
    // upward recursion is stable once |w| L dominates the degree
    Cx<R> e = expi<R>(w * L);
    Cx<R> inv_iw(R(0), R(-1) / w);
    I[0] = (e - Cx<R>(1)) * inv_iw;
    R Lp = 1;
    for (int j = 1; j <= n; ++j) {
      Lp *= L;
      I[j] = (e * Cx<R>(Lp) - Cx<R>(R(j)) * I[j - 1]) * inv_iw;
    }
    return I;
  }
  int m = std::max(40, n + 24);
  const auto& g = cached_gauss<R>(m);
  for (int q = 0; q < m; ++q) {
    R t = g.first[q] * L;
    Cx<R> v = expi<R>(w * t) * Cx<R>(g.second[q] * L);
    for (int j = 0; j <= n; ++j) {
      I[j] += v;
      v *= Cx<R>(t);
    }
  }
  return I;
}

template <class R>
class PiecewiseForm {
 public:
  using C = Cx<R>;
  // poly(t) e^{i omega t} with local variable t = x - p
  struct Term {
    R omega{0};
    std::vector<C> poly;
  };
  struct Piece {
    Q p, q;
    R pr{0}, qr{0};
    std::vector<Term> terms;
  };

  PiecewiseForm() = default;

  const std::vector<Piece>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }

  // poly(x) e^{i omega x} on [p, q], poly coefficients in the global variable x.
  static PiecewiseForm poly_exp(const Q& p, const Q& q, const std::vector<C>& poly_x, const R& omega) {
    if (!(p < q)) throw std::invalid_argument("PiecewiseForm: empty piece");
    PiecewiseForm f;
    Piece pc = make_piece(p, q);
    Term t;
    t.omega = omega;
    t.poly = poly_shift(poly_x, pc.pr);
    if (omega != 0) {
      C ph = expi<R>(omega * pc.pr);
      for (auto& c : t.poly) c *= ph;
    }
    pc.terms.push_back(std::move(t));
    f.pieces_.push_back(std::move(pc));
    return f;
  }
  static PiecewiseForm polynomial(const Q& p, const Q& q, const std::vector<C>& poly_x) {
    return poly_exp(p, q, poly_x, R(0));
  }
  // poly given directly in the local variable t = x - p
  static PiecewiseForm local(const Q& p, const Q& q, std::vector<C> poly_t, const R& omega = R(0)) {
    PiecewiseForm f;
    Piece pc = make_piece(p, q);
    pc.terms.push_back(Term{omega, std::move(poly_t)});
    f.pieces_.push_back(std::move(pc));
    return f;
  }

  C eval(const R& x) const {
    // right-continuous except at the last endpoint
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                               [](const R& v, const Piece& pc) { return v < pc.qr; });
    if (it == pieces_.end()) {
      if (!pieces_.empty() && x == pieces_.back().qr) it = pieces_.end() - 1;
      else return C();
    }
    if (x < it->pr) return C();
    return eval_piece(*it, x - it->pr);
  }

  PiecewiseForm derivative() const {
    PiecewiseForm d;
    for (const auto& pc : pieces_) {
      Piece np = pc;
      np.terms.clear();
      for (const auto& t : pc.terms) {
        Term nt;
        nt.omega = t.omega;
        size_t n = t.poly.size();
        nt.poly.assign(n, C());
        for (size_t j = 1; j < n; ++j) nt.poly[j - 1] += t.poly[j] * C(R(int(j)));
        if (t.omega != 0)
          for (size_t j = 0; j < n; ++j) nt.poly[j] += t.poly[j] * C(R(0), t.omega);
        trim_poly(nt.poly);
        if (!nt.poly.empty()) np.terms.push_back(std::move(nt));
      }
      d.pieces_.push_back(std::move(np));
    }
    return d;
  }

  PiecewiseForm conj() const {
    PiecewiseForm c = *this;
    for (auto& pc : c.pieces_)
      for (auto& t : pc.terms) {
        t.omega = -t.omega;
        for (auto& v : t.poly) v = wavegal::conj(v);
      }
    return c;
  }

  PiecewiseForm scaled(const C& s) const {
    PiecewiseForm c = *this;
    for (auto& pc : c.pieces_)
      for (auto& t : pc.terms)
        for (auto& v : t.poly) v *= s;
    return c;
  }

  PiecewiseForm operator+(const PiecewiseForm& o) const {
    PiecewiseForm out;
    merge(*this, o, [&](const Q& u, const Q& v, const Piece* a, const Piece* b) {
      Piece pc = make_piece(u, v);
      if (a) add_terms(pc.terms, restrict_terms(*a, pc.pr));
      if (b) add_terms(pc.terms, restrict_terms(*b, pc.pr));
      out.pieces_.push_back(std::move(pc));
    });
    return out;
  }
  PiecewiseForm operator-(const PiecewiseForm& o) const { return *this + o.scaled(C(R(-1))); }
  PiecewiseForm& operator+=(const PiecewiseForm& o) { return *this = *this + o; }

  // pointwise product, supported on the intersection
  PiecewiseForm operator*(const PiecewiseForm& o) const {
    PiecewiseForm out;
    merge(*this, o, [&](const Q& u, const Q& v, const Piece* a, const Piece* b) {
      if (!a || !b) return;
      Piece pc = make_piece(u, v);
      pc.terms = multiply_terms(restrict_terms(*a, pc.pr), restrict_terms(*b, pc.pr));
      out.pieces_.push_back(std::move(pc));
    });
    return out;
  }

  PiecewiseForm restrict(const Q& a, const Q& b) const {
    PiecewiseForm out;
    for (const auto& pc : pieces_) {
      Q u = std::max(pc.p, a), v = std::min(pc.q, b);
      if (!(u < v)) continue;
      Piece np = make_piece(u, v);
      np.terms = restrict_terms(pc, np.pr);
      out.pieces_.push_back(std::move(np));
    }
    return out;
  }

  // x -> f(s x - n), s > 0
  PiecewiseForm affine(const Q& s, const Q& n) const {
    if (s <= 0) throw std::invalid_argument("PiecewiseForm::affine: scale must be positive");
    PiecewiseForm out;
    R sr = to_real<R>(s);
    for (const auto& pc : pieces_) {
      Piece np = make_piece((pc.p + n) / s, (pc.q + n) / s);
      for (const auto& t : pc.terms) {
        Term nt;
        nt.omega = t.omega * sr;
        nt.poly = t.poly;
        R f = 1;
        for (auto& c : nt.poly) {
          c *= C(f);
          f *= sr;
        }
        np.terms.push_back(std::move(nt));
      }
      out.pieces_.push_back(std::move(np));
    }
    return out;
  }
  PiecewiseForm shifted(const Q& k) const { return affine(Q(1), k); }  // f(x - k)

  C integral() const {
    C s;
    for (const auto& pc : pieces_) s += integrate_terms(pc.terms, pc.qr - pc.pr);
    return s;
  }

  // int f conj(g)
  friend C inner(const PiecewiseForm& f, const PiecewiseForm& g) {
    C s;
    merge(f, g, [&](const Q& u, const Q& v, const Piece* a, const Piece* b) {
      if (!a || !b) return;
      R ur = to_real<R>(u), vr = to_real<R>(v);
      auto ta = restrict_terms(*a, ur);
      auto tb = restrict_terms(*b, ur);
      for (auto& t : tb) {
        t.omega = -t.omega;
        for (auto& c : t.poly) c = wavegal::conj(c);
      }
      s += integrate_terms(multiply_terms(ta, tb), vr - ur);
    });
    return s;
  }

  // L2 norm by pointwise Gauss quadrature, subdividing by frequency.
  R l2_norm() const {
    using std::abs;
    using std::sqrt;
    R s = 0;
    for (const auto& pc : pieces_) {
      R L = pc.qr - pc.pr;
      R wmax = 0;
      size_t deg = 0;
      for (const auto& t : pc.terms) {
        wmax = std::max(wmax, R(abs(t.omega)));
        deg = std::max(deg, t.poly.size());
      }
      long nsub = 1 + long(to_double(R(wmax * L / 2)));
      int m = int(deg) + 12;
      const auto& g = cached_gauss<R>(m);
      R h = L / R(nsub);
      for (long s0 = 0; s0 < nsub; ++s0) {
        R a = h * R(s0);
        for (int q = 0; q < m; ++q) {
          C v = eval_piece(pc, a + g.first[q] * h);
          s += g.second[q] * h * norm2(v);
        }
      }
    }
    return sqrt(s);
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& pc : pieces_) {
      nlohmann::json jp;
      jp["interval"] = {qstr(pc.p), qstr(pc.q)};
      jp["terms"] = nlohmann::json::array();
      for (const auto& t : pc.terms) {
        nlohmann::json jt;
        jt["omega"] = to_double(t.omega);
        jt["poly_local"] = nlohmann::json::array();
        for (const auto& c : t.poly) jt["poly_local"].push_back({to_double(c.re), to_double(c.im)});
        jp["terms"].push_back(jt);
      }
      j.push_back(jp);
    }
    return j;
  }

  // sum_i c_i f_i in one pass over the common refinement
  static PiecewiseForm linear_combination(const std::vector<PiecewiseForm>& fs, const std::vector<C>& c) {
    if (fs.size() != c.size()) throw std::invalid_argument("linear_combination: size mismatch");
    std::vector<Q> cuts;
    for (const auto& f : fs)
      for (const auto& pc : f.pieces_) {
        cuts.push_back(pc.p);
        cuts.push_back(pc.q);
      }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Piece> cells;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) cells.push_back(make_piece(cuts[i], cuts[i + 1]));
    for (size_t i = 0; i < fs.size(); ++i) {
      if (c[i].is_zero()) continue;
      for (const auto& pc : fs[i].pieces_) {
        size_t a = size_t(std::lower_bound(cuts.begin(), cuts.end(), pc.p) - cuts.begin());
        size_t b = size_t(std::lower_bound(cuts.begin(), cuts.end(), pc.q) - cuts.begin());
        for (size_t cell = a; cell < b; ++cell) {
          auto terms = restrict_terms(pc, cells[cell].pr);
          for (auto& t : terms)
            for (auto& v : t.poly) v *= c[i];
          add_terms(cells[cell].terms, terms);
        }
      }
    }
    PiecewiseForm out;
    for (auto& pc : cells)
      if (!pc.terms.empty()) out.pieces_.push_back(std::move(pc));
    return out;
  }

  // Append a piece to the right of all existing pieces.
  void append(PiecewiseForm other) {
    for (auto& pc : other.pieces_) {
      if (!pieces_.empty() && pc.p < pieces_.back().q)
        throw std::invalid_argument("PiecewiseForm::append: overlapping pieces");
      pieces_.push_back(std::move(pc));
    }
  }

  static Piece make_piece(const Q& p, const Q& q) {
    Piece pc;
    pc.p = p;
    pc.q = q;
    pc.pr = to_real<R>(p);
    pc.qr = to_real<R>(q);
    return pc;
  }

  static C eval_piece(const Piece& pc, const R& t) {
    C s;
    for (const auto& term : pc.terms) {
      C v;
      for (size_t j = term.poly.size(); j-- > 0;) v = v * C(t) + term.poly[j];
      if (term.omega != 0) v *= expi<R>(term.omega * t);
      s += v;
    }
    return s;
  }

 private:
  std::vector<Piece> pieces_;

  static void trim_poly(std::vector<C>& p) {
    while (!p.empty() && p.back().is_zero()) p.pop_back();
  }

  // terms of pc re-expressed with local variable starting at x0 >= pc.p
  static std::vector<Term> restrict_terms(const Piece& pc, const R& x0) {
    R d = x0 - pc.pr;
    if (d == 0) return pc.terms;
    std::vector<Term> out;
    out.reserve(pc.terms.size());
    for (const auto& t : pc.terms) {
      Term nt;
      nt.omega = t.omega;
      nt.poly = poly_shift(t.poly, d);
      if (t.omega != 0) {
        C ph = expi<R>(t.omega * d);
        for (auto& c : nt.poly) c *= ph;
      }
      out.push_back(std::move(nt));
    }
    return out;
  }

  static void add_terms(std::vector<Term>& acc, const std::vector<Term>& add) {
    for (const auto& t : add) {
      auto it = std::find_if(acc.begin(), acc.end(), [&](const Term& a) { return a.omega == t.omega; });
      if (it == acc.end()) {
        acc.push_back(t);
        continue;
      }
      if (it->poly.size() < t.poly.size()) it->poly.resize(t.poly.size());
      for (size_t j = 0; j < t.poly.size(); ++j) it->poly[j] += t.poly[j];
    }
  }

  static std::vector<Term> multiply_terms(const std::vector<Term>& a, const std::vector<Term>& b) {
    std::vector<Term> out;
    for (const auto& x : a)
      for (const auto& y : b) add_terms(out, {Term{x.omega + y.omega, poly_mul(x.poly, y.poly)}});
    return out;
  }

  static C integrate_terms(const std::vector<Term>& terms, const R& L) {
    C s;
    for (const auto& t : terms) {
      if (t.poly.empty()) continue;
      auto I = exp_moments<R>(t.omega, L, int(t.poly.size()) - 1);
      for (size_t j = 0; j < t.poly.size(); ++j) s += t.poly[j] * I[j];
    }
    return s;
  }

  // Walk the common refinement of the two piece lists.
  template <class F>
  static void merge(const PiecewiseForm& f, const PiecewiseForm& g, F&& visit) {
    std::vector<Q> cuts;
    for (const auto& pc : f.pieces_) {
      cuts.push_back(pc.p);
      cuts.push_back(pc.q);
    }
    for (const auto& pc : g.pieces_) {
      cuts.push_back(pc.p);
      cuts.push_back(pc.q);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    size_t i = 0, j = 0;
    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
      const Q& u = cuts[c];
      const Q& v = cuts[c + 1];
      while (i < f.pieces_.size() && f.pieces_[i].q <= u) ++i;
      while (j < g.pieces_.size() && g.pieces_[j].q <= u) ++j;
      const Piece* a = (i < f.pieces_.size() && f.pieces_[i].p <= u) ? &f.pieces_[i] : nullptr;
      const Piece* b = (j < g.pieces_.size() && g.pieces_[j].p <= u) ? &g.pieces_[j] : nullptr;
      if (a || b) visit(u, v, a, b);
    }
  }
};

}  // namespace wavegal
