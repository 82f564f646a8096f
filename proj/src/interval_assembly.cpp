#include "wavegal/interval_basis.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wavegal {

std::string kind_name(ElementKind k) {
  switch (k) {
    case ElementKind::Left: return "left";
    case ElementKind::Right: return "right";
    default: return "interior";
  }
}

namespace {

Q right_end(const BoundaryFunction& b, int hphi) {
  Q s = 0;
  for (const auto& f : b.funcs)
    if (!f.empty()) s = std::max(s, Q(f.hi() + hphi) * qpow2(-f.scale));
  return s;
}

bool refinement_fits(const BoundaryFunction& b, int n_other, int j, int L) {
  if (b.A.empty()) return true;
  return long(b.m_upper() + n_other) <= (2L << j) * L;
}

bool touches_both(const BoundaryFunction& b, int hphi, int j, int L) { return right_end(b, hphi) > Q((1L << j) * L); }

std::vector<Combo> placed(const BoundaryFunction& b, int j, int L, bool right) {
  std::vector<Combo> out;
  for (const auto& f : b.funcs) out.push_back(right ? reflect_place(f, j, L) : dilate(f, j));
  return out;
}

std::vector<std::vector<Q>> rows_from_json(const nlohmann::json& j) {
  std::vector<std::vector<Q>> rows;
  for (const auto& r : j) {
    std::vector<Q> row;
    for (const auto& v : r) row.push_back(parse_q(v));
    rows.push_back(row);
  }
  return rows;
}

std::optional<int> opt_int(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<int>();
}

EndpointSpec endpoint_from_json(const nlohmann::json& j) {
  EndpointSpec e;
  e.exponents = j.value("exponents", std::vector<int>{});
  e.m_dual = j.value("m_dual", 0);
  e.n_phi = opt_int(j, "n_phi");
  e.n_tphi = opt_int(j, "n_dual_phi");
  e.n_psi = opt_int(j, "n_psi");
  e.n_tpsi = opt_int(j, "n_dual_psi");
  if (j.contains("psi_rows")) e.psi_rows = rows_from_json(j.at("psi_rows"));
  e.build_dual = j.value("dual", true);
  return e;
}

std::string qjson(const Q& q) { return qstr(q); }

}  // namespace

LevelBounds minimal_levels(const EndpointData& left, const EndpointData& right, int L, int jmax) {
  LevelBounds lb;
  auto primal_ok = [&](int j) {
    int h = left.phi.hphi, rh = right.phi.hphi;
    return refinement_fits(left.phiL, right.n_phi, j, L) && refinement_fits(left.psiL, right.n_phi, j, L) &&
           refinement_fits(right.phiL, left.n_phi, j, L) && refinement_fits(right.psiL, left.n_phi, j, L) &&
           !touches_both(left.phiL, h, j, L) && !touches_both(left.psiL, h, j, L) &&
           !touches_both(right.phiL, rh, j, L) && !touches_both(right.psiL, rh, j, L);
  };
  auto dual_ok = [&](int j) {
    if (!left.has_dual || !right.has_dual) return true;
    int h = left.tphi.hphi, rh = right.tphi.hphi;
    if (!(refinement_fits(left.tphiL, right.n_tphi, j, L) && refinement_fits(left.tpsiL, right.n_tphi, j, L) &&
          refinement_fits(right.tphiL, left.n_tphi, j, L) && refinement_fits(right.tpsiL, left.n_tphi, j, L) &&
          !touches_both(left.tphiL, h, j, L) && !touches_both(left.tpsiL, h, j, L) &&
          !touches_both(right.tphiL, rh, j, L) && !touches_both(right.tpsiL, rh, j, L)))
      return false;
    // cross-endpoint orthogonality, distinct pairs only
    std::vector<Combo> pl = placed(left.phiL, j, L, false), pr = placed(right.phiL, j, L, true);
    std::vector<Combo> wl = placed(left.psiL, j, L, false), wr = placed(right.psiL, j, L, true);
    std::vector<Combo> tpl = placed(left.tphiL, j, L, false), tpr = placed(right.tphiL, j, L, true);
    std::vector<Combo> twl = placed(left.tpsiL, j, L, false), twr = placed(right.tpsiL, j, L, true);
    auto zero = [&](const std::vector<Combo>& a, const std::vector<Combo>& b) {
      for (const auto& f : a)
        for (const auto& g : b)
          if (left.pd.inner(f, g, L) != 0) return false;
      return true;
    };
    return zero(pl, tpr) && zero(pr, tpl) && zero(wl, tpr) && zero(wr, tpl) && zero(pl, twr) && zero(pr, twl) &&
           zero(wl, twr) && zero(wr, twl);
  };
  lb.J0 = jmax + 1;
  for (int j = 0; j <= jmax; ++j)
    if (primal_ok(j)) {
      lb.J0 = j;
      break;
    }
  lb.tJ0 = jmax + 1;
  for (int j = lb.J0; j <= jmax; ++j)
    if (dual_ok(j)) {
      lb.tJ0 = j;
      break;
    }
  return lb;
}

BasisSpec BasisSpec::from_json(const nlohmann::json& j, const std::string& base_dir) {
  BasisSpec s;
  s.name = j.value("name", "");
  s.kind = j.value("kind", "biorthogonal");
  s.coarse = j.value("coarse", s.kind == "hermite_biharmonic" ? 1 : 2);
  s.finest = j.value("finest", 6);
  s.domain = j.value("domain", 1);
  if (s.kind == "hermite_biharmonic") return s;
  if (!j.contains("filters")) throw std::invalid_argument("basis spec: missing filters");
  const auto& f = j.at("filters");
  if (f.is_string()) {
    std::filesystem::path p(f.get<std::string>());
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    s.pair = load_pair_file(p.string());
  } else {
    s.pair = pair_from_json(f);
  }
  s.left = endpoint_from_json(j.value("left", nlohmann::json::object()));
  s.right = endpoint_from_json(j.value("right", j.value("left", nlohmann::json::object())));
  return s;
}

BasisSpec load_basis_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open basis spec " + path);
  nlohmann::json j;
  in >> j;
  return BasisSpec::from_json(j, std::filesystem::path(path).parent_path().string());
}

std::vector<Element> IntervalBasis::level_elements(int j, bool wavelet, bool dual) const {
  std::vector<Element> out;
  if (hermite_) {
    const int r = 2;
    if (!wavelet) {
      for (int l = 0; l < r; ++l) out.push_back({ElementKind::Interior, ElementRole::Scaling, 1, 1, l,
                                                 unit_combo(1, 1, l, r), 0.0, 1.0});
      return out;
    }
    for (int k = 0; k < (1 << j); ++k)
      for (int l = 0; l < r; ++l) {
        double h = std::ldexp(1.0, -(j + 1));
        out.push_back({ElementKind::Interior, ElementRole::Wavelet, j, k, l, unit_combo(j + 1, 2 * k + 1, l, r),
                       2 * k * h, (2 * k + 2) * h});
      }
    return out;
  }
  const EndpointData& le = *left_;
  const EndpointData& re = *right_;
  const Family& fam = dual ? *dfam_ : *fam_;
  const BoundaryFunction& lb = dual ? (wavelet ? le.tpsiL : le.tphiL) : (wavelet ? le.psiL : le.phiL);
  const BoundaryFunction& rb = dual ? (wavelet ? re.tpsiL : re.tphiL) : (wavelet ? re.psiL : re.phiL);
  int nl = dual ? (wavelet ? le.n_tpsi : le.n_tphi) : (wavelet ? le.n_psi : le.n_phi);
  int nr = dual ? (wavelet ? re.n_tpsi : re.n_tphi) : (wavelet ? re.n_psi : re.n_phi);
  ElementRole role = wavelet ? ElementRole::Wavelet : ElementRole::Scaling;
  auto push = [&](ElementKind kind, int shift, int comp, Combo c) {
    // left and right families can coincide on the coarsest level
    if (kind == ElementKind::Right)
      for (const auto& e : out)
        if (e.combo == c) return;
    Element e{kind, role, j, shift, comp, c, 0, 0};
    if (!c.empty()) {
      e.lo = std::max(0.0, std::ldexp(double(c.lo + fam.lphi), -c.scale));
      e.hi = std::min(double(L_), std::ldexp(double(c.hi() + fam.hphi), -c.scale));
    }
    out.push_back(std::move(e));
  };
  for (int i = 0; i < lb.count(); ++i) push(ElementKind::Left, i, 0, dilate(lb.funcs[size_t(i)], j));
  long top = (1L << j) * L_ - nr;
  const FilterBank& wb = dual ? le.tb : le.b;
  for (long k = nl; k <= top; ++k)
    for (int c = 0; c < fam.r; ++c) {
      if (!wavelet) {
        push(ElementKind::Interior, int(k), c, unit_combo(j, int(k), c, fam.r));
      } else {
        Combo g;
        g.scale = j + 1;
        g.r = fam.r;
        for (int n = wb.lo(); n <= wb.hi(); ++n)
          for (int cc = 0; cc < fam.r; ++cc) g.add(int(2 * k) + n, cc, wb.tap(n)(c, cc) * 2);
        g.trim();
        push(ElementKind::Interior, int(k), c, g);
      }
    }
  for (int i = 0; i < rb.count(); ++i) push(ElementKind::Right, i, 0, reflect_place(rb.funcs[size_t(i)], j, L_));
  return out;
}

std::vector<Element> IntervalBasis::scaling_level(int j, bool dual) const { return level_elements(j, false, dual); }
std::vector<Element> IntervalBasis::wavelet_level(int j, bool dual) const { return level_elements(j, true, dual); }

IntervalBasis IntervalBasis::build(const BasisSpec& spec, int J, int N) {
  if (spec.kind == "hermite_biharmonic") return hermite_biharmonic(N);
  if (N < J) throw std::invalid_argument("assemble_basis: finest level below the coarse level");
  IntervalBasis B;
  B.L_ = spec.domain;
  B.J_ = J;
  B.N_ = N;
  B.left_ = std::make_shared<EndpointData>(build_endpoint(spec.pair, spec.left));
  B.right_ = std::make_shared<EndpointData>(build_endpoint(reflect_pair(spec.pair), spec.right));
  B.fam_ = std::make_shared<Family>(B.left_->phi);
  if (B.left_->has_dual && B.right_->has_dual) B.dfam_ = std::make_shared<Family>(B.left_->tphi);
  B.bounds_ = minimal_levels(*B.left_, *B.right_, B.L_);
  if (J < B.bounds_.J0)
    throw std::invalid_argument("assemble_basis: coarse level " + std::to_string(J) + " below minimal level " +
                                std::to_string(B.bounds_.J0));
  B.closed_ = closed_form_generator(spec.pair.a);
  B.elements_ = B.scaling_level(J);
  for (int j = J; j < N; ++j) {
    auto w = B.wavelet_level(j);
    B.elements_.insert(B.elements_.end(), w.begin(), w.end());
  }
  if (B.dfam_ && J >= B.bounds_.tJ0) {
    B.dual_ = B.scaling_level(J, true);
    for (int j = J; j < N; ++j) {
      auto w = B.wavelet_level(j, true);
      B.dual_.insert(B.dual_.end(), w.begin(), w.end());
    }
  }
  return B;
}

IntervalBasis IntervalBasis::hermite_biharmonic(int N) {
  if (N < 1) throw std::invalid_argument("hermite basis: N must be at least 1");
  IntervalBasis B;
  B.hermite_ = true;
  B.L_ = 1;
  B.J_ = 1;
  B.N_ = N;
  B.fam_ = std::make_shared<Family>(make_family(hermite_cubic_a()));
  B.closed_ = closed_form_generator(hermite_cubic_a());
  B.bounds_ = {1, 1};
  B.elements_ = B.scaling_level(1);
  for (int j = 1; j <= N; ++j) {
    auto w = B.wavelet_level(j);
    B.elements_.insert(B.elements_.end(), w.begin(), w.end());
  }
  return B;
}

IntervalBasis::SparseRows IntervalBasis::express(const std::vector<Element>& fs, const std::vector<Element>& basis,
                                                 bool dual) const {
  const Family& fam = dual ? *dfam_ : *fam_;
  int s = basis.empty() ? 0 : basis[0].combo.scale;
  for (const auto& e : basis)
    if (e.combo.scale != s) throw std::logic_error("express: basis spans several scales");
  long top = (1L << s) * L_;
  auto live = [&](int k) { return k + fam.hphi > 0 && k + fam.lphi < top; };
  using Key = std::pair<int, int>;
  std::map<Key, int> unit;          // coordinate -> element that is exactly that coordinate
  std::map<Key, std::vector<int>> users;
  for (size_t e = 0; e < basis.size(); ++e) {
    const Combo& c = basis[e].combo;
    int nz = 0;
    Key last{};
    for (int k = c.lo; k <= c.hi() && !c.empty(); ++k)
      for (int i = 0; i < c.r; ++i)
        if (c.at(k, i) != 0 && live(k)) {
          ++nz;
          last = {k, i};
          users[last].push_back(int(e));
        }
    if (nz == 1 && c.at(last.first, last.second) == 1) unit[last] = int(e);
  }
  // boundary block: non-unit elements plus every element touching their coordinates
  std::vector<int> blk;
  std::map<Key, int> bcoord;
  for (size_t e = 0; e < basis.size(); ++e) {
    const Combo& c = basis[e].combo;
    bool is_unit = false;
    for (const auto& [key, id] : unit)
      if (id == int(e)) is_unit = true;
    if (is_unit) continue;
    blk.push_back(int(e));
    for (int k = c.lo; k <= c.hi() && !c.empty(); ++k)
      for (int i = 0; i < c.r; ++i)
        if (c.at(k, i) != 0 && live(k) && !bcoord.count({k, i})) bcoord[{k, i}] = int(bcoord.size());
  }
  for (const auto& [key, id] : unit)
    if (bcoord.count(key)) blk.push_back(id);
  std::sort(blk.begin(), blk.end());
  blk.erase(std::unique(blk.begin(), blk.end()), blk.end());
  QMatrix Bm(int(blk.size()), int(bcoord.size()));
  for (size_t b = 0; b < blk.size(); ++b) {
    const Combo& c = basis[size_t(blk[b])].combo;
    for (const auto& [key, col] : bcoord) Bm(int(b), col) = c.at(key.first, key.second);
  }

  SparseRows out;
  out.cols = int(basis.size());
  const FilterBank& a = fam.a;
  for (const auto& f : fs) {
    Combo g = refine_to(f.combo, a, s);
    std::map<int, Q> row;
    QMatrix rb(1, int(bcoord.size()));
    for (int k = g.lo; k <= g.hi() && !g.empty(); ++k)
      for (int i = 0; i < g.r; ++i) {
        Q v = g.at(k, i);
        if (v == 0 || !live(k)) continue;
        auto bc = bcoord.find({k, i});
        if (bc != bcoord.end()) {
          rb(0, bc->second) = v;
          continue;
        }
        auto u = unit.find({k, i});
        if (u == unit.end()) throw std::runtime_error("refinement: combination leaves the finer level span");
        row[u->second] += v;
      }
    if (!rb.is_zero()) {
      auto sol = solve_left(Bm, rb);
      if (!sol) throw std::runtime_error("refinement: boundary part is not in the finer level span");
      for (size_t b = 0; b < blk.size(); ++b)
        if (sol->particular(0, int(b)) != 0) row[blk[b]] += sol->particular(0, int(b));
    }
    std::vector<std::pair<int, Q>> r;
    for (auto& [c, v] : row)
      if (v != 0) r.emplace_back(c, v);
    out.rows.push_back(std::move(r));
  }
  return out;
}

IntervalBasis::SparseRows IntervalBasis::refinement_rows(int j, bool dual) const {
  auto fs = scaling_level(j, dual);
  auto ws = wavelet_level(j, dual);
  fs.insert(fs.end(), ws.begin(), ws.end());
  return express(fs, scaling_level(j + 1, dual), dual);
}

QMatrix IntervalBasis::refinement(int j, bool dual) const {
  if (j < J_ || j >= N_ + (hermite_ ? 1 : 0)) throw std::out_of_range("refinement: level outside the basis");
  if (dual && !(dfam_ && j >= bounds_.tJ0)) {
    QMatrix P = refinement(j, false);
    return inverse(P.transpose()) * Q(2);
  }
  SparseRows sr = refinement_rows(j, dual);
  QMatrix M(int(sr.rows.size()), sr.cols);
  for (size_t i = 0; i < sr.rows.size(); ++i)
    for (const auto& [c, v] : sr.rows[i]) M(int(i), c) = v;
  return M;
}

namespace {

Eigen::SparseMatrix<double> to_sparse(const std::vector<std::vector<std::pair<int, Q>>>& rows, int cols, double s) {
  std::vector<Eigen::Triplet<double>> t;
  for (size_t i = 0; i < rows.size(); ++i)
    for (const auto& [c, v] : rows[i]) t.emplace_back(int(i), c, qd(v) * s);
  Eigen::SparseMatrix<double> M(int(rows.size()), cols);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

}  // namespace

Eigen::VectorXd IntervalBasis::synthesis(const Eigen::VectorXd& multi) const {
  if (multi.size() != size()) throw std::invalid_argument("synthesis: coefficient length mismatch");
  int top = hermite_ ? N_ + 1 : N_;
  int nJ = int(scaling_level(J_).size());
  Eigen::VectorXd c = multi.head(nJ);
  int pos = nJ;
  for (int j = J_; j < top; ++j) {
    SparseRows sr = refinement_rows(j, false);
    int nw = int(sr.rows.size()) - int(c.size());
    Eigen::VectorXd cd(c.size() + nw);
    cd << c, multi.segment(pos, nw);
    pos += nw;
    Eigen::SparseMatrix<double> P = to_sparse(sr.rows, sr.cols, 1 / std::sqrt(2.0));
    c = P.transpose() * cd;
  }
  return c;
}

Eigen::VectorXd IntervalBasis::analysis(const Eigen::VectorXd& single) const {
  int top = hermite_ ? N_ + 1 : N_;
  std::vector<Eigen::VectorXd> details;
  Eigen::VectorXd c = single;
  if (c.size() != int(scaling_level(top).size())) throw std::invalid_argument("analysis: coefficient length mismatch");
  for (int j = top - 1; j >= J_; --j) {
    Eigen::VectorXd cd;
    if (dfam_ && j >= bounds_.tJ0) {
      SparseRows sr = refinement_rows(j, true);
      cd = to_sparse(sr.rows, sr.cols, 1 / std::sqrt(2.0)) * c;
    } else {
      SparseRows sr = refinement_rows(j, false);
      Eigen::MatrixXd P = Eigen::MatrixXd(to_sparse(sr.rows, sr.cols, 1 / std::sqrt(2.0)));
      cd = P.transpose().partialPivLu().solve(c);
    }
    int nj = int(scaling_level(j).size());
    details.push_back(cd.tail(cd.size() - nj));
    c = cd.head(nj);
  }
  Eigen::VectorXd out(size());
  out.head(c.size()) = c;
  int pos = int(c.size());
  for (auto it = details.rbegin(); it != details.rend(); ++it) {
    out.segment(pos, it->size()) = *it;
    pos += int(it->size());
  }
  return out;
}

Eigen::VectorXd IntervalBasis::single_scale(const Combo& f) const {
  int top = hermite_ ? N_ + 1 : N_;
  auto basis = scaling_level(top);
  Element e;
  e.combo = f;
  SparseRows sr = express({e}, basis, false);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(sr.cols);
  double s = std::ldexp(1.0, -top);
  for (const auto& [i, v] : sr.rows[0]) c(i) = qd(v) * std::sqrt(s);
  return c;
}

double IntervalBasis::scale_factor(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("unknown element id");
  if (hermite_) return 1.0;
  return std::pow(2.0, elements_[size_t(id)].level / 2.0);
}

double IntervalBasis::evaluate(int id, double x) const {
  double s = scale_factor(id);
  if (x < 0 || x > L_) return 0;
  const Combo& c = elements_[size_t(id)].combo;
  double y = std::ldexp(x, c.scale), v = 0;
  if (!closed_.empty()) {
    for (int k = c.lo; k <= c.hi() && !c.empty(); ++k)
      for (int i = 0; i < c.r; ++i) {
        Q q = c.at(k, i);
        if (q != 0) v += qd(q) * closed_[size_t(i)].eval(y - k).re;
      }
    return s * v;
  }
  if (!samples_) const_cast<IntervalBasis*>(this)->samples_ = std::make_shared<RefinableVector>(eval_dyadic(fam_->a, 14));
  const RefinableVector& rv = *samples_;
  for (int k = c.lo; k <= c.hi() && !c.empty(); ++k) {
    double t = std::ldexp(y - k, rv.level);
    long n = long(std::floor(t));
    double w = t - double(n);
    Eigen::VectorXd val = (1 - w) * rv.at(n, rv.level) + w * rv.at(n + 1, rv.level);
    for (int i = 0; i < c.r; ++i) v += qd(c.at(k, i)) * val(i);
  }
  return s * v;
}

std::vector<double> IntervalBasis::evaluate(int id, const std::vector<double>& xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(evaluate(id, x));
  return out;
}

std::optional<PiecewiseForm<double>> IntervalBasis::piecewise(int id, bool scaled) const {
  double s = scale_factor(id);
  if (!scaled) s = 1;
  if (closed_.empty()) return std::nullopt;
  const Combo& c = elements_[size_t(id)].combo;
  PiecewiseForm<double> f;
  Q dil = qpow2(c.scale);
  for (int k = c.lo; k <= c.hi() && !c.empty(); ++k)
    for (int i = 0; i < c.r; ++i) {
      Q q = c.at(k, i);
      if (q == 0) continue;
      f += closed_[size_t(i)].affine(dil, Q(k)).scaled(Cx<double>(qd(q) * s));
    }
  return f.restrict(Q(0), Q(L_));
}

std::string IntervalBasis::element_table_csv() const {
  std::ostringstream os;
  os << "id,kind,role,scale,shift,component,support_lo,support_hi\n";
  os.precision(17);
  for (size_t i = 0; i < elements_.size(); ++i) {
    const auto& e = elements_[i];
    os << i << "," << kind_name(e.kind) << "," << (e.role == ElementRole::Scaling ? "scaling" : "wavelet") << ","
       << e.level << "," << e.shift << "," << e.comp << "," << e.lo << "," << e.hi << "\n";
  }
  return os.str();
}

nlohmann::json IntervalBasis::refinement_json(int j) const {
  QMatrix P = refinement(j, false);
  int nj = int(scaling_level(j).size());
  auto dump = [&](int r0, int r1) {
    nlohmann::json m = nlohmann::json::array();
    for (int i = r0; i < r1; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < P.cols(); ++c) row.push_back(qjson(P(i, c)));
      m.push_back(row);
    }
    return m;
  };
  return {{"level", j}, {"A", dump(0, nj)}, {"B", dump(nj, P.rows())}};
}

}  // namespace wavegal
