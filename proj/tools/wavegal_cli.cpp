#include "wavegal/solvers.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace wavegal;
namespace fs = std::filesystem;

namespace {

// solver gave up (singular system, kappa sentinel, ...)
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string spec, problem, out;
  std::string levels;
  int precision = 16;
  bool enrich = true;
  bool precondition = true;
  int samples = 4097;
  int lo = 0, hi = 0;
};

void parse_levels(RunConfig& c, int dlo, int dhi) {
  if (c.levels.empty()) {
    c.lo = dlo;
    c.hi = dhi;
  } else {
    auto p = c.levels.find(':');
    try {
      if (p == std::string::npos) {
        c.lo = c.hi = std::stoi(c.levels);
      } else {
        c.lo = std::stoi(c.levels.substr(0, p));
        c.hi = std::stoi(c.levels.substr(p + 1));
      }
    } catch (const std::logic_error&) {
      throw std::invalid_argument("--levels expects A:B, got '" + c.levels + "'");
    }
  }
  if (c.lo > c.hi) throw std::invalid_argument("--levels: empty range " + c.levels);
  if (c.lo < 0) throw std::invalid_argument("--levels: negative level");
  if (c.precision < 15) throw std::invalid_argument("--precision must be at least 15 digits");
}

bool extended(const RunConfig& c) { return c.precision > 16; }

std::string fmt(double v, int digits = 10) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

// CSV table echoed to stdout and written to out/<name> via a temp file
class Table {
 public:
  Table(std::string header, const RunConfig& c, std::string name) : c_(c), name_(std::move(name)) {
    body_ = header + "\n";
    std::cout << header << std::endl;
  }
  void row(const std::string& r) {
    body_ += r + "\n";
    std::cout << r << std::endl;
    flush();
  }

 private:
  void flush() const {
    if (c_.out.empty()) return;
    fs::create_directories(c_.out);
    fs::path p = fs::path(c_.out) / name_;
    fs::path tmp = p;
    tmp += ".tmp";
    {
      std::ofstream os(tmp);
      os << body_;
    }
    fs::rename(tmp, p);
  }
  const RunConfig& c_;
  std::string name_, body_;
};

void write_file(const RunConfig& c, const std::string& name, const std::string& text) {
  if (c.out.empty()) return;
  fs::create_directories(c.out);
  std::ofstream os(fs::path(c.out) / name);
  os << text;
}

void check(const ConditioningReport& r, const std::string& what) {
  if (r.singular()) throw NumericalFailure(what + ": singular system (kappa = inf)");
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

template <class R>
std::string samples_csv(const PiecewiseForm<R>& u, const PiecewiseForm<R>* exact, int n) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << (exact ? "x,re_u,im_u,re_exact,im_exact\n" : "x,re_u,im_u\n");
  for (int i = 0; i < n; ++i) {
    R x = R(i) / R(n - 1);
    auto v = to_std(u.eval(x));
    os << to_double(x) << "," << v.real() << "," << v.imag();
    if (exact) {
      auto e = to_std(exact->eval(x));
      os << "," << e.real() << "," << e.imag();
    }
    os << "\n";
  }
  return os.str();
}

// ---- basis

IntervalBasis build_from(const BasisSpec& s, int J, int N) {
  if (s.kind == "hermite_biharmonic") return IntervalBasis::hermite_biharmonic(N);
  return IntervalBasis::build(s, J, N);
}

nlohmann::json verify_report(const IntervalBasis& b) {
  nlohmann::json j;
  j["size"] = b.size();
  j["coarse"] = b.coarse();
  j["finest"] = b.finest();
  auto forms = element_forms<double>(b);
  double ends = 0, slopes = 0;
  for (const auto& f : forms) {
    ends = std::max({ends, abs(f.eval(0.0)), abs(f.eval(1.0))});
    if (b.hermite()) {
      auto d = f.derivative();
      slopes = std::max({slopes, abs(d.eval(0.0)), abs(d.eval(1.0))});
    }
  }
  j["endpoint_values_max"] = ends;
  if (b.hermite()) j["endpoint_slopes_max"] = slopes;
  bool ok = ends <= 1e-12 && slopes <= 1e-12;

  if (b.hermite()) {
    auto S = stiffness_matrix(b, 2, Normalization::UnitSeminorm);
    double inter = 0, defect = 0;
    for (int k = 0; k < S.matrix.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(S.matrix, k); it; ++it) {
        int r = int(it.row()), c = int(it.col());
        if (b.elements()[size_t(r)].level != b.elements()[size_t(c)].level) inter = std::max(inter, std::abs(it.value()));
        defect = std::max(defect, std::abs(it.value() - (r == c ? 1.0 : 0.0)));
      }
    j["stiffness_inter_level_max"] = inter;
    j["stiffness_block_diagonal"] = inter <= 1e-12;
    j["stiffness_identity_defect"] = defect;
    ok = ok && inter <= 1e-12;
  } else {
    int nm = b.dual_family() ? b.dual_family()->sr : 0;
    double mom = 0;
    for (int i = 0; i < b.size(); ++i) {
      if (b.elements()[size_t(i)].role != ElementRole::Wavelet) continue;
      for (int p = 0; p < nm; ++p) {
        std::vector<Cx<double>> xp(size_t(p + 1));
        xp[size_t(p)] = Cx<double>(1);
        mom = std::max(mom, abs(inner(forms[size_t(i)], PiecewiseForm<double>::polynomial(Q(0), Q(1), xp))));
      }
    }
    j["vanishing_moments"] = nm;
    j["moment_residual_max"] = mom;
    ok = ok && mom <= 1e-10;
    if (b.has_dual() && b.size() <= 1024) {
      const auto& P = b.elements();
      const auto& D = b.dual_elements();
      const CrossGram& g = b.left()->dp;
      double worst = 0;
      for (size_t i = 0; i < D.size(); ++i)
        for (size_t k = 0; k < P.size(); ++k) {
          if (D[i].hi <= P[k].lo || P[k].hi <= D[i].lo) continue;
          double v = qd(g.inner(D[i].combo, P[k].combo, b.domain())) * std::pow(2.0, (D[i].level + P[k].level) / 2.0);
          worst = std::max(worst, std::abs(v - (i == k ? 1.0 : 0.0)));
        }
      j["biorthogonality_residual"] = worst;
      ok = ok && worst <= 1e-10;
    } else {
      j["biorthogonality_residual"] = nullptr;  // no dual at this coarse level, or too large to check densely
    }
  }
  j["ok"] = ok;
  return j;
}

void print_report(const nlohmann::json& r) {
  for (auto it = r.begin(); it != r.end(); ++it) {
    std::string key = it.key();
    for (auto& ch : key)
      if (ch == '_') ch = ' ';
    std::cout << key << ": " << (it->is_boolean() ? (it->get<bool>() ? "true" : "false") : it->dump()) << "\n";
  }
}

int cmd_basis(RunConfig& c, bool build) {
  BasisSpec s = load_basis_spec(c.spec);
  parse_levels(c, s.coarse, s.finest);
  IntervalBasis b = build_from(s, c.lo, c.hi);
  auto rep = verify_report(b);
  rep["spec"] = s.name;
  if (build) {
    write_file(c, "elements.csv", b.element_table_csv());
    nlohmann::json ref = nlohmann::json::array();
    int top = b.finest() + (b.hermite() ? 1 : 0);
    for (int j = b.coarse(); j < top; ++j) ref.push_back(b.refinement_json(j));
    write_file(c, "refinement.json", ref.dump(1));
    std::cout << "elements: " << b.size() << "\n";
  }
  write_file(c, "verify.json", rep.dump(2) + "\n");
  print_report(rep);
  return rep["ok"].get<bool>() ? 0 : 3;
}

// ---- tables

int cmd_cond(RunConfig& c) {
  BasisSpec s = load_basis_spec(c.spec);
  parse_levels(c, s.coarse, s.finest);
  Table t("N,size,kappa_mass_fem,kappa_stiff_fem,kappa_mass_wavelet,kappa_stiff_wavelet", c, "table_cond.csv");
  std::ostringstream detail;
  detail << conditioning_csv_header() << "\n";
  for (int N = std::max(c.lo, s.coarse); N <= c.hi; ++N) {
    IntervalBasis b = build_from(s, s.coarse, N);
    auto km = condition_number(gram_matrix(fem_hats(N), 0, Normalization::UnitL2).matrix);
    auto ks = condition_number(gram_matrix(fem_hats(N), 1, Normalization::UnitSeminorm).matrix);
    auto wm = condition_number(mass_matrix(b, Normalization::UnitL2).matrix);
    auto ws = condition_number(stiffness_matrix(b, 1, Normalization::UnitSeminorm).matrix);
    for (const auto* r : {&km, &ks, &wm, &ws}) check(*r, "table cond");
    t.row(std::to_string(N) + "," + std::to_string(b.size()) + "," + fmt(km.kappa) + "," + fmt(ks.kappa) + "," +
          fmt(wm.kappa) + "," + fmt(ws.kappa));
    detail << conditioning_csv_row("fem", N, Normalization::UnitL2, km) << "\n"
           << conditioning_csv_row("fem", N, Normalization::UnitSeminorm, ks) << "\n"
           << conditioning_csv_row(s.name, N, Normalization::UnitL2, wm) << "\n"
           << conditioning_csv_row(s.name, N, Normalization::UnitSeminorm, ws) << "\n";
  }
  write_file(c, "conditioning.csv", detail.str());
  return 0;
}

// ---- solvers

template <class R>
int run_helmholtz(const RunConfig& c, const HelmholtzProblem& p) {
  auto exact = transmission_solution<R>(p);
  HelmholtzOptions opt;
  opt.enrich = c.enrich;
  opt.precondition = c.precondition;
  Table t("N,size,waves,kappa,kappa_star,rel_error_pct,residual", c, "helmholtz_" + stem(c.problem) + ".csv");
  for (int N = c.lo; N <= c.hi; ++N) {
    auto r = solve_helmholtz<R>(p, N, opt);
    check(r.cond, "solve helmholtz");
    double e = to_double(relative_L2_error(r.field.u, exact));
    t.row(std::to_string(N) + "," + std::to_string(r.n_basis) + "," + std::to_string(r.n_waves) + "," + fmt(r.cond.kappa) +
          "," + fmt(r.cond.kappa_star) + "," + fmt(e) + "," + fmt(r.residual, 3));
    if (N == c.hi) write_file(c, "samples_N" + std::to_string(N) + ".csv", samples_csv(r.field.u, &exact, c.samples));
  }
  return 0;
}

template <class R>
int run_biharmonic(const RunConfig& c, const BiharmonicProblem& p) {
  auto u = p.solution_form<R>();
  Table t("N,size,kappa,rel_error_pct,rate", c, "biharmonic_" + stem(c.problem) + ".csv");
  double prev = std::nan("");
  for (int N = c.lo; N <= c.hi; ++N) {
    auto r = solve_biharmonic<R>(p, N);
    check(r.cond, "solve biharmonic");
    double e = to_double(relative_L2_error(r.field.u, u));
    t.row(std::to_string(N) + "," + std::to_string(r.size) + "," + fmt(r.cond.kappa) + "," + fmt(e) + "," +
          fmt(std::log2(prev / e), 5));
    prev = e;
    if (N == c.hi) write_file(c, "samples_N" + std::to_string(N) + ".csv", samples_csv(r.field.u, &u, c.samples));
  }
  return 0;
}

int cmd_solve(RunConfig& c, const std::string& kind) {
  if (kind == "helmholtz") {
    parse_levels(c, 3, 7);
    if (c.lo < 2) throw std::invalid_argument("solve helmholtz: levels start at 2");
    auto p = load_helmholtz_problem(c.problem);
    if (!extended(c)) return run_helmholtz<double>(c, p);
    set_mp_digits(unsigned(c.precision));
    return run_helmholtz<Mp>(c, p);
  }
  parse_levels(c, 6, 10);
  if (c.lo < 1) throw std::invalid_argument("solve biharmonic: levels start at 1");
  auto p = load_biharmonic_problem(c.problem);
  if (!extended(c)) return run_biharmonic<double>(c, p);
  set_mp_digits(unsigned(c.precision));
  return run_biharmonic<Mp>(c, p);
}

// ---- baselines

// dense SVD of the FD matrix; skipped (nan) above this size
constexpr int kFdDenseLimit = 2048;

ConditioningReport fd_condition(double k, int H) {
  ConditioningReport r;
  r.kappa = std::nan("");
  if (H > kFdDenseLimit) return r;
  double h = 1.0 / H, h2 = h * h;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(H, H);
  for (int n = 0; n < H; ++n) {
    A(n, n) = 2 / h2 - k * k;
    if (n > 0) A(n, n - 1) = -1 / h2;
    if (n + 1 < H) A(n, n + 1) = -1 / h2;
  }
  A(H - 1, H - 2) = -2 / h2;
  A(H - 1, H - 1) -= std::complex<double>(0, 2 * k / h);
  return condition_number(A);
}

int cmd_baseline(RunConfig& c, const std::string& kind) {
  auto p = load_helmholtz_problem(c.problem);
  if (kind == "fd") {
    parse_levels(c, 9, 13);
    if (c.lo < 1) throw std::invalid_argument("baseline fd: grid exponent must be positive");
    auto exact = transmission_solution<double>(p);
    Table t("N_FD,size,kappa,discrete_error_pct,interpolation_error_pct", c, "fd_" + stem(c.problem) + ".csv");
    for (int n = c.lo; n <= c.hi; ++n) {
      auto r = fd_baseline(p, n, exact);
      auto k = fd_condition(qd(p.k), r.size());
      t.row(std::to_string(n) + "," + std::to_string(r.size()) + "," + fmt(k.kappa) + "," + fmt(r.discrete_error) + "," +
            fmt(r.interpolation_error));
      if (n == c.hi) write_file(c, "samples_fd" + std::to_string(n) + ".csv", samples_csv(fd_interpolant(r.U), &exact, c.samples));
    }
    return 0;
  }
  parse_levels(c, 3, 7);
  if (c.lo < 1) throw std::invalid_argument("baseline fem: N must be positive");
  auto exact = transmission_solution<double>(p);
  Table t("N,size,kappa,rel_error_pct,residual", c, "fem_" + stem(c.problem) + ".csv");
  for (int N = c.lo; N <= c.hi; ++N) {
    auto r = fem_baseline<double>(p, N, c.precondition);
    check(r.cond, "baseline fem");
    t.row(std::to_string(N) + "," + std::to_string(r.n_basis) + "," + fmt(r.cond.kappa) + "," +
          fmt(relative_L2_error(r.field.u, exact)) + "," + fmt(r.residual, 3));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavelet Galerkin bases and solvers on [0,1]"};
  app.require_subcommand(1);
  RunConfig c;
  std::string default_spec = std::string(WAVEGAL_DATA_DIR) + "/specs/cdf22_dirichlet.json";

  auto common = [&](CLI::App* s) {
    s->add_option("--levels", c.levels, "level range A:B");
    s->add_option("--out", c.out, "output directory");
    s->add_option("--precision", c.precision, "significant digits; above 16 switches to mpfr");
  };
  auto basis = app.add_subcommand("basis", "build or verify an interval basis");
  basis->require_subcommand(1);
  auto bbuild = basis->add_subcommand("build", "element table, refinement matrices, verification report");
  auto bverify = basis->add_subcommand("verify", "verification report only");
  for (auto* s : {bbuild, bverify}) {
    s->add_option("--spec", c.spec, "basis spec json")->required()->check(CLI::ExistingFile);
    common(s);
  }

  auto table = app.add_subcommand("table", "condition number tables");
  table->require_subcommand(1);
  auto tcond = table->add_subcommand("cond", "FEM and wavelet mass/stiffness condition numbers");
  tcond->add_option("--spec", c.spec, "basis spec json")->default_val(default_spec)->check(CLI::ExistingFile);
  common(tcond);

  auto solve = app.add_subcommand("solve", "run a model problem");
  solve->require_subcommand(1);
  auto shelm = solve->add_subcommand("helmholtz", "Helmholtz with radiation condition");
  auto sbih = solve->add_subcommand("biharmonic", "biharmonic with the Hermite basis");
  auto baseline = app.add_subcommand("baseline", "reference methods for the Helmholtz problem");
  baseline->require_subcommand(1);
  auto bfd = baseline->add_subcommand("fd", "centred finite differences");
  auto bfem = baseline->add_subcommand("fem", "hat-function Galerkin");
  for (auto* s : {shelm, sbih, bfd, bfem}) {
    s->add_option("--problem", c.problem, "problem json")->required()->check(CLI::ExistingFile);
    s->add_option("--samples", c.samples, "points in the solution sample file")->check(CLI::Range(2, 1 << 24));
    common(s);
  }
  for (auto* s : {shelm, bfem}) s->add_flag("--precondition,!--no-precondition", c.precondition, "diagonal preconditioner");
  shelm->add_flag("--enrich,!--no-enrich", c.enrich, "add the special waves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*bbuild) return cmd_basis(c, true);
    if (*bverify) return cmd_basis(c, false);
    if (*tcond) return cmd_cond(c);
    if (*shelm) return cmd_solve(c, "helmholtz");
    if (*sbih) return cmd_solve(c, "biharmonic");
    if (*bfd) return cmd_baseline(c, "fd");
    if (*bfem) return cmd_baseline(c, "fem");
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: bad json: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
