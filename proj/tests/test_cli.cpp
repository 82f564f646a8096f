#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(WAVEGAL_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string data(const std::string& rel) { return std::string(WAVEGAL_DATA_DIR) + "/" + rel; }

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int lines(const std::string& s) { return int(std::count(s.begin(), s.end(), '\n')); }

fs::path scratch(const std::string& name) {
  fs::path d = fs::temp_directory_path() / ("wavegal_cli_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Cli, GoldenHeaders) {
  struct Case {
    std::string args, header;
  };
  std::vector<Case> cases = {
      {"table cond --levels 2:3", "N,size,kappa_mass_fem,kappa_stiff_fem,kappa_mass_wavelet,kappa_stiff_wavelet"},
      {"solve helmholtz --problem " + data("problems/indicator_desk.json") + " --levels 4:4",
       "N,size,waves,kappa,kappa_star,rel_error_pct,residual"},
      {"solve biharmonic --problem " + data("problems/biharmonic_sin.json") + " --levels 3:3",
       "N,size,kappa,rel_error_pct,rate"},
      {"baseline fd --problem " + data("problems/indicator_desk.json") + " --levels 5:5",
       "N_FD,size,kappa,discrete_error_pct,interpolation_error_pct"},
      {"baseline fem --problem " + data("problems/indicator_desk.json") + " --levels 3:3",
       "N,size,kappa,rel_error_pct,residual"},
  };
  for (const auto& c : cases) {
    auto r = run(c.args);
    EXPECT_EQ(r.code, 0) << c.args << "\n" << r.out;
    EXPECT_EQ(first_line(r.out), c.header) << c.args;
  }
}

TEST(Cli, BasisBuildWritesArtifacts) {
  auto d = scratch("basis");
  auto r = run("basis build --spec " + data("specs/cdf22_dirichlet.json") + " --levels 3:6 --out " + d.string());
  ASSERT_EQ(r.code, 0) << r.out;
  auto csv = read(d / "elements.csv");
  EXPECT_EQ(first_line(csv), "id,kind,role,scale,shift,component,support_lo,support_hi");
  EXPECT_EQ(lines(csv), 1 + 63);
  EXPECT_TRUE(fs::exists(d / "refinement.json"));
  EXPECT_NE(r.out.find("ok: true"), std::string::npos);
  EXPECT_NE(r.out.find("biorthogonality residual: 0"), std::string::npos);
  fs::remove_all(d);
}

TEST(Cli, HermiteVerifyReportsBlockDiagonal) {
  auto r = run("basis verify --spec " + data("specs/hermite_biharmonic.json") + " --levels 1:5");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("stiffness block diagonal: true"), std::string::npos) << r.out;
}

TEST(Cli, SolveWritesTableAndSamples) {
  auto d = scratch("solve");
  auto r = run("solve helmholtz --problem " + data("problems/indicator_desk.json") + " --levels 4:5 --samples 33 --out " +
               d.string());
  ASSERT_EQ(r.code, 0) << r.out;
  auto t = read(d / "helmholtz_indicator_desk.csv");
  EXPECT_EQ(lines(t), 3);
  std::istringstream rows(t);
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    // rel_error_pct column
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
    ASSERT_EQ(f.size(), 7u);
    EXPECT_LE(std::stod(f[5]), 1e-8);
  }
  auto s = read(d / "samples_N5.csv");
  EXPECT_EQ(first_line(s), "x,re_u,im_u,re_exact,im_exact");
  EXPECT_EQ(lines(s), 34);
  fs::remove_all(d);
}

TEST(Cli, NoEnrichDropsWaves) {
  auto r = run("solve helmholtz --problem " + data("problems/indicator.json") + " --levels 3:3 --no-enrich");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(r.out.find('\n') + 1, 7), "3,7,0,4");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("solve helmholtz --problem /does/not/exist.json").code, 2);
  EXPECT_EQ(run("table cond --levels 5:3").code, 2);
  EXPECT_EQ(run("table cond --levels x").code, 2);
  EXPECT_EQ(run("table cond --precision 8").code, 2);

  // n_phi below its lower bound
  auto d = scratch("badspec");
  fs::create_directories(d);
  std::string spec = read(data("specs/cdf22_dirichlet.json"));
  spec.replace(spec.find("\"n_phi\": 3"), 10, "\"n_phi\": 0");
  spec.replace(spec.find("../filters/cdf22.json"), 21, data("filters/cdf22.json"));
  std::ofstream(d / "bad.json") << spec;
  auto r = run("basis build --spec " + (d / "bad.json").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("n_phi >= max(-l_phi, -l_a)"), std::string::npos) << r.out;

  // k with a negative sign fails validation
  std::ofstream(d / "neg.json") << R"({"type":"helmholtz","k":"-1","source":{"pieces":[]}})";
  EXPECT_EQ(run("solve helmholtz --problem " + (d / "neg.json").string()).code, 2);
  fs::remove_all(d);
}

TEST(Cli, Deterministic) {
  std::string args = "solve helmholtz --problem " + data("problems/indicator.json") + " --levels 3:4";
  EXPECT_EQ(run(args).out, run(args).out);
}
