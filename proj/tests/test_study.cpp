#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "vem/mesh_io.hpp"
#include "vem/study.hpp"

using vem::Point;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vem_test_study_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VEM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

double fd_laplacian(const vem::ScalarFunction& u, const Point& x, double h) {
  return (u(x + Point(h, 0)) + u(x - Point(h, 0)) + u(x + Point(0, h)) + u(x - Point(0, h)) - 4.0 * u(x)) / (h * h);
}

vem::StudyConfig small_config(const std::string& problem, int k, int m) {
  vem::StudyConfig cfg;
  cfg.problem = problem;
  cfg.orders = {k, m};
  cfg.levels = 4;
  cfg.deterministic = true;
  return cfg;
}

} // namespace

TEST(Problems, CornerSolutionValues) {
  const auto sq = vem::make_test_problem("square");
  EXPECT_EQ(sq.u(Point(1, 0)), 0.0);
  EXPECT_NEAR(sq.u(Point(0, 1)), std::sqrt(3.0) / 2.0, 1e-12);
  EXPECT_EQ(sq.u(Point(0, 0)), 0.0);
  // r = 8, theta = pi/4: 4 sin(pi/6) = 2
  EXPECT_NEAR(sq.u(Point(std::sqrt(32.0), std::sqrt(32.0))), 2.0, 1e-12);
}

TEST(Problems, GradientMatchesFiniteDifferences) {
  for (const char* id : {"square", "lshape", "smooth"}) {
    const auto p = vem::make_test_problem(id);
    for (Point x : {Point(0.3, 0.4), Point(-0.6, 0.2), Point(-0.3, -0.7), Point(0.5, -0.25)}) {
      if (!p.domain.contains(x))
        continue;
      const double h = 1e-6;
      const Point fd((p.u(x + Point(h, 0)) - p.u(x - Point(h, 0))) / (2 * h),
                     (p.u(x + Point(0, h)) - p.u(x - Point(0, h))) / (2 * h));
      EXPECT_LT((fd - p.grad_u(x)).norm(), 1e-6 * p.grad_u(x).norm()) << id << " at " << x.transpose();
    }
  }
}

TEST(Problems, CornerSolutionsAreHarmonic) {
  for (const char* id : {"square", "lshape"}) {
    const auto p = vem::make_test_problem(id);
    EXPECT_EQ(p.f(Point(0.3, 0.3)), 0.0);
    for (Point x : {Point(0.3, 0.4), Point(0.8, 0.1), Point(-0.6, 0.2), Point(-0.3, -0.7), Point(0.5, -0.25)}) {
      if (!p.domain.contains(x))
        continue;
      EXPECT_NEAR(fd_laplacian(p.u, x, 1e-3), 0.0, 1e-5) << id << " at " << x.transpose();
    }
  }
}

TEST(Problems, SmoothSourceIsMinusLaplacian) {
  const auto p = vem::make_test_problem("smooth");
  for (Point x : {Point(0.3, 0.4), Point(0.9, 0.15), Point(0.5, 0.5)})
    EXPECT_NEAR(-fd_laplacian(p.u, x, 1e-3), p.f(x), 1e-4 * std::max(1.0, std::abs(p.f(x))));
}

TEST(Problems, LShapeBranchIsContinuousInsideTheDomain) {
  const auto p = vem::make_test_problem("lshape");
  // across the negative x-axis and the negative y-axis
  for (Point x : {Point(-0.5, 0.0), Point(0.0, -0.5), Point(-0.2, 0.0), Point(0.0, -0.9)}) {
    const double e = 1e-9;
    EXPECT_NEAR(p.u(x + Point(e, e)), p.u(x - Point(e, e)), 1e-7);
    EXPECT_NEAR(p.u(x + Point(-e, e)), p.u(x - Point(-e, e)), 1e-7);
  }
  // theta = 2 pi on the re-entrant edge y = 0, x > 0; theta = pi/2 on x = 0, y > 0
  EXPECT_NEAR(p.u(Point(1, 0)), std::sin(4.0 * std::numbers::pi / 3.0), 1e-12);
  EXPECT_NEAR(p.u(Point(0, 1)), std::sin(std::numbers::pi / 3.0), 1e-12);
}

TEST(Problems, DataAndSubdomains) {
  const auto sq = vem::make_test_problem("square");
  const auto ls = vem::make_test_problem("lshape");
  EXPECT_EQ(sq.domain, vem::Domain::unit_square());
  EXPECT_EQ(ls.domain, vem::Domain::l_shape());
  EXPECT_EQ(sq.subdomain.center, Point(0.5, 0.5));
  EXPECT_EQ(ls.subdomain.center, Point(-0.5, -0.5));
  EXPECT_EQ(sq.subdomain.radius, 0.25);
  EXPECT_EQ(ls.subdomain.radius, 0.25);
  for (const auto* p : {&sq, &ls}) {
    for (const Point& b : p->domain.boundary())
      EXPECT_EQ(p->g(b), p->u(b));
    EXPECT_EQ(p->expected_global_rate(3), 0.5);
  }
  EXPECT_EQ(sq.expected_local_rate(3), 3.0);
  EXPECT_EQ(ls.expected_local_rate(1), 1.0);
  EXPECT_NEAR(ls.expected_local_rate(2), 4.0 / 3.0, 1e-15);
  EXPECT_THROW(vem::make_test_problem("disk"), vem::config_error);
}

TEST(EstimateRate, ExactLines) {
  EXPECT_EQ(vem::estimate_rate({0.1, 0.05}, {0.1, 0.05}), 1.0);
  EXPECT_NEAR(vem::estimate_rate({0.1, 0.05}, {0.01, 0.0025}), 2.0, 1e-12);
  EXPECT_NEAR(vem::estimate_rate({0.4, 0.2, 0.1, 0.05}, {3.0, 1.5, 0.75, 0.375}), 1.0, 1e-12);
}

TEST(EstimateRate, NoisyData) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> h, e;
    for (int l = 0; l < 5; ++l) {
      h.push_back(0.2 * std::ldexp(1.0, -l));
      e.push_back(std::pow(h.back(), 1.5) * (1.0 + noise(rng)));
    }
    EXPECT_NEAR(vem::estimate_rate(h, e), 1.5, 0.1);
  }
}

TEST(EstimateRate, RejectsBadInput) {
  EXPECT_THROW(vem::estimate_rate({0.1, 0.05}, {0.1, 0.0}), vem::evaluation_error);
  EXPECT_THROW(vem::estimate_rate({0.1, 0.05}, {-1.0, 0.5}), vem::evaluation_error);
  EXPECT_THROW(vem::estimate_rate({0.1}, {0.1}), vem::config_error);
  EXPECT_THROW(vem::estimate_rate({0.1, 0.1}, {0.1, 0.2}), vem::evaluation_error);
}

TEST(EstimateRate, WindowUsesFinestRows) {
  std::vector<vem::StudyRow> rows(5);
  for (int i = 0; i < 5; ++i) {
    rows[static_cast<std::size_t>(i)].h = std::ldexp(1.0, -i);
    // rate 1 on the coarse rows, 2 on the finest three
    rows[static_cast<std::size_t>(i)].e1_global = i <= 2 ? std::ldexp(1.0, -i) : 0.25 * std::ldexp(1.0, -2 * (i - 2));
  }
  EXPECT_NEAR(vem::estimate_rate(rows, 2, [](const vem::StudyRow& r) { return r.e1_global; }), 2.0, 1e-12);
  EXPECT_NEAR(vem::estimate_rate(rows, 3, [](const vem::StudyRow& r) { return r.e1_global; }),
              vem::estimate_rate({0.25, 0.125, 0.0625}, {0.25, 0.0625, 0.015625}), 1e-12);
}

TEST(Csv, HeaderRowsAndSlopeLine) {
  vem::ConvergenceTable t;
  vem::StudyRow r;
  r.level = 2;
  r.h = 0.1;
  r.ndof = 1234;
  r.e1_global = 0.5;
  r.e1_inner = 0.25;
  r.e1_outer = 0.125;
  r.runtime_s = 0.0;
  t.rows.push_back(r);
  std::ostringstream os;
  vem::write_csv(os, t);
  EXPECT_EQ(os.str(), "level,h,ndof,e1_global,e1_inner,e1_outer,runtime_s\n"
                      "2,1.0000000000e-01,1234,5.0000000000e-01,2.5000000000e-01,1.2500000000e-01,0.000000\n");
  t.slope_global = 0.5;
  t.slope_inner = 2.0;
  t.slope_outer = 1.99999;
  EXPECT_EQ(vem::format_slopes(t), "# slopes global=0.5000 inner=2.0000 outer=2.0000");
}

TEST(StudyConfig, Validation) {
  vem::StudyConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.orders = {2, 3};
  EXPECT_THROW(cfg.validate(), vem::config_error);
  cfg.orders = {5, 5};
  EXPECT_THROW(cfg.validate(), vem::config_error);
  cfg.orders = {2, 2};
  cfg.levels = 2;
  EXPECT_THROW(cfg.validate(), vem::config_error);
  cfg.levels = 4;
  cfg.problem = "circle";
  EXPECT_THROW(cfg.validate(), vem::config_error);
  cfg.problem = "square";
  cfg.tol = 0.0;
  EXPECT_THROW(cfg.validate(), vem::config_error);
  EXPECT_EQ(small_config("lshape", 3, 1).stem(), "study_lshape_hex_k3_m1");
  EXPECT_EQ(vem::parse_mesh_family("voronoi"), vem::MeshFamily::voronoi);
  EXPECT_THROW(vem::parse_mesh_family("quad"), vem::config_error);
}

TEST(RunStudy, WritesFilesAndDecreasingH) {
  const fs::path dir = scratch_dir("files");
  auto cfg = small_config("square", 1, 1);
  cfg.levels = 3;
  cfg.out_dir = dir.string();
  const auto t = vem::run_study(cfg);
  ASSERT_EQ(t.rows.size(), 3u);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    EXPECT_LT(t.rows[i].h, t.rows[i - 1].h);
    EXPECT_GT(t.rows[i].ndof, t.rows[i - 1].ndof);
    EXPECT_LE(t.rows[i].e1_inner, t.rows[i].e1_outer);
    EXPECT_LE(t.rows[i].e1_outer, t.rows[i].e1_global);
    EXPECT_EQ(t.rows[i].runtime_s, 0.0);
  }
  const std::string csv = slurp(dir / "study_square_hex_k1_m1.csv");
  EXPECT_EQ(csv.rfind("level,h,ndof,e1_global,e1_inner,e1_outer,runtime_s\n", 0), 0u);
  EXPECT_NE(csv.find("\n# slopes global="), std::string::npos);
  const std::string svg = slurp(dir / "study_square_hex_k1_m1.svg");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
}

TEST(RunStudy, DeterministicCsvIsByteIdentical) {
  auto cfg = small_config("lshape", 2, 2);
  cfg.family = vem::MeshFamily::voronoi;
  cfg.levels = 3;
  cfg.seed = 5;
  std::string first;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path dir = scratch_dir("det" + std::to_string(rep));
    cfg.out_dir = dir.string();
    vem::run_study(cfg);
    const std::string csv = slurp(dir / (cfg.stem() + ".csv"));
    if (rep == 0)
      first = csv;
    else
      EXPECT_EQ(csv, first);
  }
}

TEST(RunStudy, SolverFailureCarriesLevelAndFlushesRows) {
  const fs::path dir = scratch_dir("fail");
  auto cfg = small_config("square", 2, 2);
  cfg.out_dir = dir.string();
  cfg.solver = vem::SolverKind::cg;
  cfg.tol = 1e-18;
  try {
    vem::run_study(cfg);
    FAIL() << "expected solver_error";
  } catch (const vem::solver_error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("level ", 0), 0u);
  }
  EXPECT_TRUE(fs::exists(dir / (cfg.stem() + ".csv")));
}

// hex square, k = 1, m = 1, 4 levels
TEST(RunStudy, SquareLowestOrderSlopes) {
  const auto t = vem::run_study(small_config("square", 1, 1));
  EXPECT_NEAR(t.slope_global, 0.5, 0.1);
  EXPECT_NEAR(t.slope_inner, 1.0, 0.15);
  EXPECT_NEAR(t.slope_outer, 1.0, 0.15);
}

TEST(RunStudy, LShapeQuadraticLocalSlopes) {
  const auto t = vem::run_study(small_config("lshape", 2, 2));
  EXPECT_NEAR(t.slope_inner, 4.0 / 3.0, 0.15);
  EXPECT_NEAR(t.slope_outer, 4.0 / 3.0, 0.15);
}

TEST(RunStudy, SmoothLowestOrderGlobalSlope) {
  const auto t = vem::run_study(small_config("smooth", 1, 1));
  EXPECT_NEAR(t.slope_global, 1.0, 0.1);
}

// The singular solution caps the global rate; the interior rate is not.
TEST(RunStudy, SquareGlobalBarrierAndLocalGap) {
  for (int k = 1; k <= 2; ++k) {
    const auto t = vem::run_study(small_config("square", k, k));
    EXPECT_LE(t.slope_global, 0.75) << "k=" << k;
    if (k >= 2) {
      EXPECT_GE(t.slope_inner - t.slope_global, 1.0);
    }
  }
}

TEST(Cli, StudyAndExitCodes) {
  const fs::path dir = scratch_dir("cli");
  EXPECT_EQ(run_cli("study --problem square --mesh hex --k 1 --levels 3 --deterministic --quiet --out " +
                    dir.string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "study_square_hex_k1_m1.csv"));
  EXPECT_EQ(run_cli("study --k 2 --m 3 --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("study --k 0 --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("study --problem disk --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("study --levels 2 --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("study --no-such-flag"), 2);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("study --problem square --k 2 --levels 3 --solver cg --tol 1e-18 --out " + dir.string()), 4);
}

TEST(Cli, MeshRoundTripAndAudit) {
  const fs::path dir = scratch_dir("mesh");
  const fs::path file = dir / "l.mesh";
  ASSERT_EQ(run_cli("mesh --domain lshape --family voronoi --level 1 --seed 3 --out " + file.string()), 0);
  const vem::Mesh m = vem::read_mesh(file.string());
  EXPECT_EQ(m.domain, vem::Domain::l_shape());
  EXPECT_EQ(m.n_cells(), vem::voronoi_seed_count(vem::Domain::l_shape(), 1));
  EXPECT_EQ(run_cli("check-mesh " + file.string()), 0);
  // strict bounds no generated mesh meets
  EXPECT_EQ(run_cli("check-mesh " + file.string() + " --gamma0 0.49"), 3);

  const fs::path broken = dir / "broken.mesh";
  {
    std::ofstream os(broken);
    os << "vem-mesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n0 1 2\ndomain square\n";
  }
  EXPECT_EQ(run_cli("check-mesh " + broken.string()), 3);
  EXPECT_EQ(run_cli("check-mesh " + (dir / "missing.mesh").string()), 3);
  EXPECT_EQ(run_cli("mesh --domain disk --out " + file.string()), 2);
  EXPECT_EQ(run_cli("mesh --family hex --level 13 --out " + file.string()), 2);
}
