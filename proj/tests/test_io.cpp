#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fpfv/errors.hpp"
#include "fpfv/io.hpp"
#include "fpfv/mesh.hpp"

using namespace fpfv;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

#ifdef FPFV_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(FPFV_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

const fs::path kWork = fs::temp_directory_path() / "fpfv_cli_test";
#endif

}  // namespace

TEST_CASE("format_sci round-trips doubles exactly") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double v = unif(rng) * std::pow(10.0, static_cast<int>(40.0 * unif(rng)));
    CHECK(std::stod(format_sci(v)) == v);
  }
  CHECK(std::stod(format_sci(0.0)) == 0.0);
}

TEST_CASE("table csv: rate columns regenerate identically after parsing") {
  const fs::path path = fs::temp_directory_path() / "fpfv_table_test.csv";
  std::vector<TableRow> rows;
  double l1 = 4.48e-3, l2 = 1.04e-2, li = 5.96e-2;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int level = 0; level < 5; ++level) {
    TableRow r;
    r.tau = 2.5e-2 / (1 << level);
    r.size = 1.0 / (1 << level);
    r.l1 = l1;
    r.l2 = l2;
    r.linf = li;
    r.rho_min = 6.68e-2 / (1 << level);
    if (level == 0) {
      r.l1_rate = r.l2_rate = r.linf_rate = nan;
    } else {
      r.l1_rate = std::log2(rows.back().l1 / r.l1);
      r.l2_rate = std::log2(rows.back().l2 / r.l2);
      r.linf_rate = std::log2(rows.back().linf / r.linf);
    }
    rows.push_back(r);
    l1 /= 4.11;
    l2 /= 4.03;
    li /= 1.7;
  }
  write_table_csv(path.string(), rows);
  const std::vector<TableRow> back = read_table_csv(path.string());
  REQUIRE(back.size() == rows.size());
  CHECK(std::isnan(back[0].l1_rate));
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].l1 == rows[i].l1);
    CHECK(back[i].linf == rows[i].linf);
    if (i > 0) {
      // recomputing the rate from the parsed errors reproduces the stored bits
      CHECK(std::log2(back[i - 1].l1 / back[i].l1) == back[i].l1_rate);
      CHECK(std::log2(back[i - 1].l2 / back[i].l2) == back[i].l2_rate);
    }
  }
  fs::remove(path);
}

TEST_CASE("series csv layout") {
  const fs::path path = fs::temp_directory_path() / "fpfv_series_test.csv";
  std::vector<SeriesRow> rows(3);
  rows[0].t = 0.1;
  rows[1].t = 0.2;
  rows[2].t = 0.3;
  rows[2].newton_iters = 4;
  write_series_csv(path.string(), rows);
  const std::string text = slurp(path);
  CHECK(text.rfind("t,E,H,D_psi,R_psi,Delta,mass,rho_min,newton_iters\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  fs::remove(path);
}

TEST_CASE("config parsing") {
  std::istringstream in(
      "# comment\n"
      "tau = 0.025\n"
      "  case=gravity  \n"
      "\n"
      "out-dir = runs/a\n");
  const auto entries = parse_config(in);
  CHECK(entries.at("tau") == "0.025");
  CHECK(entries.at("case") == "gravity");
  CHECK(entries.at("out-dir") == "runs/a");

  std::istringstream dup("a = 1\na = 2\n");
  CHECK_THROWS_AS(parse_config(dup), InputError);
  std::istringstream bad("just words\n");
  CHECK_THROWS_AS(parse_config(bad), InputError);
}

TEST_CASE("vtk snapshot structure") {
  const fs::path path = fs::temp_directory_path() / "fpfv_snap_test.vtk";
  const Mesh mesh = base_mesh();
  CellField rho(mesh.n_cells());
  for (int k = 0; k < mesh.n_cells(); ++k) rho[k] = k + 0.5;
  write_vtk_snapshot(path.string(), mesh, {{"rho", &rho}});
  const std::string text = slurp(path);
  CHECK(text.find("# vtk DataFile Version 3.0") == 0);
  CHECK(text.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(text.find("POINTS 8 double") != std::string::npos);
  CHECK(text.find("CELLS 8 32") != std::string::npos);
  CHECK(text.find("CELL_TYPES 8") != std::string::npos);
  CHECK(text.find("CELL_DATA 8") != std::string::npos);
  CHECK(text.find("SCALARS rho double 1") != std::string::npos);
  CHECK(text.find(format_sci(3.5)) != std::string::npos);
  fs::remove(path);
}

#ifdef FPFV_CLI_PATH

TEST_CASE("cli mesh: generate, write, reject inadmissible") {
  fs::create_directories(kWork);
  const fs::path mesh_path = kWork / "level1.mesh";
  CHECK(run_cli("mesh --base embedded --refine subdivision:2 --out " + mesh_path.string()) == 0);
  const Mesh mesh = load_mesh(mesh_path.string());
  CHECK(mesh.n_cells() == 32);

  const fs::path bad = kWork / "bad.mesh";
  std::ofstream out(bad);
  out << "vertices 4\n0 0\n1 0\n1 1\n0 1\ntriangles 2\n0 1 2\n0 2 3\n";
  out.close();
  CHECK(run_cli("mesh --file " + bad.string() + " --validate") == 3);
}

TEST_CASE("cli run: series output, snapshots, bitwise determinism") {
  fs::create_directories(kWork);
  const std::string common =
      "run --case gravity --g 1 --delta 0.001 --refine subdivision:2 --tau 0.025 --T 0.1 "
      "--snapshot-stride 2 --out-dir ";
  const fs::path dir1 = kWork / "run1";
  const fs::path dir2 = kWork / "run2";
  CHECK(run_cli(common + dir1.string()) == 0);
  CHECK(run_cli(common + dir2.string()) == 0);
  const std::string series1 = slurp(dir1 / "series.csv");
  CHECK(series1 == slurp(dir2 / "series.csv"));
  CHECK(std::count(series1.begin(), series1.end(), '\n') == 5);  // header + 4 steps
  CHECK(fs::exists(dir1 / "snapshot_0.vtk"));
  CHECK(fs::exists(dir1 / "snapshot_2.vtk"));
  CHECK(fs::exists(dir1 / "snapshot_4.vtk"));
}

TEST_CASE("cli run: config file with flag override and unknown keys") {
  fs::create_directories(kWork);
  const fs::path cfg = kWork / "run.cfg";
  {
    std::ofstream out(cfg);
    out << "case = gravity\ndelta = 0.001\ntau = 0.05\nT = 0.1\nrefine = subdivision:2\n";
    out << "out-dir = " << (kWork / "cfg_run").string() << "\n";
  }
  CHECK(run_cli("run --config " + cfg.string()) == 0);
  // two steps at tau = 0.05
  const std::string series = slurp(kWork / "cfg_run" / "series.csv");
  CHECK(std::count(series.begin(), series.end(), '\n') == 3);

  // the flag wins over the file value
  CHECK(run_cli("run --config " + cfg.string() + " --tau 0.025 --out-dir " +
                (kWork / "cfg_run2").string()) == 0);
  const std::string series2 = slurp(kWork / "cfg_run2" / "series.csv");
  CHECK(std::count(series2.begin(), series2.end(), '\n') == 5);

  const fs::path bad = kWork / "bad.cfg";
  {
    std::ofstream out(bad);
    out << "tau = 0.05\nunknown_knob = 3\n";
  }
  CHECK(run_cli("run --config " + bad.string()) == 1);
  // non-integral T/tau is an input error
  CHECK(run_cli("run --tau 0.03 --T 0.1") == 1);
}

TEST_CASE("cli convergence: table with rates") {
  fs::create_directories(kWork);
  const fs::path dir = kWork / "ladder";
  CHECK(run_cli("convergence --case gravity --delta 0.001 --levels 2 --tau0 0.05 --T 0.1 "
                "--out-dir " + dir.string()) == 0);
  const std::vector<TableRow> rows = read_table_csv((dir / "table.csv").string());
  REQUIRE(rows.size() == 2);
  CHECK(std::isnan(rows[0].l1_rate));
  CHECK(rows[1].l1 < rows[0].l1);
  CHECK(rows[1].l1_rate > 0.5);
}

#endif  // FPFV_CLI_PATH
