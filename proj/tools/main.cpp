// Batch front-end: mesh generation/validation and quality reports, single
// runs with per-step diagnostics (CSV series + VTK snapshots), and
// convergence ladders with rate tables.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fpfv/cases.hpp"
#include "fpfv/diagnostics.hpp"
#include "fpfv/errors.hpp"
#include "fpfv/io.hpp"
#include "fpfv/mesh.hpp"
#include "fpfv/scheme.hpp"

namespace {

using namespace fpfv;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitSolver = 2;
constexpr int kExitValidation = 3;

struct Refinement {
  std::string kind = "subdivision";  // or "repetition"
  int factor = 1;                    // cells multiply by factor^2
};

Refinement parse_refine(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw InputError("--refine expects KIND:N, got '" + text + "'");
  }
  Refinement r;
  r.kind = text.substr(0, colon);
  if (r.kind != "subdivision" && r.kind != "repetition") {
    throw InputError("unknown refinement kind '" + r.kind + "'");
  }
  try {
    r.factor = std::stoi(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw InputError("bad refinement factor in '" + text + "'");
  }
  if (r.factor < 1) throw InputError("refinement factor must be >= 1");
  return r;
}

Mesh resolve_mesh(const std::string& source, const Refinement& refine) {
  Mesh mesh = source == "embedded" ? base_mesh() : load_mesh(source);
  if (refine.factor > 1) {
    if (refine.kind == "subdivision") {
      mesh = refine_subdivision(mesh, refine.factor);
    } else {
      mesh = refine_repetition(mesh, refine.factor);
    }
  }
  return mesh;
}

void print_quality(const Mesh& mesh, const MeshQuality& q) {
  std::cout << "cells = " << mesh.n_cells() << "\n";
  std::cout << "interior_facets = " << mesh.n_interior() << "\n";
  std::cout << "zeta = " << format_sci(q.zeta) << "\n";
  std::cout << "size = " << format_sci(q.size) << "\n";
  std::cout << "d_min = " << format_sci(q.d_min) << "\n";
  std::cout << "eps_iso_max = " << format_sci(q.eps_iso_max) << "\n";
  std::cout << "iso_threshold = " << format_sci(q.iso_threshold) << "\n";
  std::cout << "iso_fraction = " << format_sci(q.iso_fraction) << "\n";
  std::cout << "superadmissibility_defect = " << format_sci(q.superadmissibility_defect) << "\n";
}

void write_quality_csv(const std::string& path, const Mesh& mesh, const MeshQuality& q) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << "cell,area,diameter,iso_defect\n";
  for (int k = 0; k < mesh.n_cells(); ++k) {
    out << k << ',' << format_sci(mesh.cells[k].area) << ','
        << format_sci(mesh.cells[k].diameter) << ',' << format_sci(q.iso_defect[k]) << '\n';
  }
}

/// Fills CLI option values from a `key = value` config file; values given on
/// the command line win, unknown keys are input errors.
class ConfigLayer {
 public:
  ConfigLayer(CLI::App* sub, const std::string& path) : sub_(sub) {
    if (!path.empty()) entries_ = parse_config_file(path);
  }

  template <typename T>
  void apply(const std::string& key, T& var) {
    known_.insert(key);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return;
    if (sub_->count("--" + key) > 0) return;  // flag overrides file
    std::istringstream in(it->second);
    T value;
    if constexpr (std::is_same_v<T, std::string>) {
      value = it->second;
    } else {
      if (!(in >> value)) throw InputError("config key '" + key + "': bad value '" + it->second + "'");
    }
    var = value;
  }

  void finish() const {
    for (const auto& [key, value] : entries_) {
      if (!known_.count(key)) throw InputError("unknown config key '" + key + "'");
    }
  }

 private:
  CLI::App* sub_;
  std::map<std::string, std::string> entries_;
  std::set<std::string> known_;
};

struct RunOptions {
  std::string config_path;
  std::string case_name = "gravity";
  double g = 1.0;
  double delta = 0.001;
  double sigma = 1e-2;
  std::string mesh_source = "embedded";
  std::string refine = "subdivision:1";
  double tau = 0.0125;
  double horizon = 0.25;
  double newton_tol = 1e-11;
  double xi_cut = 0.5;
  std::string out_dir = "out";
  int snapshot_stride = 0;
  std::string init = "centers";  // or "averages"
};

CellField discretize_rho0(const Mesh& mesh, const CaseSpec& spec, const std::string& init,
                          int* clamped) {
  if (init == "centers") return discretize_pointwise(mesh, spec.rho0, clamped);
  if (init == "averages") return discretize_initial(mesh, spec.rho0, clamped);
  throw InputError("unknown init mode '" + init + "' (expected centers or averages)");
}

CaseSpec resolve_case(const RunOptions& opt) {
  if (opt.case_name == "gravity") return gravity_case(opt.g, opt.delta);
  if (opt.case_name == "spiral") return spiral_case(opt.sigma);
  throw InputError("unknown case '" + opt.case_name + "' (expected gravity or spiral)");
}

int steps_for(double horizon, double tau) {
  const double ratio = horizon / tau;
  const int steps = static_cast<int>(std::llround(ratio));
  if (steps < 1 || std::abs(ratio - steps) > 1e-12 * std::max(1, steps)) {
    throw InputError("T/tau must be an integer; got " + std::to_string(ratio));
  }
  return steps;
}

int cmd_mesh(const std::string& base, const std::string& refine_text, bool validate_only,
             const std::string& out_path, const std::string& quality_csv, double iso_threshold) {
  const Refinement refine = parse_refine(refine_text);
  const Mesh mesh = resolve_mesh(base, refine);
  const AdmissibilityReport report = validate_admissible(mesh);
  for (const auto& check : report.checks) {
    std::cout << "check " << check.name << " = " << (check.pass ? "pass" : "FAIL");
    if (!check.pass) std::cout << " (" << check.detail << ")";
    std::cout << "\n";
  }
  if (!report.pass) {
    std::cerr << "mesh failed admissibility validation\n";
    return kExitValidation;
  }
  const MeshQuality q = quality_metrics(mesh, iso_threshold);
  print_quality(mesh, q);
  if (!quality_csv.empty()) write_quality_csv(quality_csv, mesh, q);
  if (!validate_only && !out_path.empty()) save_mesh(mesh, out_path);
  return kExitOk;
}

int cmd_run(const RunOptions& opt) {
  const CaseSpec spec = resolve_case(opt);
  const Refinement refine = parse_refine(opt.refine);
  const Mesh mesh = resolve_mesh(opt.mesh_source, refine);
  const PotentialField pot = discretize_potential(mesh, spec.potential);
  int clamped = 0;
  const CellField rho0 = discretize_rho0(mesh, spec, opt.init, &clamped);
  if (clamped > 0) {
    std::cerr << "warning: clamped negative rho0 values in " << clamped << " cells\n";
  }

  SchemeParams params;
  params.tau = opt.tau;
  params.steps = steps_for(opt.horizon, opt.tau);
  params.newton_tol = opt.newton_tol;
  params.kernel = KernelConfig::make(opt.xi_cut);

  std::filesystem::create_directories(opt.out_dir);
  const double mass0 = rho0.mass(mesh);
  const double cfl_ratio = params.tau / mesh.d_min();
  std::cout << "case = " << spec.name << "\n";
  std::cout << "cells = " << mesh.n_cells() << ", tau = " << format_sci(params.tau)
            << ", steps = " << params.steps << "\n";
  std::cout << "cfl_ratio tau/d_min = " << format_sci(cfl_ratio) << "\n";

  std::vector<SeriesRow> series;
  series.reserve(static_cast<size_t>(params.steps));
  int edi_violations = 0;
  int max_iters = 0;
  double rho_min_run = rho0.min();
  if (opt.snapshot_stride > 0) {
    write_vtk_snapshot(opt.out_dir + "/snapshot_0.vtk", mesh, {{"rho", &rho0}});
  }

  StepObserver observer = [&](int step, const CellField& rho_prev, const StepResult& result) {
    const StepDiagnostics diag = per_step_diagnostics(mesh, pot, rho_prev, result, params.tau);
    SeriesRow row;
    row.t = params.tau * (step + 1);
    row.energy = diag.energy;
    row.entropy = diag.entropy;
    row.d_psi = diag.d_psi;
    row.r_psi = diag.r_psi;
    row.delta = diag.delta;
    row.mass = diag.mass;
    row.rho_min = diag.rho_min;
    row.newton_iters = diag.newton_iters;
    series.push_back(row);
    // one-step EDI: E^{n+1} + tau (D + R) <= E^n + solver slack
    if (diag.delta < -1e-9 * mass0 / params.tau) ++edi_violations;
    max_iters = std::max(max_iters, diag.newton_iters);
    rho_min_run = std::min(rho_min_run, diag.rho_min);
    if (opt.snapshot_stride > 0 && (step + 1) % opt.snapshot_stride == 0) {
      write_vtk_snapshot(opt.out_dir + "/snapshot_" + std::to_string(step + 1) + ".vtk", mesh,
                         {{"rho", &result.rho_next}, {"theta", &result.theta}});
    }
    return;
  };

  Trajectory traj;
  try {
    traj = run_trajectory(mesh, pot, rho0, params, observer, /*retain_states=*/false);
  } catch (const NumericalError& e) {
    write_series_csv(opt.out_dir + "/series.csv", series);
    std::cerr << "solver failure at step " << series.size() << ": " << e.what() << "\n";
    return kExitSolver;
  }
  write_series_csv(opt.out_dir + "/series.csv", series);

  const double drift = std::abs(series.back().mass - mass0);
  std::cout << "steps_completed = " << traj.steps_completed << "\n";
  std::cout << "mass_drift = " << format_sci(drift) << "\n";
  std::cout << "rho_min = " << format_sci(rho_min_run) << "\n";
  std::cout << "max_newton_iters = " << max_iters << "\n";
  std::cout << "edi_violations = " << edi_violations << "\n";
  return kExitOk;
}

struct ConvergenceOptions {
  std::string config_path;
  std::string case_name = "gravity";
  double g = 1.0;
  double delta = 0.001;
  double sigma = 1e-2;
  int levels = 4;
  double tau0 = 0.25 / 3.0;  // ~0.082 * size(base), the ladder anchor ratio
  double horizon = 0.25;
  double newton_tol = 1e-11;
  std::string refine_kind = "subdivision";
  std::string out_dir = "out";
  std::string init = "centers";
};

int cmd_convergence(const ConvergenceOptions& opt) {
  RunOptions case_opt;
  case_opt.case_name = opt.case_name;
  case_opt.g = opt.g;
  case_opt.delta = opt.delta;
  case_opt.sigma = opt.sigma;
  const CaseSpec spec = resolve_case(case_opt);
  if (!spec.has_exact) throw InputError("convergence ladders need a case with an exact solution");
  if (opt.levels < 1) throw InputError("--levels must be >= 1");

  std::filesystem::create_directories(opt.out_dir);
  std::vector<TableRow> rows;
  const Mesh base = base_mesh();
  double prev_cfl = 0.0;
  for (int level = 0; level < opt.levels; ++level) {
    const Mesh mesh = opt.refine_kind == "repetition"
                          ? (level == 0 ? base : refine_repetition(base, 1 << level))
                          : (level == 0 ? base : refine_subdivision(base, 1 << level));
    const PotentialField pot = discretize_potential(mesh, spec.potential);
    const CellField rho0 = discretize_rho0(mesh, spec, opt.init, nullptr);
    SchemeParams params;
    params.tau = opt.tau0 / (1 << level);
    params.steps = steps_for(opt.horizon, params.tau);
    params.newton_tol = opt.newton_tol;

    ErrorAccumulator acc(mesh, spec.exact, params.tau);
    double rho_min_run = rho0.min();
    StepObserver observer = [&](int step, const CellField&, const StepResult& result) {
      acc.add_step(step, result.rho_next);
      rho_min_run = std::min(rho_min_run, result.rho_next.min());
    };
    run_trajectory(mesh, pot, rho0, params, observer, /*retain_states=*/false);

    TableRow row;
    row.tau = params.tau;
    row.size = mesh.size();
    row.l1 = acc.result(ErrorNorm::L1);
    row.l2 = acc.result(ErrorNorm::L2);
    row.linf = acc.result(ErrorNorm::Linf);
    row.rho_min = rho_min_run;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (rows.empty()) {
      row.l1_rate = row.l2_rate = row.linf_rate = nan;
    } else {
      row.l1_rate = std::log2(rows.back().l1 / row.l1);
      row.l2_rate = std::log2(rows.back().l2 / row.l2);
      row.linf_rate = std::log2(rows.back().linf / row.linf);
    }
    rows.push_back(row);
    std::cout << "level " << level << ": tau = " << format_sci(row.tau)
              << ", size = " << format_sci(row.size) << ", L1 = " << format_sci(row.l1)
              << ", L2 = " << format_sci(row.l2) << ", Linf = " << format_sci(row.linf)
              << ", rho_min = " << format_sci(row.rho_min) << "\n";

    const double cfl = params.tau / mesh.d_min();
    if (level > 0 && cfl >= prev_cfl * (1.0 - 1e-12)) {
      std::cerr << "warning: CFL ratio tau/d_min does not shrink across levels ("
                << format_sci(prev_cfl) << " -> " << format_sci(cfl) << ")\n";
    }
    prev_cfl = cfl;
  }
  write_table_csv(opt.out_dir + "/table.csv", rows);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume Fokker-Planck solver with dissipation diagnostics"};
  app.require_subcommand(1);

  // mesh
  auto* mesh_cmd = app.add_subcommand("mesh", "generate, refine, validate a mesh");
  std::string mesh_base = "embedded";
  std::string mesh_refine = "subdivision:1";
  std::string mesh_out, mesh_quality_csv;
  bool mesh_validate = false;
  double iso_threshold = 0.05;
  mesh_cmd->add_option("--base,--file", mesh_base, "embedded or a mesh file path");
  mesh_cmd->add_option("--refine", mesh_refine, "KIND:N (subdivision splits each triangle into N^2, repetition tiles NxN)");
  mesh_cmd->add_flag("--validate", mesh_validate, "only validate, do not write");
  mesh_cmd->add_option("--out", mesh_out, "output mesh file");
  mesh_cmd->add_option("--quality-csv", mesh_quality_csv, "per-cell quality CSV");
  mesh_cmd->add_option("--iso-threshold", iso_threshold, "isotropy defect cutoff");

  // run
  auto* run_cmd = app.add_subcommand("run", "single trajectory with diagnostics output");
  RunOptions run_opt;
  run_cmd->add_option("--config", run_opt.config_path, "key = value config file");
  run_cmd->add_option("--case", run_opt.case_name, "gravity or spiral");
  run_cmd->add_option("--g", run_opt.g, "gravity strength");
  run_cmd->add_option("--delta", run_opt.delta, "gravity time shift");
  run_cmd->add_option("--sigma", run_opt.sigma, "spiral width");
  run_cmd->add_option("--mesh", run_opt.mesh_source, "embedded or a mesh file path");
  run_cmd->add_option("--refine", run_opt.refine, "KIND:N refinement");
  run_cmd->add_option("--tau", run_opt.tau, "time step");
  run_cmd->add_option("--T", run_opt.horizon, "time horizon (T/tau integral)");
  run_cmd->add_option("--newton-tol", run_opt.newton_tol, "Newton stopping tolerance");
  run_cmd->add_option("--xi", run_opt.xi_cut, "reparametrization cutoff");
  run_cmd->add_option("--out-dir", run_opt.out_dir, "output directory");
  run_cmd->add_option("--snapshot-stride", run_opt.snapshot_stride, "VTK snapshot stride");
  run_cmd->add_option("--init", run_opt.init, "rho0 discretization: centers or averages");

  // convergence
  auto* conv_cmd = app.add_subcommand("convergence", "refinement ladder with rate table");
  ConvergenceOptions conv_opt;
  conv_cmd->add_option("--config", conv_opt.config_path, "key = value config file");
  conv_cmd->add_option("--case", conv_opt.case_name, "gravity (needs an exact solution)");
  conv_cmd->add_option("--g", conv_opt.g, "gravity strength");
  conv_cmd->add_option("--delta", conv_opt.delta, "gravity time shift");
  conv_cmd->add_option("--sigma", conv_opt.sigma, "spiral width");
  conv_cmd->add_option("--levels", conv_opt.levels, "number of ladder levels");
  conv_cmd->add_option("--tau0", conv_opt.tau0, "coarsest time step");
  conv_cmd->add_option("--T", conv_opt.horizon, "time horizon");
  conv_cmd->add_option("--newton-tol", conv_opt.newton_tol, "Newton stopping tolerance");
  conv_cmd->add_option("--refine-kind", conv_opt.refine_kind, "subdivision or repetition");
  conv_cmd->add_option("--out-dir", conv_opt.out_dir, "output directory");
  conv_cmd->add_option("--init", conv_opt.init, "rho0 discretization: centers or averages");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (mesh_cmd->parsed()) {
      return cmd_mesh(mesh_base, mesh_refine, mesh_validate, mesh_out, mesh_quality_csv,
                      iso_threshold);
    }
    if (run_cmd->parsed()) {
      ConfigLayer cfg(run_cmd, run_opt.config_path);
      cfg.apply("case", run_opt.case_name);
      cfg.apply("g", run_opt.g);
      cfg.apply("delta", run_opt.delta);
      cfg.apply("sigma", run_opt.sigma);
      cfg.apply("mesh", run_opt.mesh_source);
      cfg.apply("refine", run_opt.refine);
      cfg.apply("tau", run_opt.tau);
      cfg.apply("T", run_opt.horizon);
      cfg.apply("newton-tol", run_opt.newton_tol);
      cfg.apply("xi", run_opt.xi_cut);
      cfg.apply("out-dir", run_opt.out_dir);
      cfg.apply("snapshot-stride", run_opt.snapshot_stride);
      cfg.apply("init", run_opt.init);
      cfg.finish();
      return cmd_run(run_opt);
    }
    if (conv_cmd->parsed()) {
      ConfigLayer cfg(conv_cmd, conv_opt.config_path);
      cfg.apply("case", conv_opt.case_name);
      cfg.apply("g", conv_opt.g);
      cfg.apply("delta", conv_opt.delta);
      cfg.apply("sigma", conv_opt.sigma);
      cfg.apply("levels", conv_opt.levels);
      cfg.apply("tau0", conv_opt.tau0);
      cfg.apply("T", conv_opt.horizon);
      cfg.apply("newton-tol", conv_opt.newton_tol);
      cfg.apply("refine-kind", conv_opt.refine_kind);
      cfg.apply("out-dir", conv_opt.out_dir);
      cfg.apply("init", conv_opt.init);
      cfg.finish();
      return cmd_convergence(conv_opt);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
