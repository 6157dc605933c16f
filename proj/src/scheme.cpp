#include "fpfv/scheme.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "fpfv/errors.hpp"

namespace fpfv {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

std::string format_history(const std::vector<double>& history) {
  std::ostringstream out;
  out << "residual history:";
  for (double h : history) out << " " << h;
  return out.str();
}

}  // namespace

PotentialField discretize_potential(const Mesh& mesh, const std::function<double(Vec2)>& V) {
  PotentialField pot;
  pot.V = CellField(mesh.n_cells());
  pot.pi = CellField(mesh.n_cells());
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const double v = V(mesh.cells[k].center);
    if (!std::isfinite(v)) {
      throw InputError("potential is not finite at cell " + std::to_string(k));
    }
    pot.V[k] = v;
    pot.pi[k] = std::exp(-v);
  }
  pot.pi_sigma.resize(mesh.interior_facets.size());
  for (size_t f = 0; f < mesh.interior_facets.size(); ++f) {
    const InteriorFacet& fac = mesh.interior_facets[f];
    pot.pi_sigma[f] = std::sqrt(pot.pi[fac.left] * pot.pi[fac.right]);
  }
  return pot;
}

CellField discretize_initial(const Mesh& mesh, const std::function<double(Vec2)>& rho0,
                             int* clamped_cells) {
  CellField rho(mesh.n_cells());
  int clamped = 0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const auto& tri = mesh.triangles[k];
    const Vec2 a = mesh.vertices[tri[0]];
    const Vec2 b = mesh.vertices[tri[1]];
    const Vec2 c = mesh.vertices[tri[2]];
    const double avg =
        (rho0((a + b) * 0.5) + rho0((b + c) * 0.5) + rho0((c + a) * 0.5)) / 3.0;
    if (avg < 0.0) {
      rho[k] = 0.0;
      ++clamped;
    } else {
      rho[k] = avg;
    }
  }
  if (clamped_cells) *clamped_cells = clamped;
  return rho;
}

CellField discretize_pointwise(const Mesh& mesh, const std::function<double(Vec2)>& rho0,
                               int* clamped_cells) {
  CellField rho(mesh.n_cells());
  int clamped = 0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const double v = rho0(mesh.cells[k].center);
    if (v < 0.0) {
      rho[k] = 0.0;
      ++clamped;
    } else {
      rho[k] = v;
    }
  }
  if (clamped_cells) *clamped_cells = clamped;
  return rho;
}

EdgeField sqra_flux(const Mesh& mesh, const PotentialField& pot, const CellField& theta) {
  EdgeField flux(mesh.n_interior());
  for (int f = 0; f < mesh.n_interior(); ++f) {
    const InteriorFacet& fac = mesh.interior_facets[f];
    flux[f] = pot.pi_sigma[static_cast<size_t>(f)] / fac.dist *
              (theta[fac.left] / pot.pi[fac.left] - theta[fac.right] / pot.pi[fac.right]);
  }
  return flux;
}

CellField step_residual(const Mesh& mesh, const PotentialField& pot, const CellField& rho_prev,
                        const CellField& s, double tau, const KernelConfig& kernel) {
  const int n = mesh.n_cells();
  CellField R(n);
  std::vector<double> Y(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const ReparamValue rp = reparam(rho_prev[k], s[k], kernel);
    Y[static_cast<size_t>(k)] = rp.Y;
    R[k] = mesh.cells[k].area * (rp.X - rho_prev[k]) / tau;
  }
  for (int f = 0; f < mesh.n_interior(); ++f) {
    const InteriorFacet& fac = mesh.interior_facets[f];
    const double w = fac.length * pot.pi_sigma[static_cast<size_t>(f)] / fac.dist;
    const double t = w * (Y[static_cast<size_t>(fac.left)] / pot.pi[fac.left] -
                          Y[static_cast<size_t>(fac.right)] / pot.pi[fac.right]);
    R[fac.left] += t;
    R[fac.right] -= t;
  }
  return R;
}

Eigen::SparseMatrix<double> step_jacobian(const Mesh& mesh, const PotentialField& pot,
                                          const CellField& rho_prev, const CellField& s,
                                          double tau, const KernelConfig& kernel) {
  const int n = mesh.n_cells();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n) + 4 * mesh.interior_facets.size());
  std::vector<double> dY(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const ReparamValue rp = reparam(rho_prev[k], s[k], kernel);
    dY[static_cast<size_t>(k)] = rp.dY;
    trips.emplace_back(k, k, mesh.cells[k].area * rp.dX / tau);
  }
  for (int f = 0; f < mesh.n_interior(); ++f) {
    const InteriorFacet& fac = mesh.interior_facets[f];
    const double w = fac.length * pot.pi_sigma[static_cast<size_t>(f)] / fac.dist;
    const double yk = w * dY[static_cast<size_t>(fac.left)] / pot.pi[fac.left];
    const double yl = w * dY[static_cast<size_t>(fac.right)] / pot.pi[fac.right];
    trips.emplace_back(fac.left, fac.left, yk);
    trips.emplace_back(fac.left, fac.right, -yl);
    trips.emplace_back(fac.right, fac.right, yl);
    trips.emplace_back(fac.right, fac.left, -yk);
  }
  SpMat J(n, n);
  J.setFromTriplets(trips.begin(), trips.end());
  J.makeCompressed();
  return J;
}

Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b) {
  if (A.rows() != A.cols() || A.rows() != b.size()) {
    throw InputError("solve_linear: dimension mismatch");
  }
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Eigen::VectorXd::Zero(b.size());
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw NumericalError("solve_linear: factorization failed (singular matrix?)");
  }
  Eigen::VectorXd x = lu.solve(b);
  double rel = (A * x - b).norm() / bnorm;
  if (rel > 1e-12) {
    x += lu.solve(b - A * x);  // one step of iterative refinement
    rel = (A * x - b).norm() / bnorm;
  }
  if (!(rel <= 1e-12) || !x.allFinite()) {
    std::ostringstream msg;
    msg << "solve_linear: relative residual " << rel << " exceeds 1e-12";
    throw NumericalError(msg.str());
  }
  return x;
}

CellField variational_gradient(const Mesh& mesh, const PotentialField& pot,
                               const CellField& rho_prev, const CellField& theta, double tau,
                               const KernelConfig& kernel) {
  const int n = mesh.n_cells();
  CellField grad(n);
  for (int k = 0; k < n; ++k) {
    grad[k] = mesh.cells[k].area / tau * (xi_extrapolate(rho_prev[k], theta[k], kernel) - rho_prev[k]);
  }
  for (int f = 0; f < mesh.n_interior(); ++f) {
    const InteriorFacet& fac = mesh.interior_facets[f];
    const double w = fac.length * pot.pi_sigma[static_cast<size_t>(f)] / fac.dist;
    const double t = w * (theta[fac.left] / pot.pi[fac.left] -
                          theta[fac.right] / pot.pi[fac.right]);
    grad[fac.left] += t;
    grad[fac.right] -= t;
  }
  return grad;
}

struct StepSolver::Impl {
  const Mesh& mesh;
  const PotentialField& pot;
  SchemeParams params;
  int n;

  std::vector<double> facet_w;   // m_sigma pi_sigma / d_sigma
  std::vector<double> inv_pi;

  SpMat mat;                      // shared sparsity: diagonal + adjacency
  std::vector<int> diag_slot;     // value offsets into mat
  std::vector<int> lr_slot;       // (left,right) per facet
  std::vector<int> rl_slot;       // (right,left) per facet
  Eigen::SimplicialLDLT<SpMat> ldlt;
  bool pattern_analyzed = false;

  std::vector<double> X, Y, dX, dY;
  std::vector<double> Xt, Yt, dXt, dYt;

  Impl(const Mesh& m, const PotentialField& p, SchemeParams prm)
      : mesh(m), pot(p), params(std::move(prm)), n(m.n_cells()) {
    facet_w.resize(mesh.interior_facets.size());
    for (size_t f = 0; f < mesh.interior_facets.size(); ++f) {
      const InteriorFacet& fac = mesh.interior_facets[f];
      facet_w[f] = fac.length * pot.pi_sigma[f] / fac.dist;
    }
    inv_pi.resize(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) inv_pi[static_cast<size_t>(k)] = 1.0 / pot.pi[k];

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(n) + 4 * mesh.interior_facets.size());
    for (int k = 0; k < n; ++k) trips.emplace_back(k, k, 1.0);
    for (const InteriorFacet& fac : mesh.interior_facets) {
      trips.emplace_back(fac.left, fac.right, 0.0);
      trips.emplace_back(fac.right, fac.left, 0.0);
    }
    mat.resize(n, n);
    mat.setFromTriplets(trips.begin(), trips.end());
    mat.makeCompressed();

    auto slot_of = [&](int row, int col) {
      const int* outer = mat.outerIndexPtr();
      const int* inner = mat.innerIndexPtr();
      for (int i = outer[col]; i < outer[col + 1]; ++i) {
        if (inner[i] == row) return i;
      }
      throw NumericalError("internal: missing sparsity slot");
    };
    diag_slot.resize(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) diag_slot[static_cast<size_t>(k)] = slot_of(k, k);
    lr_slot.resize(mesh.interior_facets.size());
    rl_slot.resize(mesh.interior_facets.size());
    for (size_t f = 0; f < mesh.interior_facets.size(); ++f) {
      const InteriorFacet& fac = mesh.interior_facets[f];
      lr_slot[f] = slot_of(fac.left, fac.right);
      rl_slot[f] = slot_of(fac.right, fac.left);
    }

    const size_t sz = static_cast<size_t>(n);
    X.resize(sz); Y.resize(sz); dX.resize(sz); dY.resize(sz);
    Xt.resize(sz); Yt.resize(sz); dXt.resize(sz); dYt.resize(sz);
  }

  // Densities this far below the mean cannot be pushed through the
  // parametrization in double precision (the ratio theta/rho overflows);
  // they take the a -> 0 limit branch, which agrees with the exact
  // constraint to O(a log(theta/a) / theta) ~ 1e-240 relative.
  double vacuum_floor = 0.0;

  void eval_reparam(const CellField& rho_prev, const std::vector<double>& s,
                    std::vector<double>& Xo, std::vector<double>& Yo, std::vector<double>& dXo,
                    std::vector<double>& dYo) const {
    for (int k = 0; k < n; ++k) {
      const double a = rho_prev[k] <= vacuum_floor ? 0.0 : rho_prev[k];
      const ReparamValue rp = reparam(a, s[static_cast<size_t>(k)], params.kernel);
      Xo[static_cast<size_t>(k)] = rp.X;
      Yo[static_cast<size_t>(k)] = rp.Y;
      dXo[static_cast<size_t>(k)] = rp.dX;
      dYo[static_cast<size_t>(k)] = rp.dY;
    }
  }

  // tau * sum_K |R_K|; fluxes are accumulated facet-wise so that the
  // conservative pairs cancel exactly.
  double residual(const CellField& rho_prev, const std::vector<double>& Xo,
                  const std::vector<double>& Yo, Eigen::VectorXd& R) const {
    for (int k = 0; k < n; ++k) {
      R[k] = mesh.cells[k].area * (Xo[static_cast<size_t>(k)] - rho_prev[k]) / params.tau;
    }
    for (size_t f = 0; f < mesh.interior_facets.size(); ++f) {
      const InteriorFacet& fac = mesh.interior_facets[f];
      const double t = facet_w[f] * (Yo[static_cast<size_t>(fac.left)] * inv_pi[static_cast<size_t>(fac.left)] -
                                     Yo[static_cast<size_t>(fac.right)] * inv_pi[static_cast<size_t>(fac.right)]);
      R[fac.left] += t;
      R[fac.right] -= t;
    }
    return params.tau * R.cwiseAbs().sum();
  }

  // Solve J delta = -R. The similarity transform D = diag(sqrt(dY/pi))
  // symmetrizes the Jacobian (dY > 0 always), and the Jacobi equilibration
  // E = diag(1/sqrt(A_KK)) brings all entries to O(1) even when columns
  // scale with near-subnormal densities: the scaled system E D J D^{-1} E
  // has unit diagonal and off-diagonal entries -w_sigma q_K q_L with
  // q_K = sqrt(y_K / diag_K), y_K = dY_K / pi_K.
  Eigen::VectorXd solve_newton_system(const Eigen::VectorXd& R) {
    Eigen::VectorXd sy(n), sd(n), q(n);
    {
      std::vector<double> diag(static_cast<size_t>(n));
      for (int k = 0; k < n; ++k) {
        diag[static_cast<size_t>(k)] = mesh.cells[k].area * dX[static_cast<size_t>(k)] / params.tau;
      }
      for (size_t f = 0; f < mesh.interior_facets.size(); ++f) {
        const InteriorFacet& fac = mesh.interior_facets[f];
        diag[static_cast<size_t>(fac.left)] +=
            facet_w[f] * dY[static_cast<size_t>(fac.left)] * inv_pi[static_cast<size_t>(fac.left)];
        diag[static_cast<size_t>(fac.right)] += facet_w[f] * dY[static_cast<size_t>(fac.right)] *
                                                inv_pi[static_cast<size_t>(fac.right)];
      }
      for (int k = 0; k < n; ++k) {
        const double y = dY[static_cast<size_t>(k)] * inv_pi[static_cast<size_t>(k)];
        const double d = diag[static_cast<size_t>(k)];
        if (!(y > 0.0) || !(d > 0.0) || !std::isfinite(d)) {
          throw NumericalError("Newton system has a degenerate diagonal at cell " +
                               std::to_string(k));
        }
        sy[k] = std::sqrt(y);
        sd[k] = std::sqrt(d);
        q[k] = sy[k] / sd[k];
      }
    }
    double* val = mat.valuePtr();
    for (int k = 0; k < n; ++k) val[diag_slot[static_cast<size_t>(k)]] = 1.0;
    for (size_t f = 0; f < mesh.interior_facets.size(); ++f) {
      const InteriorFacet& fac = mesh.interior_facets[f];
      const double coupling = -facet_w[f] * q[fac.left] * q[fac.right];
      val[lr_slot[f]] = coupling;
      val[rl_slot[f]] = coupling;
    }
    const Eigen::VectorXd rhs = (-R).cwiseProduct(q);
    auto unscale = [&](const Eigen::VectorXd& z) {
      Eigen::VectorXd delta(n);
      for (int k = 0; k < n; ++k) delta[k] = z[k] / sd[k] / sy[k];
      return delta;
    };

    if (params.linear_solver == LinearSolverKind::BiCGStab) {
      Eigen::BiCGSTAB<SpMat, Eigen::DiagonalPreconditioner<double>> krylov;
      krylov.setTolerance(1e-13);
      krylov.setMaxIterations(20 * n);
      krylov.compute(mat);
      const Eigen::VectorXd z = krylov.solve(rhs);
      Eigen::VectorXd delta = unscale(z);
      if (krylov.info() != Eigen::Success || !delta.allFinite()) {
        throw NumericalError("BiCGStab failed on the Newton system");
      }
      return delta;
    }

    if (!pattern_analyzed) {
      ldlt.analyzePattern(mat);
      pattern_analyzed = true;
    }
    ldlt.factorize(mat);
    if (ldlt.info() == Eigen::Success) {
      Eigen::VectorXd delta = unscale(ldlt.solve(rhs));
      if (delta.allFinite()) return delta;
    }
    // rounding can push the factorization off PSD; retry unsymmetric
    Eigen::VectorXd delta = unscale(solve_linear(mat, rhs));
    if (!delta.allFinite()) throw NumericalError("Newton direction is not finite");
    return delta;
  }

  StepResult run(const CellField& rho_prev) {
    const double mass0 = rho_prev.mass(mesh);
    if (!(mass0 > 0.0)) throw InputError("solve_step requires positive total mass");
    for (int k = 0; k < n; ++k) {
      if (!(rho_prev[k] >= 0.0)) {
        throw InputError("solve_step requires a nonnegative density");
      }
    }
    const double tol = params.newton_tol * mass0;
    vacuum_floor = 1e-280 * mass0 / mesh.domain_area;
    // Initial guess: theta = rho_prev on positive cells (exact for the Gibbs
    // state), a small mass-scaled value on vacuum cells.
    const double s_pos = (1.0 - params.kernel.g_at_cut) / params.kernel.speed;
    const double s_vac = 1e-12 * mass0 / mesh.domain_area;
    std::vector<double> s(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
      s[static_cast<size_t>(k)] = rho_prev[k] > vacuum_floor ? s_pos : s_vac;
    }

    Eigen::VectorXd R(n), Rt(n);
    std::vector<double> s_trial(static_cast<size_t>(n));
    eval_reparam(rho_prev, s, X, Y, dX, dY);
    double norm = residual(rho_prev, X, Y, R);
    std::vector<double> history{norm};

    int iters = 0;
    while (norm > tol) {
      if (iters >= params.newton_max_iters) {
        throw NumericalError("Newton did not converge within " +
                             std::to_string(params.newton_max_iters) + " iterations; " +
                             format_history(history));
      }
      const Eigen::VectorXd delta = solve_newton_system(R);
      double alpha = 1.0;
      bool accepted = false;
      for (int h = 0; h <= params.max_halvings; ++h) {
        for (int k = 0; k < n; ++k) {
          s_trial[static_cast<size_t>(k)] = s[static_cast<size_t>(k)] + alpha * delta[k];
        }
        eval_reparam(rho_prev, s_trial, Xt, Yt, dXt, dYt);
        const double norm_trial = residual(rho_prev, Xt, Yt, Rt);
        if (norm_trial < norm || norm_trial <= tol) {
          s.swap(s_trial);
          X.swap(Xt); Y.swap(Yt); dX.swap(dXt); dY.swap(dYt);
          std::swap(R, Rt);
          norm = norm_trial;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        throw NumericalError("Newton damping stalled; " + format_history(history));
      }
      ++iters;
      history.push_back(norm);
    }

    StepResult result;
    result.theta = CellField(n);
    result.rho_next = CellField(n);
    result.entropy_release = CellField(n);
    for (int k = 0; k < n; ++k) {
      const double theta_k = Y[static_cast<size_t>(k)];
      const double rho_k = X[static_cast<size_t>(k)];
      if (!(theta_k > 0.0)) {
        throw NumericalError("converged step has nonpositive theta at cell " + std::to_string(k));
      }
      if (!(rho_k >= 0.0)) {
        throw NumericalError("converged step has negative density at cell " + std::to_string(k));
      }
      result.theta[k] = theta_k;
      result.rho_next[k] = rho_k;
      result.entropy_release[k] =
          entropy(rho_k) - entropy(rho_prev[k]) - std::log(theta_k) * (rho_k - rho_prev[k]);
    }
    result.flux = sqra_flux(mesh, pot, result.theta);
    result.newton_iters = iters;
    result.final_residual = norm;
    return result;
  }
};

StepSolver::StepSolver(const Mesh& mesh, const PotentialField& pot, SchemeParams params)
    : impl_(std::make_unique<Impl>(mesh, pot, std::move(params))) {}

StepSolver::~StepSolver() = default;

StepResult StepSolver::step(const CellField& rho_prev) { return impl_->run(rho_prev); }

StepResult solve_step(const Mesh& mesh, const PotentialField& pot, const CellField& rho_prev,
                      const SchemeParams& params) {
  return StepSolver(mesh, pot, params).step(rho_prev);
}

Trajectory run_trajectory(const Mesh& mesh, const PotentialField& pot, const CellField& rho0,
                          const SchemeParams& params, const StepObserver& observer,
                          bool retain_states, bool retain_theta) {
  Trajectory traj;
  traj.tau = params.tau;
  if (retain_states) {
    traj.rho.reserve(static_cast<size_t>(params.steps) + 1);
    traj.rho.push_back(rho0);
  }
  StepSolver solver(mesh, pot, params);
  CellField rho = rho0;
  for (int step = 0; step < params.steps; ++step) {
    StepResult result = solver.step(rho);
    if (observer) observer(step, rho, result);
    rho = result.rho_next;
    if (retain_states) traj.rho.push_back(rho);
    if (retain_theta) traj.theta.push_back(result.theta);
    ++traj.steps_completed;
  }
  traj.final_rho = std::move(rho);
  return traj;
}

}  // namespace fpfv
