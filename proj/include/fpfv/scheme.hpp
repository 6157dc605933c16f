#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>
#include <functional>
#include <memory>
#include <vector>

#include "fpfv/fields.hpp"
#include "fpfv/kernels.hpp"
#include "fpfv/mesh.hpp"

namespace fpfv {

// The one-step nonlinear system: SQRA fluxes built on the intermediate
// density theta^{n+1/2}, the extrapolation rho^{n+1} = Xi(rho^n, theta), and
// the nested Newton solve in the reparametrized unknown s.

enum class LinearSolverKind {
  Direct,    // sparse direct factorization (default)
  BiCGStab,  // diagonally preconditioned stabilized Krylov iteration
};

struct SchemeParams {
  double tau = 1e-2;
  int steps = 1;  // N
  KernelConfig kernel = KernelConfig::make();
  double newton_tol = 1e-11;  // on tau * sum_K |R_K|, in units of total mass
  int newton_max_iters = 50;
  int max_halvings = 30;
  LinearSolverKind linear_solver = LinearSolverKind::Direct;
};

struct StepResult {
  CellField theta;      // theta^{n+1/2}, strictly positive
  CellField rho_next;   // rho^{n+1}, nonnegative
  EdgeField flux;       // F^{n+1/2} on interior facets
  int newton_iters = 0;
  double final_residual = 0.0;  // tau * sum_K |R_K|
  CellField entropy_release;    // r_K <= 0
};

PotentialField discretize_potential(const Mesh& mesh, const std::function<double(Vec2)>& V);

/// Cell averages of rho0 by the symmetric 3-point edge-midpoint rule (exact
/// for quadratics); negative averages are clamped to 0 and counted.
CellField discretize_initial(const Mesh& mesh, const std::function<double(Vec2)>& rho0,
                             int* clamped_cells = nullptr);

/// rho0 sampled at the cell centers. The discrete solution tracks point
/// values at the circumcenters, and the midpoint rule does not damp the
/// O(h) average-vs-center oscillation that cell averages inject on meshes
/// whose circumcenters sit away from the centroids; sampling keeps the
/// trajectory second-order accurate there.
CellField discretize_pointwise(const Mesh& mesh, const std::function<double(Vec2)>& rho0,
                               int* clamped_cells = nullptr);

/// F_{K sigma} = (pi_sigma / d_sigma)(theta_K/pi_K - theta_L/pi_L).
EdgeField sqra_flux(const Mesh& mesh, const PotentialField& pot, const CellField& theta);

CellField step_residual(const Mesh& mesh, const PotentialField& pot, const CellField& rho_prev,
                        const CellField& s, double tau, const KernelConfig& kernel);

Eigen::SparseMatrix<double> step_jacobian(const Mesh& mesh, const PotentialField& pot,
                                          const CellField& rho_prev, const CellField& s,
                                          double tau, const KernelConfig& kernel);

/// Direct sparse solve with a residual check at 1e-12 relative.
Eigen::VectorXd solve_linear(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b);

/// Gradient of the one-step variational functional in the variables
/// s_K = theta_K / pi_K; vanishes at solve_step solutions.
CellField variational_gradient(const Mesh& mesh, const PotentialField& pot,
                               const CellField& rho_prev, const CellField& theta, double tau,
                               const KernelConfig& kernel);

/// One-step solver with reusable sparsity analysis; solve_step wraps it.
class StepSolver {
 public:
  StepSolver(const Mesh& mesh, const PotentialField& pot, SchemeParams params);
  ~StepSolver();
  StepResult step(const CellField& rho_prev);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

StepResult solve_step(const Mesh& mesh, const PotentialField& pot, const CellField& rho_prev,
                      const SchemeParams& params);

struct Trajectory {
  double tau = 0.0;
  int steps_completed = 0;
  std::vector<CellField> rho;    // rho[0] = initial, rho[n] after step n (when retained)
  std::vector<CellField> theta;  // theta[n] for step n+1 (when retained)
  CellField final_rho;
};

using StepObserver = std::function<void(int step, const CellField& rho_prev, const StepResult&)>;

Trajectory run_trajectory(const Mesh& mesh, const PotentialField& pot, const CellField& rho0,
                          const SchemeParams& params, const StepObserver& observer = {},
                          bool retain_states = true, bool retain_theta = false);

}  // namespace fpfv
