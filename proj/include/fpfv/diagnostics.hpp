#pragma once

#include "fpfv/fields.hpp"
#include "fpfv/mesh.hpp"
#include "fpfv/scheme.hpp"

namespace fpfv {

// Discrete thermodynamic quantities and the per-step energy-dissipation
// bookkeeping.

struct StepDiagnostics {
  double energy = 0.0;   // E_T(rho^{n+1})
  double entropy = 0.0;  // H_T(rho^{n+1})
  double d_psi = 0.0;    // kinetic dissipation at (theta, F)
  double r_psi = 0.0;    // Fisher dissipation at theta
  double delta = 0.0;    // dissipation balance error (rate units)
  double mass = 0.0;
  double rho_min = 0.0;
  int newton_iters = 0;
};

double discrete_energy(const Mesh& mesh, const PotentialField& pot, const CellField& rho);
double discrete_entropy(const Mesh& mesh, const CellField& rho);

/// Sum over interior facets of (m_sigma theta_sigma / d_sigma)
/// psi(d_sigma F_sigma / theta_sigma), theta_sigma = sqrt(theta_K theta_L);
/// 0 * psi(0/0) = 0, and +infinity when the facet carries flux at zero theta.
double d_psi(const Mesh& mesh, const CellField& theta, const EdgeField& flux);

/// 2 sum over interior facets of (m_sigma pi_sigma / d_sigma)
/// |sqrt(theta_K/pi_K) - sqrt(theta_L/pi_L)|^2.
double r_psi(const Mesh& mesh, const PotentialField& pot, const CellField& theta);

struct FisherSplit {
  double linear_part = 0.0;  // I(rho)
  double seminorm_sq = 0.0;  // |sqrt(rho)|^2_{1,T}
};

/// Splits r_psi/2 into a linear part plus the discrete H^1 seminorm of
/// sqrt(rho): r_psi/2 = I + seminorm_sq.
FisherSplit fisher_split(const Mesh& mesh, const PotentialField& pot, const CellField& rho);

/// Delta = (E_prev - E_next)/tau - d_psi - r_psi.
double edi_residual(double energy_prev, double energy_next, double d_psi_value,
                    double r_psi_value, double tau);

StepDiagnostics per_step_diagnostics(const Mesh& mesh, const PotentialField& pot,
                                     const CellField& rho_prev, const StepResult& step,
                                     double tau);

}  // namespace fpfv
