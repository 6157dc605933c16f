#include "fpfv/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "fpfv/kernels.hpp"

namespace fpfv {

double discrete_energy(const Mesh& mesh, const PotentialField& pot, const CellField& rho) {
  double e = 0.0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    e += mesh.cells[k].area * (entropy(rho[k]) + pot.V[k] * rho[k]);
  }
  return e;
}

double discrete_entropy(const Mesh& mesh, const CellField& rho) {
  double h = 0.0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    h += mesh.cells[k].area * entropy(rho[k]);
  }
  return h;
}

double d_psi(const Mesh& mesh, const CellField& theta, const EdgeField& flux) {
  double sum = 0.0;
  for (int f = 0; f < mesh.n_interior(); ++f) {
    const InteriorFacet& fac = mesh.interior_facets[f];
    const double theta_sigma = std::sqrt(theta[fac.left] * theta[fac.right]);
    const double fs = flux[f];
    if (theta_sigma == 0.0) {
      if (fs == 0.0) continue;  // 0 * psi(0/0) = 0
      return std::numeric_limits<double>::infinity();
    }
    sum += fac.length * theta_sigma / fac.dist * psi(fac.dist * fs / theta_sigma);
  }
  return sum;
}

double r_psi(const Mesh& mesh, const PotentialField& pot, const CellField& theta) {
  double sum = 0.0;
  for (int f = 0; f < mesh.n_interior(); ++f) {
    const InteriorFacet& fac = mesh.interior_facets[f];
    const double diff = std::sqrt(theta[fac.left] / pot.pi[fac.left]) -
                        std::sqrt(theta[fac.right] / pot.pi[fac.right]);
    sum += 2.0 * fac.length * pot.pi_sigma[static_cast<size_t>(f)] / fac.dist * diff * diff;
  }
  return sum;
}

FisherSplit fisher_split(const Mesh& mesh, const PotentialField& pot, const CellField& rho) {
  FisherSplit split;
  for (int f = 0; f < mesh.n_interior(); ++f) {
    const InteriorFacet& fac = mesh.interior_facets[f];
    const double w = fac.length / fac.dist;
    const double pk = pot.pi[fac.left];
    const double pl = pot.pi[fac.right];
    split.linear_part += w * rho[fac.left] * (std::sqrt(pl / pk) - 1.0);
    split.linear_part += w * rho[fac.right] * (std::sqrt(pk / pl) - 1.0);
    const double diff = std::sqrt(rho[fac.left]) - std::sqrt(rho[fac.right]);
    split.seminorm_sq += w * diff * diff;
  }
  return split;
}

double edi_residual(double energy_prev, double energy_next, double d_psi_value,
                    double r_psi_value, double tau) {
  return (energy_prev - energy_next) / tau - d_psi_value - r_psi_value;
}

StepDiagnostics per_step_diagnostics(const Mesh& mesh, const PotentialField& pot,
                                     const CellField& rho_prev, const StepResult& step,
                                     double tau) {
  StepDiagnostics diag;
  const double energy_prev = discrete_energy(mesh, pot, rho_prev);
  diag.energy = discrete_energy(mesh, pot, step.rho_next);
  diag.entropy = discrete_entropy(mesh, step.rho_next);
  diag.d_psi = d_psi(mesh, step.theta, step.flux);
  diag.r_psi = r_psi(mesh, pot, step.theta);
  diag.delta = edi_residual(energy_prev, diag.energy, diag.d_psi, diag.r_psi, tau);
  diag.mass = step.rho_next.mass(mesh);
  diag.rho_min = step.rho_next.min();
  diag.newton_iters = step.newton_iters;
  return diag;
}

}  // namespace fpfv
