#pragma once

#include <functional>
#include <string>

#include "fpfv/fields.hpp"
#include "fpfv/mesh.hpp"
#include "fpfv/scheme.hpp"

namespace fpfv {

// Built-in test problems and error evaluation against exact solutions.

struct CaseSpec {
  std::string name;
  std::function<double(Vec2)> potential;
  std::function<double(Vec2)> rho0;
  std::function<double(double, Vec2)> exact;  // empty when no exact solution
  bool has_exact = false;
  double default_horizon = 0.25;
};

/// Gravitational potential V = -g x1 on the unit square with a closed-form
/// solution of the no-flux problem; rho0 is the exact state at t = 0 and
/// vanishes along x1 = 1 when delta = 0. The construction verifies the PDE
/// residual and the boundary flux of the formula on a sample grid.
CaseSpec gravity_case(double g, double delta);

/// Steep spiral potential in polar coordinates about (1/2, 1/2) with a
/// concentrated Gaussian initial density; no exact solution.
CaseSpec spiral_case(double sigma);

enum class ErrorNorm { L1, L2, Linf };

/// Space-time error accumulator for the cellwise-constant, right-continuous
/// reconstruction: exact is sampled at cell centers and at the right
/// endpoint of each time slab.
class ErrorAccumulator {
 public:
  ErrorAccumulator(const Mesh& mesh, std::function<double(double, Vec2)> exact, double tau);
  void add_step(int step, const CellField& rho_next);
  double result(ErrorNorm norm) const;

 private:
  const Mesh& mesh_;
  std::function<double(double, Vec2)> exact_;
  double tau_;
  double l1_ = 0.0;
  double l2_sq_ = 0.0;
  double linf_ = 0.0;
};

double error_norms(const Mesh& mesh, const Trajectory& trajectory,
                   const std::function<double(double, Vec2)>& exact, ErrorNorm norm);

}  // namespace fpfv
