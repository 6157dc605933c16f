#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fpfv/cases.hpp"
#include "fpfv/errors.hpp"
#include "fpfv/mesh.hpp"
#include "fpfv/scheme.hpp"

using namespace fpfv;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("gravity case: boundary values and setup self-check") {
  const CaseSpec grav = gravity_case(1.0, 0.0);  // construction runs the PDE self-check
  CHECK(grav.has_exact);

  // rho0 vanishes along x1 = 1 when delta = 0
  for (double y : {0.0, 0.3, 0.9}) {
    CHECK(std::abs(grav.rho0({1.0, y})) <= 1e-13);
    CHECK(grav.rho0({0.5, y}) > 0.0);
  }
  // exact(0, (0, .)) = pi (1 + e^{-1/2})
  CHECK(grav.exact(0.0, {0.0, 0.7}) == doctest::Approx(5.0470649183199732).epsilon(1e-14));
  // strictly positive right after the start
  CHECK(grav.exact(1e-3, {1.0, 0.5}) > 0.0);

  const CaseSpec shifted = gravity_case(1.0, 0.001);
  CHECK(shifted.rho0({1.0, 0.5}) > 0.0);
  CHECK_THROWS_AS(gravity_case(1.0, -0.1), InputError);
}

TEST_CASE("gravity exact: discrete no-flux compatibility") {
  // the transient part of the flux is e^{-alpha(t+delta)} e^{g x/2} alpha sin(pi x):
  // compare g rho - d1 rho against it on a grid
  const double g = 1.0, delta = 0.001;
  const CaseSpec grav = gravity_case(g, delta);
  const double alpha = kPi * kPi + 0.25;
  for (double t : {0.0, 0.05, 0.2}) {
    for (double x : {0.1, 0.5, 0.85}) {
      const double h = 1e-6;
      const double d1 = (grav.exact(t, {x + h, 0.0}) - grav.exact(t, {x - h, 0.0})) / (2.0 * h);
      const double flux = g * grav.exact(t, {x, 0.0}) - d1;
      const double expected = std::exp(-alpha * (t + delta)) * std::exp(0.5 * g * x) * alpha *
                              std::sin(kPi * x);
      CHECK(flux == doctest::Approx(expected).epsilon(1e-7));
    }
  }
}

TEST_CASE("spiral case: center values and range") {
  const CaseSpec spiral = spiral_case(1e-2);
  CHECK(!spiral.has_exact);
  CHECK(spiral.potential({0.5, 0.5}) == 0.0);
  CHECK(spiral.rho0({0.5, 0.5}) ==
        doctest::Approx(1.0 / (std::sqrt(2.0 * kPi) * 1e-2)).epsilon(1e-14));
  for (double x = 0.05; x < 1.0; x += 0.13) {
    for (double y = 0.05; y < 1.0; y += 0.17) {
      const double v = spiral.potential({x, y});
      CHECK(v >= 0.0);
      CHECK(v <= 5.0);
    }
  }
  CHECK_THROWS_AS(spiral_case(0.0), InputError);
}

TEST_CASE("error norms: exact trajectory, constant offset") {
  const Mesh mesh = refine_subdivision(base_mesh(), 2);
  auto exact = [](double t, Vec2 x) { return 1.0 + t + x.x + 2.0 * x.y; };
  const double tau = 0.1;
  const int steps = 5;

  Trajectory traj;
  traj.tau = tau;
  traj.steps_completed = steps;
  traj.rho.emplace_back(mesh.n_cells());
  for (int n = 1; n <= steps; ++n) {
    CellField state(mesh.n_cells());
    for (int k = 0; k < mesh.n_cells(); ++k) {
      state[k] = exact(tau * n, mesh.cells[k].center);
    }
    traj.rho.push_back(state);
  }
  CHECK(error_norms(mesh, traj, exact, ErrorNorm::L1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(error_norms(mesh, traj, exact, ErrorNorm::L2) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(error_norms(mesh, traj, exact, ErrorNorm::Linf) == doctest::Approx(0.0).epsilon(1e-14));

  // adding c to every value gives L1 = c m_Omega T, Linf = c, L2 = c sqrt(m_Omega T)
  const double c = 0.37;
  for (int n = 1; n <= steps; ++n) {
    for (int k = 0; k < mesh.n_cells(); ++k) traj.rho[n][k] += c;
  }
  const double T = tau * steps;
  CHECK(error_norms(mesh, traj, exact, ErrorNorm::L1) == doctest::Approx(c * T).epsilon(1e-12));
  CHECK(error_norms(mesh, traj, exact, ErrorNorm::L2) ==
        doctest::Approx(c * std::sqrt(T)).epsilon(1e-12));
  CHECK(error_norms(mesh, traj, exact, ErrorNorm::Linf) == doctest::Approx(c).epsilon(1e-13));

  CHECK_THROWS_AS(error_norms(mesh, traj, nullptr, ErrorNorm::L1), InputError);
}

TEST_CASE("gravity short run converges toward the exact solution") {
  const CaseSpec grav = gravity_case(1.0, 0.001);
  const Mesh mesh = refine_subdivision(base_mesh(), 4);
  const PotentialField pot = discretize_potential(mesh, grav.potential);
  const CellField rho0 = discretize_initial(mesh, grav.rho0);
  SchemeParams params;
  params.tau = 0.0125;
  params.steps = 8;
  const Trajectory traj = run_trajectory(mesh, pot, rho0, params);
  const double l1 = error_norms(mesh, traj, grav.exact, ErrorNorm::L1);
  const double linf = error_norms(mesh, traj, grav.exact, ErrorNorm::Linf);
  CHECK(l1 > 0.0);
  CHECK(l1 < 0.05);   // coarse-mesh sanity bound, not a rate assertion
  CHECK(linf < 1.0);
}
