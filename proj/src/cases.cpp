#include "fpfv/cases.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fpfv/errors.hpp"

namespace fpfv {

namespace {

constexpr double kPi = std::numbers::pi;

// Setup self-check of the gravity formula: the PDE residual
// dt rho + g d1 rho - Lap rho and the boundary flux g rho - d1 rho are
// evaluated on a sample grid with Richardson-extrapolated long double
// central differences (plain double differences cannot resolve 1e-8 here).
void verify_gravity_exact(double g, double delta) {
  const long double gl = g, dl = delta;
  const long double alpha = static_cast<long double>(kPi) * kPi + gl * gl / 4.0L;
  auto rho = [&](long double t, long double x) {
    const long double w = static_cast<long double>(kPi) * std::cos(static_cast<long double>(kPi) * x) +
                          gl / 2.0L * std::sin(static_cast<long double>(kPi) * x);
    return std::exp(-alpha * (t + dl) + gl / 2.0L * x) * w +
           static_cast<long double>(kPi) * std::exp(gl * (x - 0.5L));
  };
  // First derivatives at step 1e-5; the second difference needs a larger
  // step, its rounding floor eps_ld |rho| / h^2 sits above 1e-8 at h = 1e-5.
  const long double h = 1e-5L;
  const long double h2 = 1e-4L;
  auto d_t = [&](long double t, long double x) {
    return (rho(t - 2.0L * h, x) - 8.0L * rho(t - h, x) + 8.0L * rho(t + h, x) -
            rho(t + 2.0L * h, x)) /
           (12.0L * h);
  };
  auto d_x = [&](long double t, long double x) {
    return (rho(t, x - 2.0L * h) - 8.0L * rho(t, x - h) + 8.0L * rho(t, x + h) -
            rho(t, x + 2.0L * h)) /
           (12.0L * h);
  };
  auto d_xx = [&](long double t, long double x) {
    return (-rho(t, x - 2.0L * h2) + 16.0L * rho(t, x - h2) - 30.0L * rho(t, x) +
            16.0L * rho(t, x + h2) - rho(t, x + 2.0L * h2)) /
           (12.0L * h2 * h2);
  };
  long double max_resid = 0.0L, max_flux = 0.0L;
  for (int it = 0; it < 10; ++it) {
    const long double t = 0.02L * (it + 1);
    for (int ix = 0; ix < 10; ++ix) {
      const long double x = (ix + 0.5L) / 10.0L;
      max_resid = std::max(max_resid, std::abs(d_t(t, x) + gl * d_x(t, x) - d_xx(t, x)));
    }
    for (long double x : {0.0L, 1.0L}) {
      max_flux = std::max(max_flux, std::abs(gl * rho(t, x) - d_x(t, x)));
    }
  }
  if (max_resid > 1e-8L || max_flux > 1e-8L) {
    std::ostringstream msg;
    msg << "gravity exact-solution self-check failed: PDE residual "
        << static_cast<double>(max_resid) << ", boundary flux " << static_cast<double>(max_flux);
    throw NumericalError(msg.str());
  }
}

}  // namespace

CaseSpec gravity_case(double g, double delta) {
  if (!(delta >= 0.0)) throw InputError("gravity_case requires delta >= 0");
  verify_gravity_exact(g, delta);
  const double alpha = kPi * kPi + g * g / 4.0;
  CaseSpec spec;
  std::ostringstream name;
  name << "gravity(g=" << g << ",delta=" << delta << ")";
  spec.name = name.str();
  spec.potential = [g](Vec2 x) { return -g * x.x; };
  spec.exact = [alpha, g, delta](double t, Vec2 x) {
    const double w = kPi * std::cos(kPi * x.x) + 0.5 * g * std::sin(kPi * x.x);
    return std::exp(-alpha * (t + delta) + 0.5 * g * x.x) * w + kPi * std::exp(g * (x.x - 0.5));
  };
  spec.has_exact = true;
  spec.rho0 = [exact = spec.exact](Vec2 x) { return std::max(0.0, exact(0.0, x)); };
  spec.default_horizon = 0.25;
  return spec;
}

CaseSpec spiral_case(double sigma) {
  if (!(sigma > 0.0)) throw InputError("spiral_case requires sigma > 0");
  CaseSpec spec;
  std::ostringstream name;
  name << "spiral(sigma=" << sigma << ")";
  spec.name = name.str();
  spec.potential = [sigma](Vec2 x) {
    const double dx = x.x - 0.5, dy = x.y - 0.5;
    const double r = std::hypot(dx, dy);
    const double angle = std::atan2(dy, dx);
    const double c = std::cos(20.0 * r - angle);
    const double c6 = c * c * c * c * c * c;
    return 5.0 * (-std::expm1(-r * r / (sigma * sigma))) * (1.0 - c6);
  };
  spec.rho0 = [sigma](Vec2 x) {
    const double dx = x.x - 0.5, dy = x.y - 0.5;
    return std::exp(-(dx * dx + dy * dy) / (sigma * sigma)) / (std::sqrt(2.0 * kPi) * sigma);
  };
  spec.has_exact = false;
  spec.default_horizon = 0.2;
  return spec;
}

ErrorAccumulator::ErrorAccumulator(const Mesh& mesh, std::function<double(double, Vec2)> exact,
                                   double tau)
    : mesh_(mesh), exact_(std::move(exact)), tau_(tau) {
  if (!exact_) throw InputError("error norms require an exact solution");
}

void ErrorAccumulator::add_step(int step, const CellField& rho_next) {
  const double t_next = tau_ * (step + 1);
  double slab_l1 = 0.0, slab_l2 = 0.0;
  for (int k = 0; k < mesh_.n_cells(); ++k) {
    const double err = std::abs(rho_next[k] - exact_(t_next, mesh_.cells[k].center));
    slab_l1 += mesh_.cells[k].area * err;
    slab_l2 += mesh_.cells[k].area * err * err;
    linf_ = std::max(linf_, err);
  }
  l1_ += tau_ * slab_l1;
  l2_sq_ += tau_ * slab_l2;
}

double ErrorAccumulator::result(ErrorNorm norm) const {
  switch (norm) {
    case ErrorNorm::L1: return l1_;
    case ErrorNorm::L2: return std::sqrt(l2_sq_);
    case ErrorNorm::Linf: return linf_;
  }
  return 0.0;
}

double error_norms(const Mesh& mesh, const Trajectory& trajectory,
                   const std::function<double(double, Vec2)>& exact, ErrorNorm norm) {
  if (trajectory.rho.size() != static_cast<size_t>(trajectory.steps_completed) + 1) {
    throw InputError("error_norms requires a trajectory with retained states");
  }
  ErrorAccumulator acc(mesh, exact, trajectory.tau);
  for (int step = 0; step < trajectory.steps_completed; ++step) {
    acc.add_step(step, trajectory.rho[static_cast<size_t>(step) + 1]);
  }
  return acc.result(norm);
}

}  // namespace fpfv
