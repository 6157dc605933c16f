#include "fpfv/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fpfv/errors.hpp"

namespace fpfv {

namespace {

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0)) {
    std::ostringstream msg;
    msg << what << " must be nonnegative, got " << v;
    throw std::domain_error(msg.str());
  }
}

}  // namespace

double entropy(double a) {
  require_nonnegative(a, "entropy argument");
  if (a == 0.0) return 1.0;
  return a * std::log(a) - a + 1.0;
}

double entropy_prime(double a) {
  if (!(a > 0.0)) throw std::domain_error("entropy_prime requires a > 0");
  return std::log(a);
}

double entropy_conj(double p) { return std::expm1(p); }

double theta_mean(double a, double b, double near_equal_rel_tol) {
  require_nonnegative(a, "theta_mean argument a");
  require_nonnegative(b, "theta_mean argument b");
  if (a == b) return a;
  if (a == 0.0 || b == 0.0) return (a + b) * kInvE;
  const double lo = std::min(a, b), hi = std::max(a, b);
  if (lo < 1e-15 * hi) {
    // homogeneous form M f(m/M); the direct divided difference can overflow
    // for extreme ratios (b log b alone exceeds the double range)
    return hi * f_eval(lo / hi);
  }
  const double sum = a + b;
  if (std::abs(b - a) <= near_equal_rel_tol * sum) {
    // Expansion of the divided difference (b log b - a log a)/(b - a) around
    // the midpoint m: log m + 1 - u^2/6 - u^4/20 - u^6/42, u = (b-a)/(a+b).
    const double m = 0.5 * sum;
    const double u2 = ((b - a) / sum) * ((b - a) / sum);
    return m * std::exp(-u2 * (1.0 / 6.0 + u2 * (1.0 / 20.0 + u2 / 42.0)));
  }
  return std::exp((b * std::log(b) - a * std::log(a)) / (b - a) - 1.0);
}

double f_eval(double r) {
  require_nonnegative(r, "f argument");
  if (r > 1e15) {
    // (r log r - r + 1)/(r - 1) = log r - 1 + log(r)/(r-1) + O(1/r)
    return r * kInvE * std::exp(std::log(r) / (r - 1.0));
  }
  if (r == 0.0) return kInvE;
  if (r == 1.0) return 1.0;
  const double sum = 1.0 + r;
  if (std::abs(r - 1.0) <= 1e-2 * sum) {
    const double m = 0.5 * sum;
    const double u2 = ((r - 1.0) / sum) * ((r - 1.0) / sum);
    return m * std::exp(-u2 * (1.0 / 6.0 + u2 * (1.0 / 20.0 + u2 / 42.0)));
  }
  return std::exp((r * std::log(r)) / (r - 1.0) - 1.0);
}

double f_prime(double r) {
  require_nonnegative(r, "f_prime argument");
  if (r == 0.0) return std::numeric_limits<double>::infinity();
  const double d = r - 1.0;
  if (std::abs(d) <= 1e-4) {
    // ((r-1) - log r)/(r-1)^2 = 1/2 - d/3 + d^2/4 - d^3/5 + d^4/6 + O(d^5)
    const double q = 0.5 + d * (-1.0 / 3.0 + d * (0.25 + d * (-0.2 + d / 6.0)));
    return f_eval(r) * q;
  }
  if (r > 1e15) {
    return f_eval(r) * (1.0 - std::log(r) / d) / d;  // d^2 would overflow
  }
  return f_eval(r) * (d - std::log(r)) / (d * d);
}

double g_eval(double s, const KernelConfig& cfg) {
  if (!(s > kInvE)) return 0.0;
  // Bracket [max(0, s-1), e s]: f(r) <= (r+1)/2 gives f(s-1) <= s/2 <= s and
  // f(r) >= r/e gives f(e s) >= s.
  double lo = std::max(0.0, s - 1.0);
  double hi = s > 1e307 ? std::numeric_limits<double>::max() : kE * s;
  // f is concave and increasing, so Newton started below the root converges
  // monotonically from below; f(2s-1) <= s makes 2s-1 such a starting point.
  double r = std::clamp(2.0 * s - 1.0, lo, hi);
  // The rounding floor of f(r) - s: evaluating f costs eps * |log r| in
  // relative terms, so the absolute inner_tol is not attainable for large s.
  const double floor_tol =
      4.0 * std::numeric_limits<double>::epsilon() * s * (1.0 + std::log1p(s));
  const double tol_eff = std::max(cfg.inner_tol, floor_tol);
  double fr = f_eval(r);
  double resid = fr - s;
  for (int it = 0; it < cfg.inner_max_iters; ++it) {
    if (std::abs(resid) <= tol_eff) break;
    if (resid < 0.0) {
      lo = std::max(lo, r);
    } else {
      hi = std::min(hi, r);
    }
    const double fp = f_prime(r);
    double next = r - resid / fp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection safeguard
    if (next == r) break;
    r = next;
    fr = f_eval(r);
    resid = fr - s;
  }
  if (!(std::abs(resid) <= tol_eff)) {
    std::ostringstream msg;
    msg << "inner solve for g(" << s << ") stalled with residual " << resid;
    throw NumericalError(msg.str());
  }
  // g(s) >= max(0, 2s - 1) holds exactly; snap the iterate onto the bound.
  return std::max(r, std::max(0.0, 2.0 * s - 1.0));
}

double xi_extrapolate(double a, double c, const KernelConfig& cfg) {
  require_nonnegative(a, "xi_extrapolate argument a");
  if (a == 0.0) return c >= 0.0 ? kE * c : 0.0;
  return a * g_eval(c / a, cfg);
}

double psi(double z) {
  const double az = std::abs(z);
  if (az <= 1.0) {
    // 2 sqrt(4+z^2) - 4 = 2 z^2 / (sqrt(4+z^2) + 2) avoids the cancellation.
    return 2.0 * z * std::asinh(0.5 * z) - 2.0 * z * z / (std::hypot(2.0, z) + 2.0);
  }
  return 2.0 * z * std::asinh(0.5 * z) - 2.0 * std::hypot(2.0, z) + 4.0;
}

double psi_star(double xi) {
  const double sh = std::sinh(0.25 * xi);  // 4(cosh(x/2)-1) = 8 sinh^2(x/4)
  const double v = 8.0 * sh * sh;
  if (!std::isfinite(v)) throw NumericalError("psi_star overflow");
  return v;
}

double psi_star_prime(double xi) {
  const double v = 2.0 * std::sinh(0.5 * xi);
  if (!std::isfinite(v)) throw NumericalError("psi_star_prime overflow");
  return v;
}

KernelConfig KernelConfig::make(double xi_cut, double near_equal_rel_tol, double inner_tol,
                                int inner_max_iters) {
  if (!(xi_cut > kInvE)) throw InputError("KernelConfig: xi_cut must exceed 1/e");
  if (!(near_equal_rel_tol >= 0.0)) throw InputError("KernelConfig: bad near_equal_rel_tol");
  if (!(inner_tol > 0.0)) throw InputError("KernelConfig: inner_tol must be positive");
  if (inner_max_iters < 1) throw InputError("KernelConfig: inner_max_iters must be >= 1");
  KernelConfig cfg;
  cfg.xi_cut = xi_cut;
  cfg.near_equal_rel_tol = near_equal_rel_tol;
  cfg.inner_tol = inner_tol;
  cfg.inner_max_iters = inner_max_iters;
  cfg.g_at_cut = g_eval(xi_cut, cfg);
  cfg.speed = 1.0 / f_prime(cfg.g_at_cut);
  if (!(cfg.speed > 0.0) || !std::isfinite(cfg.speed)) {
    throw InputError("KernelConfig: derived speed is not finite and positive");
  }
  return cfg;
}

ReparamValue reparam(double a, double s, const KernelConfig& cfg) {
  require_nonnegative(a, "reparam argument a");
  if (a == 0.0) return {s, s * kInvE, 1.0, kInvE};
  if (s <= 0.0) {
    const double u = s + cfg.xi_cut;
    const double gu = g_eval(u, cfg);
    const double dg = gu > 0.0 ? 1.0 / f_prime(gu) : 0.0;
    return {a * gu, a * u, a * dg, a};
  }
  const double v = cfg.speed * s + cfg.g_at_cut;
  return {a * v, a * f_eval(v), a * cfg.speed, a * cfg.speed * f_prime(v)};
}

}  // namespace fpfv
