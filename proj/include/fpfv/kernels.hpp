#pragma once

namespace fpfv {

// Scalar nonlinearities of the time discretization: the Boltzmann entropy H,
// the nonlinear mean Theta realizing the discrete entropy chain rule, the
// extrapolation Xi built from f(r) = Theta(1,r) and its inverse g, the cosh
// dissipation pair psi/psi*, and the C^1 reparametrization (X, Y) of the
// constraint X = Xi(a, Y) used by the nested Newton solver.

inline constexpr double kInvE = 0.36787944117144232;  // 1/e
inline constexpr double kE = 2.718281828459045235;

/// Parameters of the extrapolation kernels and of the inner root solve for
/// g = f^{-1}. Build through make() so the cached fields are consistent.
struct KernelConfig {
  double xi_cut = 0.5;               // reparametrization cutoff, must exceed 1/e
  double near_equal_rel_tol = 1e-2;  // |a-b| <= tol*(a+b) switches Theta to the series branch
  double inner_tol = 1e-14;          // absolute tolerance on f(g) - s in the inner solve
  int inner_max_iters = 100;

  // derived, cached by make()
  double g_at_cut = 0.0;  // g(xi_cut)
  double speed = 0.0;     // g'(xi_cut), the parametrization speed

  static KernelConfig make(double xi_cut = 0.5, double near_equal_rel_tol = 1e-2,
                           double inner_tol = 1e-14, int inner_max_iters = 100);
};

double entropy(double a);        // H(a) = a log a - a + 1, H(0) = 1
double entropy_prime(double a);  // H'(a) = log a, requires a > 0
double entropy_conj(double p);   // H*(p) = exp(p) - 1

/// Theta(a,b) = exp((b log b - a log a)/(b - a) - 1), Theta(a,a) = a,
/// Theta(a,0) = a/e. Switches to a cancellation-free expansion around the
/// midpoint when |a-b| <= near_equal_rel_tol*(a+b); the divided difference
/// loses a factor (a+b)/|a-b| of precision, so the cutoff must stay well
/// above machine epsilon times that factor.
double theta_mean(double a, double b, double near_equal_rel_tol = 1e-2);

double f_eval(double r);   // f(r) = Theta(1, r); f(0) = 1/e
double f_prime(double r);  // finite for r > 0, +infinity sentinel at r = 0

/// g(s) = f^{-1}(s) for s > 1/e (safeguarded Newton on f), 0 otherwise.
double g_eval(double s, const KernelConfig& cfg);

/// Xi(a,c) = a g(c/a) for a > 0; Xi(0,c) = e*c for c >= 0 and 0 for c < 0.
double xi_extrapolate(double a, double c, const KernelConfig& cfg);

double psi(double z);              // 2 z arcsinh(z/2) - 2 sqrt(4 + z^2) + 4
double psi_star(double xi);        // 4 (cosh(xi/2) - 1)
double psi_star_prime(double xi);  // 2 sinh(xi/2)

struct ReparamValue {
  double X;   // rho^{n+1} coordinate
  double Y;   // theta coordinate
  double dX;  // dX/ds
  double dY;  // dY/ds
};

/// C^1 parametrization s -> (X, Y)(a; s) of the graph X = Xi(a, Y).
/// For a = 0: X = s, Y = s/e. For a > 0 the theta coordinate runs at unit
/// speed below the cutoff (Y = a (s + xi), X = a g(s + xi) for s <= 0) and
/// the rho coordinate runs at speed lambda = g'(xi) above it
/// (X = a (lambda s + g(xi)), Y = a f(lambda s + g(xi)) for s > 0).
ReparamValue reparam(double a, double s, const KernelConfig& cfg);

}  // namespace fpfv
