#pragma once

// Special functions with explicit branch-cut control, oscillatory quadrature
// and complex root finding. Everything here is pure and thread-safe.

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dk {

using complex = std::complex<double>;

// Thrown when an iterative scheme stalls. Carries the best estimate so a
// caller can decide whether the partial answer is still usable.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& msg, complex best, double bound)
      : std::runtime_error(msg), best_estimate(best), error_bound(bound) {}
  complex best_estimate;
  double error_bound;
  std::vector<complex> iterates;  // filled by find_root only
};

struct QuadratureSpec {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int max_subdivisions = 200000;
  double period_fraction = 0.25;  // base panel length w.r.t. 2*pi/|t|
  double e_max_override = 0.0;    // semi-infinite truncation override, 0 = auto
};

struct RootFindSpec {
  complex seed{};
  double step_tol = 1e-12;
  double residual_tol = 1e-10;
  int max_iterations = 80;
};

// Principal branch, Im in (-pi, pi]. Exactly-real negative arguments resolve
// to the upper edge: log(-E) = log(E) + i*pi for E > 0.
complex principal_log(complex z);

// lnGamma on the branch induced by principal_log (recursion into the
// Stirling region). Domain error at the poles z = 0, -1, -2, ...
complex log_gamma(complex z);

// C(x) = int_0^x cos(s^2) ds, S(x) = int_0^x sin(s^2) ds. Odd in x.
std::pair<double, double> fresnel(double x);

// Cin(x) = int_0^x (1-cos t)/t dt, si(x) = int_x^inf sin(t)/t dt, x >= 0.
std::pair<double, double> trig_integrals(double x);

// Faddeeva w(z) = exp(-z^2) erfc(-iz). Accurate for Im z >= 0; the lower
// half plane goes through the reflection w(z) = 2 exp(-z^2) - w(-z) and can
// overflow for large |Im z|.
complex faddeeva_w(complex z);
complex erf_complex(complex z);

// Adaptive Gauss-Kronrod over [a, b]. Breakpoints force initial panel edges
// (integrable discontinuities, resonance shoulders).
complex integrate(const std::function<complex(double)>& f, double a, double b,
                  const QuadratureSpec& spec,
                  const std::vector<double>& breakpoints = {});

// int_a^b f(E) exp(-i E t) dE with panels no longer than
// period_fraction * 2*pi/|t| so each panel sees a bounded phase sweep.
complex fourier_quadrature(const std::function<complex(double)>& f, double a,
                           double b, double t, const QuadratureSpec& spec,
                           const std::vector<double>& breakpoints = {});

// Damped Newton with central-difference derivative. Throws ConvergenceError
// (with the iterate trace) instead of returning an unconverged value.
complex find_root(const std::function<complex(complex)>& g,
                  const RootFindSpec& spec);

namespace detail {

// Entire parts of the cosine/sine integrals, valid for any complex w.
complex cin_entire(complex w);
complex si_entire(complex w);  // Si(w) = int_0^w sin(t)/t dt

// Auxiliary f(w) = Ci(w) sin(w) + si(w) cos(w), si as in trig_integrals,
// continued off the positive real axis with the upper-edge log convention.
// Smooth, ~1/w on the right half axis, f(0) = pi/2.
complex trig_aux_f(complex w);

// I(w) = int_0^inf sin(u)/(w - u) du = f(w) - pi*exp(sigma*i*w), where
// sigma = +1 above the cut, -1 below; exactly-real w > 0 takes the lower
// edge, w < 0 the upper edge (making I real there). Shared by the entangled
// self-energy and the detection vertex.
complex sine_resolvent_kernel(complex w);

// Least-squares line through (x, y): returns {slope, intercept}.
std::pair<double, double> fit_line(const std::vector<double>& x,
                                   const std::vector<double>& y);

// One 15-point Gauss-Kronrod panel: {integral, error estimate}.
std::pair<complex, double> gk15(const std::function<complex(double)>& f,
                                double a, double b);

}  // namespace detail

}  // namespace dk
