#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "decaykit/numerics.hpp"

using dk::complex;
using std::numbers::pi;

namespace {

void check_close(complex got, complex want, double tol) {
  CAPTURE(got.real());
  CAPTURE(got.imag());
  CAPTURE(want.real());
  CAPTURE(want.imag());
  CHECK(std::abs(got - want) <= tol);
}

}  // namespace

TEST_CASE("principal_log resolves exact reals to the upper edge") {
  check_close(dk::principal_log({-2.0, 0.0}), {std::log(2.0), pi}, 1e-15);
  check_close(dk::principal_log({-2.0, -0.0}), {std::log(2.0), pi}, 1e-15);
  CHECK(dk::principal_log({-2.0, -1e-300}).imag() < 0.0);
  check_close(dk::principal_log({3.0, 0.0}), {std::log(3.0), 0.0}, 1e-15);
  check_close(dk::principal_log({1.0, 1.0}),
              {0.5 * std::log(2.0), pi / 4.0}, 1e-15);
  check_close(dk::principal_log({0.0, 1.0}), {0.0, pi / 2.0}, 1e-15);
  CHECK_THROWS_AS((void)dk::principal_log({0.0, 0.0}), std::domain_error);
}

TEST_CASE("log_gamma reference values") {
  check_close(dk::log_gamma({1.0, 0.0}), {0.0, 0.0}, 1e-14);
  check_close(dk::log_gamma({0.5, 0.0}), {std::log(std::sqrt(pi)), 0.0},
              1e-12);
  check_close(dk::log_gamma({10.0, 0.0}), {std::log(362880.0), 0.0}, 1e-10);
  check_close(dk::log_gamma({12.3, 0.0}), {18.238983407092242, 0.0}, 1e-10);
  check_close(dk::log_gamma({0.5, -3.0}),
              {-3.7934504504362232, -0.30981927108643917}, 1e-11);
  // Upper-edge value on the cut: the imaginary part counts the poles passed.
  check_close(dk::log_gamma({-2.5, 0.0}),
              {-0.056243716497674051, -3.0 * pi}, 1e-11);
}

TEST_CASE("log_gamma branch bookkeeping") {
  // Recurrence away from the cut.
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    complex z{0.3 + 2.0 * std::abs(u(rng)), 3.0 * u(rng)};
    complex lhs = dk::log_gamma(z + 1.0) - dk::log_gamma(z);
    check_close(lhs, dk::principal_log(z), 1e-10);
    // Schwarz symmetry off the real axis.
    complex a = dk::log_gamma(std::conj(z));
    check_close(a, std::conj(dk::log_gamma(z)), 1e-12);
  }
  CHECK_THROWS_AS((void)dk::log_gamma({0.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS((void)dk::log_gamma({-3.0, 0.0}), std::domain_error);
}

TEST_CASE("faddeeva_w reference values") {
  check_close(dk::faddeeva_w({1.0, 1.0}),
              {0.30474420525691259, 0.20821893820283163}, 1e-13);
  check_close(dk::faddeeva_w({0.05, 0.02}),
              {0.97543931541225345, 0.05437421456509507}, 1e-13);
  check_close(dk::faddeeva_w({5.0, 0.1}),
              {0.002406911716942712, 0.11519442455072769}, 1e-12);
  check_close(dk::faddeeva_w({0.3, 4.0}),
              {0.13633055621060716, 0.0096698533261129385}, 1e-12);
  complex w8 = dk::faddeeva_w({8.0, 0.0});
  CHECK(std::abs(w8.imag() - 0.07108811174448088) <= 1e-13);
  CHECK(std::abs(w8.real()) <= 1e-14);  // true value e^{-64} is below noise
}

TEST_CASE("faddeeva_w symmetry and zone seam") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> u(0.1, 6.0);
  for (int i = 0; i < 40; ++i) {
    complex z{u(rng) - 3.0, u(rng)};
    check_close(dk::faddeeva_w(complex(-z.real(), z.imag())),
                std::conj(dk::faddeeva_w(z)), 1e-12);
  }
  // Series / rational seam along a ray crossing |z| = 3.
  for (double r : {2.9, 2.99, 3.01, 3.1}) {
    complex z = r * std::polar(1.0, 0.6);
    complex lo = dk::faddeeva_w(0.999 * z);
    complex hi = dk::faddeeva_w(1.001 * z);
    CHECK(std::abs(hi - lo) <= 0.02 * std::abs(lo));
  }
}

TEST_CASE("erf and the rotated Fresnel anchor") {
  CHECK(dk::erf_complex({1.0, 0.0}).real() ==
        doctest::Approx(0.84270079294971487).epsilon(1e-13));
  CHECK(std::abs(dk::erf_complex({1.0, 0.0}).imag()) <= 1e-16);
  check_close(dk::erf_complex({-1.0, 0.0}), -dk::erf_complex({1.0, 0.0}),
              1e-16);
  // E(z) = int_0^z exp(i s^2) ds through the rotated error function.
  auto fresnel_e = [](complex z) {
    complex rot = std::polar(1.0, -pi / 4.0);
    return 0.5 * std::sqrt(pi) * std::polar(1.0, pi / 4.0) *
           dk::erf_complex(rot * z);
  };
  check_close(fresnel_e({1.5, 0.0}),
              {0.89918485288747861, 0.7782378043068086}, 1e-12);
  check_close(fresnel_e({10.0, 0.0}),
              {0.60112518481344435, 0.58367089992962334}, 1e-12);
  check_close(fresnel_e({2.0, 0.5}),
              {0.61800808957095269, 0.65626162563479158}, 1e-12);
}

TEST_CASE("fresnel spec values and asymptotics") {
  auto [c0, s0] = dk::fresnel(0.0);
  CHECK(c0 == 0.0);
  CHECK(s0 == 0.0);
  auto [c1, s1] = dk::fresnel(1.0);
  CHECK(c1 == doctest::Approx(0.904524).epsilon(2e-6));
  CHECK(s1 == doctest::Approx(0.310268).epsilon(2e-6));
  check_close({c1, s1}, {0.90452423778995602, 0.31026830172338119}, 2e-9);
  // Odd in x.
  auto [cm, sm] = dk::fresnel(-1.0);
  CHECK(cm == -c1);
  CHECK(sm == -s1);
  // Large-argument form with two correction terms.
  auto [c50, s50] = dk::fresnel(50.0);
  double lim = 0.5 * std::sqrt(pi / 2.0);
  double ph = 2500.0;
  double cref = lim + std::sin(ph) / 100.0 - std::cos(ph) / (4.0 * 125000.0);
  double sref = lim - std::cos(ph) / 100.0 - std::sin(ph) / (4.0 * 125000.0);
  CHECK(std::abs(c50 - cref) <= 1e-6);
  CHECK(std::abs(s50 - sref) <= 1e-6);
  CHECK(std::abs(c50 - lim) <= 0.011);
  CHECK(std::abs(s50 - lim) <= 0.011);
}

TEST_CASE("fresnel against direct phase-panel quadrature") {
  dk::QuadratureSpec qs;
  qs.rel_tol = 1e-12;
  qs.abs_tol = 1e-14;
  for (double x : {0.5, 2.5, 7.0, 13.7, 26.1, 50.0}) {
    std::vector<double> brk;
    for (int k = 1; k * pi < x * x; ++k) brk.push_back(std::sqrt(k * pi));
    complex direct = dk::integrate(
        [](double s) {
          return std::exp(complex(0.0, s * s));
        },
        0.0, x, qs, brk);
    auto [c, s] = dk::fresnel(x);
    check_close({c, s}, direct, 1e-8);
  }
}

TEST_CASE("trig_integrals spec values") {
  auto [cin0, si0] = dk::trig_integrals(0.0);
  CHECK(cin0 == 0.0);
  CHECK(si0 == doctest::Approx(pi / 2.0).epsilon(1e-15));
  auto [cin1, si1] = dk::trig_integrals(1.0);
  CHECK(cin1 == doctest::Approx(0.239811742000566).epsilon(1e-10));
  CHECK(si1 == doctest::Approx(0.624713256427713).epsilon(1e-10));
  CHECK_THROWS_AS((void)dk::trig_integrals(-0.5), std::domain_error);
  // Large x: Cin - ln x -> gamma, si -> 0 like cos(x)/x.
  auto [cin100, si100] = dk::trig_integrals(100.0);
  double gamma = 0.57721566490153286;
  double ci100 = std::sin(100.0) / 100.0 - std::cos(100.0) / 1e4 -
                 2.0 * std::sin(100.0) / 1e6;
  CHECK(std::abs(cin100 - (gamma + std::log(100.0) - ci100)) <= 1e-7);
  double si_ref = std::cos(100.0) / 100.0 + std::sin(100.0) / 1e4 -
                  2.0 * std::cos(100.0) / 1e6;
  CHECK(std::abs(si100 - si_ref) <= 1e-7);
}

TEST_CASE("trig_integrals continuity and quadrature oracle") {
  auto [cl, sl] = dk::trig_integrals(7.9999995);
  auto [ch, sh] = dk::trig_integrals(8.0000005);
  CHECK(std::abs(ch - cl) <= 1e-6);
  CHECK(std::abs(sh - sl) <= 1e-6);
  dk::QuadratureSpec qs;
  qs.rel_tol = 1e-12;
  qs.abs_tol = 1e-14;
  for (double x : {0.7, 3.3, 8.9, 21.0, 50.0}) {
    std::vector<double> brk;
    for (int k = 1; k * pi < x; ++k) brk.push_back(k * pi);
    double cin_direct =
        dk::integrate(
            [](double t) {
              // stable for small t
              double h = std::sin(0.5 * t);
              return complex(2.0 * h * h / t, 0.0);
            },
            0.0, x, qs, brk)
            .real();
    double si_direct =
        pi / 2.0 - dk::integrate(
                       [](double t) {
                         return complex(t == 0.0 ? 1.0 : std::sin(t) / t, 0.0);
                       },
                       0.0, x, qs, brk)
                       .real();
    auto [cin, si] = dk::trig_integrals(x);
    CHECK(std::abs(cin - cin_direct) <= 1e-8);
    CHECK(std::abs(si - si_direct) <= 1e-8);
  }
}

TEST_CASE("trig_aux_f agrees with its Laplace representation") {
  dk::QuadratureSpec qs;
  qs.rel_tol = 1e-12;
  qs.abs_tol = 1e-15;
  // Points in the series zone, the continued-fraction zone and the complex
  // band, all with Re w > 0 so the integral representation converges.
  const complex pts[] = {{1.0, 0.0},  {2.5, 0.0}, {9.0, 0.0},  {15.0, 0.0},
                         {25.0, 0.0}, {5.0, -1.0}, {7.0, 3.0}, {12.0, -2.0}};
  for (complex w : pts) {
    double re = w.real(), im = w.imag();
    complex lap = dk::fourier_quadrature(
        [re](double u) { return std::exp(-re * u) / (1.0 + u * u); }, 0.0,
        45.0 / re, im, qs);
    check_close(dk::detail::trig_aux_f(w), lap, 5e-11);
  }
}

TEST_CASE("trig_aux_f symmetry, seams and special values") {
  check_close(dk::detail::trig_aux_f({0.0, 0.0}), {pi / 2.0, 0.0}, 1e-16);
  // Schwarz symmetry away from the cut.
  for (complex w : {complex{3.0, 2.0}, complex{12.0, 4.0}}) {
    check_close(dk::detail::trig_aux_f(std::conj(w)),
                std::conj(dk::detail::trig_aux_f(w)), 1e-10);
  }
  // Real seam at x = 8.
  complex lo = dk::detail::trig_aux_f({7.9999995, 0.0});
  complex hi = dk::detail::trig_aux_f({8.0000005, 0.0});
  CHECK(std::abs(hi - lo) <= 1e-7);
  CHECK(std::abs(dk::detail::trig_aux_f({20.0, 0.0}).imag()) <= 1e-15);
}

TEST_CASE("sine_resolvent_kernel edges and reality") {
  using dk::detail::sine_resolvent_kernel;
  // Real for negative real arguments (no cut there).
  for (double x : {-0.5, -4.0, -9.5}) {
    complex v = sine_resolvent_kernel({x, 0.0});
    CAPTURE(x);
    CHECK(std::abs(v.imag()) <= 1e-12 * std::max(1.0, std::abs(v.real())));
  }
  check_close(sine_resolvent_kernel({0.0, 0.0}), {-pi / 2.0, 0.0}, 1e-14);
  // Jump across the cut on the positive axis equals -2 pi i sin(w).
  complex up = sine_resolvent_kernel({3.0, 1e-300});
  complex dn = sine_resolvent_kernel({3.0, 0.0});
  check_close(up - dn, complex(0.0, -2.0 * pi) * std::sin(3.0), 1e-12);
  // Exactly-real positive arguments take the lower edge.
  complex dn2 = sine_resolvent_kernel({3.0, -1e-300});
  check_close(dn, dn2, 1e-14);
}

TEST_CASE("integrate basics") {
  dk::QuadratureSpec qs;
  check_close(dk::integrate([](double x) { return complex(x * x, 0.0); }, 0.0,
                            1.0, qs),
              {1.0 / 3.0, 0.0}, 1e-14);
  check_close(dk::integrate(
                  [](double x) { return std::exp(complex(0.0, x)); }, 0.0,
                  2.0 * pi, qs),
              {0.0, 0.0}, 1e-12);
  // Integrable endpoint singularity.
  check_close(dk::integrate([](double x) { return complex(std::log(x), 0.0); },
                            0.0, 1.0, qs),
              {-1.0, 0.0}, 1e-9);
  // Orientation.
  check_close(dk::integrate([](double x) { return complex(x, 0.0); }, 1.0,
                            0.0, qs),
              {-0.5, 0.0}, 1e-14);
}

TEST_CASE("integrate reports failure with its best estimate") {
  dk::QuadratureSpec qs;
  qs.max_subdivisions = 4;
  qs.rel_tol = 1e-14;
  qs.abs_tol = 1e-16;
  bool thrown = false;
  try {
    (void)dk::integrate(
        [](double x) { return complex(std::cos(200.0 * x * x), 0.0); }, 0.0,
        6.0, qs);
  } catch (const dk::ConvergenceError& e) {
    thrown = true;
    CHECK(e.error_bound > 0.0);
    CHECK(std::isfinite(e.best_estimate.real()));
  }
  CHECK(thrown);
}

TEST_CASE("fourier_quadrature kills a full period of a constant") {
  dk::QuadratureSpec qs;
  check_close(dk::fourier_quadrature([](double) { return complex(1.0, 0.0); },
                                     0.0, 2.0 * pi, 1.0, qs),
              {0.0, 0.0}, 1e-12);
}

TEST_CASE("fourier_quadrature resolvent example") {
  // int dE e^{-iEt} (i/2pi)/(E + i eps - omega): the pole sits just below
  // the real axis, so the closed lower contour picks it up and the result
  // is the free propagator phase; flipping the sign of eps empties it.
  dk::QuadratureSpec qs;
  qs.rel_tol = 1e-8;
  qs.abs_tol = 1e-10;
  const double R = 1e4, eps = 1e-6, omega = 1.0, t = 1.0;
  const complex i2pi(0.0, 1.0 / (2.0 * pi));
  complex picked = i2pi * dk::fourier_quadrature(
                              [omega, eps](double e) {
                                return 1.0 / (complex(e - omega, eps));
                              },
                              -R, R, t, qs, {omega});
  check_close(picked, std::exp(complex(0.0, -t * omega)), 1e-3);
  complex empty = i2pi * dk::fourier_quadrature(
                             [omega, eps](double e) {
                               return 1.0 / (complex(e - omega, -eps));
                             },
                             -R, R, t, qs, {omega});
  check_close(empty, {0.0, 0.0}, 1e-3);
}

TEST_CASE("fourier_quadrature lorentzian example") {
  dk::QuadratureSpec qs;
  qs.rel_tol = 1e-10;
  qs.abs_tol = 1e-13;
  const double G = 0.1, t = 5.0;
  auto lorentzian = [G](double w) {
    double d = w - 1.0;
    return complex(G / (2.0 * pi) / (d * d + 0.25 * G * G), 0.0);
  };
  complex want = std::exp(complex(0.0, -t)) * std::exp(-0.5 * G * t);
  // On [-50, 50] the answer is truncation-limited: the discarded tails
  // contribute about |f(+-50)|/t each, so allow that on top of the target.
  complex got = dk::fourier_quadrature(lorentzian, -50.0, 50.0, t, qs, {1.0});
  double tail = (std::abs(lorentzian(50.0)) + std::abs(lorentzian(-50.0))) / t;
  check_close(got, want, 1e-6 + tail);
  // A wider window removes the truncation error entirely.
  complex wide =
      dk::fourier_quadrature(lorentzian, -2000.0, 2000.0, t, qs, {1.0});
  check_close(wide, want, 1e-6);
}

TEST_CASE("fourier_quadrature t = 0 reduces to plain quadrature") {
  dk::QuadratureSpec qs;
  check_close(dk::fourier_quadrature(
                  [](double x) { return complex(x, 0.0); }, 0.0, 1.0, 0.0, qs),
              {0.5, 0.0}, 1e-13);
}

TEST_CASE("find_root simple roots and the iterate trace") {
  dk::RootFindSpec rs;
  rs.seed = {0.5, 0.8};
  complex r = dk::find_root([](complex z) { return z * z + 1.0; }, rs);
  check_close(r, {0.0, 1.0}, 1e-10);

  rs.seed = {0.5, 0.0};
  complex r2 = dk::find_root([](complex z) { return std::cos(z) - z; }, rs);
  check_close(r2, {0.7390851332151607, 0.0}, 1e-12);

  rs.seed = {1.0, 0.0};
  bool thrown = false;
  try {
    (void)dk::find_root([](complex z) { return std::exp(z); }, rs);
  } catch (const dk::ConvergenceError& e) {
    thrown = true;
    CHECK(e.iterates.size() >= 10);
  }
  CHECK(thrown);
}

TEST_CASE("fit_line recovers an exact line") {
  std::vector<double> x = {0.0, 1.0, 2.0, 3.5, 7.0};
  std::vector<double> y;
  y.reserve(x.size());
  for (double v : x) y.push_back(3.0 * v - 2.0);
  auto [m, c] = dk::detail::fit_line(x, y);
  CHECK(m == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(c == doctest::Approx(-2.0).epsilon(1e-12));
}
