#include "decaykit/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

namespace dk {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kEps = std::numeric_limits<double>::epsilon();

bool is_exact_real(complex z) { return z.imag() == 0.0; }

}  // namespace

complex principal_log(complex z) {
  if (z == complex(0.0, 0.0)) {
    throw std::domain_error("principal_log: zero argument");
  }
  if (is_exact_real(z) && z.real() < 0.0) {
    // Exactly-real negative arguments resolve to the upper edge of the cut,
    // regardless of the sign of the (zero) imaginary part.
    return {std::log(-z.real()), kPi};
  }
  return std::log(z);
}

// ---------------------------------------------------------------------------
// log-gamma

namespace {

// Stirling series, trustworthy for Re z >= 12.
complex log_gamma_stirling(complex z) {
  // B_{2n} / (2n (2n-1))
  static constexpr std::array<double, 7> coeff = {
      1.0 / 12.0,   -1.0 / 360.0,       1.0 / 1260.0, -1.0 / 1680.0,
      1.0 / 1188.0, -691.0 / 360360.0,  1.0 / 156.0};
  complex lz = principal_log(z);
  complex out = (z - 0.5) * lz - z + 0.5 * std::log(2.0 * kPi);
  complex zi2 = 1.0 / (z * z);
  complex zpow = 1.0 / z;
  for (double c : coeff) {
    out += c * zpow;
    zpow *= zi2;
  }
  return out;
}

// Branch continuous in the closed upper half plane:
// log sin(pi z) = i pi/2 - log 2 - i pi z + Log(1 - exp(2 pi i z)).
complex log_sin_pi_upper(complex z) {
  complex e = std::exp(2.0 * kPi * complex(0.0, 1.0) * z);
  return complex(0.0, kPi / 2.0) - std::log(2.0) -
         complex(0.0, kPi) * z + std::log(1.0 - e);
}

}  // namespace

complex log_gamma(complex z) {
  if (is_exact_real(z) && z.real() <= 0.0 &&
      z.real() == std::round(z.real())) {
    throw std::domain_error("log_gamma: pole at nonpositive integer");
  }
  if (z.imag() < 0.0) {
    return std::conj(log_gamma(std::conj(z)));
  }
  if (z.real() >= 0.5) {
    // Shift into the Stirling region, then undo the shifts.
    complex shift = 0.0;
    while (z.real() < 12.0) {
      shift += principal_log(z);
      z += 1.0;
    }
    return log_gamma_stirling(z) - shift;
  }
  // Reflection; keeps the branch consistent with principal_log recursion
  // (the imaginary part steps by -pi across each negative integer).
  complex w = 1.0 - z;
  complex shift = 0.0;
  while (w.real() < 12.0) {
    shift += principal_log(w);
    w += 1.0;
  }
  complex lg_w = log_gamma_stirling(w) - shift;
  return std::log(kPi) - lg_w - log_sin_pi_upper(z);
}

// ---------------------------------------------------------------------------
// Faddeeva function

namespace {

// Weideman rational approximation, N = 40 terms. Coefficients come from a
// cosine transform of exp(-t^2)(L^2 + t^2) sampled on the mapped grid; built
// once at first use.
struct WeidemanTable {
  static constexpr int N = 40;
  double L;
  std::array<double, N> a;
  WeidemanTable() {
    L = std::sqrt(N / std::sqrt(2.0));
    const int M = 2 * N;
    std::array<double, 2 * N> fk{};
    fk[0] = L * L;  // theta = 0 maps to t = 0
    for (int k = 1; k < M; ++k) {
      double t = L * std::tan(0.5 * kPi * k / M);
      fk[k] = std::exp(-t * t) * (L * L + t * t);
    }
    for (int m = 1; m <= N; ++m) {
      double s = 0.5 * fk[0];
      for (int k = 1; k < M; ++k) {
        s += fk[k] * std::cos(kPi * m * k / M);
      }
      a[m - 1] = s / M;
    }
  }
};

complex faddeeva_weideman(complex z) {
  static const WeidemanTable tab;
  const double L = tab.L;
  complex iz(-z.imag(), z.real());
  complex Z = (L + iz) / (L - iz);
  complex p = 0.0;
  for (int m = WeidemanTable::N; m >= 1; --m) {
    p = p * Z + tab.a[m - 1];
  }
  complex d = 1.0 / (L - iz);
  return 2.0 * p * d * d + d / std::sqrt(kPi);
}

complex faddeeva_series(complex z) {
  // w(z) = sum (iz)^n / Gamma(n/2 + 1), split by parity.
  complex iz(-z.imag(), z.real());
  complex iz2 = iz * iz;
  complex even = 1.0, odd = iz * (2.0 / std::sqrt(kPi));
  complex sum = even + odd;
  for (int k = 1; k < 200; ++k) {
    even *= iz2 / static_cast<double>(k);
    odd *= iz2 / (k + 0.5);
    sum += even + odd;
    if (std::abs(even) + std::abs(odd) < 1e-18 * (1.0 + std::abs(sum))) {
      return sum;
    }
  }
  return sum;
}

}  // namespace

complex faddeeva_w(complex z) {
  if (z.imag() < 0.0) {
    return 2.0 * std::exp(-z * z) - faddeeva_w(-z);
  }
  if (std::abs(z) <= 3.0) return faddeeva_series(z);
  return faddeeva_weideman(z);
}

complex erf_complex(complex z) {
  if (z.real() < 0.0) return -erf_complex(-z);
  complex iz(-z.imag(), z.real());
  return 1.0 - std::exp(-z * z) * faddeeva_w(iz);
}

std::pair<double, double> fresnel(double x) {
  if (x == 0.0) return {0.0, 0.0};
  double s = x < 0.0 ? -1.0 : 1.0;
  double ax = std::abs(x);
  // int_0^x exp(i s^2) ds rotated onto the error function. The rotated
  // argument keeps |exp(-z^2)| = 1, so no overflow for any real x.
  const complex rot = std::polar(1.0, -kPi / 4.0);
  complex e = 0.5 * std::sqrt(kPi) * std::polar(1.0, kPi / 4.0) *
              erf_complex(rot * ax);
  return {s * e.real(), s * e.imag()};
}

// ---------------------------------------------------------------------------
// trigonometric integrals and the resolvent kernel

namespace detail {

complex cin_entire(complex w) {
  complex w2 = w * w;
  complex term = w2 / 4.0;  // n = 1
  complex sum = term;
  for (int n = 2; n < 200; ++n) {
    term *= -w2 * static_cast<double>(2 * n - 2) /
            static_cast<double>(2 * n * 2 * n * (2 * n - 1));
    sum += term;
    if (std::abs(term) < kEps * (1.0 + std::abs(sum))) break;
  }
  return sum;
}

complex si_entire(complex w) {
  complex w2 = w * w;
  complex term = w;  // n = 0
  complex sum = term;
  for (int n = 1; n < 200; ++n) {
    term *= -w2 * static_cast<double>(2 * n - 1) /
            static_cast<double>((2 * n + 1) * (2 * n + 1) * 2 * n);
    sum += term;
    if (std::abs(term) < kEps * (1.0 + std::abs(sum))) break;
  }
  return sum;
}

}  // namespace detail

namespace {

// E1(w) by modified Lentz continued fraction; needs w away from the
// negative real axis and |w| not too small.
complex e1_continued_fraction(complex w) {
  const double tiny = 1e-290;
  complex b = w + 1.0;
  complex c = 1.0 / tiny;
  complex d = 1.0 / b;
  complex h = d;
  for (int i = 1; i <= 400; ++i) {
    double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = a * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    complex del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) {
      return h * std::exp(-w);
    }
  }
  throw ConvergenceError("E1 continued fraction stalled", h * std::exp(-w),
                         std::abs(h));
}

}  // namespace

std::pair<double, double> trig_integrals(double x) {
  if (!(x >= 0.0)) {
    throw std::domain_error("trig_integrals: requires x >= 0");
  }
  if (x == 0.0) return {0.0, kPi / 2.0};
  if (x <= 8.0) {
    double cin = detail::cin_entire(complex(x, 0.0)).real();
    double si = kPi / 2.0 - detail::si_entire(complex(x, 0.0)).real();
    return {cin, si};
  }
  // E1(ix) = -Ci(x) + i (Si(x) - pi/2)
  complex e1 = e1_continued_fraction(complex(0.0, x));
  double ci = -e1.real();
  double si = -e1.imag();
  return {kEulerGamma + std::log(x) - ci, si};
}

namespace detail {

complex trig_aux_f(complex w) {
  if (w == complex(0.0, 0.0)) return {kPi / 2.0, 0.0};
  if (is_exact_real(w)) {
    double x = w.real();
    if (x > 8.0) {
      // e^{ix} E1(ix) = g(x) - i f(x)
      complex p = std::exp(complex(0.0, x)) *
                  e1_continued_fraction(complex(0.0, x));
      return {-p.imag(), 0.0};
    }
    if (x < -8.0) {
      return -trig_aux_f(complex(-x, 0.0)) + kPi * std::exp(complex(0.0, x));
    }
    // falls through to the series with the upper-edge log
  }
  if (std::abs(w) <= 8.0 || std::abs(w.real()) <= 8.0) {
    if (std::abs(w.imag()) > 700.0) {
      throw ConvergenceError("trig_aux_f: argument too deep for the series",
                             0.0, std::numeric_limits<double>::infinity());
    }
    // Near the imaginary axis the series terms do not alternate in a
    // cancelling way, so this stays well conditioned even for large |Im w|.
    return (kEulerGamma + principal_log(w) - cin_entire(w)) * std::sin(w) -
           (si_entire(w) - kPi / 2.0) * std::cos(w);
  }
  if (w.real() > 8.0) {
    if (w.imag() > 0.0) return std::conj(trig_aux_f(std::conj(w)));
    // Laplace representation, valid for Re w > 0:
    // f(w) = int_0^inf exp(-w u) / (1 + u^2) du.
    double rw = w.real();
    double umax = 45.0 / rw;
    QuadratureSpec qs;
    qs.rel_tol = 1e-13;
    qs.abs_tol = 1e-16;
    return fourier_quadrature(
        [rw](double u) { return std::exp(-rw * u) / (1.0 + u * u); }, 0.0,
        umax, w.imag(), qs);
  }
  // Re w < -8: reflect through the origin; the exponential picks the side
  // of the cut the argument sits on.
  double sigma = w.imag() > 0.0 ? 1.0 : -1.0;
  return -trig_aux_f(-w) + kPi * std::exp(complex(0.0, sigma) * w);
}

complex sine_resolvent_kernel(complex w) {
  double sigma;
  if (w.imag() > 0.0) {
    sigma = 1.0;
  } else if (w.imag() < 0.0) {
    sigma = -1.0;
  } else {
    // On the axis: positive w sits on the lower edge of the cut along
    // [0, inf); negative w is below no cut and the kernel comes out real.
    sigma = w.real() > 0.0 ? -1.0 : 1.0;
  }
  return trig_aux_f(w) - kPi * std::exp(complex(0.0, sigma) * w);
}

std::pair<double, double> fit_line(const std::vector<double>& x,
                                   const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = x[static_cast<size_t>(i)];
    A(i, 1) = 1.0;
    b(i) = y[static_cast<size_t>(i)];
  }
  Eigen::Vector2d sol = A.colPivHouseholderQr().solve(b);
  return {sol(0), sol(1)};
}

// ---------------------------------------------------------------------------
// quadrature

namespace {

// 15-point Kronrod nodes and weights on [-1, 1], with the embedded 7-point
// Gauss weights on the odd-index nodes.
constexpr std::array<double, 8> kXgk = {
    0.99145537112081263921, 0.94910791234275852453, 0.86486442335976907279,
    0.74153118559939443986, 0.58608723546769113029, 0.40584515137739716691,
    0.20778495500789846760, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.02293532201052922496, 0.06309209262997855329, 0.10479001032225018384,
    0.14065325971552591875, 0.16900472663926790283, 0.19035057806478540991,
    0.20443294007529889241, 0.20948214108472782801};
constexpr std::array<double, 4> kWg = {
    0.12948496616886969327, 0.27970539148927666790, 0.38183005050511894495,
    0.41795918367346938776};

}  // namespace

std::pair<complex, double> gk15(const std::function<complex(double)>& f,
                                double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  complex fc = f(mid);
  complex kron = kWgk[7] * fc;
  complex gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    complex lo = f(mid - half * kXgk[j]);
    complex hi = f(mid + half * kXgk[j]);
    kron += kWgk[j] * (lo + hi);
    if (j % 2 == 1) gauss += kWg[j / 2] * (lo + hi);
  }
  kron *= half;
  gauss *= half;
  return {kron, std::abs(kron - gauss)};
}

}  // namespace detail

namespace {

struct Panel {
  double err;
  double a, b;
  complex val;
  bool operator<(const Panel& o) const { return err < o.err; }
};

complex adaptive_gk(const std::function<complex(double)>& f,
                    const std::vector<double>& edges,
                    const QuadratureSpec& spec) {
  std::priority_queue<Panel> heap;
  complex total = 0.0;
  double toterr = 0.0;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    auto [v, e] = detail::gk15(f, edges[i], edges[i + 1]);
    total += v;
    toterr += e;
    heap.push({e, edges[i], edges[i + 1], v});
  }
  int splits = 0;
  while (toterr > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    if (splits++ >= spec.max_subdivisions || heap.empty()) {
      throw ConvergenceError("quadrature did not reach tolerance", total,
                             toterr);
    }
    Panel p = heap.top();
    heap.pop();
    double m = 0.5 * (p.a + p.b);
    if (m <= p.a || m >= p.b) {
      // Interval at machine resolution; its error will not improve.
      throw ConvergenceError("quadrature panel collapsed", total, toterr);
    }
    auto [v1, e1] = detail::gk15(f, p.a, m);
    auto [v2, e2] = detail::gk15(f, m, p.b);
    total += v1 + v2 - p.val;
    toterr += e1 + e2 - p.err;
    heap.push({e1, p.a, m, v1});
    heap.push({e2, m, p.b, v2});
  }
  if (!std::isfinite(total.real()) || !std::isfinite(total.imag())) {
    throw ConvergenceError("quadrature produced a non-finite value", total,
                           toterr);
  }
  return total;
}

std::vector<double> build_edges(double a, double b, double max_width,
                                const std::vector<double>& breakpoints) {
  std::vector<double> marks = {a, b};
  for (double x : breakpoints) {
    if (x > a && x < b) marks.push_back(x);
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  if (!(max_width > 0.0)) return marks;
  std::vector<double> edges;
  for (size_t i = 0; i + 1 < marks.size(); ++i) {
    double lo = marks[i], hi = marks[i + 1];
    auto pieces = static_cast<long>(std::ceil((hi - lo) / max_width));
    pieces = std::max(pieces, 1L);
    edges.push_back(lo);
    for (long j = 1; j < pieces; ++j) {
      edges.push_back(lo + (hi - lo) * static_cast<double>(j) /
                               static_cast<double>(pieces));
    }
  }
  edges.push_back(b);
  return edges;
}

}  // namespace

complex integrate(const std::function<complex(double)>& f, double a, double b,
                  const QuadratureSpec& spec,
                  const std::vector<double>& breakpoints) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, spec, breakpoints);
  return adaptive_gk(f, build_edges(a, b, 0.0, breakpoints), spec);
}

complex fourier_quadrature(const std::function<complex(double)>& f, double a,
                           double b, double t, const QuadratureSpec& spec,
                           const std::vector<double>& breakpoints) {
  auto g = [&f, t](double e) { return f(e) * std::exp(complex(0.0, -e * t)); };
  if (a == b) return 0.0;
  if (b < a) return -fourier_quadrature(f, b, a, t, spec, breakpoints);
  if (t == 0.0) {
    return adaptive_gk(g, build_edges(a, b, 0.0, breakpoints), spec);
  }
  if (!(spec.period_fraction > 0.0) || spec.period_fraction > 1.0) {
    throw std::domain_error("fourier_quadrature: period_fraction in (0, 1]");
  }
  double width = spec.period_fraction * 2.0 * kPi / std::abs(t);
  if ((b - a) / width > 2.5e7) {
    throw ConvergenceError("fourier_quadrature: panel budget exceeded", 0.0,
                           std::numeric_limits<double>::infinity());
  }
  return adaptive_gk(g, build_edges(a, b, width, breakpoints), spec);
}

complex find_root(const std::function<complex(complex)>& g,
                  const RootFindSpec& spec) {
  complex z = spec.seed;
  std::vector<complex> trace = {z};
  auto fail = [&trace](const std::string& msg, complex best, double bound) {
    ConvergenceError err(msg, best, bound);
    err.iterates = trace;
    return err;
  };
  complex gz = g(z);
  for (int it = 0; it < spec.max_iterations; ++it) {
    if (!std::isfinite(gz.real()) || !std::isfinite(gz.imag())) {
      throw fail("find_root: non-finite residual", z, std::abs(gz));
    }
    double h = 1e-6 * std::max(1.0, std::abs(z));
    complex deriv = (g(z + h) - g(z - h)) / (2.0 * h);
    if (deriv == complex(0.0, 0.0)) {
      throw fail("find_root: vanishing derivative estimate", z, std::abs(gz));
    }
    complex step = -gz / deriv;
    double lambda = 1.0;
    complex znew, gnew;
    bool improved = false;
    for (int halvings = 0; halvings < 30; ++halvings) {
      znew = z + lambda * step;
      gnew = g(znew);
      if (std::abs(gnew) < std::abs(gz)) {
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) {
      throw fail("find_root: damping failed to reduce the residual", z,
                 std::abs(gz));
    }
    z = znew;
    gz = gnew;
    trace.push_back(z);
    if (std::abs(lambda * step) <= spec.step_tol * std::max(1.0, std::abs(z)) &&
        std::abs(gz) <= spec.residual_tol) {
      return z;
    }
  }
  throw fail("find_root: iteration limit reached", z, std::abs(gz));
}

}  // namespace dk
