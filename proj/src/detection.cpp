#include "decaykit/detection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dk {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;
const complex kI(0.0, 1.0);

// Past this exponent the damped pieces of the contour line are below any
// representable contribution; the bound also keeps the argument of the
// vertex auxiliary inside its overflow guard (r < t on the contour branch).
constexpr double kDampCut = 650.0;

double vertex_scale(double lambda, double r) {
  return lambda / (2.0 * std::sqrt(2.0) * kPi * kPi * r);
}

void require_flat(const SelfEnergyModel& m, const char* where) {
  if (m.kind != ModelKind::FlatPhotoemission) {
    throw std::invalid_argument(std::string(where) +
                                ": FlatPhotoemission reservoir only");
  }
}

void require_far_field(const SelfEnergyModel& m, double omega_tilde, double r,
                       const char* where) {
  require_flat(m, where);
  if (!(omega_tilde > 0.0)) {
    throw std::invalid_argument(std::string(where) +
                                ": omega_tilde must be > 0");
  }
  if (!(r > 0.0)) {
    throw std::invalid_argument(std::string(where) + ": radius must be > 0");
  }
  if (omega_tilde * r < 10.0) {
    throw std::invalid_argument(std::string(where) +
                                ": far field requires omega_tilde * r >= 10");
  }
  if (!(m.cutoff > 0.0)) {
    throw std::invalid_argument(std::string(where) +
                                ": model cutoff not set (finalize_model)");
  }
}

// Second-sheet resonance pole and residue, shared by every contour-branch
// sample of one model.
struct PoleData {
  complex zp{};
  complex rp{};
};

PoleData solve_pole(const SelfEnergyModel& m, double omega_tilde) {
  RootFindSpec rf;
  rf.seed = complex(omega_tilde + level_shift(m, omega_tilde),
                    -0.5 * decay_function(m, omega_tilde));
  PoleData p;
  p.zp = find_root(
      [&](complex z) { return z - omega_tilde - sigma_second_sheet(m, z); },
      rf);
  const double h = 1e-6 * std::max(1.0, std::abs(p.zp));
  const complex ds =
      (sigma_second_sheet(m, p.zp + h) - sigma_second_sheet(m, p.zp - h)) /
      (2.0 * h);
  p.rp = 1.0 / (1.0 - ds);
  return p;
}

// Vertex continued down from the upper edge, the value the pole term picks
// up below the cut; the kernel helper would take the lower-edge branch
// there.
complex vertex_from_above(double c, double r, complex z) {
  const complex w = r * z;
  return c * (detail::trig_aux_f(w) - kPi * std::exp(kI * w));
}

std::vector<double> resonance_breakpoints(const SelfEnergyModel& m,
                                          double omega_tilde) {
  const double er = omega_tilde + level_shift(m, omega_tilde);
  std::vector<double> brk = {er};
  for (double step : {0.01, 0.1}) {
    brk.push_back(er - step * omega_tilde);
    brk.push_back(er + step * omega_tilde);
  }
  return brk;
}

// B(t, r) as the positive-axis integral, split so each piece carries a
// single phase: the vertex edges share the real auxiliary f(rE), while their
// on-shell halves -pi c exp(+-irE) shift the Fourier phase to t -+ r. That
// keeps every integrand smooth and lets fourier_quadrature pick the panel
// width per piece.
complex direct_amplitude(const SelfEnergyModel& m, double omega_tilde,
                         double c, double r, double t,
                         const QuadratureSpec& spec,
                         const std::vector<double>& brk) {
  const auto w_piece = [&](double e) -> complex {
    const complex sm = sigma_minus(m, e);
    const double x = e - omega_tilde - sm.real();
    const double g = 2.0 * sm.imag();
    const double den = std::norm(complex(x, 0.5 * g));
    const double f = detail::trig_aux_f(complex(r * e, 0.0)).real();
    return complex(c * g * f / den, 0.0);
  };
  const auto minus_piece = [&](double e) -> complex {
    const complex sm = sigma_minus(m, e);
    const double x = e - omega_tilde - sm.real();
    return -kI * kPi * c / complex(x, sm.imag());
  };
  const auto plus_piece = [&](double e) -> complex {
    const complex sm = sigma_minus(m, e);
    const double x = e - omega_tilde - sm.real();
    return kI * kPi * c / complex(x, -sm.imag());
  };
  const complex iw = fourier_quadrature(w_piece, 0.0, m.cutoff, t, spec, brk);
  const complex im =
      fourier_quadrature(minus_piece, 0.0, m.cutoff, t - r, spec, brk);
  const complex ip =
      fourier_quadrature(plus_piece, 0.0, m.cutoff, t + r, spec, brk);
  return (iw + im + ip) / kTwoPi;
}

// B(t, r) for t past the arrival transient: residue term plus the line along
// the negative imaginary axis. The upward vertex continuation grows like
// exp(ry) there, so its on-shell half is folded into the slower damping
// exp(-y (t - r)) instead of being evaluated directly.
complex tail_amplitude(const SelfEnergyModel& m, double omega_tilde,
                       const PoleData& pole, double c, double r, double t) {
  const double dt = t - r;
  const double ylim = 60.0 / dt;
  std::vector<double> brk = {ylim / 64.0, ylim / 8.0, ylim / 2.0};
  for (double s : {0.03, 0.3, 1.0, 3.0}) {
    const double y = s * omega_tilde;
    if (y < ylim) brk.push_back(y);
  }
  // The two line pieces cancel almost exactly once the pole saturates B, so
  // a pure relative target stalls; the absolute floor is set by the vertex
  // scale, keeping B accurate to ~1e-13 c absolute everywhere.
  QuadratureSpec line_spec;
  line_spec.rel_tol = 1e-10;
  line_spec.abs_tol = 1e-13 * c;
  const auto line = [&](double y) -> complex {
    const complex z(0.0, -y);
    const complex d2 = z - omega_tilde - sigma_second_sheet(m, z);
    complex value = -kPi * c / d2 * std::exp(-y * dt);
    if (y * t < kDampCut) {
      const complex d1 = z - omega_tilde - sigma_minus(m, z);
      const complex w = r * z;
      const complex f = detail::trig_aux_f(w);
      const complex vlow = c * (f - kPi * std::exp(-kI * w));
      value += (c * f / d2 - vlow / d1) * std::exp(-y * t);
    }
    return value;
  };
  const complex l0 = integrate(line, 0.0, ylim, line_spec, brk);
  const complex vup = vertex_from_above(c, r, pole.zp);
  return pole.rp * vup * std::exp(-kI * pole.zp * t) + l0 / kTwoPi;
}

double switch_time(double omega_tilde, double r) {
  return r + 10.0 / omega_tilde;
}

// Composite Simpson with an even interval count.
double simpson(const std::function<double(double)>& f, double a, double b,
               int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) {
    acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

// 8-point Gauss-Legendre rule on [-1, 1], positive half; mirrored in use.
constexpr double kGlNode[4] = {0.1834346424956498, 0.5255324099163290,
                               0.7966664774136267, 0.9602898564975363};
constexpr double kGlWeight[4] = {0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};

}  // namespace

complex vertex_function(const SelfEnergyModel& m, complex z, double r) {
  require_flat(m, "vertex_function");
  if (!(r > 0.0)) {
    throw std::domain_error("vertex_function: r must be > 0");
  }
  return vertex_scale(m.lambda, r) * detail::sine_resolvent_kernel(r * z);
}

std::pair<complex, complex> vertex_edges(const SelfEnergyModel& m, double e,
                                         double r) {
  require_flat(m, "vertex_edges");
  if (!(r > 0.0)) {
    throw std::domain_error("vertex_edges: r must be > 0");
  }
  if (!(e > 0.0)) {
    throw std::invalid_argument("vertex_edges: edge energy must be > 0");
  }
  const complex lower =
      vertex_scale(m.lambda, r) * detail::sine_resolvent_kernel(complex(e, 0.0) * r);
  return {std::conj(lower), lower};
}

std::vector<complex> detection_amplitude(const SelfEnergyModel& m,
                                         double omega_tilde, double r,
                                         const std::vector<double>& times,
                                         const QuadratureSpec& spec) {
  require_far_field(m, omega_tilde, r, "detection_amplitude");
  for (double t : times) {
    if (t < 0.0) {
      throw std::invalid_argument("detection_amplitude: times must be >= 0");
    }
  }
  const double c = vertex_scale(m.lambda, r);
  const double t_switch = switch_time(omega_tilde, r);
  const std::vector<double> brk = resonance_breakpoints(m, omega_tilde);
  PoleData pole;
  bool have_pole = false;
  std::vector<complex> amp(times.size());
  std::size_t done = 0;
  try {
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double t = times[i];
      if (t <= t_switch) {
        amp[i] = direct_amplitude(m, omega_tilde, c, r, t, spec, brk);
      } else {
        if (!have_pole) {
          pole = solve_pole(m, omega_tilde);
          have_pole = true;
        }
        amp[i] = tail_amplitude(m, omega_tilde, pole, c, r, t);
      }
      done = i + 1;
    }
  } catch (const ConvergenceError& err) {
    std::ostringstream os;
    os << "detection_amplitude: " << err.what() << " (" << done << " of "
       << times.size() << " samples converged)";
    ConvergenceError wrapped(os.str(), err.best_estimate, err.error_bound);
    wrapped.iterates = err.iterates;
    throw wrapped;
  }
  return amp;
}

DetectionSeries detection_density(const SelfEnergyModel& m,
                                  double omega_tilde, double r,
                                  const std::vector<double>& times,
                                  const QuadratureSpec& spec) {
  const std::vector<complex> amp =
      detection_amplitude(m, omega_tilde, r, times, spec);
  DetectionSeries s;
  s.radius = r;
  s.times = times;
  s.normalization = 2.0 * omega_tilde;
  s.shell_averaged = false;
  s.probability.resize(amp.size());
  for (std::size_t i = 0; i < amp.size(); ++i) {
    s.probability[i] = s.normalization * std::norm(amp[i]);
  }
  double floor = 0.0, peak = 0.0;
  bool have_floor = false;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    peak = std::max(peak, s.probability[i]);
    if (s.times[i] < r - 2.0 / omega_tilde) {
      floor = std::max(floor, s.probability[i]);
      have_floor = true;
    }
  }
  if (have_floor && peak > floor) {
    std::ostringstream os;
    os.precision(3);
    os << "pre-arrival floor: max P(t < r - 2/omega) / peak P = "
       << floor / peak;
    s.notes.push_back(os.str());
  }
  return s;
}

DetectionSeries detection_density_wwa(const SelfEnergyModel& m,
                                      double omega_tilde, double r,
                                      const std::vector<double>& times,
                                      bool shell_averaged) {
  require_far_field(m, omega_tilde, r, "detection_density_wwa");
  for (double t : times) {
    if (t < 0.0) {
      throw std::invalid_argument(
          "detection_density_wwa: times must be >= 0");
    }
  }
  const WWAParams wwa = wwa_params(m, omega_tilde);
  const double s_factor =
      shell_averaged ? 0.5
                     : std::sin(omega_tilde * r) * std::sin(omega_tilde * r);
  DetectionSeries s;
  s.radius = r;
  s.times = times;
  s.normalization = 16.0 * omega_tilde;
  s.shell_averaged = shell_averaged;
  const double p0 = s.normalization * m.lambda * m.lambda * s_factor /
                    (32.0 * kPi * kPi * r * r);
  s.probability.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    s.probability[i] = p0 * std::exp(-wwa.gamma * times[i]);
  }
  return s;
}

double detection_normalization(const SelfEnergyModel& m, double omega_tilde,
                               double r, double shell_width) {
  require_far_field(m, omega_tilde, r, "detection_normalization");
  const double d = shell_width > 0.0 ? shell_width : 20.0 / omega_tilde;
  const double r_lo = r - 0.5 * d;
  if (!(r_lo > 0.0) || omega_tilde * r_lo < 10.0) {
    throw std::invalid_argument(
        "detection_normalization: shell must stay in the far field");
  }
  const PoleData pole = solve_pole(m, omega_tilde);
  const double gp = -2.0 * pole.zp.imag();
  if (!(gp > 0.0)) {
    throw std::runtime_error(
        "detection_normalization: pole is not in the lower half plane");
  }
  double shell_acc = 0.0;
  for (int panel = 0; panel < 4; ++panel) {
    const double a = r_lo + d * panel / 4.0;
    const double half = d / 8.0;
    const double mid = a + half;
    for (int j = 0; j < 4; ++j) {
      for (int sign : {-1, 1}) {
        const double rn = mid + sign * half * kGlNode[j];
        const double wn = kGlWeight[j] * half;
        const double c = vertex_scale(m.lambda, rn);
        const auto p_raw = [&](double t) {
          return std::norm(tail_amplitude(m, omega_tilde, pole, c, rn, t));
        };
        const double t1 = rn + 0.5 / omega_tilde;
        const double t2 = rn + 10.0 / omega_tilde;
        const double t3 = rn + 40.0 / omega_tilde;
        double time_acc = p_raw(t1) * 0.5 / omega_tilde;  // arrival ramp
        time_acc += simpson(p_raw, t1, t2, 38);
        time_acc += simpson(p_raw, t2, t3, 40);
        const complex vup = vertex_from_above(c, rn, pole.zp);
        time_acc += std::norm(pole.rp * vup) * std::exp(-gp * t3) / gp;
        shell_acc += wn * 4.0 * kPi * rn * rn * time_acc;
      }
    }
  }
  return 2.0 * omega_tilde * shell_acc / d;
}

}  // namespace dk
