#include "decaykit/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dk {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;
const complex kI(0.0, 1.0);

std::string format_complex(complex z) {
  std::ostringstream os;
  os.precision(12);
  os << z.real();
  if (z.imag() >= 0.0) os << "+";
  os << z.imag() << "i";
  return os.str();
}

bool has_finite_support(const SelfEnergyModel& m) {
  switch (m.kind) {
    case ModelKind::FlatPhotoemission:
    case ModelKind::PolarizedPhotoemission:
    case ModelKind::BetaDecay:
    case ModelKind::Cavity:
    case ModelKind::EntangledPair:
      return true;
    default:
      return false;
  }
}

// Envelope of the spectral integrand well above the resonance peak, used
// only to bound truncation tails; the resonance denominator is approximated
// by (E - omega)^2 there.
double spectral_envelope(const SelfEnergyModel& m, double omega, double e) {
  const double g = decay_function(m, e);
  const double d = e - omega;
  return g / (kTwoPi * d * d);
}

double choose_e_max(const SelfEnergyModel& m, double omega, double t,
                    const QuadratureSpec& spec) {
  const double sup = has_finite_support(m)
                         ? m.cutoff
                         : std::numeric_limits<double>::infinity();
  if (spec.e_max_override > 0.0) return std::min(spec.e_max_override, sup);
  const double gw = decay_function(m, omega);
  double e = std::max(50.0 * gw, 20.0 * omega);
  if (e >= sup) return sup;
  const double tol = std::max(spec.abs_tol, 1e-16);
  while (e < sup && e < 1e10) {
    // Oscillatory tails shrink like f(E)/t after one integration by parts;
    // at t = 0 the bound is the plain power-law tail integral.
    const double est = (t > 1e-12)
                           ? 2.0 * spectral_envelope(m, omega, e) / t
                           : 3.0 * spectral_envelope(m, omega, e) * e;
    if (est <= tol) break;
    e *= 2.0;
  }
  return std::min(e, sup);
}

std::vector<double> spectral_breakpoints(const SelfEnergyModel& m,
                                         double omega, double e_max) {
  std::vector<double> bps;
  double peak = omega;
  try {
    peak = omega + level_shift(m, omega);
  } catch (const std::domain_error&) {
    // exact cavity resonance; the bare level is breakpoint enough
  }
  const double gw = std::max(decay_function(m, omega), 1e-12 * omega);
  bps.push_back(peak);
  for (double k : {1.0, 2.0, 3.0, 5.0, 10.0, 30.0}) {
    bps.push_back(peak - k * gw);
    bps.push_back(peak + k * gw);
  }
  switch (m.kind) {
    case ModelKind::Cavity: {
      const long n_max = static_cast<long>(
          std::min(e_max / m.omega0, 4.0e6));
      for (long n = 1; n <= n_max; ++n) bps.push_back(n * m.omega0);
      break;
    }
    case ModelKind::LorentzianReservoir:
      for (double k : {1.0, 2.0, 3.0, 5.0, 10.0, 30.0}) {
        bps.push_back(m.omega0 - k * m.reservoir_width);
        bps.push_back(m.omega0 + k * m.reservoir_width);
      }
      bps.push_back(m.omega0);
      break;
    case ModelKind::OneDimensional:
      for (double k : {0.3, 1.0, 3.0, 10.0}) bps.push_back(k * m.kappa);
      break;
    default:
      break;
  }
  std::vector<double> inside;
  for (double b : bps)
    if (b > 0.0 && b < e_max) inside.push_back(b);
  std::sort(inside.begin(), inside.end());
  inside.erase(std::unique(inside.begin(), inside.end()), inside.end());
  return inside;
}

// Small-energy law Gamma(E) ~ A E^n on the continued (lower-half-plane)
// branch; the remainder term is controlled by this pair.
std::pair<double, int> small_energy_law(const SelfEnergyModel& m) {
  const double l2 = m.lambda * m.lambda;
  switch (m.kind) {
    case ModelKind::FlatPhotoemission:
      return {l2 / kPi, 1};
    case ModelKind::PolarizedPhotoemission:
      return {2.0 * l2 / (3.0 * kPi), 1};
    case ModelKind::BetaDecay:
      return {1.0 / (120.0 * kPi * kPi * kPi * std::pow(m.mu, 4)), 5};
    case ModelKind::Cavity:
      return {l2 * m.omega0, 0};
    case ModelKind::OneDimensional:
      return {2.0 * l2 / m.kappa, 0};
    case ModelKind::EntangledPair:
      if (m.bell_sign > 0) return {2.0 * l2 / kPi, 1};
      return {l2 * m.separation * m.separation / (6.0 * kPi), 3};
    case ModelKind::MassiveBoson:
      throw std::invalid_argument(
          "remainder_term: massive-boson decay grows like sqrt(E); the "
          "small-energy exponent is not an integer");
    case ModelKind::LorentzianReservoir:
      throw std::invalid_argument(
          "remainder_term: Lorentzian reservoir has no branch cut; the "
          "amplitude is a pure pole sum");
  }
  throw std::logic_error("remainder_term: unhandled model kind");
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Exact sharp-cutoff self-energy of the flat family, valid on the real axis
// above the cutoff where the renormalized logarithm no longer applies. c is
// the full coupling coefficient lambda^2/2pi^2 (times 2/3 when polarized).
double flat_cutoff_sigma(double c, double cutoff, double x) {
  // z = cutoff (1 + x), x > 0
  return c * cutoff * (-1.0 - (1.0 + x) * std::log(x / (1.0 + x)));
}

complex second_sheet_mismatch(const SelfEnergyModel& m, double omega,
                              complex z) {
  return z - omega - sigma_second_sheet(m, z);
}

complex resolvent_residue(const SelfEnergyModel& m, complex z) {
  const double h = 1e-6 * std::max(1.0, std::abs(z));
  const complex ds =
      (sigma_second_sheet(m, z + h) - sigma_second_sheet(m, z - h)) /
      (2.0 * h);
  return 1.0 / (1.0 - ds);
}

// E1(i x) for x > 0 from the cosine and sine integrals.
complex e1_imag_axis(double x) {
  const auto [cin, si_c] = trig_integrals(x);
  const double ci = 0.57721566490153286060651209008240243 + std::log(x) - cin;
  return complex(-ci, -si_c);
}

}  // namespace

PersistenceSeries build_series(std::vector<double> times,
                               std::vector<complex> amplitude) {
  if (times.size() != amplitude.size())
    throw std::invalid_argument("build_series: size mismatch");
  PersistenceSeries s;
  s.times = std::move(times);
  s.amplitude = std::move(amplitude);
  const std::size_t n = s.times.size();
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(s.times[i + 1] > s.times[i]))
      throw std::invalid_argument("build_series: times must increase");
  s.probability.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    s.probability[i] = std::norm(s.amplitude[i]);
  s.density.assign(n, 0.0);
  if (n >= 2) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hm = s.times[i] - s.times[i - 1];
      const double hp = s.times[i + 1] - s.times[i];
      // second-order three-point derivative on a nonuniform grid
      const double dp = hm / (hp * (hp + hm)) * s.probability[i + 1] +
                        (hp - hm) / (hp * hm) * s.probability[i] -
                        hp / (hm * (hp + hm)) * s.probability[i - 1];
      s.density[i] = -dp;
    }
    s.density[0] =
        -(s.probability[1] - s.probability[0]) / (s.times[1] - s.times[0]);
    s.density[n - 1] = -(s.probability[n - 1] - s.probability[n - 2]) /
                       (s.times[n - 1] - s.times[n - 2]);
  }
  double dmax = 0.0;
  for (double d : s.density) dmax = std::max(dmax, std::abs(d));
  const double tol = 1e-12 + 1e-9 * dmax;
  s.negativity.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.negativity[i] = s.density[i] < -tol;
  return s;
}

PersistenceSeries amplitude_full(const SelfEnergyModel& m, double omega_tilde,
                                 const std::vector<double>& times,
                                 const QuadratureSpec& spec) {
  if (omega_tilde <= 0.0)
    throw std::invalid_argument("amplitude_full: omega_tilde must be > 0");
  for (double t : times)
    if (t < 0.0)
      throw std::invalid_argument("amplitude_full: times must be >= 0");
  std::vector<complex> amp(times.size());
  std::size_t done = 0;
  try {
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double t = times[i];
      const double e_max = choose_e_max(m, omega_tilde, t, spec);
      const auto spectral = [&](double e) -> complex {
        const double g = decay_function(m, e);
        if (g <= 0.0) return complex(0.0, 0.0);
        const double d = e - omega_tilde - level_shift(m, e);
        return complex(g / (kTwoPi * (d * d + 0.25 * g * g)), 0.0);
      };
      amp[i] = fourier_quadrature(spectral, 0.0, e_max, t, spec,
                                  spectral_breakpoints(m, omega_tilde, e_max));
      done = i + 1;
    }
  } catch (const ConvergenceError& err) {
    std::ostringstream os;
    os << "amplitude_full: " << err.what() << " (" << done << " of "
       << times.size() << " samples converged)";
    ConvergenceError wrapped(os.str(), err.best_estimate, err.error_bound);
    wrapped.iterates = err.iterates;
    throw wrapped;
  }
  return build_series(times, std::move(amp));
}

complex wwa_amplitude(const WWAParams& p, double e_a, double t) {
  return std::exp(complex(-0.5 * p.gamma * t, -(e_a + p.delta_e) * t));
}

PoleReport pole_search(const SelfEnergyModel& m, double omega_tilde) {
  PoleReport report;
  auto log = [&](const std::string& line) { report.search_log.push_back(line); };

  double strength = std::numeric_limits<double>::infinity();
  try {
    strength =
        std::abs(sigma_minus(m, complex(omega_tilde, 0.0))) / omega_tilde;
  } catch (const std::domain_error&) {
    // the level sits on a reservoir resonance and the probe diverges there;
    // infinite strength lands in the resonance-regime branch below
  }
  if (strength >= 0.1) {
    std::ostringstream os;
    os << "|Sigma(E_a)|/E_a = " << strength
       << ": resonance regime, the perturbative pole may not exist";
    log(os.str());
  }

  complex z_wwa(0.0, 0.0);
  bool have_wwa = false;
  try {
    const WWAParams p = wwa_params(m, omega_tilde);
    z_wwa = complex(omega_tilde + p.delta_e, -0.5 * p.gamma);
    have_wwa = true;
  } catch (const std::domain_error& e) {
    log(std::string("no WWA seed: ") + e.what());
  }

  auto classify = [&](complex z) {
    if (have_wwa && std::abs(z - z_wwa) <= 0.02 * omega_tilde)
      return PoleClass::Perturbative;
    return PoleClass::Resonant;
  };

  if (m.kind == ModelKind::LorentzianReservoir) {
    // meromorphic reservoir: the resolvent denominator is a quadratic and
    // both roots are exact
    const complex w(m.omega0, -m.reservoir_width);
    const double gl =
        m.lambda * m.lambda * m.omega0 / (2.0 * kPi * kPi);
    const complex tr = omega_tilde + w;
    const complex disc = tr * tr - 4.0 * (omega_tilde * w - gl * w);
    const complex root = std::sqrt(disc);
    for (const complex z : {0.5 * (tr + root), 0.5 * (tr - root)}) {
      Pole p;
      p.location = z;
      const complex other = (z == 0.5 * (tr + root)) ? 0.5 * (tr - root)
                                                     : 0.5 * (tr + root);
      p.residue = (z - w) / (z - other);
      p.classification = classify(z);
      report.poles.push_back(p);
      log("exact quadratic root " + format_complex(z));
    }
    return report;
  }

  if (have_wwa) {
    RootFindSpec rf;
    rf.seed = z_wwa;
    try {
      const complex z = find_root(
          [&](complex zz) { return second_sheet_mismatch(m, omega_tilde, zz); },
          rf);
      Pole p;
      p.location = z;
      p.residue = resolvent_residue(m, z);
      p.classification = classify(z);
      report.poles.push_back(p);
      std::ostringstream os;
      os << "second-sheet root " << format_complex(z) << ", residual "
         << std::abs(second_sheet_mismatch(m, omega_tilde, z));
      log(os.str());
    } catch (const ConvergenceError& e) {
      log(std::string("WWA-seeded search failed: ") + e.what());
      if (strength >= 0.1)
        log("no perturbative pole found; treat the level as resonant");
    }
  }

  if (m.kind == ModelKind::FlatPhotoemission ||
      m.kind == ModelKind::PolarizedPhotoemission) {
    // the sharp reservoir edge plants a real first-sheet artifact at
    // z = cutoff (1 + x); solved in u = ln x against the exact-cutoff
    // self-energy, which stays real above the edge
    const double c = m.lambda * m.lambda / (2.0 * kPi * kPi) *
                     (m.kind == ModelKind::PolarizedPhotoemission ? 2.0 / 3.0
                                                                  : 1.0);
    const double lam = m.cutoff;
    double u = -(1.0 - omega_tilde / lam + c) / c;
    if (u < -690.0) {
      Pole p;
      p.location = complex(lam, 0.0);
      p.residue = complex(0.0, 0.0);
      p.classification = PoleClass::SpuriousCutoff;
      report.poles.push_back(p);
      std::ostringstream os;
      os << "cutoff artifact at cutoff (1 + x), ln x = " << u
         << ": below double precision, reported at the edge";
      log(os.str());
    } else {
      bool ok = false;
      for (int it = 0; it < 80; ++it) {
        const double x = std::exp(u);
        const double phi = 1.0 - omega_tilde / (lam * (1.0 + x)) +
                           c / (1.0 + x) +
                           c * (u - std::log1p(x));
        const double dphi = omega_tilde * x / (lam * (1.0 + x) * (1.0 + x)) -
                            c * x / ((1.0 + x) * (1.0 + x)) +
                            c * (1.0 - x / (1.0 + x));
        const double step = phi / dphi;
        u -= step;
        if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(u))) {
          ok = true;
          break;
        }
      }
      const double x = std::exp(u);
      if (ok && x > 0.0) {
        Pole p;
        p.location = complex(lam * (1.0 + x), 0.0);
        p.residue =
            complex(1.0 / (1.0 + c * std::log(x / (1.0 + x)) + c / x), 0.0);
        p.classification = PoleClass::SpuriousCutoff;
        report.poles.push_back(p);
        std::ostringstream os;
        os << "cutoff artifact at " << lam * (1.0 + x) << ", equation residual "
           << std::abs(lam * (1.0 + x) - omega_tilde -
                       flat_cutoff_sigma(c, lam, x));
        log(os.str());
      } else {
        log("cutoff-artifact search did not converge");
      }
    }
  }

  if (m.kind == ModelKind::Cavity) {
    const double l2 = m.lambda * m.lambda;
    const long n_c =
        std::max<long>(1, std::lround(omega_tilde / m.omega0));
    for (long n = std::max<long>(1, n_c - 1); n <= n_c + 1; ++n) {
      for (double off : {2.0 * l2, -2.0 * l2, 0.2 * l2, -0.2 * l2}) {
        RootFindSpec rf;
        rf.seed = complex(n * m.omega0 * (1.0 + off),
                          -l2 * m.omega0 * static_cast<double>(n));
        try {
          const complex z = find_root(
              [&](complex zz) {
                return second_sheet_mismatch(m, omega_tilde, zz);
              },
              rf);
          bool dup = false;
          for (const Pole& q : report.poles)
            if (std::abs(q.location - z) <
                1e-8 * std::max(1.0, std::abs(z)))
              dup = true;
          if (dup) continue;
          Pole p;
          p.location = z;
          p.residue = resolvent_residue(m, z);
          p.classification = classify(z);
          report.poles.push_back(p);
          log("cavity root " + format_complex(z));
        } catch (const ConvergenceError&) {
          // off-resonance seeds routinely wander; the log stays quiet
        } catch (const std::exception& ex) {
          // an iterate can graze a log-gamma pole on the resonance comb
          log(std::string("cavity seed abandoned: ") + ex.what());
        }
      }
    }
  }

  return report;
}

complex remainder_term(const SelfEnergyModel& m, double omega_tilde,
                       double t) {
  if (t <= 0.0)
    throw std::invalid_argument("remainder_term: requires t > 0");
  const auto [a_c, n] = small_energy_law(m);
  // the asymptote requires the continued decay function to follow its
  // leading power over the sampled strip y ~ (n + 1) / t, so the switchover
  // scales with the model's own infrared scale
  double ir = omega_tilde;
  if (m.kind == ModelKind::Cavity) ir = std::min(ir, m.omega0);
  if (m.kind == ModelKind::EntangledPair)
    ir = std::min(ir, 1.0 / m.separation);
  // the threshold log of the half-line reservoir modifies the power tail
  // at every scale; the rotated contour serves all times there
  const bool pure_power = m.kind != ModelKind::OneDimensional;
  if (pure_power && t >= 50.0 * (n + 1) / ir) {
    // leading edge contribution of the half-line transform; the first
    // neglected correction is of relative size 2 (n + 1) / (omega_tilde t)
    return a_c * factorial(n) /
           (kTwoPi * omega_tilde * omega_tilde * std::pow(kI * t, n + 1));
  }
  const double r = m.separation;
  const auto integrand = [&](double y) -> complex {
    if (m.kind == ModelKind::EntangledPair && r * y > 600.0)
      return complex(0.0, 0.0);
    const complex z(0.0, -y);
    const complex gc = decay_continued(m, z);
    // exact product of the two sheet resolvents: d restores the physical
    // sheet, d - i gc the continued one
    const complex d = complex(0.0, y) + omega_tilde + sigma_minus(m, z);
    return std::exp(-y * t) * gc / (d * (d - kI * gc));
  };
  double y_max = 45.0 / t;
  const auto tail_env = [&](double y) {
    return std::exp(-y * t) * a_c * std::pow(y, n) /
           (y * y + omega_tilde * omega_tilde);
  };
  while (tail_env(y_max) > 1e-18 && y_max < 1e8) y_max *= 2.0;
  if (m.kind == ModelKind::EntangledPair)
    y_max = std::min(y_max, 600.0 / r);
  QuadratureSpec qs;
  qs.rel_tol = 1e-11;
  qs.abs_tol = 0.0;
  return -kI / kTwoPi * integrate(integrand, 0.0, y_max, qs);
}

std::pair<double, double> crossover_time(double gamma_over_omega) {
  if (gamma_over_omega <= 0.0)
    throw std::domain_error("crossover_time: ratio must be > 0");
  const double ln_alpha =
      3.0 * std::log(gamma_over_omega) - std::log(8.0 * kPi);
  auto f = [&](double x) { return 2.0 * std::log(x) - x - ln_alpha; };
  if (f(2.0) <= 0.0)
    throw std::domain_error(
        "crossover_time: no exponential era at this coupling");
  double lo = 2.0, hi = 4.0;
  while (f(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
    if (hi - lo < 1e-13 * hi) break;
  }
  const double x = 0.5 * (lo + hi);
  return {x, std::exp(-2.0 * x)};
}

complex closed_form_massive_boson(double gamma, double omega_t) {
  if (!(gamma > 0.0) || !(gamma < 1.0 / std::sqrt(2.0)))
    throw std::domain_error(
        "closed_form_massive_boson: gamma must lie in (0, 1/sqrt(2))");
  if (omega_t < 0.0)
    throw std::domain_error("closed_form_massive_boson: omega_t must be >= 0");
  if (omega_t == 0.0) return complex(1.0, 0.0);
  const auto big_r = [](complex a) {
    const complex z = std::exp(kI * kPi / 4.0) * std::sqrt(-a);
    return (1.0 - kI) * std::sqrt(kPi / 2.0) -
           kPi * std::sqrt(-a) * faddeeva_w(kI * z);
  };
  const double g2 = gamma * gamma;
  const complex a_plus =
      complex(1.0 - g2, gamma * std::sqrt(2.0 - g2)) * omega_t;
  const complex a_minus = std::conj(a_plus);
  return (big_r(a_plus) - big_r(a_minus)) /
         (kTwoPi * kI * std::sqrt(1.0 - 0.5 * g2) * std::sqrt(omega_t));
}

complex cavity_G(int sign, double s, double a, double b,
                 const QuadratureSpec& spec) {
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("cavity_G: sign must be +1 or -1");
  if (s < 0.0) throw std::domain_error("cavity_G: s must be >= 0");
  if (b <= 0.0) throw std::domain_error("cavity_G: b must be > 0");
  const double sg = sign;
  const auto f = [&](double y) -> complex {
    const double d = y + sg * std::log(y) - a;
    return complex(1.0 / (d * d + b * b), 0.0);
  };
  // truncation point: after the analytic tail below, the residual is of
  // order ln(Y)/Y^2
  const double tol = std::max(spec.abs_tol, 1e-9);
  const double y_big = std::max(50.0 + 3.0 * (std::abs(a) + b),
                                std::sqrt(10.0 * b / (kPi * tol)));

  std::vector<double> bps{1.0};
  // denominator roots mark the resonance; Newton on y + sg ln y = a
  {
    double y = std::max(1.5, a - sg * std::log(std::max(a, 2.0)));
    for (int it = 0; it < 40; ++it) {
      const double g = y + sg * std::log(y) - a;
      const double dg = 1.0 + sg / y;
      if (dg == 0.0) break;
      const double step = g / dg;
      y -= step;
      if (y <= 0.0) {
        y = 1e-3;
        break;
      }
      if (std::abs(step) < 1e-12 * std::max(1.0, y)) break;
    }
    if (y > 0.5 && y < y_big) {
      for (double c : {y - 3.0 * b, y - b, y, y + b, y + 3.0 * b})
        if (c > 0.0 && c < y_big) bps.push_back(c);
    }
  }
  if (sign == -1 && a >= 1.0) {
    // second root of y - ln y = a below 1
    double y = std::exp(-a);
    for (int it = 0; it < 80; ++it) y = std::exp(y - a);
    if (y > 1e-300 && y < 1.0) bps.push_back(y);
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

  const complex core = fourier_quadrature(f, 0.0, y_big, s, spec, bps);

  // analytic tail with the logarithm frozen at Y: integral of
  // e^{-isy} (y - c)^{-2} in terms of E1 on the imaginary axis
  const double c0 = a - sg * std::log(y_big);
  complex tail;
  if (s == 0.0) {
    tail = complex(1.0 / (y_big - c0), 0.0);
  } else {
    const double x = s * (y_big - c0);
    tail = std::exp(complex(0.0, -s * y_big)) / (y_big - c0) -
           kI * s * std::exp(complex(0.0, -s * c0)) * e1_imag_axis(x);
  }
  return b / kPi * (core + tail);
}

PersistenceSeries cavity_resonant_amplitude(const SelfEnergyModel& m, double d,
                                            int n_r,
                                            const std::vector<double>& times) {
  if (m.kind != ModelKind::Cavity)
    throw std::invalid_argument(
        "cavity_resonant_amplitude: requires a cavity model");
  if (n_r < 1)
    throw std::invalid_argument("cavity_resonant_amplitude: n_r must be >= 1");
  const double l2 = m.lambda * m.lambda;
  const double w0 = m.omega0;
  // invert the composite detuning to recover delta and gate the expansion
  const double delta =
      l2 / kTwoPi *
      (std::log(kTwoPi / l2) - std::lgamma(static_cast<double>(n_r)) +
       n_r * std::log(m.cutoff / w0) - d);
  if (std::abs(delta) > 10.0 * l2) {
    std::ostringstream os;
    os << "cavity_resonant_amplitude: detuning delta = " << delta
       << " exceeds 10 lambda^2; the level is off resonance, use "
          "amplitude_full";
    throw std::invalid_argument(os.str());
  }
  QuadratureSpec qs;
  qs.rel_tol = 1e-8;
  qs.abs_tol = 1e-10;
  const double g0 = l2 * w0;
  std::vector<complex> amp(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    const double s = g0 * t / kPi;
    const complex g_minus = cavity_G(-1, s, -d, (n_r + 1) * kPi, qs);
    const complex g_plus = cavity_G(+1, s, d, n_r * kPi, qs);
    amp[i] = std::exp(complex(0.0, -n_r * w0 * t)) *
             (g_minus + std::conj(g_plus));
  }
  return build_series(times, std::move(amp));
}

BoundReport universal_bounds(const PersistenceSeries& series, double delta_h) {
  if (delta_h <= 0.0)
    throw std::invalid_argument("universal_bounds: delta_h must be > 0");
  const std::size_t n = series.times.size();
  if (n < 2 || series.probability.size() != n || series.density.size() != n)
    throw std::invalid_argument("universal_bounds: series is too short");
  BoundReport rep;
  // The rate bound saturates to O(t^3) slack at early times while the
  // differenced density carries O(h^2) error, so the tolerance is tied to
  // the spread rather than to machine precision.
  const double tol_rate = 1e-9 + 0.01 * delta_h;
  // Renormalized shift functions are not exact transform pairs of the
  // truncated decay functions, so computed series carry a small spectral
  // weight deficit; every bound is checked against the series' own
  // t = 0 weight instead of exact unity.
  double scale = 1.0;
  if (series.times.front() == 0.0 && series.probability.front() > 0.5)
    scale = series.probability.front();

  for (std::size_t i = 0; i < n; ++i) {
    const double a = series.probability[i] / scale;
    const double bound =
        2.0 * delta_h * std::sqrt(std::max(a - a * a, 0.0));
    const double margin = std::abs(series.density[i]) / scale - bound;
    if (margin > rep.mt_worst_margin) {
      rep.mt_worst_margin = margin;
      rep.mt_worst_time = series.times[i];
    }
  }
  if (rep.mt_worst_margin > tol_rate) {
    rep.mt_satisfied = false;
    std::ostringstream os;
    os << "|da/dt| exceeds 2 dH sqrt(a - a^2) by " << rep.mt_worst_margin
       << " at t = " << rep.mt_worst_time;
    rep.violations.push_back(os.str());
  }

  const double t_cos = 0.5 * kPi / delta_h;
  for (std::size_t i = 0; i < n; ++i) {
    if (series.times[i] >= t_cos) break;
    const double c = std::cos(delta_h * series.times[i]);
    const double margin = c * c - series.probability[i] / scale;
    if (margin > rep.cosine_worst_margin) {
      rep.cosine_worst_margin = margin;
      rep.cosine_worst_time = series.times[i];
    }
  }
  if (rep.cosine_worst_margin > 1e-9) {
    rep.cosine_satisfied = false;
    std::ostringstream os;
    os << "a(t) falls below cos^2(dH t) by " << rep.cosine_worst_margin
       << " at t = " << rep.cosine_worst_time;
    rep.violations.push_back(os.str());
  }

  const double half = 0.5 * scale;
  for (std::size_t i = 1; i < n; ++i) {
    if (series.probability[i] <= half && series.probability[i - 1] > half) {
      const double frac = (series.probability[i - 1] - half) /
                          (series.probability[i - 1] - series.probability[i]);
      rep.half_life =
          series.times[i - 1] + frac * (series.times[i] - series.times[i - 1]);
      rep.half_life_reached = true;
      break;
    }
  }
  if (rep.half_life_reached &&
      delta_h * rep.half_life < 0.25 * kPi * (1.0 - 1e-9)) {
    rep.half_life_satisfied = false;
    std::ostringstream os;
    os << "dH * half-life = " << delta_h * rep.half_life << " < pi/4";
    rep.violations.push_back(os.str());
  }

  // short-time decay-rate coefficient: fit density ~ C t through the
  // origin, restricted to the prefix where density/t is still flat (the
  // quadratic era ends at the inverse reservoir bandwidth, which the bound
  // report cannot know; the prefix detects it)
  double num = 0.0, den = 0.0;
  double c1 = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (series.times[i] <= 0.0) continue;
    if (delta_h * series.times[i] > 0.5) break;
    const double c = series.density[i] / (scale * series.times[i]);
    if (c1 == 0.0) c1 = c;
    if (std::abs(c - c1) > 0.1 * std::abs(c1)) break;
    num += series.density[i] / scale * series.times[i];
    den += series.times[i] * series.times[i];
  }
  rep.zeno_coefficient = (den > 0.0) ? num / den : 0.0;
  return rep;
}

double energy_spread(const SelfEnergyModel& m) {
  if (!(m.cutoff > 0.0))
    throw std::invalid_argument(
        "energy_spread: the coupling sum needs a finite cutoff");
  QuadratureSpec qs;
  qs.rel_tol = 1e-11;
  qs.abs_tol = 0.0;
  const complex sum = integrate(
      [&](double e) { return complex(decay_function(m, e), 0.0); }, 0.0,
      m.cutoff, qs);
  return std::sqrt(sum.real() / kTwoPi);
}

}  // namespace dk
