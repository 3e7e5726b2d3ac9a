#include "decaykit/tunneling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace dk {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
const complex kI{0.0, 1.0};

// Phase-derivative step and the burst-series truncation threshold.
constexpr double kPhaseStepFraction = 1e-4;
constexpr double kBurstCutoff = 1e-6;

struct FullAmplitudes {
  complex t{};
  complex r{};
  complex r_tilde{};
};

// Elementary scattering matrices referenced to local segment edges, composed
// with the Redheffer star so every stored entry stays bounded for real k no
// matter how opaque the barrier is.
struct SMatrix {
  complex r{};   // left-incidence reflection
  complex t{};   // left-to-right transmission
  complex rt{};  // right-incidence reflection
  complex tp{};  // right-to-left transmission
};

SMatrix interface_matrix(complex p, complex q) {
  const complex d = p + q;
  return {(p - q) / d, 2.0 * p / d, (q - p) / d, 2.0 * q / d};
}

SMatrix propagation_matrix(complex kappa, double width) {
  const complex phase = std::exp(kI * kappa * width);
  return {complex{0.0, 0.0}, phase, complex{0.0, 0.0}, phase};
}

SMatrix star(const SMatrix& a, const SMatrix& b) {
  const complex d = 1.0 - a.rt * b.r;
  return {a.r + a.tp * b.r * a.t / d, b.t * a.t / d,
          b.rt + b.t * a.rt * b.tp / d, a.tp * b.tp / d};
}

// Segment momentum on the principal branch; evanescent pieces get Im >= 0 so
// the propagation factor decays.
complex segment_momentum(complex k, double mass, double height) {
  return std::sqrt(k * k - 2.0 * mass * height);
}

FullAmplitudes amplitudes_at(const Potential1D& pot, complex k) {
  if (pot.kind == PotentialKind::DeltaBarrier) {
    const complex d = k + kI * pot.mass * pot.eta;
    const complex t = k / d;
    const complex r = -kI * pot.mass * pot.eta * std::exp(2.0 * kI * k * pot.a) / d;
    const complex rt =
        -kI * pot.mass * pot.eta * std::exp(-2.0 * kI * k * pot.a) / d;
    return {t, r, rt};
  }
  SMatrix s = interface_matrix(k, segment_momentum(k, pot.mass,
                                                   pot.segments.front().height));
  for (std::size_t j = 0; j < pot.segments.size(); ++j) {
    const auto& seg = pot.segments[j];
    const complex kappa = segment_momentum(k, pot.mass, seg.height);
    s = star(s, propagation_matrix(kappa, seg.x1 - seg.x0));
    const complex next = j + 1 < pot.segments.size()
                             ? segment_momentum(k, pot.mass,
                                                pot.segments[j + 1].height)
                             : k;
    s = star(s, interface_matrix(kappa, next));
  }
  // Re-reference the local amplitudes to absolute plane waves exp(+-ikx).
  const double a = pot.support_left();
  const double b = pot.support_right();
  return {s.t * std::exp(-kI * k * (b - a)), s.r * std::exp(2.0 * kI * k * a),
          s.rt * std::exp(-2.0 * kI * k * b)};
}

complex half_line_phase(const FullAmplitudes& f) {
  // exp(iS) = (1 + conj(r)) / (1 + r) * t^2 / |t|^2, unimodular for real k.
  const complex t2 = f.t * f.t;
  return (1.0 + std::conj(f.r)) / (1.0 + f.r) * t2 / std::norm(f.t);
}

void require_consistent(const Potential1D& pot, const InitialState& state,
                        const char* who) {
  if (std::abs(pot.support_left() - state.a) >
      1e-12 * std::max(1.0, state.a)) {
    std::ostringstream os;
    os << who << ": state support [0, " << state.a
       << "] does not end at the barrier position " << pot.support_left();
    throw std::invalid_argument(os.str());
  }
  if (std::abs(pot.mass - state.mass) > 1e-12 * pot.mass) {
    throw std::invalid_argument(std::string(who) +
                                ": state and potential mass differ");
  }
}

// Central-difference derivative of a scattering phase, evaluated through the
// ratio so branch wrapping of arg cannot corrupt it.
double phase_derivative(const Potential1D& pot, double k,
                        complex FullAmplitudes::* member) {
  const double h = kPhaseStepFraction * k;
  const complex hi = amplitudes_at(pot, complex(k + h, 0.0)).*member;
  const complex lo = amplitudes_at(pot, complex(k - h, 0.0)).*member;
  return std::arg(hi / lo) / (2.0 * h);
}

// Resonance positions below k_hi, used as quadrature breakpoints. Failures
// are ignored: the hints are optional.
std::vector<TunnelingPole> poles_below(const Potential1D& pot, double k_hi) {
  std::vector<TunnelingPole> out;
  const double a = pot.support_left();
  const int n_hi = static_cast<int>(std::floor(k_hi * a / kPi));
  for (int n = 1; n <= n_hi; ++n) {
    try {
      out.push_back(pole_decay_rate(pot, n * kPi / a));
    } catch (const std::exception&) {
    }
  }
  return out;
}

std::vector<double> resonance_breakpoints(const std::vector<TunnelingPole>& ps,
                                          double k_hi) {
  std::vector<double> bps;
  for (const auto& p : ps) {
    const double q = p.k_pole.real();
    const double w = -p.k_pole.imag();
    for (double c : {-30.0, -10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0, 30.0}) {
      const double k = q + c * w;
      if (k > 0.0 && k < k_hi) bps.push_back(k);
    }
  }
  return bps;
}

}  // namespace

double Potential1D::support_left() const {
  return kind == PotentialKind::DeltaBarrier ? a : segments.front().x0;
}

double Potential1D::support_right() const {
  return kind == PotentialKind::DeltaBarrier ? a : segments.back().x1;
}

double Potential1D::opacity() const {
  if (kind != PotentialKind::DeltaBarrier) {
    throw std::invalid_argument("opacity: defined for the delta barrier only");
  }
  return mass * eta * a;
}

Potential1D delta_barrier(double mass, double eta, double a) {
  if (mass <= 0.0) throw std::invalid_argument("delta_barrier: mass must be > 0");
  if (eta < 0.0) throw std::invalid_argument("delta_barrier: eta must be >= 0");
  if (a <= 0.0) throw std::invalid_argument("delta_barrier: a must be > 0");
  Potential1D pot;
  pot.kind = PotentialKind::DeltaBarrier;
  pot.mass = mass;
  pot.a = a;
  pot.eta = eta;
  return pot;
}

Potential1D piecewise_barrier(double mass,
                              std::vector<PotentialSegment> segments) {
  if (mass <= 0.0) {
    throw std::invalid_argument("piecewise_barrier: mass must be > 0");
  }
  if (segments.empty()) {
    throw std::invalid_argument("piecewise_barrier: needs at least one segment");
  }
  if (segments.front().x0 <= 0.0) {
    throw std::invalid_argument("piecewise_barrier: support must start at x > 0");
  }
  for (std::size_t j = 0; j < segments.size(); ++j) {
    if (segments[j].x1 <= segments[j].x0) {
      throw std::invalid_argument("piecewise_barrier: segment edges must increase");
    }
    if (j > 0 && std::abs(segments[j].x0 - segments[j - 1].x1) > 1e-12) {
      throw std::invalid_argument("piecewise_barrier: segments must be contiguous");
    }
  }
  Potential1D pot;
  pot.kind = PotentialKind::PiecewiseConstant;
  pot.mass = mass;
  pot.a = segments.front().x0;
  pot.segments = std::move(segments);
  return pot;
}

ScatteringData scattering_amplitudes(const Potential1D& pot, double k) {
  if (k <= 0.0) {
    throw std::invalid_argument("scattering_amplitudes: k must be > 0");
  }
  const FullAmplitudes f = amplitudes_at(pot, complex(k, 0.0));
  ScatteringData sd;
  sd.k = k;
  sd.t = f.t;
  sd.r = f.r;
  sd.r_tilde = f.r_tilde;
  sd.s_phase = std::arg(half_line_phase(f));
  return sd;
}

std::pair<complex, complex> scattering_continued(const Potential1D& pot,
                                                 complex k) {
  const FullAmplitudes f = amplitudes_at(pot, k);
  return {f.t, f.r};
}

complex halfline_mode(const Potential1D& pot, double k, double x) {
  if (k <= 0.0) throw std::invalid_argument("halfline_mode: k must be > 0");
  if (x < 0.0) throw std::invalid_argument("halfline_mode: x must be >= 0");
  const double norm = 1.0 / std::sqrt(2.0 * kPi);
  const FullAmplitudes f = amplitudes_at(pot, complex(k, 0.0));
  const double a = pot.support_left();
  const double b = pot.support_right();
  if (x <= a) {
    return -2.0 * kI * norm * f.t / (1.0 + f.r) * std::sin(k * x);
  }
  if (x >= b) {
    return norm * (std::exp(-kI * k * x) -
                   half_line_phase(f) * std::exp(kI * k * x));
  }
  // Inside the barrier: march segment coefficients from the outer region
  // inward. Backward passage through an evanescent segment amplifies the
  // right-decaying component, so this branch is meant for moderate opacities.
  complex kq{k, 0.0};
  complex aq = -norm * half_line_phase(f) * std::exp(kI * k * b);
  complex bq = norm * std::exp(-kI * k * b);
  for (std::size_t j = pot.segments.size(); j-- > 0;) {
    const auto& seg = pot.segments[j];
    const complex kp = segment_momentum(complex(k, 0.0), pot.mass, seg.height);
    const double width = seg.x1 - seg.x0;
    const complex sum = aq + bq;
    const complex diff = (kq / kp) * (aq - bq);
    aq = 0.5 * (sum + diff) * std::exp(-kI * kp * width);
    bq = 0.5 * (sum - diff) * std::exp(kI * kp * width);
    kq = kp;
    if (x >= seg.x0) {
      const double dx = x - seg.x0;
      return aq * std::exp(kI * kp * dx) + bq * std::exp(-kI * kp * dx);
    }
  }
  throw std::logic_error("halfline_mode: segment walk left the support");
}

InitialState well_state(int n, double a, double mass) {
  if (n < 1) throw std::invalid_argument("well_state: n must be >= 1");
  if (a <= 0.0) throw std::invalid_argument("well_state: a must be > 0");
  if (mass <= 0.0) throw std::invalid_argument("well_state: mass must be > 0");
  InitialState st;
  st.kind = InitialStateKind::WellHarmonic;
  st.n = n;
  st.a = a;
  st.mass = mass;
  st.k0 = n * kPi / a;
  st.sigma_k = kPi / (2.0 * a);
  const double lo = std::max(st.k0 - 8.0 * st.sigma_k, 1e-6 * st.k0);
  const double hi = st.k0 + 8.0 * st.sigma_k;
  st.k_grid = Eigen::VectorXd::LinSpaced(2048, lo, hi);
  st.psi_grid = st.k_grid.unaryExpr(
      [&st](double k) { return initial_spectral_amplitude(st, k); });
  return st;
}

InitialState parabolic_state(double a, double mass) {
  if (a <= 0.0) throw std::invalid_argument("parabolic_state: a must be > 0");
  if (mass <= 0.0) {
    throw std::invalid_argument("parabolic_state: mass must be > 0");
  }
  InitialState st;
  st.kind = InitialStateKind::Parabolic;
  st.a = a;
  st.mass = mass;
  st.k0 = kPi / a;  // nominal carrier, shared with the lowest harmonic
  st.sigma_k = kPi / (2.0 * a);
  const double lo = std::max(st.k0 - 8.0 * st.sigma_k, 1e-6 * st.k0);
  const double hi = st.k0 + 8.0 * st.sigma_k;
  st.k_grid = Eigen::VectorXd::LinSpaced(2048, lo, hi);
  st.psi_grid = st.k_grid.unaryExpr(
      [&st](double k) { return initial_spectral_amplitude(st, k); });
  return st;
}

double initial_position_amplitude(const InitialState& state, double x) {
  if (x < 0.0 || x > state.a) return 0.0;
  if (state.kind == InitialStateKind::WellHarmonic) {
    return std::sqrt(2.0 / state.a) * std::sin(state.n * kPi * x / state.a);
  }
  return std::sqrt(30.0 / std::pow(state.a, 5)) * x * (state.a - x);
}

double initial_spectral_amplitude(const InitialState& state, double k) {
  const double a = state.a;
  if (state.kind == InitialStateKind::WellHarmonic) {
    // (2/sqrt(pi a)) q sin(ka) / (q^2 - k^2) rearranged about the removable
    // point k = q: sin(ka) = (-1)^n sin((k - q) a) there, so the quotient
    // below is exact for every k and finite at the resonance.
    const double q = state.n * kPi / a;
    const double delta = k - q;
    const double u = std::abs(delta * a) < 1e-8
                         ? a * (1.0 - delta * delta * a * a / 6.0)
                         : std::sin(delta * a) / delta;
    return 2.0 / std::sqrt(kPi * a) * q * u / (2.0 * q + delta);
  }
  const double u = k * a;
  const double pref = std::sqrt(60.0 / (kPi * std::pow(a, 5)));
  if (std::abs(u) < 0.5) {
    // [2(1 - cos u) - u sin u] / u^3 = u/12 - u^3/180 + u^5/6720 - u^7/453600
    return pref * std::pow(a, 3) * u *
           (1.0 / 12.0 - u * u / 180.0 + std::pow(u, 4) / 6720.0 -
            std::pow(u, 6) / 453600.0);
  }
  return pref * (2.0 * (1.0 - std::cos(u)) - u * std::sin(u)) / std::pow(k, 3);
}

std::vector<complex> evolve_wavefunction(const Potential1D& pot,
                                         const InitialState& state, double x,
                                         const std::vector<double>& times,
                                         const QuadratureSpec& spec) {
  require_consistent(pot, state, "evolve_wavefunction");
  const double b = pot.support_right();
  if (x < 10.0 * b) {
    std::ostringstream os;
    os << "evolve_wavefunction: far-field form needs x >= " << 10.0 * b
       << ", got " << x;
    throw std::invalid_argument(os.str());
  }
  const double m = pot.mass;
  const double base_hi = state.k0 + 10.0 * state.sigma_k;
  const double cap_hi = state.k0 + 100.0 * state.sigma_k;
  // e_max_override doubles as a momentum truncation here: late-time tails
  // carry k^2 t / 2m oscillations per mode, so callers probing them cap the
  // range where the spectral amplitude is already negligible.
  const double forced_hi = spec.e_max_override;

  double k_hi_all = forced_hi > 0.0 ? forced_hi : base_hi;
  if (forced_hi <= 0.0) {
    for (double t : times) {
      if (t <= 0.0) continue;
      const double ks = m * x / t;
      k_hi_all = std::max(k_hi_all,
                          std::min(1.2 * ks + 3.0 * state.sigma_k, cap_hi));
    }
  }
  const auto poles = poles_below(pot, k_hi_all);

  std::vector<complex> out;
  out.reserve(times.size());
  const double norm = 1.0 / std::sqrt(2.0 * kPi);
  for (double t : times) {
    double k_hi = cap_hi;
    if (forced_hi > 0.0) {
      k_hi = forced_hi;
    } else if (t > 0.0) {
      const double ks = m * x / t;
      k_hi = std::max(base_hi,
                      std::min(1.2 * ks + 3.0 * state.sigma_k, cap_hi));
    }
    auto f = [&](double k) -> complex {
      const FullAmplitudes amp = amplitudes_at(pot, complex(k, 0.0));
      const double phase = k * x - k * k * t / (2.0 * m);
      return -kI * norm * amp.t / (1.0 + amp.r) *
             initial_spectral_amplitude(state, k) *
             std::exp(kI * phase);
    };
    out.push_back(integrate(f, 0.0, k_hi, spec,
                            resonance_breakpoints(poles, k_hi)));
  }
  return out;
}

FluxSeries saddle_flux(const Potential1D& pot, const InitialState& state,
                       double x, const std::vector<double>& times) {
  require_consistent(pot, state, "saddle_flux");
  if (x < 10.0 * pot.support_right()) {
    throw std::invalid_argument("saddle_flux: far-field form needs x >= 10 b");
  }
  const double m = pot.mass;
  const double a = state.a;
  const double k0 = state.k0;
  const FullAmplitudes f0 = amplitudes_at(pot, complex(k0, 0.0));

  FluxSeries out;
  out.x = x;
  out.times = Eigen::Map<const Eigen::VectorXd>(times.data(),
                                                static_cast<long>(times.size()));

  const double chi_prime = phase_derivative(pot, k0, &FullAmplitudes::t);
  const double dx = phase_derivative(pot, k0, &FullAmplitudes::r);
  if (dx <= 0.0) {
    throw std::invalid_argument(
        "saddle_flux: nonpositive attempt spacing phi'(k0)");
  }
  out.t0 = m * (x - a + chi_prime) / k0;
  const double dt = m * dx / k0;
  const double t2 = std::norm(f0.t);
  const double r_mag = std::abs(f0.r);
  out.gamma_formula = t2 / dt;

  long n_max = 0;
  if (r_mag >= 1.0 - 1e-15) {
    n_max = 10000000;
    out.notes.push_back("burst series capped at 1e7 terms: |r| ~ 1");
  } else if (r_mag > 1e-14) {
    n_max = static_cast<long>(std::ceil(std::log(kBurstCutoff) /
                                        std::log(r_mag)));
  }

  const int overlap = dx >= a ? 0 : static_cast<int>(std::floor(a / dx));
  if (overlap >= 1) {
    out.notes.push_back("attempts interfere across M = " +
                        std::to_string(overlap) + " bursts");
    if (1.0 / t2 < 10.0 * overlap) {
      out.notes.push_back(
          "Markov condition |t|^-2 >> M fails; envelope form unreliable");
    }
  }

  // Complex burst weight (-r)^n through the log so the phase stays exact for
  // n in the thousands.
  const complex log_mr =
      r_mag > 1e-14 ? std::log(-f0.r) : complex{0.0, 0.0};
  auto burst_sum = [&](double t) -> complex {
    const double s = k0 * (t - out.t0) / m;
    if (s < 0.0) return {0.0, 0.0};
    const long lo = std::max(0L, static_cast<long>(std::ceil((s - a) / dx)) - 1);
    const long hi = std::min(n_max, static_cast<long>(std::floor(s / dx)) + 1);
    complex acc{0.0, 0.0};
    for (long n = lo; n <= hi; ++n) {
      const double arg = a - s + n * dx;
      if (arg < 0.0 || arg > a) continue;
      const complex weight =
          n == 0 ? complex{1.0, 0.0}
                 : std::exp(static_cast<double>(n) * log_mr);
      acc += weight * initial_position_amplitude(state, arg);
    }
    return acc;
  };

  out.flux.resize(out.times.size());
  out.markov_flux.resize(out.times.size());
  out.alpha = 1.0;
  if (overlap >= 1) {
    // alpha = sum_j exp(i j phi) int psi0(y - j dx/2) psi0(y + j dx/2) dy,
    // conjugate pairs folded into cosines; the j = 0 term is the norm.
    const double phi = std::arg(-f0.r);
    QuadratureSpec ospec;
    double alpha = 1.0;
    for (int j = 1; j <= overlap; ++j) {
      const double shift = 0.5 * j * dx;
      auto prod = [&](double y) -> complex {
        return initial_position_amplitude(state, y - shift) *
               initial_position_amplitude(state, y + shift);
      };
      const double cj = integrate(prod, shift, a - shift, ospec).real();
      alpha += 2.0 * std::cos(j * phi) * cj;
    }
    out.alpha = alpha;
  }
  const double log_r2 = r_mag > 1e-14 ? 2.0 * std::log(r_mag)
                                      : -std::numeric_limits<double>::infinity();
  for (long i = 0; i < out.times.size(); ++i) {
    const double t = out.times[i];
    out.flux[i] = k0 / m * t2 * std::norm(burst_sum(t));
    out.markov_flux[i] =
        t < out.t0 ? 0.0
                   : out.alpha * t2 / dt * std::exp(log_r2 * (t - out.t0) / dt);
  }

  // Decay-rate fit: ln of burst-aligned bin integrals against bin centers.
  // Each bin [t0 + j dt, t0 + (j+1) dt] holds one whole burst once dx > a.
  if (r_mag > 1e-14 && out.gamma_formula > 0.0) {
    const long j_lo = static_cast<long>(std::ceil(0.5 / (out.gamma_formula * dt)));
    long j_hi = static_cast<long>(std::floor(2.5 / (out.gamma_formula * dt))) - 1;
    if (j_hi < j_lo + 3) j_hi = j_lo + 3;
    if (j_hi <= n_max) {
      constexpr int kBinSamples = 64;
      // the window spans ~2 / (gamma dt) attempts; a thinned sample keeps
      // the ln-linear fit well conditioned without touching every burst
      const long stride = std::max<long>(1, (j_hi - j_lo) / 256);
      std::vector<double> centers, logs;
      for (long j = j_lo; j <= j_hi; j += stride) {
        const double lo = out.t0 + j * dt;
        double acc = 0.0;
        const double h = dt / kBinSamples;
        for (int s = 0; s < kBinSamples; ++s) {
          const double tl = lo + s * h;
          const double fl = k0 / m * t2 * std::norm(burst_sum(tl));
          const double fr = k0 / m * t2 * std::norm(burst_sum(tl + h));
          acc += 0.5 * (fl + fr) * h;
        }
        if (acc <= 0.0) continue;
        centers.push_back(lo + 0.5 * dt);
        logs.push_back(std::log(acc));
      }
      if (centers.size() >= 4) {
        const auto [slope, icept] = detail::fit_line(centers, logs);
        out.gamma_fit = -slope;
        out.fit_window = {centers.front() - 0.5 * dt, centers.back() + 0.5 * dt};
        double ss = 0.0;
        for (std::size_t i = 0; i < centers.size(); ++i) {
          const double res = logs[i] - (icept + slope * centers[i]);
          ss += res * res;
        }
        out.fit_rmse = std::sqrt(ss / static_cast<double>(centers.size()));
      } else {
        out.notes.push_back("rate fit skipped: too few populated bins");
      }
    } else {
      out.notes.push_back("rate fit skipped: burst series exhausted in window");
    }
  } else {
    out.notes.push_back("rate fit skipped: reflection negligible");
  }
  return out;
}

TunnelingPole pole_decay_rate(const Potential1D& pot, double k0) {
  if (k0 <= 0.0) throw std::invalid_argument("pole_decay_rate: k0 must be > 0");
  const double a = pot.support_left();
  const double spacing = kPi / a;
  const int n0 = std::max(1, static_cast<int>(std::llround(k0 * a / kPi)));
  auto f = [&](complex z) { return 1.0 + scattering_continued(pot, z).second; };

  // k = n pi / a is a stationary point of the delta amplitude where the
  // Newton iteration can stall, so each level is also probed from seeds
  // detuned down and into the lower half plane.
  constexpr std::pair<double, double> kDetune[] = {
      {0.0, 0.0}, {0.02, 0.005}, {0.05, 0.02}, {0.1, 0.05}};
  std::vector<double> scanned;
  for (int n : {n0, n0 - 1, n0 + 1}) {
    if (n < 1) continue;
    const double seed = n * spacing;
    scanned.push_back(seed);
    for (const auto& [shift, dip] : kDetune) {
      RootFindSpec rs;
      rs.seed = complex(seed * (1.0 - shift), -seed * dip);
      complex root;
      try {
        root = find_root(f, rs);
      } catch (const ConvergenceError&) {
        continue;
      }
      if (root.imag() >= 0.0) continue;
      if (std::abs(root.real() - k0) > 0.5 * spacing) continue;
      TunnelingPole p;
      p.k_pole = root;
      p.gamma = -2.0 * root.real() * root.imag() / pot.mass;
      return p;
    }
  }
  std::ostringstream os;
  os << "pole_decay_rate: no resonance pole within half a level spacing of k0 = "
     << k0 << "; scanned seeds";
  for (double s : scanned) os << " " << s;
  throw std::runtime_error(os.str());
}

FluxSeries beats_flux(const Potential1D& pot, int n1, int n2, complex c1,
                      complex c2, double x, const std::vector<double>& times) {
  if (n1 < 1 || n2 <= n1) {
    throw std::invalid_argument("beats_flux: needs resonance indices n2 > n1 >= 1");
  }
  const double a = pot.support_left();
  const double m = pot.mass;
  const TunnelingPole p1 = pole_decay_rate(pot, n1 * kPi / a);
  const TunnelingPole p2 = pole_decay_rate(pot, n2 * kPi / a);
  const double k1 = p1.k_pole.real(), g1 = -p1.k_pole.imag();
  const double k2 = p2.k_pole.real(), g2 = -p2.k_pole.imag();
  if (std::abs(k1 - k2) <= 5.0 * (g1 + g2)) {
    std::ostringstream os;
    os << "beats_flux: poles overlap, |k1 - k2| = " << std::abs(k1 - k2)
       << " <= 5 (gamma1 + gamma2) = " << 5.0 * (g1 + g2);
    throw std::invalid_argument(os.str());
  }
  const double gamma1 = 2.0 * k1 * g1 / m;
  const double gamma2 = 2.0 * k2 * g2 / m;
  const double t1 = m * x / k1;
  const double t2 = m * x / k2;

  auto value = [&](double t) -> double {
    const double e1 = std::exp(-gamma1 * std::abs(t - t1));
    const double e2 = std::exp(-gamma2 * std::abs(t - t2));
    const double theta = (k1 - k2) * x - (k1 * k1 - k2 * k2) / (2.0 * m) * t +
                         (g1 * g1 - g2 * g2) / (2.0 * m) * t;
    const complex cross = c1 * std::conj(c2) * std::polar(1.0, theta);
    return (std::norm(c1) * k1 * e1 + std::norm(c2) * k2 * e2 +
            (k1 + k2) * std::sqrt(e1 * e2) * cross.real()) /
           m;
  };

  FluxSeries out;
  out.x = x;
  out.t0 = std::max(t1, t2);
  out.times = Eigen::Map<const Eigen::VectorXd>(times.data(),
                                                static_cast<long>(times.size()));
  out.flux.resize(out.times.size());
  out.markov_flux.resize(out.times.size());
  for (long i = 0; i < out.times.size(); ++i) {
    const double t = out.times[i];
    out.flux[i] = value(t);
    out.markov_flux[i] = (std::norm(c1) * k1 * std::exp(-gamma1 * std::abs(t - t1)) +
                          std::norm(c2) * k2 * std::exp(-gamma2 * std::abs(t - t2))) /
                         m;
  }

  // Windowed spectral fit of the modulation frequency. The scan range comes
  // from the level spacing, the located peak from the series itself.
  const double w_guess = std::abs(k2 * k2 - k1 * k1) / (2.0 * m);
  const double period = 2.0 * kPi / w_guess;
  const int n_grid = 720;
  const double t_start = out.t0 + period;
  const double span = 30.0 * period;
  const double h = span / (n_grid - 1);
  std::vector<double> samples(n_grid), ts(n_grid);
  double mean = 0.0;
  for (int i = 0; i < n_grid; ++i) {
    ts[i] = t_start + i * h;
    samples[i] = value(ts[i]);
    mean += samples[i];
  }
  mean /= n_grid;
  auto power = [&](double w) -> double {
    complex acc{0.0, 0.0};
    for (int i = 0; i < n_grid; ++i) {
      const double hann =
          0.5 * (1.0 - std::cos(2.0 * kPi * i / (n_grid - 1)));
      acc += hann * (samples[i] - mean) * std::polar(1.0, -w * ts[i]);
    }
    return std::norm(acc);
  };
  double best_w = 0.0, best_p = -1.0;
  const double w_lo = 0.3 * w_guess, w_hi = 2.0 * w_guess;
  const int n_scan = 600;
  for (int i = 0; i <= n_scan; ++i) {
    const double w = w_lo + (w_hi - w_lo) * i / n_scan;
    const double p = power(w);
    if (p > best_p) {
      best_p = p;
      best_w = w;
    }
  }
  const double dw = (w_hi - w_lo) / n_scan;
  const double pm = power(best_w - dw), pp = power(best_w + dw);
  const double denom = pm - 2.0 * best_p + pp;
  if (denom < 0.0) best_w += 0.5 * dw * (pm - pp) / denom;
  out.beat_frequency = best_w;
  out.fit_window = {t_start, t_start + span};
  {
    std::ostringstream os;
    os << "component rates " << gamma1 << " and " << gamma2;
    out.notes.push_back(os.str());
  }
  return out;
}

NonescapeSeries nonescape_probability(const Potential1D& pot,
                                      const InitialState& state,
                                      const std::vector<double>& times,
                                      const QuadratureSpec& spec) {
  require_consistent(pot, state, "nonescape_probability");
  const double m = pot.mass;
  const double a = state.a;
  // Wider than the state grid: the conservation balance between W and the
  // edge flux is sensitive to high modes that the 8 sigma grid can drop.
  const double k_hi = state.k0 + 16.0 * state.sigma_k;
  const auto poles = poles_below(pot, k_hi);
  const auto bps = resonance_breakpoints(poles, k_hi);

  // psi_t(x) = sqrt(2/pi) int w(k) psi0t(k) sin(kx) e^{-i k^2 t / 2m} dk with
  // the eigenmode weight w = |t|^2 / |1 + r|^2; the derivative picks up
  // k cos(kx).
  auto field = [&](double x, double t, bool derivative) -> complex {
    auto f = [&](double k) -> complex {
      const FullAmplitudes amp = amplitudes_at(pot, complex(k, 0.0));
      const double w = std::norm(amp.t) / std::norm(1.0 + amp.r);
      const double trig = derivative ? k * std::cos(k * x) : std::sin(k * x);
      return w * initial_spectral_amplitude(state, k) * trig *
             std::exp(-kI * k * k * t / (2.0 * m));
    };
    return std::sqrt(2.0 / kPi) * integrate(f, 0.0, k_hi, spec, bps);
  };

  NonescapeSeries out;
  out.times = Eigen::Map<const Eigen::VectorXd>(times.data(),
                                                static_cast<long>(times.size()));
  out.w.resize(out.times.size());
  out.edge_flux.resize(out.times.size());
  using rule = boost::math::quadrature::gauss<double, 128>;
  for (long i = 0; i < out.times.size(); ++i) {
    const double t = out.times[i];
    out.w[i] = rule::integrate(
        [&](double x) { return std::norm(field(x, t, false)); }, 0.0, a);
    const complex psi = field(a, t, false);
    const complex dpsi = field(a, t, true);
    out.edge_flux[i] = std::imag(std::conj(psi) * dpsi) / m;
  }
  return out;
}

}  // namespace dk
