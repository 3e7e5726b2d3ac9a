#include "decaykit/selfenergy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dk {

namespace {

constexpr double kPi = std::numbers::pi;

// Square root on the branch of principal_log, so exactly-real negative
// arguments land on the upper edge: sqrt(-a + i0) = +i sqrt(a), exactly
// imaginary (no rounding residue in the real part).
complex sqrt_branch(complex w) {
  if (w.imag() == 0.0) {
    return w.real() >= 0.0 ? complex(std::sqrt(w.real()), 0.0)
                           : complex(0.0, std::sqrt(-w.real()));
  }
  return std::sqrt(w);
}

double beta_prefactor(double mu) {
  // 1 / (240 pi^4 mu^4), the spectral normalization of the five-body phase
  // space; Gamma(E) = E^5 / (120 pi^3 mu^4) is twice its discontinuity.
  return 1.0 / (240.0 * std::pow(kPi, 4) * std::pow(mu, 4));
}

complex flat_sigma(complex z, double lambda, double cutoff) {
  // Renormalized form of the [0, cutoff] flat reservoir, valid |z| << cutoff.
  double c = lambda * lambda / (2.0 * kPi * kPi);
  return c * z * (principal_log(-z) - std::log(cutoff));
}

complex one_dimensional_sigma(complex z, double lambda, double kappa) {
  complex s = z + kappa;
  double c = lambda * lambda / kPi;
  if (std::abs(s) < 1e-6 * kappa) {
    // Removable point z = -kappa: ln(-z/kappa)/(z+kappa) = -1/kappa - s/2k^2...
    return c * (-1.0 / kappa - s / (2.0 * kappa * kappa) -
                s * s / (3.0 * kappa * kappa * kappa));
  }
  return c * principal_log(-z / kappa) / s;
}

complex lorentzian_sigma(const SelfEnergyModel& m, complex z) {
  double gl = m.lambda * m.lambda * m.omega0 / (2.0 * kPi * kPi);
  complex pole(m.omega0, -m.reservoir_width);
  if (z == pole) {
    throw std::domain_error("sigma_minus: reservoir pole at omega0 - i gamma");
  }
  return gl * pole / (z - pole);
}

complex entangled_exchange_sigma(const SelfEnergyModel& m, complex z) {
  // Exchange term of the two-emitter pair: (lambda^2 / 2 pi^2 r) I(r z)
  // with the sine resolvent kernel I. Infinite-cutoff form, accurate for
  // r * cutoff >> 1.
  double r = m.separation;
  double c = m.lambda * m.lambda / (2.0 * kPi * kPi * r);
  return c * detail::sine_resolvent_kernel(r * z);
}

}  // namespace

ModelKind kind_from_string(const std::string& name) {
  if (name == "FlatPhotoemission") return ModelKind::FlatPhotoemission;
  if (name == "SpinBoson") return ModelKind::FlatPhotoemission;
  if (name == "PolarizedPhotoemission") return ModelKind::PolarizedPhotoemission;
  if (name == "MassiveBoson") return ModelKind::MassiveBoson;
  if (name == "BetaDecay") return ModelKind::BetaDecay;
  if (name == "Cavity") return ModelKind::Cavity;
  if (name == "OneDimensional") return ModelKind::OneDimensional;
  if (name == "LorentzianReservoir") return ModelKind::LorentzianReservoir;
  if (name == "EntangledPair") return ModelKind::EntangledPair;
  throw std::invalid_argument("unknown model kind: " + name);
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::FlatPhotoemission: return "FlatPhotoemission";
    case ModelKind::PolarizedPhotoemission: return "PolarizedPhotoemission";
    case ModelKind::MassiveBoson: return "MassiveBoson";
    case ModelKind::BetaDecay: return "BetaDecay";
    case ModelKind::Cavity: return "Cavity";
    case ModelKind::OneDimensional: return "OneDimensional";
    case ModelKind::LorentzianReservoir: return "LorentzianReservoir";
    case ModelKind::EntangledPair: return "EntangledPair";
  }
  throw std::invalid_argument("unknown model kind");
}

SelfEnergyModel finalize_model(SelfEnergyModel m,
                               std::vector<std::string>* warnings) {
  auto warn = [warnings](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };
  if (!(m.omega_tilde > 0.0)) {
    throw std::invalid_argument("model: omega_tilde must be > 0");
  }
  const bool needs_lambda = m.kind != ModelKind::BetaDecay;
  if (needs_lambda && !(m.lambda > 0.0)) {
    throw std::invalid_argument("model: lambda must be > 0");
  }
  const bool uses_cutoff = m.kind == ModelKind::FlatPhotoemission ||
                           m.kind == ModelKind::PolarizedPhotoemission ||
                           m.kind == ModelKind::Cavity ||
                           m.kind == ModelKind::EntangledPair ||
                           m.kind == ModelKind::BetaDecay;
  if (uses_cutoff) {
    if (m.cutoff == 0.0) m.cutoff = 1e3 * m.omega_tilde;
    // BetaDecay is exempt from the hierarchy: its natural regime is
    // cutoff << mu with cutoff of the order of the level itself.
    if (m.kind != ModelKind::BetaDecay) {
      if (m.cutoff < 10.0 * m.omega_tilde) {
        throw std::invalid_argument("model: cutoff must be >= 10 * level");
      }
      if (m.cutoff < 1e3 * m.omega_tilde) {
        warn("cutoff below 1e3 * level; renormalized self-energy forms "
             "neglect O(level/cutoff) terms");
      }
    }
  }
  switch (m.kind) {
    case ModelKind::MassiveBoson:
    case ModelKind::BetaDecay:
      if (!(m.mu > 0.0)) {
        throw std::invalid_argument("model: mass mu must be > 0");
      }
      break;
    case ModelKind::Cavity:
      if (!(m.omega0 > 0.0)) {
        throw std::invalid_argument("model: omega0 must be > 0");
      }
      break;
    case ModelKind::OneDimensional:
      if (m.kappa == 0.0) m.kappa = 1e-3 * m.omega_tilde;
      if (!(m.kappa > 0.0)) {
        throw std::invalid_argument("model: kappa must be > 0");
      }
      break;
    case ModelKind::LorentzianReservoir:
      if (!(m.omega0 > 0.0) || !(m.reservoir_width > 0.0)) {
        throw std::invalid_argument(
            "model: reservoir needs omega0 > 0 and width > 0");
      }
      break;
    case ModelKind::EntangledPair:
      if (!(m.separation > 0.0)) {
        throw std::invalid_argument("model: separation r must be > 0");
      }
      if (m.bell_sign != 1 && m.bell_sign != -1) {
        throw std::invalid_argument("model: bell_sign must be +1 or -1");
      }
      if (m.separation * m.cutoff < 10.0) {
        warn("separation * cutoff < 10; the exchange self-energy uses the "
             "infinite-cutoff kernel");
      }
      break;
    default:
      break;
  }
  return m;
}

complex sigma_minus(const SelfEnergyModel& m, complex z) {
  switch (m.kind) {
    case ModelKind::FlatPhotoemission:
      return flat_sigma(z, m.lambda, m.cutoff);
    case ModelKind::PolarizedPhotoemission:
      return (2.0 / 3.0) * flat_sigma(z, m.lambda, m.cutoff);
    case ModelKind::MassiveBoson: {
      if (z == complex(0.0, 0.0)) {
        throw std::domain_error("sigma_minus: branch point at z = 0");
      }
      return (m.lambda * m.lambda / kPi) * sqrt_branch(-0.5 * m.mu * z);
    }
    case ModelKind::BetaDecay: {
      double L = m.cutoff;
      complex z2 = z * z;
      complex bracket = std::pow(L, 5) / 5.0 + z * std::pow(L, 4) / 4.0 +
                        z2 * std::pow(L, 3) / 3.0 + z * z2 * L * L / 2.0 +
                        z2 * z2 * L +
                        z2 * z2 * z *
                            (principal_log(L - z) - principal_log(-z));
      return -beta_prefactor(m.mu) * bracket;
    }
    case ModelKind::Cavity: {
      double c = m.lambda * m.lambda / (2.0 * kPi);
      return -c * std::log(m.cutoff / m.omega0) * z -
             c * m.omega0 * log_gamma(-z / m.omega0);
    }
    case ModelKind::OneDimensional:
      return one_dimensional_sigma(z, m.lambda, m.kappa);
    case ModelKind::LorentzianReservoir:
      return lorentzian_sigma(m, z);
    case ModelKind::EntangledPair:
      return flat_sigma(z, m.lambda, m.cutoff) +
             static_cast<double>(m.bell_sign) * entangled_exchange_sigma(m, z);
  }
  throw std::invalid_argument("sigma_minus: unknown model kind");
}

complex decay_continued(const SelfEnergyModel& m, complex z) {
  double l2 = m.lambda * m.lambda;
  switch (m.kind) {
    case ModelKind::FlatPhotoemission:
      return l2 / kPi * z;
    case ModelKind::PolarizedPhotoemission:
      return (2.0 / 3.0) * l2 / kPi * z;
    case ModelKind::MassiveBoson:
      return l2 / kPi * sqrt_branch(2.0 * m.mu * z);
    case ModelKind::BetaDecay:
      return std::pow(z, 5) * (2.0 * kPi * beta_prefactor(m.mu));
    case ModelKind::Cavity: {
      double n = std::floor(z.real() / m.omega0);
      return l2 * m.omega0 * (n + 1.0);
    }
    case ModelKind::OneDimensional:
      return 2.0 * l2 / (m.kappa + z);
    case ModelKind::LorentzianReservoir: {
      double gl = l2 * m.omega0 / (2.0 * kPi * kPi);
      complex d = z - complex(m.omega0, -m.reservoir_width);
      return 2.0 * gl * m.reservoir_width * z / (d * d);
    }
    case ModelKind::EntangledPair: {
      double r = m.separation;
      return l2 / kPi *
             (z + static_cast<double>(m.bell_sign) * std::sin(r * z) / r);
    }
  }
  throw std::invalid_argument("decay_continued: unknown model kind");
}

complex sigma_second_sheet(const SelfEnergyModel& m, complex z) {
  if (m.kind == ModelKind::LorentzianReservoir) {
    // Meromorphic self-energy: one sheet only.
    return sigma_minus(m, z);
  }
  return sigma_minus(m, z) - complex(0.0, 1.0) * decay_continued(m, z);
}

double level_shift(const SelfEnergyModel& m, double e) {
  if (!(e > 0.0)) {
    throw std::domain_error("level_shift: requires E > 0");
  }
  if (m.kind == ModelKind::Cavity) {
    double ratio = e / m.omega0;
    if (ratio == std::round(ratio)) {
      throw std::domain_error(
          "level_shift: discontinuous at a cavity resonance n * omega0");
    }
  }
  return sigma_minus(m, complex(e, 0.0)).real();
}

double decay_function(const SelfEnergyModel& m, double e) {
  if (e <= 0.0) return 0.0;
  double l2 = m.lambda * m.lambda;
  switch (m.kind) {
    case ModelKind::FlatPhotoemission:
      return e <= m.cutoff ? l2 * e / kPi : 0.0;
    case ModelKind::PolarizedPhotoemission:
      return e <= m.cutoff ? (2.0 / 3.0) * l2 * e / kPi : 0.0;
    case ModelKind::MassiveBoson:
      return l2 * std::sqrt(2.0 * m.mu * e) / kPi;
    case ModelKind::BetaDecay:
      return e <= m.cutoff
                 ? std::pow(e, 5) / (120.0 * std::pow(kPi, 3) * std::pow(m.mu, 4))
                 : 0.0;
    case ModelKind::Cavity:
      // Half-open intervals [n w0, (n+1) w0): right-continuous staircase.
      return e <= m.cutoff ? l2 * m.omega0 * (std::floor(e / m.omega0) + 1.0)
                           : 0.0;
    case ModelKind::OneDimensional:
      return 2.0 * l2 / (m.kappa + e);
    case ModelKind::LorentzianReservoir: {
      double gl = l2 * m.omega0 / (2.0 * kPi * kPi);
      double d = e - m.omega0;
      return 2.0 * gl * m.reservoir_width * e /
             (d * d + m.reservoir_width * m.reservoir_width);
    }
    case ModelKind::EntangledPair: {
      if (e > m.cutoff) return 0.0;
      double x = e * m.separation;
      return l2 * e / kPi *
             (1.0 + static_cast<double>(m.bell_sign) * std::sin(x) / x);
    }
  }
  throw std::invalid_argument("decay_function: unknown model kind");
}

WWAParams wwa_params(const SelfEnergyModel& m, double omega_tilde) {
  if (!(omega_tilde > 0.0)) {
    throw std::domain_error("wwa_params: requires omega_tilde > 0");
  }
  if (m.kind == ModelKind::Cavity) {
    double ratio = omega_tilde / m.omega0;
    double dist = std::abs(ratio - std::round(ratio));
    if (dist <= 10.0 * m.lambda * m.lambda) {
      throw std::domain_error(
          "wwa_params: level within 10 lambda^2 of a cavity resonance; "
          "use the resonant persistence expansion instead");
    }
  }
  WWAParams p;
  p.gamma = decay_function(m, omega_tilde);
  p.delta_e = level_shift(m, omega_tilde);
  double h = 1e-6 * omega_tilde;
  double fp = (level_shift(m, omega_tilde + h) -
               level_shift(m, omega_tilde - h)) /
              (2.0 * h);
  double gp = (decay_function(m, omega_tilde + h) -
               decay_function(m, omega_tilde - h)) /
              (2.0 * h);
  p.residue_correction = 1.0 / complex(1.0 - fp, 0.5 * gp);
  return p;
}

}  // namespace dk
