#pragma once

// Persistence amplitudes A(t) and decay densities from a SelfEnergyModel:
// full spectral quadrature, the Wigner-Weisskopf exponential, resonance-pole
// search, the negative-axis remainder, closed forms, the cavity resonant
// series, and the universal (Mandelstam-Tamm / Zeno) bounds.

#include <string>
#include <utility>
#include <vector>

#include "decaykit/selfenergy.hpp"

namespace dk {

struct PersistenceSeries {
  std::vector<double> times;
  std::vector<complex> amplitude;
  std::vector<double> probability;  // |A|^2
  std::vector<double> density;      // -d|A|^2/dt by central differences
  std::vector<bool> negativity;     // density below -tol at this sample
};

// Derives probability, density and the negativity flags from amplitudes on
// a sorted grid. Shared by every amplitude producer.
PersistenceSeries build_series(std::vector<double> times,
                               std::vector<complex> amplitude);

enum class PoleClass { Perturbative, SpuriousCutoff, Resonant };

struct Pole {
  complex location;
  complex residue;  // of 1/(z - E_a - Sigma) at the root
  PoleClass classification = PoleClass::Perturbative;
};

struct PoleReport {
  std::vector<Pole> poles;
  std::vector<std::string> search_log;
};

struct BoundReport {
  bool mt_satisfied = true;       // |da/dt| <= 2 dH sqrt(a - a^2)
  double mt_worst_margin = 0.0;   // largest violation (positive = violated)
  double mt_worst_time = 0.0;
  bool cosine_satisfied = true;   // a(t) >= cos^2(dH t) for t < pi/(2 dH)
  double cosine_worst_margin = 0.0;
  double cosine_worst_time = 0.0;
  double half_life = 0.0;             // first crossing of a = 1/2; 0 if not reached
  bool half_life_reached = false;
  bool half_life_satisfied = true;    // dH * tau_h >= pi/4 when reached
  double zeno_coefficient = 0.0;      // fitted p(t)/t on the earliest samples
  std::vector<std::string> violations;
};

// A(t) = (1/2pi) int_0^inf dE Gamma(E) e^{-iEt} /
//        ([E - omega - F(E)]^2 + Gamma(E)^2/4)
// by oscillatory quadrature. The upper limit is chosen per sample from the
// integrand envelope (override with spec.e_max_override) and never exceeds
// the reservoir support of cutoff models.
PersistenceSeries amplitude_full(const SelfEnergyModel& m, double omega_tilde,
                                 const std::vector<double>& times,
                                 const QuadratureSpec& spec);

// e^{-i(E_a + deltaE) t - Gamma t / 2}.
complex wwa_amplitude(const WWAParams& p, double e_a, double t);

// Newton searches seeded at the WWA prediction, at the cutoff artifact near
// the reservoir edge, and near cavity resonances where applicable.
PoleReport pole_search(const SelfEnergyModel& m, double omega_tilde);

// Negative-axis contribution I_a(t), evaluated on the rotated contour
// z = -iy (quadrature branch) or from the small-E law Gamma(E) ~ A E^n
// (asymptotic branch at large t). Models without an integer n or without a
// branch cut are rejected.
complex remainder_term(const SelfEnergyModel& m, double omega_tilde, double t);

// Solves 2 ln x - x = ln alpha, alpha = (Gamma/Omega)^3 / 8 pi, on the
// large-x branch. Returns (x, e^{-2x}); x = Gamma tau / 2 at the
// exponential-to-power-law crossover.
std::pair<double, double> crossover_time(double gamma_over_omega);

// Massive-boson amplitude in closed form as a function of omega_t = Omega t,
// gamma = Gamma / (2 sqrt(2) Omega) in (0, 1/sqrt(2)).
complex closed_form_massive_boson(double gamma, double omega_t);

// G_+-(s, a, b) = (b/pi) int_0^inf dy e^{-isy} / ((y +- ln y - a)^2 + b^2).
// sign selects the +ln/-ln kernel.
complex cavity_G(int sign, double s, double a, double b,
                 const QuadratureSpec& spec);

// Two-term resonant series A(t) = e^{-i n_R w0 t} [G_-(G0 t/pi, -d, (n_R+1)pi)
// + conj(G_+(G0 t/pi, d, n_R pi))], G0 = lambda^2 w0, for a cavity level
// within O(lambda^2) of the n_R-th resonance. d is the composite detuning
// parameter of the resonant expansion.
PersistenceSeries cavity_resonant_amplitude(const SelfEnergyModel& m, double d,
                                            int n_r,
                                            const std::vector<double>& times);

// Checks the model-independent bounds on a computed series. Violations are
// reported, not thrown: for exact dynamics they are theorems, so a report
// flags either a synthetic input or a numerical problem.
BoundReport universal_bounds(const PersistenceSeries& series, double delta_h);

// dH^2 = (1/2pi) int_0^cutoff Gamma(E) dE, the regularized coupling sum.
// Cutoff-dependent; requires the model to carry a finite cutoff.
double energy_spread(const SelfEnergyModel& m);

}  // namespace dk
