#pragma once

// Catalog of unstable-state models. Each exposes the analytic self-energy
// Sigma(z), its level-shift and decay-function edge values on the positive
// real axis, and the continuation onto the second Riemann sheet.

#include <string>
#include <vector>

#include "decaykit/numerics.hpp"

namespace dk {

enum class ModelKind {
  FlatPhotoemission,
  PolarizedPhotoemission,
  MassiveBoson,
  BetaDecay,
  Cavity,
  OneDimensional,
  LorentzianReservoir,
  EntangledPair,
};

// Accepts the catalog names plus "SpinBoson", which shares the flat
// photoemission self-energy (the two Hamiltonians agree after the resummation
// that defines Sigma).
ModelKind kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

struct SelfEnergyModel {
  ModelKind kind = ModelKind::FlatPhotoemission;
  double lambda = 0.1;       // dimensionless coupling (unused by BetaDecay)
  double omega_tilde = 1.0;  // renormalized level
  double cutoff = 0.0;       // UV cutoff; 0 selects the default 1e3 * level

  // kind-specific extras
  double mu = 0.0;          // boson / heavy-particle mass
  double omega0 = 0.0;      // cavity fundamental or reservoir center
  double reservoir_width = 0.0;  // Lorentzian reservoir gamma
  double kappa = 0.0;       // infrared cutoff; 0 selects 1e-3 * level
  double separation = 0.0;  // emitter distance r (EntangledPair)
  int bell_sign = +1;       // +1 superradiant, -1 subradiant combination
};

// Fills defaults, checks the invariants (couplings > 0, cutoff hierarchy),
// throws std::invalid_argument on violations. Soft issues (cutoff below
// 1e3 * level, short-separation pair) are appended to *warnings if given.
SelfEnergyModel finalize_model(SelfEnergyModel m,
                               std::vector<std::string>* warnings = nullptr);

// First-sheet Sigma(z). Exactly-real arguments resolve to the lower-edge
// limit Sigma(E - i0) = F(E) + (i/2) Gamma(E); genuinely complex arguments
// follow the principal branch.
complex sigma_minus(const SelfEnergyModel& m, complex z);

// Continuation through the cut from above: Sigma(z) - i * Gamma_c(z), where
// Gamma_c analytically extends the decay function. Resonance poles of the
// resolvent live on this sheet. LorentzianReservoir has no cut, so its
// second sheet is Sigma itself.
complex sigma_second_sheet(const SelfEnergyModel& m, complex z);

// F(E) = Re Sigma(E +- i0), E > 0.
double level_shift(const SelfEnergyModel& m, double e);

// Gamma(E) from the model's closed form; 0 for E <= 0 and beyond the
// support of the reservoir.
double decay_function(const SelfEnergyModel& m, double e);

// Analytic extension of the decay function used by contour integrals.
// For Cavity the staircase is continued from the segment containing Re z.
complex decay_continued(const SelfEnergyModel& m, complex z);

struct WWAParams {
  double gamma = 0.0;           // decay constant Gamma(omega)
  double delta_e = 0.0;         // Lamb shift F(omega)
  complex residue_correction{1.0, 0.0};  // [1 - F' + (i/2) Gamma']^{-1}
};

// On-shell constants at the renormalized level. Cavity input closer than
// 10 * lambda^2 (in units of omega0) to a resonance is rejected; the
// resonant expansion in the persistence module handles that regime.
WWAParams wwa_params(const SelfEnergyModel& m, double omega_tilde);

}  // namespace dk
