#pragma once

// Escape of a particle prepared inside a half-line well [0, a] through a
// barrier: exact scattering amplitudes, far-field wave evolution, burst-series
// and resonance-pole decay rates, quantum beats, and the non-escape
// probability. The wall at the origin is a Dirichlet boundary.

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "decaykit/numerics.hpp"

namespace dk {

enum class PotentialKind { DeltaBarrier, PiecewiseConstant };

struct PotentialSegment {
  double x0 = 0.0;     // left edge, > 0
  double x1 = 0.0;     // right edge, > x0
  double height = 0.0;  // potential value on [x0, x1]; wells are allowed
};

struct Potential1D {
  PotentialKind kind = PotentialKind::DeltaBarrier;
  double mass = 1.0;
  double a = 1.0;    // barrier position; the well is [0, a]
  double eta = 0.0;  // delta strength, eta >= 0

  // PiecewiseConstant only: contiguous segments, front().x0 plays the role
  // of a.
  std::vector<PotentialSegment> segments;

  double support_left() const;   // inner wall of the barrier
  double support_right() const;  // outer edge of the barrier
  double opacity() const;        // g = mass * eta * a (DeltaBarrier only)
};

Potential1D delta_barrier(double mass, double eta, double a);
Potential1D piecewise_barrier(double mass,
                              std::vector<PotentialSegment> segments);

// Full-line amplitudes of the barrier alone at momentum k > 0. r carries the
// position phase exp(2ika) of left incidence, r_tilde the right-incidence
// phase, so that |t|^2 + |r|^2 = 1, |t|^2 + |r_tilde|^2 = 1 and
// conj(r) t + conj(t) r_tilde = 0 hold exactly for real potentials.
struct ScatteringData {
  double k = 0.0;
  complex t{};
  complex r{};
  complex r_tilde{};
  double s_phase = 0.0;  // half-line scattering phase S_k, in (-pi, pi]
};

ScatteringData scattering_amplitudes(const Potential1D& pot, double k);

// Analytic continuation of t and r to complex momentum, used by the
// resonance-pole search. Segment momenta take the principal square root.
std::pair<complex, complex> scattering_continued(const Potential1D& pot,
                                                 complex k);

// Energy eigenmode g_k(x) of the half-line problem: proportional to sin(kx)
// inside the well, a superposition of exp(+-ikx) with unimodular relative
// weight beyond the barrier, coefficient-matched inside it.
complex halfline_mode(const Potential1D& pot, double k, double x);

enum class InitialStateKind { WellHarmonic, Parabolic };

// State prepared in the well at t = 0, vanishing outside [0, a]. k0 is the
// nominal carrier momentum and may be overridden (e.g. snapped onto a
// resonance) before handing the state to the flux routines; sigma_k is the
// spectral half-width used to build the 2048-point k grid.
struct InitialState {
  InitialStateKind kind = InitialStateKind::WellHarmonic;
  int n = 1;  // harmonic index (WellHarmonic only)
  double a = 1.0;
  double mass = 1.0;
  double k0 = 0.0;
  double sigma_k = 0.0;
  Eigen::VectorXd k_grid;
  Eigen::VectorXd psi_grid;  // spectral amplitude on k_grid (real states)
};

InitialState well_state(int n, double a, double mass);
InitialState parabolic_state(double a, double mass);

double initial_position_amplitude(const InitialState& state, double x);
// Sine transform sqrt(2/pi) int_0^a sin(kx) psi_0(x) dx in closed form,
// stable through the removable point k = n*pi/a of the harmonic state.
double initial_spectral_amplitude(const InitialState& state, double k);

// Far-field wavefunction at fixed x >= 10 * support_right() via the
// outgoing-wave integral over k. Resonance shoulders of t/(1+r) enter the
// quadrature as breakpoints.
std::vector<complex> evolve_wavefunction(const Potential1D& pot,
                                         const InitialState& state, double x,
                                         const std::vector<double>& times,
                                         const QuadratureSpec& spec);

struct FluxSeries {
  double x = 0.0;
  Eigen::VectorXd times;
  Eigen::VectorXd flux;
  Eigen::VectorXd markov_flux;  // delta-correlated envelope approximation
  double t0 = 0.0;              // causal front, includes the crossing delay
  double gamma_fit = 0.0;       // slope of ln of burst-aligned bin sums
  double gamma_formula = 0.0;   // |t(k0)|^2 / Delta t
  double alpha = 1.0;           // weight of the envelope delta approximation
  double beat_frequency = 0.0;  // filled by beats_flux
  std::pair<double, double> fit_window{0.0, 0.0};
  double fit_rmse = 0.0;
  std::vector<std::string> notes;
};

// Probability flux at far-field x from the burst expansion of the outgoing
// integral: successive barrier attempts separated by Delta x = phi'(k0),
// phi = arg(-r), truncated once |r|^n < 1e-6. Phase derivatives use central
// differences with step 1e-4 * k0.
FluxSeries saddle_flux(const Potential1D& pot, const InitialState& state,
                       double x, const std::vector<double>& times);

struct TunnelingPole {
  complex k_pole{};    // lower-half-plane zero of 1 + r
  double gamma = 0.0;  // 2 Re(k) |Im(k)| / mass
};

// Resonance pole of t/(1+r) nearest to k0, seeded at n*pi/a for the three
// integers bracketing k0 a / pi. Throws std::runtime_error listing the
// scanned seeds when no pole lands within half a level spacing.
TunnelingPole pole_decay_rate(const Potential1D& pot, double k0);

// Flux of a superposition of two resonance components n1 < n2 with complex
// weights c1, c2: exponential envelopes at the pole rates modulated at the
// energy difference. beat_frequency is extracted from the series by a
// windowed spectral fit, not copied from the pole positions. Requires the
// poles to be separated by more than five combined widths.
FluxSeries beats_flux(const Potential1D& pot, int n1, int n2, complex c1,
                      complex c2, double x, const std::vector<double>& times);

struct NonescapeSeries {
  Eigen::VectorXd times;
  Eigen::VectorXd w;          // int_0^a |psi_t|^2 dx
  Eigen::VectorXd edge_flux;  // Im(conj(psi) psi') / mass at x = a
};

// Weighted eigenmode reconstruction of the in-well wavefunction: weight
// |t|^2 / |1 + r|^2 on the free sine modes. The x integral uses a fixed
// 128-node Gauss-Legendre rule.
NonescapeSeries nonescape_probability(const Potential1D& pot,
                                      const InitialState& state,
                                      const std::vector<double>& times,
                                      const QuadratureSpec& spec);

}  // namespace dk
