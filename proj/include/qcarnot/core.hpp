#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "qcarnot/errors.hpp"

namespace qcarnot {

inline constexpr std::string_view kVersion = "0.1.0";

// Atomic units: hbar = k_B = 1. The oscillator mass is fixed to 1 as well;
// it never enters a reported parameter.
inline constexpr double kHbar = 1.0;
inline constexpr double kBoltzmann = 1.0;
inline constexpr double kPi = 3.14159265358979323846;

struct UnitSystem {
  double hbar = kHbar;
  double k_boltzmann = kBoltzmann;
  double mass = 1.0;

  void validate() const;
};

// Reporting unit for cycle times: 2*pi/omega_min with omega_min = 5.
inline constexpr double kReferenceOmegaMin = 5.0;
inline constexpr double kTimeUnit = 2.0 * kPi / kReferenceOmegaMin;

inline double to_atomic_time(double cycle_time_units) {
  return cycle_time_units * kTimeUnit;
}
inline double to_reporting_time(double atomic_time) {
  return atomic_time / kTimeUnit;
}

/// Expectation values of the instantaneous Hamiltonian, Lagrangian and
/// position-momentum correlation, plus the identity (always 1).
struct ObservableVector {
  double h = 0.0;
  double l = 0.0;
  double c = 0.0;
  double id = 1.0;

  // h^2 - l^2 - c^2; equals omega^2 (n_eff + 1/2)^2 for a Gaussian state.
  double casimir() const { return h * h - l * l - c * c; }

  /// True when h >= sqrt(l^2 + c^2) and the uncertainty bound
  /// h^2 - l^2 - c^2 >= (omega/2)^2 holds to `tol` (relative).
  bool is_physical(double omega, double tol = 1e-9) const;

  std::array<double, 3> as_array() const { return {h, l, c}; }
  static ObservableVector from_array(const std::array<double, 3>& a) {
    return {a[0], a[1], a[2], 1.0};
  }
};

struct BathSpec {
  double temperature = 1.0;
  double coupling = 0.05;

  void validate() const;
};

/// Gibbs state exp(beta * b^dagger b) in the jump-operator basis b(mu, omega).
/// beta is the dimensionless exponent (negative for bounded states); for
/// mu = 0 it equals -hbar*omega/(k_B T).
struct GeneralizedGibbsState {
  double beta = -1.0;
  double mu = 0.0;
  double omega = 1.0;

  double occupation() const;  // <b^dagger b>
  ObservableVector to_observables() const;
  /// Inverse map; requires l = 0 (states with gamma != 0 have no
  /// representation here).
  static GeneralizedGibbsState from_observables(const ObservableVector& v,
                                                double omega,
                                                double tol = 1e-9);
  static GeneralizedGibbsState thermal(double omega, double temperature);
};

enum class CycleKind { CarnotShortcut, EndoShortcut, EndoGlobal };

std::string_view to_string(CycleKind kind);
CycleKind cycle_kind_from_string(std::string_view s);

/// Everything needed to build one engine. Frequencies are the four corner
/// frequencies in stroke order (open expansion starts at omega1).
struct CycleSpec {
  CycleKind kind = CycleKind::CarnotShortcut;
  double omega1 = 10.0;
  double omega2 = 8.0;
  double omega3 = 5.0;
  double omega4 = 6.25;
  double t_hot_bath = 8.0;
  double t_cold_bath = 5.0;
  double coupling = 0.05;
  // Shortcut kinds.
  double open_stroke_duration = 10.0;
  double adiabat_duration = 5.0;
  // EndoShortcut only: corner temperatures of the working medium.
  double t_hot_internal = 8.0;
  double t_cold_internal = 5.0;
  // EndoGlobal only.
  double mu_magnitude = 0.01;
  // Pure dephasing strength on the adiabats (EndoGlobal study).
  double gamma_d = 0.0;

  /// Throws ConfigError. `strict_carnot` enforces the corner equalities of
  /// the Carnot geometry for CarnotShortcut specs.
  void validate(bool strict_carnot = true) const;

  BathSpec hot_bath() const { return {t_hot_bath, coupling}; }
  BathSpec cold_bath() const { return {t_cold_bath, coupling}; }

  /// Cycle time in atomic units.
  double cycle_time() const;
  /// Returns a copy whose open-stroke duration (shortcut kinds) or |mu|
  /// (EndoGlobal) realises the requested cycle time in atomic units.
  CycleSpec with_cycle_time(double atomic_time) const;
};

/// Bose occupation 1/(exp(hbar*omega/k_B T) - 1).
double thermal_population(double omega, double temperature);

/// Observables of the thermal state at (omega, T): h = hbar*omega*(n + 1/2).
ObservableVector thermal_observable_vector(double omega, double temperature);

}  // namespace qcarnot
