#include "qcarnot/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qcarnot {

void UnitSystem::validate() const {
  if (hbar != 1.0 || k_boltzmann != 1.0) {
    throw ConfigError("hbar and k_B are fixed to 1 (atomic units)");
  }
  if (!(mass > 0.0)) throw ConfigError("mass must be positive");
}

bool ObservableVector::is_physical(double omega, double tol) const {
  if (id != 1.0) return false;
  const double coh = std::hypot(l, c);
  if (h < coh * (1.0 - tol)) return false;
  const double floor = 0.25 * kHbar * kHbar * omega * omega;
  return casimir() >= floor * (1.0 - tol);
}

void BathSpec::validate() const {
  if (!(temperature > 0.0)) throw DomainError("bath temperature must be > 0");
  if (!(coupling > 0.0)) throw DomainError("bath coupling must be > 0");
}

double thermal_population(double omega, double temperature) {
  if (!(omega > 0.0) || !(temperature > 0.0)) {
    throw DomainError("thermal_population requires omega > 0 and T > 0");
  }
  return 1.0 / std::expm1(kHbar * omega / (kBoltzmann * temperature));
}

ObservableVector thermal_observable_vector(double omega, double temperature) {
  const double n = thermal_population(omega, temperature);
  return {kHbar * omega * (n + 0.5), 0.0, 0.0, 1.0};
}

// ---------------------------------------------------------------------------
// GeneralizedGibbsState

double GeneralizedGibbsState::occupation() const {
  if (!(beta < 0.0)) throw DomainError("generalized Gibbs state needs beta < 0");
  return 1.0 / std::expm1(-beta);
}

// In the b(mu) Gibbs state <b b> = 0 and <b^dagger b> = n, which gives
// h = omega (2n+1)/kappa, l = 0, c = -mu h / 2.
ObservableVector GeneralizedGibbsState::to_observables() const {
  if (!(omega > 0.0)) throw DomainError("omega must be positive");
  if (!(std::abs(mu) < 2.0)) throw DomainError("|mu| must be < 2");
  const double kappa = std::sqrt(4.0 - mu * mu);
  const double h = kHbar * omega * (2.0 * occupation() + 1.0) / kappa;
  return {h, 0.0, -0.5 * mu * h, 1.0};
}

GeneralizedGibbsState GeneralizedGibbsState::from_observables(
    const ObservableVector& v, double omega, double tol) {
  if (!(omega > 0.0)) throw DomainError("omega must be positive");
  if (!(v.h > 0.0) || std::abs(v.l) > tol * v.h) {
    throw DomainError("state is not of the b^dagger b Gibbs form (l != 0)");
  }
  const double mu = -2.0 * v.c / v.h;
  if (!(std::abs(mu) < 2.0)) throw DomainError("state implies |mu| >= 2");
  const double kappa = std::sqrt(4.0 - mu * mu);
  const double two_n_plus_one = v.h * kappa / (kHbar * omega);
  const double n = 0.5 * (two_n_plus_one - 1.0);
  if (!(n > 0.0)) throw DomainError("state at or below the ground state");
  return {-std::log1p(1.0 / n), mu, omega};
}

GeneralizedGibbsState GeneralizedGibbsState::thermal(double omega,
                                                     double temperature) {
  if (!(omega > 0.0) || !(temperature > 0.0)) {
    throw DomainError("thermal state requires omega > 0 and T > 0");
  }
  return {-kHbar * omega / (kBoltzmann * temperature), 0.0, omega};
}

// ---------------------------------------------------------------------------
// CycleSpec

std::string_view to_string(CycleKind kind) {
  switch (kind) {
    case CycleKind::CarnotShortcut: return "carnot-shortcut";
    case CycleKind::EndoShortcut: return "endo-shortcut";
    case CycleKind::EndoGlobal: return "endo-global";
  }
  return "unknown";
}

CycleKind cycle_kind_from_string(std::string_view s) {
  if (s == "carnot-shortcut" || s == "CarnotShortcut") {
    return CycleKind::CarnotShortcut;
  }
  if (s == "endo-shortcut" || s == "EndoShortcut") return CycleKind::EndoShortcut;
  if (s == "endo-global" || s == "EndoGlobal") return CycleKind::EndoGlobal;
  throw ConfigError("unknown cycle kind '" + std::string(s) + "'");
}

namespace {

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

void CycleSpec::validate(bool strict_carnot) const {
  const double w[] = {omega1, omega2, omega3, omega4};
  for (double x : w) {
    if (!(x > 0.0)) throw ConfigError("corner frequencies must be positive");
  }
  if (!(omega1 > omega2 && omega2 > omega3 && omega1 > omega4 &&
        omega4 > omega3)) {
    throw ConfigError(
        "corner frequencies must satisfy omega1 > omega2 > omega3 and "
        "omega1 > omega4 > omega3");
  }
  if (!(t_hot_bath > 0.0) || !(t_cold_bath > 0.0)) {
    throw ConfigError("bath temperatures must be positive");
  }
  if (!(coupling > 0.0)) throw ConfigError("coupling must be positive");
  if (!(gamma_d >= 0.0)) throw ConfigError("gamma_d must be non-negative");

  switch (kind) {
    case CycleKind::CarnotShortcut:
    case CycleKind::EndoShortcut: {
      if (!(open_stroke_duration > 0.0)) {
        throw ConfigError("open_stroke_duration must be positive");
      }
      if (!(adiabat_duration > 0.0)) {
        throw ConfigError("adiabat_duration must be positive");
      }
      const double tc = kind == CycleKind::CarnotShortcut ? t_cold_bath
                                                           : t_cold_internal;
      const double th = kind == CycleKind::CarnotShortcut ? t_hot_bath
                                                           : t_hot_internal;
      if (!(tc > 0.0) || !(th > tc)) {
        throw ConfigError("corner temperatures must satisfy 0 < T_c < T_h");
      }
      if (!(omega1 / omega3 > th / tc)) {
        std::ostringstream os;
        os << "compression-ratio bound violated: omega1/omega3 = "
           << omega1 / omega3 << " must exceed T_h/T_c = " << th / tc;
        throw ConfigError(os.str());
      }
      if (strict_carnot) {
        const double ratio = tc / th;
        if (!close_rel(omega3 / omega2, ratio, 1e-12) ||
            !close_rel(omega4 / omega1, ratio, 1e-12)) {
          std::ostringstream os;
          os << "Carnot corner condition violated, need omega3/omega2 = "
                "omega4/omega1 = T_c/T_h: omega3/omega2 = "
             << omega3 / omega2 << ", omega4/omega1 = " << omega4 / omega1
             << ", T_c/T_h = " << ratio;
          throw ConfigError(os.str());
        }
      }
      break;
    }
    case CycleKind::EndoGlobal:
      if (!(mu_magnitude > 0.0 && mu_magnitude < 2.0)) {
        throw ConfigError("mu_magnitude must lie in (0, 2)");
      }
      break;
  }
}

double CycleSpec::cycle_time() const {
  if (kind == CycleKind::EndoGlobal) {
    // Frequencies are monotone within each stroke, so the four
    // |1/omega_i - 1/omega_f| terms sum to 2 (1/omega3 - 1/omega1).
    return 2.0 * (1.0 / omega3 - 1.0 / omega1) / mu_magnitude;
  }
  return 2.0 * open_stroke_duration + 2.0 * adiabat_duration;
}

CycleSpec CycleSpec::with_cycle_time(double atomic_time) const {
  if (!(atomic_time > 0.0)) throw ConfigError("cycle time must be positive");
  CycleSpec out = *this;
  if (kind == CycleKind::EndoGlobal) {
    out.mu_magnitude = 2.0 * (1.0 / omega3 - 1.0 / omega1) / atomic_time;
  } else {
    const double open = 0.5 * (atomic_time - 2.0 * adiabat_duration);
    if (!(open > 0.0)) {
      std::ostringstream os;
      os << "cycle time " << atomic_time
         << " leaves no time for the open strokes (adiabats take "
         << 2.0 * adiabat_duration << ")";
      throw ConfigError(os.str());
    }
    out.open_stroke_duration = open;
  }
  return out;
}

}  // namespace qcarnot
