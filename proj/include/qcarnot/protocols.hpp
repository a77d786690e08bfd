#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcarnot/core.hpp"
#include "qcarnot/protocol.hpp"

namespace qcarnot {

/// Degree-5 polynomial on [0, t_f] fixed by value, slope and curvature at
/// both ends.
class QuinticHermite {
 public:
  QuinticHermite() = default;
  QuinticHermite(double t_f, double v0, double v1, double d0 = 0.0,
                 double d1 = 0.0, double a0 = 0.0, double a1 = 0.0);

  double t_f() const { return t_f_; }
  double value(double t) const { return eval(t, 0); }
  double d1(double t) const { return eval(t, 1); }
  double d2(double t) const { return eval(t, 2); }
  double d3(double t) const { return eval(t, 3); }
  /// Monomial coefficients in s = t / t_f, lowest order first.
  const std::array<double, 6>& coefficients() const { return coef_; }

 private:
  double eval(double t, int order) const;
  double t_f_ = 1.0;
  std::array<double, 6> coef_{};
};

/// Scaling function rho(t) of the Lewis-Riesenfeld invariant.
struct ErmakovSolution {
  QuinticHermite poly;
  double t_f = 0.0;
  double omega_initial = 0.0;
  double omega_final = 0.0;

  double rho(double t) const { return poly.value(t); }
  double rho_dot(double t) const { return poly.d1(t); }
  double rho_ddot(double t) const { return poly.d2(t); }
  double rho_dddot(double t) const { return poly.d3(t); }
  /// omega^2 = 1/rho^4 - rho_ddot/rho.
  double omega_squared(double t) const;
};

struct StaProtocol {
  FrequencyProtocol protocol;
  ErmakovSolution ermakov;
};

inline constexpr std::size_t kDefaultProtocolPoints = 4001;

/// Frictionless unitary protocol from omega_initial to omega_final.
/// Throws InvalidProtocol (with the first offending time) when the trap
/// turns repulsive.
StaProtocol build_sta_protocol(double omega_initial, double omega_final,
                               double t_f,
                               std::size_t points = kDefaultProtocolPoints);

/// Closed-form moments along an STA stroke that starts thermal at
/// (omega_start, temperature).
ObservableVector sta_expectation_values(const ErmakovSolution& ermakov,
                                        double omega_start,
                                        double temperature, double t);

/// Inverse-temperature schedule and the protocol realising it.
struct SteSolution {
  QuinticHermite y_poly;  // y = e^beta
  FrequencyProtocol protocol;
  std::vector<double> alpha;  // modified frequency at the protocol nodes
  BathSpec bath;
  double internal_temperature_initial = 0.0;
  double internal_temperature_final = 0.0;
  /// First time at which omega_dot changes sign (t_f when monotone).
  double switch_time = 0.0;
  /// Largest relative omega mismatch where tracked stretches meet or reach
  /// a free end.
  double branch_gap = 0.0;
  /// Largest relative excess of alpha over omega on the grid (stall
  /// diagnostics; zero in a clean inversion).
  double max_stall = 0.0;

  double y(double t) const { return y_poly.value(t); }
  double beta(double t) const;
  double beta_dot(double t) const;
};

/// Shortcut to equilibrium between Gibbs states at the bath temperature.
SteSolution build_ste_protocol(double omega_initial, double omega_final,
                               double t_f, const BathSpec& bath,
                               std::size_t points = kDefaultProtocolPoints);

/// Same construction between Gibbs states at `internal_temperature` that are
/// not in equilibrium with the bath; the endpoint slopes of y follow the
/// static relaxation rates and their curvatures continue that relaxation.
SteSolution build_ste_nonthermal_protocol(
    double omega_initial, double omega_final, double t_f,
    double internal_temperature, const BathSpec& bath,
    std::size_t points = kDefaultProtocolPoints);

/// omega(t) = omega_i / (1 - mu omega_i t), stopped when omega_f is reached.
FrequencyProtocol build_constant_mu_protocol(double omega_initial,
                                             double omega_final, double mu);

/// Duration (omega_f - omega_i) / (mu omega_f omega_i) of a constant-mu stroke.
double constant_mu_duration(double omega_initial, double omega_final,
                            double mu);

// ---------------------------------------------------------------------------
// Serialization: one header line "# {json}" followed by the CSV table
// t,omega,omega_dot,mu. Numbers use 17 significant digits, so reading a file
// back and writing it again reproduces it byte for byte.

void write_protocol(std::ostream& os, const FrequencyProtocol& protocol,
                    const nlohmann::json& header = nlohmann::json::object());

struct ProtocolRecord {
  FrequencyProtocol protocol;
  nlohmann::json header;
};

ProtocolRecord read_protocol(std::istream& is);

}  // namespace qcarnot
