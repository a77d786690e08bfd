#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qcarnot/core.hpp"
#include "qcarnot/cycle.hpp"
#include "qcarnot/dynamics.hpp"

namespace qcarnot {

/// sqrt(l^2 + c^2) / (hbar omega).
double coherence(const ObservableVector& v, double omega);

/// Entropy of the Gaussian state with symplectic excitation
/// n_eff + 1/2 = sqrt(h^2 - l^2 - c^2) / (hbar omega).
double von_neumann_entropy(const ObservableVector& v, double omega);

/// Work done on the medium along the stroke, int (omega_dot/omega)(h - l) dt.
/// Uses the integrator's work channel when present, else composite Simpson
/// quadrature on the trajectory grid.
double stroke_work(const Trajectory& traj);
/// Composite Simpson quadrature of the work integrand on the stored grid.
double quadrature_work(const Trajectory& traj);
/// First law: Q = Delta E - W.
double stroke_heat(const Trajectory& traj, double work);

/// Work of the ideal (reversible) cycle on the given corners:
/// W_C = (w3 - w2)(n2 + 1) + (w1 - w4)(n1 + 1) + (T_h - T_c) ln(n1/n2).
/// When `warning` is given it receives a message for degenerate inputs
/// (T_h = T_c, where the cycle produces no work).
double ideal_carnot_work(const CornerGeometry& geometry, double t_cold,
                         double t_hot, std::string* warning = nullptr);

inline double carnot_efficiency(double t_cold, double t_hot) {
  return 1.0 - t_cold / t_hot;
}
inline double curzon_ahlborn_efficiency(double t_cold, double t_hot) {
  return 1.0 - std::sqrt(t_cold / t_hot);
}

struct FrictionFit {
  double w_infinity = 0.0;
  double friction_action = 0.0;
  double residual = 0.0;  // RMS of the fit
};

/// Least squares of W against 1/tau over (tau, W) samples.
FrictionFit friction_action_fit(std::span<const std::pair<double, double>> samples);

enum class OperationalMode { Engine, Dissipator, Other };
std::string_view to_string(OperationalMode m);

struct CycleLedger {
  std::array<double, 4> work_per_stroke{};
  std::array<double, 4> heat_per_stroke{};
  std::array<double, 4> energy_change{};
  double total_work = 0.0;
  double q_hot = 0.0;
  double q_cold = 0.0;
  double power = 0.0;       // -W / tau, positive for an engine
  double efficiency = 0.0;  // -W / Q_h (NaN when Q_h <= 0)
  double cycle_time = 0.0;  // atomic units
  OperationalMode operational_mode = OperationalMode::Other;
  /// Q_h/T_h + Q_c/T_c; non-positive for a cycle consistent with the
  /// second law.
  double bath_entropy_flow = 0.0;
  std::array<double, 4> corner_coherence{};
  double min_coherence = 0.0;  // over the full limit-cycle trajectory
};

/// Throws DomainError when the result did not converge.
CycleLedger analyze_cycle(const CycleResult& result, const CycleSpec& spec);

enum class SweepAxis { CycleTime, Dephasing, CompressionRatio };
std::string_view to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(std::string_view s);

/// Applies one sweep value to a template. cycle_time values are in reporting
/// units (2 pi / omega_min); compression_ratio keeps omega3 and the bath
/// temperatures and rebuilds the corners.
CycleSpec apply_sweep_value(const CycleSpec& tmpl, SweepAxis axis, double value);

struct SweepRow {
  double value = 0.0;
  std::optional<CycleLedger> ledger;
  std::size_t iterations = 0;
  std::string error;  // "Name: message" when the point failed
};

struct SweepOptions {
  LimitCycleOptions limit_cycle{};
  std::size_t jobs = 1;
};

/// One ledger per value, in input order. Failures are recorded per row.
std::vector<SweepRow> sweep(const CycleSpec& tmpl, SweepAxis axis,
                            std::span<const double> values,
                            const SweepOptions& options = {});

/// Long-format table, one row per value.
void write_sweep_csv(std::ostream& os, SweepAxis axis,
                     std::span<const SweepRow> rows);
nlohmann::json ledger_json(const CycleLedger& ledger);

/// Hex SHA-1 of "blob <size>\0<content>", as git computes object ids.
std::string git_blob_hash(std::string_view content);

}  // namespace qcarnot
