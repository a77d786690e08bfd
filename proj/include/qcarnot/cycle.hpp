#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcarnot/core.hpp"
#include "qcarnot/dynamics.hpp"
#include "qcarnot/protocol.hpp"
#include "qcarnot/protocols.hpp"

namespace qcarnot {

struct CornerGeometry {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double omega3 = 0.0;
  double omega4 = 0.0;

  double compression_ratio() const { return omega1 / omega3; }
  std::array<double, 4> as_array() const { return {omega1, omega2, omega3, omega4}; }
};

/// omega1 = C omega3, omega2 = omega3 T_h/T_c, omega4 = omega1 T_c/T_h.
/// Throws ConfigError unless C > T_h/T_c.
CornerGeometry carnot_corner_frequencies(double omega3,
                                         double compression_ratio,
                                         double t_cold, double t_hot);

/// Rescales a Carnot geometry to the internal temperatures (T_c^g, T_h^g).
CornerGeometry endo_global_corner_frequencies(const CornerGeometry& base,
                                              double t_cold_g, double t_hot_g,
                                              double t_cold, double t_hot);

CornerGeometry geometry_of(const CycleSpec& spec);

enum class StrokeKind { Ste, SteNonThermal, Sta, ConstantMuOpen, ConstantMuUnitary };
std::string_view to_string(StrokeKind kind);

/// One stroke ready to propagate.
struct StrokeDescriptor {
  std::string name;  // open_expansion, adiabatic_expansion, ...
  StrokeKind kind = StrokeKind::Sta;
  double omega_initial = 0.0;
  double omega_final = 0.0;
  FrequencyProtocol protocol;
  std::optional<BathSpec> bath;  // open strokes
  double gamma_d = 0.0;           // dephasing on unitary strokes
  std::optional<SteSolution> ste;
  std::optional<ErmakovSolution> sta;

  double duration() const { return protocol.duration(); }
  bool is_open() const { return bath.has_value(); }
};

/// Builds the four strokes in cycle order: hot open stroke, adiabatic
/// expansion, cold open stroke, adiabatic compression. Builder failures are
/// rethrown with the stroke name prepended.
std::array<StrokeDescriptor, 4> assemble_cycle(const CycleSpec& spec);

struct LimitCycleOptions {
  double tol = 1e-9;
  std::size_t max_cycles = 500;
  PropagationOptions propagation{};
};

struct CycleResult {
  CycleSpec spec;
  std::array<StrokeDescriptor, 4> strokes;
  std::array<Trajectory, 4> trajectories;
  /// State at the start of each stroke on the limit cycle.
  std::array<ObservableVector, 4> corners;
  std::size_t iterations = 0;
  bool converged = false;
  /// Corner-1 change per iteration.
  std::vector<double> residuals;
  /// Relative mismatch after propagating the limit cycle once more with
  /// the sampled propagators.
  double periodicity_error = 0.0;

  double cycle_time() const;
};

/// Initial state used when none is given: thermal at omega1 and the hot
/// (internal) temperature.
ObservableVector default_initial_state(const CycleSpec& spec);

/// Relative change used for convergence: component-wise, l and c scaled by
/// h so that vanishing coherences do not stall the test.
double corner_change(const ObservableVector& a, const ObservableVector& b);

/// Iterates the cycle map from v0 until the corner-1 vector changes by less
/// than `tol`; throws NonConvergence after max_cycles.
CycleResult run_to_limit_cycle(const CycleSpec& spec, const ObservableVector& v0,
                               const LimitCycleOptions& options = {});
CycleResult run_to_limit_cycle(const CycleSpec& spec,
                               const LimitCycleOptions& options = {});

nlohmann::json cycle_spec_json(const CycleSpec& spec);
nlohmann::json cycle_summary_json(const CycleResult& result);

/// Writes stroke_<k>_<name>.csv for the four strokes plus summary.json.
void export_cycle_result(const CycleResult& result,
                         const std::filesystem::path& dir);

}  // namespace qcarnot
