#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qcarnot/core.hpp"
#include "qcarnot/ode.hpp"
#include "qcarnot/protocol.hpp"

namespace qcarnot {

/// Generator / propagator acting on (h, l, c, id).
using Matrix4 = Eigen::Matrix4d;

struct NameRates {
  double k_down = 0.0;
  double k_up = 0.0;
  double alpha = 0.0;  // modified frequency
  double kappa = 2.0;  // sqrt(4 - mu^2)

  double gamma() const { return k_down - k_up; }
};

/// Rates of the non-adiabatic master equation at one instant.
/// alpha = omega sqrt(1 - (omega_dot / 2 omega^2)^2),
/// k_down = alpha * coupling / kappa * (1 + N(alpha)), k_up = k_down e^{-alpha/T}.
NameRates name_rates(double omega, double omega_dot, const BathSpec& bath);

/// Closed system generator: d v/dt = omega (mu 1 + M0) v on (h, l, c).
Matrix4 unitary_generator(double omega, double mu);

/// Full open-system generator at one instant (unitary part plus the
/// dissipator written in the Heisenberg picture with jump operator
/// b(mu, omega)). The id column carries the affine drive.
Matrix4 open_generator(double omega, double omega_dot, const BathSpec& bath);

/// Dissipative part only.
Matrix4 dissipative_generator(double omega, double omega_dot,
                              const BathSpec& bath);

/// omega (mu I + M) with the -4 gamma_d omega damping of l and c.
Matrix4 dephasing_generator(double omega, double mu, double gamma_d);

/// Exact constant-mu free propagator from 0 to t, with
/// theta(t) = -(1/mu) ln(1 - mu omega_i t).
Matrix4 free_propagator(double omega_initial, double mu, double t);

enum class Provenance { Unitary, Open, Dephasing, SteBeta };
std::string_view to_string(Provenance p);

/// Sampled stroke. `work` is the cumulative int (omega_dot/omega)(h - l) dt,
/// accumulated by the integrator alongside the moments.
struct Trajectory {
  std::vector<double> times;
  std::vector<ObservableVector> vectors;
  std::vector<double> omegas;
  std::vector<double> omega_dots;
  std::vector<double> work;
  Provenance provenance = Provenance::Unitary;

  std::size_t size() const { return times.size(); }
  const ObservableVector& front() const { return vectors.front(); }
  const ObservableVector& back() const { return vectors.back(); }
  double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
  /// Returns a copy with times shifted by `offset`.
  Trajectory shifted(double offset) const;
};

struct PropagationOptions {
  std::size_t output_points = 1001;
  OdeTolerances tol{};
};

Trajectory propagate_unitary(const ObservableVector& v0,
                             const FrequencyProtocol& protocol,
                             const PropagationOptions& opt = {});

Trajectory propagate_open(const ObservableVector& v0,
                          const FrequencyProtocol& protocol,
                          const BathSpec& bath,
                          const PropagationOptions& opt = {});

Trajectory propagate_dephasing(const ObservableVector& v0,
                               const FrequencyProtocol& protocol,
                               double gamma_d,
                               const std::optional<BathSpec>& bath = std::nullopt,
                               const PropagationOptions& opt = {});

struct BetaTrace {
  std::vector<double> times;
  std::vector<double> betas;
};

/// Integrates beta_dot = k_down (e^beta - 1) + k_up (e^-beta - 1) with the
/// rates evaluated along `protocol`.
BetaTrace propagate_ste_beta(double beta0, const FrequencyProtocol& protocol,
                             const BathSpec& bath,
                             const PropagationOptions& opt = {});

/// Affine end-to-end map of one stroke: v(T) = propagator * v(0) and
/// W = work * v(0), with v written as (h, l, c, 1).
struct StrokeMap {
  Matrix4 propagator = Matrix4::Identity();
  Eigen::RowVector4d work = Eigen::RowVector4d::Zero();

  ObservableVector apply(const ObservableVector& v) const;
  double work_on(const ObservableVector& v) const;
};

StrokeMap stroke_map_unitary(const FrequencyProtocol& protocol,
                             const OdeTolerances& tol = {});
StrokeMap stroke_map_open(const FrequencyProtocol& protocol,
                          const BathSpec& bath, const OdeTolerances& tol = {});
StrokeMap stroke_map_dephasing(const FrequencyProtocol& protocol,
                               double gamma_d,
                               const std::optional<BathSpec>& bath = std::nullopt,
                               const OdeTolerances& tol = {});

/// CSV with columns t,omega,h,l,c,coherence at 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace qcarnot
