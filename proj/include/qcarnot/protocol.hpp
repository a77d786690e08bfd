#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qcarnot {

/// Control omega(t) on [0, duration] together with its derivative.
///
/// Two representations: the closed-form constant-mu family
/// omega(t) = omega_i / (1 - mu omega_i t), and a uniform grid of
/// (omega, omega_dot) samples interpolated by cubic Hermite polynomials.
/// On the grid, omega_dot(t) is the derivative of the interpolant, so the
/// two stay consistent between nodes.
class FrequencyProtocol {
 public:
  enum class Kind { ConstantMu, Grid };

  /// Zero-duration protocol holding omega = 1.
  FrequencyProtocol() = default;

  static FrequencyProtocol constant_mu(double omega_initial, double mu,
                                       double duration);
  static FrequencyProtocol grid(std::vector<double> omega,
                                std::vector<double> omega_dot,
                                double duration);
  /// omega(t) = omega for t in [0, duration].
  static FrequencyProtocol constant(double omega, double duration,
                                    std::size_t points = 2001);

  Kind kind() const { return kind_; }
  double duration() const { return duration_; }
  double omega(double t) const;
  double omega_dot(double t) const;
  double mu(double t) const;
  /// Accumulated phase theta(t) = int_0^t omega dt'.
  double phase(double t) const;

  double omega_initial() const { return omega(0.0); }
  double omega_final() const { return omega(duration_); }

  /// Constant-mu family only.
  double constant_mu_value() const;

  /// Grid representation only (empty for closed form).
  std::span<const double> omega_samples() const { return omega_; }
  std::span<const double> omega_dot_samples() const { return omega_dot_; }
  std::size_t size() const { return omega_.size(); }
  double step() const;
  double time_at(std::size_t i) const;

  /// Samples the protocol on a uniform grid of `points` nodes (closed form
  /// is evaluated exactly; grids are returned as stored when `points`
  /// matches their size).
  FrequencyProtocol sampled(std::size_t points) const;

  /// Throws InvalidProtocol when omega <= 0 or mu is not finite, and
  /// NumericalError when the stored derivative disagrees with central
  /// differences of omega beyond `rel_tol` (relative to max |omega_dot|).
  void check_consistency(double rel_tol = 1e-6) const;

  double max_abs_mu() const;
  /// int_0^duration |mu(t)| dt, on the stored grid (or 2001 samples).
  double integrated_abs_mu() const;

 private:
  std::size_t cell(double t, double& s) const;

  Kind kind_ = Kind::ConstantMu;
  double duration_ = 0.0;
  double omega_i_ = 1.0;
  double mu_ = 0.0;
  std::vector<double> omega_;
  std::vector<double> omega_dot_;
  std::vector<double> phase_;  // cumulative int omega at the nodes
};

}  // namespace qcarnot
