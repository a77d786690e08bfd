#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qcarnot/core.hpp"
#include "qcarnot/dynamics.hpp"
#include "qcarnot/ode.hpp"
#include "qcarnot/protocol.hpp"

namespace qcarnot {

using ComplexMatrix = Eigen::MatrixXcd;
using SparseComplex = Eigen::SparseMatrix<std::complex<double>>;

inline constexpr std::size_t kDefaultFockLevels = 60;

/// Density matrix in the number basis of an oscillator at `omega_ref`.
struct FockState {
  ComplexMatrix rho;
  double omega_ref = 1.0;

  std::size_t dimension() const { return static_cast<std::size_t>(rho.rows()); }
  /// Population in the top 10% of the levels.
  double leakage() const;
  double trace_error() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;

  /// Thermal state at (omega, T) written in the basis of omega.
  static FockState thermal(double omega, double temperature,
                           std::size_t dimension = kDefaultFockLevels);
  /// exp(beta b^dagger b)/Z with b = b(mu, omega), built by diagonalising
  /// b^dagger b on an enlarged space and truncating.
  static FockState generalized_gibbs(const GeneralizedGibbsState& g,
                                     std::size_t dimension = kDefaultFockLevels);
  /// Same state on a larger space (zero padding).
  FockState embedded(std::size_t dimension) const;
};

/// Canonical operators in the number basis of `omega_ref`. Products such as
/// Q^2 are formed on one extra level and then truncated, so that they are
/// exact on the retained space.
struct FockOperators {
  SparseComplex q, p, q2, p2, qp_sym;  // qp_sym = (QP + PQ)/2
  double omega_ref = 1.0;
  static FockOperators build(double omega_ref, std::size_t dimension);
};

/// b = sqrt(omega/kappa) (kappa + i mu)/2 (Q + (mu + i kappa)/(2 omega) P)
/// at frequency omega, written in the basis of omega. Throws DomainError for
/// dimension < 4 or |mu| >= 2.
ComplexMatrix build_jump_operator(double omega0, double mu,
                                  std::size_t dimension);

struct LindbladOptions {
  std::size_t output_points = 201;
  OdeTolerances tol{1e-10, 1e-8};
  double leakage_limit = 1e-6;
  /// Retry on a doubled space when the leakage limit is breached.
  bool auto_double = true;
  std::size_t max_dimension = 480;
};

struct FockTrajectory {
  std::vector<double> times;
  std::vector<ObservableVector> vectors;
  std::size_t dimension = 0;
  double max_leakage = 0.0;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double final_min_eigenvalue = 0.0;
};

/// Integrates d rho/dt = -i[H, rho] + NAME dissipator (jump operator at the
/// instantaneous mu and omega) - gamma_d [H, [H, rho]] and records
/// <H>, <L>, <C> on a uniform grid. Throws TruncationError when the top
/// levels fill beyond the leakage limit.
FockTrajectory integrate_lindblad(const FockState& rho0,
                                  const FrequencyProtocol& protocol,
                                  const std::optional<BathSpec>& bath,
                                  std::optional<double> gamma_d = std::nullopt,
                                  const LindbladOptions& options = {});

/// <H>, <L>, <C> of a density matrix at frequency omega.
ObservableVector fock_moments(const ComplexMatrix& rho, const FockOperators& ops,
                              double omega);

}  // namespace qcarnot
