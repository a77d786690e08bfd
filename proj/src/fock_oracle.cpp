#include "qcarnot/fock_oracle.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qcarnot {

using cd = std::complex<double>;

namespace {

SparseComplex ladder(std::size_t dim) {
  SparseComplex a(static_cast<long>(dim), static_cast<long>(dim));
  std::vector<Eigen::Triplet<cd>> trip;
  for (std::size_t n = 1; n < dim; ++n) {
    trip.emplace_back(static_cast<int>(n - 1), static_cast<int>(n),
                      cd(std::sqrt(static_cast<double>(n)), 0.0));
  }
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

SparseComplex truncate(const SparseComplex& m, std::size_t dim) {
  const long d = static_cast<long>(dim);
  return m.topLeftCorner(d, d);
}

void check_dimension(std::size_t dim) {
  if (dim < 4) throw DomainError("Fock space needs at least 4 levels");
}

// b(mu, omega) in the basis of omega_ref, built on `ext` (one level larger
// than the retained space) so that b^dagger b and b b^dagger are exact
// after truncation.
struct JumpOps {
  SparseComplex b, bd, bdb, bbd;
};

JumpOps jump_ops(const SparseComplex& q_ext, const SparseComplex& p_ext,
                 double omega, double mu, std::size_t dim) {
  if (!(std::abs(mu) < 2.0)) throw DomainError("jump operator needs |mu| < 2");
  const double kappa = std::sqrt(4.0 - mu * mu);
  const cd pref = std::sqrt(omega / kappa) * cd(kappa, mu) / 2.0;
  const cd z = cd(mu, kappa) / (2.0 * omega);
  const SparseComplex b_ext = pref * (q_ext + z * p_ext);
  const SparseComplex bd_ext = b_ext.adjoint();
  JumpOps j;
  j.b = truncate(b_ext, dim);
  j.bd = truncate(bd_ext, dim);
  // Products of the truncated operators keep the dissipator an exact
  // Lindbladian on the retained space (trace preserving, no growth in the
  // top levels); products taken before truncation do not.
  j.bdb = SparseComplex(j.bd * j.b);
  j.bbd = SparseComplex(j.b * j.bd);
  return j;
}

struct ExtendedOperators {
  SparseComplex q_ext, p_ext;
  FockOperators ops;
};

ExtendedOperators extended(double omega_ref, std::size_t dim) {
  check_dimension(dim);
  const SparseComplex a = ladder(dim + 1);
  const SparseComplex ad = a.adjoint();
  ExtendedOperators e;
  e.q_ext = (a + ad) * cd(1.0 / std::sqrt(2.0 * omega_ref), 0.0);
  e.p_ext = (ad - a) * cd(0.0, std::sqrt(0.5 * omega_ref));
  FockOperators& o = e.ops;
  o.omega_ref = omega_ref;
  o.q = truncate(e.q_ext, dim);
  o.p = truncate(e.p_ext, dim);
  o.q2 = truncate(SparseComplex(e.q_ext * e.q_ext), dim);
  o.p2 = truncate(SparseComplex(e.p_ext * e.p_ext), dim);
  o.qp_sym = truncate(
      SparseComplex((e.q_ext * e.p_ext + e.p_ext * e.q_ext) * cd(0.5, 0.0)), dim);
  return e;
}

ComplexMatrix unitary_from_hermitian(const ComplexMatrix& herm, double scale) {
  // exp(-i scale herm) via the eigen-decomposition.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm);
  const auto& v = es.eigenvectors();
  Eigen::VectorXcd phase(v.cols());
  for (long k = 0; k < v.cols(); ++k) {
    phase[k] = std::exp(cd(0.0, -scale * es.eigenvalues()[k]));
  }
  return v * phase.asDiagonal() * v.adjoint();
}

}  // namespace

FockOperators FockOperators::build(double omega_ref, std::size_t dimension) {
  return extended(omega_ref, dimension).ops;
}

ComplexMatrix build_jump_operator(double omega0, double mu,
                                  std::size_t dimension) {
  check_dimension(dimension);
  if (!(omega0 > 0.0)) throw DomainError("omega0 must be > 0");
  const auto e = extended(omega0, dimension);
  return ComplexMatrix(jump_ops(e.q_ext, e.p_ext, omega0, mu, dimension).b);
}

// ---------------------------------------------------------------------------
// FockState

double FockState::leakage() const {
  const long d = rho.rows();
  const long start = static_cast<long>(std::ceil(0.9 * static_cast<double>(d)));
  double acc = 0.0;
  for (long n = std::min(start, d - 1); n < d; ++n) acc += rho(n, n).real();
  return acc;
}

double FockState::trace_error() const { return std::abs(rho.trace() - cd(1.0, 0.0)); }

double FockState::hermiticity_error() const {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double FockState::min_eigenvalue() const {
  const ComplexMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

FockState FockState::thermal(double omega, double temperature,
                             std::size_t dimension) {
  check_dimension(dimension);
  if (!(omega > 0.0) || !(temperature > 0.0)) {
    throw DomainError("thermal Fock state needs omega > 0 and T > 0");
  }
  const double x = kHbar * omega / (kBoltzmann * temperature);
  FockState s;
  s.omega_ref = omega;
  const long d = static_cast<long>(dimension);
  s.rho = ComplexMatrix::Zero(d, d);
  double z = 0.0;
  for (long n = 0; n < d; ++n) z += std::exp(-x * static_cast<double>(n));
  for (long n = 0; n < d; ++n) {
    s.rho(n, n) = std::exp(-x * static_cast<double>(n)) / z;
  }
  return s;
}

// b = u a + v a^dagger is generated from a by a rotation followed by a
// squeeze, b = (R S) a (R S)^dagger, so exp(beta b^dagger b) is the rotated
// squeezed thermal state.
FockState FockState::generalized_gibbs(const GeneralizedGibbsState& g,
                                       std::size_t dimension) {
  check_dimension(dimension);
  if (!(g.beta < 0.0)) throw DomainError("generalized Gibbs state needs beta < 0");
  if (!(std::abs(g.mu) < 2.0)) throw DomainError("|mu| must be < 2");
  const double kappa = std::sqrt(4.0 - g.mu * g.mu);
  const cd km(kappa, g.mu);
  const double norm = 4.0 * std::sqrt(2.0 * kappa);
  const cd u = km * cd(2.0 + kappa, -g.mu) / norm;
  const cd v = km * cd(2.0 - kappa, g.mu) / norm;
  const double r = std::asinh(std::abs(v));
  const double phi = std::arg(u);
  const double theta = std::arg(v) + phi;

  const std::size_t big = 2 * dimension + 20;
  const long D = static_cast<long>(big);
  const ComplexMatrix a = ComplexMatrix(ladder(big));
  const ComplexMatrix ad = a.adjoint();
  // S = exp((conj(zeta) a^2 - zeta a^dagger^2)/2) = exp(-i K) with K Hermitian.
  const cd zeta = std::polar(r, theta);
  const ComplexMatrix anti = 0.5 * (std::conj(zeta) * a * a - zeta * ad * ad);
  const ComplexMatrix K = cd(0.0, 1.0) * anti;
  const ComplexMatrix S = unitary_from_hermitian(K, 1.0);
  Eigen::VectorXcd rot(D);
  for (long n = 0; n < D; ++n) rot[n] = std::exp(cd(0.0, -phi * static_cast<double>(n)));
  const ComplexMatrix RS = rot.asDiagonal() * S;

  const double x = -g.beta;
  Eigen::VectorXcd p(D);
  double z = 0.0;
  for (long n = 0; n < D; ++n) z += std::exp(-x * static_cast<double>(n));
  for (long n = 0; n < D; ++n) p[n] = std::exp(-x * static_cast<double>(n)) / z;
  const ComplexMatrix full = RS * p.asDiagonal() * RS.adjoint();

  FockState s;
  s.omega_ref = g.omega;
  const long d = static_cast<long>(dimension);
  s.rho = full.topLeftCorner(d, d);
  s.rho /= s.rho.trace();
  return s;
}

FockState FockState::embedded(std::size_t dimension) const {
  const long d = rho.rows();
  const long D = static_cast<long>(dimension);
  if (D < d) throw DomainError("cannot embed into a smaller space");
  FockState s;
  s.omega_ref = omega_ref;
  s.rho = ComplexMatrix::Zero(D, D);
  s.rho.topLeftCorner(d, d) = rho;
  return s;
}

// ---------------------------------------------------------------------------
// Integration

ObservableVector fock_moments(const ComplexMatrix& rho, const FockOperators& ops,
                              double omega) {
  auto expect = [&rho](const SparseComplex& op) {
    // tr(rho op) = sum_ij rho_ij op_ji
    cd acc = 0.0;
    for (int k = 0; k < op.outerSize(); ++k) {
      for (SparseComplex::InnerIterator it(op, k); it; ++it) {
        acc += rho(it.col(), it.row()) * it.value();
      }
    }
    return acc.real();
  };
  const double t = 0.5 * expect(ops.p2);
  const double u = 0.5 * omega * omega * expect(ops.q2);
  return {t + u, t - u, omega * expect(ops.qp_sym), 1.0};
}

namespace {

FockTrajectory integrate_once(const FockState& rho0,
                              const FrequencyProtocol& protocol,
                              const std::optional<BathSpec>& bath,
                              std::optional<double> gamma_d,
                              const LindbladOptions& options) {
  const std::size_t dim = rho0.dimension();
  const long d = static_cast<long>(dim);
  const auto ext = extended(rho0.omega_ref, dim);
  const FockOperators& ops = ext.ops;
  const double gd = gamma_d.value_or(0.0);
  if (!(gd >= 0.0)) throw DomainError("gamma_d must be >= 0");

  auto rhs = [&](const std::vector<double>& x, std::vector<double>& dx,
                 double t) {
    const Eigen::Map<const ComplexMatrix> rho(
        reinterpret_cast<const cd*>(x.data()), d, d);
    Eigen::Map<ComplexMatrix> drho(reinterpret_cast<cd*>(dx.data()), d, d);
    const double w = protocol.omega(t);
    const SparseComplex H = (ops.p2 + ops.q2 * cd(w * w, 0.0)) * cd(0.5, 0.0);
    // Two-sided products throughout: shortcuts such as [H, rho] =
    // H rho - (H rho)^dagger assume a Hermitian rho and would amplify any
    // round-off anti-Hermitian part at a rate ~ 2 E_max.
    const ComplexMatrix comm = ComplexMatrix(H * rho) - ComplexMatrix(rho * H);
    drho = cd(0.0, -1.0) * comm;
    if (bath) {
      const double wd = protocol.omega_dot(t);
      const NameRates r = name_rates(w, wd, *bath);
      const JumpOps j = jump_ops(ext.q_ext, ext.p_ext, w, wd / (w * w), dim);
      const ComplexMatrix brho = j.b * rho;
      const ComplexMatrix bdrho = j.bd * rho;
      drho += r.k_down * (ComplexMatrix(brho * j.bd) -
                          0.5 * (ComplexMatrix(j.bdb * rho) + ComplexMatrix(rho * j.bdb)));
      drho += r.k_up * (ComplexMatrix(bdrho * j.b) -
                        0.5 * (ComplexMatrix(j.bbd * rho) + ComplexMatrix(rho * j.bbd)));
    }
    if (gd > 0.0) {
      drho -= gd * (ComplexMatrix(H * comm) - ComplexMatrix(comm * H));  // [H, [H, rho]]
    }
  };

  const std::size_t points = std::max<std::size_t>(2, options.output_points);
  const auto times = uniform_times(0.0, protocol.duration(), points);
  std::vector<double> x0(2 * dim * dim);
  Eigen::Map<ComplexMatrix>(reinterpret_cast<cd*>(x0.data()), d, d) = rho0.rho;
  const auto states = integrate_dopri_dynamic(rhs, x0, times, options.tol);

  FockTrajectory out;
  out.dimension = dim;
  out.times = times;
  FockState snap;
  snap.omega_ref = rho0.omega_ref;
  for (std::size_t i = 0; i < states.size(); ++i) {
    snap.rho = Eigen::Map<const ComplexMatrix>(
        reinterpret_cast<const cd*>(states[i].data()), d, d);
    const double leak = snap.leakage();
    out.max_leakage = std::max(out.max_leakage, leak);
    if (leak > options.leakage_limit) {
      std::ostringstream os;
      os << "population " << leak << " reached the top levels of a " << dim
         << "-level space at t = " << times[i] << "; increase the dimension";
      throw TruncationError(os.str());
    }
    out.max_trace_error = std::max(out.max_trace_error, snap.trace_error());
    out.max_hermiticity_error =
        std::max(out.max_hermiticity_error, snap.hermiticity_error());
    out.vectors.push_back(fock_moments(snap.rho, ops, protocol.omega(times[i])));
  }
  out.final_min_eigenvalue = snap.min_eigenvalue();
  return out;
}

}  // namespace

FockTrajectory integrate_lindblad(const FockState& rho0,
                                  const FrequencyProtocol& protocol,
                                  const std::optional<BathSpec>& bath,
                                  std::optional<double> gamma_d,
                                  const LindbladOptions& options) {
  check_dimension(rho0.dimension());
  if (bath) bath->validate();
  if (rho0.leakage() > options.leakage_limit) {
    throw TruncationError("initial state already populates the top levels");
  }
  FockState start = rho0;
  while (true) {
    try {
      return integrate_once(start, protocol, bath, gamma_d, options);
    } catch (const TruncationError&) {
      const std::size_t next = 2 * start.dimension();
      if (!options.auto_double || next > options.max_dimension) throw;
      start = start.embedded(next);
    }
  }
}

}  // namespace qcarnot
