#include "qcarnot/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "qcarnot/thermo.hpp"

namespace qcarnot {

NameRates name_rates(double omega, double omega_dot, const BathSpec& bath) {
  bath.validate();
  if (!(omega > 0.0)) throw DomainError("name_rates: omega must be > 0");
  const double mu = omega_dot / (omega * omega);
  if (!(std::abs(mu) < 2.0)) {
    std::ostringstream os;
    os << "name_rates: |mu| = " << std::abs(mu)
       << " >= 2 leaves kappa = sqrt(4 - mu^2) imaginary";
    throw DomainError(os.str());
  }
  NameRates r;
  r.kappa = std::sqrt(4.0 - mu * mu);
  r.alpha = omega * std::sqrt(1.0 - 0.25 * mu * mu);
  const double x = kHbar * r.alpha / (kBoltzmann * bath.temperature);
  const double occupation = 1.0 / std::expm1(x);
  r.k_down = r.alpha * bath.coupling / r.kappa * (1.0 + occupation);
  r.k_up = r.k_down * std::exp(-x);
  return r;
}

Matrix4 unitary_generator(double omega, double mu) {
  Matrix4 g;
  // clang-format off
  g << mu,  -mu,  0.0, 0.0,
       -mu,  mu, -2.0, 0.0,
       0.0, 2.0,   mu, 0.0,
       0.0, 0.0,  0.0, 0.0;
  // clang-format on
  return omega * g;
}

// Adjoint of k_down D[b] + k_up D[b^dagger] with
// b = sqrt(omega/kappa) (kappa + i mu)/2 (Q + (mu + i kappa)/(2 omega) P)
// closes on {H, L, C, I}: every quadratic observable decays at
// Gamma = k_down - k_up, and the identity picks up the drive
// (k_down + k_up) (omega/kappa) (1, 0, -mu/2).
Matrix4 dissipative_generator(double omega, double omega_dot,
                              const BathSpec& bath) {
  const NameRates r = name_rates(omega, omega_dot, bath);
  const double mu = omega_dot / (omega * omega);
  const double drive = kHbar * (r.k_down + r.k_up) * omega / r.kappa;
  Matrix4 g = Matrix4::Zero();
  g(0, 0) = g(1, 1) = g(2, 2) = -r.gamma();
  g(0, 3) = drive;
  g(2, 3) = -0.5 * mu * drive;
  return g;
}

Matrix4 open_generator(double omega, double omega_dot, const BathSpec& bath) {
  const double mu = omega_dot / (omega * omega);
  return unitary_generator(omega, mu) +
         dissipative_generator(omega, omega_dot, bath);
}

Matrix4 dephasing_generator(double omega, double mu, double gamma_d) {
  if (!(gamma_d >= 0.0)) throw DomainError("gamma_d must be >= 0");
  Matrix4 g = unitary_generator(omega, mu);
  const double damp = 4.0 * gamma_d * omega * omega;
  g(1, 1) -= damp;
  g(2, 2) -= damp;
  return g;
}

Matrix4 free_propagator(double omega_initial, double mu, double t) {
  if (!(omega_initial > 0.0)) throw DomainError("omega_initial must be > 0");
  if (!(std::abs(mu) < 2.0)) throw DomainError("free_propagator needs |mu| < 2");
  const double denom = 1.0 - mu * omega_initial * t;
  if (!(denom > 0.0)) {
    throw DomainError("free_propagator: t lies beyond the protocol pole");
  }
  const double ratio = 1.0 / denom;  // omega(t)/omega(0)
  const double theta =
      mu == 0.0 ? omega_initial * t : -std::log(denom) / mu;
  const double k2 = 4.0 - mu * mu;
  const double k = std::sqrt(k2);
  const double c = std::cos(k * theta);
  const double s = std::sin(k * theta);
  Matrix4 u;
  // clang-format off
  u << 4.0 - mu * mu * c,  -mu * k * s,  -2.0 * mu * (c - 1.0), 0.0,
       -mu * k * s,         k2 * c,       -2.0 * k * s,         0.0,
       2.0 * mu * (c - 1.0), 2.0 * k * s,  4.0 * c - mu * mu,    0.0,
       0.0,                 0.0,          0.0,                  k2 / ratio;
  // clang-format on
  return (ratio / k2) * u;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Unitary: return "unitary";
    case Provenance::Open: return "open";
    case Provenance::Dephasing: return "dephasing";
    case Provenance::SteBeta: return "ste_beta";
  }
  return "unknown";
}

Trajectory Trajectory::shifted(double offset) const {
  Trajectory out = *this;
  for (double& t : out.times) t += offset;
  return out;
}

namespace {

Trajectory empty_trajectory(const ObservableVector& v0,
                            const FrequencyProtocol& protocol, Provenance p) {
  Trajectory tr;
  tr.provenance = p;
  tr.times = {0.0};
  tr.vectors = {v0};
  tr.omegas = {protocol.omega(0.0)};
  tr.omega_dots = {protocol.omega_dot(0.0)};
  tr.work = {0.0};
  return tr;
}

// Integrates (h, l, c, W) with d(h,l,c)/dt = G(t) (h,l,c,1) and
// dW/dt = (omega_dot/omega)(h - l).
template <class Generator>
Trajectory integrate_moments(const ObservableVector& v0,
                             const FrequencyProtocol& protocol,
                             const PropagationOptions& opt, Provenance prov,
                             Generator&& generator) {
  if (protocol.duration() == 0.0) return empty_trajectory(v0, protocol, prov);
  const auto times =
      uniform_times(0.0, protocol.duration(), std::max<std::size_t>(2, opt.output_points));
  const std::array<double, 4> x0{v0.h, v0.l, v0.c, 0.0};
  auto rhs = [&](const std::array<double, 4>& x, double t) {
    const double w = protocol.omega(t);
    const double wd = protocol.omega_dot(t);
    const Matrix4 g = generator(w, wd);
    const Eigen::Vector4d v(x[0], x[1], x[2], 1.0);
    const Eigen::Vector4d dv = g * v;
    return std::array<double, 4>{dv[0], dv[1], dv[2], wd / w * (x[0] - x[1])};
  };
  const auto states = integrate_dopri<4>(rhs, x0, times, opt.tol);

  Trajectory tr;
  tr.provenance = prov;
  tr.times = times;
  tr.vectors.reserve(times.size());
  tr.omegas.reserve(times.size());
  tr.omega_dots.reserve(times.size());
  tr.work.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    tr.vectors.push_back({states[i][0], states[i][1], states[i][2], 1.0});
    tr.omegas.push_back(protocol.omega(times[i]));
    tr.omega_dots.push_back(protocol.omega_dot(times[i]));
    tr.work.push_back(states[i][3]);
  }
  return tr;
}

// Integrates the 4x4 propagator U' = G U together with the work row
// w' = (omega_dot/omega) (U_row0 - U_row1).
template <class Generator>
StrokeMap integrate_map(const FrequencyProtocol& protocol,
                        const OdeTolerances& tol, Generator&& generator) {
  StrokeMap map;
  if (protocol.duration() == 0.0) return map;
  using State = std::array<double, 20>;
  State x0{};
  for (int i = 0; i < 4; ++i) x0[i * 4 + i] = 1.0;
  auto rhs = [&](const State& x, double t) {
    const double w = protocol.omega(t);
    const double wd = protocol.omega_dot(t);
    const Matrix4 g = generator(w, wd);
    const Eigen::Map<const Matrix4> u(x.data());
    State dx{};
    Eigen::Map<Matrix4> du(dx.data());
    du.noalias() = g * u;
    const double r = wd / w;
    for (int j = 0; j < 4; ++j) dx[16 + j] = r * (u(0, j) - u(1, j));
    return dx;
  };
  const std::array<double, 2> times{0.0, protocol.duration()};
  const auto states = integrate_dopri<20>(rhs, x0, times, tol);
  const auto& xf = states.back();
  map.propagator = Eigen::Map<const Matrix4>(xf.data());
  for (int j = 0; j < 4; ++j) map.work[j] = xf[16 + j];
  // The identity row is exact by construction.
  map.propagator.row(3) << 0.0, 0.0, 0.0, 1.0;
  return map;
}

}  // namespace

ObservableVector StrokeMap::apply(const ObservableVector& v) const {
  const Eigen::Vector4d x(v.h, v.l, v.c, 1.0);
  const Eigen::Vector4d y = propagator * x;
  return {y[0], y[1], y[2], 1.0};
}

double StrokeMap::work_on(const ObservableVector& v) const {
  return work.dot(Eigen::Vector4d(v.h, v.l, v.c, 1.0));
}

StrokeMap stroke_map_unitary(const FrequencyProtocol& protocol,
                             const OdeTolerances& tol) {
  return integrate_map(protocol, tol, [](double w, double wd) {
    return unitary_generator(w, wd / (w * w));
  });
}

StrokeMap stroke_map_open(const FrequencyProtocol& protocol,
                          const BathSpec& bath, const OdeTolerances& tol) {
  bath.validate();
  if (!(protocol.max_abs_mu() < 2.0)) {
    throw DomainError("stroke_map_open: protocol reaches |mu| >= 2");
  }
  return integrate_map(protocol, tol, [&bath](double w, double wd) {
    return open_generator(w, wd, bath);
  });
}

StrokeMap stroke_map_dephasing(const FrequencyProtocol& protocol,
                               double gamma_d,
                               const std::optional<BathSpec>& bath,
                               const OdeTolerances& tol) {
  if (!(gamma_d >= 0.0)) throw DomainError("gamma_d must be >= 0");
  return integrate_map(protocol, tol, [&bath, gamma_d](double w, double wd) {
    Matrix4 g = dephasing_generator(w, wd / (w * w), gamma_d);
    if (bath) g += dissipative_generator(w, wd, *bath);
    return g;
  });
}

Trajectory propagate_unitary(const ObservableVector& v0,
                             const FrequencyProtocol& protocol,
                             const PropagationOptions& opt) {
  if (protocol.kind() == FrequencyProtocol::Kind::ConstantMu) {
    if (protocol.duration() == 0.0) {
      return empty_trajectory(v0, protocol, Provenance::Unitary);
    }
    const double wi = protocol.omega_initial();
    const double mu = protocol.constant_mu_value();
    const auto times = uniform_times(0.0, protocol.duration(),
                                     std::max<std::size_t>(2, opt.output_points));
    const Eigen::Vector4d x(v0.h, v0.l, v0.c, 1.0);
    Trajectory tr;
    tr.provenance = Provenance::Unitary;
    tr.times = times;
    for (double t : times) {
      const Eigen::Vector4d v = free_propagator(wi, mu, t) * x;
      tr.vectors.push_back({v[0], v[1], v[2], 1.0});
      tr.omegas.push_back(protocol.omega(t));
      tr.omega_dots.push_back(protocol.omega_dot(t));
      // Closed system: the work done equals the energy change.
      tr.work.push_back(v[0] - v0.h);
    }
    return tr;
  }
  return integrate_moments(v0, protocol, opt, Provenance::Unitary,
                           [](double w, double wd) {
                             return unitary_generator(w, wd / (w * w));
                           });
}

Trajectory propagate_open(const ObservableVector& v0,
                          const FrequencyProtocol& protocol,
                          const BathSpec& bath,
                          const PropagationOptions& opt) {
  bath.validate();
  if (!(protocol.max_abs_mu() < 2.0)) {
    throw DomainError("propagate_open: protocol reaches |mu| >= 2");
  }
  return integrate_moments(v0, protocol, opt, Provenance::Open,
                           [&bath](double w, double wd) {
                             return open_generator(w, wd, bath);
                           });
}

Trajectory propagate_dephasing(const ObservableVector& v0,
                               const FrequencyProtocol& protocol,
                               double gamma_d,
                               const std::optional<BathSpec>& bath,
                               const PropagationOptions& opt) {
  if (!(gamma_d >= 0.0)) throw DomainError("gamma_d must be >= 0");
  if (bath) bath->validate();
  return integrate_moments(
      v0, protocol, opt, Provenance::Dephasing,
      [&bath, gamma_d](double w, double wd) {
        Matrix4 g = dephasing_generator(w, wd / (w * w), gamma_d);
        if (bath) g += dissipative_generator(w, wd, *bath);
        return g;
      });
}

BetaTrace propagate_ste_beta(double beta0, const FrequencyProtocol& protocol,
                             const BathSpec& bath,
                             const PropagationOptions& opt) {
  bath.validate();
  BetaTrace out;
  if (protocol.duration() == 0.0) {
    out.times = {0.0};
    out.betas = {beta0};
    return out;
  }
  out.times = uniform_times(0.0, protocol.duration(),
                            std::max<std::size_t>(2, opt.output_points));
  auto rhs = [&](const std::array<double, 1>& x, double t) {
    const NameRates r =
        name_rates(protocol.omega(t), protocol.omega_dot(t), bath);
    const double b = x[0];
    return std::array<double, 1>{r.k_down * std::expm1(b) +
                                 r.k_up * std::expm1(-b)};
  };
  const auto states =
      integrate_dopri<1>(rhs, std::array<double, 1>{beta0}, out.times, opt.tol);
  out.betas.reserve(states.size());
  for (const auto& s : states) out.betas.push_back(s[0]);
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,omega,h,l,c,coherence\n";
  char buf[256];
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& v = traj.vectors[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  traj.times[i], traj.omegas[i], v.h, v.l, v.c,
                  coherence(v, traj.omegas[i]));
    os << buf;
  }
}

}  // namespace qcarnot
