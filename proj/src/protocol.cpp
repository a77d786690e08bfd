#include "qcarnot/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qcarnot/errors.hpp"

namespace qcarnot {

FrequencyProtocol FrequencyProtocol::constant_mu(double omega_initial,
                                                 double mu, double duration) {
  if (!(omega_initial > 0.0)) throw DomainError("omega_initial must be > 0");
  if (!(duration >= 0.0)) throw DomainError("duration must be >= 0");
  if (mu * omega_initial * duration >= 1.0) {
    throw DomainError("constant-mu protocol crosses its pole inside the stroke");
  }
  FrequencyProtocol p;
  p.kind_ = Kind::ConstantMu;
  p.duration_ = duration;
  p.omega_i_ = omega_initial;
  p.mu_ = mu;
  return p;
}

FrequencyProtocol FrequencyProtocol::grid(std::vector<double> omega,
                                          std::vector<double> omega_dot,
                                          double duration) {
  if (omega.size() < 2 || omega.size() != omega_dot.size()) {
    throw DomainError("grid protocol needs >= 2 matching samples");
  }
  if (!(duration > 0.0)) throw DomainError("grid protocol duration must be > 0");
  FrequencyProtocol p;
  p.kind_ = Kind::Grid;
  p.duration_ = duration;
  p.omega_ = std::move(omega);
  p.omega_dot_ = std::move(omega_dot);
  for (std::size_t i = 0; i < p.omega_.size(); ++i) {
    if (!(p.omega_[i] > 0.0) || !std::isfinite(p.omega_dot_[i])) {
      throw InvalidProtocol("grid protocol has omega <= 0 or non-finite rate",
                            p.time_at(i));
    }
  }
  const double h = p.step();
  p.phase_.resize(p.omega_.size());
  p.phase_[0] = 0.0;
  for (std::size_t i = 1; i < p.omega_.size(); ++i) {
    p.phase_[i] = p.phase_[i - 1] +
                  h * (0.5 * (p.omega_[i - 1] + p.omega_[i]) +
                       h * (p.omega_dot_[i - 1] - p.omega_dot_[i]) / 12.0);
  }
  return p;
}

FrequencyProtocol FrequencyProtocol::constant(double omega, double duration,
                                              std::size_t points) {
  return grid(std::vector<double>(points, omega),
              std::vector<double>(points, 0.0), duration);
}

double FrequencyProtocol::step() const {
  if (kind_ != Kind::Grid) return 0.0;
  return duration_ / static_cast<double>(omega_.size() - 1);
}

double FrequencyProtocol::time_at(std::size_t i) const {
  if (i + 1 == omega_.size()) return duration_;
  return duration_ * static_cast<double>(i) /
         static_cast<double>(omega_.size() - 1);
}

std::size_t FrequencyProtocol::cell(double t, double& s) const {
  const double h = step();
  const std::size_t last = omega_.size() - 2;
  double x = t / h;
  if (!(x > 0.0)) x = 0.0;
  auto i = static_cast<std::size_t>(x);
  if (i > last) i = last;
  s = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
  return i;
}

double FrequencyProtocol::omega(double t) const {
  if (kind_ == Kind::ConstantMu) {
    return omega_i_ / (1.0 - mu_ * omega_i_ * t);
  }
  double s = 0.0;
  const std::size_t i = cell(t, s);
  const double h = step();
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * omega_[i] +
         (s3 - 2 * s2 + s) * h * omega_dot_[i] +
         (-2 * s3 + 3 * s2) * omega_[i + 1] +
         (s3 - s2) * h * omega_dot_[i + 1];
}

double FrequencyProtocol::omega_dot(double t) const {
  if (kind_ == Kind::ConstantMu) {
    const double w = omega(t);
    return mu_ * w * w;
  }
  double s = 0.0;
  const std::size_t i = cell(t, s);
  const double h = step();
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * omega_[i] +
          (3 * s2 - 4 * s + 1) * h * omega_dot_[i] +
          (-6 * s2 + 6 * s) * omega_[i + 1] +
          (3 * s2 - 2 * s) * h * omega_dot_[i + 1]) /
         h;
}

double FrequencyProtocol::mu(double t) const {
  if (kind_ == Kind::ConstantMu) return mu_;
  const double w = omega(t);
  return omega_dot(t) / (w * w);
}

double FrequencyProtocol::phase(double t) const {
  if (kind_ == Kind::ConstantMu) {
    if (mu_ == 0.0) return omega_i_ * t;
    return -std::log1p(-mu_ * omega_i_ * t) / mu_;
  }
  double s = 0.0;
  const std::size_t i = cell(t, s);
  const double h = step();
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double s4 = s3 * s;
  return phase_[i] +
         h * ((0.5 * s4 - s3 + s) * omega_[i] +
              (0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2) * h * omega_dot_[i] +
              (-0.5 * s4 + s3) * omega_[i + 1] +
              (0.25 * s4 - s3 / 3.0) * h * omega_dot_[i + 1]);
}

double FrequencyProtocol::constant_mu_value() const {
  if (kind_ != Kind::ConstantMu) {
    throw DomainError("protocol is not of the constant-mu family");
  }
  return mu_;
}

FrequencyProtocol FrequencyProtocol::sampled(std::size_t points) const {
  if (points < 2) throw DomainError("need at least two samples");
  if (kind_ == Kind::Grid && points == omega_.size()) return *this;
  if (duration_ == 0.0) {
    throw DomainError("cannot sample a zero-duration protocol");
  }
  std::vector<double> w(points);
  std::vector<double> wd(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = i + 1 == points
                         ? duration_
                         : duration_ * static_cast<double>(i) /
                               static_cast<double>(points - 1);
    w[i] = omega(t);
    wd[i] = omega_dot(t);
  }
  return grid(std::move(w), std::move(wd), duration_);
}

void FrequencyProtocol::check_consistency(double rel_tol) const {
  if (kind_ == Kind::ConstantMu) {
    const double end = 1.0 - mu_ * omega_i_ * duration_;
    if (!(end > 0.0)) {
      throw InvalidProtocol("constant-mu protocol reaches its pole", duration_);
    }
    return;
  }
  const std::size_t n = omega_.size();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(omega_[i] > 0.0)) {
      throw InvalidProtocol("omega <= 0 on the grid", time_at(i));
    }
    const double m = omega_dot_[i] / (omega_[i] * omega_[i]);
    if (!std::isfinite(m)) {
      throw InvalidProtocol("adiabatic parameter is not finite", time_at(i));
    }
    scale = std::max(scale, std::abs(omega_dot_[i]));
  }
  if (n < 3) return;
  const double h = step();
  // Fourth-order differences: central in the bulk, off-centre next to the
  // ends and one-sided on the end nodes.
  auto fd = [&](std::size_t i) {
    if (i >= 2 && i + 2 < n) {
      return (omega_[i - 2] - 8.0 * omega_[i - 1] + 8.0 * omega_[i + 1] -
              omega_[i + 2]) /
             (12.0 * h);
    }
    if (n < 5) {
      if (i == 0) return (omega_[1] - omega_[0]) / h;
      if (i == n - 1) return (omega_[n - 1] - omega_[n - 2]) / h;
      return (omega_[i + 1] - omega_[i - 1]) / (2.0 * h);
    }
    if (i == 0) {
      return (-25.0 * omega_[0] + 48.0 * omega_[1] - 36.0 * omega_[2] +
              16.0 * omega_[3] - 3.0 * omega_[4]) /
             (12.0 * h);
    }
    if (i == n - 1) {
      return (25.0 * omega_[n - 1] - 48.0 * omega_[n - 2] +
              36.0 * omega_[n - 3] - 16.0 * omega_[n - 4] +
              3.0 * omega_[n - 5]) /
             (12.0 * h);
    }
    if (i == 1) {
      return (-3.0 * omega_[0] - 10.0 * omega_[1] + 18.0 * omega_[2] -
              6.0 * omega_[3] + omega_[4]) /
             (12.0 * h);
    }
    return (3.0 * omega_[n - 1] + 10.0 * omega_[n - 2] - 18.0 * omega_[n - 3] +
            6.0 * omega_[n - 4] - omega_[n - 5]) /
           (12.0 * h);
  };
  // The stencils cannot resolve rates below their own round-off.
  const double w_max = *std::max_element(omega_.begin(), omega_.end());
  const double round_off =
      64.0 * std::numeric_limits<double>::epsilon() * w_max / h;
  for (std::size_t i = 0; i < n; ++i) {
    const double err = std::abs(fd(i) - omega_dot_[i]);
    if (err > std::max(rel_tol * scale, round_off)) {
      std::ostringstream os;
      os << "omega_dot disagrees with finite differences of omega at t = "
         << time_at(i) << " (|error| = " << err << ", scale = " << scale
         << ")";
      throw NumericalError(os.str());
    }
  }
}

double FrequencyProtocol::max_abs_mu() const {
  if (kind_ == Kind::ConstantMu) return std::abs(mu_);
  double m = 0.0;
  for (std::size_t i = 0; i < omega_.size(); ++i) {
    m = std::max(m, std::abs(omega_dot_[i] / (omega_[i] * omega_[i])));
  }
  return m;
}

double FrequencyProtocol::integrated_abs_mu() const {
  if (kind_ == Kind::ConstantMu) return std::abs(mu_) * duration_;
  const double h = step();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < omega_.size(); ++i) {
    const double a = std::abs(omega_dot_[i] / (omega_[i] * omega_[i]));
    const double b = std::abs(omega_dot_[i + 1] / (omega_[i + 1] * omega_[i + 1]));
    acc += 0.5 * h * (a + b);
  }
  return acc;
}

}  // namespace qcarnot
