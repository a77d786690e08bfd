#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "qcarnot/errors.hpp"

namespace qcarnot {

struct OdeTolerances {
  double abs = 1e-12;
  double rel = 1e-10;
};

/// Integrates dx/dt = rhs(x, t) with the adaptive Dormand-Prince 5(4) pair
/// (dense output) and returns the state at each of `times` (ascending or
/// descending, first entry is the initial time).
template <std::size_t N, class Rhs>
std::vector<std::array<double, N>> integrate_dopri(
    Rhs&& rhs, const std::array<double, N>& x0, std::span<const double> times,
    OdeTolerances tol = {}) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, N>;

  std::vector<State> out;
  out.reserve(times.size());
  if (times.empty()) return out;
  if (times.size() == 1) {
    out.push_back(x0);
    return out;
  }
  const double span = times.back() - times.front();
  if (span == 0.0) {
    out.assign(times.size(), x0);
    return out;
  }

  auto system = [&rhs](const State& x, State& dxdt, double t) {
    dxdt = rhs(x, t);
  };
  auto stepper = odeint::make_dense_output(
      tol.abs, tol.rel, odeint::runge_kutta_dopri5<State>());
  State x = x0;
  const double dt0 = span / 4096.0;
  try {
    odeint::integrate_times(
        stepper, system, x, times.begin(), times.end(), dt0,
        [&out](const State& s, double) { out.push_back(s); },
        odeint::max_step_checker(5'000'000));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw NumericalError(std::string("Dormand-Prince integration failed: ") +
                         e.what());
  }
  for (const auto& s : out) {
    for (double v : s) {
      if (!std::isfinite(v)) {
        throw NumericalError("Dormand-Prince integration produced non-finite state");
      }
    }
  }
  return out;
}

/// Same as integrate_dopri for a state whose size is only known at run time.
template <class Rhs>
std::vector<std::vector<double>> integrate_dopri_dynamic(
    Rhs&& rhs, const std::vector<double>& x0, std::span<const double> times,
    OdeTolerances tol = {}) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;

  std::vector<State> out;
  out.reserve(times.size());
  if (times.empty()) return out;
  if (times.size() == 1 || times.back() == times.front()) {
    out.assign(times.size(), x0);
    return out;
  }
  auto system = [&rhs](const State& x, State& dxdt, double t) {
    rhs(x, dxdt, t);
  };
  auto stepper = odeint::make_dense_output(
      tol.abs, tol.rel, odeint::runge_kutta_dopri5<State>());
  State x = x0;
  const double dt0 = (times.back() - times.front()) / 4096.0;
  try {
    odeint::integrate_times(
        stepper, system, x, times.begin(), times.end(), dt0,
        [&out](const State& s, double) { out.push_back(s); },
        odeint::max_step_checker(5'000'000));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw NumericalError(std::string("Dormand-Prince integration failed: ") +
                         e.what());
  }
  return out;
}

/// Uniform grid of `points` nodes on [t0, t1] with the last node exactly t1.
inline std::vector<double> uniform_times(double t0, double t1,
                                         std::size_t points) {
  std::vector<double> t(points);
  for (std::size_t i = 0; i < points; ++i) {
    t[i] = t0 + (t1 - t0) * static_cast<double>(i) /
                    static_cast<double>(points - 1);
  }
  t.back() = t1;
  return t;
}

}  // namespace qcarnot
