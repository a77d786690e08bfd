#include "qcarnot/protocols.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "qcarnot/ode.hpp"

namespace qcarnot {

// ---------------------------------------------------------------------------
// QuinticHermite

QuinticHermite::QuinticHermite(double t_f, double v0, double v1, double d0,
                               double d1, double a0, double a1)
    : t_f_(t_f) {
  if (!(t_f > 0.0)) throw DomainError("quintic needs t_f > 0");
  const double T = t_f;
  coef_[0] = v0;
  coef_[1] = d0 * T;
  coef_[2] = 0.5 * a0 * T * T;
  const double A = v1 - (coef_[0] + coef_[1] + coef_[2]);
  const double B = d1 * T - (coef_[1] + 2.0 * coef_[2]);
  const double C = a1 * T * T - 2.0 * coef_[2];
  coef_[3] = 10.0 * A - 4.0 * B + 0.5 * C;
  coef_[4] = -15.0 * A + 7.0 * B - C;
  coef_[5] = 6.0 * A - 3.0 * B + 0.5 * C;
}

double QuinticHermite::eval(double t, int order) const {
  const double s = t / t_f_;
  double acc = 0.0;
  // Horner on the order-th derivative of sum c_k s^k.
  for (int k = 5; k >= order; --k) {
    double falling = 1.0;
    for (int j = 0; j < order; ++j) falling *= static_cast<double>(k - j);
    acc = acc * s + falling * coef_[k];
  }
  for (int j = 0; j < order; ++j) acc /= t_f_;
  return acc;
}

// ---------------------------------------------------------------------------
// STA

double ErmakovSolution::omega_squared(double t) const {
  const double r = rho(t);
  const double r2 = r * r;
  return 1.0 / (r2 * r2) - rho_ddot(t) / r;
}

StaProtocol build_sta_protocol(double omega_initial, double omega_final,
                               double t_f, std::size_t points) {
  if (!(omega_initial > 0.0) || !(omega_final > 0.0)) {
    throw DomainError("STA frequencies must be > 0");
  }
  if (!(t_f > 0.0)) throw DomainError("STA duration must be > 0");
  if (points < 2) throw DomainError("STA grid needs at least two points");

  ErmakovSolution erm;
  erm.t_f = t_f;
  erm.omega_initial = omega_initial;
  erm.omega_final = omega_final;
  const double rho0 = 1.0 / std::sqrt(omega_initial);
  erm.poly = QuinticHermite(t_f, rho0, rho0 * std::sqrt(omega_initial / omega_final));

  std::vector<double> w(points);
  std::vector<double> wd(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = i + 1 == points ? t_f
                                     : t_f * static_cast<double>(i) /
                                           static_cast<double>(points - 1);
    const double r = erm.rho(t);
    const double rd = erm.rho_dot(t);
    const double rdd = erm.rho_ddot(t);
    const double rddd = erm.rho_dddot(t);
    if (!(r > 0.0)) throw InvalidProtocol("Ermakov scaling rho <= 0", t);
    const double w2 = erm.omega_squared(t);
    if (!(w2 > 0.0)) {
      std::ostringstream os;
      os << "STA trap turns repulsive (omega^2 = " << w2 << ") at t = " << t
         << "; retry with a longer stroke";
      throw InvalidProtocol(os.str(), t);
    }
    const double r5 = r * r * r * r * r;
    const double dw2 = -4.0 * rd / r5 - (rddd * r - rdd * rd) / (r * r);
    w[i] = std::sqrt(w2);
    wd[i] = dw2 / (2.0 * w[i]);
  }
  // rho_dot = rho_ddot = 0 pins omega at the ends; omega_dot there is
  // -rho_dddot / (2 omega rho) and is kept as computed.
  w.front() = omega_initial;
  w.back() = omega_final;
  return {FrequencyProtocol::grid(std::move(w), std::move(wd), t_f), erm};
}

ObservableVector sta_expectation_values(const ErmakovSolution& erm,
                                        double omega_start,
                                        double temperature, double t) {
  if (!(t >= 0.0) || !(t <= erm.t_f)) {
    throw DomainError("sta_expectation_values: t outside the stroke");
  }
  // Thermal weight sum_lambda p_lambda (lambda + 1/2).
  const double weight = thermal_population(omega_start, temperature) + 0.5;
  const double r = erm.rho(t);
  const double rd = erm.rho_dot(t);
  const double w2 = erm.omega_squared(t);
  const double kinetic = rd * rd + 1.0 / (r * r);
  const double potential = w2 * r * r;
  return {0.5 * (kinetic + potential) * weight,
          0.5 * (kinetic - potential) * weight,
          std::sqrt(w2) * rd * r * weight, 1.0};
}

// ---------------------------------------------------------------------------
// STE

double SteSolution::beta(double t) const { return std::log(y(t)); }
double SteSolution::beta_dot(double t) const { return y_poly.d1(t) / y(t); }

namespace {

struct SteInversion {
  const QuinticHermite& y;
  BathSpec bath;

  // The rates depend on alpha only through N(alpha) once kappa = 2 alpha/omega
  // is used, so the inverse-temperature equation is solved for N in closed
  // form.
  double alpha(double omega, double t) const {
    if (!(omega > 0.0) || !std::isfinite(omega)) {
      throw InfeasibleStroke("STE tracking left the region omega > 0", t);
    }
    const double yv = y.value(t);
    const double beta_dot = y.d1(t) / yv;
    const double one_minus = 1.0 - yv;
    const double occupation =
        (2.0 * beta_dot / (omega * bath.coupling) + one_minus) * yv /
        (one_minus * one_minus);
    if (!(occupation > 0.0)) {
      std::ostringstream os;
      os << "STE stroke demands a relaxation faster than the bath allows at t = "
         << t << " (required occupation " << occupation << " <= 0)";
      throw InfeasibleStroke(os.str(), t);
    }
    return kBoltzmann * bath.temperature / kHbar * std::log1p(1.0 / occupation);
  }

  // omega_dot = sign * 2 omega sqrt(omega^2 - alpha^2); held at zero while
  // alpha exceeds omega.
  double rate(double omega, double t, double sign) const {
    const double a = alpha(omega, t);
    return sign * 2.0 * omega * std::sqrt(std::max(omega * omega - a * a, 0.0));
  }

  // Tracking omega just above alpha is stiff (d omega_dot / d omega grows
  // like 4 omega / mu), so the branch is advanced with BDF2 and a bracketed
  // scalar solve per step. All callers integrate in the direction where the
  // branch is attracting (sign * dt < 0).
  std::vector<double> integrate(double omega0, std::span<const double> times,
                                double sign, std::size_t substeps = 8) const {
    std::vector<double> out;
    out.reserve(times.size());
    if (times.empty()) return out;
    out.push_back(omega0);
    double prev = omega0;  // omega one substep back (for BDF2)
    double cur = omega0;
    bool started = false;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      const double dt = (times[i + 1] - times[i]) / static_cast<double>(substeps);
      for (std::size_t j = 1; j <= substeps; ++j) {
        const double t_new = times[i] + dt * static_cast<double>(j);
        // Implicit Euler for the first step, BDF2 afterwards.
        const double c = started ? (4.0 * cur - prev) / 3.0 : cur;
        const double weight = started ? 2.0 / 3.0 : 1.0;
        const double next = implicit_step(c, weight * dt, t_new, sign);
        prev = cur;
        cur = next;
        started = true;
      }
      out.push_back(cur);
    }
    return out;
  }

  // Solves w - c - h_eff * rate(w, t, sign) = 0 for w.
  double implicit_step(double c, double h_eff, double t, double sign) const {
    auto g = [&](double w) { return w - c - h_eff * rate(w, t, sign); };
    const double gc = g(c);
    if (gc == 0.0) return c;
    // g is increasing in w in the attracting direction; search downward (or
    // upward) from c for a sign change.
    const double dir = gc > 0.0 ? -1.0 : 1.0;
    double step = std::max(std::abs(h_eff * rate(c, t, sign)), 1e-15 * c);
    double a = c;
    double b = c + dir * step;
    double gb = g(b);
    int guard = 0;
    while ((gb > 0.0) == (gc > 0.0)) {
      a = b;
      step *= 2.0;
      b = c + dir * step;
      if (!(b > 0.0) || ++guard > 200) {
        throw NumericalError("STE inversion step lost its bracket");
      }
      gb = g(b);
    }
    double lo = std::min(a, b);
    double hi = std::max(a, b);
    std::uintmax_t iters = 100;
    const auto r = boost::math::tools::toms748_solve(
        g, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
  }

  // Fixed point omega = alpha(omega, t) where omega_dot vanishes.
  double turning_frequency(double guess, double t) const {
    double w = guess;
    for (int it = 0; it < 200; ++it) {
      const double next = alpha(w, t);
      if (!(next > 1e-8 * guess) || !std::isfinite(next)) {
        std::ostringstream os;
        os << "STE stroke demands a relaxation that no trap frequency supplies "
              "at t = "
           << t;
        throw InfeasibleStroke(os.str(), t);
      }
      if (std::abs(next - w) <= 1e-14 * w) return next;
      w = next;
    }
    return w;
  }
};

// Derivative of uniformly sampled data from a 7-point least-degree stencil
// (sixth order in the bulk, shifted one-sided stencils near the ends).
std::vector<double> differentiate_uniform(const std::vector<double>& f,
                                          double h) {
  const std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  if (n < 7) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = i == 0 ? 0 : i - 1;
      const std::size_t b = i + 1 < n ? i + 1 : n - 1;
      d[i] = b > a ? (f[b] - f[a]) / (h * static_cast<double>(b - a)) : 0.0;
    }
    return d;
  }
  // Fornberg weights for the first derivative at offset `x0` on nodes 0..6.
  auto weights = [](double x0) {
    std::array<std::array<double, 2>, 7> c{};
    double c1 = 1.0;
    double c4 = -x0;
    c[0][0] = 1.0;
    for (int i = 1; i < 7; ++i) {
      const int mn = std::min(i, 1);
      double c2 = 1.0;
      const double c5 = c4;
      c4 = static_cast<double>(i) - x0;
      for (int j = 0; j < i; ++j) {
        const double c3 = static_cast<double>(i - j);
        c2 *= c3;
        if (j == i - 1) {
          for (int k = mn; k >= 1; --k) {
            c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
          }
          c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
        }
        for (int k = mn; k >= 1; --k) {
          c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
        }
        c[j][0] = c4 * c[j][0] / c3;
      }
      c1 = c2;
    }
    std::array<double, 7> w{};
    for (int j = 0; j < 7; ++j) w[j] = c[j][1];
    return w;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t start = i < 3 ? 0 : (i + 3 >= n ? n - 7 : i - 3);
    const auto w = weights(static_cast<double>(i - start));
    double acc = 0.0;
    for (std::size_t j = 0; j < 7; ++j) acc += w[j] * f[start + j];
    d[i] = acc / h;
  }
  return d;
}

constexpr double kSteEndpointTolerance = 1e-3;

// omega* (t) = alpha(omega*, t) on the grid: the frequency at which the
// required relaxation is met with omega_dot = 0.
std::vector<double> quasi_steady_curve(const SteInversion& inv,
                                       const std::vector<double>& t,
                                       double omega_i) {
  std::vector<double> w(t.size());
  double guess = omega_i;
  for (std::size_t k = 0; k < t.size(); ++k) {
    guess = inv.turning_frequency(guess, t[k]);
    w[k] = guess;
  }
  return w;
}

// Node indices where omega* turns, classified as peaks (+1) or valleys (-1).
// Steps below round-off inherit the direction of their neighbours.
std::vector<std::pair<std::size_t, int>> turning_nodes(
    const std::vector<double>& w, int& first_direction) {
  const std::size_t n = w.size();
  std::vector<int> dir(n - 1, 0);
  double scale = 0.0;
  for (double v : w) scale = std::max(scale, v);
  const double eps = 1e-12 * scale;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double d = w[k + 1] - w[k];
    dir[k] = d > eps ? 1 : (d < -eps ? -1 : 0);
  }
  int last = 0;
  for (auto& d : dir) {
    if (d == 0) d = last;
    else last = d;
  }
  last = 0;
  for (std::size_t k = dir.size(); k-- > 0;) {
    if (dir[k] == 0) dir[k] = last;
    else last = dir[k];
  }
  first_direction = dir.empty() ? 0 : dir.front();
  std::vector<std::pair<std::size_t, int>> out;
  for (std::size_t k = 1; k < dir.size(); ++k) {
    if (dir[k] != dir[k - 1] && dir[k] != 0 && dir[k - 1] != 0) {
      out.emplace_back(k, dir[k - 1] > 0 ? 1 : -1);
    }
  }
  return out;
}

std::vector<double> slice_times(const std::vector<double>& t, std::size_t from,
                                std::size_t to) {
  std::vector<double> out;
  if (from <= to) {
    out.assign(t.begin() + static_cast<long>(from), t.begin() + static_cast<long>(to) + 1);
  } else {
    for (std::size_t k = from + 1; k-- > to;) out.push_back(t[k]);
  }
  return out;
}

struct Inversion {
  std::vector<double> omega;
  double mismatch = 0.0;  // largest relative gap at joints and free ends
  double stall = 0.0;
  double first_turn = 0.0;
  std::vector<std::size_t> joints;  // valley joints still to be bridged
};

// Replaces a window of 2 * half nodes around each joint by a quintic that
// matches value, slope and curvature on both sides.
std::vector<double> bridge_joints(const std::vector<double>& omega,
                                  const std::vector<double>& t,
                                  std::span<const std::size_t> joints,
                                  std::size_t half) {
  std::vector<double> out = omega;
  const std::size_t n = t.size();
  const double h = t[1] - t[0];
  for (std::size_t c : joints) {
    if (c < half + 4 || c + half + 4 >= n) continue;
    const std::size_t a = c - half;
    const std::size_t b = c + half;
    const auto slope = differentiate_uniform(out, h);
    const auto curv = differentiate_uniform(slope, h);
    const QuinticHermite bridge(t[b] - t[a], out[a], out[b], slope[a], slope[b],
                                curv[a], curv[b]);
    for (std::size_t k = a + 1; k < b; ++k) out[k] = bridge.value(t[k] - t[a]);
  }
  return out;
}

// Each monotone stretch of omega* is tracked in the direction in which the
// tracking branch is attracting: decreasing stretches forward in time
// (omega_dot < 0), increasing stretches backward (omega_dot > 0). Stretches
// start from omega_i, omega_f or a peak of omega*, and two stretches meeting
// in a valley are joined where they agree best and bridged by a quintic.
Inversion track_segments(const SteInversion& inv, const std::vector<double>& t,
                         double omega_i, double omega_f) {
  const std::size_t n = t.size();
  const auto star = quasi_steady_curve(inv, t, omega_i);
  int first_dir = 0;
  const auto turns = turning_nodes(star, first_dir);

  Inversion out;
  out.omega.assign(n, omega_i);
  if (first_dir == 0) {
    // omega* never moves: the protocol is static.
    for (std::size_t k = 0; k < n; ++k) out.omega[k] = star[k];
    out.mismatch = std::abs(omega_f - omega_i) / omega_f;
    return out;
  }
  out.first_turn = turns.empty() ? t.back() : t[turns.front().first];

  // Breakpoints: ends plus turning nodes, each with the direction of the
  // stretch that follows it.
  std::vector<std::size_t> nodes{0};
  for (const auto& tn : turns) nodes.push_back(tn.first);
  nodes.push_back(n - 1);
  const std::size_t segs = nodes.size() - 1;
  std::vector<int> seg_dir(segs);
  for (std::size_t j = 0; j < segs; ++j) {
    seg_dir[j] = j == 0 ? first_dir : -turns[j - 1].second;
  }

  // Tracked curve of each stretch, extended halfway into a neighbouring
  // stretch across a valley so that the two sides overlap there.
  struct Piece {
    std::size_t lo = 0, hi = 0;  // inclusive node range covered
    std::vector<double> w;       // indexed from lo
  };
  std::vector<Piece> pieces(segs);
  for (std::size_t j = 0; j < segs; ++j) {
    const std::size_t a = nodes[j];
    const std::size_t b = nodes[j + 1];
    Piece& p = pieces[j];
    if (seg_dir[j] < 0) {
      // Decreasing: start at a (omega_i or a peak), run forward past the
      // valley at b.
      const double start = a == 0 ? omega_i : star[a];
      std::size_t end = b;
      if (j + 1 < segs) end = b + (nodes[j + 2] - b) / 2;
      const auto w = inv.integrate(start, slice_times(t, a, end), -1.0);
      p.lo = a;
      p.hi = end;
      p.w = w;
    } else {
      // Increasing: start at b (omega_f or a peak), run backward past the
      // valley at a.
      const double start = b == n - 1 ? omega_f : star[b];
      std::size_t begin = a;
      if (j > 0) begin = a - (a - nodes[j - 1]) / 2;
      auto w = inv.integrate(start, slice_times(t, b, begin), +1.0);
      std::reverse(w.begin(), w.end());
      p.lo = begin;
      p.hi = b;
      p.w = w;
    }
  }
  auto at = [&](const Piece& p, std::size_t k) { return p.w[k - p.lo]; };

  // Assemble; joints at valleys are placed where the pieces agree best.
  std::vector<std::size_t> cut(segs + 1);
  cut[0] = 0;
  cut[segs] = n - 1;
  for (std::size_t j = 1; j < segs; ++j) {
    const std::size_t v = nodes[j];
    if (turns[j - 1].second > 0) {
      cut[j] = v;  // peak: both pieces start from star[v]
      continue;
    }
    const Piece& l = pieces[j - 1];
    const Piece& r = pieces[j];
    const std::size_t lo = std::max(l.lo, r.lo);
    const std::size_t hi = std::min(l.hi, r.hi);
    std::size_t best = v;
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t k = lo; k <= hi; ++k) {
      const double d = std::abs(at(l, k) - at(r, k)) / at(r, k);
      if (d < gap) {
        gap = d;
        best = k;
      }
    }
    cut[j] = best;
    out.mismatch = std::max(out.mismatch, gap);
  }
  for (std::size_t j = 0; j < segs; ++j) {
    for (std::size_t k = cut[j]; k <= cut[j + 1]; ++k) {
      out.omega[k] = at(pieces[j], k);
    }
  }
  // Remove the residual offsets: at a valley the right piece is tilted
  // linearly toward its own anchor; free ends are pinned the same way.
  for (std::size_t j = 1; j < segs; ++j) {
    if (turns[j - 1].second > 0) continue;
    const std::size_t c = cut[j];
    const std::size_t anchor = cut[j + 1];
    const double g = at(pieces[j - 1], c) - at(pieces[j], c);
    for (std::size_t k = c + 1; k <= anchor; ++k) {
      out.omega[k] += g * (t[anchor] - t[k]) / (t[anchor] - t[c]);
    }
    out.omega[c] = at(pieces[j - 1], c);
  }
  auto pin = [&](std::size_t end, std::size_t anchor, double target) {
    const double g = target - out.omega[end];
    out.mismatch = std::max(out.mismatch, std::abs(g) / target);
    if (anchor == end) return;
    for (std::size_t k = std::min(end, anchor); k <= std::max(end, anchor); ++k) {
      out.omega[k] += g * (t[k] - t[anchor]) / (t[end] - t[anchor]);
    }
  };
  if (seg_dir.front() > 0) pin(0, cut[1], omega_i);
  if (seg_dir.back() < 0) pin(n - 1, cut[segs - 1], omega_f);
  out.omega.front() = omega_i;
  out.omega.back() = omega_f;

  for (std::size_t j = 1; j < segs; ++j) {
    if (turns[j - 1].second < 0) out.joints.push_back(cut[j]);
  }

  for (std::size_t k = 0; k < n; ++k) {
    const double w = out.omega[k];
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InvalidProtocol("STE inversion reached omega <= 0", t[k]);
    }
    out.stall = std::max(out.stall, (inv.alpha(w, t[k]) - w) / w);
  }
  return out;
}

SteSolution invert_ste(const QuinticHermite& ypoly, double omega_i,
                       double omega_f, double t_f, const BathSpec& bath,
                       std::size_t points) {
  if (points < 16) throw DomainError("STE grid needs at least 16 points");
  const auto t = uniform_times(0.0, t_f, points);
  for (double ti : t) {
    const double yv = ypoly.value(ti);
    if (!(yv > 0.0 && yv < 1.0)) {
      throw InfeasibleStroke("STE schedule leaves y in (0, 1)", ti);
    }
  }
  const SteInversion inv{ypoly, bath};
  Inversion best = track_segments(inv, t, omega_i, omega_f);
  // A stalled stretch (alpha above omega) misses the schedule even when all
  // joints meet, so it counts like a 1e-3 gap.
  const double score = std::max(best.mismatch, 1e3 * best.stall);
  if (!(score <= kSteEndpointTolerance)) {
    std::ostringstream os;
    os << "STE inversion could not connect omega = " << omega_i << " to "
       << omega_f << " within " << t_f << " (relative mismatch "
       << best.mismatch << ", alpha excess " << best.stall << ")";
    throw ProtocolInversionFailure(os.str());
  }

  // The closed-form rate 2 omega sqrt(omega^2 - alpha^2) loses most of its
  // digits where omega tracks alpha closely, so omega_dot is read off the
  // tracked curve instead. Both ends are stationary by construction. Valley
  // joints are bridged over a window that widens until the grid passes the
  // derivative consistency check.
  const double h = t_f / static_cast<double>(points - 1);
  FrequencyProtocol protocol;
  std::vector<double> omega;
  bool smooth = false;
  std::string last_error;
  for (std::size_t div : {200, 100, 50, 25, 12}) {
    omega = best.joints.empty()
                ? best.omega
                : bridge_joints(best.omega, t, best.joints,
                                std::max<std::size_t>(8, points / div));
    std::vector<double> wd = differentiate_uniform(omega, h);
    wd.front() = 0.0;
    wd.back() = 0.0;
    protocol = FrequencyProtocol::grid(omega, std::move(wd), t_f);
    try {
      protocol.check_consistency();
      smooth = true;
      break;
    } catch (const NumericalError& e) {
      last_error = e.what();
      if (best.joints.empty()) break;
    }
  }
  if (!smooth) {
    throw ProtocolInversionFailure("STE inversion produced a non-smooth protocol: " +
                                   last_error);
  }

  SteSolution sol;
  sol.y_poly = ypoly;
  sol.bath = bath;
  sol.alpha.resize(points);
  sol.switch_time = best.first_turn;
  sol.branch_gap = best.mismatch;
  sol.max_stall = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    sol.alpha[i] = inv.alpha(omega[i], t[i]);
    sol.max_stall = std::max(sol.max_stall, (sol.alpha[i] - omega[i]) / omega[i]);
  }
  sol.protocol = std::move(protocol);
  return sol;
}

}  // namespace

SteSolution build_ste_protocol(double omega_initial, double omega_final,
                               double t_f, const BathSpec& bath,
                               std::size_t points) {
  bath.validate();
  if (!(omega_initial > 0.0) || !(omega_final > 0.0)) {
    throw DomainError("STE frequencies must be > 0");
  }
  if (!(t_f > 0.0)) throw DomainError("STE duration must be > 0");
  const double T = bath.temperature;
  const QuinticHermite y(t_f, std::exp(-kHbar * omega_initial / (kBoltzmann * T)),
                         std::exp(-kHbar * omega_final / (kBoltzmann * T)));
  SteSolution sol = invert_ste(y, omega_initial, omega_final, t_f, bath, points);
  sol.internal_temperature_initial = T;
  sol.internal_temperature_final = T;
  return sol;
}

namespace {

// Static relaxation beta_dot = F(beta) at frequency omega (alpha = omega,
// kappa = 2) and its slope dF/dbeta.
std::pair<double, double> static_relaxation(double omega, double beta,
                                            const BathSpec& bath) {
  const double x = kHbar * omega / (kBoltzmann * bath.temperature);
  const double n = 1.0 / std::expm1(x);
  const double k_down = 0.5 * omega * bath.coupling * (1.0 + n);
  const double k_up = 0.5 * omega * bath.coupling * n;
  return {k_down * std::expm1(beta) + k_up * std::expm1(-beta),
          k_down * std::exp(beta) - k_up * std::exp(-beta)};
}

}  // namespace

SteSolution build_ste_nonthermal_protocol(double omega_initial,
                                          double omega_final, double t_f,
                                          double internal_temperature,
                                          const BathSpec& bath,
                                          std::size_t points) {
  bath.validate();
  if (!(omega_initial > 0.0) || !(omega_final > 0.0)) {
    throw DomainError("STE frequencies must be > 0");
  }
  if (!(t_f > 0.0)) throw DomainError("STE duration must be > 0");
  if (!(internal_temperature > 0.0)) {
    throw DomainError("internal temperature must be > 0");
  }
  const double Ti = internal_temperature;
  const double b0 = -kHbar * omega_initial / (kBoltzmann * Ti);
  const double b1 = -kHbar * omega_final / (kBoltzmann * Ti);
  const double y0 = std::exp(b0);
  const double y1 = std::exp(b1);
  // Slopes follow the static relaxation; curvatures continue it
  // (beta_ddot = F'(beta) beta_dot), so that alpha is stationary at both ends
  // and omega_dot = 0 there is consistent with the tracking.
  const auto [f0, g0] = static_relaxation(omega_initial, b0, bath);
  const auto [f1, g1] = static_relaxation(omega_final, b1, bath);
  const double d0 = f0 * y0;
  const double d1 = f1 * y1;
  const double a0 = (g0 * f0 + f0 * f0) * y0;
  const double a1 = (g1 * f1 + f1 * f1) * y1;
  const QuinticHermite y(t_f, y0, y1, d0, d1, a0, a1);
  SteSolution sol = invert_ste(y, omega_initial, omega_final, t_f, bath, points);
  sol.internal_temperature_initial = Ti;
  sol.internal_temperature_final = Ti;
  return sol;
}

// ---------------------------------------------------------------------------
// Constant mu

double constant_mu_duration(double omega_initial, double omega_final,
                            double mu) {
  if (!(omega_initial > 0.0) || !(omega_final > 0.0)) {
    throw DomainError("constant-mu frequencies must be > 0");
  }
  if (omega_initial == omega_final) return 0.0;
  if (mu == 0.0) throw DomainError("mu = 0 cannot change the frequency");
  const double tau = (omega_final - omega_initial) / (mu * omega_final * omega_initial);
  if (!(tau > 0.0)) {
    throw DomainError(
        "sign of mu does not match the frequency change (the protocol pole "
        "would be crossed); use mu < 0 for expansion and mu > 0 for "
        "compression");
  }
  return tau;
}

FrequencyProtocol build_constant_mu_protocol(double omega_initial,
                                             double omega_final, double mu) {
  if (!(std::abs(mu) < 2.0)) throw DomainError("constant-mu protocol needs |mu| < 2");
  const double tau = constant_mu_duration(omega_initial, omega_final, mu);
  return FrequencyProtocol::constant_mu(omega_initial, mu, tau);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_protocol(std::ostream& os, const FrequencyProtocol& protocol,
                    const nlohmann::json& header) {
  os << "# " << header.dump() << '\n';
  os << "t,omega,omega_dot,mu\n";
  if (protocol.duration() == 0.0) {
    const double w = protocol.omega(0.0);
    const double wd = protocol.omega_dot(0.0);
    os << fmt17(0.0) << ',' << fmt17(w) << ',' << fmt17(wd) << ','
       << fmt17(wd / (w * w)) << '\n';
    return;
  }
  const FrequencyProtocol grid =
      protocol.kind() == FrequencyProtocol::Kind::Grid
          ? protocol
          : protocol.sampled(kDefaultProtocolPoints);
  const auto w = grid.omega_samples();
  const auto wd = grid.omega_dot_samples();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << fmt17(grid.time_at(i)) << ',' << fmt17(w[i]) << ',' << fmt17(wd[i])
       << ',' << fmt17(wd[i] / (w[i] * w[i])) << '\n';
  }
}

ProtocolRecord read_protocol(std::istream& is) {
  std::string line;
  nlohmann::json header = nlohmann::json::object();
  if (!std::getline(is, line)) throw ConfigError("empty protocol file");
  if (line.rfind("# ", 0) == 0) {
    try {
      header = nlohmann::json::parse(line.substr(2));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad protocol header: ") + e.what());
    }
    if (!std::getline(is, line)) throw ConfigError("protocol table missing");
  }
  if (line != "t,omega,omega_dot,mu") {
    throw ConfigError("unexpected protocol columns: " + line);
  }
  std::vector<double> t;
  std::vector<double> w;
  std::vector<double> wd;
  std::vector<double> mu;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::array<double, 4> row{};
    const char* p = line.c_str();
    for (int k = 0; k < 4; ++k) {
      char* end = nullptr;
      row[k] = std::strtod(p, &end);
      if (end == p) throw ConfigError("malformed protocol row: " + line);
      p = end;
      if (k < 3) {
        if (*p != ',') throw ConfigError("malformed protocol row: " + line);
        ++p;
      }
    }
    t.push_back(row[0]);
    w.push_back(row[1]);
    wd.push_back(row[2]);
    mu.push_back(row[3]);
  }
  if (t.empty()) throw ConfigError("protocol table has no rows");
  if (t.size() == 1) {
    return {FrequencyProtocol::constant_mu(w[0], mu[0], 0.0), header};
  }
  return {FrequencyProtocol::grid(std::move(w), std::move(wd), t.back()), header};
}

}  // namespace qcarnot
