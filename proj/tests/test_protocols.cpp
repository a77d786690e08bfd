#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "qcarnot/dynamics.hpp"
#include "qcarnot/protocols.hpp"

using namespace qcarnot;
using doctest::Approx;

namespace {

// Reversible isothermal work between Gibbs states: the free-energy change.
double free_energy(double omega, double t) {
  return 0.5 * omega + t * std::log(-std::expm1(-omega / t));
}

double open_work(const SteSolution& s, double omega0, const BathSpec& bath,
                 double t_start) {
  PropagationOptions o;
  o.output_points = 401;
  auto tr = propagate_open(thermal_observable_vector(omega0, t_start), s.protocol, bath, o);
  return tr.work.back();
}

}  // namespace

TEST_CASE("quintic boundary data") {
  QuinticHermite q(2.0, 1.0, 3.0, 0.5, -0.25, 0.1, 0.2);
  CHECK(q.value(0) == Approx(1.0));
  CHECK(q.value(2) == Approx(3.0));
  CHECK(q.d1(0) == Approx(0.5));
  CHECK(q.d1(2) == Approx(-0.25));
  CHECK(q.d2(0) == Approx(0.1));
  CHECK(q.d2(2) == Approx(0.2));
  const double h = 1e-5;
  CHECK(q.d1(0.7) == Approx((q.value(0.7 + h) - q.value(0.7 - h)) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("STA: identity protocol") {
  auto s = build_sta_protocol(5, 5, 3.0);
  for (double t : {0.0, 0.4, 1.7, 3.0}) {
    CHECK(s.protocol.omega(t) == Approx(5.0).epsilon(1e-13));
    CHECK(std::abs(s.protocol.omega_dot(t)) < 1e-12);
  }
}

TEST_CASE("STA: Ermakov boundary conditions") {
  auto s = build_sta_protocol(6.25, 5, 5);
  const auto& e = s.ermakov;
  CHECK(e.rho(0) == Approx(1 / std::sqrt(6.25)).epsilon(1e-14));
  CHECK(e.rho(5) == Approx(1 / std::sqrt(5.0)).epsilon(1e-14));
  for (double t : {0.0, 5.0}) {
    CHECK(std::abs(e.rho_dot(t)) < 1e-10);
    CHECK(std::abs(e.rho_ddot(t)) < 1e-10);
  }
  CHECK(s.protocol.omega(0) == Approx(6.25).epsilon(1e-10));
  CHECK(s.protocol.omega(5) == Approx(5.0).epsilon(1e-10));
  // The quintic fixes rho, rho_dot and rho_ddot only, so the end rates
  // follow from rho_dddot.
  for (double t : {0.0, 5.0}) {
    CHECK(s.protocol.omega_dot(t) ==
          Approx(-e.rho_dddot(t) / (2.0 * s.protocol.omega(t) * e.rho(t))).epsilon(1e-10));
  }
  for (int i = 0; i <= 100; ++i) CHECK(e.rho(0.05 * i) > 0.0);
  CHECK_NOTHROW(s.protocol.check_consistency());
}

TEST_CASE("STA: repulsive trap is refused") {
  bool thrown = false;
  try {
    build_sta_protocol(10, 2, 0.1);
  } catch (const InvalidProtocol& e) {
    thrown = true;
    CHECK(e.time() > 0.0);
    CHECK(e.time() < 0.1);
  }
  CHECK(thrown);
}

TEST_CASE("STA: closed-form moments") {
  auto s = build_sta_protocol(5, 10, 5);
  auto v0 = thermal_observable_vector(5, 5);
  auto a = sta_expectation_values(s.ermakov, 5, 5, 0.0);
  CHECK(a.h == Approx(v0.h).epsilon(1e-14));
  CHECK(std::abs(a.l) < 1e-14 * v0.h);
  CHECK(std::abs(a.c) < 1e-14 * v0.h);

  auto b = sta_expectation_values(s.ermakov, 5, 5, 5.0);
  CHECK(b.h == Approx(2.0 * v0.h).epsilon(1e-12));
  CHECK(std::abs(b.l) < 1e-10 * b.h);
  CHECK(std::abs(b.c) < 1e-10 * b.h);
  CHECK_THROWS_AS(sta_expectation_values(s.ermakov, 5, 5, 5.5), DomainError);

  // Independent check: numerical Heisenberg propagation of the same state.
  PropagationOptions o;
  o.output_points = 101;
  o.tol = {1e-14, 1e-13};
  auto tr = propagate_unitary(v0, s.protocol, o);
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    auto c = sta_expectation_values(s.ermakov, 5, 5, tr.times[i]);
    const auto& v = tr.vectors[i];
    worst = std::max({worst, std::abs(c.h - v.h) / c.h, std::abs(c.l - v.l) / c.h,
                      std::abs(c.c - v.c) / c.h});
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("STA: frictionless contract over random strokes") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> w(4.0, 12.0), tf(2.0, 8.0), temp(1.0, 10.0);
  for (int k = 0; k < 10; ++k) {
    const double wi = w(rng), wf = w(rng), T = temp(rng);
    auto s = build_sta_protocol(wi, wf, tf(rng));
    CHECK_NOTHROW(s.protocol.check_consistency());
    auto v0 = thermal_observable_vector(wi, T);
    auto tr = propagate_unitary(v0, s.protocol);
    const auto& v = tr.back();
    CHECK(std::abs(v.l) < 1e-6 * v.h);
    CHECK(std::abs(v.c) < 1e-6 * v.h);
    CHECK(v.h == Approx(v0.h * wf / wi).epsilon(1e-6));
  }
}

TEST_CASE("STE: equal frequencies give a constant protocol") {
  BathSpec bath{6.0, 0.05};
  auto s = build_ste_protocol(7, 7, 4, bath, 801);
  for (double t : {0.0, 1.0, 2.5, 4.0}) {
    CHECK(s.protocol.omega(t) == Approx(7.0).epsilon(1e-12));
    CHECK(s.y(t) == Approx(std::exp(-7.0 / 6.0)).epsilon(1e-14));
  }
}

TEST_CASE("STE: open expansion 10 -> 8 at T = 8") {
  BathSpec bath{8.0, 0.05};
  auto s = build_ste_protocol(10, 8, 20, bath);
  CHECK_NOTHROW(s.protocol.check_consistency());
  CHECK(s.protocol.omega(0) == Approx(10.0).epsilon(1e-12));
  CHECK(s.protocol.omega(20) == Approx(8.0).epsilon(1e-3));
  CHECK(s.beta(0) == Approx(-1.25).epsilon(1e-12));
  CHECK(s.beta(20) == Approx(-1.0).epsilon(1e-12));

  const auto t = s.protocol.size();
  for (std::size_t i = 0; i < t; i += 50) {
    const double y = s.y(s.protocol.time_at(i));
    CHECK(y > 0.0);
    CHECK(y < 1.0);
    CHECK(s.alpha[i] <= s.protocol.omega_samples()[i] * (1 + 1e-12));
  }

  // The reduced beta equation reproduces the schedule.
  PropagationOptions o;
  o.output_points = 2001;
  auto bt = propagate_ste_beta(-1.25, s.protocol, bath, o);
  double worst = 0.0;
  for (std::size_t i = 0; i < bt.times.size(); ++i) {
    worst = std::max(worst, std::abs(std::exp(bt.betas[i]) - s.y(bt.times[i])));
  }
  CHECK(worst < 1e-6);
  CHECK(bt.betas.back() == Approx(-1.0).epsilon(1e-6));

  // Full moment propagation lands on the target Gibbs state.
  auto tr = propagate_open(thermal_observable_vector(10, 8), s.protocol, bath);
  const auto& v = tr.back();
  const auto target = thermal_observable_vector(8, 8);
  CHECK(v.h == Approx(target.h).epsilon(1e-3));
  CHECK(std::abs(v.l) < 1e-3 * v.h);
  CHECK(std::abs(v.c) < 1e-3 * v.h);
}

TEST_CASE("STE: open compression 5 -> 6.25 at T = 5") {
  BathSpec bath{5.0, 0.05};
  auto s = build_ste_protocol(5, 6.25, 10, bath);
  CHECK_NOTHROW(s.protocol.check_consistency());
  CHECK(s.protocol.omega(10) == Approx(6.25).epsilon(1e-3));
  auto tr = propagate_open(thermal_observable_vector(5, 5), s.protocol, bath);
  CHECK(tr.back().h == Approx(thermal_observable_vector(6.25, 5).h).epsilon(1e-3));
}

TEST_CASE("STE: a stroke too short for the bath is infeasible") {
  BathSpec bath{8.0, 0.05};
  CHECK_THROWS_AS(build_ste_protocol(10, 8, 0.5, bath), InfeasibleStroke);
}

TEST_CASE("STE: shorter strokes demand more driving") {
  BathSpec bath{8.0, 0.05};
  double prev = 0.0;
  for (double tf : {40.0, 20.0, 10.0, 5.0}) {
    auto s = build_ste_protocol(10, 8, tf, bath);
    const double a = s.protocol.integrated_abs_mu();
    CHECK(a > prev);
    prev = a;
  }
}

TEST_CASE("STE: excess work falls as 1/t_f") {
  BathSpec bath{8.0, 0.05};
  const double dF = free_energy(8, 8) - free_energy(10, 8);
  std::vector<double> lx, ly;
  double prev = 1e300;
  for (double tf : {25.0, 50.0, 100.0, 250.0}) {
    auto s = build_ste_protocol(10, 8, tf, bath);
    const double excess = open_work(s, 10, bath, 8) - dF;
    CHECK(excess > 0.0);
    CHECK(excess < prev);
    prev = excess;
    lx.push_back(std::log(tf));
    ly.push_back(std::log(excess));
  }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  MESSAGE("excess work log-log slope " << slope);
  CHECK(slope == Approx(-1.0).epsilon(0.15));
}

TEST_CASE("STE non-thermal: thermal limit and relaxation sign") {
  BathSpec bath{8.0, 0.05};
  auto a = build_ste_protocol(10, 8, 10, bath, 1001);
  auto b = build_ste_nonthermal_protocol(10, 8, 10, 8.0, bath, 1001);
  for (std::size_t i = 0; i < a.protocol.size(); i += 20) {
    CHECK(b.protocol.omega_samples()[i] == Approx(a.protocol.omega_samples()[i]).epsilon(1e-12));
  }
  CHECK(std::abs(b.beta_dot(0)) < 1e-14);

  BathSpec cooler{7.75, 0.05};
  auto c = build_ste_nonthermal_protocol(10, 8, 10, 8.0, cooler, 1001);
  CHECK(c.beta_dot(0) < 0.0);
  CHECK(c.beta_dot(10) < 0.0);
}

TEST_CASE("STE non-thermal: endo-shortcut expansion keeps the internal temperature") {
  BathSpec bath{7.75, 0.05};
  auto s = build_ste_nonthermal_protocol(10, 8, 20, 8.0, bath);
  CHECK_NOTHROW(s.protocol.check_consistency());
  CHECK(std::abs(s.protocol.omega_dot(0)) < 1e-9);
  CHECK(std::abs(s.protocol.omega_dot(20)) < 1e-9);
  auto tr = propagate_open(thermal_observable_vector(10, 8), s.protocol, bath);
  const auto& v = tr.back();
  CHECK(v.h == Approx(thermal_observable_vector(8, 8).h).epsilon(1e-3));
  CHECK(std::abs(v.l) < 1e-3 * v.h);
  CHECK(std::abs(v.c) < 1e-3 * v.h);
}

TEST_CASE("constant mu protocol") {
  const double tau = 2.0 * to_atomic_time(1.0);
  const double mu = (7.75 - 9.6875) / (tau * 7.75 * 9.6875);
  auto p = build_constant_mu_protocol(9.6875, 7.75, mu);
  CHECK(p.duration() == Approx(tau).epsilon(1e-14));
  CHECK(p.omega(p.duration()) == Approx(7.75).epsilon(1e-14));
  CHECK(constant_mu_duration(9.6875, 7.75, mu) == Approx(tau).epsilon(1e-14));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-3, 1.0 - 1e-3);
  for (int k = 0; k < 100; ++k) {
    const double t = u(rng) * tau;
    CHECK(p.mu(t) == Approx(mu).epsilon(1e-12));
    // Differentiate the closed form numerically.
    const double h = 1e-5;
    const double wd = (p.omega(t + h) - p.omega(t - h)) / (2 * h);
    CHECK(wd / (p.omega(t) * p.omega(t)) == Approx(mu).epsilon(1e-7));
  }
  CHECK(constant_mu_duration(6, 6, 0.1) == 0.0);
  CHECK(build_constant_mu_protocol(6, 6, 0.1).duration() == 0.0);
  CHECK_THROWS_AS(build_constant_mu_protocol(9.6875, 7.75, -mu), DomainError);
  CHECK_THROWS_AS(build_constant_mu_protocol(9.6875, 7.75, -2.5), DomainError);
  CHECK_NOTHROW(p.sampled(2001).check_consistency());
}

TEST_CASE("frequency protocol consistency check") {
  std::vector<double> w(101), wd(101);
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.01 * i;
    w[i] = 5 + std::sin(t);
    wd[i] = std::cos(t);
  }
  auto good = FrequencyProtocol::grid(w, wd, 1.0);
  CHECK_NOTHROW(good.check_consistency(1e-6));
  wd[50] *= 1.01;
  auto bad = FrequencyProtocol::grid(w, wd, 1.0);
  CHECK_THROWS_AS(bad.check_consistency(1e-6), NumericalError);
  w[10] = -1.0;
  CHECK_THROWS_AS(FrequencyProtocol::grid(w, wd, 1.0), InvalidProtocol);
}

TEST_CASE("protocol serialization round trip") {
  BathSpec bath{5.0, 0.05};
  auto s = build_ste_protocol(5, 6.25, 8, bath, 1001);
  nlohmann::json hdr = {{"builder", "ste"}, {"omega_initial", 5}, {"omega_final", 6.25}};
  std::ostringstream a;
  write_protocol(a, s.protocol, hdr);
  std::istringstream in(a.str());
  auto rec = read_protocol(in);
  CHECK(rec.header == hdr);
  REQUIRE(rec.protocol.size() == s.protocol.size());
  for (std::size_t i = 0; i < rec.protocol.size(); ++i) {
    CHECK(rec.protocol.omega_samples()[i] == s.protocol.omega_samples()[i]);
    CHECK(rec.protocol.omega_dot_samples()[i] == s.protocol.omega_dot_samples()[i]);
  }
  std::ostringstream b;
  write_protocol(b, rec.protocol, rec.header);
  CHECK(a.str() == b.str());

  std::istringstream junk("# {}\nt,omega\n1,2\n");
  CHECK_THROWS_AS(read_protocol(junk), ConfigError);
}
