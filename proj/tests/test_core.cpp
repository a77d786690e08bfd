#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qcarnot/core.hpp"

using namespace qcarnot;
using doctest::Approx;

TEST_CASE("thermal population") {
  const double one_over_e_minus_1 = 1.0 / (std::exp(1.0) - 1.0);
  CHECK(thermal_population(5, 5) == Approx(one_over_e_minus_1).epsilon(1e-14));
  CHECK(thermal_population(8, 8) == Approx(one_over_e_minus_1).epsilon(1e-14));
  CHECK(thermal_population(5, 5) == Approx(0.58198).epsilon(1e-5));
  CHECK(thermal_population(1e4, 1.0) == 0.0);
  CHECK_THROWS_AS(thermal_population(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(thermal_population(1.0, -1.0), DomainError);
}

TEST_CASE("thermal observable vector") {
  auto v = thermal_observable_vector(5, 5);
  CHECK(v.h == Approx(5.4099).epsilon(1e-5));
  CHECK(v.l == 0.0);
  CHECK(v.c == 0.0);
  CHECK(v.id == 1.0);

  // 10 * (1/(e^1.25 - 1) + 1/2); e^1.25 = 3.490342957...
  auto w = thermal_observable_vector(10, 8);
  CHECK(w.h == Approx(10.0 * (1.0 / 2.490342957462535 + 0.5)).epsilon(1e-12));

  auto g = thermal_observable_vector(3, 1e-3);
  CHECK(g.h == Approx(1.5).epsilon(1e-15));

  for (double t : {0.5, 1.0, 5.0, 50.0}) {
    auto u = thermal_observable_vector(4.0, t);
    CHECK(u.is_physical(4.0));
    CHECK(u.casimir() >= 4.0);
  }
}

TEST_CASE("physicality check") {
  ObservableVector ground{2.5, 0.0, 0.0, 1.0};
  CHECK(ground.is_physical(5.0));
  ObservableVector below{2.4, 0.0, 0.0, 1.0};
  CHECK_FALSE(below.is_physical(5.0));
  ObservableVector too_coherent{3.0, 2.5, 2.0, 1.0};
  CHECK_FALSE(too_coherent.is_physical(1.0));
}

TEST_CASE("generalized Gibbs round trip") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> beta(-4.0, -0.05), mu(-1.5, 1.5),
      om(1.0, 12.0);
  for (int k = 0; k < 200; ++k) {
    GeneralizedGibbsState g{beta(rng), k % 2 ? 0.0 : mu(rng), om(rng)};
    auto v = g.to_observables();
    CHECK(v.is_physical(g.omega));
    auto back = GeneralizedGibbsState::from_observables(v, g.omega);
    CHECK(back.beta == Approx(g.beta).epsilon(1e-12));
    CHECK(back.mu == Approx(g.mu).epsilon(1e-12));
  }
  auto th = GeneralizedGibbsState::thermal(5, 5);
  CHECK(th.beta == -1.0);
  CHECK(th.occupation() == Approx(thermal_population(5, 5)).epsilon(1e-14));
  auto v = th.to_observables();
  CHECK(v.h == Approx(thermal_observable_vector(5, 5).h).epsilon(1e-14));

  ObservableVector with_l{6.0, 0.5, 0.0, 1.0};
  CHECK_THROWS_AS(GeneralizedGibbsState::from_observables(with_l, 5.0), DomainError);
}

TEST_CASE("units") {
  UnitSystem u;
  CHECK_NOTHROW(u.validate());
  u.hbar = 2.0;
  CHECK_THROWS_AS(u.validate(), ConfigError);
  CHECK(to_reporting_time(to_atomic_time(17.5)) == Approx(17.5));
  CHECK(to_atomic_time(1.0) == Approx(2.0 * kPi / 5.0));
}

TEST_CASE("cycle spec validation") {
  CycleSpec s;  // carnot corners 10, 8, 5, 6.25
  CHECK_NOTHROW(s.validate());
  CHECK(s.cycle_time() == Approx(30.0));

  CycleSpec lit = s;
  lit.omega2 = 6.25;
  lit.omega4 = 7.5;
  CHECK_THROWS_AS(lit.validate(true), ConfigError);
  CHECK_NOTHROW(lit.validate(false));

  CycleSpec bad = s;
  bad.omega1 = 7.9;
  bad.omega2 = 7.0;
  bad.omega4 = 6.0;
  CHECK_THROWS_AS(bad.validate(false), ConfigError);

  auto t = s.with_cycle_time(to_atomic_time(250));
  CHECK(t.cycle_time() == Approx(to_atomic_time(250)).epsilon(1e-14));
  CHECK_THROWS_AS(s.with_cycle_time(9.0), ConfigError);

  CycleSpec g;
  g.kind = CycleKind::EndoGlobal;
  g.omega1 = 9.6875;
  g.omega2 = 7.75;
  g.omega3 = 5.25;
  g.omega4 = 6.5625;
  auto gt = g.with_cycle_time(to_atomic_time(8));
  CHECK(gt.cycle_time() == Approx(to_atomic_time(8)).epsilon(1e-14));
  CHECK_NOTHROW(gt.validate());

  CHECK(cycle_kind_from_string("endo-global") == CycleKind::EndoGlobal);
  CHECK(to_string(CycleKind::EndoShortcut) == "endo-shortcut");
  CHECK_THROWS_AS(cycle_kind_from_string("otto"), ConfigError);
}
