#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "qcarnot/presets.hpp"
#include "qcarnot/protocols.hpp"
#include "qcarnot/thermo.hpp"

using namespace qcarnot;
using doctest::Approx;

namespace {

CycleSpec at(const char* name, double tau_units) {
  return preset(name).with_cycle_time(to_atomic_time(tau_units));
}

CycleLedger ledger_at(const char* name, double tau_units) {
  auto s = at(name, tau_units);
  return analyze_cycle(run_to_limit_cycle(s), s);
}

double thermal_entropy(double x) {
  // Bose gas entropy at hbar omega / k_B T = x, written independently of
  // the symplectic-invariant route.
  return x / std::expm1(x) - std::log(-std::expm1(-x));
}

void check_first_law(const CycleLedger& L) {
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    CHECK(L.energy_change[k] ==
          Approx(L.work_per_stroke[k] + L.heat_per_stroke[k]).epsilon(1e-8).scale(1.0));
    sum += L.work_per_stroke[k];
  }
  CHECK(L.total_work == Approx(sum).epsilon(1e-14));
  const double de = L.energy_change[0] + L.energy_change[1] + L.energy_change[2] + L.energy_change[3];
  CHECK(std::abs(de) < 1e-8 * 10.0);
}

}  // namespace

TEST_CASE("coherence") {
  CHECK(coherence({5, 0, 0, 1}, 5) == 0.0);
  CHECK(coherence({9, 3, 4, 1}, 5) == Approx(1.0).epsilon(1e-15));
  // Free rotation at mu = 0 leaves the measure unchanged.
  ObservableVector v{9, 1.2, -0.4, 1};
  auto u = free_propagator(5, 0.0, 0.3);
  Eigen::Vector4d x = u * Eigen::Vector4d(v.h, v.l, v.c, 1);
  CHECK(coherence({x[0], x[1], x[2], 1}, 5) == Approx(coherence(v, 5)).epsilon(1e-14));
}

TEST_CASE("entropy") {
  CHECK(std::abs(von_neumann_entropy({2.5, 0, 0, 1}, 5)) < 1e-12);
  // 1.58198 ln 1.58198 - 0.58198 ln 0.58198
  CHECK(von_neumann_entropy(thermal_observable_vector(5, 5), 5) == Approx(1.0406519).epsilon(1e-7));
  for (double x : {0.3, 1.0, 1.25, 4.0}) {
    CHECK(von_neumann_entropy(thermal_observable_vector(x * 3, 3), x * 3) ==
          Approx(thermal_entropy(x)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(von_neumann_entropy({2.0, 0, 0, 1}, 5), DomainError);

  // Unitary strokes are isoentropic.
  auto sta = build_sta_protocol(10, 5, 3);
  ObservableVector sq{9.0, 2.0, -3.0, 1.0};
  auto tr = propagate_unitary(sq, sta.protocol);
  const double s0 = von_neumann_entropy(sq, 10);
  for (std::size_t i = 0; i < tr.size(); i += 50) {
    CHECK(von_neumann_entropy(tr.vectors[i], tr.omegas[i]) == Approx(s0).epsilon(1e-8));
  }
}

TEST_CASE("work and heat") {
  auto flat = propagate_open({7, 0.2, 0.1, 1}, FrequencyProtocol::constant(5, 10), {3.0, 0.05});
  CHECK(stroke_work(flat) == 0.0);
  CHECK(quadrature_work(flat) == 0.0);
  // Hot state relaxing into a cold bath gives heat away.
  CHECK(stroke_heat(flat, 0.0) < 0.0);

  auto sta = build_sta_protocol(5, 10, 5);
  PropagationOptions o;
  o.output_points = 4001;
  auto tr = propagate_unitary(thermal_observable_vector(5, 5), sta.protocol, o);
  const double w = stroke_work(tr);
  CHECK(w == Approx(5.40988).epsilon(1e-6));
  CHECK(w == Approx(tr.back().h - tr.front().h).epsilon(1e-9));
  CHECK(std::abs(stroke_heat(tr, w)) < 1e-9);
  // Integrand route on the stored grid against the integrator's channel.
  CHECK(quadrature_work(tr) == Approx(w).epsilon(1e-7));

  // Slow STE stroke: heat approaches T Delta S of the corner Gibbs states.
  BathSpec bath{8.0, 0.05};
  auto ste = build_ste_protocol(10, 8, 500, bath);
  auto t2 = propagate_open(thermal_observable_vector(10, 8), ste.protocol, bath);
  const double q = stroke_heat(t2, stroke_work(t2));
  const double tds = 8.0 * (thermal_entropy(1.0) - thermal_entropy(1.25));
  CHECK(q == Approx(tds).epsilon(0.01));
  CHECK(q < tds);
}

TEST_CASE("ideal Carnot work") {
  auto g = carnot_corner_frequencies(5, 2, 5, 8);
  std::string warn;
  const double wc = ideal_carnot_work(g, 5, 8, &warn);
  CHECK(warn.empty());
  CHECK(wc < 0.0);
  // Independent route: reversible Carnot work -(T_h - T_c) Delta S.
  const double ds = thermal_entropy(g.omega2 / 8.0) - thermal_entropy(g.omega1 / 8.0);
  CHECK(wc == Approx(-(8.0 - 5.0) * ds).epsilon(1e-12));

  // High temperature: n ~ T/omega, the frequency terms cancel and
  // W_C -> -k_B T_h eta_C ln(C T_c / T_h).
  auto hg = carnot_corner_frequencies(5, 2, 500, 800);
  const double whi = ideal_carnot_work(hg, 500, 800);
  const double eta = carnot_efficiency(500, 800);
  CHECK(whi / (-800 * eta * std::log(2.0 * 5.0 / 8.0)) == Approx(1.0).epsilon(0.01));

  ideal_carnot_work(g, 6, 6, &warn);
  CHECK_FALSE(warn.empty());
}

TEST_CASE("friction action fit") {
  std::vector<std::pair<double, double>> d;
  for (double tau : {10.0, 20.0, 40.0, 80.0}) d.emplace_back(tau, -2 + 7 / tau);
  auto f = friction_action_fit(d);
  CHECK(f.w_infinity == Approx(-2.0).epsilon(1e-12));
  CHECK(f.friction_action == Approx(7.0).epsilon(1e-12));
  CHECK(f.residual < 1e-12);
  std::vector<std::pair<double, double>> same{{5, 1}, {5, 2}, {5, 3}};
  CHECK_THROWS_AS(friction_action_fit(same), DomainError);
  CHECK_THROWS_AS(friction_action_fit(std::span(d).first(2)), DomainError);
}

TEST_CASE("ledger: long Carnot shortcut approaches the Carnot efficiency") {
  auto L = ledger_at("carnot-shortcut", 1000);
  CHECK(L.operational_mode == OperationalMode::Engine);
  CHECK(L.efficiency == Approx(0.375).epsilon(0.02));
  CHECK(L.efficiency < 0.375);
  CHECK(L.bath_entropy_flow <= 0.0);
  check_first_law(L);
}

TEST_CASE("ledger: short Carnot shortcut dissipates") {
  auto L = ledger_at("carnot-shortcut", 17.5);
  CHECK(L.operational_mode == OperationalMode::Dissipator);
  CHECK(L.total_work > 0.0);
  CHECK(L.power < 0.0);
  CHECK(L.bath_entropy_flow <= 0.0);
  check_first_law(L);
}

TEST_CASE("ledger: endo-global at tau = 8 is an engine with global coherence") {
  auto L = ledger_at("endo-global", 8);
  CHECK(L.operational_mode == OperationalMode::Engine);
  CHECK(L.power > 0.0);
  CHECK(L.efficiency > 0.0);
  CHECK(L.efficiency < carnot_efficiency(5, 8));
  CHECK(L.min_coherence > 0.0);
  CHECK(L.bath_entropy_flow <= 0.0);
  check_first_law(L);
}

TEST_CASE("sweeps") {
  auto tmpl = preset("carnot-shortcut");
  const std::vector<double> taus{5.0, 30.0, 60.0, 120.0};
  SweepOptions o;
  o.jobs = 2;
  auto rows = sweep(tmpl, SweepAxis::CycleTime, taus, o);
  REQUIRE(rows.size() == 4);
  CHECK_FALSE(rows[0].ledger);
  CHECK(rows[0].error.rfind("ConfigError", 0) == 0);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].ledger);
    CHECK(rows[i].value == taus[i]);
  }
  CHECK(rows[2].ledger->efficiency > rows[1].ledger->efficiency);
  CHECK(rows[3].ledger->efficiency > rows[2].ledger->efficiency);

  // Parallel and serial runs give identical tables.
  auto serial = sweep(tmpl, SweepAxis::CycleTime, taus);
  std::ostringstream a, b;
  write_sweep_csv(a, SweepAxis::CycleTime, rows);
  write_sweep_csv(b, SweepAxis::CycleTime, serial);
  CHECK(a.str() == b.str());

  auto deph = sweep(at("endo-global", 8), SweepAxis::Dephasing, std::vector<double>{0.0, 0.01, 0.1});
  CHECK(deph[1].ledger->efficiency < deph[0].ledger->efficiency);
  CHECK(deph[2].ledger->efficiency < deph[1].ledger->efficiency);

  auto cr = apply_sweep_value(tmpl, SweepAxis::CompressionRatio, 2.5);
  CHECK(cr.omega1 == 12.5);
  CHECK_NOTHROW(cr.validate(true));
  CHECK_THROWS_AS(apply_sweep_value(tmpl, SweepAxis::CompressionRatio, 1.5), ConfigError);
  CHECK(sweep_axis_from_string("dephasing") == SweepAxis::Dephasing);
}

TEST_CASE("content hash") {
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}
