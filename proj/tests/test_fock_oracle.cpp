#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "qcarnot/dynamics.hpp"
#include "qcarnot/fock_oracle.hpp"
#include "qcarnot/protocols.hpp"

using namespace qcarnot;
using doctest::Approx;

namespace {

void check_state(const FockState& s) {
  CHECK(s.hermiticity_error() < 1e-12);
  CHECK(s.trace_error() < 1e-10);
  CHECK(s.min_eigenvalue() > -1e-10);
  CHECK(s.leakage() < 1e-6);
}

void check_close(const ObservableVector& a, const ObservableVector& b, double tol) {
  CHECK(a.h == Approx(b.h).epsilon(tol));
  CHECK(std::abs(a.l - b.l) < tol * b.h);
  CHECK(std::abs(a.c - b.c) < tol * b.h);
}

}  // namespace

TEST_CASE("jump operator") {
  const std::size_t d = 12;
  auto b = build_jump_operator(5.0, 0.0, d);
  ComplexMatrix a = ComplexMatrix::Zero(d, d);
  for (std::size_t n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  CHECK((b - a).cwiseAbs().maxCoeff() < 1e-12);

  ComplexMatrix bdb = b.adjoint() * b;
  CHECK(std::abs(bdb(0, 0)) < 1e-14);

  for (double mu : {0.0, 0.7, -1.3}) {
    auto bm = build_jump_operator(6.0, mu, 40);
    ComplexMatrix comm = bm * bm.adjoint() - bm.adjoint() * bm;
    const long bulk = 40 - 4;  // b couples n to n +- 1 in this basis
    ComplexMatrix defect = comm.topLeftCorner(bulk, bulk) - ComplexMatrix::Identity(bulk, bulk);
    CHECK(defect.cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(build_jump_operator(5.0, 0.0, 3), DomainError);
  CHECK_THROWS_AS(build_jump_operator(5.0, 2.0, 10), DomainError);
}

TEST_CASE("initial states") {
  auto th = FockState::thermal(5.0, 5.0, 40);
  check_state(th);
  auto ops = FockOperators::build(5.0, 40);
  check_close(fock_moments(th.rho, ops, 5.0), thermal_observable_vector(5, 5), 1e-12);

  GeneralizedGibbsState g{-1.1, 0.6, 7.0};
  auto gg = FockState::generalized_gibbs(g, 40);
  check_state(gg);
  auto ops7 = FockOperators::build(7.0, 40);
  check_close(fock_moments(gg.rho, ops7, 7.0), g.to_observables(), 1e-10);

  auto big = th.embedded(80);
  CHECK(big.dimension() == 80);
  CHECK(big.trace_error() < 1e-10);
}

TEST_CASE("closed evolution at constant omega keeps the thermal moments") {
  auto th = FockState::thermal(6.0, 4.0, 30);
  LindbladOptions o;
  o.output_points = 11;
  auto tr = integrate_lindblad(th, FrequencyProtocol::constant(6.0, 3.0), std::nullopt,
                               std::nullopt, o);
  // Bounded by the integrator tolerance (rel 1e-8).
  for (const auto& v : tr.vectors) check_close(v, thermal_observable_vector(6, 4), 1e-8);
  CHECK(tr.max_trace_error < 1e-10);
  CHECK(tr.max_hermiticity_error < 1e-12);
  CHECK(tr.final_min_eigenvalue > -1e-10);
}

TEST_CASE("thermalisation at rate Gamma") {
  BathSpec bath{5.0, 0.05};
  auto hot = FockState::thermal(5.0, 9.0, 40);
  LindbladOptions o;
  o.output_points = 21;
  auto tr = integrate_lindblad(hot, FrequencyProtocol::constant(5.0, 20.0), bath, std::nullopt, o);
  const auto r = name_rates(5.0, 0.0, bath);
  const double h_eq = thermal_observable_vector(5, 5).h;
  const double h0 = thermal_observable_vector(5, 9).h;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double expect = h_eq + (h0 - h_eq) * std::exp(-r.gamma() * tr.times[i]);
    CHECK(tr.vectors[i].h == Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("oracle agrees with moment propagation") {
  LindbladOptions o;
  o.output_points = 5;

  SUBCASE("constant-mu open stroke from a squeezed Gibbs state") {
    BathSpec bath{8.0, 0.05};
    auto p = build_constant_mu_protocol(9.6875, 7.75, -0.05);
    GeneralizedGibbsState g{-1.2, -0.05, 9.6875};
    auto f = integrate_lindblad(FockState::generalized_gibbs(g, 40), p, bath, std::nullopt, o);
    auto m = propagate_open(g.to_observables(), p, bath, {.output_points = 5});
    for (std::size_t i = 0; i < 5; ++i) check_close(f.vectors[i], m.vectors[i], 1e-6);
  }

  SUBCASE("STE stroke end to end") {
    BathSpec bath{8.0, 0.05};
    auto s = build_ste_protocol(10, 8, 5, bath, 1001);
    auto f = integrate_lindblad(FockState::thermal(10, 8, 40), s.protocol, bath, std::nullopt, o);
    auto m = propagate_open(thermal_observable_vector(10, 8), s.protocol, bath);
    check_close(f.vectors.back(), m.back(), 1e-4);
  }

  SUBCASE("dephasing with a driven frequency") {
    auto sta = build_sta_protocol(8, 5, 1.0, 1001);
    auto f = integrate_lindblad(FockState::thermal(8, 8, 40), sta.protocol, std::nullopt, 0.02, o);
    auto m = propagate_dephasing(thermal_observable_vector(8, 8), sta.protocol, 0.02, std::nullopt,
                                 {.output_points = 5});
    for (std::size_t i = 0; i < 5; ++i) check_close(f.vectors[i], m.vectors[i], 1e-6);
    CHECK(f.max_trace_error < 1e-10);
    CHECK(f.final_min_eigenvalue > -1e-10);
  }
}

TEST_CASE("doubling the dimension does not move the moments") {
  BathSpec bath{6.0, 0.05};
  auto p = build_constant_mu_protocol(6.0, 8.0, 0.1);
  LindbladOptions o;
  o.output_points = 3;
  auto a = integrate_lindblad(FockState::thermal(6, 6, 30), p, bath, std::nullopt, o);
  auto b = integrate_lindblad(FockState::thermal(6, 6, 60), p, bath, std::nullopt, o);
  check_close(a.vectors.back(), b.vectors.back(), 1e-6);
}

TEST_CASE("truncation breach") {
  LindbladOptions o;
  o.auto_double = false;
  CHECK_THROWS_AS(integrate_lindblad(FockState::thermal(1.0, 40.0, 8),
                                     FrequencyProtocol::constant(1.0, 1.0), std::nullopt,
                                     std::nullopt, o),
                  TruncationError);
}
