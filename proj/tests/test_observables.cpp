#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "optoblockade/observables.hpp"

using namespace optoblockade;

TEST_CASE("g2 of reference states") {
  const FockConfig c({40}, {"a"});
  CHECK(*g2_zero(QuantumState::coherent(c, "a", 0.3), "a") == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(*g2_zero(QuantumState::fock(c, {1}), "a") == 0.0);
  CHECK(*g2_zero(QuantumState::fock(c, {2}), "a") == doctest::Approx(0.5));
  CHECK(*g2_zero(QuantumState::thermal(c, "a", 0.2), "a") == doctest::Approx(2.0).epsilon(1e-8));
  CHECK_FALSE(g2_zero(QuantumState::vacuum(c), "a").has_value());
}

TEST_CASE("populations") {
  const FockConfig c({3, 3, 3}, {"a", "bbar", "d"});
  const auto pops = populations(QuantumState::fock(c, {0, 2, 1}));
  CHECK(pops.size() == 3);
  CHECK(pops.at("a") == 0.0);
  CHECK(pops.at("bbar") == doctest::Approx(2.0));
  CHECK(pops.at("d") == doctest::Approx(1.0));
}

TEST_CASE("output field operator") {
  // eta / zeta = 0.04 gives a d-quadrature weight of 0.1
  const NormalModeData nm = diagonalize(BilinearParams::from_r(1.0e4, 100.0, std::sqrt(1.0 - 0.25 * 0.25)));
  const FockConfig c({2, 3, 3}, {"a", "bbar", "d"});
  const DenseMatrix m = output_field_operator(nm, c).dense();
  CHECK(m(c.basis_index({0, 0, 0}), c.basis_index({0, 0, 1})).real() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m(c.basis_index({0, 0, 1}), c.basis_index({0, 0, 0})).real() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m(c.basis_index({0, 0, 0}), c.basis_index({0, 1, 0})).real() == 1.0);
  CHECK_THROWS_AS(output_field_operator(nm, FockConfig({2, 2}, {"a", "b"})), std::invalid_argument);
}

TEST_CASE("weak-probe g2 does not depend on the probe strength") {
  SystemParams p;
  p.g0 = 1.0;
  p.omega_m = 200;
  p.delta_b = 1e6;
  p.set_zeta(0.1);
  const NormalModeData nm = diagonalize(p.bilinear());
  p.probe_strength = 1e-4;
  const double g1 = *g2_from_amplitudes(quasi_steady_amplitudes(p, nm));
  p.probe_strength = 2e-4;
  const double g2 = *g2_from_amplitudes(quasi_steady_amplitudes(p, nm));
  CHECK(g1 < 1.0);
  CHECK(g2 == doctest::Approx(g1).epsilon(1e-6));
}
