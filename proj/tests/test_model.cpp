#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "optoblockade/dynamics.hpp"
#include "optoblockade/model.hpp"
#include "optoblockade/observables.hpp"
#include "oracles.hpp"

using namespace optoblockade;

namespace {

SystemParams operating_point(double P = 100.0, double zeta = 0.1, double delta_b = 1.0e5) {
  SystemParams p;
  p.g0 = 1.0;
  p.omega_m = P;
  p.delta_b = delta_b;
  p.set_zeta(zeta);
  return p;
}

double element(const DenseMatrix& m, const FockConfig& c, std::initializer_list<int> bra,
               std::initializer_list<int> ket) {
  return m(c.basis_index(bra), c.basis_index(ket)).real();
}

Complex celement(const DenseMatrix& m, const FockConfig& c, std::initializer_list<int> bra,
                 std::initializer_list<int> ket) {
  return m(c.basis_index(bra), c.basis_index(ket));
}

}  // namespace

TEST_CASE("derived parameters") {
  SystemParams p;
  p.g0 = 0.1;
  p.omega_m = 500;
  p.kappa = 1.0;
  CHECK(p.merit() == doctest::Approx(5.0));
  p.g0 = 1.0;
  p.omega_m = 100;
  CHECK(p.merit() == doctest::Approx(100.0));
  p.set_zeta(0.25);
  CHECK(p.zeta() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p.g_nl() == doctest::Approx(2.0).epsilon(1e-14));
  p.set_G0(p.G0());
  CHECK(p.zeta() == doctest::Approx(0.25).epsilon(1e-12));
  p.r = 1.01;
  CHECK(std::isnan(p.zeta()));
  SystemParams bad;
  bad.kappa = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("lab Hamiltonian") {
  const FockConfig c = lab_config(3);
  SystemParams p = operating_point(2.0, 1.0, 5.0);
  p.g0 = 0.0;
  p.r = 0.0;
  p.delta_a = 3.0;
  const ModeOperator h = hamiltonian_lab(p, c);
  const DenseMatrix d = h.dense();
  CHECK((d - DenseMatrix(d.diagonal().asDiagonal())).norm() == 0.0);
  CHECK(element(d, c, {1, 1, 2}, {1, 1, 2}) == doctest::Approx(3.0 + 5.0 + 4.0));

  p.g0 = 0.3;
  p.r = 0.7;
  CHECK(hamiltonian_lab(p, c).hermiticity_defect() == 0.0);
  CHECK_THROWS_AS(hamiltonian_lab(p, normal_config(3)), std::invalid_argument);
}

TEST_CASE("lab bilinear sector reproduces the normal-mode frequencies") {
  SystemParams p;
  p.delta_b = 2.0;
  p.omega_m = 1.0;
  p.r = 0.5;
  p.g0 = 0.0;
  p.delta_a = 50.0;
  const FockConfig c({2, 14, 14}, {"a", "b", "c"});
  const Eigen::VectorXd e = oracle::block_eigenvalues(hamiltonian_lab(p, c).dense().real());
  const NormalModeData nm = diagonalize(p.bilinear());
  auto nearest = [&](double target) {
    double best = 1e300;
    for (Eigen::Index i = 0; i < e.size(); ++i) best = std::min(best, std::abs(e(i) - target));
    return best;
  };
  CHECK(nearest(e(0) + nm.omega_minus) < 1e-8);
  CHECK(nearest(e(0) + nm.omega_plus) < 1e-8);
}

TEST_CASE("normal-mode Hamiltonian without nonlinear terms") {
  const SystemParams p = operating_point();
  const NormalModeData nm = diagonalize(p.bilinear());
  const FockConfig c = normal_config(3);
  for (Coefficients mode : {Coefficients::exact, Coefficients::first_order}) {
    const DenseMatrix h = hamiltonian_normal(p, nm, c, TermFlags::none(), mode).dense();
    CHECK((h - DenseMatrix(h.diagonal().asDiagonal())).norm() == 0.0);
    const double wb = mode == Coefficients::exact ? nm.omega_plus : p.delta_b + nm.delta_shift;
    const double wd = mode == Coefficients::exact ? nm.omega_minus : p.omega_m * nm.zeta;
    CHECK(element(h, c, {0, 1, 0}, {0, 1, 0}) == doctest::Approx(wb).epsilon(1e-14));
    CHECK(element(h, c, {0, 0, 1}, {0, 0, 1}) == doctest::Approx(wd).epsilon(1e-12));
    CHECK(element(h, c, {1, 0, 0}, {1, 0, 0}) == doctest::Approx(wb - wd).epsilon(1e-14));
  }
  CHECK(hamiltonian_normal(p, nm, c).hermiticity_defect() == 0.0);
  SystemParams unstable = p;
  unstable.r = 1.2;
  CHECK_THROWS_AS(hamiltonian_normal(unstable, diagonalize(unstable.bilinear()), c), std::domain_error);
}

TEST_CASE("level ladder of the resonant three-wave term") {
  const SystemParams p = operating_point();
  const NormalModeData nm = diagonalize(p.bilinear());
  const FockConfig c = normal_config(4);
  for (Coefficients mode : {Coefficients::exact, Coefficients::first_order}) {
    const DenseMatrix h = hamiltonian_normal(p, nm, c, TermFlags::resonant_only(), mode).dense();
    const double g = nonlinear_coupling(p, nm, mode);
    auto block = [&](std::vector<std::array<int, 3>> kets) {
      Eigen::MatrixXd m(kets.size(), kets.size());
      for (std::size_t i = 0; i < kets.size(); ++i)
        for (std::size_t j = 0; j < kets.size(); ++j) {
          const auto& a = kets[i];
          const auto& b = kets[j];
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              h(c.basis_index({a[0], a[1], a[2]}), c.basis_index({b[0], b[1], b[2]})).real();
        }
      return m;
    };
    const Eigen::MatrixXd one = block({{0, 1, 0}, {1, 0, 1}});
    const Eigen::VectorXd e1 = oracle::block_eigenvalues(one);
    const double center1 = one(0, 0);
    CHECK((e1(0) - center1) == doctest::Approx(-g).epsilon(1e-10));
    CHECK((e1(1) - center1) == doctest::Approx(g).epsilon(1e-10));
    const Eigen::MatrixXd two = block({{0, 2, 0}, {1, 1, 1}, {2, 0, 2}});
    const Eigen::VectorXd e2 = oracle::block_eigenvalues(two);
    const double center2 = two(0, 0);
    CHECK((e2(0) - center2) == doctest::Approx(-std::sqrt(6.0) * g).epsilon(1e-10));
    CHECK(std::abs(e2(1) - center2) < 1e-10 * g * center2);
    CHECK((e2(2) - center2) == doctest::Approx(std::sqrt(6.0) * g).epsilon(1e-10));
  }
}

TEST_CASE("exact nonlinear coefficients match operator matrix elements") {
  const SystemParams p = operating_point(100.0, 0.2, 2.0e3);
  const NormalModeData nm = diagonalize(p.bilinear());
  const FockConfig c = normal_config(4);
  const Eigen::Matrix4d inv = inverse_transform(nm);
  const ModeOperator a = ladder(c, "a");
  const ModeOperator bb = ladder(c, "bbar");
  const ModeOperator d = ladder(c, "d");
  const ModeOperator basis[4] = {bb, bb.adjoint(), d, d.adjoint()};
  ModeOperator b = ModeOperator::zero(c);
  ModeOperator cm = ModeOperator::zero(c);
  for (int k = 0; k < 4; ++k) {
    b += inv(0, k) * basis[k];
    cm += inv(2, k) * basis[k];
  }
  const DenseMatrix v = (-p.g0 * ((a.adjoint() * b + b.adjoint() * a) * (cm + cm.adjoint()))).dense();
  const NonlinearCoefficients k = nonlinear_coefficients(p, nm, Coefficients::exact);
  CHECK(element(v, c, {0, 1, 0}, {1, 0, 1}) == doctest::Approx(k.bbar_dag_a_d).epsilon(1e-12));
  CHECK(element(v, c, {1, 0, 0}, {0, 1, 1}) == doctest::Approx(k.a_dag_bbar_d).epsilon(1e-12));
  CHECK(element(v, c, {1, 0, 0}, {0, 0, 2}) == doctest::Approx(std::sqrt(2.0) * k.a_dag_d_d).epsilon(1e-12));
  CHECK(element(v, c, {0, 0, 0}, {1, 0, 2}) == doctest::Approx(std::sqrt(2.0) * k.a_d_d).epsilon(1e-12));
  // the a-displacement piece cancels in the difference
  const double k5 = 0.5 * (element(v, c, {1, 0, 2}, {0, 0, 2}) - element(v, c, {1, 0, 0}, {0, 0, 0}));
  CHECK(k5 == doctest::Approx(k.a_quad_n_d).epsilon(1e-12));

  const NonlinearCoefficients f = nonlinear_coefficients(p, nm, Coefficients::first_order);
  CHECK(f.bbar_dag_a_d == doctest::Approx(-p.g_nl()).epsilon(1e-14));
  CHECK(f.a_dag_d_d == doctest::Approx(-p.g_nl() * std::sqrt(nm.eta / (4 * nm.zeta))).epsilon(1e-14));
  CHECK(f.a_quad_n_d == doctest::Approx(2 * f.a_dag_d_d).epsilon(1e-14));
  // first order is within O(eta) of exact
  CHECK(k.bbar_dag_a_d == doctest::Approx(f.bbar_dag_a_d).epsilon(10 * nm.eta));
}

TEST_CASE("effective Hamiltonian in the probe frame") {
  SystemParams p = operating_point();
  p.probe_strength = 0.02;
  const NormalModeData nm = diagonalize(p.bilinear());
  const FockConfig c = normal_config(3);
  const DenseMatrix h = effective_hamiltonian(p, nm, c).dense();
  CHECK(celement(h, c, {0, 1, 0}, {0, 0, 0}) == Complex(0.0, 0.02));
  CHECK(celement(h, c, {0, 0, 0}, {0, 1, 0}) == Complex(0.0, -0.02));
  // anti-Hermitian part is -i kappa/2 (n_a + n_bbar)
  const DenseMatrix anti = 0.5 * (h - h.adjoint());
  const DenseMatrix expected = Complex(0.0, -0.5 * p.kappa) * (number(c, "a") + number(c, "bbar")).dense();
  CHECK((anti - expected).norm() < 1e-12);
  // lower dressed state of the one-excitation manifold sits at zero, the upper one at 2 g_nl
  Eigen::Matrix2d one;
  one << element(h, c, {0, 1, 0}, {0, 1, 0}), element(h, c, {0, 1, 0}, {1, 0, 1}),
      element(h, c, {1, 0, 1}, {0, 1, 0}), element(h, c, {1, 0, 1}, {1, 0, 1});
  const Eigen::VectorXd e = oracle::block_eigenvalues(one);
  const double g = nonlinear_coupling(p, nm, Coefficients::exact);
  CHECK(std::abs(e(0)) < 1e-9 * g);
  CHECK(e(1) == doctest::Approx(2 * g).epsilon(1e-10));

  // literal variant puts a at -omega_d
  const DenseMatrix lit = effective_hamiltonian(p, nm, c, {Coefficients::exact, true}).dense();
  CHECK(element(lit, c, {1, 0, 0}, {1, 0, 0}) == doctest::Approx(-nm.omega_minus).epsilon(1e-12));

  SystemParams quiet = p;
  quiet.g0 = 0.0;
  quiet.probe_strength = 0.0;
  const DenseMatrix hq = effective_hamiltonian(quiet, nm, c).dense();
  CHECK((hq - DenseMatrix(hq.diagonal().asDiagonal())).norm() == 0.0);
  CHECK(std::abs(hq(0, 0)) == 0.0);
}

TEST_CASE("cooling channel") {
  SystemParams p;
  p.g0 = 1.0;
  p.omega_m = 100;
  p.delta_b = 1e4;
  p.r = 0.0;  // zeta = 1 so g_nl = kappa
  const NormalModeData nm = diagonalize(p.bilinear());
  const FockConfig c = normal_config(3);
  CHECK(cooling_channel(p, nm, c, CoolingVariant::effective).channels.empty());
  p.alpha_e = 0.1;
  for (Coefficients mode : {Coefficients::exact, Coefficients::first_order}) {
    const CoolingTerms t = cooling_channel(p, nm, c, CoolingVariant::effective, mode);
    REQUIRE(t.channels.size() == 1);
    CHECK(t.channels[0].rate == doctest::Approx(0.04).epsilon(1e-12));
    CHECK_FALSE(t.hamiltonian);
  }
  CHECK_THROWS_AS(cooling_channel(p, nm, c, CoolingVariant::explicit_mode), std::invalid_argument);
}

TEST_CASE("explicit cooling mode against its adiabatic elimination") {
  SystemParams p;
  p.g0 = 1.0;
  p.omega_m = 50;
  p.delta_b = 1e5;
  p.r = 0.0;
  p.alpha_e = 0.1;
  const NormalModeData nm = diagonalize(p.bilinear());
  const double wd = nm.omega_minus;
  const FockConfig c({5, 3}, {"d", "f"});
  const CoolingTerms ex = cooling_channel(p, nm, c, CoolingVariant::explicit_mode);
  const double gamma_cool = cooling_rate(p, nm);
  const ModeOperator h = wd * number(c, "d") + *ex.hamiltonian;

  // decay of a single d excitation
  EvolutionSpec spec;
  spec.t_final = 10.0;
  spec.store_states = true;
  const Trajectory tr = evolve(QuantumState::fock(c, {1, 0}), h, ex.channels, spec);
  REQUIRE(tr.ok());
  const double n_end = expectation(tr.states.back(), number(c, "d")).real();
  const double fitted = -std::log(n_end) / spec.t_final;
  CHECK(fitted == doctest::Approx(gamma_cool).epsilon(0.1));

  // steady population under a weak thermal drive
  const double gamma = 0.01;
  const double nbar = 1.0;
  std::vector<LindbladChannel> ch = ex.channels;
  const ModeOperator d = ladder(c, "d");
  ch.push_back({d, gamma * (nbar + 1), "down"});
  ch.push_back({d.adjoint(), gamma * nbar, "up"});
  const SteadyStateResult ss = steady_state(h, ch);
  const double n_explicit = expectation(ss.state, number(c, "d")).real();
  const double n_effective = gamma * nbar / (gamma + gamma_cool);
  CHECK(n_explicit == doctest::Approx(n_effective).epsilon(0.2));
}

TEST_CASE("dissipation channels") {
  SystemParams p = operating_point(100.0, 0.1, 1.0e3);
  const NormalModeData nm = diagonalize(p.bilinear());
  CHECK(dissipation_channels(p, nm, lab_config(2), Basis::lab).size() == 2);
  const FockConfig c = normal_config(3);
  const auto ch = dissipation_channels(p, nm, c, Basis::normal, Coefficients::first_order);
  REQUIRE(ch.size() == 2);
  const DenseMatrix jb = ch[1].jump.dense();
  const double k = 0.5 * std::sqrt(nm.eta / nm.zeta);
  CHECK(element(jb, c, {0, 0, 1}, {0, 0, 0}) == doctest::Approx(k).epsilon(1e-14));
  CHECK(element(jb, c, {0, 0, 0}, {0, 0, 1}) == doctest::Approx(k).epsilon(1e-14));
  CHECK(element(jb, c, {0, 0, 0}, {0, 1, 0}) == doctest::Approx(1.0));
  // eta / zeta = 0.04 gives an admixture of 0.1
  SystemParams q = operating_point(100.0, 0.25, 1.0e4);
  const NormalModeData nq = diagonalize(q.bilinear());
  const auto chq = dissipation_channels(q, nq, c, Basis::normal, Coefficients::first_order);
  CHECK(element(chq[1].jump.dense(), c, {0, 0, 1}, {0, 0, 0}) == doctest::Approx(0.1).epsilon(1e-12));

  p.gamma_m = 0.01;
  p.n_th = 2.0;
  CHECK(dissipation_channels(p, nm, lab_config(2), Basis::lab).size() == 4);
  CHECK(dissipation_channels(p, nm, c, Basis::normal).size() == 4);
}

TEST_CASE("absorption rate from short-time evolution") {
  for (double gamma_m : {0.0, 0.002}) {
    SystemParams p = operating_point(100.0, 0.2, 1.0e3);
    p.gamma_m = gamma_m;
    p.n_th = 3.0;
    const NormalModeData nm = diagonalize(p.bilinear());
    const FockConfig c = normal_config(3);
    const auto ch = dissipation_channels(p, nm, c, Basis::normal, Coefficients::first_order);
    EvolutionSpec spec;
    spec.t_final = 1e-4;
    spec.dt_initial = 1e-6;
    spec.rel_tol = 1e-12;
    spec.abs_tol = 1e-16;
    const Trajectory tr = evolve(QuantumState::vacuum(c), ModeOperator::zero(c), ch, spec);
    REQUIRE(tr.ok());
    const double rate = expectation(tr.states.back(), number(c, "d")).real() / spec.t_final;
    // Oracle: sum over channels of rate * |coefficient of d^dag|^2, written out by hand.
    const double z = nm.zeta;
    const double kd = 0.5 * std::sqrt(nm.eta / z);
    const double down_coeff = 0.5 / std::sqrt(z) - 0.5 * std::sqrt(z);  // d^dag weight in c
    const double up_coeff = 0.5 / std::sqrt(z) + 0.5 * std::sqrt(z);    // d^dag weight in c^dag
    const double secular = p.kappa * kd * kd + gamma_m * (p.n_th + 1) * down_coeff * down_coeff +
                           gamma_m * p.n_th * up_coeff * up_coeff;
    CHECK(rate == doctest::Approx(secular).epsilon(1e-3));
    // agrees with the closed form up to the O(zeta) term it drops
    const double closed = rates_updown(p, nm).gamma_up;
    CHECK(std::abs(rate - closed) <= (2 * p.n_th + 1) * gamma_m * z / 4 * 1.01 + 1e-3 * closed);
  }
}

TEST_CASE("up/down rates") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    SystemParams p;
    p.omega_m = 10 + 1000 * u(rng);
    p.delta_b = p.omega_m * (5 + 1000 * u(rng));
    p.set_zeta(0.001 + 0.999 * u(rng));
    p.kappa = 0.1 + u(rng);
    p.gamma_m = 1e-3 * u(rng);
    p.n_th = 100 * u(rng);
    const UpDownRates r = rates_updown(p, diagonalize(p.bilinear()));
    CHECK(std::abs((r.gamma_down - r.gamma_up) - p.gamma_m) <= 4 * std::numeric_limits<double>::epsilon() * r.gamma_down);
  }
  SystemParams p;
  p.omega_m = 10;
  p.delta_b = 1000;
  p.set_zeta(0.1);
  const UpDownRates r = rates_updown(p, diagonalize(p.bilinear()));
  CHECK(r.gamma_up == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(r.gamma_down == r.gamma_up);
  p.r = 1.0;
  CHECK_THROWS_AS(rates_updown(p, diagonalize(p.bilinear())), std::domain_error);
}

TEST_CASE("figure of merit and the rate hierarchy") {
  SystemParams p;
  p.g0 = 0.1;
  p.omega_m = 500;
  p.delta_b = 1e6;
  p.set_zeta(0.05);
  MeritReport m = merit_and_stability(p, diagonalize(p.bilinear()));
  CHECK(m.merit == doctest::Approx(5.0));
  CHECK(m.stable);
  REQUIRE(m.links.size() == 3);
  CHECK_FALSE(m.links[1].pass);  // g_nl < kappa here
  CHECK_FALSE(m.all_pass());

  p.r = 1.01;
  m = merit_and_stability(p, diagonalize(p.bilinear()));
  CHECK_FALSE(m.stable);
  CHECK_FALSE(m.all_pass());
  CHECK(m.instability_margin == doctest::Approx(-0.01));

  SystemParams q = operating_point(500.0, 0.1, 1e7);
  const MeritReport mq = merit_and_stability(q, diagonalize(q.bilinear()), 3.0);
  CHECK(mq.all_pass());
}

TEST_CASE("master-equation assembly") {
  SystemParams p = operating_point();
  p.probe_strength = 0.02;
  p.alpha_e = 0.1;
  const NormalModeData nm = diagonalize(p.bilinear());
  const FockConfig c = normal_config(3);
  const MasterEquationModel all = build_master_equation(p, nm, c);
  CHECK(all.harmonic_terms.size() == 3);
  CHECK(all.hamiltonian.hermiticity_defect() < 1e-15);
  CHECK(all.channels.size() == 3);  // a, b, cooling
  MasterEquationOptions o;
  o.flags = TermFlags::co_rotating();
  o.cooling.reset();
  o.imposed_d_rates = UpDownRates{0.05, 0.04};
  const MasterEquationModel m = build_master_equation(p, nm, c, o);
  CHECK(m.harmonic_terms.empty());
  CHECK(m.channels.size() == 4);
  CHECK(m.probe_freq == doctest::Approx(nm.omega_plus - m.g_nl));
}
