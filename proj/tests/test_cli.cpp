#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "optoblockade/config.hpp"
#include "optoblockade/sweep.hpp"

using namespace optoblockade;

namespace {

const char* kSmall = R"(
name: small
pipeline: master_equation
cooling: effective
truncation: 3
params:
  g0: 1
  P: 100
  delta_bbar: 1.0e5
  zeta: 0.2
  alpha_e: 0.1
  probe_strength: 0.02
scan:
  - {axis: zeta, min: 0.1, max: 0.3, points: 3}
  - {axis: P, min: 50, max: 100, points: 2, spacing: log}
)";

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig cfg = parse_config(kSmall);
  CHECK(cfg.name == "small");
  CHECK(cfg.truncation == 3);
  REQUIRE(cfg.scan.size() == 2);
  CHECK(cfg.scan[1].axis == Axis::P);
  const auto v = cfg.scan[1].values();
  REQUIRE(v.size() == 2);
  CHECK(v[0] == 50.0);
  CHECK(v[1] == 100.0);
  // P fixes omega_m through g0
  const SystemParams p = resolve_params(cfg.base, Coefficients::exact);
  CHECK(p.omega_m == doctest::Approx(100.0));
  CHECK(p.zeta() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(diagonalize(p.bilinear()).omega_plus == doctest::Approx(1.0e5).epsilon(1e-9));
}

TEST_CASE("config errors name the offending key") {
  auto message = [](const std::string& text) {
    try {
      (void)parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("params: {g0: 1, colour: 3}").find("colour") != std::string::npos);
  CHECK(message("truncation: 1").find("truncation") != std::string::npos);
  CHECK(message("params: {omega_m: 10, P: 5}").find("P") != std::string::npos);
  CHECK(message("params: {zeta: 1.5}").find("zeta") != std::string::npos);
  CHECK(message("scan: [{axis: nope, min: 1}]").find("nope") != std::string::npos);
  CHECK(message("pipeline: fast").find("pipeline") != std::string::npos);
  CHECK(message("{{{").find("YAML") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/file.yaml"), ConfigError);
}

TEST_CASE("1x1 grid gives a single record") {
  RunConfig cfg = parse_config(kSmall);
  cfg.scan.clear();
  cfg.convergence_check = false;
  const auto rec = run_sweep(cfg);
  REQUIRE(rec.size() == 1);
  CHECK(rec[0].ok);
  REQUIRE(rec[0].g2.has_value());
  CHECK(*rec[0].g2 > 0.0);
}

TEST_CASE("sweep output does not depend on the worker count") {
  const RunConfig cfg = parse_config(kSmall);
  std::ostringstream one;
  std::ostringstream three;
  write_sweep_csv(one, cfg, run_sweep(cfg, 1));
  write_sweep_csv(three, cfg, run_sweep(cfg, 3));
  CHECK(one.str() == three.str());
  // header plus six rows, row-major over (zeta, P)
  const std::string s = one.str();
  CHECK(std::count(s.begin(), s.end(), '\n') == 7);
  const auto rec = run_sweep(cfg, 2);
  CHECK(rec[1].coords[0].second == doctest::Approx(0.1));
  CHECK(rec[1].coords[1].second == doctest::Approx(100.0));
  int refined = 0;
  for (const auto& r : rec) refined += r.g2_refined ? 1 : 0;
  CHECK(refined == 1);
}

TEST_CASE("per-point failures are recorded, not thrown") {
  RunConfig cfg = parse_config(kSmall);
  cfg.scan = {AxisSpec{Axis::zeta, 0.0, 0.2, 2, Spacing::linear}};
  cfg.convergence_check = false;
  const auto rec = run_sweep(cfg);
  REQUIRE(rec.size() == 2);
  CHECK_FALSE(rec[0].ok);
  CHECK_FALSE(rec[0].message.empty());
  CHECK(rec[1].ok);
}

TEST_CASE("linear system traces a flat g2 = 1") {
  RunConfig cfg = parse_config(R"(
pipeline: master_equation
cooling: off
params:
  g0: 0
  omega_m: 100
  delta_b: 1.0e5
  zeta: 0.2
  probe_strength: 0.001
  imposed_rates: {gamma_up: 0.001, gamma_down: 0.002}
trace: {t_final: 5, samples: 6}
)");
  const auto runs = run_time_trace(cfg, 3);
  REQUIRE(runs.size() == 2);
  for (const auto& run : runs) {
    CHECK(run.status == EvolutionStatus::ok);
    REQUIRE(run.records.size() == 6);
    CHECK_FALSE(run.records[0].g2.has_value());
    for (std::size_t i = 1; i < run.records.size(); ++i)
      CHECK(*run.records[i].g2 == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("feasibility numbers") {
  const RunConfig cs = parse_config("params: {g0: 0.1, omega_m: 500, delta_b: 1.0e6, zeta: 0.05}");
  CHECK(feasibility_report(cs).find("5\n") != std::string::npos);
  const SystemParams p = resolve_params(parse_config("params: {g0: 1, omega_m: 100}").base, Coefficients::exact);
  CHECK(p.merit() == doctest::Approx(100.0));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 100; ++i) {
    SystemParams q;
    q.g0 = u(rng);
    q.omega_m = 1000 * u(rng);
    q.kappa = u(rng);
    q.delta_b = 1e4;
    q.set_zeta(u(rng));
    CHECK(merit_and_stability(q, diagonalize(q.bilinear())).merit == doctest::Approx(q.merit()).epsilon(1e-14));
  }
}
