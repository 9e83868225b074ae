#include "optoblockade/observables.hpp"

#include <cmath>
#include <stdexcept>

namespace optoblockade {

std::optional<double> g2_zero(const QuantumState& state, const ModeOperator& op) {
  const ModeOperator opd = op.adjoint();
  const double n = expectation(state, opd * op).real();
  if (!(n > kPopulationFloor)) return std::nullopt;
  const double n2 = expectation(state, opd * opd * op * op).real();
  return std::max(0.0, n2) / (n * n);
}

std::optional<double> g2_zero(const QuantumState& state, const std::string& label) {
  return g2_zero(state, ladder(state.config(), label));
}

std::optional<double> g2_from_amplitudes(const QuasiSteadyAmplitudes& amps) {
  if (!(std::abs(amps.c[1]) > kPopulationFloor)) return std::nullopt;
  double norm = 0.0;
  double n = 0.0;
  double n2 = 0.0;
  for (std::size_t i = 0; i < kQuasiSteadyKets.size(); ++i) {
    const double w = std::norm(amps.c[i]);
    const int nb = kQuasiSteadyKets[i][1];
    norm += w;
    n += w * nb;
    n2 += w * nb * (nb - 1);
  }
  n /= norm;
  n2 /= norm;
  if (!(n > kPopulationFloor)) return std::nullopt;
  return n2 / (n * n);
}

std::map<std::string, double> populations(const QuantumState& state) {
  std::map<std::string, double> out;
  for (const auto& label : state.config().labels())
    out[label] = expectation(state, number(state.config(), label)).real();
  return out;
}

ModeOperator output_field_operator(const NormalModeData& nm, const FockConfig& config) {
  if (!config.has_mode("bbar") || !config.has_mode("d"))
    throw std::invalid_argument("output_field_operator: configuration needs 'bbar' and 'd'");
  const ModeOperator bb = ladder(config, "bbar");
  const ModeOperator d = ladder(config, "d");
  const double k = 0.5 * std::sqrt(nm.eta / nm.zeta);
  return bb + k * (d + d.adjoint());
}

}  // namespace optoblockade
