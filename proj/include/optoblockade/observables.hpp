#pragma once

// Equal-time correlations, mode populations and the transmitted-field operator.

#include <map>
#include <optional>
#include <string>

#include "optoblockade/dynamics.hpp"
#include "optoblockade/fockspace.hpp"
#include "optoblockade/normalmodes.hpp"

namespace optoblockade {

/// Populations below this are treated as empty and g2 is undefined.
inline constexpr double kPopulationFloor = 1e-12;

/// <A^dag A^dag A A> / <A^dag A>^2, nullopt when <A^dag A> is below the floor.
std::optional<double> g2_zero(const QuantumState& state, const ModeOperator& op);
std::optional<double> g2_zero(const QuantumState& state, const std::string& label);

/// g2 of bbar on the normalized nine-ket state. nullopt when |c_1| is below the floor.
std::optional<double> g2_from_amplitudes(const QuasiSteadyAmplitudes& amps);

/// <n> for every mode, keyed by label.
std::map<std::string, double> populations(const QuantumState& state);

/// bbar + sqrt(eta / zeta) (d + d^dag) / 2 on a config carrying "bbar" and "d".
ModeOperator output_field_operator(const NormalModeData& nm, const FockConfig& config);

}  // namespace optoblockade
