#pragma once

// Run configuration read from YAML. Every physical input is in units of kappa.
//
//   name: device_grid
//   pipeline: master_equation        # or effective_hamiltonian
//   cooling: effective               # explicit | off
//   truncation: 4
//   paper_fidelity: false
//   params:
//     g0: 0.1
//     omega_m: 500                   # or P (then omega_m = P / g0^2)
//     delta_bbar: 1.0e5              # or delta_b
//     zeta: 0.1                      # or r
//     alpha_e_per_sqrt_zeta: 2       # or alpha_e
//     probe_strength: 0.02
//     gamma_m: 0
//     n_th: 0
//     imposed_rates: inverse_sqrt_P  # or {gamma_up: .., gamma_down: ..}
//   scan:
//     - {axis: delta_bbar, min: 1.0e3, max: 1.0e7, points: 10, spacing: log}
//   minimize: {axis: zeta, min: 0.01, max: 1, points: 25, spacing: log}
//   trace: {t_final: 200, samples: 201}

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "optoblockade/model.hpp"

namespace optoblockade {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Pipeline { master_equation, effective_hamiltonian };
enum class CoolingMode { off, effective, explicit_mode };
enum class Axis { P, omega_m, delta_b, delta_bbar, zeta, alpha_e, probe_strength };
enum class Spacing { linear, log };

std::string to_string(Pipeline p);
std::string to_string(CoolingMode c);
std::string to_string(Axis a);
Axis parse_axis(const std::string& name);

struct AxisSpec {
  Axis axis = Axis::zeta;
  double min = 0.0;
  double max = 0.0;
  int points = 1;
  Spacing spacing = Spacing::linear;

  /// Grid values; a single point sits at `min`.
  [[nodiscard]] std::vector<double> values() const;
};

struct TraceSettings {
  double t_final = 200.0;
  int samples = 201;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
};

/// Point-level knobs layered over SystemParams.
struct PointInputs {
  SystemParams params;
  std::optional<double> P;                      ///< overrides omega_m as P / g0^2
  std::optional<double> delta_bbar;             ///< solved for delta_b at the final zeta
  std::optional<double> alpha_e_per_sqrt_zeta;  ///< overrides alpha_e
  std::optional<UpDownRates> imposed_rates;
  bool imposed_inverse_sqrt_P = false;          ///< gamma_up = gamma_down = 1 / sqrt(P)
};

struct RunConfig {
  std::string name = "run";
  PointInputs base;
  Pipeline pipeline = Pipeline::master_equation;
  CoolingMode cooling = CoolingMode::effective;
  int truncation = 4;
  bool paper_fidelity = false;
  bool literal_a_detuning = false;
  std::vector<AxisSpec> scan;
  std::optional<AxisSpec> minimize;
  bool convergence_check = true;
  TraceSettings trace;

  [[nodiscard]] Coefficients coefficients() const {
    return paper_fidelity ? Coefficients::first_order : Coefficients::exact;
  }
};

/// Throws ConfigError with a message naming the offending key.
RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::string& path);

/// Applies scan coordinates and resolves derived inputs, in this order:
/// P/omega_m, delta_b, zeta, alpha_e, probe strength, then delta_bbar and
/// alpha_e_per_sqrt_zeta. Throws ConfigError on inconsistent inputs.
PointInputs apply_axes(const PointInputs& base, const std::vector<std::pair<Axis, double>>& coords);

/// Final SystemParams for a point (delta_b solved from delta_bbar when given).
SystemParams resolve_params(const PointInputs& inputs, Coefficients mode);

/// Rates to impose on d, if any.
std::optional<UpDownRates> resolve_imposed_rates(const PointInputs& inputs);

}  // namespace optoblockade
