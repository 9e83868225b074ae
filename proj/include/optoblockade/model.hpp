#pragma once

// Hamiltonians, dissipators, rates and the figure of merit for the
// two-cavity-mode / one-mechanical-mode system driven near its parametric
// instability.
//
// Lab basis modes:     "a", "b", "c"
// Normal basis modes:  "a", "bbar", "d" and optionally "f" (cooling cavity)
//
// All rates and frequencies share one unit; configs use units of kappa.

#include <optional>
#include <string>
#include <vector>

#include "optoblockade/fockspace.hpp"
#include "optoblockade/normalmodes.hpp"

namespace optoblockade {

struct SystemParams {
  double delta_b = 1.0e4;
  double omega_m = 100.0;
  double g0 = 1.0;
  double r = 0.0;  ///< rescaled drive 2 G0 / sqrt(omega_m delta_b)
  double kappa = 1.0;
  double gamma_m = 0.0;
  double n_th = 0.0;
  double alpha_e = 0.0;
  double probe_strength = 0.0;
  double J = 0.0;  ///< photon tunnelling rate, carried but never evolved

  /// Detuning of a. Unset means the resonance Delta_a = Delta_bbar - omega_d.
  std::optional<double> delta_a;
  /// Probe frequency. Unset means the lower one-photon dressed state Delta_bbar - g_nl.
  std::optional<double> probe_freq;

  /// Throws std::invalid_argument on negative rates or non-positive kappa/omega_m/delta_b.
  void validate() const;

  [[nodiscard]] double G0() const;
  void set_G0(double G0);
  void set_zeta(double zeta);  ///< r = sqrt(1 - zeta^2)

  [[nodiscard]] double eta() const { return omega_m / delta_b; }
  [[nodiscard]] double zeta() const;  ///< sqrt(1 - r^2); NaN past the instability
  [[nodiscard]] double g_nl() const;  ///< g0 / sqrt(zeta)
  [[nodiscard]] double merit() const { return g0 * g0 * omega_m / (kappa * kappa * kappa); }

  [[nodiscard]] BilinearParams bilinear() const { return BilinearParams::from_r(delta_b, omega_m, r); }
};

/// Enables each of the five nonlinear families separately. Each family is
/// Hermitian: the listed term plus its conjugate (family 5 is already Hermitian).
struct TermFlags {
  bool bbar_dag_a_d = true;    ///< bbar^dag a d + h.c.   (resonant at Delta_bbar = Delta_a + omega_d)
  bool a_dag_bbar_d = true;    ///< a^dag bbar d + h.c.
  bool a_dag_d_d = true;       ///< a^dag d d + h.c.
  bool a_d_d = true;           ///< a d d + h.c.
  bool a_quad_n_d = true;      ///< (a + a^dag) d^dag d

  static TermFlags none() { return {false, false, false, false, false}; }
  static TermFlags resonant_only() { return {true, false, false, false, false}; }
  /// Families that are static in the probe rotating frame.
  static TermFlags co_rotating() { return {true, true, false, false, false}; }
};

/// Coefficients K of the nonlinear families, H_nl = sum_k K_k (family_k).
struct NonlinearCoefficients {
  double bbar_dag_a_d = 0.0;
  double a_dag_bbar_d = 0.0;
  double a_dag_d_d = 0.0;
  double a_d_d = 0.0;
  double a_quad_n_d = 0.0;
};

/// Exact coefficients project -g0 (a^dag b + b^dag a)(c + c^dag) onto the five
/// families after substituting the exact inverse transform; terms outside the
/// families (bbar-bbar products, a static a-displacement) are discarded.
/// First-order coefficients are -g_nl for the two three-wave families and
/// -g_nl sqrt(eta / 4 zeta) (twice that for the (a + a^dag) d^dag d family).
NonlinearCoefficients nonlinear_coefficients(const SystemParams& p, const NormalModeData& nm, Coefficients mode);

/// Magnitude of the resonant bbar^dag a d coupling under the chosen coefficients.
double nonlinear_coupling(const SystemParams& p, const NormalModeData& nm, Coefficients mode);

/// Delta_a honoring the override, otherwise Delta_bbar - omega_d.
double resolved_delta_a(const SystemParams& p, const NormalModeData& nm, Coefficients mode);
/// Probe frequency honoring the override, otherwise Delta_bbar - g_nl.
double resolved_probe_freq(const SystemParams& p, const NormalModeData& nm, Coefficients mode);

struct LindbladChannel {
  ModeOperator jump;
  double rate = 0.0;
  std::string name;
};

/// Lab-frame (pump-displaced) Hamiltonian on modes a, b, c.
ModeOperator hamiltonian_lab(const SystemParams& p, const FockConfig& config);

/// Normal-mode Hamiltonian in the pump frame on a, bbar, d. Throws
/// std::domain_error for r >= 1.
ModeOperator hamiltonian_normal(const SystemParams& p, const NormalModeData& nm, const FockConfig& config,
                                const TermFlags& flags = {}, Coefficients mode = Coefficients::exact);

/// Hermitian nonlinear family operator (without coefficient).
ModeOperator nonlinear_family(const FockConfig& config, int family_index);

struct EffectiveHamiltonianOptions {
  Coefficients mode = Coefficients::exact;
  /// Use -omega_d as the a detuning in the probe frame instead of the
  /// frame-consistent Delta_a - omega_p = g_nl - omega_d.
  bool literal_a_detuning = false;
};

/// Non-Hermitian generator for the no-jump quasi-steady solve, in the probe
/// rotating frame. Throws std::domain_error for r >= 1.
ModeOperator effective_hamiltonian(const SystemParams& p, const NormalModeData& nm, const FockConfig& config,
                                   const EffectiveHamiltonianOptions& options = {});

enum class CoolingVariant { effective, explicit_mode };

struct CoolingTerms {
  std::optional<ModeOperator> hamiltonian;
  std::vector<LindbladChannel> channels;
};

/// Sideband cooling of d by an auxiliary cavity mode f with coupling g_c =
/// g_nl alpha_e. The explicit variant needs an "f" mode (Delta_f = omega_d);
/// the effective variant adiabatically eliminates f into a d-decay at
/// 4 g_c^2 / kappa.
CoolingTerms cooling_channel(const SystemParams& p, const NormalModeData& nm, const FockConfig& config,
                             CoolingVariant variant, Coefficients mode = Coefficients::exact);

double cooling_rate(const SystemParams& p, const NormalModeData& nm, Coefficients mode = Coefficients::exact);

enum class Basis { lab, normal };

/// Cavity and mechanical channels. Zero-rate channels are omitted.
std::vector<LindbladChannel> dissipation_channels(const SystemParams& p, const NormalModeData& nm,
                                                  const FockConfig& config, Basis basis,
                                                  Coefficients mode = Coefficients::exact);

struct UpDownRates {
  double gamma_down = 0.0;
  double gamma_up = 0.0;
};

/// d-mode emission and absorption rates. Throws std::domain_error when zeta = 0
/// or the system is past the instability.
UpDownRates rates_updown(const SystemParams& p, const NormalModeData& nm);

struct ChainLink {
  std::string name;
  double ratio = 0.0;
  bool pass = false;
};

struct MeritReport {
  double merit = 0.0;  ///< P = g0^2 omega_m / kappa^3
  double r = 0.0;
  double zeta = 0.0;
  double instability_margin = 0.0;  ///< 1 - r
  bool stable = false;
  double threshold = 10.0;
  std::optional<UpDownRates> rates;
  std::vector<ChainLink> links;  ///< gamma_up << kappa << g_nl << omega_m zeta
  [[nodiscard]] bool all_pass() const;
};

MeritReport merit_and_stability(const SystemParams& p, const NormalModeData& nm, double threshold = 10.0);

// ---------------------------------------------------------------------------
// Master-equation assembly in the probe rotating frame.

/// An operator oscillating as exp(-i w t) K + exp(+i w t) K^dag.
struct HarmonicTerm {
  ModeOperator op;
  double frequency = 0.0;
};

struct MasterEquationOptions {
  Coefficients mode = Coefficients::exact;
  TermFlags flags{};
  /// Cooling of d; nullopt disables it regardless of alpha_e.
  std::optional<CoolingVariant> cooling = CoolingVariant::effective;
  /// Imposed d-mode emission/absorption rates. When set, the cavity channel
  /// acts on bbar alone and the mechanical bath is replaced by these rates.
  std::optional<UpDownRates> imposed_d_rates;
};

struct MasterEquationModel {
  ModeOperator hamiltonian;                  ///< static part
  std::vector<HarmonicTerm> harmonic_terms;  ///< counter-rotating families, rotating at the probe frequency
  std::vector<LindbladChannel> channels;
  double probe_freq = 0.0;
  double g_nl = 0.0;
  double omega_d = 0.0;
};

/// Normal-basis model with a, bbar rotating at the probe frequency. The
/// families a^dag d d, a d d and (a + a^dag) d^dag d are not static in this
/// frame and are returned as harmonic terms when enabled.
MasterEquationModel build_master_equation(const SystemParams& p, const NormalModeData& nm, const FockConfig& config,
                                          const MasterEquationOptions& options = {});

/// (a, bbar, d) with the given per-mode dimension, plus f when requested.
FockConfig normal_config(int dim, bool with_cooling_mode = false);
FockConfig lab_config(int dim);

}  // namespace optoblockade
