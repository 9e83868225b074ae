#pragma once

// Diagonalization of the pump-linearized b-c subsystem
//   H_bc = delta_b b^dag b + omega_m c^dag c - G0 (b + b^dag)(c + c^dag)
// into the upper normal mode d+ (mostly optical, called bbar) and the lower
// normal mode d- (mostly mechanical, called d).

#include <array>

#include <Eigen/Dense>

#include "optoblockade/fockspace.hpp"

namespace optoblockade {

/// Which set of normal-mode coefficients the builders use.
///   exact:       closed-form diagonalization, no expansion in eta.
///   first_order: leading order in eta = omega_m / delta_b with zeta = sqrt(1 - r^2).
enum class Coefficients { exact, first_order };

struct BilinearParams {
  double delta_b = 0.0;  ///< detuning of mode b from the pump
  double omega_m = 0.0;  ///< mechanical frequency
  double G0 = 0.0;       ///< pump-enhanced linear coupling (real, >= 0)

  /// Throws std::invalid_argument unless omega_m > 0, delta_b > 0 and G0 >= 0.
  void validate() const;
  [[nodiscard]] double eta() const { return omega_m / delta_b; }
  /// Rescaled drive amplitude 2 G0 / sqrt(omega_m delta_b); r >= 1 is unstable.
  [[nodiscard]] double r() const;

  static BilinearParams from_r(double delta_b, double omega_m, double r);
};

/// Coefficient vector of an operator in the ordered basis (b, b^dag, c, c^dag).
using LabCoefficients = std::array<double, 4>;

struct NormalModeData {
  double eta = 0.0;
  double r = 0.0;
  double phi = 0.0;    ///< tan(phi) = omega_m / delta_b
  double theta = 0.0;  ///< mixing angle, tan(2 theta) = r tan(2 phi)
  double alpha = 1.0;  ///< cos(theta)
  double beta = 0.0;   ///< sin(theta)

  double xi_plus = 1.0;
  double xi_minus = 0.0;     ///< NaN when unstable
  double xi_minus_sq = 0.0;  ///< negative beyond the instability
  double omega_plus = 0.0;   ///< delta_b * xi_plus
  double omega_minus = 0.0;  ///< delta_b * xi_minus

  double zeta = 1.0;          ///< sqrt(1 - r^2), NaN when r > 1
  double zeta_normal = 1.0;   ///< xi_minus / eta, the exact lower-mode frequency over omega_m
  double delta_shift = 0.0;   ///< first-order bbar shift r^2 omega_m eta / 2
  double xi_plus_first_order = 1.0;
  double xi_minus_first_order = 0.0;

  bool unstable = false;  ///< r > 1 (imaginary lower-mode frequency)

  LabCoefficients coeffs_dplus{};
  LabCoefficients coeffs_dminus{};

  double delta_b = 0.0;
  double omega_m = 0.0;
  double G0 = 0.0;

  /// Frequencies used by the Hamiltonian builders under the chosen coefficient set.
  [[nodiscard]] double bbar_frequency(Coefficients c) const;
  [[nodiscard]] double d_frequency(Coefficients c) const;
};

NormalModeData diagonalize(const BilinearParams& p);

/// First-order (small eta) coefficient vectors of bbar and d. The d
/// expansion carries the (r/2) sqrt(eta/zeta) (b - b^dag) admixture.
LabCoefficients first_order_dplus(const NormalModeData& nm);
LabCoefficients first_order_dminus(const NormalModeData& nm);

/// [d, d^dag] for real coefficients u in (b, b^dag, c, c^dag): u0^2 - u1^2 + u2^2 - u3^2.
double commutator_norm(const LabCoefficients& u);

/// Linear map taking (b, b^dag, c, c^dag) to (d+, d+^dag, d-, d-^dag); rows are outputs.
Eigen::Matrix4d forward_transform(const NormalModeData& nm);

/// Rows express (b, b^dag, c, c^dag) in the basis (d+, d+^dag, d-, d-^dag).
Eigen::Matrix4d inverse_transform(const NormalModeData& nm);

/// d+ and d- built on a configuration carrying lab modes labelled "b" and "c".
std::pair<ModeOperator, ModeOperator> normal_mode_operators(const NormalModeData& nm, const FockConfig& config);

}  // namespace optoblockade
