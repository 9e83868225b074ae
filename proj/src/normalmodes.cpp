#include "optoblockade/normalmodes.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace optoblockade {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Coefficients of sqrt(xi/2) X + i/sqrt(2 xi) Y, with X = p X_b + q X_c and
// Y = p Y_b + q' Y_c, written in (b, b^dag, c, c^dag).
LabCoefficients squeezed_combination(double xi, double b_weight, double cx_weight, double cy_weight) {
  const double s = std::sqrt(xi);
  return {
      0.5 * b_weight * (s + 1.0 / s),
      0.5 * b_weight * (s - 1.0 / s),
      0.5 * (cx_weight * s + cy_weight / s),
      0.5 * (cx_weight * s - cy_weight / s),
  };
}

}  // namespace

void BilinearParams::validate() const {
  if (!(omega_m > 0.0)) throw std::invalid_argument("BilinearParams: omega_m must be positive");
  if (!(delta_b > 0.0)) throw std::invalid_argument("BilinearParams: delta_b must be positive");
  if (!(G0 >= 0.0)) throw std::invalid_argument("BilinearParams: G0 must be non-negative");
}

double BilinearParams::r() const { return 2.0 * G0 / std::sqrt(omega_m * delta_b); }

BilinearParams BilinearParams::from_r(double delta_b, double omega_m, double r) {
  return {delta_b, omega_m, 0.5 * r * std::sqrt(omega_m * delta_b)};
}

double NormalModeData::bbar_frequency(Coefficients c) const {
  return c == Coefficients::exact ? omega_plus : delta_b + delta_shift;
}

double NormalModeData::d_frequency(Coefficients c) const {
  return c == Coefficients::exact ? omega_minus : omega_m * zeta;
}

NormalModeData diagonalize(const BilinearParams& p) {
  p.validate();
  NormalModeData nm;
  nm.delta_b = p.delta_b;
  nm.omega_m = p.omega_m;
  nm.G0 = p.G0;
  nm.eta = p.eta();
  nm.r = p.r();

  const double eta = nm.eta;
  const double r = nm.r;
  const double one_minus_r2 = (1.0 - r) * (1.0 + r);
  nm.phi = std::atan(eta);
  const double sec2 = 1.0 + eta * eta;
  const double sin2phi = 2.0 * eta / sec2;
  const double cos2phi = (1.0 - eta * eta) / sec2;

  nm.theta = 0.5 * std::atan2(r * sin2phi, cos2phi);
  nm.alpha = std::cos(nm.theta);
  nm.beta = std::sin(nm.theta);

  // sqrt(cos^2 2phi + r^2 sin^2 2phi) = sqrt(1 - (1 - r^2) sin^2 2phi); the
  // lower branch uses 1 - sqrt(1 - x) = x / (1 + sqrt(1 - x)) so that it
  // vanishes exactly at r = 1 and changes sign beyond it.
  const double x = one_minus_r2 * sin2phi * sin2phi;
  const double root = std::sqrt(1.0 - x);
  const double xi_plus_sq = 0.5 * sec2 * (1.0 + root);
  nm.xi_minus_sq = 0.5 * sec2 * x / (1.0 + root);
  nm.xi_plus = std::sqrt(xi_plus_sq);
  nm.unstable = nm.xi_minus_sq < 0.0;
  nm.xi_minus = nm.unstable ? kNaN : std::sqrt(nm.xi_minus_sq);
  nm.omega_plus = p.delta_b * nm.xi_plus;
  nm.omega_minus = p.delta_b * nm.xi_minus;

  nm.zeta = one_minus_r2 >= 0.0 ? std::sqrt(one_minus_r2) : kNaN;
  nm.zeta_normal = nm.xi_minus / eta;
  nm.delta_shift = 0.5 * r * r * p.omega_m * eta;
  nm.xi_plus_first_order = 1.0 + 0.5 * r * r * eta * eta;
  nm.xi_minus_first_order = nm.zeta * eta;

  // X+ = alpha X_b - beta X_c', X- = beta X_b + alpha X_c' with the rescaled
  // X_c' = X_c / sqrt(eta) and Y_c' = sqrt(eta) Y_c.
  const double se = std::sqrt(eta);
  nm.coeffs_dplus = squeezed_combination(nm.xi_plus, nm.alpha, -nm.beta / se, -nm.beta * se);
  if (nm.unstable || nm.xi_minus == 0.0) {
    nm.coeffs_dminus = {kNaN, kNaN, kNaN, kNaN};
  } else {
    nm.coeffs_dminus = squeezed_combination(nm.xi_minus, nm.beta, nm.alpha / se, nm.alpha * se);
  }
  return nm;
}

LabCoefficients first_order_dplus(const NormalModeData& nm) {
  const double k = 0.5 * nm.r * std::sqrt(nm.eta);
  return {1.0, 0.0, -k, -k};
}

LabCoefficients first_order_dminus(const NormalModeData& nm) {
  const double z = nm.zeta;
  const double sz = std::sqrt(z);
  const double k = 0.5 * nm.r * std::sqrt(nm.eta / z);
  return {k, -k, 0.5 / sz + 0.5 * sz, 0.5 * sz - 0.5 / sz};
}

double commutator_norm(const LabCoefficients& u) {
  return u[0] * u[0] - u[1] * u[1] + u[2] * u[2] - u[3] * u[3];
}

Eigen::Matrix4d forward_transform(const NormalModeData& nm) {
  // d^dag has the coefficients of d with each creation/annihilation pair swapped.
  auto dagger = [](const LabCoefficients& u) { return LabCoefficients{u[1], u[0], u[3], u[2]}; };
  Eigen::Matrix4d m;
  const LabCoefficients rows[4] = {nm.coeffs_dplus, dagger(nm.coeffs_dplus), nm.coeffs_dminus,
                                   dagger(nm.coeffs_dminus)};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = rows[i][static_cast<std::size_t>(j)];
  return m;
}

Eigen::Matrix4d inverse_transform(const NormalModeData& nm) {
  const double a = nm.alpha;
  const double b = nm.beta;
  const double sp = std::sqrt(nm.xi_plus);
  const double sm = std::sqrt(nm.xi_minus);
  const double se = std::sqrt(nm.eta);

  Eigen::Matrix4d inv;
  // b
  inv(0, 0) = 0.5 * a * (1.0 / sp + sp);
  inv(0, 1) = 0.5 * a * (1.0 / sp - sp);
  inv(0, 2) = 0.5 * b * (1.0 / sm + sm);
  inv(0, 3) = 0.5 * b * (1.0 / sm - sm);
  // c
  inv(2, 0) = -0.5 * b * (se / sp + sp / se);
  inv(2, 1) = -0.5 * b * (se / sp - sp / se);
  inv(2, 2) = 0.5 * a * (se / sm + sm / se);
  inv(2, 3) = 0.5 * a * (se / sm - sm / se);
  // b^dag and c^dag swap the creation/annihilation columns of each pair.
  for (int row : {0, 2}) {
    inv(row + 1, 0) = inv(row, 1);
    inv(row + 1, 1) = inv(row, 0);
    inv(row + 1, 2) = inv(row, 3);
    inv(row + 1, 3) = inv(row, 2);
  }
  return inv;
}

std::pair<ModeOperator, ModeOperator> normal_mode_operators(const NormalModeData& nm, const FockConfig& config) {
  if (!config.has_mode("b") || !config.has_mode("c"))
    throw std::invalid_argument("normal_mode_operators: configuration needs lab modes 'b' and 'c'");
  if (nm.unstable) throw std::domain_error("normal_mode_operators: r > 1, the lower normal mode is unstable");
  const ModeOperator b = ladder(config, "b");
  const ModeOperator c = ladder(config, "c");
  const ModeOperator bd = b.adjoint();
  const ModeOperator cd = c.adjoint();
  auto build = [&](const LabCoefficients& u) { return u[0] * b + u[1] * bd + u[2] * c + u[3] * cd; };
  return {build(nm.coeffs_dplus), build(nm.coeffs_dminus)};
}

}  // namespace optoblockade
