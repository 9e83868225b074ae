#include "optoblockade/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace optoblockade {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_modes(const FockConfig& config, std::initializer_list<const char*> labels, const char* who) {
  for (const char* l : labels)
    if (!config.has_mode(l)) throw std::invalid_argument(std::string(who) + ": configuration lacks mode '" + l + "'");
}

void require_stable(const NormalModeData& nm, const char* who) {
  if (nm.unstable || !(nm.r < 1.0))
    throw std::domain_error(std::string(who) + ": r >= 1, no stable normal-mode description");
}

// Components of b and (c + c^dag) on (bbar, bbar^dag, d, d^dag).
struct NormalExpansion {
  double b_bbar, b_bbar_dag, b_d, b_d_dag;
  double x_bbar, x_d;  // c + c^dag = x_bbar (bbar + bbar^dag) + x_d (d + d^dag)
  double c_bbar, c_bbar_dag, c_d, c_d_dag;
};

NormalExpansion expansion(const NormalModeData& nm, Coefficients mode) {
  NormalExpansion e{};
  if (mode == Coefficients::exact) {
    const Eigen::Matrix4d inv = inverse_transform(nm);
    e.b_bbar = inv(0, 0);
    e.b_bbar_dag = inv(0, 1);
    e.b_d = inv(0, 2);
    e.b_d_dag = inv(0, 3);
    e.c_bbar = inv(2, 0);
    e.c_bbar_dag = inv(2, 1);
    e.c_d = inv(2, 2);
    e.c_d_dag = inv(2, 3);
    e.x_bbar = inv(2, 0) + inv(2, 1);
    e.x_d = inv(2, 2) + inv(2, 3);
  } else {
    const double z = nm.zeta;
    const double sz = std::sqrt(z);
    const double k = 0.5 * std::sqrt(nm.eta / z);
    e.b_bbar = 1.0;
    e.b_d = k;
    e.b_d_dag = k;
    e.c_d = 0.5 / sz + 0.5 * sz;
    e.c_d_dag = 0.5 / sz - 0.5 * sz;
    e.x_d = 1.0 / sz;
  }
  return e;
}

ModeOperator hc_sum(const ModeOperator& term) { return term + term.adjoint(); }

}  // namespace

// ---------------------------------------------------------------------------
// SystemParams

void SystemParams::validate() const {
  if (!(kappa > 0.0)) throw std::invalid_argument("SystemParams: kappa must be positive");
  if (!(omega_m > 0.0)) throw std::invalid_argument("SystemParams: omega_m must be positive");
  if (!(delta_b > 0.0)) throw std::invalid_argument("SystemParams: delta_b must be positive");
  if (g0 < 0.0 || r < 0.0 || gamma_m < 0.0 || n_th < 0.0 || alpha_e < 0.0 || probe_strength < 0.0 || J < 0.0)
    throw std::invalid_argument("SystemParams: rates, couplings and occupations must be non-negative");
}

double SystemParams::G0() const { return 0.5 * r * std::sqrt(omega_m * delta_b); }

void SystemParams::set_G0(double G0) { r = 2.0 * G0 / std::sqrt(omega_m * delta_b); }

void SystemParams::set_zeta(double zeta) {
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw std::invalid_argument("SystemParams: zeta must lie in [0, 1]");
  r = std::sqrt((1.0 - zeta) * (1.0 + zeta));
}

double SystemParams::zeta() const {
  const double x = (1.0 - r) * (1.0 + r);
  return x >= 0.0 ? std::sqrt(x) : kNaN;
}

double SystemParams::g_nl() const { return g0 / std::sqrt(zeta()); }

// ---------------------------------------------------------------------------

NonlinearCoefficients nonlinear_coefficients(const SystemParams& p, const NormalModeData& nm, Coefficients mode) {
  require_stable(nm, "nonlinear_coefficients");
  NonlinearCoefficients k;
  if (mode == Coefficients::first_order) {
    const double g = p.g0 / std::sqrt(nm.zeta);
    const double small = g * std::sqrt(nm.eta / (4.0 * nm.zeta));
    k.bbar_dag_a_d = -g;
    k.a_dag_bbar_d = -g;
    k.a_dag_d_d = -small;
    k.a_d_d = -small;
    k.a_quad_n_d = -2.0 * small;
    return k;
  }
  // -g0 (a^dag b + b^dag a)(c + c^dag) with b = p bbar + q bbar^dag + s d + t d^dag
  // and c + c^dag = u (bbar + bbar^dag) + v (d + d^dag).
  const NormalExpansion e = expansion(nm, mode);
  const double pb = e.b_bbar;
  const double s = e.b_d;
  const double t = e.b_d_dag;
  const double u = e.x_bbar;
  const double v = e.x_d;
  k.bbar_dag_a_d = -p.g0 * (pb * v + t * u);
  k.a_dag_bbar_d = -p.g0 * (pb * v + s * u);
  k.a_dag_d_d = -p.g0 * s * v;
  k.a_d_d = -p.g0 * t * v;
  k.a_quad_n_d = -p.g0 * (s + t) * v;
  return k;
}

double nonlinear_coupling(const SystemParams& p, const NormalModeData& nm, Coefficients mode) {
  return std::abs(nonlinear_coefficients(p, nm, mode).bbar_dag_a_d);
}

double resolved_delta_a(const SystemParams& p, const NormalModeData& nm, Coefficients mode) {
  if (p.delta_a) return *p.delta_a;
  require_stable(nm, "resolved_delta_a");
  return nm.bbar_frequency(mode) - nm.d_frequency(mode);
}

double resolved_probe_freq(const SystemParams& p, const NormalModeData& nm, Coefficients mode) {
  if (p.probe_freq) return *p.probe_freq;
  return nm.bbar_frequency(mode) - nonlinear_coupling(p, nm, mode);
}

ModeOperator hamiltonian_lab(const SystemParams& p, const FockConfig& config) {
  require_modes(config, {"a", "b", "c"}, "hamiltonian_lab");
  p.validate();
  const NormalModeData nm = diagonalize(p.bilinear());
  const double delta_a = resolved_delta_a(p, nm, Coefficients::exact);
  const ModeOperator a = ladder(config, "a");
  const ModeOperator b = ladder(config, "b");
  const ModeOperator c = ladder(config, "c");
  const ModeOperator ad = a.adjoint();
  const ModeOperator bd = b.adjoint();
  const ModeOperator x = c + c.adjoint();
  return delta_a * (ad * a) + p.delta_b * (bd * b) + p.omega_m * (c.adjoint() * c) - p.G0() * ((b + bd) * x) -
         p.g0 * ((ad * b + bd * a) * x);
}

ModeOperator nonlinear_family(const FockConfig& config, int family_index) {
  require_modes(config, {"a", "bbar", "d"}, "nonlinear_family");
  const ModeOperator a = ladder(config, "a");
  const ModeOperator bb = ladder(config, "bbar");
  const ModeOperator d = ladder(config, "d");
  const ModeOperator ad = a.adjoint();
  const ModeOperator bbd = bb.adjoint();
  const ModeOperator dd = d.adjoint();
  switch (family_index) {
    case 1: return hc_sum(bbd * a * d);
    case 2: return hc_sum(ad * bb * d);
    case 3: return hc_sum(ad * d * d);
    case 4: return hc_sum(a * d * d);
    case 5: return (a + ad) * (dd * d);
    default: throw std::out_of_range("nonlinear_family: family index must be 1..5");
  }
}

ModeOperator hamiltonian_normal(const SystemParams& p, const NormalModeData& nm, const FockConfig& config,
                                const TermFlags& flags, Coefficients mode) {
  require_modes(config, {"a", "bbar", "d"}, "hamiltonian_normal");
  require_stable(nm, "hamiltonian_normal");
  const double delta_a = resolved_delta_a(p, nm, mode);
  ModeOperator h = delta_a * number(config, "a") + nm.bbar_frequency(mode) * number(config, "bbar") +
                   nm.d_frequency(mode) * number(config, "d");
  const NonlinearCoefficients k = nonlinear_coefficients(p, nm, mode);
  const std::pair<bool, double> families[5] = {{flags.bbar_dag_a_d, k.bbar_dag_a_d},
                                               {flags.a_dag_bbar_d, k.a_dag_bbar_d},
                                               {flags.a_dag_d_d, k.a_dag_d_d},
                                               {flags.a_d_d, k.a_d_d},
                                               {flags.a_quad_n_d, k.a_quad_n_d}};
  for (int i = 0; i < 5; ++i)
    if (families[i].first && families[i].second != 0.0) h += families[i].second * nonlinear_family(config, i + 1);
  return h;
}

ModeOperator effective_hamiltonian(const SystemParams& p, const NormalModeData& nm, const FockConfig& config,
                                   const EffectiveHamiltonianOptions& options) {
  require_modes(config, {"a", "bbar", "d"}, "effective_hamiltonian");
  require_stable(nm, "effective_hamiltonian");
  const Coefficients mode = options.mode;
  const double omega_d = nm.d_frequency(mode);
  const double omega_p = resolved_probe_freq(p, nm, mode);
  const double det_bbar = nm.bbar_frequency(mode) - omega_p;
  const double det_a = options.literal_a_detuning ? -omega_d : resolved_delta_a(p, nm, mode) - omega_p;
  const NonlinearCoefficients k = nonlinear_coefficients(p, nm, mode);

  const ModeOperator bb = ladder(config, "bbar");
  const Complex half_loss(0.0, -0.5 * p.kappa);
  ModeOperator h = (det_a + half_loss) * number(config, "a") + (det_bbar + half_loss) * number(config, "bbar") +
                   omega_d * number(config, "d");
  h += k.bbar_dag_a_d * nonlinear_family(config, 1);
  h += k.a_dag_bbar_d * nonlinear_family(config, 2);
  h += Complex(0.0, p.probe_strength) * (bb.adjoint() - bb);
  return h;
}

double cooling_rate(const SystemParams& p, const NormalModeData& nm, Coefficients mode) {
  require_stable(nm, "cooling_rate");
  const double coupling = p.g0 * p.alpha_e * expansion(nm, mode).x_d;
  return 4.0 * coupling * coupling / p.kappa;
}

CoolingTerms cooling_channel(const SystemParams& p, const NormalModeData& nm, const FockConfig& config,
                             CoolingVariant variant, Coefficients mode) {
  require_modes(config, {"d"}, "cooling_channel");
  require_stable(nm, "cooling_channel");
  CoolingTerms out;
  if (p.alpha_e == 0.0) return out;
  const ModeOperator d = ladder(config, "d");
  if (variant == CoolingVariant::effective) {
    out.channels.push_back({d, cooling_rate(p, nm, mode), "cooling"});
    return out;
  }
  if (!config.has_mode("f")) throw std::invalid_argument("cooling_channel: explicit variant needs an 'f' mode");
  const ModeOperator f = ladder(config, "f");
  const double coupling = p.g0 * p.alpha_e * expansion(nm, mode).x_d;
  out.hamiltonian = nm.d_frequency(mode) * number(config, "f") - coupling * ((f + f.adjoint()) * (d + d.adjoint()));
  out.channels.push_back({f, p.kappa, "kappa_f"});
  return out;
}

std::vector<LindbladChannel> dissipation_channels(const SystemParams& p, const NormalModeData& nm,
                                                  const FockConfig& config, Basis basis, Coefficients mode) {
  std::vector<LindbladChannel> out;
  auto add = [&out](ModeOperator op, double rate, std::string name) {
    if (rate > 0.0) out.push_back({std::move(op), rate, std::move(name)});
  };
  const double hot = p.gamma_m * (p.n_th + 1.0);
  const double cold = p.gamma_m * p.n_th;
  if (basis == Basis::lab) {
    require_modes(config, {"a", "b", "c"}, "dissipation_channels");
    const ModeOperator c = ladder(config, "c");
    add(ladder(config, "a"), p.kappa, "kappa_a");
    add(ladder(config, "b"), p.kappa, "kappa_b");
    add(c, hot, "gamma_m_down");
    add(c.adjoint(), cold, "gamma_m_up");
    return out;
  }
  require_modes(config, {"a", "bbar", "d"}, "dissipation_channels");
  require_stable(nm, "dissipation_channels");
  const NormalExpansion e = expansion(nm, mode);
  const ModeOperator bb = ladder(config, "bbar");
  const ModeOperator d = ladder(config, "d");
  const ModeOperator bbd = bb.adjoint();
  const ModeOperator dd = d.adjoint();
  const ModeOperator b_op = e.b_bbar * bb + e.b_bbar_dag * bbd + e.b_d * d + e.b_d_dag * dd;
  const ModeOperator c_op = e.c_bbar * bb + e.c_bbar_dag * bbd + e.c_d * d + e.c_d_dag * dd;
  add(ladder(config, "a"), p.kappa, "kappa_a");
  add(b_op, p.kappa, "kappa_b");
  add(c_op, hot, "gamma_m_down");
  add(c_op.adjoint(), cold, "gamma_m_up");
  return out;
}

UpDownRates rates_updown(const SystemParams& p, const NormalModeData& nm) {
  const double z = nm.zeta;
  if (!(z > 0.0)) throw std::domain_error("rates_updown: zeta must be positive");
  const double cavity = nm.eta / (4.0 * z) * p.kappa;
  const double bath = p.gamma_m / (4.0 * z);
  return {cavity + bath * (2.0 * p.n_th + 1.0 + 2.0 * z), cavity + bath * (2.0 * p.n_th + 1.0 - 2.0 * z)};
}

bool MeritReport::all_pass() const {
  if (!stable) return false;
  for (const auto& l : links)
    if (!l.pass) return false;
  return true;
}

MeritReport merit_and_stability(const SystemParams& p, const NormalModeData& nm, double threshold) {
  MeritReport rep;
  rep.merit = p.merit();
  rep.r = nm.r;
  rep.zeta = nm.zeta;
  rep.instability_margin = 1.0 - nm.r;
  rep.stable = nm.r < 1.0;
  rep.threshold = threshold;
  const double g_nl = p.g0 / std::sqrt(nm.zeta);
  double up = kNaN;
  if (nm.zeta > 0.0) {
    rep.rates = rates_updown(p, nm);
    up = rep.rates->gamma_up;
  }
  auto link = [&](std::string name, double ratio) {
    rep.links.push_back({std::move(name), ratio, ratio >= threshold});
  };
  link("gamma_up << kappa", up > 0.0 ? p.kappa / up : (up == 0.0 ? std::numeric_limits<double>::infinity() : kNaN));
  link("kappa << g_nl", g_nl / p.kappa);
  link("g_nl << omega_m zeta", p.omega_m * nm.zeta / g_nl);
  return rep;
}

MasterEquationModel build_master_equation(const SystemParams& p, const NormalModeData& nm, const FockConfig& config,
                                          const MasterEquationOptions& options) {
  require_modes(config, {"a", "bbar", "d"}, "build_master_equation");
  require_stable(nm, "build_master_equation");
  const Coefficients mode = options.mode;
  MasterEquationModel m{ModeOperator::zero(config), {}, {}, 0.0, 0.0, 0.0};
  m.omega_d = nm.d_frequency(mode);
  m.g_nl = nonlinear_coupling(p, nm, mode);
  m.probe_freq = resolved_probe_freq(p, nm, mode);

  const double det_a = resolved_delta_a(p, nm, mode) - m.probe_freq;
  const double det_bbar = nm.bbar_frequency(mode) - m.probe_freq;
  const ModeOperator a = ladder(config, "a");
  const ModeOperator bb = ladder(config, "bbar");
  const ModeOperator d = ladder(config, "d");
  const NonlinearCoefficients k = nonlinear_coefficients(p, nm, mode);

  m.hamiltonian = det_a * number(config, "a") + det_bbar * number(config, "bbar") + m.omega_d * number(config, "d");
  if (options.flags.bbar_dag_a_d) m.hamiltonian += k.bbar_dag_a_d * nonlinear_family(config, 1);
  if (options.flags.a_dag_bbar_d) m.hamiltonian += k.a_dag_bbar_d * nonlinear_family(config, 2);
  m.hamiltonian += Complex(0.0, p.probe_strength) * (bb.adjoint() - bb);

  // With a -> a exp(-i w_p t): a^dag d d -> exp(+i w_p t), a d d -> exp(-i w_p t),
  // and (a + a^dag) d^dag d splits into both.
  const ModeOperator dd = d.adjoint();
  if (options.flags.a_dag_d_d && k.a_dag_d_d != 0.0)
    m.harmonic_terms.push_back({k.a_dag_d_d * (a * dd * dd), m.probe_freq});
  if (options.flags.a_d_d && k.a_d_d != 0.0) m.harmonic_terms.push_back({k.a_d_d * (a * d * d), m.probe_freq});
  if (options.flags.a_quad_n_d && k.a_quad_n_d != 0.0)
    m.harmonic_terms.push_back({k.a_quad_n_d * (a * dd * d), m.probe_freq});

  if (options.imposed_d_rates) {
    m.channels.push_back({a, p.kappa, "kappa_a"});
    m.channels.push_back({bb, p.kappa, "kappa_b"});
    if (options.imposed_d_rates->gamma_down > 0.0)
      m.channels.push_back({d, options.imposed_d_rates->gamma_down, "gamma_down"});
    if (options.imposed_d_rates->gamma_up > 0.0)
      m.channels.push_back({dd, options.imposed_d_rates->gamma_up, "gamma_up"});
  } else {
    m.channels = dissipation_channels(p, nm, config, Basis::normal, mode);
  }

  if (options.cooling) {
    CoolingTerms cool = cooling_channel(p, nm, config, *options.cooling, mode);
    if (cool.hamiltonian) m.hamiltonian += *cool.hamiltonian;
    for (auto& ch : cool.channels) m.channels.push_back(std::move(ch));
  }
  return m;
}

FockConfig normal_config(int dim, bool with_cooling_mode) {
  if (with_cooling_mode) return FockConfig::uniform({"a", "bbar", "d", "f"}, dim);
  return FockConfig::uniform({"a", "bbar", "d"}, dim);
}

FockConfig lab_config(int dim) { return FockConfig::uniform({"a", "b", "c"}, dim); }

}  // namespace optoblockade
