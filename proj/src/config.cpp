#include "optoblockade/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>
#include <yaml-cpp/yaml.h>

namespace optoblockade {

std::string to_string(Pipeline p) {
  return p == Pipeline::master_equation ? "master_equation" : "effective_hamiltonian";
}

std::string to_string(CoolingMode c) {
  switch (c) {
    case CoolingMode::off: return "off";
    case CoolingMode::effective: return "effective";
    case CoolingMode::explicit_mode: return "explicit";
  }
  return "unknown";
}

std::string to_string(Axis a) {
  switch (a) {
    case Axis::P: return "P";
    case Axis::omega_m: return "omega_m";
    case Axis::delta_b: return "delta_b";
    case Axis::delta_bbar: return "delta_bbar";
    case Axis::zeta: return "zeta";
    case Axis::alpha_e: return "alpha_e";
    case Axis::probe_strength: return "probe_strength";
  }
  return "unknown";
}

Axis parse_axis(const std::string& name) {
  for (Axis a : {Axis::P, Axis::omega_m, Axis::delta_b, Axis::delta_bbar, Axis::zeta, Axis::alpha_e,
                 Axis::probe_strength})
    if (to_string(a) == name) return a;
  throw ConfigError("unknown scan axis '" + name + "'");
}

std::vector<double> AxisSpec::values() const {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(points));
  if (points == 1) return {min};
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / (points - 1);
    if (spacing == Spacing::log)
      v.push_back(std::exp(std::log(min) + f * (std::log(max) - std::log(min))));
    else
      v.push_back(min + f * (max - min));
  }
  // Pin the endpoints against rounding in exp/log.
  v.front() = min;
  v.back() = max;
  return v;
}

namespace {

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
  }
}

template <typename T>
T get(const YAML::Node& node, const std::string& key, const std::string& where) {
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("bad value for '{}' in {}", key, where));
  }
}

template <typename T>
void maybe(const YAML::Node& node, const std::string& key, const std::string& where, T& out) {
  if (node[key]) out = get<T>(node, key, where);
}

template <typename T>
void maybe(const YAML::Node& node, const std::string& key, const std::string& where, std::optional<T>& out) {
  if (node[key]) out = get<T>(node, key, where);
}

AxisSpec parse_axis_spec(const YAML::Node& node, const std::string& where) {
  check_keys(node, where, {"axis", "min", "max", "points", "spacing"});
  AxisSpec a;
  a.axis = parse_axis(get<std::string>(node, "axis", where));
  a.min = get<double>(node, "min", where);
  a.max = node["max"] ? get<double>(node, "max", where) : a.min;
  a.points = node["points"] ? get<int>(node, "points", where) : 1;
  if (node["spacing"]) {
    const auto s = get<std::string>(node, "spacing", where);
    if (s == "log")
      a.spacing = Spacing::log;
    else if (s == "linear")
      a.spacing = Spacing::linear;
    else
      throw ConfigError(fmt::format("spacing must be 'linear' or 'log' in {}", where));
  }
  if (a.points < 1) throw ConfigError(fmt::format("points must be >= 1 in {}", where));
  if (a.spacing == Spacing::log && !(a.min > 0.0 && a.max > 0.0))
    throw ConfigError(fmt::format("log spacing needs positive bounds in {}", where));
  if (a.points > 1 && !(a.max > a.min)) throw ConfigError(fmt::format("max must exceed min in {}", where));
  return a;
}

PointInputs parse_params(const YAML::Node& node) {
  const std::string where = "params";
  check_keys(node, where,
             {"g0", "omega_m", "P", "delta_b", "delta_bbar", "zeta", "r", "gamma_m", "n_th", "alpha_e",
              "alpha_e_per_sqrt_zeta", "probe_strength", "J", "delta_a", "probe_freq", "imposed_rates"});
  PointInputs in;
  SystemParams& p = in.params;
  maybe(node, "g0", where, p.g0);
  maybe(node, "omega_m", where, p.omega_m);
  maybe(node, "P", where, in.P);
  maybe(node, "delta_b", where, p.delta_b);
  maybe(node, "delta_bbar", where, in.delta_bbar);
  maybe(node, "gamma_m", where, p.gamma_m);
  maybe(node, "n_th", where, p.n_th);
  maybe(node, "alpha_e", where, p.alpha_e);
  maybe(node, "alpha_e_per_sqrt_zeta", where, in.alpha_e_per_sqrt_zeta);
  maybe(node, "probe_strength", where, p.probe_strength);
  maybe(node, "J", where, p.J);
  maybe(node, "delta_a", where, p.delta_a);
  maybe(node, "probe_freq", where, p.probe_freq);
  if (node["omega_m"] && node["P"]) throw ConfigError("params: give omega_m or P, not both");
  if (node["delta_b"] && node["delta_bbar"]) throw ConfigError("params: give delta_b or delta_bbar, not both");
  if (node["alpha_e"] && node["alpha_e_per_sqrt_zeta"])
    throw ConfigError("params: give alpha_e or alpha_e_per_sqrt_zeta, not both");
  if (node["zeta"] && node["r"]) throw ConfigError("params: give zeta or r, not both");
  if (node["r"]) p.r = get<double>(node, "r", where);
  if (node["zeta"]) {
    const double z = get<double>(node, "zeta", where);
    if (!(z >= 0.0 && z <= 1.0)) throw ConfigError("params: zeta must lie in [0, 1]");
    p.set_zeta(z);
  }
  if (const YAML::Node rates = node["imposed_rates"]) {
    if (rates.IsScalar()) {
      if (rates.as<std::string>() != "inverse_sqrt_P")
        throw ConfigError("params: imposed_rates must be 'inverse_sqrt_P' or {gamma_up, gamma_down}");
      in.imposed_inverse_sqrt_P = true;
    } else {
      check_keys(rates, "params.imposed_rates", {"gamma_up", "gamma_down"});
      in.imposed_rates = UpDownRates{get<double>(rates, "gamma_down", "params.imposed_rates"),
                                     get<double>(rates, "gamma_up", "params.imposed_rates")};
    }
  }
  return in;
}

}  // namespace

RunConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("YAML parse error: ") + e.what());
  }
  if (!root || !root.IsMap()) throw ConfigError("config must be a mapping");
  check_keys(root, "config",
             {"name", "pipeline", "cooling", "truncation", "paper_fidelity", "literal_a_detuning", "params", "scan",
              "minimize", "convergence_check", "trace"});
  RunConfig cfg;
  maybe(root, "name", "config", cfg.name);
  if (root["pipeline"]) {
    const auto s = get<std::string>(root, "pipeline", "config");
    if (s == "master_equation")
      cfg.pipeline = Pipeline::master_equation;
    else if (s == "effective_hamiltonian")
      cfg.pipeline = Pipeline::effective_hamiltonian;
    else
      throw ConfigError("pipeline must be 'master_equation' or 'effective_hamiltonian'");
  }
  if (root["cooling"]) {
    const auto s = get<std::string>(root, "cooling", "config");
    if (s == "off")
      cfg.cooling = CoolingMode::off;
    else if (s == "effective")
      cfg.cooling = CoolingMode::effective;
    else if (s == "explicit")
      cfg.cooling = CoolingMode::explicit_mode;
    else
      throw ConfigError("cooling must be 'off', 'effective' or 'explicit'");
  }
  maybe(root, "truncation", "config", cfg.truncation);
  if (cfg.truncation < 2) throw ConfigError("truncation must be >= 2");
  maybe(root, "paper_fidelity", "config", cfg.paper_fidelity);
  maybe(root, "literal_a_detuning", "config", cfg.literal_a_detuning);
  maybe(root, "convergence_check", "config", cfg.convergence_check);
  if (root["params"]) cfg.base = parse_params(root["params"]);
  if (const YAML::Node scan = root["scan"]) {
    if (!scan.IsSequence()) throw ConfigError("scan must be a list of axes");
    if (scan.size() > 2) throw ConfigError("scan supports at most two axes");
    for (std::size_t i = 0; i < scan.size(); ++i)
      cfg.scan.push_back(parse_axis_spec(scan[i], fmt::format("scan[{}]", i)));
    if (cfg.scan.size() == 2 && cfg.scan[0].axis == cfg.scan[1].axis) throw ConfigError("scan axes must differ");
  }
  if (root["minimize"]) {
    cfg.minimize = parse_axis_spec(root["minimize"], "minimize");
    for (const auto& a : cfg.scan)
      if (a.axis == cfg.minimize->axis) throw ConfigError("minimize axis duplicates a scan axis");
  }
  if (const YAML::Node tr = root["trace"]) {
    check_keys(tr, "trace", {"t_final", "samples", "rel_tol", "abs_tol"});
    maybe(tr, "t_final", "trace", cfg.trace.t_final);
    maybe(tr, "samples", "trace", cfg.trace.samples);
    maybe(tr, "rel_tol", "trace", cfg.trace.rel_tol);
    maybe(tr, "abs_tol", "trace", cfg.trace.abs_tol);
    if (!(cfg.trace.t_final > 0.0) || cfg.trace.samples < 2) throw ConfigError("trace: need t_final > 0, samples >= 2");
  }
  // Catch inconsistent physical inputs up front.
  try {
    resolve_params(cfg.base, cfg.coefficients()).validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

PointInputs apply_axes(const PointInputs& base, const std::vector<std::pair<Axis, double>>& coords) {
  PointInputs in = base;
  for (const auto& [axis, value] : coords) {
    switch (axis) {
      case Axis::P: in.P = value; break;
      case Axis::omega_m:
        in.P.reset();
        in.params.omega_m = value;
        break;
      case Axis::delta_b:
        in.delta_bbar.reset();
        in.params.delta_b = value;
        break;
      case Axis::delta_bbar: in.delta_bbar = value; break;
      case Axis::zeta:
        if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("zeta must lie in [0, 1]");
        in.params.set_zeta(value);
        break;
      case Axis::alpha_e:
        in.alpha_e_per_sqrt_zeta.reset();
        in.params.alpha_e = value;
        break;
      case Axis::probe_strength: in.params.probe_strength = value; break;
    }
  }
  return in;
}

SystemParams resolve_params(const PointInputs& in, Coefficients mode) {
  SystemParams p = in.params;
  if (in.P) {
    if (!(p.g0 > 0.0)) throw ConfigError("P requires g0 > 0");
    p.omega_m = *in.P * p.kappa * p.kappa * p.kappa / (p.g0 * p.g0);
  }
  if (in.delta_bbar) {
    const double target = *in.delta_bbar;
    if (!(target > 0.0)) throw ConfigError("delta_bbar must be positive");
    // bbar frequency is delta_b times a factor close to one; a fixed-point iteration converges quickly.
    double db = target;
    for (int it = 0; it < 200; ++it) {
      p.delta_b = db;
      const double f = diagonalize(p.bilinear()).bbar_frequency(mode);
      const double next = db * target / f;
      if (!std::isfinite(next)) throw ConfigError("delta_bbar could not be resolved");
      const bool done = std::abs(next - db) <= 1e-15 * db;
      db = next;
      if (done) break;
    }
    p.delta_b = db;
  }
  if (in.alpha_e_per_sqrt_zeta) p.alpha_e = *in.alpha_e_per_sqrt_zeta * std::sqrt(p.zeta());
  return p;
}

std::optional<UpDownRates> resolve_imposed_rates(const PointInputs& in) {
  if (in.imposed_rates) return in.imposed_rates;
  if (!in.imposed_inverse_sqrt_P) return std::nullopt;
  const SystemParams& p = in.params;
  const double P = in.P ? *in.P : p.merit();
  const double g = p.kappa / std::sqrt(P);
  return UpDownRates{g, g};
}

}  // namespace optoblockade
