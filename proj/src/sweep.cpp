#include "optoblockade/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "optoblockade/observables.hpp"

namespace optoblockade {

namespace {

std::optional<CoolingVariant> cooling_variant(CoolingMode c) {
  switch (c) {
    case CoolingMode::off: return std::nullopt;
    case CoolingMode::effective: return CoolingVariant::effective;
    case CoolingMode::explicit_mode: return CoolingVariant::explicit_mode;
  }
  return std::nullopt;
}

MasterEquationOptions me_options(const RunConfig& cfg, const PointInputs& inputs, std::optional<CoolingVariant> cool) {
  MasterEquationOptions o;
  o.mode = cfg.coefficients();
  o.flags = TermFlags::co_rotating();
  o.cooling = cool;
  o.imposed_d_rates = resolve_imposed_rates(inputs);
  return o;
}

void fill_populations(ResultRecord& rec, const QuantumState& s) {
  const auto pops = populations(s);
  rec.n_a = pops.at("a");
  rec.n_bbar = pops.at("bbar");
  rec.n_d = pops.at("d");
}

// g2 of the no-jump state for a given probe strength.
std::pair<std::optional<double>, QuantumState> no_jump(const RunConfig& cfg, const PointInputs& inputs,
                                                       const SystemParams& p, const NormalModeData& nm,
                                                       const FockConfig& config) {
  const MasterEquationModel m = build_master_equation(p, nm, config, me_options(cfg, inputs, cooling_variant(cfg.cooling)));
  const LindbladGenerator gen(m.hamiltonian, m.channels);
  QuantumState psi = quasi_steady_state(ModeOperator(config, gen.non_hermitian_hamiltonian()));
  return {g2_zero(psi, "bbar"), std::move(psi)};
}

void evaluate_into(ResultRecord& rec, const RunConfig& cfg, const PointInputs& inputs, int truncation,
                   const SteadyStateOptions& steady) {
  const Coefficients mode = cfg.coefficients();
  const SystemParams p = resolve_params(inputs, mode);
  rec.params = p;
  rec.truncation = truncation;
  const NormalModeData nm = diagonalize(p.bilinear());
  rec.delta_bbar = nm.bbar_frequency(mode);
  const MeritReport merit = merit_and_stability(p, nm);
  rec.stable = merit.stable;
  rec.instability_margin = merit.instability_margin;
  rec.chain_ok = merit.all_pass();
  rec.rates = merit.rates;
  if (!merit.stable || !(nm.xi_minus > 0.0)) {
    rec.ok = false;
    rec.message = "no stable lower normal mode";
    return;
  }
  const FockConfig config = normal_config(truncation, cfg.cooling == CoolingMode::explicit_mode);

  if (cfg.pipeline == Pipeline::master_equation) {
    const MasterEquationModel m = build_master_equation(p, nm, config, me_options(cfg, inputs, cooling_variant(cfg.cooling)));
    const SteadyStateResult ss = steady_state(m.hamiltonian, m.channels, steady);
    rec.g2 = g2_zero(ss.state, "bbar");
    rec.g2_output = g2_zero(ss.state, output_field_operator(nm, config));
    rec.residual = ss.residual;
    rec.method = ss.method_used == SteadyStateMethod::null_space ? "null_space" : "long_time";
    fill_populations(rec, ss.state);
    return;
  }

  if (cfg.paper_fidelity) {
    EffectiveHamiltonianOptions eo{mode, cfg.literal_a_detuning};
    rec.g2 = g2_from_amplitudes(quasi_steady_amplitudes(p, nm, eo));
    SystemParams half = p;
    half.probe_strength *= 0.5;
    const auto g2_half = g2_from_amplitudes(quasi_steady_amplitudes(half, nm, eo));
    if (rec.g2 && g2_half) rec.probe_rel_change = std::abs(*g2_half / *rec.g2 - 1.0);
    rec.method = "nine_ket";
    return;
  }
  auto [g2, psi] = no_jump(cfg, inputs, p, nm, config);
  rec.g2 = g2;
  rec.g2_output = g2_zero(psi, output_field_operator(nm, config));
  fill_populations(rec, psi);
  PointInputs half_in = inputs;
  SystemParams half = p;
  half.probe_strength *= 0.5;
  const auto g2_half = no_jump(cfg, half_in, half, nm, config).first;
  if (g2 && g2_half) rec.probe_rel_change = std::abs(*g2_half / *g2 - 1.0);
  rec.method = "no_jump";
}

ResultRecord evaluate_single(const RunConfig& cfg, const PointInputs& inputs, int truncation,
                             const SteadyStateOptions& steady) {
  ResultRecord rec;
  rec.params = inputs.params;
  try {
    evaluate_into(rec, cfg, inputs, truncation, steady);
    if (rec.ok && !rec.g2) {
      rec.ok = false;
      rec.message = "population below floor";
    }
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.message = e.what();
  }
  return rec;
}

std::vector<std::vector<std::pair<Axis, double>>> grid(const std::vector<AxisSpec>& axes) {
  std::vector<std::vector<std::pair<Axis, double>>> out{{}};
  for (const auto& a : axes) {
    std::vector<std::vector<std::pair<Axis, double>>> next;
    for (const auto& prefix : out)
      for (double v : a.values()) {
        auto c = prefix;
        c.emplace_back(a.axis, v);
        next.push_back(std::move(c));
      }
    out = std::move(next);
  }
  return out;
}

std::string fmt_num(double v) { return fmt::format("{:.10g}", v); }
std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_num(*v) : std::string(); }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

ResultRecord evaluate_point(const RunConfig& cfg, const PointInputs& inputs, int truncation,
                            const SteadyStateOptions& steady) {
  const auto start = std::chrono::steady_clock::now();
  ResultRecord best;
  if (!cfg.minimize) {
    best = evaluate_single(cfg, inputs, truncation, steady);
  } else {
    const std::vector<double> inner = cfg.minimize->values();
    bool have = false;
    for (double v : inner) {
      ResultRecord r;
      try {
        r = evaluate_single(cfg, apply_axes(inputs, {{cfg.minimize->axis, v}}), truncation, steady);
      } catch (const std::exception& e) {
        r.ok = false;
        r.message = e.what();
      }
      r.coords = {{cfg.minimize->axis, v}};
      if (!have || (r.ok && (!best.ok || *r.g2 < *best.g2))) {
        best = std::move(r);
        have = true;
      }
    }
    best.inner_points = static_cast<int>(inner.size());
  }
  best.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return best;
}

std::vector<ResultRecord> run_sweep(const RunConfig& cfg, int workers) {
  const auto points = grid(cfg.scan);
  std::vector<ResultRecord> records(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      ResultRecord r;
      try {
        r = evaluate_point(cfg, apply_axes(cfg.base, points[i]), cfg.truncation);
      } catch (const std::exception& e) {
        r.ok = false;
        r.message = e.what();
      }
      // Inner minimization coordinates go after the grid coordinates.
      auto coords = points[i];
      coords.insert(coords.end(), r.coords.begin(), r.coords.end());
      r.coords = std::move(coords);
      r.index = i;
      records[i] = std::move(r);
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(points.size())));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(work);
  }

  if (cfg.convergence_check) {
    ResultRecord* best = nullptr;
    for (auto& r : records)
      if (r.ok && r.g2 && (!best || *r.g2 < *best->g2)) best = &r;
    if (best) {
      RunConfig fixed = cfg;
      fixed.minimize.reset();
      SteadyStateOptions steady;
      steady.max_direct_dim = 20000;
      steady.verify_uniqueness = false;
      const ResultRecord refined =
          evaluate_single(fixed, apply_axes(cfg.base, best->coords), cfg.truncation + 1, steady);
      if (refined.ok && refined.g2) {
        best->g2_refined = refined.g2;
        best->refinement_rel_change = std::abs(*refined.g2 / *best->g2 - 1.0);
      } else {
        best->message = "refinement failed: " + refined.message;
      }
    }
  }
  return records;
}

void write_sweep_csv(std::ostream& os, const RunConfig& cfg, const std::vector<ResultRecord>& records, bool timing) {
  os << "index,P,g0,omega_m,kappa,delta_b,delta_bbar,zeta,r,alpha_e,probe_strength,gamma_m,n_th,"
        "pipeline,coefficients,cooling,truncation,inner_points,g2,g2_output,n_a,n_bbar,n_d,gamma_down,gamma_up,"
        "stable,instability_margin,chain_ok,probe_rel_change,residual,method,g2_refined,refinement_rel_change,ok,"
        "message";
  if (timing) os << ",wall_seconds";
  os << '\n';
  for (const auto& r : records) {
    const SystemParams& p = r.params;
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{},{},", r.index, fmt_num(p.merit()), fmt_num(p.g0),
               fmt_num(p.omega_m), fmt_num(p.kappa), fmt_num(p.delta_b), fmt_num(r.delta_bbar), fmt_num(p.zeta()),
               fmt_num(p.r), fmt_num(p.alpha_e), fmt_num(p.probe_strength), fmt_num(p.gamma_m), fmt_num(p.n_th));
    fmt::print(os, "{},{},{},{},{},", to_string(cfg.pipeline),
               cfg.coefficients() == Coefficients::exact ? "exact" : "first_order", to_string(cfg.cooling),
               r.truncation, r.inner_points);
    fmt::print(os, "{},{},{},{},{},{},{},", fmt_opt(r.g2), fmt_opt(r.g2_output), fmt_opt(r.n_a), fmt_opt(r.n_bbar),
               fmt_opt(r.n_d), r.rates ? fmt_num(r.rates->gamma_down) : "", r.rates ? fmt_num(r.rates->gamma_up) : "");
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{}", r.stable ? 1 : 0, fmt_num(r.instability_margin),
               r.chain_ok ? 1 : 0, fmt_opt(r.probe_rel_change), fmt_opt(r.residual), r.method, fmt_opt(r.g2_refined),
               fmt_opt(r.refinement_rel_change), r.ok ? 1 : 0, csv_escape(r.message));
    if (timing) fmt::print(os, ",{:.3f}", r.wall_seconds);
    os << '\n';
  }
}

std::vector<TraceRun> run_time_trace(const RunConfig& cfg, int truncation) {
  const Coefficients mode = cfg.coefficients();
  const SystemParams p = resolve_params(cfg.base, mode);
  const NormalModeData nm = diagonalize(p.bilinear());
  const bool explicit_f = cfg.cooling == CoolingMode::explicit_mode;
  const FockConfig config = normal_config(truncation, explicit_f);
  const CoolingVariant on = explicit_f ? CoolingVariant::explicit_mode : CoolingVariant::effective;

  EvolutionSpec spec;
  spec.t_final = cfg.trace.t_final;
  spec.rel_tol = cfg.trace.rel_tol;
  spec.abs_tol = cfg.trace.abs_tol;
  spec.store_states = false;
  for (int i = 0; i < cfg.trace.samples; ++i)
    spec.record_times.push_back(cfg.trace.t_final * i / (cfg.trace.samples - 1));

  std::vector<TraceRun> runs;
  for (bool cooling : {false, true}) {
    TraceRun run;
    run.cooling = cooling;
    const std::optional<CoolingVariant> variant = cooling ? std::optional<CoolingVariant>(on) : std::nullopt;
    const MasterEquationModel m = build_master_equation(p, nm, config, me_options(cfg, cfg.base, variant));
    const ModeOperator n_a = number(config, "a");
    const ModeOperator n_b = number(config, "bbar");
    const ModeOperator n_d = number(config, "d");
    const ModeOperator b = ladder(config, "bbar");
    const Trajectory tr = evolve(QuantumState::vacuum(config), LindbladGenerator(m.hamiltonian, m.channels), spec,
                                 [&](double t, const QuantumState& s) {
                                   TraceRecord rec;
                                   rec.cooling = cooling;
                                   rec.time = t;
                                   rec.g2 = g2_zero(s, b);
                                   rec.n_a = expectation(s, n_a).real();
                                   rec.n_bbar = expectation(s, n_b).real();
                                   rec.n_d = expectation(s, n_d).real();
                                   rec.trace_drift = std::abs(s.trace() - 1.0);
                                   rec.min_eigenvalue = s.min_eigenvalue();
                                   run.records.push_back(rec);
                                 });
    run.status = tr.status;
    run.message = tr.diagnostics.message;
    runs.push_back(std::move(run));
  }
  return runs;
}

void write_trace_csv(std::ostream& os, const RunConfig& cfg, const std::vector<TraceRun>& runs) {
  const SystemParams p = resolve_params(cfg.base, cfg.coefficients());
  os << "cooling,time,g2,n_a,n_bbar,n_d,trace_drift,min_eigenvalue,P,zeta,delta_b,alpha_e,probe_strength,status\n";
  for (const auto& run : runs)
    for (const auto& r : run.records)
      fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", run.cooling ? "on" : "off", fmt_num(r.time),
                 fmt_opt(r.g2), fmt_num(r.n_a), fmt_num(r.n_bbar), fmt_num(r.n_d), fmt_num(r.trace_drift),
                 fmt_num(r.min_eigenvalue), fmt_num(p.merit()), fmt_num(p.zeta()), fmt_num(p.delta_b),
                 fmt_num(run.cooling ? p.alpha_e : 0.0), fmt_num(p.probe_strength), to_string(run.status));
}

std::string feasibility_report(const RunConfig& cfg) {
  const SystemParams p = resolve_params(cfg.base, cfg.coefficients());
  const NormalModeData nm = diagonalize(p.bilinear());
  const MeritReport m = merit_and_stability(p, nm);
  std::string out;
  out += fmt::format("P = g0^2 omega_m / kappa^3   {:.6g}\n", m.merit);
  out += fmt::format("r                            {:.10g}\n", m.r);
  out += fmt::format("zeta                         {:.6g}\n", m.zeta);
  out += fmt::format("instability margin 1 - r     {:.6g}\n", m.instability_margin);
  out += fmt::format("stable                       {}\n", m.stable ? "yes" : "no");
  if (m.rates) {
    out += fmt::format("gamma_down                   {:.6g}\n", m.rates->gamma_down);
    out += fmt::format("gamma_up                     {:.6g}\n", m.rates->gamma_up);
  }
  out += fmt::format("g_nl                         {:.6g}\n", p.g_nl());
  out += fmt::format("omega_m zeta                 {:.6g}\n", p.omega_m * nm.zeta);
  for (const auto& l : m.links)
    out += fmt::format("{:<28} {:>10.4g}  {}\n", l.name, l.ratio, l.pass ? "ok" : "FAIL");
  out += fmt::format("chain satisfied (ratio >= {}) {}\n", m.threshold, m.all_pass() ? "yes" : "no");
  return out;
}

std::string diag_report(const RunConfig& cfg) {
  const SystemParams p = resolve_params(cfg.base, cfg.coefficients());
  const NormalModeData nm = diagonalize(p.bilinear());
  std::string out;
  out += fmt::format("delta_b {:.10g}  omega_m {:.10g}  G0 {:.10g}\n", nm.delta_b, nm.omega_m, nm.G0);
  out += fmt::format("eta {:.10g}  r {:.10g}  phi {:.10g}  theta {:.10g}\n", nm.eta, nm.r, nm.phi, nm.theta);
  out += fmt::format("xi+ {:.12g}  (first order {:.12g})\n", nm.xi_plus, nm.xi_plus_first_order);
  out += fmt::format("xi-^2 {:.12g}  xi- {:.12g}  (first order {:.12g})\n", nm.xi_minus_sq, nm.xi_minus,
                     nm.xi_minus_first_order);
  out += fmt::format("omega+ {:.12g}  omega- {:.12g}\n", nm.omega_plus, nm.omega_minus);
  out += fmt::format("zeta {:.10g}  xi-/eta {:.10g}\n", nm.zeta, nm.zeta_normal);
  out += fmt::format("unstable {}\n", nm.unstable ? "yes" : "no");
  auto row = [](const char* name, const LabCoefficients& u) {
    return fmt::format("{:<5} b {:+.8e}  b^dag {:+.8e}  c {:+.8e}  c^dag {:+.8e}  [d,d^dag] {:.12f}\n", name, u[0],
                       u[1], u[2], u[3], commutator_norm(u));
  };
  out += row("bbar", nm.coeffs_dplus);
  out += row("d", nm.coeffs_dminus);
  if (!nm.unstable && nm.xi_minus > 0.0) {
    for (Coefficients mode : {Coefficients::exact, Coefficients::first_order}) {
      const NonlinearCoefficients k = nonlinear_coefficients(p, nm, mode);
      out += fmt::format("{:<11} bbar^dag a d {:+.8g}  a^dag bbar d {:+.8g}  a^dag d d {:+.8g}  a d d {:+.8g}  "
                         "(a+a^dag) d^dag d {:+.8g}\n",
                         mode == Coefficients::exact ? "exact" : "first_order", k.bbar_dag_a_d, k.a_dag_bbar_d,
                         k.a_dag_d_d, k.a_d_d, k.a_quad_n_d);
    }
  }
  return out;
}

}  // namespace optoblockade
