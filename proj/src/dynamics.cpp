#include "optoblockade/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <Eigen/UmfPackSupport>

namespace optoblockade {

namespace {

using Triplet = Eigen::Triplet<Complex>;

SparseMatrix sparse_identity(Eigen::Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(), ia.value() * ib.value());
  SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

DenseMatrix hermitian_part(const DenseMatrix& m) { return 0.5 * (m + m.adjoint()); }

double min_eigenvalue(const DenseMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(hermitian_part(rho), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_abs(const DenseMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

// ---------------------------------------------------------------------------

LindbladGenerator::LindbladGenerator(const ModeOperator& hamiltonian, std::vector<LindbladChannel> channels,
                                     std::vector<HarmonicTerm> harmonic_terms)
    : config_(hamiltonian.config()), dim_(hamiltonian.dim()), h_eff_(hamiltonian.matrix()) {
  for (const auto& ch : channels) {
    if (!(ch.jump.config() == config_)) throw std::invalid_argument("LindbladGenerator: channel configuration mismatch");
    if (ch.rate < 0.0) throw std::invalid_argument("LindbladGenerator: negative channel rate");
    if (ch.rate == 0.0) continue;
    const SparseMatrix& j = ch.jump.matrix();
    SparseMatrix jdj = SparseMatrix(j.adjoint()) * j;
    h_eff_ -= Complex(0.0, 0.5 * ch.rate) * jdj;
    jumps_.emplace_back(std::sqrt(ch.rate) * j, ch.rate);
  }
  for (const auto& term : harmonic_terms) {
    if (!(term.op.config() == config_)) throw std::invalid_argument("LindbladGenerator: harmonic term configuration mismatch");
    harmonic_.emplace_back(term.op.matrix(), term.frequency);
  }
  h_eff_.makeCompressed();
}

DenseMatrix LindbladGenerator::apply(const DenseMatrix& rho, double t) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) throw std::invalid_argument("LindbladGenerator: dimension mismatch");
  const DenseMatrix rho_dag = rho.adjoint();
  // -i (H_nh rho - rho H_nh^dag), with rho H_nh^dag = (H_nh rho^dag)^dag.
  DenseMatrix a = h_eff_ * rho;
  DenseMatrix c = h_eff_ * rho_dag;
  for (const auto& [k, w] : harmonic_) {
    const Complex ph = std::exp(Complex(0.0, -w * t));
    DenseMatrix kr = k * rho;
    DenseMatrix krd = k * rho_dag;
    a.noalias() += ph * kr + std::conj(ph) * (k.adjoint() * rho);
    c.noalias() += ph * krd + std::conj(ph) * (k.adjoint() * rho_dag);
  }
  DenseMatrix out = Complex(0.0, -1.0) * (a - c.adjoint());
  for (const auto& [l, rate] : jumps_) {
    (void)rate;
    const DenseMatrix lrd = l * rho_dag;
    out.noalias() += l * DenseMatrix(lrd.adjoint());
  }
  return out;
}

SparseMatrix LindbladGenerator::liouvillian() const {
  const SparseMatrix id = sparse_identity(dim_);
  const SparseMatrix h_conj = h_eff_.conjugate();
  SparseMatrix l = Complex(0.0, -1.0) * kron(id, h_eff_) + Complex(0.0, 1.0) * kron(h_conj, id);
  for (const auto& [j, rate] : jumps_) {
    (void)rate;
    l += kron(SparseMatrix(j.conjugate()), j);
  }
  l.makeCompressed();
  return l;
}

DenseMatrix lindblad_rhs(const QuantumState& state, const ModeOperator& hamiltonian,
                         const std::vector<LindbladChannel>& channels) {
  if (state.is_pure()) throw std::invalid_argument("lindblad_rhs: density-matrix state required");
  if (!(state.config() == hamiltonian.config())) throw std::invalid_argument("lindblad_rhs: configuration mismatch");
  return LindbladGenerator(hamiltonian, channels).apply(state.matrix());
}

// ---------------------------------------------------------------------------

void EvolutionSpec::validate() const {
  if (!(t_final > 0.0)) throw std::invalid_argument("EvolutionSpec: t_final must be positive");
  if (!(dt_initial > 0.0) || !(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::invalid_argument("EvolutionSpec: step and tolerances must be positive");
  for (double t : record_times)
    if (t < 0.0 || t > t_final) throw std::invalid_argument("EvolutionSpec: record time outside [0, t_final]");
}

std::string to_string(EvolutionStatus status) {
  switch (status) {
    case EvolutionStatus::ok: return "ok";
    case EvolutionStatus::step_underflow: return "step_underflow";
    case EvolutionStatus::trace_drift: return "trace_drift";
    case EvolutionStatus::max_steps: return "max_steps";
  }
  return "unknown";
}

Trajectory evolve(const QuantumState& initial, const LindbladGenerator& gen, const EvolutionSpec& spec,
                  const RecordCallback& on_record) {
  spec.validate();
  if (!(initial.config() == gen.config())) throw std::invalid_argument("evolve: configuration mismatch");

  std::vector<double> records = spec.record_times;
  if (records.empty()) records.push_back(spec.t_final);
  std::sort(records.begin(), records.end());
  records.erase(std::unique(records.begin(), records.end()), records.end());

  Trajectory traj;
  traj.diagnostics.min_eigenvalue = std::numeric_limits<double>::infinity();
  DenseMatrix rho = initial.density_matrix();
  double t = 0.0;
  double h = spec.dt_initial;

  auto record = [&](double time) {
    const double drift = std::abs(rho.trace().real() - 1.0);
    traj.diagnostics.max_trace_drift = std::max(traj.diagnostics.max_trace_drift, drift);
    traj.diagnostics.min_eigenvalue = std::min(traj.diagnostics.min_eigenvalue, min_eigenvalue(rho));
    QuantumState s = QuantumState::density_unchecked(gen.config(), rho);
    traj.times.push_back(time);
    if (on_record) on_record(time, s);
    if (spec.store_states) traj.states.push_back(std::move(s));
    if (drift > spec.trace_drift_bound * std::max(1.0, time)) {
      traj.status = EvolutionStatus::trace_drift;
      traj.diagnostics.message = "trace drift exceeded bound at t = " + std::to_string(time);
      return false;
    }
    return true;
  };

  // Dormand-Prince 5(4) tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::size_t next = 0;
  while (next < records.size() && records[next] <= 0.0) {
    if (!record(records[next++])) return traj;
  }
  DenseMatrix k1 = gen.apply(rho, t);
  long steps = 0;
  while (next < records.size()) {
    const double target = records[next];
    if (++steps > spec.max_steps) {
      traj.status = EvolutionStatus::max_steps;
      traj.diagnostics.message = "step budget exhausted at t = " + std::to_string(t);
      return traj;
    }
    bool hits = false;
    double step = h;
    if (t + step >= target) {
      step = target - t;
      hits = true;
    }
    if (step < spec.min_step) {
      if (hits && step >= 0.0) {
        t = target;
      } else {
        traj.status = EvolutionStatus::step_underflow;
        traj.diagnostics.message = "step size underflow at t = " + std::to_string(t);
        return traj;
      }
    } else {
      const DenseMatrix k2 = gen.apply(rho + step * a21 * k1, t + c2 * step);
      const DenseMatrix k3 = gen.apply(rho + step * (a31 * k1 + a32 * k2), t + c3 * step);
      const DenseMatrix k4 = gen.apply(rho + step * (a41 * k1 + a42 * k2 + a43 * k3), t + c4 * step);
      const DenseMatrix k5 = gen.apply(rho + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), t + c5 * step);
      const DenseMatrix k6 =
          gen.apply(rho + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), t + step);
      DenseMatrix y = rho + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const DenseMatrix k7 = gen.apply(y, t + step);
      const DenseMatrix err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const Eigen::MatrixXd scale =
          (spec.abs_tol + spec.rel_tol * rho.cwiseAbs().cwiseMax(y.cwiseAbs()).array()).matrix();
      const double en = (err.cwiseAbs().array() / scale.array()).maxCoeff();
      if (!(en <= 1.0)) {
        ++traj.diagnostics.rejected_steps;
        const double fac = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.2;
        h = step * fac;
        if (h < spec.min_step) {
          traj.status = EvolutionStatus::step_underflow;
          traj.diagnostics.message = "step size underflow at t = " + std::to_string(t);
          return traj;
        }
        continue;
      }
      ++traj.diagnostics.accepted_steps;
      rho = hermitian_part(y);
      t = hits ? target : t + step;
      k1 = gen.apply(rho, t);
      const double fac = en > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2))) : 5.0;
      // Keep the unclamped proposal when the step was shortened to land on a record time.
      h = hits ? std::max(h, step * fac) : step * fac;
    }
    if (hits || t >= target) {
      if (!record(records[next++])) return traj;
    }
  }
  return traj;
}

Trajectory evolve(const QuantumState& initial, const ModeOperator& hamiltonian,
                  const std::vector<LindbladChannel>& channels, const EvolutionSpec& spec,
                  const RecordCallback& on_record) {
  return evolve(initial, LindbladGenerator(hamiltonian, channels), spec, on_record);
}

// ---------------------------------------------------------------------------

namespace {

// Liouvillian with row `replaced` swapped for the trace functional.
SparseMatrix with_trace_row(const SparseMatrix& l, Eigen::Index n, Eigen::Index replaced) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(l.nonZeros() + n));
  for (int k = 0; k < l.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(l, k); it; ++it)
      if (it.row() != replaced) t.emplace_back(it.row(), it.col(), it.value());
  for (Eigen::Index i = 0; i < n; ++i) t.emplace_back(replaced, i * n + i, Complex(1.0, 0.0));
  SparseMatrix m(l.rows(), l.cols());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

Eigen::VectorXcd solve_with_trace_row(const SparseMatrix& l, Eigen::Index n, Eigen::Index replaced) {
  const SparseMatrix m = with_trace_row(l, n, replaced);
  Eigen::UmfPackLU<SparseMatrix> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) throw std::runtime_error("steady_state: singular Liouvillian (degenerate null space)");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(l.rows());
  rhs(replaced) = 1.0;
  Eigen::VectorXcd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw std::runtime_error("steady_state: null-space solve failed");
  return x;
}

}  // namespace

SteadyStateResult steady_state(const ModeOperator& hamiltonian, const std::vector<LindbladChannel>& channels,
                               const SteadyStateOptions& options) {
  const LindbladGenerator gen(hamiltonian, channels);
  const Eigen::Index n = gen.dim();
  SteadyStateMethod method = options.method;
  if (method == SteadyStateMethod::automatic)
    method = n * n <= options.max_direct_dim ? SteadyStateMethod::null_space : SteadyStateMethod::long_time;

  if (method == SteadyStateMethod::null_space) {
    const SparseMatrix l = gen.liouvillian();
    const Eigen::VectorXcd x0 = solve_with_trace_row(l, n, 0);
    // A second solve with a different replaced row agrees only when the null space is one-dimensional.
    double spread = 0.0;
    if (options.verify_uniqueness) {
      const Eigen::VectorXcd x1 = solve_with_trace_row(l, n, n * n - 1);
      spread = (x0 - x1).cwiseAbs().maxCoeff();
    }
    const double residual = (l * x0).cwiseAbs().maxCoeff();
    if (spread > options.uniqueness_tol || residual > options.uniqueness_tol)
      throw std::runtime_error("steady_state: stationary state is not unique");
    DenseMatrix rho = Eigen::Map<const DenseMatrix>(x0.data(), n, n);
    rho = hermitian_part(rho);
    return {QuantumState::density_unchecked(gen.config(), rho), SteadyStateMethod::null_space, residual};
  }

  EvolutionSpec spec;
  spec.t_final = options.long_time_chunk;
  spec.rel_tol = options.rel_tol;
  spec.abs_tol = options.abs_tol;
  spec.store_states = true;
  spec.trace_drift_bound = 1e-6;
  QuantumState rho = QuantumState::vacuum(gen.config());
  DenseMatrix previous = rho.density_matrix();
  for (double elapsed = 0.0; elapsed < options.long_time_max; elapsed += options.long_time_chunk) {
    Trajectory tr = evolve(rho, gen, spec);
    if (!tr.ok()) throw std::runtime_error("steady_state: long-time integration failed: " + tr.diagnostics.message);
    rho = tr.states.back();
    const DenseMatrix current = rho.matrix();
    if (max_abs(current - previous) < options.long_time_tol) {
      const double residual = max_abs(gen.apply(current));
      return {QuantumState::density_unchecked(gen.config(), current), SteadyStateMethod::long_time, residual};
    }
    previous = current;
  }
  throw std::runtime_error("steady_state: long-time integration did not converge");
}

// ---------------------------------------------------------------------------

QuasiSteadyAmplitudes quasi_steady_amplitudes(const SystemParams& p, const NormalModeData& nm,
                                              const EffectiveHamiltonianOptions& options) {
  const FockConfig config = FockConfig::uniform({"a", "bbar", "d"}, 3);
  const DenseMatrix h = effective_hamiltonian(p, nm, config, options).dense();
  std::array<Eigen::Index, 9> idx{};
  for (std::size_t i = 0; i < 9; ++i) {
    const auto& k = kQuasiSteadyKets[i];
    idx[i] = config.basis_index({k[0], k[1], k[2]});
  }
  Eigen::Matrix<Complex, 8, 8> m;
  Eigen::Matrix<Complex, 8, 1> rhs;
  for (int i = 0; i < 8; ++i) {
    rhs(i) = -h(idx[static_cast<std::size_t>(i + 1)], idx[0]);
    for (int j = 0; j < 8; ++j) m(i, j) = h(idx[static_cast<std::size_t>(i + 1)], idx[static_cast<std::size_t>(j + 1)]);
  }
  Eigen::FullPivLU<Eigen::Matrix<Complex, 8, 8>> lu(m);
  if (!lu.isInvertible()) throw std::runtime_error("quasi_steady_amplitudes: singular reduced system");
  const Eigen::Matrix<Complex, 8, 1> x = lu.solve(rhs);
  QuasiSteadyAmplitudes out;
  out.c[0] = 1.0;
  for (std::size_t i = 0; i < 8; ++i) out.c[i + 1] = x(static_cast<Eigen::Index>(i));
  return out;
}

QuantumState quasi_steady_state(const ModeOperator& h_eff) {
  const SparseMatrix& h = h_eff.matrix();
  const Eigen::Index n = h.rows();
  std::vector<Triplet> t;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n - 1);
  for (int k = 0; k < h.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) {
      if (it.row() == 0) continue;
      if (it.col() == 0)
        rhs(it.row() - 1) -= it.value();
      else
        t.emplace_back(it.row() - 1, it.col() - 1, it.value());
    }
  SparseMatrix m(n - 1, n - 1);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) throw std::runtime_error("quasi_steady_state: singular reduced system");
  const Eigen::VectorXcd x = lu.solve(rhs);
  StateVector psi(n);
  psi(0) = 1.0;
  psi.tail(n - 1) = x;
  psi.normalize();
  return QuantumState::pure(h_eff.config(), psi, 1e-8);
}

}  // namespace optoblockade
