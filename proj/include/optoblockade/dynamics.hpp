#pragma once

// Lindblad time evolution, stationary states and the weak-probe no-jump solve.
//
// Sign convention: drho/dt = -i[H, rho] + sum rate (J rho J^dag - {J^dag J, rho} / 2).

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "optoblockade/fockspace.hpp"
#include "optoblockade/model.hpp"

namespace optoblockade {

/// Right-hand side of the master equation with an optional set of harmonic
/// drive terms H(t) = H + sum_k (exp(-i w_k t) K_k + h.c.).
class LindbladGenerator {
 public:
  LindbladGenerator(const ModeOperator& hamiltonian, std::vector<LindbladChannel> channels,
                    std::vector<HarmonicTerm> harmonic_terms = {});

  [[nodiscard]] const FockConfig& config() const { return config_; }
  [[nodiscard]] Eigen::Index dim() const { return dim_; }
  [[nodiscard]] bool time_dependent() const { return !harmonic_.empty(); }

  /// drho/dt at time t.
  [[nodiscard]] DenseMatrix apply(const DenseMatrix& rho, double t = 0.0) const;

  /// Column-stacked superoperator of the static part (harmonic terms ignored).
  [[nodiscard]] SparseMatrix liouvillian() const;

  /// H - (i/2) sum rate J^dag J (static part).
  [[nodiscard]] const SparseMatrix& non_hermitian_hamiltonian() const { return h_eff_; }

 private:
  FockConfig config_;
  Eigen::Index dim_;
  SparseMatrix h_eff_;
  std::vector<std::pair<SparseMatrix, double>> jumps_;  // sqrt(rate) J, kept with rate for reference
  std::vector<std::pair<SparseMatrix, double>> harmonic_;
};

/// Throws std::invalid_argument for pure states or configuration mismatch.
DenseMatrix lindblad_rhs(const QuantumState& state, const ModeOperator& hamiltonian,
                         const std::vector<LindbladChannel>& channels);

struct EvolutionSpec {
  double t_final = 1.0;
  double dt_initial = 1e-3;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  std::vector<double> record_times;  ///< empty means record t_final only
  double trace_drift_bound = 1e-8;   ///< allowed |tr rho - 1| per unit time (at least one unit)
  double min_step = 1e-12;
  long max_steps = 50'000'000;
  bool store_states = true;

  void validate() const;
};

enum class EvolutionStatus { ok, step_underflow, trace_drift, max_steps };

std::string to_string(EvolutionStatus status);

struct EvolutionDiagnostics {
  long accepted_steps = 0;
  long rejected_steps = 0;
  double max_trace_drift = 0.0;   ///< largest |tr rho - 1| at record times
  double min_eigenvalue = 0.0;    ///< smallest eigenvalue of rho at record times
  std::string message;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<QuantumState> states;  ///< empty unless store_states
  EvolutionStatus status = EvolutionStatus::ok;
  EvolutionDiagnostics diagnostics;
  [[nodiscard]] bool ok() const { return status == EvolutionStatus::ok; }
};

/// Called at every record time with the (unchecked) state.
using RecordCallback = std::function<void(double, const QuantumState&)>;

/// Adaptive Dormand-Prince 5(4) integration. rho is re-symmetrized after each
/// accepted step; the trace is never renormalized. On failure the trajectory
/// holds everything recorded so far.
Trajectory evolve(const QuantumState& initial, const LindbladGenerator& generator, const EvolutionSpec& spec,
                  const RecordCallback& on_record = {});
Trajectory evolve(const QuantumState& initial, const ModeOperator& hamiltonian,
                  const std::vector<LindbladChannel>& channels, const EvolutionSpec& spec,
                  const RecordCallback& on_record = {});

enum class SteadyStateMethod { automatic, null_space, long_time };

struct SteadyStateOptions {
  SteadyStateMethod method = SteadyStateMethod::automatic;
  /// Largest superoperator dimension (dim^2) handled by the direct solve under `automatic`.
  Eigen::Index max_direct_dim = 4096;
  /// Repeat the direct solve with a different constraint row and compare.
  bool verify_uniqueness = true;
  double uniqueness_tol = 1e-6;
  // long_time
  double long_time_chunk = 20.0;
  double long_time_max = 1e4;
  double long_time_tol = 1e-9;
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
};

struct SteadyStateResult {
  QuantumState state;
  SteadyStateMethod method_used = SteadyStateMethod::null_space;
  double residual = 0.0;  ///< max |L(rho)|
};

/// Throws std::runtime_error on a degenerate null space or non-convergence.
SteadyStateResult steady_state(const ModeOperator& hamiltonian, const std::vector<LindbladChannel>& channels,
                               const SteadyStateOptions& options = {});

/// Kets |n_a, n_bbar, n_d> of the nine-state weak-probe expansion, c_0 = |000> first.
inline constexpr std::array<std::array<int, 3>, 9> kQuasiSteadyKets{{
    {0, 0, 0}, {0, 1, 0}, {1, 0, 1}, {0, 1, 2}, {0, 2, 0}, {1, 1, 1}, {2, 0, 2}, {0, 2, 2}, {2, 0, 0}}};

struct QuasiSteadyAmplitudes {
  std::array<Complex, 9> c{};  ///< c[0] = 1 is the pinned vacuum amplitude
};

/// Solves H_eff psi = 0 on the nine-ket subspace with c_0 = 1 and the vacuum
/// row removed. Throws std::runtime_error when the reduced system is singular.
QuasiSteadyAmplitudes quasi_steady_amplitudes(const SystemParams& p, const NormalModeData& nm,
                                              const EffectiveHamiltonianOptions& options = {});

/// Same closure on the whole truncated space of `h_eff`: psi[vacuum] = 1 and
/// the vacuum row dropped. Returns the normalized state.
QuantumState quasi_steady_state(const ModeOperator& h_eff);

}  // namespace optoblockade
