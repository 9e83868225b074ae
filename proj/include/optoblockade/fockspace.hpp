#pragma once

// Operator algebra on truncated multi-mode bosonic Fock spaces.
//
// Basis ordering is row-major over the mode list: for modes (m0, m1, ..., mk)
// the occupation |n0, n1, ..., nk> sits at index
//   n0 * (d1 * ... * dk) + n1 * (d2 * ... * dk) + ... + nk,
// which is the ordering produced by left-to-right Kronecker products.

#include <complex>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace optoblockade {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using DenseMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

class FockConfig {
 public:
  FockConfig(std::vector<int> mode_dims, std::vector<std::string> mode_labels);

  /// Uniform truncation for every label.
  static FockConfig uniform(std::vector<std::string> mode_labels, int dim);

  [[nodiscard]] const std::vector<int>& dims() const { return dims_; }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] std::size_t num_modes() const { return dims_.size(); }
  [[nodiscard]] Eigen::Index total_dim() const { return total_dim_; }

  [[nodiscard]] bool has_mode(const std::string& label) const;
  /// Throws std::invalid_argument for unknown labels.
  [[nodiscard]] std::size_t mode_index(const std::string& label) const;

  [[nodiscard]] Eigen::Index basis_index(std::span<const int> occupations) const;
  [[nodiscard]] Eigen::Index basis_index(std::initializer_list<int> occupations) const {
    return basis_index(std::span<const int>(occupations.begin(), occupations.size()));
  }
  [[nodiscard]] std::vector<int> occupations(Eigen::Index basis_index) const;

  /// Same labels, every dimension increased by `extra`.
  [[nodiscard]] FockConfig enlarged(int extra) const;

  friend bool operator==(const FockConfig&, const FockConfig&) = default;

 private:
  std::vector<int> dims_;
  std::vector<std::string> labels_;
  Eigen::Index total_dim_ = 1;
};

/// A sparse complex operator on the full tensor-product space of a FockConfig.
class ModeOperator {
 public:
  ModeOperator(FockConfig config, SparseMatrix matrix);

  static ModeOperator zero(const FockConfig& config);
  static ModeOperator identity(const FockConfig& config);

  [[nodiscard]] const FockConfig& config() const { return config_; }
  [[nodiscard]] const SparseMatrix& matrix() const { return matrix_; }
  [[nodiscard]] Eigen::Index dim() const { return matrix_.rows(); }
  [[nodiscard]] DenseMatrix dense() const { return DenseMatrix(matrix_); }

  [[nodiscard]] ModeOperator adjoint() const;
  /// Largest |(A - A^dagger)_ij|.
  [[nodiscard]] double hermiticity_defect() const;

  ModeOperator& operator+=(const ModeOperator& other);
  ModeOperator& operator-=(const ModeOperator& other);
  ModeOperator& operator*=(Complex scalar);

  friend ModeOperator operator+(ModeOperator lhs, const ModeOperator& rhs) { return lhs += rhs; }
  friend ModeOperator operator-(ModeOperator lhs, const ModeOperator& rhs) { return lhs -= rhs; }
  friend ModeOperator operator*(ModeOperator op, Complex s) { return op *= s; }
  friend ModeOperator operator*(Complex s, ModeOperator op) { return op *= s; }
  friend ModeOperator operator*(ModeOperator op, double s) { return op *= Complex(s, 0.0); }
  friend ModeOperator operator*(double s, ModeOperator op) { return op *= Complex(s, 0.0); }
  friend ModeOperator operator*(const ModeOperator& lhs, const ModeOperator& rhs);

  /// Exact sparse equality (structural zeros and explicit zeros compare equal).
  friend bool operator==(const ModeOperator& lhs, const ModeOperator& rhs);

 private:
  FockConfig config_;
  SparseMatrix matrix_;
};

/// Annihilation operator of one mode lifted by identity Kronecker factors.
ModeOperator ladder(const FockConfig& config, std::size_t mode_index);
ModeOperator ladder(const FockConfig& config, const std::string& label);
ModeOperator number(const FockConfig& config, const std::string& label);

struct OperatorTerm {
  Complex coefficient;
  std::vector<ModeOperator> factors;  // multiplied left to right
};

/// Sum of scaled operator products. Throws on config mismatch.
ModeOperator compose(const FockConfig& config, std::span<const OperatorTerm> terms);

class QuantumState {
 public:
  enum class Kind { pure, density };

  static constexpr double kDefaultTolerance = 1e-10;

  /// Validates the invariants of the kind (norm, or Hermitian/unit trace/PSD).
  static QuantumState pure(FockConfig config, StateVector psi, double tol = kDefaultTolerance);
  static QuantumState density(FockConfig config, DenseMatrix rho, double tol = kDefaultTolerance);
  /// No validation; used by integrators whose drift is reported separately.
  static QuantumState density_unchecked(FockConfig config, DenseMatrix rho);

  static QuantumState vacuum(const FockConfig& config);
  static QuantumState fock(const FockConfig& config, std::span<const int> occupations);
  static QuantumState fock(const FockConfig& config, std::initializer_list<int> occupations) {
    return fock(config, std::span<const int>(occupations.begin(), occupations.size()));
  }
  /// Truncated coherent state on one mode (renormalized), vacuum elsewhere.
  static QuantumState coherent(const FockConfig& config, const std::string& label, Complex amplitude);
  /// Truncated thermal state on one mode (renormalized), vacuum elsewhere.
  static QuantumState thermal(const FockConfig& config, const std::string& label, double mean_occupation);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] const FockConfig& config() const { return config_; }
  [[nodiscard]] bool is_pure() const { return kind_ == Kind::pure; }
  [[nodiscard]] const StateVector& vector() const;
  [[nodiscard]] const DenseMatrix& matrix() const;
  [[nodiscard]] DenseMatrix density_matrix() const;

  [[nodiscard]] double trace() const;
  [[nodiscard]] double min_eigenvalue() const;

 private:
  QuantumState(Kind kind, FockConfig config) : kind_(kind), config_(std::move(config)) {}

  Kind kind_;
  FockConfig config_;
  StateVector psi_;
  DenseMatrix rho_;
};

/// tr(rho O) or <psi|O|psi>. Throws on config mismatch.
Complex expectation(const QuantumState& state, const ModeOperator& op);

}  // namespace optoblockade
