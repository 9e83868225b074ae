#include "optoblockade/fockspace.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

#include <Eigen/Eigenvalues>

namespace optoblockade {

namespace {

void require_same_config(const FockConfig& a, const FockConfig& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": operands live on different Fock configurations");
}

SparseMatrix sparse_identity(Eigen::Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

SparseMatrix kron(const SparseMatrix& lhs, const SparseMatrix& rhs) {
  SparseMatrix out(lhs.rows() * rhs.rows(), lhs.cols() * rhs.cols());
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(lhs.nonZeros() * rhs.nonZeros()));
  for (Eigen::Index j = 0; j < lhs.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator a(lhs, j); a; ++a) {
      for (Eigen::Index l = 0; l < rhs.outerSize(); ++l) {
        for (SparseMatrix::InnerIterator b(rhs, l); b; ++b) {
          triplets.emplace_back(a.row() * rhs.rows() + b.row(), a.col() * rhs.cols() + b.col(),
                                a.value() * b.value());
        }
      }
    }
  }
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// FockConfig

FockConfig::FockConfig(std::vector<int> mode_dims, std::vector<std::string> mode_labels)
    : dims_(std::move(mode_dims)), labels_(std::move(mode_labels)) {
  if (dims_.empty()) throw std::invalid_argument("FockConfig: at least one mode is required");
  if (dims_.size() != labels_.size()) throw std::invalid_argument("FockConfig: dims and labels differ in length");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i] < 2) throw std::invalid_argument("FockConfig: mode '" + labels_[i] + "' has dimension < 2");
    if (!seen.insert(labels_[i]).second) throw std::invalid_argument("FockConfig: duplicate label '" + labels_[i] + "'");
    total_dim_ *= dims_[i];
  }
}

FockConfig FockConfig::uniform(std::vector<std::string> mode_labels, int dim) {
  std::vector<int> dims(mode_labels.size(), dim);
  return {std::move(dims), std::move(mode_labels)};
}

bool FockConfig::has_mode(const std::string& label) const {
  for (const auto& l : labels_)
    if (l == label) return true;
  return false;
}

std::size_t FockConfig::mode_index(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return i;
  throw std::invalid_argument("FockConfig: no mode labelled '" + label + "'");
}

Eigen::Index FockConfig::basis_index(std::span<const int> occupations) const {
  if (occupations.size() != dims_.size()) throw std::invalid_argument("FockConfig: occupation list has wrong length");
  Eigen::Index index = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (occupations[i] < 0 || occupations[i] >= dims_[i])
      throw std::out_of_range("FockConfig: occupation outside truncation for mode '" + labels_[i] + "'");
    index = index * dims_[i] + occupations[i];
  }
  return index;
}

std::vector<int> FockConfig::occupations(Eigen::Index basis_index) const {
  if (basis_index < 0 || basis_index >= total_dim_) throw std::out_of_range("FockConfig: basis index out of range");
  std::vector<int> occ(dims_.size());
  for (std::size_t i = dims_.size(); i-- > 0;) {
    occ[i] = static_cast<int>(basis_index % dims_[i]);
    basis_index /= dims_[i];
  }
  return occ;
}

FockConfig FockConfig::enlarged(int extra) const {
  std::vector<int> dims = dims_;
  for (auto& d : dims) d += extra;
  return {std::move(dims), labels_};
}

// ---------------------------------------------------------------------------
// ModeOperator

ModeOperator::ModeOperator(FockConfig config, SparseMatrix matrix)
    : config_(std::move(config)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != config_.total_dim() || matrix_.cols() != config_.total_dim())
    throw std::invalid_argument("ModeOperator: matrix dimension does not match the Fock configuration");
  matrix_.makeCompressed();
}

ModeOperator ModeOperator::zero(const FockConfig& config) {
  return {config, SparseMatrix(config.total_dim(), config.total_dim())};
}

ModeOperator ModeOperator::identity(const FockConfig& config) {
  return {config, sparse_identity(config.total_dim())};
}

ModeOperator ModeOperator::adjoint() const {
  return {config_, SparseMatrix(matrix_.adjoint())};
}

double ModeOperator::hermiticity_defect() const {
  SparseMatrix diff = matrix_ - SparseMatrix(matrix_.adjoint());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < diff.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(diff, j); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

ModeOperator& ModeOperator::operator+=(const ModeOperator& other) {
  require_same_config(config_, other.config_, "operator+");
  matrix_ += other.matrix_;
  return *this;
}

ModeOperator& ModeOperator::operator-=(const ModeOperator& other) {
  require_same_config(config_, other.config_, "operator-");
  matrix_ -= other.matrix_;
  return *this;
}

ModeOperator& ModeOperator::operator*=(Complex scalar) {
  matrix_ *= scalar;
  return *this;
}

ModeOperator operator*(const ModeOperator& lhs, const ModeOperator& rhs) {
  require_same_config(lhs.config_, rhs.config_, "operator*");
  SparseMatrix product = lhs.matrix_ * rhs.matrix_;
  return {lhs.config_, std::move(product)};
}

bool operator==(const ModeOperator& lhs, const ModeOperator& rhs) {
  if (!(lhs.config_ == rhs.config_)) return false;
  SparseMatrix diff = lhs.matrix_ - rhs.matrix_;
  for (Eigen::Index j = 0; j < diff.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(diff, j); it; ++it)
      if (it.value() != Complex(0.0, 0.0)) return false;
  return true;
}

ModeOperator ladder(const FockConfig& config, std::size_t mode_index) {
  if (mode_index >= config.num_modes()) throw std::out_of_range("ladder: mode index out of range");
  SparseMatrix lifted = sparse_identity(1);
  for (std::size_t m = 0; m < config.num_modes(); ++m) {
    const int d = config.dims()[m];
    if (m == mode_index) {
      SparseMatrix a(d, d);
      for (int n = 1; n < d; ++n) a.insert(n - 1, n) = std::sqrt(static_cast<double>(n));
      lifted = kron(lifted, a);
    } else {
      lifted = kron(lifted, sparse_identity(d));
    }
  }
  return {config, std::move(lifted)};
}

ModeOperator ladder(const FockConfig& config, const std::string& label) {
  return ladder(config, config.mode_index(label));
}

ModeOperator number(const FockConfig& config, const std::string& label) {
  const ModeOperator a = ladder(config, label);
  return a.adjoint() * a;
}

ModeOperator compose(const FockConfig& config, std::span<const OperatorTerm> terms) {
  ModeOperator sum = ModeOperator::zero(config);
  for (const auto& term : terms) {
    ModeOperator product = ModeOperator::identity(config);
    for (const auto& factor : term.factors) product = product * factor;
    sum += term.coefficient * product;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// QuantumState

QuantumState QuantumState::pure(FockConfig config, StateVector psi, double tol) {
  if (psi.size() != config.total_dim()) throw std::invalid_argument("QuantumState: vector dimension mismatch");
  if (std::abs(psi.norm() - 1.0) > tol) throw std::invalid_argument("QuantumState: pure state is not normalized");
  QuantumState s(Kind::pure, std::move(config));
  s.psi_ = std::move(psi);
  return s;
}

QuantumState QuantumState::density(FockConfig config, DenseMatrix rho, double tol) {
  if (rho.rows() != config.total_dim() || rho.cols() != config.total_dim())
    throw std::invalid_argument("QuantumState: density matrix dimension mismatch");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("QuantumState: density matrix is not Hermitian");
  if (std::abs(rho.trace() - Complex(1.0, 0.0)) > tol)
    throw std::invalid_argument("QuantumState: density matrix trace differs from 1");
  QuantumState s(Kind::density, std::move(config));
  s.rho_ = std::move(rho);
  if (s.min_eigenvalue() < -tol) throw std::invalid_argument("QuantumState: density matrix has a negative eigenvalue");
  return s;
}

QuantumState QuantumState::density_unchecked(FockConfig config, DenseMatrix rho) {
  if (rho.rows() != config.total_dim() || rho.cols() != config.total_dim())
    throw std::invalid_argument("QuantumState: density matrix dimension mismatch");
  QuantumState s(Kind::density, std::move(config));
  s.rho_ = std::move(rho);
  return s;
}

QuantumState QuantumState::vacuum(const FockConfig& config) {
  StateVector psi = StateVector::Zero(config.total_dim());
  psi(0) = 1.0;
  return pure(config, std::move(psi));
}

QuantumState QuantumState::fock(const FockConfig& config, std::span<const int> occupations) {
  StateVector psi = StateVector::Zero(config.total_dim());
  psi(config.basis_index(occupations)) = 1.0;
  return pure(config, std::move(psi));
}

QuantumState QuantumState::coherent(const FockConfig& config, const std::string& label, Complex amplitude) {
  const std::size_t m = config.mode_index(label);
  const int d = config.dims()[m];
  StateVector psi = StateVector::Zero(config.total_dim());
  std::vector<int> occ(config.num_modes(), 0);
  Complex term = 1.0;
  for (int n = 0; n < d; ++n) {
    if (n > 0) term *= amplitude / std::sqrt(static_cast<double>(n));
    occ[m] = n;
    psi(config.basis_index(occ)) = term;
  }
  psi.normalize();
  return pure(config, std::move(psi));
}

QuantumState QuantumState::thermal(const FockConfig& config, const std::string& label, double mean_occupation) {
  if (mean_occupation < 0.0) throw std::invalid_argument("QuantumState::thermal: negative occupation");
  const std::size_t m = config.mode_index(label);
  const int d = config.dims()[m];
  DenseMatrix rho = DenseMatrix::Zero(config.total_dim(), config.total_dim());
  std::vector<int> occ(config.num_modes(), 0);
  const double ratio = mean_occupation / (1.0 + mean_occupation);
  double weight = 1.0;
  double total = 0.0;
  for (int n = 0; n < d; ++n) {
    occ[m] = n;
    const auto i = config.basis_index(occ);
    rho(i, i) = weight;
    total += weight;
    weight *= ratio;
  }
  rho /= total;
  return density(config, std::move(rho));
}

const StateVector& QuantumState::vector() const {
  if (kind_ != Kind::pure) throw std::logic_error("QuantumState: not a pure state");
  return psi_;
}

const DenseMatrix& QuantumState::matrix() const {
  if (kind_ != Kind::density) throw std::logic_error("QuantumState: not a density matrix");
  return rho_;
}

DenseMatrix QuantumState::density_matrix() const {
  if (kind_ == Kind::density) return rho_;
  return psi_ * psi_.adjoint();
}

double QuantumState::trace() const {
  if (kind_ == Kind::pure) return psi_.squaredNorm();
  return rho_.trace().real();
}

double QuantumState::min_eigenvalue() const {
  if (kind_ == Kind::pure) return 0.0;
  const DenseMatrix herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Complex expectation(const QuantumState& state, const ModeOperator& op) {
  require_same_config(state.config(), op.config(), "expectation");
  if (state.is_pure()) {
    const StateVector& psi = state.vector();
    return psi.dot(op.matrix() * psi);
  }
  // tr(rho O) = sum_ij rho_ji O_ij
  const DenseMatrix& rho = state.matrix();
  const SparseMatrix& o = op.matrix();
  Complex sum = 0.0;
  for (Eigen::Index j = 0; j < o.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(o, j); it; ++it) sum += it.value() * rho(it.col(), it.row());
  return sum;
}

}  // namespace optoblockade
