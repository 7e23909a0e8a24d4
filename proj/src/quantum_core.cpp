#include "photonforge/quantum_core.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace photonforge {

namespace {

NumericPolicy g_policy{};

std::string dims_message(const char* what, Eigen::Index rows, Eigen::Index cols) {
  return std::string(what) + ": expected a square matrix, got " + std::to_string(rows) +
         "x" + std::to_string(cols);
}

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

const NumericPolicy& numeric_policy() { return g_policy; }
void set_numeric_policy(const NumericPolicy& policy) { g_policy = policy; }

// ---------------------------------------------------------------------------
// Operator

Operator::Operator(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw std::invalid_argument(dims_message("Operator", entries_.rows(), entries_.cols()));
  }
}

Operator Operator::zero(int dim) { return Operator(Matrix::Zero(dim, dim)); }
Operator Operator::identity(int dim) { return Operator(Matrix::Identity(dim, dim)); }

bool Operator::is_hermitian(double tol) const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool Operator::is_zero(double tol) const { return entries_.cwiseAbs().maxCoeff() <= tol; }

Operator& Operator::operator+=(const Operator& other) {
  require_same_dim(dim(), other.dim(), "Operator::operator+=");
  entries_ += other.entries_;
  return *this;
}

Operator& Operator::operator-=(const Operator& other) {
  require_same_dim(dim(), other.dim(), "Operator::operator-=");
  entries_ -= other.entries_;
  return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_dim(a.dim(), b.dim(), "Operator::operator*");
  return Operator(a.entries_ * b.entries_);
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Matrix entries)
    : DensityMatrix(std::move(entries), numeric_policy().trace_tol) {}

DensityMatrix::DensityMatrix(Matrix entries, double tol) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw std::invalid_argument(
        dims_message("DensityMatrix", entries_.rows(), entries_.cols()));
  }
  const double herm_tol = std::max(tol, numeric_policy().hermitian_tol);
  const double psd_tol = std::max(tol, numeric_policy().psd_tol);
  const Complex tr = entries_.trace();
  if (std::abs(tr - 1.0) > tol) {
    throw NumericalError("DensityMatrix: trace " + std::to_string(tr.real()) + "+" +
                         std::to_string(tr.imag()) + "i differs from 1");
  }
  const double asym = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > herm_tol) {
    throw NumericalError("DensityMatrix: not Hermitian (max |rho - rho^dag| = " +
                         std::to_string(asym) + ")");
  }
  const double lowest = min_eigenvalue();
  if (lowest < -psd_tol) {
    throw NumericalError("DensityMatrix: negative eigenvalue " + std::to_string(lowest));
  }
}

DensityMatrix DensityMatrix::basis(int dim, int level) {
  if (level < 0 || level >= dim) {
    throw std::out_of_range("DensityMatrix::basis: level " + std::to_string(level) +
                            " outside [0, " + std::to_string(dim) + ")");
  }
  Matrix m = Matrix::Zero(dim, dim);
  m(level, level) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  const double norm = psi.norm();
  if (norm == 0.0) throw std::invalid_argument("DensityMatrix::pure: zero vector");
  const Vector unit = psi / norm;
  return DensityMatrix(unit * unit.adjoint());
}

Complex DensityMatrix::expectation(const Operator& op) const {
  require_same_dim(dim(), op.dim(), "DensityMatrix::expectation");
  return (op.matrix() * entries_).trace();
}

double DensityMatrix::min_eigenvalue() const {
  const Matrix herm = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Superoperator

Superoperator::Superoperator(int dim, Matrix entries) : dim_(dim), entries_(std::move(entries)) {
  const Eigen::Index n = static_cast<Eigen::Index>(dim) * dim;
  if (dim <= 0 || entries_.rows() != n || entries_.cols() != n) {
    throw std::invalid_argument("Superoperator: expected " + std::to_string(n) + "x" +
                                std::to_string(n) + " entries for dim " +
                                std::to_string(dim));
  }
}

Superoperator Superoperator::zero(int dim) {
  return Superoperator(dim, Matrix::Zero(dim * dim, dim * dim));
}

Superoperator Superoperator::identity(int dim) {
  return Superoperator(dim, Matrix::Identity(dim * dim, dim * dim));
}

Matrix Superoperator::apply(const Matrix& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) {
    throw std::invalid_argument("Superoperator::apply: state has wrong shape");
  }
  return unvectorize(entries_ * vectorize(rho), dim_);
}

DensityMatrix Superoperator::apply(const DensityMatrix& rho, double tol) const {
  return DensityMatrix(apply(rho.matrix()), tol);
}

Superoperator& Superoperator::operator+=(const Superoperator& other) {
  require_same_dim(dim_, other.dim_, "Superoperator::operator+=");
  entries_ += other.entries_;
  return *this;
}

Superoperator operator*(const Superoperator& a, const Superoperator& b) {
  require_same_dim(a.dim_, b.dim_, "Superoperator::operator*");
  return Superoperator(a.dim_, a.entries_ * b.entries_);
}

// ---------------------------------------------------------------------------
// AffineOperator

Operator AffineOperator::full() const {
  return op + offset * Operator::identity(op.dim());
}

bool AffineOperator::is_zero(double tol) const {
  return op.is_zero(tol) && std::abs(offset) <= tol;
}

AffineOperator operator+(const AffineOperator& a, const AffineOperator& b) {
  return AffineOperator(a.op + b.op, a.offset + b.offset);
}

AffineOperator operator*(Complex c, const AffineOperator& a) {
  return AffineOperator(c * a.op, c * a.offset);
}

Operator operator*(const AffineOperator& a, const AffineOperator& b) {
  const int d = a.dim();
  return a.op * b.op + a.offset * b.op + b.offset * a.op +
         (a.offset * b.offset) * Operator::identity(d);
}

// ---------------------------------------------------------------------------
// Free functions

Vector vectorize(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvectorize(const Vector& v, int dim) {
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Operator lowering_op(int dim, int lower, int upper) {
  if (!(0 <= lower && lower < upper && upper < dim)) {
    throw std::out_of_range("lowering_op: need 0 <= lower < upper < dim, got lower=" +
                            std::to_string(lower) + " upper=" + std::to_string(upper) +
                            " dim=" + std::to_string(dim));
  }
  Matrix m = Matrix::Zero(dim, dim);
  m(lower, upper) = 1.0;
  return Operator(std::move(m));
}

Operator sigma_z() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return Operator(std::move(m));
}

Superoperator left_multiplication(const Operator& a) {
  const int d = a.dim();
  return Superoperator(d, Eigen::kroneckerProduct(Matrix::Identity(d, d), a.matrix()).eval());
}

Superoperator right_multiplication(const Operator& a) {
  const int d = a.dim();
  return Superoperator(d,
                       Eigen::kroneckerProduct(a.matrix().transpose(), Matrix::Identity(d, d))
                           .eval());
}

Superoperator commutator_action(const Operator& h) {
  const int d = h.dim();
  Matrix m = left_multiplication(h).matrix() - right_multiplication(h).matrix();
  return Superoperator(d, -kI * m);
}

Superoperator jump(const Operator& x) {
  return Superoperator(x.dim(), Eigen::kroneckerProduct(x.matrix().conjugate(), x.matrix()).eval());
}

Superoperator dissipator(const Operator& x) {
  const Operator xdx = x.adjoint() * x;
  Matrix m = jump(x).matrix() - 0.5 * left_multiplication(xdx).matrix() -
             0.5 * right_multiplication(xdx).matrix();
  return Superoperator(x.dim(), std::move(m));
}

Superoperator liouvillian(const Operator& h, std::span<const Operator> collapse_ops) {
  if (!h.is_hermitian(numeric_policy().hermitian_tol)) {
    const double asym = (h.matrix() - h.matrix().adjoint()).cwiseAbs().maxCoeff();
    throw std::invalid_argument("liouvillian: Hamiltonian is not Hermitian (max |H - H^dag| = " +
                                std::to_string(asym) + ")");
  }
  Superoperator total = commutator_action(h);
  for (const Operator& l : collapse_ops) {
    require_same_dim(h.dim(), l.dim(), "liouvillian");
    total += dissipator(l);
  }
  return total;
}

Superoperator sup_exp(const Superoperator& generator, double t) {
  if (!(t >= 0.0)) {
    throw std::invalid_argument("sup_exp: duration must be non-negative, got " +
                                std::to_string(t));
  }
  if (t == 0.0) return Superoperator::identity(generator.dim());
  Matrix scaled = generator.matrix() * t;
  return Superoperator(generator.dim(), scaled.exp());
}

Complex trace(const Matrix& m) { return m.trace(); }

}  // namespace photonforge
