#pragma once

// Dense operator algebra for small open quantum systems.
//
// Vectorization convention (used everywhere in the library): column
// stacking, vec(A X B) = (B^T (x) A) vec(X). With that convention
//
//   -i[H, .]  ->  -i (I (x) H - H^T (x) I)
//   D[X]      ->  conj(X) (x) X - 1/2 I (x) X^dag X - 1/2 (X^dag X)^T (x) I
//
// A superoperator of a d-level system is therefore a d^2 x d^2 matrix acting
// on the column-stacked density matrix.

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace photonforge {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Raised when a numerical invariant (trace, positivity, quadrature slack) is
/// violated beyond tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tolerances shared by every validity check in the library.
struct NumericPolicy {
  double hermitian_tol = 1e-10;
  double trace_tol = 1e-10;
  double psd_tol = 1e-9;
};

/// The process-wide policy. Change it (if at all) before any work starts.
const NumericPolicy& numeric_policy();
void set_numeric_policy(const NumericPolicy& policy);

class Operator {
 public:
  explicit Operator(Matrix entries);

  static Operator zero(int dim);
  static Operator identity(int dim);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }
  Complex operator()(int row, int col) const { return entries_(row, col); }

  Operator adjoint() const { return Operator(entries_.adjoint()); }
  bool is_hermitian(double tol) const;
  bool is_zero(double tol = 0.0) const;

  Operator& operator+=(const Operator& other);
  Operator& operator-=(const Operator& other);

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(Complex c, const Operator& a) {
    return Operator(c * a.entries_);
  }
  friend Operator operator*(const Operator& a, Complex c) { return c * a; }

 private:
  Matrix entries_;
};

/// A Hermitian, unit-trace, positive semidefinite matrix. Validated on
/// construction against numeric_policy() unless a looser tolerance is given.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries);
  DensityMatrix(Matrix entries, double tol);

  /// |level><level|
  static DensityMatrix basis(int dim, int level);
  static DensityMatrix pure(const Vector& psi);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }

  double population(int level) const { return entries_(level, level).real(); }
  Complex expectation(const Operator& op) const;
  double min_eigenvalue() const;

 private:
  Matrix entries_;
};

class Superoperator {
 public:
  Superoperator(int dim, Matrix entries);

  static Superoperator zero(int dim);
  static Superoperator identity(int dim);

  /// Hilbert-space dimension d (the matrix is d^2 x d^2).
  int dim() const { return dim_; }
  const Matrix& matrix() const { return entries_; }

  /// Applies to an arbitrary d x d matrix (not necessarily a valid state).
  Matrix apply(const Matrix& rho) const;
  DensityMatrix apply(const DensityMatrix& rho, double tol) const;

  Superoperator& operator+=(const Superoperator& other);
  friend Superoperator operator+(Superoperator a, const Superoperator& b) {
    return a += b;
  }
  /// Composition: (a * b)(rho) = a(b(rho)).
  friend Superoperator operator*(const Superoperator& a, const Superoperator& b);
  friend Superoperator operator*(Complex c, const Superoperator& a) {
    return Superoperator(a.dim_, c * a.entries_);
  }

 private:
  int dim_;
  Matrix entries_;
};

/// An operator plus a scalar multiple of the identity, X = op + offset * 1.
/// Coherent fields ride along as the offset.
struct AffineOperator {
  Operator op;
  Complex offset{0.0, 0.0};

  explicit AffineOperator(Operator o, Complex c = {}) : op(std::move(o)), offset(c) {}

  int dim() const { return op.dim(); }
  Operator full() const;
  AffineOperator adjoint() const { return AffineOperator(op.adjoint(), std::conj(offset)); }
  bool is_zero(double tol = 0.0) const;

  friend AffineOperator operator+(const AffineOperator& a, const AffineOperator& b);
  friend AffineOperator operator*(Complex c, const AffineOperator& a);
  /// Product of two affine operators, expanded into a plain operator.
  friend Operator operator*(const AffineOperator& a, const AffineOperator& b);
};

Vector vectorize(const Matrix& m);
Matrix unvectorize(const Vector& v, int dim);

/// |lower><upper|
Operator lowering_op(int dim, int lower, int upper);

/// Pauli z with sigma_z = |0><0| - |1><1|, so sigma_+ sigma_- = (1 - sigma_z)/2.
Operator sigma_z();

Superoperator left_multiplication(const Operator& a);
Superoperator right_multiplication(const Operator& a);
Superoperator commutator_action(const Operator& h);

/// D[X] rho = X rho X^dag - 1/2 {X^dag X, rho}
Superoperator dissipator(const Operator& x);

/// rho -> X rho X^dag
Superoperator jump(const Operator& x);

/// -i[H, .] + sum_j D[L_j]. H must be Hermitian.
Superoperator liouvillian(const Operator& h, std::span<const Operator> collapse_ops);

/// exp(generator * t), t >= 0.
Superoperator sup_exp(const Superoperator& generator, double t);

/// Trace of an unvectorized d x d matrix.
Complex trace(const Matrix& m);

}  // namespace photonforge
