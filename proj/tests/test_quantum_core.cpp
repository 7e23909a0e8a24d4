#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "photonforge/quantum_core.hpp"

using namespace photonforge;

namespace {

Matrix random_matrix(int d, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) m(r, c) = Complex{n(rng), n(rng)};
  return m;
}

Matrix random_state(int d, std::mt19937& rng) {
  const Matrix a = random_matrix(d, rng);
  const Matrix rho = a * a.adjoint();
  return rho / rho.trace();
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("vectorize stacks columns and round-trips") {
  Matrix m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const Vector v = vectorize(m);
  CHECK(v(0) == Complex{1.0});
  CHECK(v(1) == Complex{3.0});
  CHECK(v(2) == Complex{2.0});
  CHECK(unvectorize(v, 2) == m);
}

TEST_CASE("left/right multiplication follow vec(AXB) = (B^T kron A) vec(X)") {
  std::mt19937 rng(7);
  for (int d : {2, 3}) {
    const Operator a(random_matrix(d, rng));
    const Operator b(random_matrix(d, rng));
    const Matrix x = random_matrix(d, rng);
    CHECK(max_abs(left_multiplication(a).apply(x) - a.matrix() * x) < 1e-13);
    CHECK(max_abs(right_multiplication(b).apply(x) - x * b.matrix()) < 1e-13);
    const Matrix both = (left_multiplication(a) * right_multiplication(b)).apply(x);
    CHECK(max_abs(both - a.matrix() * x * b.matrix()) < 1e-12);
  }
}

TEST_CASE("dissipator and jump match their matrix forms") {
  std::mt19937 rng(11);
  const Operator x(random_matrix(3, rng));
  const Matrix rho = random_state(3, rng);
  const Matrix xdx = x.matrix().adjoint() * x.matrix();
  const Matrix expected = x.matrix() * rho * x.matrix().adjoint() - 0.5 * (xdx * rho + rho * xdx);
  CHECK(max_abs(dissipator(x).apply(rho) - expected) < 1e-13);
  CHECK(max_abs(jump(x).apply(rho) - x.matrix() * rho * x.matrix().adjoint()) < 1e-13);
  CHECK(max_abs(jump(x).matrix() - oracle::jump_matrix(x.matrix())) < 1e-14);
}

TEST_CASE("commutator action is -i[H, .]") {
  std::mt19937 rng(3);
  const Matrix a = random_matrix(2, rng);
  const Operator h(a + a.adjoint());
  const Matrix rho = random_state(2, rng);
  const Matrix expected = Complex{0.0, -1.0} * (h.matrix() * rho - rho * h.matrix());
  CHECK(max_abs(commutator_action(h).apply(rho) - expected) < 1e-13);
}

TEST_CASE("liouvillian rejects a non-Hermitian Hamiltonian") {
  Matrix h(2, 2);
  h << 0.0, 1.0, 0.0, 0.0;
  const std::vector<Operator> none;
  CHECK_THROWS_AS(liouvillian(Operator(h), none), std::invalid_argument);
}

TEST_CASE("sup_exp agrees with the Taylor oracle") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = random_matrix(3, rng);
    const Operator h(0.5 * (a + a.adjoint()));
    const std::vector<Operator> ls{Operator(random_matrix(3, rng, 0.7)),
                                   Operator(random_matrix(3, rng, 0.3))};
    const Superoperator gen = liouvillian(h, ls);
    for (double t : {0.01, 0.7, 3.0}) {
      const Matrix ours = sup_exp(gen, t).matrix();
      const Matrix ref = oracle::taylor_expm(gen.matrix() * t);
      CHECK(max_abs(ours - ref) < 1e-12);
    }
  }
}

TEST_CASE("sup_exp edge cases") {
  const Superoperator gen = dissipator(lowering_op(2, 0, 1));
  CHECK(max_abs(sup_exp(gen, 0.0).matrix() - Superoperator::identity(2).matrix()) == 0.0);
  CHECK_THROWS_AS(sup_exp(gen, -1e-3), std::invalid_argument);
}

TEST_CASE("exp of a Lindbladian is trace preserving and positive") {
  std::mt19937 rng(19);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = random_matrix(3, rng);
    const Operator h(a + a.adjoint());
    const std::vector<Operator> ls{Operator(random_matrix(3, rng))};
    const Superoperator p = sup_exp(liouvillian(h, ls), 0.9);
    const DensityMatrix rho(random_state(3, rng));
    const DensityMatrix out = p.apply(rho, 1e-9);
    CHECK(std::abs(out.matrix().trace() - 1.0) < 1e-12);
    CHECK(out.min_eigenvalue() > -1e-12);
  }
}

TEST_CASE("DensityMatrix validation") {
  Matrix m = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix{m}, NumericalError);  // trace 2
  Matrix nh(2, 2);
  nh << 0.5, 0.3, 0.0, 0.5;
  CHECK_THROWS_AS(DensityMatrix{nh}, NumericalError);
  Matrix neg(2, 2);
  neg << 1.2, 0.0, 0.0, -0.2;
  CHECK_THROWS_AS(DensityMatrix{neg}, NumericalError);
  CHECK_NOTHROW(DensityMatrix(Matrix(0.5 * m)));

  Vector psi(2);
  psi << 1.0, Complex{0.0, 1.0};
  const DensityMatrix plus = DensityMatrix::pure(psi / std::sqrt(2.0));
  CHECK(plus.population(0) == doctest::Approx(0.5));
  CHECK(std::abs(plus.expectation(sigma_z())) < 1e-15);
  CHECK(DensityMatrix::basis(3, 2).population(2) == 1.0);
}

TEST_CASE("basic operators") {
  const Operator s = lowering_op(3, 0, 2);
  CHECK(s(0, 2) == Complex{1.0});
  CHECK(s.is_zero() == false);
  CHECK_THROWS_AS(lowering_op(2, 0, 2), std::out_of_range);
  CHECK_THROWS_AS(Operator(Matrix(2, 3)), std::invalid_argument);

  // sigma_+ sigma_- = (1 - sigma_z) / 2
  const Operator sm = lowering_op(2, 0, 1);
  const Operator lhs = sm.adjoint() * sm;
  const Operator rhs = 0.5 * (Operator::identity(2) - sigma_z());
  CHECK(max_abs(lhs.matrix() - rhs.matrix()) == 0.0);
}

TEST_CASE("affine operators expand offsets as multiples of the identity") {
  const Operator x = lowering_op(2, 0, 1);
  const AffineOperator a(x, Complex{0.5, -1.0});
  const Matrix full = a.full().matrix();
  CHECK(full(0, 0) == Complex{0.5, -1.0});
  CHECK(full(0, 1) == Complex{1.0});
  const Operator prod = a.adjoint() * a;
  CHECK(max_abs(prod.matrix() - full.adjoint() * full) < 1e-15);
  CHECK(AffineOperator(Operator::zero(2)).is_zero());
}

TEST_CASE("superoperator composition order") {
  const Operator a = lowering_op(2, 0, 1);
  const Operator b = a.adjoint();
  const Matrix rho = DensityMatrix::basis(2, 0).matrix();
  // (left(a) * left(b))(rho) = a b rho
  const Matrix out = (left_multiplication(a) * left_multiplication(b)).apply(rho);
  CHECK(max_abs(out - a.matrix() * b.matrix() * rho) == 0.0);
}
