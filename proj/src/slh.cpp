#include "photonforge/slh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace photonforge::slh {

namespace {

constexpr double kUnitarityTol = 1e-9;
constexpr double kSingularLoopTol = 1e-12;

// (1/2i)(X - X^dag)
Operator imaginary_part(const Operator& x) {
  return (Complex{0.0, -0.5}) * (x - x.adjoint());
}

// Hermitian part, to remove rounding asymmetry from composed Hamiltonians.
Operator hermitize(const Operator& h) { return 0.5 * (h + h.adjoint()); }

AffineOperator zero_channel(int dim) { return AffineOperator(Operator::zero(dim)); }

// sum_j c_j X_j over affine operators
AffineOperator combine(const Eigen::Ref<const Eigen::RowVectorXcd>& weights,
                       const std::vector<AffineOperator>& xs, int dim) {
  AffineOperator out = zero_channel(dim);
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const Complex w = weights(static_cast<Eigen::Index>(j));
    if (w != Complex{}) out = out + w * xs[j];
  }
  return out;
}

}  // namespace

SlhTriplet::SlhTriplet(Matrix scattering, std::vector<AffineOperator> coupling,
                       Operator hamiltonian)
    : scattering_(std::move(scattering)),
      coupling_(std::move(coupling)),
      hamiltonian_(std::move(hamiltonian)) {
  const auto n = static_cast<Eigen::Index>(coupling_.size());
  if (n == 0) throw std::invalid_argument("SlhTriplet: need at least one port");
  if (scattering_.rows() != n || scattering_.cols() != n) {
    throw std::invalid_argument("SlhTriplet: S must be " + std::to_string(n) + "x" +
                                std::to_string(n));
  }
  const double unitarity =
      (scattering_.adjoint() * scattering_ - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (unitarity > kUnitarityTol) {
    throw std::invalid_argument("SlhTriplet: S is not unitary (deviation " +
                                std::to_string(unitarity) + ")");
  }
  if (!hamiltonian_.is_hermitian(numeric_policy().hermitian_tol)) {
    throw std::invalid_argument("SlhTriplet: H is not Hermitian");
  }
  for (const auto& l : coupling_) {
    if (l.dim() != hamiltonian_.dim()) {
      throw std::invalid_argument("SlhTriplet: coupling operator dimension " +
                                  std::to_string(l.dim()) + " differs from H dimension " +
                                  std::to_string(hamiltonian_.dim()));
    }
  }
}

SlhTriplet SlhTriplet::identity(int n_ports, int dim) {
  return SlhTriplet(Matrix::Identity(n_ports, n_ports),
                    std::vector<AffineOperator>(n_ports, zero_channel(dim)),
                    Operator::zero(dim));
}

SlhTriplet SlhTriplet::phase_shift(double phi, int dim) {
  Matrix s(1, 1);
  s(0, 0) = std::polar(1.0, phi);
  return SlhTriplet(std::move(s), {zero_channel(dim)}, Operator::zero(dim));
}

SlhTriplet SlhTriplet::coherent_drive(Complex alpha, int dim) {
  return SlhTriplet(Matrix::Identity(1, 1), {AffineOperator(Operator::zero(dim), alpha)},
                    Operator::zero(dim));
}

SlhTriplet series(const SlhTriplet& g2, const SlhTriplet& g1) {
  if (g2.n_ports() != g1.n_ports()) {
    throw std::invalid_argument("series: port counts differ (" + std::to_string(g2.n_ports()) +
                                " vs " + std::to_string(g1.n_ports()) + ")");
  }
  if (g2.dim() != g1.dim()) throw std::invalid_argument("series: Hilbert dimensions differ");
  const int dim = g1.dim();
  const int n = g1.n_ports();
  const Matrix& s2 = g2.scattering();

  std::vector<AffineOperator> l;
  l.reserve(n);
  for (int i = 0; i < n; ++i) {
    l.push_back(combine(s2.row(i), g1.coupling(), dim) + g2.coupling()[i]);
  }

  // L2^dag S2 L1
  Operator cross = Operator::zero(dim);
  for (int i = 0; i < n; ++i) {
    const AffineOperator s2l1 = combine(s2.row(i), g1.coupling(), dim);
    cross += g2.coupling()[i].adjoint() * s2l1;
  }
  Operator h = g1.hamiltonian() + g2.hamiltonian() + imaginary_part(cross);
  return SlhTriplet(s2 * g1.scattering(), std::move(l), hermitize(h));
}

SlhTriplet concatenate(const SlhTriplet& g2, const SlhTriplet& g1) {
  if (g2.dim() != g1.dim()) {
    throw std::invalid_argument("concatenate: Hilbert dimensions differ");
  }
  const int n2 = g2.n_ports();
  const int n1 = g1.n_ports();
  Matrix s = Matrix::Zero(n2 + n1, n2 + n1);
  s.topLeftCorner(n2, n2) = g2.scattering();
  s.bottomRightCorner(n1, n1) = g1.scattering();
  std::vector<AffineOperator> l = g2.coupling();
  l.insert(l.end(), g1.coupling().begin(), g1.coupling().end());
  return SlhTriplet(std::move(s), std::move(l), g2.hamiltonian() + g1.hamiltonian());
}

SlhTriplet feedback(const SlhTriplet& g, int out_port, int in_port) {
  const int n = g.n_ports();
  if (n < 2) throw std::invalid_argument("feedback: need at least two ports");
  if (out_port < 0 || out_port >= n || in_port < 0 || in_port >= n) {
    throw std::out_of_range("feedback: port index outside [0, " + std::to_string(n) + ")");
  }
  const Matrix& s = g.scattering();
  const Complex loop = 1.0 - s(out_port, in_port);
  if (std::abs(loop) <= kSingularLoopTol) {
    throw std::domain_error("feedback: loop " + std::to_string(out_port) + " -> " +
                            std::to_string(in_port) +
                            " is ill-posed (S[out, in] = 1, the signal circulates forever)");
  }
  const Complex inv = 1.0 / loop;
  const int dim = g.dim();
  const auto& l = g.coupling();

  std::vector<int> rows;
  std::vector<int> cols;
  for (int i = 0; i < n; ++i) {
    if (i != out_port) rows.push_back(i);
    if (i != in_port) cols.push_back(i);
  }

  Matrix s_new(n - 1, n - 1);
  for (int a = 0; a < n - 1; ++a) {
    for (int b = 0; b < n - 1; ++b) {
      s_new(a, b) = s(rows[a], cols[b]) + s(rows[a], in_port) * inv * s(out_port, cols[b]);
    }
  }

  std::vector<AffineOperator> l_new;
  l_new.reserve(n - 1);
  for (int a = 0; a < n - 1; ++a) {
    l_new.push_back(l[rows[a]] + (s(rows[a], in_port) * inv) * l[out_port]);
  }

  // (sum_j L_j^dag S_{j,in}) (1 - S_{out,in})^{-1} L_out
  AffineOperator weighted = zero_channel(dim);
  for (int j = 0; j < n; ++j) {
    weighted = weighted + std::conj(s(j, in_port)) * l[j];
  }
  const Operator cross = (inv * weighted.adjoint()) * l[out_port];
  Operator h = g.hamiltonian() + imaginary_part(cross);
  return SlhTriplet(std::move(s_new), std::move(l_new), hermitize(h));
}

MasterEquation to_master_equation(const SlhTriplet& g) {
  Operator h = g.hamiltonian();
  std::vector<Operator> collapse;
  for (const auto& channel : g.coupling()) {
    const Complex beta = channel.offset;
    const Operator& x = channel.op;
    // D[beta + X] = D[X] - i[(i/2)(beta^* X - beta X^dag), .]
    if (beta != Complex{}) {
      h += (Complex{0.0, 0.5}) * (std::conj(beta) * x - beta * x.adjoint());
    }
    if (!x.is_zero()) collapse.push_back(x);
  }
  return MasterEquation{hermitize(h), std::move(collapse)};
}

SlhTriplet two_level_atom(double gamma, const Operator& hamiltonian) {
  if (gamma < 0.0) throw std::invalid_argument("two_level_atom: gamma must be >= 0");
  const Operator lower = std::sqrt(gamma / 2.0) * lowering_op(2, 0, 1);
  return SlhTriplet(Matrix::Identity(2, 2), {AffineOperator(lower), AffineOperator(lower)},
                    hamiltonian);
}

SlhTriplet atom_in_front_of_mirror(double gamma, double phi, const Operator& hamiltonian) {
  const int dim = hamiltonian.dim();
  const SlhTriplet mirror_path =
      concatenate(SlhTriplet::phase_shift(phi, dim), SlhTriplet::identity(1, dim));
  return feedback(series(mirror_path, two_level_atom(gamma, hamiltonian)), 0, 1);
}

SlhTriplet driven_mirror(double gamma, double phi, double delta, Complex alpha) {
  const Operator h_atom = (delta / 2.0) * sigma_z();
  return series(atom_in_front_of_mirror(gamma, phi, h_atom),
                SlhTriplet::coherent_drive(alpha, 2));
}

}  // namespace photonforge::slh
