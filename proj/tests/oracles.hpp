#pragma once

// Independent reference computations used by the tests and the acceptance
// runner. None of them goes through sup_exp or the trapezoid recursion.
//
//   taylor_expm     scaling-and-squaring with a plain Taylor series
//   ode_evolve      adaptive Dormand-Prince on the matrix-form master equation
//   chain_integral  time-ordered jump integrals from one augmented generator
//                   per constant segment (Van Loan block exponential)

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "photonforge/dynamics.hpp"
#include "photonforge/photon_statistics.hpp"
#include "photonforge/quantum_core.hpp"

namespace oracle {

using photonforge::Complex;
using photonforge::Matrix;
using photonforge::Vector;

inline Matrix taylor_expm(const Matrix& a) {
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.25) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
  const Matrix b = a / std::ldexp(1.0, squarings);
  Matrix term = Matrix::Identity(a.rows(), a.cols());
  Matrix sum = term;
  for (int k = 1; k < 40; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-20) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// rho(t2) from rho(t1) by direct integration of
/// rho' = -i[H, rho] + sum_j (L rho L^dag - 1/2 {L^dag L, rho}).
inline Matrix ode_evolve(const photonforge::dynamics::Evolution& run, Matrix rho, double t1,
                         double t2, double tol = 1e-13) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  const int d = run.model().dim();
  const auto points = run.breakpoints(t1, t2);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = points[i];
    const double b = points[i + 1];
    if (b <= a) continue;
    const auto c = run.controls_at(0.5 * (a + b));
    const Matrix h = run.model().hamiltonian(c).matrix();
    std::vector<Matrix> ls;
    for (const auto& l : run.model().collapse_operators(c.phi)) ls.push_back(l.matrix());

    auto unpack = [d](const State& x) {
      Matrix m(d, d);
      for (int r = 0; r < d; ++r)
        for (int col = 0; col < d; ++col)
          m(r, col) = Complex{x[2 * (r * d + col)], x[2 * (r * d + col) + 1]};
      return m;
    };
    auto pack = [d](const Matrix& m, State& x) {
      for (int r = 0; r < d; ++r)
        for (int col = 0; col < d; ++col) {
          x[2 * (r * d + col)] = m(r, col).real();
          x[2 * (r * d + col) + 1] = m(r, col).imag();
        }
    };
    auto rhs = [&](const State& x, State& dxdt, double) {
      const Matrix r = unpack(x);
      Matrix out = Complex{0.0, -1.0} * (h * r - r * h);
      for (const auto& l : ls) {
        const Matrix ldl = l.adjoint() * l;
        out += l * r * l.adjoint() - 0.5 * (ldl * r + r * ldl);
      }
      pack(out, dxdt);
    };
    State x(2 * d * d);
    pack(rho, x);
    odeint::integrate_adaptive(
        odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<State>()), rhs, x, a, b,
        std::min(1e-3, b - a));
    rho = unpack(x);
  }
  return rho;
}

/// Column-stacked superoperator of rho -> X rho X^dag, built from scratch.
inline Matrix jump_matrix(const Matrix& x) {
  const auto d = x.rows();
  Matrix out = Matrix::Zero(d * d, d * d);
  // vec(X E_{kl} X^dag)
  for (Eigen::Index l = 0; l < d; ++l)
    for (Eigen::Index k = 0; k < d; ++k) {
      Matrix e = Matrix::Zero(d, d);
      e(k, l) = 1.0;
      const Matrix img = x * e * x.adjoint();
      out.col(l * d + k) = Eigen::Map<const Vector>(img.data(), d * d);
    }
  return out;
}

/// Liouvillian in column stacking, built element by element from the
/// matrix-form master equation (independent of the library's Kronecker forms).
inline Matrix liouvillian_matrix(const photonforge::dynamics::Evolution& run,
                                 const photonforge::dynamics::Controls& c) {
  const int d = run.model().dim();
  const Matrix h = run.model().hamiltonian(c).matrix();
  std::vector<Matrix> ls;
  for (const auto& l : run.model().collapse_operators(c.phi)) ls.push_back(l.matrix());
  Matrix out(d * d, d * d);
  for (int l = 0; l < d; ++l)
    for (int k = 0; k < d; ++k) {
      Matrix e = Matrix::Zero(d, d);
      e(k, l) = 1.0;
      Matrix img = Complex{0.0, -1.0} * (h * e - e * h);
      for (const auto& x : ls) {
        const Matrix xdx = x.adjoint() * x;
        img += x * e * x.adjoint() - 0.5 * (xdx * e + e * xdx);
      }
      out.col(l * d + k) = Eigen::Map<const Vector>(img.data(), d * d);
    }
  return out;
}

/// int_{t_start <= s1 <= ... <= sm <= t_end} tr[J_m P ... P J_1 rho(s1)] ds
/// with J_k = chain[k-1] evaluated at the running controls.
inline double chain_integral(const photonforge::dynamics::Evolution& run,
                             const std::vector<photonforge::statistics::OutputChannel>& chain,
                             double t_start, double t_end) {
  const int d = run.model().dim();
  const int dd = d * d;
  const int m = static_cast<int>(chain.size());

  // rho(t_start)
  Vector rho = Eigen::Map<const Vector>(run.initial_state().matrix().data(), dd);
  const auto pre = run.breakpoints(0.0, t_start);
  for (std::size_t i = 0; i + 1 < pre.size(); ++i) {
    if (pre[i + 1] <= pre[i]) continue;
    const auto c = run.controls_at(0.5 * (pre[i] + pre[i + 1]));
    rho = taylor_expm(liouvillian_matrix(run, c) * (pre[i + 1] - pre[i])) * rho;
  }

  const int n = m * dd + 1;
  Vector state = Vector::Zero(n);
  state.head(dd) = rho;
  const auto points = run.breakpoints(t_start, t_end);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = points[i];
    const double b = points[i + 1];
    if (b <= a) continue;
    const auto c = run.controls_at(0.5 * (a + b));
    const Matrix lv = liouvillian_matrix(run, c);
    Matrix g = Matrix::Zero(n, n);
    for (int k = 0; k < m; ++k) g.block(k * dd, k * dd, dd, dd) = lv;
    for (int k = 1; k < m; ++k) {
      g.block(k * dd, (k - 1) * dd, dd, dd) = jump_matrix(chain[k - 1](c).full().matrix());
    }
    const Matrix jm = jump_matrix(chain[m - 1](c).full().matrix());
    for (int col = 0; col < dd; ++col) {
      Complex tr{};
      for (int r = 0; r < d; ++r) tr += jm(r * (d + 1), col);
      g(n - 1, (m - 1) * dd + col) = tr;
    }
    state = taylor_expm(g * (b - a)) * state;
  }
  return state(n - 1).real();
}

/// N_1..N_k of one channel.
inline std::vector<double> mtiples(const photonforge::dynamics::Evolution& run,
                                   const photonforge::statistics::OutputChannel& channel, int k,
                                   double t_start, double t_end) {
  std::vector<double> out;
  for (int m = 1; m <= k; ++m) {
    out.push_back(chain_integral(run, std::vector(m, channel), t_start, t_end));
  }
  return out;
}

}  // namespace oracle
