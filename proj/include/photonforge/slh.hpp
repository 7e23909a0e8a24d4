#pragma once

// (S, L, H) triplets for cascaded open quantum networks.
//
// Restrictions: the scattering matrix has scalar entries only, and every
// operator in a triplet acts on the same Hilbert space. A coherent input
// field is carried as the scalar offset of an L entry, e.g. the drive
// (1, alpha, 0). Ports are 0-based in this API.

#include <vector>

#include "photonforge/quantum_core.hpp"

namespace photonforge::slh {

class SlhTriplet {
 public:
  /// Validates: S square and unitary, len(L) == n_ports, H Hermitian,
  /// and a single Hilbert dimension throughout.
  SlhTriplet(Matrix scattering, std::vector<AffineOperator> coupling, Operator hamiltonian);

  /// (1_n, 0, 0)
  static SlhTriplet identity(int n_ports, int dim);
  /// (e^{i phi}, 0, 0)
  static SlhTriplet phase_shift(double phi, int dim);
  /// (1, alpha, 0): a coherent field in its own rotating frame.
  static SlhTriplet coherent_drive(Complex alpha, int dim);

  int n_ports() const { return static_cast<int>(coupling_.size()); }
  int dim() const { return hamiltonian_.dim(); }
  const Matrix& scattering() const { return scattering_; }
  const std::vector<AffineOperator>& coupling() const { return coupling_; }
  const Operator& hamiltonian() const { return hamiltonian_; }

 private:
  Matrix scattering_;
  std::vector<AffineOperator> coupling_;
  Operator hamiltonian_;
};

/// g2 <| g1: the output of g1 feeds the input of g2.
SlhTriplet series(const SlhTriplet& g2, const SlhTriplet& g1);

/// g2 [+] g1: block-diagonal S with g2's ports first.
SlhTriplet concatenate(const SlhTriplet& g2, const SlhTriplet& g1);

/// [G]_{out_port -> in_port}: output port `out_port` is fed back into input
/// port `in_port`. Throws std::domain_error when 1 - S(out, in) vanishes.
SlhTriplet feedback(const SlhTriplet& g, int out_port, int in_port);

struct MasterEquation {
  Operator hamiltonian;
  std::vector<Operator> collapse_ops;
};

/// Expands D[alpha + L] = D[L] + drive terms into H and drops zero channels.
MasterEquation to_master_equation(const SlhTriplet& g);

// ---------------------------------------------------------------------------
// Atom in front of a mirror

/// Two-level atom radiating into both directions of an open line:
/// (1_2, (sqrt(G/2) s-, sqrt(G/2) s-), H).
SlhTriplet two_level_atom(double gamma, const Operator& hamiltonian);

/// [(G_phi [+] I) <| G_atom]_{0 -> 1}: one output folded back by the mirror.
SlhTriplet atom_in_front_of_mirror(double gamma, double phi, const Operator& hamiltonian);

/// Mirror triplet in the drive frame (H_atom = delta/2 sigma_z) with the
/// coherent drive (1, alpha, 0) in series in front of it.
SlhTriplet driven_mirror(double gamma, double phi, double delta, Complex alpha);

}  // namespace photonforge::slh
