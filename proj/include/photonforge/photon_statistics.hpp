#pragma once

// Counting statistics of an output field via quantum regression.
//
//   G^(m)(t1..tm) = Tr[ J(tm) P(tm, tm-1) ... J(t1) rho(t1) ],  J(t) X = L(t) X L(t)^dag
//   N_m           = integral of G^(m) over tr <= t1 <= ... <= tm <= T
//   N_m           = sum_{n >= m} C(n, m) P_n
//
// The ordered-simplex integral is evaluated with the running quantities
//   X_0 = rho,  X_k(t) = int_tr^t P(t, s) J(s) X_{k-1}(s) ds,
// so that N_m = int tr J X_{m-1} dt; each X_k is advanced step by step with
// the trapezoid rule, reusing the single-step propagator.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "photonforge/dynamics.hpp"
#include "photonforge/quantum_core.hpp"

namespace photonforge::statistics {

/// Field seen by the detector as a function of the instantaneous controls.
using OutputChannel = std::function<AffineOperator(const dynamics::Controls&)>;

/// L(phi) of the model (the 0-1 channel for two levels).
OutputChannel mirror_output(const dynamics::MirrorQubitModel& model);
/// Output of one transition of the cascade model.
OutputChannel transition_output(const dynamics::MirrorQubitModel& model,
                                dynamics::Transition transition);

struct PhotonStatistics {
  std::vector<double> n_tiples;       // N_1..N_k
  std::vector<double> probabilities;  // P_0..P_k
  int cutoff = 0;
  double window_start = 0.0;
  double window_end = 0.0;
  double grid_step = 0.0;
  double n1_flux = 0.0;  // N_1 from the integrated flux tr(L^dag L rho)
  std::vector<std::string> diagnostics;
};

struct MtipleResult {
  std::vector<double> n_tiples;
  double n1_flux = 0.0;
  std::vector<std::string> diagnostics;
};

/// G^(m) at explicit times (sorted, >= 0).
double correlator_gm(const dynamics::Evolution& run, const OutputChannel& channel,
                     std::span<const double> times);

/// N_1..N_cutoff over [t_r, t_final]. Warns when a drive segment inside the
/// window gets fewer than `min_points_per_pulse` steps.
MtipleResult photon_mtiples(const dynamics::Evolution& run, const OutputChannel& channel,
                            int cutoff, double t_r, double t_final, double grid_step,
                            int min_points_per_pulse = 20);

/// P_0..P_k from N_1..N_k. Small negative values (>= -1e-3) are clamped and
/// renormalized with a diagnostic; anything lower throws NumericalError.
std::vector<double> invert_to_probabilities(std::span<const double> n_tiples, int cutoff,
                                            std::vector<std::string>* diagnostics = nullptr);

/// N_m = sum_{n >= m} C(n, m) P_n for m = 1..k, from P_0..P_k.
std::vector<double> binomial_moments(std::span<const double> probabilities);

PhotonStatistics photon_statistics(const dynamics::Evolution& run, const OutputChannel& channel,
                                   int cutoff, double t_r, double t_final, double grid_step);

// ---------------------------------------------------------------------------
// Pair correlations of the cascade

struct CrossPairResult {
  double g_ii = 0.0;
  double g_ss = 0.0;
  double g_is = 0.0;
  double v = 0.0;
};

/// Kernel <La^dag(t1) Lb^dag(t2) Lb(t2) La(t1)> with the earlier jump applied
/// first, so kernel(a, b, t1, t2) == kernel(b, a, t2, t1).
double cross_kernel(const dynamics::Evolution& run, dynamics::Transition a,
                    dynamics::Transition b, double t1, double t2);

/// G_ab over [0, T]^2 (three-level runs only).
double cross_pair_integral(const dynamics::Evolution& run, dynamics::Transition a,
                           dynamics::Transition b, double t_final, double grid_step);

/// V = G_is^2 - G_ii G_ss; positive values violate the classical bound.
double csi_metric(double g_ii, double g_ss, double g_is);

/// Idler = 1-2 photon, signal = 0-1 photon.
CrossPairResult cross_pair_statistics(const dynamics::Evolution& run, double t_final,
                                      double grid_step);

}  // namespace photonforge::statistics
