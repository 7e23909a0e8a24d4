#pragma once

// End-to-end experiments: beam-splitter source, shaped release, cascade pair
// source, non-radiative and wait-time sweeps, flying-qubit encoding and the
// two-path cancellation budget.

#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "photonforge/dynamics.hpp"
#include "photonforge/photon_statistics.hpp"
#include "photonforge/quantum_core.hpp"

namespace photonforge::scenarios {

inline constexpr double kPi = std::numbers::pi;

/// 2 alpha0 sqrt(gamma_eff) must stay below the anharmonicity; returns a
/// warning when it does not.
std::optional<std::string> anharmonicity_warning(double alpha0, double gamma_eff,
                                                 double anharmonicity);

constexpr double kDefaultAnharmonicity = 50.0;

// ---------------------------------------------------------------------------
// Beam-splitter source

struct BeamSplitterConfig {
  double r = 0.995;
  Complex alpha0{5.0, 0.0};
  double t0 = 1.0;
  double delta = 0.0;
  double phi = 0.0;
  double t_final = 20.0;
  double dt = 0.01;
  // Optional error on the cancelling field beta (0 = exact cancellation).
  double beta_amplitude_error = 0.0;
  double beta_phase_error = 0.0;

  double tau() const;
  /// beta(t) = -i r alpha_in(t) / tau, including the mismatch knob.
  Complex beta(Complex alpha_in) const;
  void validate() const;
};

/// Grid step used by the runners: min(dt, t_w / 50).
double resolved_step(double dt, double pulse_width);

/// Statistics of the mode d = i r a_out + tau b; the window starts at t0.
statistics::PhotonStatistics run_beam_splitter(const dynamics::MirrorQubitParams& params,
                                               const BeamSplitterConfig& config, int cutoff = 3);

/// Run behind run_beam_splitter, exposed for tests.
dynamics::Evolution beam_splitter_evolution(const dynamics::MirrorQubitParams& params,
                                            const BeamSplitterConfig& config);
statistics::OutputChannel beam_splitter_channel(const dynamics::MirrorQubitModel& model,
                                                const BeamSplitterConfig& config);

// ---------------------------------------------------------------------------
// Wave packets and shaped release

struct WavePacket {
  enum class Kind { exponential, gaussian, custom };

  Kind kind = Kind::custom;
  std::vector<double> times;  // absolute, increasing, uniform
  std::vector<Complex> xi;

  /// sqrt(kappa) e^{-kappa (t - t_start) / 2} on [t_start, t_end].
  static WavePacket exponential(double kappa, double t_start, double t_end, double dt = 0.01);
  /// Gaussian |xi|^2 with the given center and width, truncated at +-truncation*sigma.
  static WavePacket gaussian(double center, double sigma, double truncation = 4.0,
                             double dt = 0.01);
  static WavePacket custom(std::vector<double> times, std::vector<Complex> xi);

  double step() const;
  double norm() const;  // trapezoid integral of |xi|^2
  std::string kind_name() const;

 private:
  void normalize();
};

/// Thrown when the packet needs more coupling than 2 gamma allows.
class ClipBudgetExceeded : public std::runtime_error {
 public:
  ClipBudgetExceeded(const std::string& what, double minimal_gamma)
      : std::runtime_error(what), minimal_gamma_(minimal_gamma) {}
  double minimal_gamma() const { return minimal_gamma_; }

 private:
  double minimal_gamma_;
};

struct ReleaseSchedule {
  std::vector<double> times;      // step edges, size n + 1
  std::vector<double> gamma_eff;  // per step, clipped to [0, 2 gamma]
  std::vector<double> phis;       // arccos(gamma_eff / gamma - 1)
  double clipped_mass = 0.0;      // emission mass misplaced by the clipping
  std::vector<std::string> diagnostics;

  /// Standalone schedule: phi = pi (storage) outside the release steps.
  dynamics::PhaseSchedule schedule() const;
};

/// Per-step coupling reproducing |xi|^2 from a fully excited emitter.
ReleaseSchedule shape_to_schedule(const WavePacket& packet, double gamma, double t_r,
                                  double clip_budget = 0.01);

/// Emission mass misplaced by per-step rates `gamma_eff` relative to the packet.
double misplaced_mass(const WavePacket& packet, const std::vector<double>& gamma_eff);

struct ShapedReleaseConfig {
  double phi_i = 0.9 * kPi;
  Complex alpha0{5.0, 0.0};
  double t0 = 1.0;
  double t_r = 8.0;
  double t_final = 20.0;
  double phi_r = 0.0;  // constant release phase when no packet is given
  std::optional<WavePacket> packet;
  double clip_budget = 0.01;
  double dt = 0.01;

  void validate() const;
};

struct ShapedReleaseResult {
  statistics::PhotonStatistics stats;
  std::vector<double> times;
  std::vector<double> flux;   // tr(L^dag L rho)
  std::vector<double> phase;  // phi(t)
  std::vector<double> p_exc;  // <1|rho|1>
  double pulse_width = 0.0;
  std::optional<ReleaseSchedule> release;
  std::optional<double> flux_l2_error;  // vs |xi|^2, relative
};

dynamics::Evolution shaped_release_evolution(const dynamics::MirrorQubitParams& params,
                                             const ShapedReleaseConfig& config,
                                             ReleaseSchedule* release = nullptr);

ShapedReleaseResult run_shaped_release(const dynamics::MirrorQubitParams& params,
                                       const ShapedReleaseConfig& config, int cutoff = 3);

// ---------------------------------------------------------------------------
// Cascade pair source

struct CascadeConfig {
  double alpha_d = 5.0;
  double t0 = 0.0;
  double t_final = 20.0;
  double dt = 0.01;
};

dynamics::Evolution cascade_evolution(const dynamics::MirrorQubitParams& params,
                                      const CascadeConfig& config);
statistics::CrossPairResult run_cascade(const dynamics::MirrorQubitParams& params,
                                        const CascadeConfig& config);

struct CascadePoint {
  double alpha_d;
  double gamma02;
  statistics::CrossPairResult result;
};

/// Row-major over alpha_d, then gamma02.
std::vector<CascadePoint> sweep_cascade(const dynamics::MirrorQubitParams& params,
                                        const std::vector<double>& alpha_d,
                                        const std::vector<double>& gamma02,
                                        const CascadeConfig& config);

// ---------------------------------------------------------------------------
// Sweeps with extra decay channels

struct SweepRow {
  double x;
  std::vector<double> probabilities;
};

std::vector<SweepRow> sweep_nonradiative(const dynamics::MirrorQubitParams& params,
                                         const BeamSplitterConfig& config,
                                         const std::vector<double>& gamma_nr, int cutoff = 3);

struct WaitSweepConfig {
  double phi_i = 0.9 * kPi;
  Complex alpha0{10.0, 0.0};
  double t0 = 1.0;
  double phi_r = kPi / 2.0;
  double window = 12.0;  // T = t_r + window
  double dt = 0.01;
};

/// t_r = t0 + t_w + t_wait for each entry.
std::vector<SweepRow> sweep_wait_time(const dynamics::MirrorQubitParams& params,
                                      const WaitSweepConfig& config,
                                      const std::vector<double>& t_wait, int cutoff = 3);

// ---------------------------------------------------------------------------
// Flying-qubit encoding

struct FlyingQubitTarget {
  Complex mu{1.0, 0.0};
  Complex nu{};

  void validate() const;
};

struct EncodeOptions {
  double phi = 0.995 * kPi;  // nearly decoupled while writing the state
  double rabi = 10.0;        // |Omega| = 2 |alpha| sqrt(gamma_eff) of the first guess
  double anharmonicity = kDefaultAnharmonicity;
  int max_iterations = 4000;
};

struct EncodeResult {
  dynamics::DriveSchedule drive;
  double delta = 0.0;
  Complex alpha0{};
  double pulse_width = 0.0;
  double phi = 0.0;
  double fidelity = 0.0;
  std::vector<std::string> warnings;
};

/// Fidelity <psi|rho(t_w)|psi> of a square pulse starting in |0>.
double encoding_fidelity(const dynamics::MirrorQubitParams& params, double phi, double delta,
                         Complex alpha0, double pulse_width, const FlyingQubitTarget& target);

EncodeResult encode_flying_qubit(const FlyingQubitTarget& target,
                                 const dynamics::MirrorQubitParams& params,
                                 const EncodeOptions& options = {});

// ---------------------------------------------------------------------------
// Two-path cancellation

struct CancellationInputs {
  double a1 = 1.0;
  double a2 = 1.0;
  double phi1 = 0.0;
  double phi2 = -kPi;
  double omega1 = 1.0;
  double omega2 = 1.0;
  double phi = 0.0;
  double tau1 = 1.0;
  double tau2 = 1.0;
  int n = 0;

  void validate() const;
};

struct CancellationResult {
  double residual = 0.0;  // |d| / (tau1 A1), peak value when the frequencies differ
  double residual_db = 0.0;
};

CancellationResult cancellation_budget(const CancellationInputs& in);

/// Phase error alone that leaves the given residual (equal amplitudes).
double implied_phase_error(double residual_db);
/// Relative amplitude error alone that leaves the given residual (matched phase).
double implied_amplitude_error(double residual_db);

// ---------------------------------------------------------------------------

/// Worker count: hardware concurrency capped by PHOTONFORGE_THREADS.
unsigned worker_count();

/// Runs fn(0..n-1) on worker_count() threads. The exception of the lowest
/// failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Results keep index order regardless of scheduling.
template <typename T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn) {
  std::vector<std::optional<T>> slots(n);
  parallel_for(n, [&](std::size_t i) { slots[i].emplace(fn(i)); });
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace photonforge::scenarios
