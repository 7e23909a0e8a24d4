#pragma once

// Driven atom in front of a mirror.
//
// Two-level model (rotating frame of the drive, sigma_z = |0><0| - |1><1|):
//
//   L   = sqrt(G/2) (1 + e^{i phi}) s-          (= e^{i phi/2} sqrt(G_eff) s- for |phi| <= pi)
//   H   = ((D - (G/2) sin phi) / 2) sigma_z - i (alpha e^{i phi} L^dag - h.c.)
//   rho' = -i[H, rho] + D[L] rho + G_nr D[s-] rho
//
// Only the detuning D and the round-trip phase phi enter; bare frequencies
// never appear. Rates are in units of the caller's choice (typically G = 1).
//
// Three-level (cascade) model, phi = 0 only: every transition x in
// {01, 12, 02} radiates through L_x = sqrt(G_x/2)(1 + e^{i phi}) s-_x and the
// drive couples to the 0-2 transition, H = -i (alpha L_02^dag - h.c.).

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "photonforge/quantum_core.hpp"

namespace photonforge::dynamics {

struct MirrorQubitParams {
  double gamma = 1.0;     // full-line decay rate G
  double delta = 0.0;     // detuning w01 - w_drive
  double gamma_nr = 0.0;  // decay into every channel other than the line
  int levels = 2;
  // levels == 3 only
  double gamma01 = 1.0;
  double gamma12 = 2.0;
  double gamma02 = 0.05;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class Transition { k01, k12, k02 };

/// G (1 + cos phi)
double effective_coupling(double gamma, double phi);

/// pi / (2 alpha0 sqrt(gamma_eff)); both inputs must be positive.
double pi_pulse_width(double alpha0, double gamma_eff);

struct Controls {
  double phi = 0.0;
  Complex alpha{};
};

class MirrorQubitModel {
 public:
  explicit MirrorQubitModel(MirrorQubitParams params);

  const MirrorQubitParams& params() const { return params_; }
  int dim() const { return params_.levels; }

  /// Output field of the given transition into the line.
  Operator channel_operator(Transition t, double phi) const;
  /// The 0-1 output operator L(phi) for two levels; the driven 0-2 channel for three.
  Operator output_operator(double phi) const;

  Operator hamiltonian(const Controls& c) const;
  std::vector<Operator> collapse_operators(double phi) const;
  Superoperator liouvillian(const Controls& c) const;

  /// |level><level|
  Operator projector(int level) const;

 private:
  void check_phase(double phi) const;
  MirrorQubitParams params_;
};

Superoperator build_liouvillian(const MirrorQubitParams& params, double phi, Complex alpha);

// ---------------------------------------------------------------------------
// Schedules

struct DriveSegment {
  double t_start;
  double t_end;
  Complex amplitude;
};

/// Piecewise-constant alpha_in(t); zero outside every segment. Segments are
/// half-open [t_start, t_end).
class DriveSchedule {
 public:
  DriveSchedule() = default;
  explicit DriveSchedule(std::vector<DriveSegment> segments);

  /// alpha0 on [t0, t0 + t_w) with t_w = pi_pulse_width(|alpha0|, gamma_eff).
  static DriveSchedule square_pi_pulse(Complex alpha0, double t0, double gamma_eff);
  static DriveSchedule square_pulse(Complex alpha0, double t0, double width);

  Complex amplitude_at(double t) const;
  const std::vector<DriveSegment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }

 private:
  std::vector<DriveSegment> segments_;
};

struct PhaseSegment {
  double t_start;
  double t_end;
  double phi;
};

/// Piecewise-constant phi(t) over a base value. Every phi lies in [0, 2 pi).
class PhaseSchedule {
 public:
  explicit PhaseSchedule(double base_phase = 0.0);

  /// Holds phi on [t_start, t_end). Segments must be appended in time order.
  PhaseSchedule& hold(double t_start, double t_end, double phi);
  /// Sampled ramp: phi[k] on [times[k], times[k+1]); needs times.size() == phis.size() + 1.
  PhaseSchedule& ramp(std::span<const double> times, std::span<const double> phis);

  PhaseSchedule& set_release_time(double t_r);
  std::optional<double> release_time() const { return release_time_; }

  double base_phase() const { return base_; }
  double phase_at(double t) const;
  const std::vector<PhaseSegment>& segments() const { return segments_; }

 private:
  double base_;
  std::vector<PhaseSegment> segments_;
  std::optional<double> release_time_;
};

// ---------------------------------------------------------------------------
// Time evolution

struct TimeStep {
  double t_start;
  double t_end;
  Controls controls;

  double duration() const { return t_end - t_start; }
};

/// One run: model + schedules + initial state at t = 0 (ground by default).
/// Copies share an internal memo of segment exponentials, guarded by a mutex.
class Evolution {
 public:
  Evolution(MirrorQubitParams params, DriveSchedule drive, PhaseSchedule phase,
            std::optional<DensityMatrix> initial = std::nullopt);

  const MirrorQubitModel& model() const { return model_; }
  const DriveSchedule& drive() const { return drive_; }
  const PhaseSchedule& phase() const { return phase_; }
  const DensityMatrix& initial_state() const { return initial_; }

  /// Right-continuous control values at t.
  Controls controls_at(double t) const;

  /// Sorted switching times strictly inside (t1, t2), with t1 and t2 at the ends.
  std::vector<double> breakpoints(double t1, double t2) const;

  /// Uniform sub-steps of at most max_step inside each constant interval.
  std::vector<TimeStep> steps(double t1, double t2, double max_step) const;

  Superoperator generator(const Controls& c) const;
  Superoperator step_propagator(const Controls& c, double duration) const;

  /// Ordered product of constant-segment exponentials, P(t2, t1).
  Superoperator propagator(double t1, double t2) const;

  Matrix evolve(const Matrix& rho, double t1, double t2) const;
  DensityMatrix state_at(double t) const;

 private:
  using Key = std::tuple<double, double, double, double>;
  struct Memo {
    std::mutex mutex;
    std::map<Key, Superoperator> exponentials;
  };

  MirrorQubitModel model_;
  DriveSchedule drive_;
  PhaseSchedule phase_;
  DensityMatrix initial_;
  std::shared_ptr<Memo> memo_;
};

Superoperator propagator(const Evolution& run, double t1, double t2);

/// tr(O rho(t)) at each (sorted) time.
std::vector<double> expectation_series(const Evolution& run, const Operator& observable,
                                       std::span<const double> times);

/// t_start, t_start + step, ..., t_end (last point exactly t_end).
std::vector<double> uniform_grid(double t_start, double t_end, double step);

}  // namespace photonforge::dynamics
