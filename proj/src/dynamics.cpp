#include "photonforge/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace photonforge::dynamics {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Breakpoints closer than this are merged.
constexpr double kTimeEps = 1e-12;

void require_rate(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("MirrorQubitParams: ") + name +
                                " must be a finite rate >= 0, got " + std::to_string(value));
  }
}

// sqrt(G/2)(1 + e^{i phi})
Complex mirror_amplitude(double gamma, double phi) {
  return std::sqrt(gamma / 2.0) * (1.0 + std::polar(1.0, phi));
}

}  // namespace

void MirrorQubitParams::validate() const {
  require_rate(gamma, "gamma");
  require_rate(gamma_nr, "gamma_nr");
  if (!std::isfinite(delta)) throw std::invalid_argument("MirrorQubitParams: delta not finite");
  if (levels != 2 && levels != 3) {
    throw std::invalid_argument("MirrorQubitParams: levels must be 2 or 3, got " +
                                std::to_string(levels));
  }
  if (levels == 3) {
    require_rate(gamma01, "gamma01");
    require_rate(gamma12, "gamma12");
    require_rate(gamma02, "gamma02");
    if (delta != 0.0) {
      throw std::invalid_argument("MirrorQubitParams: the cascade model is resonant (delta = 0)");
    }
    if (gamma_nr != 0.0) {
      throw std::invalid_argument("MirrorQubitParams: gamma_nr is only modelled for two levels");
    }
  }
}

double effective_coupling(double gamma, double phi) {
  if (gamma < 0.0) throw std::invalid_argument("effective_coupling: gamma must be >= 0");
  return gamma * (1.0 + std::cos(phi));
}

double pi_pulse_width(double alpha0, double gamma_eff) {
  if (!(alpha0 > 0.0) || !(gamma_eff > 0.0)) {
    throw std::invalid_argument("pi_pulse_width: alpha0 and gamma_eff must be positive (got " +
                                std::to_string(alpha0) + ", " + std::to_string(gamma_eff) + ")");
  }
  return std::numbers::pi / (2.0 * alpha0 * std::sqrt(gamma_eff));
}

// ---------------------------------------------------------------------------
// MirrorQubitModel

MirrorQubitModel::MirrorQubitModel(MirrorQubitParams params) : params_(params) {
  params_.validate();
}

void MirrorQubitModel::check_phase(double phi) const {
  if (params_.levels == 3 && phi != 0.0) {
    throw std::invalid_argument(
        "MirrorQubitModel: the three-level model is defined at phi = 0 only");
  }
}

Operator MirrorQubitModel::channel_operator(Transition t, double phi) const {
  check_phase(phi);
  if (params_.levels == 2) {
    if (t != Transition::k01) {
      throw std::invalid_argument("channel_operator: a two-level atom has only the 0-1 channel");
    }
    return mirror_amplitude(params_.gamma, phi) * lowering_op(2, 0, 1);
  }
  switch (t) {
    case Transition::k01:
      return mirror_amplitude(params_.gamma01, phi) * lowering_op(3, 0, 1);
    case Transition::k12:
      return mirror_amplitude(params_.gamma12, phi) * lowering_op(3, 1, 2);
    case Transition::k02:
      return mirror_amplitude(params_.gamma02, phi) * lowering_op(3, 0, 2);
  }
  throw std::logic_error("channel_operator: unknown transition");
}

Operator MirrorQubitModel::output_operator(double phi) const {
  return channel_operator(params_.levels == 2 ? Transition::k01 : Transition::k02, phi);
}

Operator MirrorQubitModel::hamiltonian(const Controls& c) const {
  const Operator l = output_operator(c.phi);
  const Complex a = c.alpha * std::polar(1.0, c.phi);
  const Operator drive = (-kI) * (a * l.adjoint() - std::conj(a) * l);
  if (params_.levels == 3) return drive;
  const double zeeman = (params_.delta - 0.5 * params_.gamma * std::sin(c.phi)) / 2.0;
  return zeeman * sigma_z() + drive;
}

std::vector<Operator> MirrorQubitModel::collapse_operators(double phi) const {
  std::vector<Operator> ops;
  if (params_.levels == 2) {
    ops.push_back(channel_operator(Transition::k01, phi));
    if (params_.gamma_nr > 0.0) {
      ops.push_back(std::sqrt(params_.gamma_nr) * lowering_op(2, 0, 1));
    }
    return ops;
  }
  for (Transition t : {Transition::k01, Transition::k12, Transition::k02}) {
    ops.push_back(channel_operator(t, phi));
  }
  return ops;
}

Superoperator MirrorQubitModel::liouvillian(const Controls& c) const {
  const std::vector<Operator> ops = collapse_operators(c.phi);
  return photonforge::liouvillian(hamiltonian(c), ops);
}

Operator MirrorQubitModel::projector(int level) const {
  if (level < 0 || level >= dim()) throw std::out_of_range("projector: level out of range");
  Matrix m = Matrix::Zero(dim(), dim());
  m(level, level) = 1.0;
  return Operator(std::move(m));
}

Superoperator build_liouvillian(const MirrorQubitParams& params, double phi, Complex alpha) {
  return MirrorQubitModel(params).liouvillian(Controls{phi, alpha});
}

// ---------------------------------------------------------------------------
// DriveSchedule

DriveSchedule::DriveSchedule(std::vector<DriveSegment> segments) : segments_(std::move(segments)) {
  double last_end = -std::numeric_limits<double>::infinity();
  for (const auto& s : segments_) {
    if (!(s.t_end >= s.t_start)) {
      throw std::invalid_argument("DriveSchedule: segment ends before it starts");
    }
    if (s.t_start < last_end - kTimeEps) {
      throw std::invalid_argument("DriveSchedule: segments overlap or are out of order");
    }
    if (!std::isfinite(s.amplitude.real()) || !std::isfinite(s.amplitude.imag())) {
      throw std::invalid_argument("DriveSchedule: amplitude must be finite");
    }
    last_end = s.t_end;
  }
}

DriveSchedule DriveSchedule::square_pi_pulse(Complex alpha0, double t0, double gamma_eff) {
  return square_pulse(alpha0, t0, pi_pulse_width(std::abs(alpha0), gamma_eff));
}

DriveSchedule DriveSchedule::square_pulse(Complex alpha0, double t0, double width) {
  if (width < 0.0) throw std::invalid_argument("DriveSchedule: negative pulse width");
  if (width == 0.0 || alpha0 == Complex{}) return DriveSchedule{};
  return DriveSchedule({DriveSegment{t0, t0 + width, alpha0}});
}

Complex DriveSchedule::amplitude_at(double t) const {
  for (const auto& s : segments_) {
    if (t >= s.t_start && t < s.t_end) return s.amplitude;
  }
  return {};
}

// ---------------------------------------------------------------------------
// PhaseSchedule

PhaseSchedule::PhaseSchedule(double base_phase) : base_(base_phase) {
  if (!(base_phase >= 0.0 && base_phase < kTwoPi)) {
    throw std::invalid_argument("PhaseSchedule: phase must lie in [0, 2 pi), got " +
                                std::to_string(base_phase));
  }
}

PhaseSchedule& PhaseSchedule::hold(double t_start, double t_end, double phi) {
  if (!(phi >= 0.0 && phi < kTwoPi)) {
    throw std::invalid_argument("PhaseSchedule: phase must lie in [0, 2 pi), got " +
                                std::to_string(phi));
  }
  if (!(t_end >= t_start)) throw std::invalid_argument("PhaseSchedule: segment ends before start");
  if (!segments_.empty() && t_start < segments_.back().t_end - kTimeEps) {
    throw std::invalid_argument("PhaseSchedule: segments must be appended in time order");
  }
  if (t_end > t_start) segments_.push_back(PhaseSegment{t_start, t_end, phi});
  return *this;
}

PhaseSchedule& PhaseSchedule::ramp(std::span<const double> times, std::span<const double> phis) {
  if (times.size() != phis.size() + 1) {
    throw std::invalid_argument("PhaseSchedule::ramp: need one more time than phase samples");
  }
  for (std::size_t k = 0; k < phis.size(); ++k) {
    if (!(times[k + 1] > times[k])) {
      throw std::invalid_argument("PhaseSchedule::ramp: sample times must increase");
    }
    hold(times[k], times[k + 1], phis[k]);
  }
  return *this;
}

PhaseSchedule& PhaseSchedule::set_release_time(double t_r) {
  release_time_ = t_r;
  return *this;
}

double PhaseSchedule::phase_at(double t) const {
  // Segments are sorted: binary search on the start times.
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double v, const PhaseSegment& s) { return v < s.t_start; });
  if (it == segments_.begin()) return base_;
  --it;
  return t < it->t_end ? it->phi : base_;
}

// ---------------------------------------------------------------------------
// Evolution

Evolution::Evolution(MirrorQubitParams params, DriveSchedule drive, PhaseSchedule phase,
                     std::optional<DensityMatrix> initial)
    : model_(params),
      drive_(std::move(drive)),
      phase_(std::move(phase)),
      initial_(initial ? *initial : DensityMatrix::basis(params.levels, 0)),
      memo_(std::make_shared<Memo>()) {
  if (initial_.dim() != model_.dim()) {
    throw std::invalid_argument("Evolution: initial state dimension does not match the model");
  }
}

Controls Evolution::controls_at(double t) const {
  return Controls{phase_.phase_at(t), drive_.amplitude_at(t)};
}

std::vector<double> Evolution::breakpoints(double t1, double t2) const {
  std::vector<double> points{t1, t2};
  auto add = [&](double t) {
    if (t > t1 + kTimeEps && t < t2 - kTimeEps) points.push_back(t);
  };
  for (const auto& s : drive_.segments()) {
    add(s.t_start);
    add(s.t_end);
  }
  for (const auto& s : phase_.segments()) {
    add(s.t_start);
    add(s.t_end);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end(),
                           [](double a, double b) { return std::abs(a - b) <= kTimeEps; }),
               points.end());
  if (points.back() != t2) points.back() = t2;
  return points;
}

std::vector<TimeStep> Evolution::steps(double t1, double t2, double max_step) const {
  if (!(t2 >= t1)) throw std::invalid_argument("Evolution::steps: t2 < t1");
  if (!(max_step > 0.0)) throw std::invalid_argument("Evolution::steps: max_step must be > 0");
  std::vector<TimeStep> out;
  const std::vector<double> points = breakpoints(t1, t2);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = points[i];
    const double b = points[i + 1];
    if (b <= a) continue;
    const Controls c = controls_at(0.5 * (a + b));
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / max_step - 1e-9)));
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double start = a + static_cast<double>(k) * h;
      const double end = (k + 1 == n) ? b : a + static_cast<double>(k + 1) * h;
      out.push_back(TimeStep{start, end, c});
    }
  }
  return out;
}

Superoperator Evolution::generator(const Controls& c) const { return model_.liouvillian(c); }

Superoperator Evolution::step_propagator(const Controls& c, double duration) const {
  const Key key{c.phi, c.alpha.real(), c.alpha.imag(), duration};
  {
    std::lock_guard<std::mutex> lock(memo_->mutex);
    if (auto it = memo_->exponentials.find(key); it != memo_->exponentials.end()) {
      return it->second;
    }
  }
  Superoperator value = sup_exp(generator(c), duration);
  std::lock_guard<std::mutex> lock(memo_->mutex);
  return memo_->exponentials.emplace(key, std::move(value)).first->second;
}

Superoperator Evolution::propagator(double t1, double t2) const {
  if (!(t2 >= t1)) {
    throw std::invalid_argument("propagator: need t1 <= t2 (got " + std::to_string(t1) + ", " +
                                std::to_string(t2) + ")");
  }
  Superoperator total = Superoperator::identity(model_.dim());
  const std::vector<double> points = breakpoints(t1, t2);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = points[i];
    const double b = points[i + 1];
    if (b <= a) continue;
    total = step_propagator(controls_at(0.5 * (a + b)), b - a) * total;
  }
  return total;
}

Matrix Evolution::evolve(const Matrix& rho, double t1, double t2) const {
  return propagator(t1, t2).apply(rho);
}

DensityMatrix Evolution::state_at(double t) const {
  if (t < 0.0) throw std::invalid_argument("Evolution::state_at: t must be >= 0");
  return DensityMatrix(evolve(initial_.matrix(), 0.0, t), 1e-8);
}

Superoperator propagator(const Evolution& run, double t1, double t2) {
  return run.propagator(t1, t2);
}

std::vector<double> expectation_series(const Evolution& run, const Operator& observable,
                                       std::span<const double> times) {
  if (!std::is_sorted(times.begin(), times.end())) {
    throw std::invalid_argument("expectation_series: time grid must be sorted");
  }
  if (!times.empty() && times.front() < 0.0) {
    throw std::invalid_argument("expectation_series: times must be >= 0");
  }
  std::vector<double> out;
  out.reserve(times.size());
  Matrix rho = run.initial_state().matrix();
  double t_prev = 0.0;
  for (double t : times) {
    rho = run.evolve(rho, t_prev, t);
    t_prev = t;
    out.push_back((observable.matrix() * rho).trace().real());
  }
  return out;
}

std::vector<double> uniform_grid(double t_start, double t_end, double step) {
  if (!(t_end >= t_start) || !(step > 0.0)) {
    throw std::invalid_argument("uniform_grid: need t_end >= t_start and step > 0");
  }
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((t_end - t_start) / step - 1e-9)));
  std::vector<double> grid(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    grid[k] = t_start + (t_end - t_start) * static_cast<double>(k) / static_cast<double>(n);
  }
  grid.back() = t_end;
  return grid;
}

}  // namespace photonforge::dynamics
