#include "photonforge/scenarios.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

namespace photonforge::scenarios {

namespace {

using dynamics::DriveSchedule;
using dynamics::Evolution;
using dynamics::MirrorQubitParams;
using dynamics::PhaseSchedule;

constexpr int kPointsPerPulse = 50;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Width of a pi pulse at the given amplitude, 0 when there is no drive.
double pulse_width_for(Complex alpha0, double gamma_eff) {
  if (std::abs(alpha0) == 0.0) return 0.0;
  return dynamics::pi_pulse_width(std::abs(alpha0), gamma_eff);
}

// tr(L^dag L rho) and <1|rho|1> along a grid, following phi(t).
void fill_series(const Evolution& run, const std::vector<double>& times, std::vector<double>* flux,
                 std::vector<double>* phase, std::vector<double>* p_exc) {
  const Operator excited = run.model().projector(1);
  Matrix rho = run.initial_state().matrix();
  double t_prev = 0.0;
  for (double t : times) {
    rho = run.evolve(rho, t_prev, t);
    t_prev = t;
    const double phi = run.controls_at(t).phi;
    const Operator l = run.model().output_operator(phi);
    if (flux) flux->push_back(((l.adjoint() * l).matrix() * rho).trace().real());
    if (phase) phase->push_back(phi);
    if (p_exc) p_exc->push_back((excited.matrix() * rho).trace().real());
  }
}

// Remaining packet mass S_k = int_{t_k}^{end} |xi|^2, trapezoid.
std::vector<double> tail_mass(const WavePacket& packet) {
  const std::size_t n = packet.times.size();
  std::vector<double> s(n, 0.0);
  const double h = packet.step();
  for (std::size_t k = n - 1; k-- > 0;) {
    s[k] = s[k + 1] + 0.5 * h * (std::norm(packet.xi[k]) + std::norm(packet.xi[k + 1]));
  }
  return s;
}

std::vector<double> clip_rates(const std::vector<double>& raw, double cap) {
  std::vector<double> out(raw.size());
  std::transform(raw.begin(), raw.end(), out.begin(),
                 [cap](double g) { return std::clamp(g, 0.0, cap); });
  return out;
}

}  // namespace

std::optional<std::string> anharmonicity_warning(double alpha0, double gamma_eff,
                                                 double anharmonicity) {
  const double omega = 2.0 * std::abs(alpha0) * std::sqrt(std::max(gamma_eff, 0.0));
  if (omega >= anharmonicity) {
    return "drive Rabi frequency 2 alpha0 sqrt(gamma_eff) = " + num(omega) +
           " reaches the anharmonicity " + num(anharmonicity) +
           "; the two-level description is not reliable";
  }
  return std::nullopt;
}

double resolved_step(double dt, double pulse_width) {
  if (!(dt > 0.0)) throw std::invalid_argument("grid step dt must be > 0");
  if (pulse_width > 0.0) return std::min(dt, pulse_width / kPointsPerPulse);
  return dt;
}

// ---------------------------------------------------------------------------
// Beam splitter

double BeamSplitterConfig::tau() const { return std::sqrt(std::max(0.0, 1.0 - r * r)); }

Complex BeamSplitterConfig::beta(Complex alpha_in) const {
  const double t = tau();
  if (t == 0.0) throw std::domain_error("BeamSplitterConfig::beta: tau = 0, no cancelling port");
  return (-kI * r * alpha_in / t) * std::polar(1.0 + beta_amplitude_error, beta_phase_error);
}

void BeamSplitterConfig::validate() const {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::invalid_argument("BeamSplitterConfig: r must lie in [0, 1], got " + num(r));
  }
  if (!(t0 >= 0.0) || !(t_final >= t0)) {
    throw std::invalid_argument("BeamSplitterConfig: need 0 <= t0 <= t_final");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("BeamSplitterConfig: dt must be > 0");
  if (!(beta_amplitude_error > -1.0)) {
    throw std::invalid_argument("BeamSplitterConfig: beta_amplitude_error must be > -1");
  }
}

Evolution beam_splitter_evolution(const MirrorQubitParams& params,
                                  const BeamSplitterConfig& config) {
  config.validate();
  MirrorQubitParams p = params;
  p.delta = config.delta;
  p.validate();
  const double width = pulse_width_for(config.alpha0, dynamics::effective_coupling(p.gamma, config.phi));
  return Evolution(p, DriveSchedule::square_pulse(config.alpha0, config.t0, width),
                   PhaseSchedule(config.phi));
}

statistics::OutputChannel beam_splitter_channel(const dynamics::MirrorQubitModel& model,
                                                const BeamSplitterConfig& config) {
  const double r = config.r;
  const Complex mismatch = 1.0 - std::polar(1.0 + config.beta_amplitude_error,
                                            config.beta_phase_error);
  return [model, r, mismatch](const dynamics::Controls& c) {
    // d = i r (coherent + L) + tau beta; tau beta removes the coherent part
    // up to the mismatch.
    const Complex coherent = std::polar(1.0, c.phi) * c.alpha;
    return AffineOperator(kI * r * model.output_operator(c.phi), kI * r * coherent * mismatch);
  };
}

statistics::PhotonStatistics run_beam_splitter(const MirrorQubitParams& params,
                                               const BeamSplitterConfig& config, int cutoff) {
  const Evolution run = beam_splitter_evolution(params, config);
  const double gamma_eff = dynamics::effective_coupling(run.model().params().gamma, config.phi);
  const double width = pulse_width_for(config.alpha0, gamma_eff);
  statistics::PhotonStatistics stats =
      statistics::photon_statistics(run, beam_splitter_channel(run.model(), config), cutoff,
                                    config.t0, config.t_final, resolved_step(config.dt, width));
  if (auto w = anharmonicity_warning(std::abs(config.alpha0), gamma_eff, kDefaultAnharmonicity)) {
    stats.diagnostics.push_back(*w);
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Wave packets

namespace {

std::vector<double> uniform_times(double t_start, double t_end, double dt) {
  if (!(t_end > t_start) || !(dt > 0.0)) {
    throw std::invalid_argument("WavePacket: need t_end > t_start and dt > 0");
  }
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round((t_end - t_start) / dt)));
  std::vector<double> t(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    t[k] = t_start + (t_end - t_start) * static_cast<double>(k) / static_cast<double>(n);
  }
  return t;
}

}  // namespace

WavePacket WavePacket::exponential(double kappa, double t_start, double t_end, double dt) {
  if (!(kappa > 0.0)) throw std::invalid_argument("WavePacket::exponential: kappa must be > 0");
  WavePacket p;
  p.kind = Kind::exponential;
  p.times = uniform_times(t_start, t_end, dt);
  for (double t : p.times) p.xi.emplace_back(std::sqrt(kappa) * std::exp(-0.5 * kappa * (t - t_start)));
  p.normalize();
  return p;
}

WavePacket WavePacket::gaussian(double center, double sigma, double truncation, double dt) {
  if (!(sigma > 0.0) || !(truncation > 0.0)) {
    throw std::invalid_argument("WavePacket::gaussian: sigma and truncation must be > 0");
  }
  WavePacket p;
  p.kind = Kind::gaussian;
  p.times = uniform_times(center - truncation * sigma, center + truncation * sigma, dt);
  for (double t : p.times) {
    const double z = (t - center) / sigma;
    p.xi.emplace_back(std::exp(-0.25 * z * z));
  }
  p.normalize();
  return p;
}

WavePacket WavePacket::custom(std::vector<double> times, std::vector<Complex> xi) {
  if (times.size() < 2 || times.size() != xi.size()) {
    throw std::invalid_argument("WavePacket::custom: need >= 2 samples and matching sizes");
  }
  const double h = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(h > 0.0)) throw std::invalid_argument("WavePacket::custom: times must increase");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (std::abs(times[k] - times[k - 1] - h) > 1e-9 * std::max(1.0, h)) {
      throw std::invalid_argument("WavePacket::custom: times must be uniformly spaced");
    }
  }
  WavePacket p;
  p.kind = Kind::custom;
  p.times = std::move(times);
  p.xi = std::move(xi);
  p.normalize();
  return p;
}

double WavePacket::step() const {
  return (times.back() - times.front()) / static_cast<double>(times.size() - 1);
}

double WavePacket::norm() const { return tail_mass(*this).front(); }

std::string WavePacket::kind_name() const {
  switch (kind) {
    case Kind::exponential: return "exponential";
    case Kind::gaussian: return "gaussian";
    case Kind::custom: return "custom";
  }
  return "custom";
}

void WavePacket::normalize() {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("WavePacket: zero or invalid norm");
  const double s = 1.0 / std::sqrt(n);
  for (auto& v : xi) v *= s;
}

// ---------------------------------------------------------------------------
// Release schedules

double misplaced_mass(const WavePacket& packet, const std::vector<double>& gamma_eff) {
  const std::vector<double> s = tail_mass(packet);
  if (gamma_eff.size() + 1 != s.size()) {
    throw std::invalid_argument("misplaced_mass: need one rate per packet step");
  }
  const double h = packet.step();
  double population = 1.0;
  double total = 0.0;
  for (std::size_t k = 0; k < gamma_eff.size(); ++k) {
    const double emitted = population * -std::expm1(-gamma_eff[k] * h);
    const double target = (s[k] - s[k + 1]) / s.front();
    total += std::abs(emitted - target);
    population -= emitted;
  }
  return 0.5 * (total + population);
}

PhaseSchedule ReleaseSchedule::schedule() const {
  PhaseSchedule out(kPi);
  out.ramp(times, phis);
  if (!times.empty()) out.set_release_time(times.front());
  return out;
}

ReleaseSchedule shape_to_schedule(const WavePacket& packet, double gamma, double t_r,
                                  double clip_budget) {
  if (!(gamma > 0.0)) throw std::invalid_argument("shape_to_schedule: gamma must be > 0");
  if (packet.times.size() < 2) throw std::invalid_argument("shape_to_schedule: empty packet");
  if (packet.times.front() < t_r - 1e-9) {
    throw std::invalid_argument("shape_to_schedule: packet starts at " +
                                num(packet.times.front()) + ", before the release time " +
                                num(t_r));
  }
  const std::vector<double> s = tail_mass(packet);
  const double h = packet.step();
  const std::size_t n = packet.times.size() - 1;

  std::vector<double> raw(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (s[k] <= 0.0) {
      raw[k] = 0.0;
    } else if (s[k + 1] <= 0.0) {
      raw[k] = std::numeric_limits<double>::infinity();
    } else {
      raw[k] = -std::log(s[k + 1] / s[k]) / h;
    }
  }

  ReleaseSchedule out;
  out.times = packet.times;
  out.gamma_eff = clip_rates(raw, 2.0 * gamma);
  out.phis.reserve(n);
  for (double g : out.gamma_eff) out.phis.push_back(std::acos(std::clamp(g / gamma - 1.0, -1.0, 1.0)));
  out.clipped_mass = misplaced_mass(packet, out.gamma_eff);

  const auto clipped = std::count_if(raw.begin(), raw.end(), [&](double g) { return g > 2.0 * gamma; });
  if (clipped > 0) {
    out.diagnostics.push_back("coupling clipped at 2 gamma on " + std::to_string(clipped) + " of " +
                              std::to_string(n) + " steps; misplaced emission mass " +
                              num(out.clipped_mass));
  }

  if (out.clipped_mass > clip_budget) {
    auto misplaced_at = [&](double g) { return misplaced_mass(packet, clip_rates(raw, 2.0 * g)); };
    double lo = gamma;
    double hi = 2.0 * gamma;
    while (misplaced_at(hi) > clip_budget && hi < 1e8 * gamma) {
      lo = hi;
      hi *= 2.0;
    }
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (misplaced_at(mid) > clip_budget ? lo : hi) = mid;
    }
    throw ClipBudgetExceeded("shape_to_schedule: clipping at 2 gamma misplaces " +
                                 num(out.clipped_mass) + " of the packet (budget " +
                                 num(clip_budget) + "); gamma >= " + num(hi) + " would suffice",
                             hi);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shaped release

void ShapedReleaseConfig::validate() const {
  if (!(phi_i >= 0.0 && phi_i < 2.0 * kPi)) {
    throw std::invalid_argument("ShapedReleaseConfig: phi_i must lie in [0, 2 pi)");
  }
  if (!(phi_r >= 0.0 && phi_r < 2.0 * kPi)) {
    throw std::invalid_argument("ShapedReleaseConfig: phi_r must lie in [0, 2 pi)");
  }
  if (!(t0 >= 0.0) || !(t_final >= t_r)) {
    throw std::invalid_argument("ShapedReleaseConfig: need t0 >= 0 and t_r <= T");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("ShapedReleaseConfig: dt must be > 0");
}

Evolution shaped_release_evolution(const MirrorQubitParams& params,
                                   const ShapedReleaseConfig& config, ReleaseSchedule* release) {
  config.validate();
  params.validate();
  if (params.levels != 2) throw std::invalid_argument("shaped release needs a two-level model");
  const double gamma_eff_i = dynamics::effective_coupling(params.gamma, config.phi_i);
  const double width = pulse_width_for(config.alpha0, gamma_eff_i);
  const double pulse_end = config.t0 + width;
  if (config.t_r < pulse_end - 1e-12) {
    throw std::invalid_argument("shaped release: t_r = " + num(config.t_r) +
                                " falls inside the pi pulse ending at " + num(pulse_end));
  }

  // Storage at pi outside the excitation and release stages.
  PhaseSchedule phase(kPi);
  phase.hold(0.0, pulse_end, config.phi_i);
  if (config.packet) {
    ReleaseSchedule rel = shape_to_schedule(*config.packet, params.gamma, config.t_r,
                                            config.clip_budget);
    phase.ramp(rel.times, rel.phis);
    if (rel.times.back() < config.t_final) {
      phase.hold(rel.times.back(), config.t_final, rel.phis.back());
    } else if (rel.times.back() > config.t_final + 1e-12) {
      rel.diagnostics.push_back("release window ends at T = " + num(config.t_final) +
                                " before the packet support ends at " + num(rel.times.back()) +
                                "; the tail is clipped");
    }
    if (release) *release = std::move(rel);
  } else {
    phase.hold(config.t_r, config.t_final, config.phi_r);
  }
  phase.set_release_time(config.t_r);
  return Evolution(params, DriveSchedule::square_pulse(config.alpha0, config.t0, width),
                   std::move(phase));
}

ShapedReleaseResult run_shaped_release(const MirrorQubitParams& params,
                                       const ShapedReleaseConfig& config, int cutoff) {
  ReleaseSchedule rel;
  const Evolution run = shaped_release_evolution(params, config, &rel);
  ShapedReleaseResult out;
  const double gamma_eff_i = dynamics::effective_coupling(params.gamma, config.phi_i);
  out.pulse_width = pulse_width_for(config.alpha0, gamma_eff_i);
  out.stats = statistics::photon_statistics(run, statistics::mirror_output(run.model()), cutoff,
                                            config.t_r, config.t_final,
                                            resolved_step(config.dt, out.pulse_width));
  if (auto w = anharmonicity_warning(std::abs(config.alpha0), gamma_eff_i, kDefaultAnharmonicity)) {
    out.stats.diagnostics.push_back(*w);
  }

  out.times = dynamics::uniform_grid(0.0, config.t_final, config.dt);
  fill_series(run, out.times, &out.flux, &out.phase, &out.p_exc);

  if (config.packet) {
    out.stats.diagnostics.insert(out.stats.diagnostics.end(), rel.diagnostics.begin(),
                                 rel.diagnostics.end());
    // Emitted flux against |xi|^2 on the packet samples inside the window.
    std::vector<double> t;
    std::vector<double> target;
    for (std::size_t k = 0; k < config.packet->times.size(); ++k) {
      if (config.packet->times[k] > config.t_final + 1e-12) break;
      t.push_back(config.packet->times[k]);
      target.push_back(std::norm(config.packet->xi[k]));
    }
    std::vector<double> flux;
    fill_series(run, t, &flux, nullptr, nullptr);
    const double h = config.packet->step();
    double emitted = 0.0;
    for (std::size_t k = 0; k + 1 < flux.size(); ++k) emitted += 0.5 * h * (flux[k] + flux[k + 1]);
    double num2 = 0.0;
    double den2 = 0.0;
    for (std::size_t k = 0; k < flux.size(); ++k) {
      const double d = flux[k] / emitted - target[k];
      num2 += d * d;
      den2 += target[k] * target[k];
    }
    out.flux_l2_error = std::sqrt(num2 / den2);
    out.release = std::move(rel);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cascade

Evolution cascade_evolution(const MirrorQubitParams& params, const CascadeConfig& config) {
  MirrorQubitParams p = params;
  p.levels = 3;
  p.validate();
  if (!(config.alpha_d >= 0.0)) throw std::invalid_argument("cascade: alpha_d must be >= 0");
  const double width =
      pulse_width_for(Complex{config.alpha_d, 0.0}, dynamics::effective_coupling(p.gamma02, 0.0));
  return Evolution(p, DriveSchedule::square_pulse(Complex{config.alpha_d, 0.0}, config.t0, width),
                   PhaseSchedule(0.0));
}

statistics::CrossPairResult run_cascade(const MirrorQubitParams& params,
                                        const CascadeConfig& config) {
  const Evolution run = cascade_evolution(params, config);
  const double width = pulse_width_for(Complex{config.alpha_d, 0.0},
                                       dynamics::effective_coupling(run.model().params().gamma02, 0.0));
  return statistics::cross_pair_statistics(run, config.t_final, resolved_step(config.dt, width));
}

std::vector<CascadePoint> sweep_cascade(const MirrorQubitParams& params,
                                        const std::vector<double>& alpha_d,
                                        const std::vector<double>& gamma02,
                                        const CascadeConfig& config) {
  const std::size_t cols = gamma02.size();
  return parallel_map<CascadePoint>(alpha_d.size() * cols, [&](std::size_t i) {
    MirrorQubitParams p = params;
    p.gamma02 = gamma02[i % cols];
    CascadeConfig c = config;
    c.alpha_d = alpha_d[i / cols];
    return CascadePoint{c.alpha_d, p.gamma02, run_cascade(p, c)};
  });
}

// ---------------------------------------------------------------------------
// Sweeps

std::vector<SweepRow> sweep_nonradiative(const MirrorQubitParams& params,
                                         const BeamSplitterConfig& config,
                                         const std::vector<double>& gamma_nr, int cutoff) {
  return parallel_map<SweepRow>(gamma_nr.size(), [&](std::size_t i) {
    MirrorQubitParams p = params;
    p.gamma_nr = gamma_nr[i];
    return SweepRow{gamma_nr[i], run_beam_splitter(p, config, cutoff).probabilities};
  });
}

std::vector<SweepRow> sweep_wait_time(const MirrorQubitParams& params,
                                      const WaitSweepConfig& config,
                                      const std::vector<double>& t_wait, int cutoff) {
  for (double w : t_wait) {
    if (!(w >= 0.0)) throw std::invalid_argument("sweep_wait_time: t_wait must be >= 0");
  }
  const double width =
      pulse_width_for(config.alpha0, dynamics::effective_coupling(params.gamma, config.phi_i));
  return parallel_map<SweepRow>(t_wait.size(), [&](std::size_t i) {
    ShapedReleaseConfig c;
    c.phi_i = config.phi_i;
    c.alpha0 = config.alpha0;
    c.t0 = config.t0;
    c.phi_r = config.phi_r;
    c.t_r = config.t0 + width + t_wait[i];
    c.t_final = c.t_r + config.window;
    c.dt = config.dt;
    const Evolution run = shaped_release_evolution(params, c);
    const auto stats = statistics::photon_statistics(run, statistics::mirror_output(run.model()),
                                                     cutoff, c.t_r, c.t_final,
                                                     resolved_step(c.dt, width));
    return SweepRow{t_wait[i], stats.probabilities};
  });
}

// ---------------------------------------------------------------------------
// Flying-qubit encoding

void FlyingQubitTarget::validate() const {
  const double n = std::norm(mu) + std::norm(nu);
  if (std::abs(n - 1.0) > 1e-10) {
    throw std::invalid_argument("FlyingQubitTarget: |mu|^2 + |nu|^2 = " + num(n) + ", not 1");
  }
}

double encoding_fidelity(const MirrorQubitParams& params, double phi, double delta, Complex alpha0,
                         double pulse_width, const FlyingQubitTarget& target) {
  MirrorQubitParams p = params;
  p.delta = delta;
  const Superoperator step =
      sup_exp(dynamics::build_liouvillian(p, phi, alpha0), std::max(pulse_width, 0.0));
  const Matrix rho = step.apply(DensityMatrix::basis(2, 0).matrix());
  Vector psi(2);
  psi << target.mu, target.nu;
  return (psi.adjoint() * rho * psi)(0, 0).real();
}

namespace {

struct EncodeProblem {
  const MirrorQubitParams* params;
  const FlyingQubitTarget* target;
  double phi;
  double delta0;
  double delta_span;
  double alpha_scale;
  double width0;

  // x = (delta offset, Re alpha, Im alpha, width), each scaled to O(1).
  void unpack(const gsl_vector* x, double* delta, Complex* alpha, double* width) const {
    *delta = delta0 + delta_span * std::clamp(gsl_vector_get(x, 0), -5.0, 5.0);
    *alpha = alpha_scale * Complex{std::clamp(gsl_vector_get(x, 1), -3.0, 3.0),
                                   std::clamp(gsl_vector_get(x, 2), -3.0, 3.0)};
    *width = width0 * std::clamp(gsl_vector_get(x, 3), 0.0, 3.0);
  }
};

double encode_objective(const gsl_vector* x, void* data) {
  const auto* prob = static_cast<const EncodeProblem*>(data);
  double delta = 0.0;
  Complex alpha;
  double width = 0.0;
  prob->unpack(x, &delta, &alpha, &width);
  return 1.0 - encoding_fidelity(*prob->params, prob->phi, delta, alpha, width, *prob->target);
}

}  // namespace

EncodeResult encode_flying_qubit(const FlyingQubitTarget& target, const MirrorQubitParams& params,
                                 const EncodeOptions& options) {
  target.validate();
  params.validate();
  if (params.levels != 2) throw std::invalid_argument("encode_flying_qubit: needs two levels");
  const double gamma_eff = dynamics::effective_coupling(params.gamma, options.phi);
  if (!(gamma_eff > 0.0)) {
    throw std::invalid_argument("encode_flying_qubit: the drive does not couple at phi = " +
                                num(options.phi));
  }
  if (!(options.rabi > 0.0)) throw std::invalid_argument("encode_flying_qubit: rabi must be > 0");

  EncodeResult out;
  out.phi = options.phi;
  const double lamb = 0.5 * params.gamma * std::sin(options.phi);

  if (std::abs(target.nu) < 1e-12) {
    out.delta = lamb;
    out.fidelity = encoding_fidelity(params, options.phi, lamb, Complex{}, 0.0, target);
    return out;
  }

  // Resonant closed form: |0> -> cos(|g| t)|0> - (g / |g|) sin(|g| t)|1>,
  // g = alpha e^{i phi} c^*, c = sqrt(G/2)(1 + e^{i phi}).
  const Complex c = std::sqrt(params.gamma / 2.0) * (1.0 + std::polar(1.0, options.phi));
  const Complex nu = std::abs(target.mu) > 1e-15
                         ? target.nu * std::polar(1.0, -std::arg(target.mu))
                         : target.nu;
  const double magnitude = options.rabi / (2.0 * std::sqrt(gamma_eff));
  const Complex alpha0 =
      std::polar(magnitude, std::arg(-nu) - options.phi + std::arg(c));
  const double theta = 2.0 * std::asin(std::min(1.0, std::abs(target.nu)));
  const double width0 = theta / options.rabi;

  EncodeProblem prob{&params, &target, options.phi, lamb, options.rabi, magnitude, width0};

  gsl_multimin_function f{&encode_objective, 4, &prob};
  gsl_vector* x = gsl_vector_alloc(4);
  gsl_vector* step = gsl_vector_alloc(4);
  gsl_vector_set(x, 0, 0.0);
  gsl_vector_set(x, 1, alpha0.real() / magnitude);
  gsl_vector_set(x, 2, alpha0.imag() / magnitude);
  gsl_vector_set(x, 3, 1.0);
  gsl_multimin_fminimizer* s =
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 4);

  // Restart from the best point with a smaller simplex to avoid a collapsed start.
  for (double scale : {0.05, 0.005, 0.0005}) {
    gsl_vector_set_all(step, scale);
    gsl_multimin_fminimizer_set(s, &f, x, step);
    for (int it = 0; it < options.max_iterations; ++it) {
      if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-10) == GSL_SUCCESS) break;
    }
    gsl_vector_memcpy(x, gsl_multimin_fminimizer_x(s));
  }
  prob.unpack(x, &out.delta, &out.alpha0, &out.pulse_width);
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);

  out.fidelity =
      encoding_fidelity(params, options.phi, out.delta, out.alpha0, out.pulse_width, target);
  out.drive = DriveSchedule::square_pulse(out.alpha0, 0.0, out.pulse_width);
  if (auto w = anharmonicity_warning(std::abs(out.alpha0), gamma_eff, options.anharmonicity)) {
    out.warnings.push_back(*w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cancellation

void CancellationInputs::validate() const {
  if (!(a1 >= 0.0) || !(a2 >= 0.0)) {
    throw std::invalid_argument("CancellationInputs: amplitudes must be >= 0");
  }
  if (!(tau1 >= 0.0 && tau1 <= 1.0) || !(tau2 >= 0.0 && tau2 <= 1.0)) {
    throw std::invalid_argument("CancellationInputs: tau1, tau2 must lie in [0, 1]");
  }
}

CancellationResult cancellation_budget(const CancellationInputs& in) {
  in.validate();
  const double ref = in.tau1 * in.a1;
  if (ref == 0.0) throw std::invalid_argument("cancellation_budget: reference arm carries no signal");
  CancellationResult out;
  if (in.omega1 == in.omega2) {
    // Phase mismatch from the cancelling condition phi2 = phi1 + phi + (2n - 1) pi.
    const double mismatch =
        in.phi2 - (in.phi1 + in.phi + (2.0 * in.n - 1.0) * kPi);
    out.residual = std::abs(ref - in.tau2 * in.a2 * std::polar(1.0, mismatch)) / ref;
  } else {
    out.residual = (ref + in.tau2 * in.a2) / ref;
  }
  out.residual_db = out.residual == 0.0 ? -std::numeric_limits<double>::infinity()
                                        : 20.0 * std::log10(out.residual);
  return out;
}

double implied_phase_error(double residual_db) {
  return 2.0 * std::asin(std::min(1.0, 0.5 * std::pow(10.0, residual_db / 20.0)));
}

double implied_amplitude_error(double residual_db) { return std::pow(10.0, residual_db / 20.0); }

// ---------------------------------------------------------------------------

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PHOTONFORGE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(worker_count(), n);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = n;
  std::exception_ptr error;

  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace photonforge::scenarios
