#include "photonforge/photon_statistics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace photonforge::statistics {

namespace {

constexpr double kNegativeSlack = 1e-3;
constexpr double kRouteAgreement = 1e-12;
constexpr double kFluxAgreement = 1e-6;

using dynamics::Controls;
using dynamics::Evolution;
using dynamics::TimeStep;
using dynamics::Transition;

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

// Row vector w with w . vec(X) = tr(X).
Eigen::RowVectorXcd trace_functional(int dim) {
  Eigen::RowVectorXcd w = Eigen::RowVectorXcd::Zero(dim * dim);
  for (int i = 0; i < dim; ++i) w(i * (dim + 1)) = 1.0;
  return w;
}

void require_window(double t_start, double t_final, double grid_step, const char* who) {
  if (!(t_start >= 0.0) || !(t_final >= t_start)) {
    throw std::invalid_argument(std::string(who) + ": need 0 <= window start <= window end");
  }
  if (!(grid_step > 0.0)) throw std::invalid_argument(std::string(who) + ": grid_step must be > 0");
}

// Per-step data shared by the simplex integrators.
struct StepOperators {
  Matrix propagator;
  Matrix jump;
  Eigen::RowVectorXcd trace_after_jump;
};

// O_ab = int_{t1 <= t2} tr[J_b P(t2, t1) J_a rho(t1)] over [t_start, t_final].
double ordered_pair_integral(const Evolution& run, const OutputChannel& first,
                             const OutputChannel& second, double t_start, double t_final,
                             double grid_step) {
  const int d = run.model().dim();
  const Eigen::RowVectorXcd tr = trace_functional(d);
  Vector rho = vectorize(run.evolve(run.initial_state().matrix(), 0.0, t_start));
  Vector x = Vector::Zero(d * d);
  double total = 0.0;
  for (const TimeStep& step : run.steps(t_start, t_final, grid_step)) {
    const double h = step.duration();
    const Matrix u = run.step_propagator(step.controls, h).matrix();
    const Matrix ja = jump(first(step.controls).full()).matrix();
    const Eigen::RowVectorXcd wb = tr * jump(second(step.controls).full()).matrix();
    const Vector rho_next = u * rho;
    const Vector x_next = u * x + 0.5 * h * (u * (ja * rho) + ja * rho_next);
    total += 0.5 * h * ((wb * x).value() + (wb * x_next).value()).real();
    rho = rho_next;
    x = x_next;
  }
  return total;
}

}  // namespace

OutputChannel mirror_output(const dynamics::MirrorQubitModel& model) {
  return [model](const Controls& c) { return AffineOperator(model.output_operator(c.phi)); };
}

OutputChannel transition_output(const dynamics::MirrorQubitModel& model, Transition transition) {
  return [model, transition](const Controls& c) {
    return AffineOperator(model.channel_operator(transition, c.phi));
  };
}

double correlator_gm(const Evolution& run, const OutputChannel& channel,
                     std::span<const double> times) {
  if (times.empty()) throw std::invalid_argument("correlator_gm: need at least one time");
  if (!std::is_sorted(times.begin(), times.end())) {
    throw std::invalid_argument("correlator_gm: times must be sorted t1 <= ... <= tm");
  }
  if (times.front() < 0.0) throw std::invalid_argument("correlator_gm: times must be >= 0");
  Matrix x = run.evolve(run.initial_state().matrix(), 0.0, times.front());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Operator l = channel(run.controls_at(times[i])).full();
    x = l.matrix() * x * l.matrix().adjoint();
    if (i + 1 < times.size()) x = run.evolve(x, times[i], times[i + 1]);
  }
  return x.trace().real();
}

MtipleResult photon_mtiples(const Evolution& run, const OutputChannel& channel, int cutoff,
                            double t_r, double t_final, double grid_step,
                            int min_points_per_pulse) {
  if (cutoff < 1) throw std::invalid_argument("photon_mtiples: cutoff must be >= 1");
  require_window(t_r, t_final, grid_step, "photon_mtiples");

  MtipleResult result;
  const std::vector<TimeStep> steps = run.steps(t_r, t_final, grid_step);

  for (const auto& seg : run.drive().segments()) {
    const double a = std::max(seg.t_start, t_r);
    const double b = std::min(seg.t_end, t_final);
    if (b <= a) continue;
    const auto inside = std::count_if(steps.begin(), steps.end(), [&](const TimeStep& s) {
      const double mid = 0.5 * (s.t_start + s.t_end);
      return mid > a && mid < b;
    });
    if (inside < min_points_per_pulse) {
      result.diagnostics.push_back(
          "under-resolved drive segment: " + std::to_string(inside) + " grid points across a " +
          fmt("%.6g", b - a) + "-long pulse; refine grid_step to <= " +
          fmt("%.6g", (b - a) / min_points_per_pulse));
    }
  }

  const int d = run.model().dim();
  const Eigen::RowVectorXcd tr = trace_functional(d);
  const auto m = static_cast<std::size_t>(cutoff);

  // x[0] = rho, x[k] = X_k
  std::vector<Vector> x(m, Vector::Zero(d * d));
  x[0] = vectorize(run.evolve(run.initial_state().matrix(), 0.0, t_r));
  std::vector<double> n(m, 0.0);
  double flux_integral = 0.0;

  std::vector<Vector> next(m);
  for (const TimeStep& step : steps) {
    const double h = step.duration();
    const Matrix u = run.step_propagator(step.controls, h).matrix();
    const AffineOperator field = channel(step.controls);
    const Operator l = field.full();
    const Matrix j = jump(l).matrix();
    const Eigen::RowVectorXcd wj = tr * j;
    const Matrix flux = (l.adjoint() * l).matrix();

    next[0] = u * x[0];
    for (std::size_t k = 1; k < m; ++k) {
      next[k] = u * x[k] + 0.5 * h * (u * (j * x[k - 1]) + j * next[k - 1]);
    }
    for (std::size_t k = 0; k < m; ++k) {
      n[k] += 0.5 * h * ((wj * x[k]).value() + (wj * next[k]).value()).real();
    }
    const double f0 = (flux * unvectorize(x[0], d)).trace().real();
    const double f1 = (flux * unvectorize(next[0], d)).trace().real();
    flux_integral += 0.5 * h * (f0 + f1);
    std::swap(x, next);
  }

  if (std::abs(n[0] - flux_integral) > kFluxAgreement) {
    throw NumericalError(fmt("photon_mtiples: N_1 = %.12g disagrees with the integrated flux %.12g",
                             n[0], flux_integral));
  }
  result.n_tiples = std::move(n);
  result.n1_flux = flux_integral;
  return result;
}

std::vector<double> binomial_moments(std::span<const double> probabilities) {
  if (probabilities.empty()) throw std::invalid_argument("binomial_moments: empty input");
  const int k = static_cast<int>(probabilities.size()) - 1;
  std::vector<double> n(static_cast<std::size_t>(k), 0.0);
  for (int mm = 1; mm <= k; ++mm) {
    for (int nn = mm; nn <= k; ++nn) n[mm - 1] += binomial(nn, mm) * probabilities[nn];
  }
  return n;
}

std::vector<double> invert_to_probabilities(std::span<const double> n_tiples, int cutoff,
                                            std::vector<std::string>* diagnostics) {
  if (cutoff < 1 || static_cast<int>(n_tiples.size()) != cutoff) {
    throw std::invalid_argument("invert_to_probabilities: need exactly `cutoff` m-tiples");
  }
  const int k = cutoff;
  auto moment = [&](int mm) { return mm == 0 ? 1.0 : n_tiples[mm - 1]; };

  // Back-substitution of the upper-triangular binomial system.
  std::vector<double> p(k + 1, 0.0);
  for (int nn = k; nn >= 1; --nn) {
    double v = moment(nn);
    for (int j = nn + 1; j <= k; ++j) v -= binomial(j, nn) * p[j];
    p[nn] = v;
  }
  double rest = 0.0;
  for (int nn = 1; nn <= k; ++nn) rest += p[nn];
  p[0] = 1.0 - rest;

  // Closed-form inverse as a second route.
  double scale = 1.0;
  for (int mm = 1; mm <= k; ++mm) scale = std::max(scale, std::abs(moment(mm)) * binomial(k, mm));
  for (int nn = 0; nn <= k; ++nn) {
    double v = 0.0;
    for (int mm = nn; mm <= k; ++mm) {
      v += ((mm - nn) % 2 == 0 ? 1.0 : -1.0) * binomial(mm, nn) * moment(mm);
    }
    if (std::abs(v - p[nn]) > kRouteAgreement * scale) {
      throw NumericalError(fmt("invert_to_probabilities: inversion routes disagree (%.17g vs %.17g)",
                               v, p[nn]));
    }
  }

  bool clamped = false;
  for (int nn = 0; nn <= k; ++nn) {
    if (p[nn] < -kNegativeSlack || p[nn] > 1.0 + kNegativeSlack) {
      throw NumericalError("invert_to_probabilities: P_" + std::to_string(nn) + " = " +
                           fmt("%.6g", p[nn]) +
                           " is outside [-1e-3, 1 + 1e-3]; quadrature or cutoff failure");
    }
    if (p[nn] < 0.0) {
      if (diagnostics) {
        diagnostics->push_back("clamped P_" + std::to_string(nn) + " = " + fmt("%.3g", p[nn]) +
                               " to 0 (quadrature noise)");
      }
      p[nn] = 0.0;
      clamped = true;
    }
  }
  if (clamped) {
    double sum = 0.0;
    for (double v : p) sum += v;
    for (double& v : p) v /= sum;
  }
  return p;
}

PhotonStatistics photon_statistics(const Evolution& run, const OutputChannel& channel, int cutoff,
                                   double t_r, double t_final, double grid_step) {
  MtipleResult m = photon_mtiples(run, channel, cutoff, t_r, t_final, grid_step);
  PhotonStatistics stats;
  stats.diagnostics = std::move(m.diagnostics);
  stats.probabilities = invert_to_probabilities(m.n_tiples, cutoff, &stats.diagnostics);
  stats.n_tiples = std::move(m.n_tiples);
  stats.cutoff = cutoff;
  stats.window_start = t_r;
  stats.window_end = t_final;
  stats.grid_step = grid_step;
  stats.n1_flux = m.n1_flux;
  return stats;
}

// ---------------------------------------------------------------------------

double cross_kernel(const Evolution& run, Transition a, Transition b, double t1, double t2) {
  if (run.model().dim() != 3) throw std::invalid_argument("cross_kernel: needs a three-level run");
  const auto& model = run.model();
  if (t1 <= t2) {
    const double times[] = {t1, t2};
    // Apply a at t1, then b at t2.
    Matrix x = run.evolve(run.initial_state().matrix(), 0.0, t1);
    const Operator la = model.channel_operator(a, run.controls_at(t1).phi);
    x = la.matrix() * x * la.matrix().adjoint();
    x = run.evolve(x, times[0], times[1]);
    const Operator lb = model.channel_operator(b, run.controls_at(t2).phi);
    return (lb.matrix() * x * lb.matrix().adjoint()).trace().real();
  }
  return cross_kernel(run, b, a, t2, t1);
}

double cross_pair_integral(const Evolution& run, Transition a, Transition b, double t_final,
                           double grid_step) {
  if (run.model().dim() != 3) {
    throw std::invalid_argument("cross_pair_integral: needs a three-level run");
  }
  require_window(0.0, t_final, grid_step, "cross_pair_integral");
  const OutputChannel la = transition_output(run.model(), a);
  const OutputChannel lb = transition_output(run.model(), b);
  // Square = (t1 <= t2 with a first) + (t2 < t1 with b first).
  return ordered_pair_integral(run, la, lb, 0.0, t_final, grid_step) +
         ordered_pair_integral(run, lb, la, 0.0, t_final, grid_step);
}

double csi_metric(double g_ii, double g_ss, double g_is) { return g_is * g_is - g_ii * g_ss; }

CrossPairResult cross_pair_statistics(const Evolution& run, double t_final, double grid_step) {
  CrossPairResult r;
  r.g_ii = cross_pair_integral(run, Transition::k12, Transition::k12, t_final, grid_step);
  r.g_ss = cross_pair_integral(run, Transition::k01, Transition::k01, t_final, grid_step);
  r.g_is = cross_pair_integral(run, Transition::k12, Transition::k01, t_final, grid_step);
  r.v = csi_metric(r.g_ii, r.g_ss, r.g_is);
  return r;
}

}  // namespace photonforge::statistics
