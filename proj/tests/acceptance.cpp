// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "photonforge/dynamics.hpp"
#include "photonforge/photon_statistics.hpp"
#include "photonforge/scenarios.hpp"
#include "photonforge/slh.hpp"

using namespace photonforge;
using namespace photonforge::dynamics;
using namespace photonforge::scenarios;
namespace st = photonforge::statistics;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) ok = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (cond ? "" : " [x]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

MirrorQubitParams line(double gamma, double gamma_nr = 0.0) {
  MirrorQubitParams p;
  p.gamma = gamma;
  p.gamma_nr = gamma_nr;
  return p;
}

MirrorQubitParams cascade_params(double gamma02) {
  MirrorQubitParams p;
  p.levels = 3;
  p.gamma01 = 1.0;
  p.gamma12 = 2.0;
  p.gamma02 = gamma02;
  return p;
}

BeamSplitterConfig bs(double alpha0) {
  BeamSplitterConfig c;
  c.alpha0 = alpha0;
  return c;
}

ShapedReleaseConfig release(double alpha0, std::optional<WavePacket> packet = std::nullopt) {
  ShapedReleaseConfig c;
  c.alpha0 = alpha0;
  c.packet = std::move(packet);
  return c;
}

// criterion 1
Outcome slh_mirror() {
  Outcome o;
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> g(0.05, 5.0);
  std::uniform_real_distribution<double> ph(-std::numbers::pi + 1e-3, std::numbers::pi - 1e-3);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  const Operator sm = lowering_op(2, 0, 1);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double gamma = g(rng);
    const double phi = ph(rng);
    const Operator h_tls = (0.5 * d(rng)) * sigma_z();
    const slh::SlhTriplet t = slh::atom_in_front_of_mirror(gamma, phi, h_tls);
    const Operator l = std::polar(std::sqrt(effective_coupling(gamma, phi)), phi / 2.0) * sm;
    const Operator h = h_tls + (0.5 * gamma * std::sin(phi)) * (sm.adjoint() * sm);
    worst = std::max({worst, max_abs(t.coupling()[0].full().matrix() - l.matrix()),
                      max_abs(t.hamiltonian().matrix() - h.matrix())});
  }
  o.require(worst <= 1e-12, "max deviation " + fmt("%.2e", worst) + " over 100 samples");
  return o;
}

// criterion 2
Outcome master_equation() {
  Outcome o;
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_direct = 0.0;
  double worst_elementwise = 0.0;
  for (int i = 0; i < 50; ++i) {
    MirrorQubitParams p;
    p.gamma = 0.1 + 3.0 * u(rng);
    p.delta = 4.0 * u(rng) - 2.0;
    const double phi = 2.0 * std::numbers::pi * u(rng);
    const Complex alpha{10.0 * u(rng) - 5.0, 10.0 * u(rng) - 5.0};
    const slh::MasterEquation me = slh::to_master_equation(slh::driven_mirror(p.gamma, phi, p.delta, alpha));
    const Matrix from_slh = liouvillian(me.hamiltonian, me.collapse_ops).matrix();
    worst_direct = std::max(worst_direct, max_abs(from_slh - build_liouvillian(p, phi, alpha).matrix()));
    const Evolution run(p, DriveSchedule::square_pulse(alpha, 0.0, 1.0), PhaseSchedule(phi));
    worst_elementwise =
        std::max(worst_elementwise, max_abs(from_slh - oracle::liouvillian_matrix(run, run.controls_at(0.5))));
  }
  o.require(worst_direct <= 1e-12, "vs direct " + fmt("%.2e", worst_direct));
  o.require(worst_elementwise <= 1e-12, "vs elementwise " + fmt("%.2e", worst_elementwise));
  return o;
}

// criterion 3
Outcome beam_splitter() {
  Outcome o;
  const double p5 = run_beam_splitter(line(0.5), bs(5.0)).probabilities[1];
  const double p10 = run_beam_splitter(line(0.5), bs(10.0)).probabilities[1];
  o.require(std::abs(p5 - 0.95) <= 0.015, "P1(5) = " + fmt("%.5f", p5));
  o.require(std::abs(p10 - 0.97) <= 0.015, "P1(10) = " + fmt("%.5f", p10));
  return o;
}

// criterion 4
Outcome shaped_release() {
  Outcome o;
  const double p5 = run_shaped_release(line(1.0), release(5.0)).stats.probabilities[1];
  const double p10 = run_shaped_release(line(1.0), release(10.0)).stats.probabilities[1];
  o.require(std::abs(p5 - 0.97) <= 0.015, "P1(5) = " + fmt("%.5f", p5));
  o.require(std::abs(p10 - 0.99) <= 0.01, "P1(10) = " + fmt("%.5f", p10));
  return o;
}

// criterion 5
Outcome cascade() {
  Outcome o;
  const double v = run_cascade(cascade_params(0.05), CascadeConfig{}).v;
  o.require(std::abs(v - 0.92) <= 0.02, "V(5, 0.05) = " + fmt("%.5f", v));
  const std::vector<double> alphas{5.0, 6.0, 7.0, 8.0, 10.0};
  const std::vector<double> rates{0.05, 0.1, 0.2, 0.3, 0.5};
  const auto pts = sweep_cascade(cascade_params(0.05), alphas, rates, CascadeConfig{});
  bool positive = true;
  bool monotone = true;
  double v_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    positive &= pts[i].result.v > 0.0;
    v_min = std::min(v_min, pts[i].result.v);
    if (i % rates.size() != 0) monotone &= pts[i].result.v < pts[i - 1].result.v;
  }
  o.require(positive, "5x5 V > 0 (min " + fmt("%.4f", v_min) + ")");
  o.require(monotone, "decreasing in gamma02 per alpha_d");
  return o;
}

// criterion 6
Outcome nonradiative() {
  Outcome o;
  const auto rows = sweep_nonradiative(line(0.5), bs(10.0), {1.0});
  const double p1 = rows[0].probabilities[1];
  o.require(std::abs(p1 - 0.50) <= 0.03, "P1(gamma_nr = 1) = " + fmt("%.5f", p1));
  const auto waits = sweep_wait_time(line(1.0, 0.1), WaitSweepConfig{}, {0.0, 0.5, 1.0, 2.0, 4.0, 8.0});
  bool decreasing = true;
  for (std::size_t i = 1; i < waits.size(); ++i) {
    decreasing &= waits[i].probabilities[1] < waits[i - 1].probabilities[1];
  }
  o.require(decreasing, "wait sweep decreasing (" + fmt("%.4f", waits.front().probabilities[1]) +
                            " -> " + fmt("%.4f", waits.back().probabilities[1]) + ")");
  return o;
}

// criterion 7
Outcome ode_oracle() {
  Outcome o;
  std::vector<std::pair<std::string, Evolution>> runs;
  for (double a : {5.0, 10.0}) {
    runs.emplace_back("beam splitter " + fmt("%g", a), beam_splitter_evolution(line(0.5), bs(a)));
    runs.emplace_back("release " + fmt("%g", a), shaped_release_evolution(line(1.0), release(a)));
  }
  runs.emplace_back("exponential release",
                    shaped_release_evolution(line(1.0), release(5.0, WavePacket::exponential(1.0, 8.0, 20.0))));
  for (const auto& [name, run] : runs) {
    double worst = 0.0;
    Matrix rho = run.initial_state().matrix();
    double t_prev = 0.0;
    for (double t : uniform_grid(0.0, 20.0, 0.25)) {
      rho = oracle::ode_evolve(run, rho, t_prev, t);
      t_prev = t;
      worst = std::max(worst, max_abs(run.state_at(t).matrix() - rho));
    }
    o.require(worst <= 1e-8, name + " " + fmt("%.1e", worst));
  }
  return o;
}

// criterion 8
Outcome properties() {
  Outcome o;

  {
    const Evolution run = shaped_release_evolution(line(1.0, 0.3), release(10.0));
    Matrix rho = run.initial_state().matrix();
    double worst = 0.0;
    for (const auto& s : run.steps(0.0, 20.0, 0.01)) {
      rho = run.step_propagator(s.controls, s.duration()).apply(rho);
      worst = std::max(worst, std::abs(rho.trace() - 1.0));
    }
    o.require(worst <= 1e-8, "trace " + fmt("%.1e", worst));
  }

  {
    double worst = 0.0;
    for (double a : {5.0, 10.0}) {
      worst = std::max(worst, std::abs(run_beam_splitter(line(0.5), bs(a)).n1_flux -
                                       run_beam_splitter(line(0.5), bs(a)).n_tiples[0]));
      const auto r = run_shaped_release(line(1.0), release(a)).stats;
      worst = std::max(worst, std::abs(r.n1_flux - r.n_tiples[0]));
    }
    o.require(worst <= 1e-6, "N1 dual route " + fmt("%.1e", worst));
  }

  {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
      const int k = 1 + trial % 8;
      std::vector<double> p(k + 1);
      double sum = 0.0;
      for (double& v : p) sum += (v = u(rng));
      for (double& v : p) v /= sum;
      const auto back = st::invert_to_probabilities(st::binomial_moments(p), k);
      for (int i = 0; i <= k; ++i) worst = std::max(worst, std::abs(back[i] - p[i]));
    }
    o.require(worst <= 1e-12, "round trip " + fmt("%.1e", worst));
  }

  {
    const double mu = 0.2;
    std::vector<double> n;
    double term = 1.0;
    for (int m = 1; m <= 8; ++m) n.push_back(term *= mu / m);
    const double p0 = st::invert_to_probabilities(n, 8)[0];
    o.require(std::abs(p0 - std::exp(-mu)) <= 1e-9, "Poisson P0 err " + fmt("%.1e", std::abs(p0 - std::exp(-mu))));
  }

  {
    // excitation stored at phi = pi, released at t = 3
    const Evolution run(line(1.0), DriveSchedule{}, PhaseSchedule(kPi).hold(3.0, 20.0, 0.0),
                        DensityMatrix::basis(2, 1));
    const auto out = st::mirror_output(run.model());
    double worst = 0.0;
    for (double t1 : {0.0, 1.0, 3.0, 3.5, 5.0})
      for (double t2 : {3.0, 3.2, 4.0, 7.0, 15.0}) {
        if (t2 < t1) continue;
        const double times[] = {t1, t2};
        worst = std::max(worst, std::abs(st::correlator_gm(run, out, times)));
      }
    const auto m = st::photon_mtiples(run, out, 2, 0.0, 20.0, 0.01);
    worst = std::max(worst, std::abs(m.n_tiples[1]));
    o.require(worst == 0.0, "G2 of one excitation " + fmt("%.1e", worst));
  }

  {
    const auto r = run_shaped_release(line(1.0), release(5.0, WavePacket::exponential(1.0, 8.0, 20.0)));
    o.require(r.flux_l2_error && *r.flux_l2_error < 0.01, "flux L2 " + fmt("%.2e", r.flux_l2_error.value_or(1.0)));
  }
  return o;
}

// criterion 9
Outcome cancellation() {
  Outcome o;
  CancellationInputs off;
  off.phi2 = -kPi + 0.04;
  const double db = cancellation_budget(off).residual_db;
  o.require(std::abs(db - (-28.0)) <= 0.1, "0.04 rad -> " + fmt("%.3f", db) + " dB");
  const double exact = cancellation_budget(CancellationInputs{}).residual_db;
  o.require(exact < -300.0, "exact -> " + fmt("%g", exact) + " dB");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "SLH mirror derivation", 1.0, slh_mirror},
      {2, "master-equation equivalence", 1.0, master_equation},
      {3, "beam-splitter source", 60.0, beam_splitter},
      {4, "shaped release", 120.0, shaped_release},
      {5, "cascade pair source", 600.0, cascade},
      {6, "non-radiative decay", 120.0, nonradiative},
      {7, "ODE oracle equivalence", 30.0, ode_oracle},
      {8, "property suite", 60.0, properties},
      {9, "cancellation algebra", 1.0, cancellation},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.ok && in_time;
    failures += pass ? 0 : 1;
    std::printf("criterion %d %-30s %s  %.2fs/%.0fs%s  %s\n", c.id, c.name, pass ? "PASS" : "FAIL", secs,
                c.budget_s, in_time ? "" : " (over budget)", o.detail.c_str());
  }
  std::printf("%s: %d of %zu criteria passed\n", failures ? "FAIL" : "PASS",
              static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures ? 1 : 0;
}
