#include "photonforge/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "photonforge/dynamics.hpp"
#include "photonforge/quantum_core.hpp"
#include "photonforge/scenarios.hpp"

namespace photonforge::cli {

namespace {

namespace sc = photonforge::scenarios;
using dynamics::MirrorQubitParams;

constexpr double kSumTolerance = 1e-6;
constexpr const char* kOutputDirDefault = "photonforge_out";

std::string fmt12(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

const char* kCutoffHelp = "photon-number cutoff k";
const char* kDtHelp = "grid step (refined to t_w/50 inside pulses)";

std::vector<ScenarioInfo> build_registry() {
  return {
      {"beam_splitter",
       "pi-pulse source with coherent cancellation on a beam splitter (P_n vs alpha0)",
       {"alpha0", "P0", "P1", "P2", "P3"},
       {{"gamma", "0.5", "line decay rate (gamma_eff = gamma (1 + cos phi) = 1)"},
        {"gamma_nr", "0", "non-radiative decay rate"},
        {"alpha0", "5", "drive amplitude", true},
        {"alpha0_phase", "0", "drive phase arg(alpha0)"},
        {"r", "0.995", "beam-splitter reflection coefficient"},
        {"t0", "1", "pulse start (window starts here)"},
        {"delta", "0", "detuning"},
        {"phi", "0", "mirror round-trip phase"},
        {"beta_amplitude_error", "0", "relative amplitude error of beta"},
        {"beta_phase_error", "0", "phase error of beta"},
        {"T", "20", "final time"},
        {"dt", "0.01", kDtHelp},
        {"cutoff", "3", kCutoffHelp}}},
      {"shaped_release",
       "excite at phi_i, store at pi, release at t_r (constant phi_r or a wave packet)",
       {"alpha0", "P0", "P1", "P2", "P3"},
       {{"gamma", "1", "line decay rate"},
        {"gamma_nr", "0", "non-radiative decay rate"},
        {"delta", "0", "detuning"},
        {"alpha0", "5", "drive amplitude", true},
        {"phi_i", "0.9pi", "phase during the pi pulse"},
        {"t0", "1", "pulse start"},
        {"t_r", "8", "release time (window start)"},
        {"T", "20", "final time"},
        {"phi_r", "0", "constant release phase (packet=none)"},
        {"packet", "none", "none | exponential | gaussian"},
        {"kappa", "1", "exponential packet rate"},
        {"packet_center", "auto", "gaussian center (auto = t_r + 4 sigma)"},
        {"packet_sigma", "1", "gaussian standard deviation"},
        {"clip_budget", "0.01", "allowed misplaced emission mass"},
        {"dt", "0.01", kDtHelp},
        {"cutoff", "3", kCutoffHelp}}},
      {"cascade_sweep",
       "three-level cascade pair source, V = G_is^2 - G_ii G_ss over (alpha_d, gamma02)",
       {"alpha_d", "gamma02", "V"},
       {{"gamma01", "1", "0-1 decay rate"},
        {"gamma12", "2", "1-2 decay rate"},
        {"alpha_d", "5,6,7,8,10", "0-2 drive amplitudes", true},
        {"gamma02", "0.05,0.1,0.2,0.3,0.5", "0-2 decay rates", true},
        {"t0", "0", "pulse start"},
        {"T", "20", "final time"},
        {"dt", "0.01", kDtHelp}}},
      {"nr_sweep",
       "beam-splitter source with extra decay channels (P0, P1 vs gamma_nr)",
       {"gamma_nr", "P0", "P1"},
       {{"gamma", "0.5", "line decay rate (gamma_eff = 1)"},
        {"gamma_nr", "0,0.05,0.1,0.2,0.5,1,2", "non-radiative decay rates", true},
        {"alpha0", "10", "drive amplitude"},
        {"r", "0.995", "beam-splitter reflection coefficient"},
        {"t0", "1", "pulse start"},
        {"T", "20", "final time"},
        {"dt", "0.01", kDtHelp},
        {"cutoff", "3", kCutoffHelp}}},
      {"wait_sweep",
       "shaped-release source with a delay before release (P0, P1 vs t_wait)",
       {"t_wait", "P0", "P1"},
       {{"gamma", "1", "line decay rate"},
        {"gamma_nr", "0.1", "non-radiative decay rate"},
        {"alpha0", "10", "drive amplitude"},
        {"phi_i", "0.9pi", "phase during the pi pulse"},
        {"t0", "1", "pulse start"},
        {"phi_r", "0.5pi", "release phase"},
        {"t_wait", "0,0.5,1,2,4,8", "delay between pulse end and release", true},
        {"window", "12", "release window length (T = t_r + window)"},
        {"dt", "0.01", kDtHelp},
        {"cutoff", "3", kCutoffHelp}}},
      {"encode",
       "optimize a square pulse writing mu|0> + nu|1> onto the qubit",
       {"delta", "alpha_re", "alpha_im", "t_w", "fidelity"},
       {{"gamma", "1", "line decay rate"},
        {"gamma_nr", "0", "non-radiative decay rate"},
        {"mu_re", "0.70710678118654752", "Re mu"},
        {"mu_im", "0", "Im mu"},
        {"nu_re", "0", "Re nu"},
        {"nu_im", "0.70710678118654752", "Im nu"},
        {"phi", "0.995pi", "mirror phase while writing"},
        {"rabi", "10", "Rabi frequency of the first guess"},
        {"anharmonicity", "50", "anharmonicity bound for the drive"}}},
      {"cancel_budget",
       "two-path cancellation residual and the errors it implies",
       {"residual", "residual_db", "implied_phase_error", "implied_amplitude_error"},
       {{"a1", "1", "amplitude of path 1"},
        {"a2", "1", "amplitude of path 2"},
        {"phi1", "0", "phase of path 1"},
        {"phi2", "-3.10159265358979", "phase of path 2"},
        {"omega1", "1", "frequency of path 1"},
        {"omega2", "1", "frequency of path 2"},
        {"phi", "0", "mirror round-trip phase"},
        {"tau1", "1", "transmission of arm 1"},
        {"tau2", "1", "transmission of arm 2"},
        {"n", "0", "integer in the cancelling phase condition"}}},
  };
}

std::string csv_header(const std::vector<std::string>& columns) {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  return out + "\n";
}

std::string csv_row(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + fmt12(values[i]);
  return out + "\n";
}

std::vector<std::string> p_columns(const std::string& first, int cutoff) {
  std::vector<std::string> cols{first};
  for (int n = 0; n <= cutoff; ++n) cols.push_back("P" + std::to_string(n));
  return cols;
}

void check_sum(const std::vector<double>& p, const std::string& label) {
  double sum = 0.0;
  for (double v : p) sum += v;
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw NumericalError("sum of P_n = " + fmt12(sum) + " deviates from 1 at " + label);
  }
}

std::vector<double> prepend(double x, const std::vector<double>& rest) {
  std::vector<double> row{x};
  row.insert(row.end(), rest.begin(), rest.end());
  return row;
}

std::vector<double> first_two(const std::vector<double>& p) { return {p.at(0), p.at(1)}; }

int positive_cutoff(const RunConfig& c) {
  const int k = c.integer("cutoff");
  if (k < 1) throw ConfigError("cutoff must be >= 1");
  return k;
}

void add_notes(std::vector<std::string>* notes, const std::vector<std::string>& diagnostics,
               const std::string& label) {
  for (const auto& d : diagnostics) notes->push_back(label + ": " + d);
}

}  // namespace

const std::vector<ScenarioInfo>& registry() {
  static const std::vector<ScenarioInfo> r = build_registry();
  return r;
}

const ScenarioInfo& find_scenario(const std::string& name) {
  for (const auto& s : registry()) {
    if (s.name == name) return s;
  }
  throw ConfigError("unknown scenario '" + name + "' (see `photonforge list`)");
}

double parse_number(const std::string& text) {
  std::string s = trim(text);
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = sc::kPi;
    s = trim(s.substr(0, s.size() - 2));
    if (s.empty() || s == "+") return factor;
    if (s == "-") return -factor;
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + text + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw ConfigError("not a number: '" + text + "'");
  return v * factor;
}

const std::string& RunConfig::raw(const std::string& key) const {
  for (const auto& [k, v] : values) {
    if (k == key) return v;
  }
  throw ConfigError("missing key '" + key + "'");
}

double RunConfig::number(const std::string& key) const {
  try {
    return parse_number(raw(key));
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

int RunConfig::integer(const std::string& key) const {
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + ": expected an integer");
  return static_cast<int>(v);
}

std::vector<double> RunConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(raw(key))) {
    try {
      out.push_back(parse_number(item));
    } catch (const ConfigError& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  std::vector<std::pair<int, std::pair<std::string, std::string>>> entries;
  std::string line;
  int lineno = 0;
  auto fail = [&](int n, const std::string& msg) {
    return ConfigError(source + ":" + std::to_string(n) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw fail(lineno, "expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw fail(lineno, "empty key");
    if (value.empty()) throw fail(lineno, "empty value for '" + key + "'");
    for (const auto& e : entries) {
      if (e.second.first == key) {
        throw fail(lineno, "duplicate key '" + key + "' (first set on line " +
                               std::to_string(e.first) + ")");
      }
    }
    entries.push_back({lineno, {key, value}});
  }

  RunConfig config;
  int scenario_line = 0;
  for (const auto& e : entries) {
    if (e.second.first == "scenario") {
      config.scenario = e.second.second;
      scenario_line = e.first;
    }
  }
  if (config.scenario.empty()) throw ConfigError(source + ": missing 'scenario=' line");
  const ScenarioInfo* info = nullptr;
  try {
    info = &find_scenario(config.scenario);
  } catch (const ConfigError& err) {
    throw fail(scenario_line, err.what());
  }

  config.output_dir = kOutputDirDefault;
  for (const auto& key : info->keys) config.values.emplace_back(key.name, key.default_value);

  for (const auto& [n, kv] : entries) {
    const auto& [key, value] = kv;
    if (key == "scenario") continue;
    if (key == "output_dir") {
      config.output_dir = value;
      continue;
    }
    auto it = std::find_if(config.values.begin(), config.values.end(),
                           [&](const auto& p) { return p.first == key; });
    if (it == config.values.end()) {
      throw fail(n, "unknown key '" + key + "' for scenario " + config.scenario);
    }
    const auto key_info = std::find_if(info->keys.begin(), info->keys.end(),
                                       [&](const ConfigKey& k) { return k.name == key; });
    if (!key_info->list && value.find(',') != std::string::npos) {
      throw fail(n, "'" + key + "' takes a single value");
    }
    if (key != "packet" && !(key == "packet_center" && value == "auto")) {
      try {
        for (const auto& item : split_list(value)) parse_number(item);
      } catch (const ConfigError& err) {
        throw fail(n, key + ": " + err.what());
      }
    }
    it->second = value;
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_config(in, path.string());
}

// ---------------------------------------------------------------------------

namespace {

void run_beam_splitter(const RunConfig& c, RunOutput* out, std::vector<std::string>* notes) {
  const int k = positive_cutoff(c);
  MirrorQubitParams p;
  p.gamma = c.number("gamma");
  p.gamma_nr = c.number("gamma_nr");
  sc::BeamSplitterConfig bs;
  bs.r = c.number("r");
  bs.t0 = c.number("t0");
  bs.delta = c.number("delta");
  bs.phi = c.number("phi");
  bs.beta_amplitude_error = c.number("beta_amplitude_error");
  bs.beta_phase_error = c.number("beta_phase_error");
  bs.t_final = c.number("T");
  bs.dt = c.number("dt");
  const double phase = c.number("alpha0_phase");
  const std::vector<double> amps = c.numbers("alpha0");

  const auto rows = sc::parallel_map<statistics::PhotonStatistics>(amps.size(), [&](std::size_t i) {
    sc::BeamSplitterConfig b = bs;
    b.alpha0 = std::polar(amps[i], phase);
    return sc::run_beam_splitter(p, b, k);
  });
  out->csv = csv_header(p_columns("alpha0", k));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    check_sum(rows[i].probabilities, "alpha0 = " + fmt12(amps[i]));
    out->csv += csv_row(prepend(amps[i], rows[i].probabilities));
    add_notes(notes, rows[i].diagnostics, "alpha0 = " + fmt12(amps[i]));
  }
}

void run_shaped_release(const RunConfig& c, RunOutput* out, std::vector<std::string>* notes) {
  const int k = positive_cutoff(c);
  MirrorQubitParams p;
  p.gamma = c.number("gamma");
  p.gamma_nr = c.number("gamma_nr");
  p.delta = c.number("delta");
  sc::ShapedReleaseConfig sr;
  sr.phi_i = c.number("phi_i");
  sr.t0 = c.number("t0");
  sr.t_r = c.number("t_r");
  sr.t_final = c.number("T");
  sr.phi_r = c.number("phi_r");
  sr.clip_budget = c.number("clip_budget");
  sr.dt = c.number("dt");
  const std::string packet = c.raw("packet");
  if (packet == "exponential") {
    sr.packet = sc::WavePacket::exponential(c.number("kappa"), sr.t_r, sr.t_final, sr.dt);
  } else if (packet == "gaussian") {
    const double sigma = c.number("packet_sigma");
    const double center =
        c.raw("packet_center") == "auto" ? sr.t_r + 4.0 * sigma : c.number("packet_center");
    sr.packet = sc::WavePacket::gaussian(center, sigma, 4.0, sr.dt);
  } else if (packet != "none") {
    throw ConfigError("packet: expected none, exponential or gaussian, got '" + packet + "'");
  }
  const std::vector<double> amps = c.numbers("alpha0");

  const auto rows = sc::parallel_map<sc::ShapedReleaseResult>(amps.size(), [&](std::size_t i) {
    sc::ShapedReleaseConfig s = sr;
    s.alpha0 = Complex{amps[i], 0.0};
    return sc::run_shaped_release(p, s, k);
  });
  out->csv = csv_header(p_columns("alpha0", k));
  std::string series = csv_header({"alpha0", "t", "flux", "phi", "p_exc"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string label = "alpha0 = " + fmt12(amps[i]);
    check_sum(r.stats.probabilities, label);
    out->csv += csv_row(prepend(amps[i], r.stats.probabilities));
    for (std::size_t j = 0; j < r.times.size(); ++j) {
      series += csv_row({amps[i], r.times[j], r.flux[j], r.phase[j], r.p_exc[j]});
    }
    add_notes(notes, r.stats.diagnostics, label);
    if (r.flux_l2_error) notes->push_back(label + ": flux L2 error vs |xi|^2 = " + fmt12(*r.flux_l2_error));
  }
  out->extra.emplace_back("series.csv", std::move(series));
}

void run_cascade_sweep(const RunConfig& c, RunOutput* out, std::vector<std::string>*) {
  MirrorQubitParams p;
  p.levels = 3;
  p.gamma01 = c.number("gamma01");
  p.gamma12 = c.number("gamma12");
  sc::CascadeConfig cc;
  cc.t0 = c.number("t0");
  cc.t_final = c.number("T");
  cc.dt = c.number("dt");
  const auto points = sc::sweep_cascade(p, c.numbers("alpha_d"), c.numbers("gamma02"), cc);
  out->csv = csv_header({"alpha_d", "gamma02", "V"});
  for (const auto& pt : points) out->csv += csv_row({pt.alpha_d, pt.gamma02, pt.result.v});
}

void run_nr_sweep(const RunConfig& c, RunOutput* out, std::vector<std::string>*) {
  const int k = positive_cutoff(c);
  MirrorQubitParams p;
  p.gamma = c.number("gamma");
  sc::BeamSplitterConfig bs;
  bs.alpha0 = Complex{c.number("alpha0"), 0.0};
  bs.r = c.number("r");
  bs.t0 = c.number("t0");
  bs.t_final = c.number("T");
  bs.dt = c.number("dt");
  const auto rows = sc::sweep_nonradiative(p, bs, c.numbers("gamma_nr"), k);
  out->csv = csv_header({"gamma_nr", "P0", "P1"});
  for (const auto& r : rows) {
    check_sum(r.probabilities, "gamma_nr = " + fmt12(r.x));
    out->csv += csv_row(prepend(r.x, first_two(r.probabilities)));
  }
}

void run_wait_sweep(const RunConfig& c, RunOutput* out, std::vector<std::string>*) {
  const int k = positive_cutoff(c);
  MirrorQubitParams p;
  p.gamma = c.number("gamma");
  p.gamma_nr = c.number("gamma_nr");
  sc::WaitSweepConfig w;
  w.alpha0 = Complex{c.number("alpha0"), 0.0};
  w.phi_i = c.number("phi_i");
  w.t0 = c.number("t0");
  w.phi_r = c.number("phi_r");
  w.window = c.number("window");
  w.dt = c.number("dt");
  const auto rows = sc::sweep_wait_time(p, w, c.numbers("t_wait"), k);
  out->csv = csv_header({"t_wait", "P0", "P1"});
  for (const auto& r : rows) {
    check_sum(r.probabilities, "t_wait = " + fmt12(r.x));
    out->csv += csv_row(prepend(r.x, first_two(r.probabilities)));
  }
}

void run_encode(const RunConfig& c, RunOutput* out, std::vector<std::string>* notes) {
  MirrorQubitParams p;
  p.gamma = c.number("gamma");
  p.gamma_nr = c.number("gamma_nr");
  sc::FlyingQubitTarget target{{c.number("mu_re"), c.number("mu_im")},
                               {c.number("nu_re"), c.number("nu_im")}};
  sc::EncodeOptions opt;
  opt.phi = c.number("phi");
  opt.rabi = c.number("rabi");
  opt.anharmonicity = c.number("anharmonicity");
  const sc::EncodeResult r = sc::encode_flying_qubit(target, p, opt);
  out->csv = csv_header({"delta", "alpha_re", "alpha_im", "t_w", "fidelity"});
  out->csv += csv_row({r.delta, r.alpha0.real(), r.alpha0.imag(), r.pulse_width, r.fidelity});
  add_notes(notes, r.warnings, "encode");
}

void run_cancel_budget(const RunConfig& c, RunOutput* out, std::vector<std::string>*) {
  sc::CancellationInputs in;
  in.a1 = c.number("a1");
  in.a2 = c.number("a2");
  in.phi1 = c.number("phi1");
  in.phi2 = c.number("phi2");
  in.omega1 = c.number("omega1");
  in.omega2 = c.number("omega2");
  in.phi = c.number("phi");
  in.tau1 = c.number("tau1");
  in.tau2 = c.number("tau2");
  in.n = c.integer("n");
  const sc::CancellationResult r = sc::cancellation_budget(in);
  out->csv = csv_header({"residual", "residual_db", "implied_phase_error", "implied_amplitude_error"});
  out->csv += csv_row({r.residual, r.residual_db, sc::implied_phase_error(r.residual_db),
                       sc::implied_amplitude_error(r.residual_db)});
}

std::string gnuplot_hint(const ScenarioInfo& info) {
  if (info.name == "cascade_sweep") return "splot 'result.csv' using 1:2:3 with points";
  std::string hint = "plot";
  for (std::size_t i = 1; i < info.columns.size(); ++i) {
    hint += (i > 1 ? "," : "") + std::string(" 'result.csv' using 1:") + std::to_string(i + 1) +
            " with linespoints title '" + info.columns[i] + "'";
  }
  return hint;
}

}  // namespace

RunOutput execute(const RunConfig& config) {
  const ScenarioInfo& info = find_scenario(config.scenario);
  RunOutput out;
  std::vector<std::string> notes;
  if (info.name == "beam_splitter") {
    run_beam_splitter(config, &out, &notes);
  } else if (info.name == "shaped_release") {
    run_shaped_release(config, &out, &notes);
  } else if (info.name == "cascade_sweep") {
    run_cascade_sweep(config, &out, &notes);
  } else if (info.name == "nr_sweep") {
    run_nr_sweep(config, &out, &notes);
  } else if (info.name == "wait_sweep") {
    run_wait_sweep(config, &out, &notes);
  } else if (info.name == "encode") {
    run_encode(config, &out, &notes);
  } else {
    run_cancel_budget(config, &out, &notes);
  }

  std::ostringstream meta;
  meta << "# photonforge " << kVersion << "\n";
  meta << "scenario=" << config.scenario << "\n";
  meta << "output_dir=" << config.output_dir.string() << "\n";
  for (const auto& [k, v] : config.values) meta << k << "=" << v << "\n";
  meta << "# columns: " << out.csv.substr(0, out.csv.find('\n') + 1);
  meta << "# gnuplot: set datafile separator ','; set key autotitle columnhead; "
       << gnuplot_hint(info) << "\n";
  for (const auto& n : notes) meta << "# note: " << n << "\n";
  out.meta = meta.str();
  return out;
}

void write_outputs(const RunConfig& config, const RunOutput& output) {
  std::filesystem::create_directories(config.output_dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(config.output_dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (config.output_dir / name).string());
    f << text;
  };
  write("result.csv", output.csv);
  write("meta.txt", output.meta);
  for (const auto& [name, text] : output.extra) write(name, text);
}

std::string list_scenarios(bool json) {
  if (json) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& s : registry()) {
      nlohmann::ordered_json defaults = nlohmann::ordered_json::object();
      for (const auto& k : s.keys) defaults[k.name] = k.default_value;
      doc.push_back({{"name", s.name},
                     {"description", s.description},
                     {"columns", s.columns},
                     {"defaults", defaults}});
    }
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  for (const auto& s : registry()) {
    out << s.name << "  " << s.description << "\n";
    for (const auto& k : s.keys) {
      out << "    " << k.name << "=" << k.default_value << "    # " << k.help << "\n";
    }
  }
  return out.str();
}

int run_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"photonforge: photon statistics of an atom in front of a mirror"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run the scenario described by a key=value config");
  run_cmd->add_option("config", config_path, "config file")->required();

  bool as_json = false;
  auto* list_cmd = app.add_subcommand("list", "list scenarios and their defaults");
  list_cmd->add_flag("--json", as_json, "machine-readable registry dump");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  if (list_cmd->parsed()) {
    out << list_scenarios(as_json);
    return 0;
  }

  try {
    const RunConfig config = load_config(config_path);
    const RunOutput output = execute(config);
    write_outputs(config, output);
    out << "wrote " << (config.output_dir / "result.csv").string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "invalid parameter: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace photonforge::cli
