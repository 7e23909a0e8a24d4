#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace photonforge::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Bad config text or values; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
  bool list = false;  // accepts a comma-separated sweep list
};

struct ScenarioInfo {
  std::string name;
  std::string description;
  std::vector<std::string> columns;
  std::vector<ConfigKey> keys;
};

const std::vector<ScenarioInfo>& registry();
const ScenarioInfo& find_scenario(const std::string& name);

/// Resolved configuration: every key of the scenario, in registry order.
struct RunConfig {
  std::string scenario;
  std::filesystem::path output_dir;
  std::vector<std::pair<std::string, std::string>> values;

  const std::string& raw(const std::string& key) const;
  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
};

/// Numbers, optionally as multiples of pi ("0.9pi", "-pi").
double parse_number(const std::string& text);

/// key=value lines, '#' comments. Errors carry the source name and line.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

struct RunOutput {
  std::string csv;
  std::string meta;
  // Extra files (name, contents), e.g. time series.
  std::vector<std::pair<std::string, std::string>> extra;
};

/// Runs the scenario; invariant violations throw NumericalError.
RunOutput execute(const RunConfig& config);

/// Writes result.csv, meta.txt and extras under config.output_dir.
void write_outputs(const RunConfig& config, const RunOutput& output);

std::string list_scenarios(bool json);

/// Full command line; returns the exit status (0 ok, 1 numeric failure, 2 usage).
int run_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace photonforge::cli
