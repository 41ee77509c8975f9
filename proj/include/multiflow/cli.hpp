#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "multiflow/core.hpp"
#include "multiflow/error.hpp"
#include "multiflow/system.hpp"

namespace multiflow::cli {

using Json = nlohmann::ordered_json;

/// Bad configuration or flag value. `line` and `column` are 1-based and zero
/// when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::size_t line = 0,
              std::size_t column = 0);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct SystemConfig {
  LinearSystem system;
  NumericConfig numeric;
  std::optional<MatrixFamily> F;  // n x 1 forcing terms
  std::optional<MatrixFamily> u;  // k x 1 control members
};

SystemConfig parse_config(const std::string& text);
SystemConfig load_config(const std::string& path);

/// Control file: {"u": [...]} with m members of k expression entries, or an
/// exported synthesized control {"kind": "synthesized", "t0": [...], "v": [...]}.
struct ControlSpec {
  ControlFamily family;
  Json description;
};

ControlSpec parse_control(const std::string& text, const SystemConfig& config);
ControlSpec load_control(const std::string& path, const SystemConfig& config);

/// "0.5,1,-2" -> coordinates.
std::vector<double> parse_list(const std::string& text, const char* what);

/// "a,b;c,d" -> waypoints.
std::vector<MultiTime> parse_waypoints(const std::string& text);

struct Options {
  std::optional<std::string> t0;
  std::optional<std::string> t;
  std::optional<std::string> x0;
  std::optional<std::string> y;
  std::optional<std::string> phi0;
  std::string kind = "C";
  std::optional<std::string> force_path;  // interior waypoints
  std::optional<std::string> control;     // control file for simulate
  std::optional<std::string> export_path; // synthesized control output
};

struct Outcome {
  Json report;
  int exit_code = 0;  // 0 ok, 1 bad input, 2 refused by a gate
};

Outcome run(const std::string& command, const SystemConfig& config,
            const Options& options);

/// Loads the config, then runs; input errors become an error report.
Outcome run_file(const std::string& command, const std::string& config_path,
                 const Options& options);

/// Number rounded to 12 significant digits, so JSON output is stable.
double rounded(double x);

Json matrix_json(const Matrix& a);
Json vector_json(const Vector& v);
Json condition_json(const ConditionReport& r);

std::string render_json(const Json& report);
std::string render_text(const Json& report);

}  // namespace multiflow::cli
