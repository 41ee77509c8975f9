#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "multiflow/cli.hpp"
#include "multiflow/synth.hpp"

namespace multiflow::cli {

namespace {

using InJson = nlohmann::json;

std::string with_position(const std::string& message, std::size_t line,
                          std::size_t column) {
  if (line == 0) return message;
  return "line " + std::to_string(line) + ", column " + std::to_string(column) +
         ": " + message;
}

// The reason part of a JSON parser message, without its own position prefix.
std::string json_reason(const char* what) {
  const std::string s = what;
  const std::size_t col = s.find("column ");
  const std::size_t colon = s.find(": ", col == std::string::npos ? 0 : col);
  return colon == std::string::npos ? s : s.substr(colon + 2);
}

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> locate(const std::string& text,
                                           std::size_t offset) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  std::size_t positive(const InJson& doc, const char* key) const {
    if (!doc.contains(key)) throw ConfigError(std::string("missing key \"") + key + "\"");
    const InJson& v = doc.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
      throw ConfigError(std::string("\"") + key + "\" must be a positive integer");
    }
    return static_cast<std::size_t>(v.get<long long>());
  }

  Expr entry(const InJson& v, std::size_t m, const std::string& where) const {
    if (v.is_number()) return Expr::constant(v.get<double>());
    if (!v.is_string()) {
      throw ConfigError(where + ": expected a number or an expression string");
    }
    const std::string s = v.get<std::string>();
    try {
      return Expr::parse(s, m);
    } catch (const ParseError& e) {
      // Values carry no source positions; find the literal in the text.
      const std::size_t at = text_.find(InJson(s).dump());
      if (at == std::string::npos) throw ConfigError(where + ": " + e.what());
      auto [line, column] = locate(text_, at + 1 + e.position());
      throw ConfigError(where + ": " + e.what(), line, column);
    }
  }

  // Row-major entries of one rows x cols member. A column may be written as
  // a flat list.
  std::vector<Expr> member(const InJson& v, std::size_t rows, std::size_t cols,
                           std::size_t m, const std::string& where) const {
    if (!v.is_array() || v.size() != rows) {
      throw ConfigError(where + ": expected " + std::to_string(rows) + " rows");
    }
    std::vector<Expr> out;
    for (std::size_t i = 0; i < rows; ++i) {
      const std::string row_where = where + " row " + std::to_string(i + 1);
      const InJson& row = v[i];
      if (cols == 1 && !row.is_array()) {
        out.push_back(entry(row, m, row_where));
        continue;
      }
      if (!row.is_array() || row.size() != cols) {
        throw ConfigError(row_where + ": expected " + std::to_string(cols) +
                          " entries");
      }
      for (std::size_t j = 0; j < cols; ++j) {
        out.push_back(entry(row[j], m, row_where + " entry " + std::to_string(j + 1)));
      }
    }
    return out;
  }

  MatrixFamily family(const InJson& v, const char* name, std::size_t m,
                      std::size_t rows, std::size_t cols) const {
    if (!v.is_array() || v.size() != m) {
      throw ConfigError(std::string("\"") + name + "\" must hold m = " +
                        std::to_string(m) + " matrices");
    }
    std::vector<std::vector<Expr>> members;
    for (std::size_t a = 0; a < m; ++a) {
      members.push_back(member(v[a], rows, cols, m,
                               std::string(name) + "[" + std::to_string(a + 1) + "]"));
    }
    return MatrixFamily(rows, cols, std::move(members));
  }

 private:
  const std::string& text_;
};

double bound(const InJson& v, double infinite, const std::string& where) {
  if (v.is_null()) return infinite;
  if (!v.is_number()) throw ConfigError(where + ": expected a number or null");
  return v.get<double>();
}

DomainBox read_domain(const InJson& v, std::size_t m) {
  if (!v.is_array() || v.size() != m) {
    throw ConfigError("\"domain\" must hold m = " + std::to_string(m) +
                      " [lo, hi] pairs");
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lo, hi;
  for (std::size_t a = 0; a < m; ++a) {
    const std::string where = "domain[" + std::to_string(a + 1) + "]";
    if (!v[a].is_array() || v[a].size() != 2) {
      throw ConfigError(where + ": expected [lo, hi]");
    }
    lo.push_back(bound(v[a][0], -inf, where));
    hi.push_back(bound(v[a][1], inf, where));
  }
  return DomainBox(lo, hi);
}

std::size_t count_field(const InJson& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    throw ConfigError("numeric." + key + " must be a positive integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

NumericConfig read_numeric(const InJson& v) {
  if (!v.is_object()) throw ConfigError("\"numeric\" must be an object");
  NumericConfig cfg;
  for (const auto& [key, value] : v.items()) {
    if (key == "quad_points_per_segment") {
      cfg.quad_points_per_segment = count_field(value, key);
    } else if (key == "ode_steps_per_segment") {
      cfg.ode_steps_per_segment = count_field(value, key);
    } else if (key == "grid_samples_per_axis") {
      cfg.grid_samples_per_axis = count_field(value, key);
    } else if (key == "rank_rel_tol" || key == "residual_rel_tol") {
      if (!value.is_number()) throw ConfigError("numeric." + key + " must be a number");
      (key == "rank_rel_tol" ? cfg.rank_rel_tol : cfg.residual_rel_tol) =
          value.get<double>();
    } else {
      throw ConfigError("unknown numeric setting \"" + key + "\"");
    }
  }
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("numeric: ") + e.what());
  }
  return cfg;
}

}  // namespace

ConfigError::ConfigError(const std::string& message, std::size_t line,
                         std::size_t column)
    : Error(with_position(message, line, column)), line_(line), column_(column) {}

SystemConfig parse_config(const std::string& text) {
  InJson doc;
  try {
    doc = InJson::parse(text);
  } catch (const InJson::parse_error& e) {
    auto [line, column] = locate(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("invalid JSON: " + json_reason(e.what()), line, column);
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    static const std::vector<std::string> known{"m", "n", "k", "M", "N",
                                                "domain", "numeric", "F", "u"};
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown key \"" + key + "\"");
    }
  }
  const Reader reader(text);
  const std::size_t m = reader.positive(doc, "m");
  const std::size_t n = reader.positive(doc, "n");
  const std::size_t k = reader.positive(doc, "k");
  if (!doc.contains("M")) throw ConfigError("missing key \"M\"");
  if (!doc.contains("N")) throw ConfigError("missing key \"N\"");
  MatrixFamily M = reader.family(doc["M"], "M", m, n, n);
  MatrixFamily N = reader.family(doc["N"], "N", m, n, k);
  const NumericConfig numeric =
      doc.contains("numeric") ? read_numeric(doc["numeric"]) : NumericConfig{};
  std::optional<MatrixFamily> F, u;
  if (doc.contains("F")) F = reader.family(doc["F"], "F", m, n, 1);
  if (doc.contains("u")) u = reader.family(doc["u"], "u", m, k, 1);
  try {
    if (doc.contains("domain")) {
      return SystemConfig{LinearSystem(std::move(M), std::move(N),
                                       read_domain(doc["domain"], m)),
                          numeric, std::move(F), std::move(u)};
    }
    return SystemConfig{LinearSystem(std::move(M), std::move(N)), numeric,
                        std::move(F), std::move(u)};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::string("cannot read ") + what + " " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SystemConfig load_config(const std::string& path) {
  return parse_config(read_file(path, "config file"));
}

ControlSpec parse_control(const std::string& text, const SystemConfig& config) {
  InJson doc;
  try {
    doc = InJson::parse(text);
  } catch (const InJson::parse_error& e) {
    auto [line, column] = locate(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("invalid JSON in control file: " + json_reason(e.what()), line,
                      column);
  }
  const LinearSystem& sys = config.system;
  if (!doc.is_object()) throw ConfigError("control file must be a JSON object");
  if (doc.value("kind", "") == "synthesized") {
    auto coords = [&](const char* key, std::size_t want) {
      if (!doc.contains(key) || !doc[key].is_array() || doc[key].size() != want) {
        throw ConfigError(std::string("control file: \"") + key + "\" must hold " +
                          std::to_string(want) + " numbers");
      }
      Vector v(static_cast<Eigen::Index>(want));
      for (std::size_t i = 0; i < want; ++i) {
        if (!doc[key][i].is_number()) {
          throw ConfigError(std::string("control file: \"") + key + "\" must be numeric");
        }
        v[static_cast<Eigen::Index>(i)] = doc[key][i].get<double>();
      }
      return v;
    };
    const MultiTime t0 = MultiTime::from_vector(coords("t0", sys.m()));
    const Vector v = coords("v", sys.n());
    SynthesizedControl sc = candidate_control(sys, t0, v, config.numeric);
    Json d{{"kind", "synthesized"},
           {"form", "u_alpha(s) = N_alpha(s)^T chi(t0, s)^T v"},
           {"t0", vector_json(t0.to_vector())},
           {"v", vector_json(v)},
           {"valid", sc.valid}};
    return ControlSpec{std::move(sc.controls), std::move(d)};
  }
  if (!doc.contains("u")) {
    throw ConfigError("control file needs \"u\" or \"kind\": \"synthesized\"");
  }
  const Reader reader(text);
  MatrixFamily u = reader.family(doc["u"], "u", sys.m(), sys.k(), 1);
  return ControlSpec{ControlFamily::from_family(u),
                     Json{{"kind", "expressions"}, {"constant", u.is_constant()}}};
}

ControlSpec load_control(const std::string& path, const SystemConfig& config) {
  return parse_control(read_file(path, "control file"), config);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) {
      ++used;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw ConfigError(std::string(what) + ": bad number \"" + item + "\"");
    }
    out.push_back(v);
  }
  if (out.empty() || (!text.empty() && text.back() == ',')) {
    throw ConfigError(std::string(what) + ": expected comma-separated numbers");
  }
  return out;
}

std::vector<MultiTime> parse_waypoints(const std::string& text) {
  std::vector<MultiTime> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    out.emplace_back(parse_list(item, "--force-path"));
  }
  return out;
}

}  // namespace multiflow::cli
