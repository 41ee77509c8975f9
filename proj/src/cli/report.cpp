#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "multiflow/cli.hpp"

namespace multiflow::cli {

namespace {

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string scalar_text(const Json& v) {
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "-";
  return v.dump();
}

bool is_matrix(const Json& v) {
  return v.is_object() && v.size() == 3 && v.contains("rows") &&
         v.contains("cols") && v.contains("data");
}

bool is_flat(const Json& v) {
  if (!v.is_array()) return false;
  for (const auto& x : v) {
    if (x.is_structured() || x.is_string()) return false;
  }
  return true;
}

std::string flat_text(const Json& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += scalar_text(v[i]);
  }
  return s + "]";
}

void render_matrix(std::ostringstream& out, const Json& v, const std::string& pad) {
  std::vector<std::vector<std::string>> cells;
  std::size_t width = 1;
  for (const auto& row : v["data"]) {
    cells.emplace_back();
    for (const auto& x : row) {
      cells.back().push_back(scalar_text(x));
      width = std::max(width, cells.back().back().size());
    }
  }
  for (const auto& row : cells) {
    out << pad;
    for (const auto& c : row) out << ' ' << std::string(width - c.size(), ' ') << c;
    out << '\n';
  }
}

void render(std::ostringstream& out, const Json& v, int depth);

void render_entry(std::ostringstream& out, const std::string& key, const Json& v,
                  int depth) {
  const std::string pad(static_cast<std::size_t>(2 * depth), ' ');
  if (is_matrix(v)) {
    out << pad << key << " (" << v["rows"].get<long>() << "x" << v["cols"].get<long>()
        << "):\n";
    render_matrix(out, v, pad + "  ");
  } else if (!v.is_structured()) {
    out << pad << key << ": " << scalar_text(v) << '\n';
  } else if (v.empty()) {
    out << pad << key << ": " << (v.is_array() ? "[]" : "{}") << '\n';
  } else if (is_flat(v)) {
    out << pad << key << ": " << flat_text(v) << '\n';
  } else {
    out << pad << key << ":\n";
    render(out, v, depth + 1);
  }
}

void render(std::ostringstream& out, const Json& v, int depth) {
  if (v.is_object()) {
    for (const auto& [key, value] : v.items()) render_entry(out, key, value, depth);
    return;
  }
  const std::string pad(static_cast<std::size_t>(2 * depth), ' ');
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].is_string()) {
      out << pad << "- " << v[i].get<std::string>() << '\n';
    } else {
      render_entry(out, "[" + std::to_string(i + 1) + "]", v[i], depth);
    }
  }
}

}  // namespace

double rounded(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(format_number(x).c_str(), nullptr);
}

Json matrix_json(const Matrix& a) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(rounded(a(i, j)));
    data.push_back(row);
  }
  return Json{{"rows", a.rows()}, {"cols", a.cols()}, {"data", data}};
}

Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(rounded(v[i]));
  return out;
}

Json condition_json(const ConditionReport& r) {
  Json out{{"condition", std::string(condition_name(r.condition))},
           {"pass", r.pass},
           {"max_residual", rounded(r.max_residual)},
           {"tolerance", rounded(r.tolerance)},
           {"scale", rounded(r.scale)},
           {"points_checked", r.points_checked}};
  if (!r.pass) {
    if (r.worst_point) out["worst_point"] = vector_json(r.worst_point->to_vector());
    out["worst_pair"] = {r.worst_pair.first + 1, r.worst_pair.second + 1};
  }
  out["summary"] = r.summary();
  return out;
}

std::string render_json(const Json& report) { return report.dump(2) + "\n"; }

std::string render_text(const Json& report) {
  std::ostringstream out;
  render(out, report, 0);
  return out.str();
}

}  // namespace multiflow::cli
