#pragma once

// CSV output with round-trip number formatting, and JSON loading for
// periodic environments with strict key checking.

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyvar/error.hpp"
#include "polyvar/model_core.hpp"
#include "polyvar/periodic_env.hpp"

namespace polyvar {

/// 17 significant digits, enough to read back the identical double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_vector(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v[i]);
  }
  return out;
}

/// One CSV field: a number, or text that never needs quoting (no commas).
class CsvField {
 public:
  CsvField(double x) : text_(format_double(x)) {}  // NOLINT
  CsvField(int x) : text_(std::to_string(x)) {}  // NOLINT
  CsvField(long x) : text_(std::to_string(x)) {}  // NOLINT
  CsvField(long long x) : text_(std::to_string(x)) {}  // NOLINT
  CsvField(unsigned long x) : text_(std::to_string(x)) {}  // NOLINT
  CsvField(unsigned long long x) : text_(std::to_string(x)) {}  // NOLINT
  CsvField(const std::vector<double>& v) : text_(format_vector(v)) {}  // NOLINT
  CsvField(std::string s) : text_(std::move(s)) {}  // NOLINT
  CsvField(const char* s) : text_(s) {}  // NOLINT

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::vector<std::string> header) : os_(os), width_(header.size()) {
    write_line(header);
  }

  void row(std::initializer_list<CsvField> fields) {
    if (fields.size() != width_) throw std::logic_error("csv row has wrong width");
    std::vector<std::string> cells;
    for (const auto& f : fields) cells.push_back(f.text());
    write_line(cells);
  }

 private:
  void write_line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].find(',') != std::string::npos) throw std::logic_error("csv field contains a comma");
      os_ << (i ? "," : "") << cells[i];
    }
    os_ << '\n';
  }

  std::ostream& os_;
  std::size_t width_;
};

namespace json_util {

using nlohmann::json;

inline void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
}

/// Rejects keys outside `allowed`, naming the first offender.
inline void check_keys(const json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  require_object(j, where);
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + ": expected a finite number");
  return x;
}

inline double number(const json& j, const char* key, const std::string& where) {
  return number(field(j, key, where), where + "." + key);
}

inline std::int64_t integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<std::int64_t>();
}

inline std::int64_t integer(const json& j, const char* key, const std::string& where) {
  return integer(field(j, key, where), where + "." + key);
}

inline std::string text(const json& j, const char* key, const std::string& where) {
  const auto& v = field(j, key, where);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<std::int64_t> integers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of integers");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(integer(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace json_util

struct EnvironmentDocument {
  PeriodicEnvironment env;
  StepSet steps;
  /// Set when the document gives Omega directly as a shift table.
  std::optional<std::vector<std::vector<std::size_t>>> shift_table;
  std::vector<double> state_weights;

  QuotientSpace quotient() const {
    if (shift_table) return QuotientSpace::from_table(steps, *shift_table, state_weights);
    return build_quotient(env, steps);
  }
};

namespace detail {

inline StepSet read_steps(const nlohmann::json& j, std::size_t dim, const std::string& where) {
  using namespace json_util;
  const auto& sj = field(j, "steps", where);
  if (!sj.is_array()) throw ConfigError(where + ".steps: expected an array of integer vectors");
  std::vector<Site> steps;
  for (std::size_t i = 0; i < sj.size(); ++i) {
    auto z = integers(sj[i], where + ".steps[" + std::to_string(i) + "]");
    if (z.size() != dim) throw ConfigError(where + ".steps[" + std::to_string(i) + "]: wrong dimension");
    steps.push_back(std::move(z));
  }
  try {
    return StepSet(std::move(steps));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ".steps: " + e.what());
  }
}

}  // namespace detail

/// Either a lattice environment {dimension, period: [...], weights:
/// [row-major], steps: [[...], ...]} or a finite space given directly as
/// {dimension, steps, shift_table: [[state per step], ...], weights: [per state]}.
inline EnvironmentDocument load_environment(const nlohmann::json& j,
                                            const std::string& where = "environment") {
  using namespace json_util;
  check_keys(j, {"dimension", "period", "weights", "steps", "shift_table"}, where);
  const auto dim = integer(j, "dimension", where);
  if (dim < 1) throw ConfigError(where + ".dimension: must be positive");
  EnvironmentDocument doc{PeriodicEnvironment{}, detail::read_steps(j, static_cast<std::size_t>(dim), where), {}, {}};
  if (j.contains("shift_table")) {
    if (j.contains("period")) throw ConfigError(where + ": give either 'period' or 'shift_table', not both");
    const auto& tj = j["shift_table"];
    if (!tj.is_array() || tj.empty()) throw ConfigError(where + ".shift_table: expected a nonempty array");
    std::vector<std::vector<std::size_t>> table;
    for (std::size_t w = 0; w < tj.size(); ++w) {
      const auto row = integers(tj[w], where + ".shift_table[" + std::to_string(w) + "]");
      if (row.size() != doc.steps.size())
        throw ConfigError(where + ".shift_table[" + std::to_string(w) + "]: expected one entry per step");
      std::vector<std::size_t> r;
      for (auto t : row) {
        if (t < 0 || static_cast<std::size_t>(t) >= tj.size())
          throw ConfigError(where + ".shift_table[" + std::to_string(w) + "]: state out of range");
        r.push_back(static_cast<std::size_t>(t));
      }
      table.push_back(std::move(r));
    }
    doc.state_weights = numbers(field(j, "weights", where), where + ".weights");
    if (doc.state_weights.size() != table.size())
      throw ConfigError(where + ".weights: expected one weight per state");
    doc.shift_table = std::move(table);
    return doc;
  }
  doc.env.dimension = static_cast<std::size_t>(dim);
  doc.env.period = integers(field(j, "period", where), where + ".period");
  doc.env.weights = numbers(field(j, "weights", where), where + ".weights");
  try {
    doc.env.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return doc;
}

}  // namespace polyvar
