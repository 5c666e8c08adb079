#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "subsidy_game/error.hpp"
#include "subsidy_game/model.hpp"

namespace sg {

enum class SolverChoice { enumeration, dp, both };

struct Numerics {
  double step = 1e-3;
  std::size_t grid_nodes = 200;
  std::size_t workers = 1;

  friend bool operator==(const Numerics&, const Numerics&) = default;
};

// A one-dimensional sensitivity sweep.
struct Sweep {
  std::string parameter;  // target | b2 | alpha2 | num_dates
  std::vector<double> values;

  friend bool operator==(const Sweep&, const Sweep&) = default;
};

struct Scenario {
  GameParameters params;
  SubsidyProgram program;
  SolverChoice solver = SolverChoice::enumeration;
  Numerics numerics;
  std::optional<Sweep> sweep;
  std::string output_dir = "out";

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline const char* to_string(SolverChoice s) noexcept {
  switch (s) {
    case SolverChoice::enumeration: return "enumeration";
    case SolverChoice::dp: return "dp";
    case SolverChoice::both: return "both";
  }
  return "enumeration";
}

// Shortest decimal text that parses back to the same double.
inline std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

// Equally spaced dates (i-1) * end / n, i = 1..n.
inline std::vector<double> equally_spaced_dates(std::size_t n, double end_date) {
  std::vector<double> dates(n);
  for (std::size_t i = 0; i < n; ++i) dates[i] = static_cast<double>(i) * end_date / static_cast<double>(n);
  return dates;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_number(std::string_view text, int line, std::string_view key) {
  text = trim(text);
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value, std::chars_format::fixed | std::chars_format::scientific);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError(line, "invalid number '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

inline std::vector<double> parse_list(std::string_view text, int line, std::string_view key) {
  std::vector<double> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_number(text.substr(start, comma - start), line, key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::size_t parse_count(std::string_view text, int line, std::string_view key) {
  const double v = parse_number(text, line, key);
  if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw ParseError(line, std::string(key) + " must be a nonnegative integer");
  }
  return static_cast<std::size_t>(v);
}

struct KeyInfo {
  std::string_view section;
  std::string_view name;
  bool required;
};

inline constexpr std::array<KeyInfo, 23> schema_keys{{
    {"", "solver", false},
    {"", "output_dir", false},
    {"parameters", "alpha1", true},
    {"parameters", "alpha2", true},
    {"parameters", "beta", true},
    {"parameters", "p_a", true},
    {"parameters", "x0", true},
    {"parameters", "b1", true},
    {"parameters", "b2", true},
    {"parameters", "rho", true},
    {"parameters", "T", true},
    {"program", "decision_dates", true},
    {"program", "end_date", true},
    {"program", "subsidy_set", true},
    {"program", "fixed_cost", true},
    {"program", "target", true},
    {"program", "initial_subsidy", false},
    {"numerics", "step", false},
    {"numerics", "grid_nodes", false},
    {"numerics", "workers", false},
    {"sweep", "parameter", true},
    {"sweep", "values", true},
    {"program", "num_dates", false},  // override only: regenerates decision_dates
}};

inline const KeyInfo* find_key(std::string_view section, std::string_view name) {
  for (const auto& k : schema_keys) {
    if (k.section == section && k.name == name) return &k;
  }
  return nullptr;
}

// Resolves a bare or dotted override key to its schema entry.
inline const KeyInfo* resolve_key(std::string_view key) {
  if (const auto dot = key.find('.'); dot != std::string_view::npos) {
    return find_key(key.substr(0, dot), key.substr(dot + 1));
  }
  for (const auto& k : schema_keys) {
    if (k.name == key) return &k;
  }
  return nullptr;
}

inline void assign(Scenario& sc, const KeyInfo& key, std::string_view value, int line) {
  const auto name = key.name;
  auto number = [&] { return parse_number(value, line, name); };
  auto& p = sc.params;
  auto& g = sc.program;
  if (name == "solver") {
    const auto v = trim(value);
    if (v == "enumeration") sc.solver = SolverChoice::enumeration;
    else if (v == "dp") sc.solver = SolverChoice::dp;
    else if (v == "both") sc.solver = SolverChoice::both;
    else throw ParseError(line, "solver must be enumeration, dp or both");
  } else if (name == "output_dir") {
    sc.output_dir = std::string(trim(value));
  } else if (name == "alpha1") p.alpha1 = number();
  else if (name == "alpha2") p.alpha2 = number();
  else if (name == "beta") p.beta = number();
  else if (name == "p_a") p.p_a = number();
  else if (name == "x0") p.x0 = number();
  else if (name == "b1") p.b1 = number();
  else if (name == "b2") p.b2 = number();
  else if (name == "rho") p.rho = number();
  else if (name == "T") p.T = number();
  else if (name == "decision_dates") g.decision_dates = parse_list(value, line, name);
  else if (name == "end_date") g.end_date = number();
  else if (name == "subsidy_set") g.subsidy_set = parse_list(value, line, name);
  else if (name == "fixed_cost") g.fixed_cost = number();
  else if (name == "target") g.target = number();
  else if (name == "initial_subsidy") g.initial_subsidy = number();
  else if (name == "num_dates") g.decision_dates = equally_spaced_dates(parse_count(value, line, name), g.end_date);
  else if (name == "step") sc.numerics.step = number();
  else if (name == "grid_nodes") sc.numerics.grid_nodes = parse_count(value, line, name);
  else if (name == "workers") sc.numerics.workers = parse_count(value, line, name);
  else if (name == "parameter") {
    const auto v = std::string(trim(value));
    if (v != "target" && v != "b2" && v != "alpha2" && v != "num_dates") {
      throw ParseError(line, "sweep parameter must be one of target, b2, alpha2, num_dates");
    }
    if (!sc.sweep) sc.sweep.emplace();
    sc.sweep->parameter = v;
  } else if (name == "values") {
    if (!sc.sweep) sc.sweep.emplace();
    sc.sweep->values = parse_list(value, line, name);
  }
}

inline void throw_on_errors(const std::vector<Diagnostic>& diagnostics) {
  std::string message;
  for (const auto& d : diagnostics) {
    if (d.severity != Severity::error) continue;
    if (!message.empty()) message += "; ";
    message += d.field + ": " + d.message;
  }
  if (!message.empty()) throw ValidationError(message);
}

}  // namespace detail

inline std::vector<Diagnostic> validate(const Scenario& sc) {
  auto out = validate(sc.params, sc.program);
  if (!(sc.numerics.step > 0.0)) out.push_back({Severity::error, "step", "step must be positive"});
  if (sc.numerics.grid_nodes < 2) out.push_back({Severity::error, "grid_nodes", "grid_nodes must be at least 2"});
  if (sc.sweep && sc.sweep->values.empty()) {
    out.push_back({Severity::error, "values", "sweep values must be nonempty"});
  }
  if (sc.sweep && sc.sweep->parameter.empty()) {
    out.push_back({Severity::error, "parameter", "sweep parameter missing"});
  }
  return out;
}

// Parses the sectioned key-value scenario format and validates the result.
inline Scenario load_scenario(std::string_view text) {
  Scenario sc;
  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "malformed section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      if (section != "parameters" && section != "program" && section != "numerics" && section != "sweep") {
        throw ParseError(line_no, "unknown section " + section);
      }
      if (section == "sweep" && !sc.sweep) sc.sweep.emplace();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const auto key = detail::trim(line.substr(0, eq));
    const auto* info = detail::find_key(section, key);
    if (info == nullptr || key == "num_dates") throw ParseError(line_no, "unknown key " + std::string(key));
    const auto qualified = section + "." + std::string(key);
    if (!seen.insert(qualified).second) throw ParseError(line_no, "duplicate key " + std::string(key));
    detail::assign(sc, *info, line.substr(eq + 1), line_no);
  }

  for (const auto& k : detail::schema_keys) {
    if (!k.required) continue;
    if (k.section == "sweep" && !sc.sweep) continue;
    if (!seen.contains(std::string(k.section) + "." + std::string(k.name))) {
      throw ParseError(0, "missing key " + std::string(k.name) + " in [" + std::string(k.section) + "]");
    }
  }
  detail::throw_on_errors(validate(sc));
  return sc;
}

// Applies `key=value`; keys are field names, optionally section-qualified.
inline void apply_override(Scenario& sc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ParseError(0, "override must have the form key=value");
  const auto key = detail::trim(assignment.substr(0, eq));
  const auto* info = detail::resolve_key(key);
  if (info == nullptr) throw ParseError(0, "unknown key " + std::string(key));
  detail::assign(sc, *info, assignment.substr(eq + 1), 0);
}

inline void require_valid(const Scenario& sc) { detail::throw_on_errors(validate(sc)); }

inline std::string serialize(const Scenario& sc) {
  std::ostringstream out;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0) s += ", ";
      s += format_number(v[i]);
    }
    return s;
  };
  const auto& p = sc.params;
  const auto& g = sc.program;
  out << "solver = " << to_string(sc.solver) << "\n";
  out << "output_dir = " << sc.output_dir << "\n\n";
  out << "[parameters]\n";
  out << "alpha1 = " << format_number(p.alpha1) << "\n";
  out << "alpha2 = " << format_number(p.alpha2) << "\n";
  out << "beta = " << format_number(p.beta) << "\n";
  out << "p_a = " << format_number(p.p_a) << "\n";
  out << "x0 = " << format_number(p.x0) << "\n";
  out << "b1 = " << format_number(p.b1) << "\n";
  out << "b2 = " << format_number(p.b2) << "\n";
  out << "rho = " << format_number(p.rho) << "\n";
  out << "T = " << format_number(p.T) << "\n\n";
  out << "[program]\n";
  out << "decision_dates = " << list(g.decision_dates) << "\n";
  out << "end_date = " << format_number(g.end_date) << "\n";
  out << "subsidy_set = " << list(g.subsidy_set) << "\n";
  out << "fixed_cost = " << format_number(g.fixed_cost) << "\n";
  out << "target = " << format_number(g.target) << "\n";
  out << "initial_subsidy = " << format_number(g.initial_subsidy) << "\n\n";
  out << "[numerics]\n";
  out << "step = " << format_number(sc.numerics.step) << "\n";
  out << "grid_nodes = " << sc.numerics.grid_nodes << "\n";
  out << "workers = " << sc.numerics.workers << "\n";
  if (sc.sweep) {
    out << "\n[sweep]\n";
    out << "parameter = " << sc.sweep->parameter << "\n";
    out << "values = " << list(sc.sweep->values) << "\n";
  }
  return out.str();
}

// Scenario for one sweep point, with the sweep itself removed.
inline Scenario sweep_point(const Scenario& base, double value) {
  Scenario sc = base;
  sc.sweep.reset();
  const auto& name = base.sweep->parameter;
  if (name == "target") sc.program.target = value;
  else if (name == "b2") sc.params.b2 = value;
  else if (name == "alpha2") sc.params.alpha2 = value;
  else if (name == "num_dates") {
    if (!(value >= 1.0) || value != static_cast<double>(static_cast<std::size_t>(value))) {
      throw ValidationError("num_dates sweep values must be positive integers");
    }
    sc.program.decision_dates = equally_spaced_dates(static_cast<std::size_t>(value), sc.program.end_date);
  }
  return sc;
}

}  // namespace sg
