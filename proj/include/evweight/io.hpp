#pragma once

// File formats: validation CSVs, prior/count JSON, and the hyperparameter
// sum type used to record which prior a result was computed under.

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "evweight/categorical.hpp"
#include "evweight/interval_opinion.hpp"
#include "evweight/multi_expert.hpp"
#include "evweight/scalar_opinion.hpp"

namespace evweight {

/// Malformed or unreadable input. `line` is 1-based; 0 when not applicable.
class InputError : public std::runtime_error {
 public:
  InputError(std::string source, std::size_t line, const std::string& message)
      : std::runtime_error(format(source, line, message)), source_(std::move(source)), line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  static std::string format(const std::string& source, std::size_t line, const std::string& msg) {
    return line == 0 ? source + ": " + msg : source + ":" + std::to_string(line) + ": " + msg;
  }
  std::string source_;
  std::size_t line_;
};

struct IntervalPrior {
  NormalGammaParams mid_h1 = default_scalar_prior_h1();
  NormalGammaParams mid_h2 = default_scalar_prior_h2();
  GammaConjParams width_h1 = default_width_prior();
  GammaConjParams width_h2 = default_width_prior();
};

/// Exactly one prior family per opinion type.
using Hyperparams = std::variant<CategoricalPrior, NormalGammaParams, IntervalPrior, NormalWishartParams>;

// ---------------------------------------------------------------- JSON --

inline void to_json(nlohmann::json& j, const NormalGammaParams& p) {
  j = {{"mu0", p.mu0}, {"n_mu", p.n_mu}, {"tau0", p.tau0}, {"n_tau", p.n_tau}};
}

inline void from_json(const nlohmann::json& j, NormalGammaParams& p) {
  p.mu0 = j.at("mu0").get<double>();
  p.n_mu = j.at("n_mu").get<double>();
  p.tau0 = j.at("tau0").get<double>();
  p.n_tau = j.at("n_tau").get<double>();
  p.validate();
}

inline void to_json(nlohmann::json& j, const GammaConjParams& p) {
  j = {{"log_p", p.log_p}, {"q", p.q}, {"r", p.r}, {"s", p.s}};
}

/// Accepts either "p" or "log_p".
inline void from_json(const nlohmann::json& j, GammaConjParams& p) {
  if (j.contains("log_p")) {
    p.log_p = j.at("log_p").get<double>();
  } else {
    const double raw = j.at("p").get<double>();
    detail::require_positive("p", raw);
    p.log_p = std::log(raw);
  }
  p.q = j.at("q").get<double>();
  p.r = j.at("r").get<double>();
  p.s = j.at("s").get<double>();
  p.validate();
}

inline void to_json(nlohmann::json& j, const NormalWishartParams& p) {
  j = {{"mu0", {p.mu0(0), p.mu0(1)}},
       {"k0", p.k0},
       {"lambda0", {p.lambda0(0, 0), p.lambda0(0, 1), p.lambda0(1, 0), p.lambda0(1, 1)}},
       {"n0", p.n0}};
}

/// lambda0 is row-major: [a, b, c, d] or [[a, b], [c, d]].
inline void from_json(const nlohmann::json& j, NormalWishartParams& p) {
  const auto mu = j.at("mu0").get<std::vector<double>>();
  if (mu.size() != 2) throw DomainError("mu0 must have 2 entries");
  p.mu0 << mu[0], mu[1];
  p.k0 = j.at("k0").get<double>();
  p.n0 = j.at("n0").get<double>();
  const auto& lam = j.at("lambda0");
  std::vector<double> flat;
  if (lam.is_array() && !lam.empty() && lam.front().is_array()) {
    for (const auto& row : lam)
      for (const auto& v : row) flat.push_back(v.get<double>());
  } else {
    flat = lam.get<std::vector<double>>();
  }
  if (flat.size() != 4) throw DomainError("lambda0 must have 4 entries");
  p.lambda0 << flat[0], flat[1], flat[2], flat[3];
  p.validate();
}

inline void to_json(nlohmann::json& j, const ConclusionCounts& c) {
  j = {{"H1", {{"id", c.h1.id}, {"inc", c.h1.inc}, {"exc", c.h1.exc}}},
       {"H2", {{"id", c.h2.id}, {"inc", c.h2.inc}, {"exc", c.h2.exc}}}};
}

inline void from_json(const nlohmann::json& j, ConclusionCounts& c) {
  auto scenario = [&](const char* key) {
    const auto& s = j.at(key);
    return ScenarioCounts{s.at("id").get<std::uint64_t>(), s.at("inc").get<std::uint64_t>(),
                          s.at("exc").get<std::uint64_t>()};
  };
  c.h1 = scenario("H1");
  c.h2 = scenario("H2");
}

inline void to_json(nlohmann::json& j, const CategoricalPrior& p) {
  j = {{"alpha_h1", p.alpha_h1}, {"alpha_h2", p.alpha_h2}};
}

inline void from_json(const nlohmann::json& j, CategoricalPrior& p) {
  if (j.contains("alpha_h1")) p.alpha_h1 = j.at("alpha_h1").get<std::array<double, 3>>();
  if (j.contains("alpha_h2")) p.alpha_h2 = j.at("alpha_h2").get<std::array<double, 3>>();
  for (double a : p.alpha_h1) detail::require_positive("alpha_h1", a);
  for (double a : p.alpha_h2) detail::require_positive("alpha_h2", a);
}

inline void to_json(nlohmann::json& j, const IntervalPrior& p) {
  j = {{"mid", {{"H1", p.mid_h1}, {"H2", p.mid_h2}}},
       {"width", {{"H1", p.width_h1}, {"H2", p.width_h2}}}};
}

inline void from_json(const nlohmann::json& j, IntervalPrior& p) {
  if (j.contains("mid")) {
    p.mid_h1 = j.at("mid").at("H1").get<NormalGammaParams>();
    p.mid_h2 = j.at("mid").at("H2").get<NormalGammaParams>();
  }
  if (j.contains("width")) {
    p.width_h1 = j.at("width").at("H1").get<GammaConjParams>();
    p.width_h2 = j.at("width").at("H2").get<GammaConjParams>();
  }
}

inline nlohmann::json hyperparams_to_json(const Hyperparams& h) {
  return std::visit(
      [](const auto& v) {
        nlohmann::json j = v;
        return j;
      },
      h);
}

inline void to_json(nlohmann::json& j, const LrEstimate& e) {
  j = {{"lr", e.lr}, {"log10_lr", e.log10_lr}, {"n_samples", e.n_samples}};
  j["mc_std_err"] = e.mc_std_err ? nlohmann::json(*e.mc_std_err) : nlohmann::json(nullptr);
  j["acceptance_rate"] =
      e.acceptance_rate ? nlohmann::json(*e.acceptance_rate) : nlohmann::json(nullptr);
  j["seed"] = e.seed ? nlohmann::json(*e.seed) : nlohmann::json(nullptr);
}

// ----------------------------------------------------------------- files --

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(source, 0, std::string("invalid JSON: ") + e.what());
  }
}

/// Applies `convert` to a parsed JSON document, mapping any failure to an
/// InputError naming the file.
template <class T, class Convert>
T convert_json(const nlohmann::json& j, const std::string& source, Convert convert) {
  try {
    return convert(j);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(source, 0, e.what());
  } catch (const DomainError& e) {
    throw InputError(source, 0, e.what());
  }
}

struct CsvRow {
  std::size_t line;
  std::vector<std::string> fields;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

/// Splits comma-separated text into rows. Blank lines and lines starting
/// with '#' are skipped, as is a first row whose first field is "scenario".
inline std::vector<CsvRow> parse_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    CsvRow row{number, {}};
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = t.find(',', start);
      row.fields.push_back(detail::trim(std::string_view(t).substr(
          start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (first && (row.fields.front() == "scenario" || row.fields.front() == "Scenario")) {
      first = false;
      continue;
    }
    first = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

inline double parse_double_field(const std::string& field, const std::string& source,
                                 std::size_t line) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw InputError(source, line, "'" + field + "' is not a finite number");
  return v;
}

inline Scenario parse_scenario_field(const std::string& field, const std::string& source,
                                     std::size_t line) {
  const auto s = parse_scenario(field);
  if (!s) throw InputError(source, line, "unknown scenario '" + field + "' (expected H1 or H2)");
  return *s;
}

inline void require_fields(const CsvRow& row, std::size_t n, const std::string& source) {
  if (row.fields.size() != n)
    throw InputError(source, row.line,
                     "expected " + std::to_string(n) + " fields, found " +
                         std::to_string(row.fields.size()));
}

/// Validation counts from JSON ({"H1": {"id":..,"inc":..,"exc":..}, "H2": ..})
/// or per-comparison CSV rows `scenario,conclusion`.
inline ConclusionCounts parse_conclusion_counts(const std::string& text, const std::string& source) {
  const std::string t = detail::trim(text);
  if (!t.empty() && t.front() == '{') {
    const auto j = parse_json_text(text, source);
    return convert_json<ConclusionCounts>(j, source,
                                          [](const nlohmann::json& v) { return v.get<ConclusionCounts>(); });
  }
  ConclusionCounts counts;
  for (const CsvRow& row : parse_csv(text)) {
    require_fields(row, 2, source);
    const Scenario s = parse_scenario_field(row.fields[0], source, row.line);
    const auto c = parse_conclusion(row.fields[1]);
    if (!c)
      throw InputError(source, row.line,
                       "unknown conclusion '" + row.fields[1] + "' (expected id, inc or exc)");
    ++(s == Scenario::H1 ? counts.h1 : counts.h2)[*c];
  }
  return counts;
}

template <class T>
struct PerScenario {
  std::vector<T> h1;
  std::vector<T> h2;

  std::vector<T>& operator[](Scenario s) { return s == Scenario::H1 ? h1 : h2; }
};

/// `scenario,log10_lr`
inline PerScenario<double> parse_scalar_validation(const std::string& text, const std::string& source) {
  PerScenario<double> out;
  for (const CsvRow& row : parse_csv(text)) {
    require_fields(row, 2, source);
    out[parse_scenario_field(row.fields[0], source, row.line)].push_back(
        parse_double_field(row.fields[1], source, row.line));
  }
  return out;
}

/// `scenario,log10_lo,log10_hi`
inline PerScenario<IntervalSplit> parse_interval_validation(const std::string& text,
                                                           const std::string& source) {
  PerScenario<IntervalSplit> out;
  for (const CsvRow& row : parse_csv(text)) {
    require_fields(row, 3, source);
    const Scenario s = parse_scenario_field(row.fields[0], source, row.line);
    const double lo = parse_double_field(row.fields[1], source, row.line);
    const double hi = parse_double_field(row.fields[2], source, row.line);
    if (!(lo < hi)) throw InputError(source, row.line, "interval needs log10_lo < log10_hi");
    out[s].push_back(split_log10_interval(lo, hi));
  }
  return out;
}

/// `scenario,log10_lr_b,log10_lr_c`
inline PerScenario<Vec2> parse_pair_validation(const std::string& text, const std::string& source) {
  PerScenario<Vec2> out;
  for (const CsvRow& row : parse_csv(text)) {
    require_fields(row, 3, source);
    const Scenario s = parse_scenario_field(row.fields[0], source, row.line);
    out[s].push_back(Vec2(parse_double_field(row.fields[1], source, row.line),
                          parse_double_field(row.fields[2], source, row.line)));
  }
  return out;
}

/// {"H1": {...}, "H2": {...}} for any per-scenario parameter type.
template <class Params>
std::pair<Params, Params> parse_scenario_priors(const std::string& text, const std::string& source) {
  const auto j = parse_json_text(text, source);
  return convert_json<std::pair<Params, Params>>(j, source, [](const nlohmann::json& v) {
    return std::make_pair(v.at("H1").get<Params>(), v.at("H2").get<Params>());
  });
}

inline IntervalPrior parse_interval_prior(const std::string& text, const std::string& source) {
  const auto j = parse_json_text(text, source);
  return convert_json<IntervalPrior>(j, source,
                                     [](const nlohmann::json& v) { return v.get<IntervalPrior>(); });
}

inline CategoricalPrior parse_categorical_prior(const std::string& text, const std::string& source) {
  const auto j = parse_json_text(text, source);
  return convert_json<CategoricalPrior>(j, source,
                                        [](const nlohmann::json& v) { return v.get<CategoricalPrior>(); });
}

}  // namespace evweight
