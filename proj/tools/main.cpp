// evweight: recipient likelihood ratios for expert opinions, from the shell.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evweight/evweight.hpp"
#include "evweight/io.hpp"
#include "run_output.hpp"

#ifndef EVWEIGHT_VERSION
#define EVWEIGHT_VERSION "0.0.0"
#endif

namespace {

using namespace evweight;
using cli::CsvBuilder;
using cli::format_double;
using nlohmann::json;

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string out = ".";
  std::string format = "json";
  std::uint64_t seed = 1;
  std::uint64_t samples = 1'000'000;
  std::size_t chunk_size = 1 << 16;
};

struct CategoricalOptions {
  std::string conclusion = "id";
  std::string validation;
  std::string prior;
  std::string sweep;
  std::size_t bins = 100;
};

struct ScalarOptions {
  double r = 0.0;
  std::string validation;
  std::string prior;
  std::string grid = "-30:30:241";
};

struct IntervalOptions {
  std::optional<double> lo, hi, log10_lo, log10_hi;
  std::string validation;
  std::string prior;
  std::string width_grid = "0.1:20:200";
  bool strict_boundary = false;
};

struct TwoExpertOptions {
  std::string x;
  std::string validation;
  std::string prior;
  std::string df_convention = "n0";
  std::string prior_variant = "display";
  std::string sweep = "0,1,2,5,10,20,50,100,200,500,1000";
};

struct CoinOptions {
  std::string seq;
};

struct ReplayOptions {
  std::string manifest;
};

struct Options {
  CommonOptions common;
  CategoricalOptions categorical;
  ScalarOptions scalar;
  IntervalOptions interval;
  TwoExpertOptions two_expert;
  CoinOptions coin;
  ReplayOptions replay;
};

// ------------------------------------------------------------ parsing ---

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_number(const std::string& text, const std::string& flag) {
  return parse_double_field(detail::trim(text), flag, 0);
}

std::uint64_t parse_count(const std::string& text, const std::string& flag) {
  const std::string t = detail::trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InputError(flag, 0, "'" + text + "' is not a non-negative integer");
  return v;
}

std::vector<std::uint64_t> parse_counts(const std::string& text, const std::string& flag) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_count(part, flag));
  return out;
}

/// "lo:hi:n" -> n evenly spaced points including both ends.
std::vector<double> parse_grid(const std::string& text, const std::string& flag) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw InputError(flag, 0, "expected lo:hi:n, got '" + text + "'");
  const double lo = parse_number(parts[0], flag);
  const double hi = parse_number(parts[1], flag);
  const std::uint64_t n = parse_count(parts[2], flag);
  if (n < 2 || !(lo < hi)) throw InputError(flag, 0, "grid needs lo < hi and n >= 2");
  std::vector<double> grid(n);
  for (std::uint64_t i = 0; i < n; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return grid;
}

Vec2 parse_pair(const std::string& text, const std::string& flag) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw InputError(flag, 0, "expected a,b, got '" + text + "'");
  return {parse_number(parts[0], flag), parse_number(parts[1], flag)};
}

std::string join(const std::vector<std::uint64_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

// ---------------------------------------------------------------- run ---

/// One command invocation: records settings and inputs, then owns the
/// output directory.
class Run {
 public:
  Run(std::string command, const CommonOptions& common, std::optional<std::string> expected_digest)
      : common_(common), expected_digest_(std::move(expected_digest)),
        start_(std::chrono::steady_clock::now()) {
    if (common.format != "json" && common.format != "csv")
      throw InputError("--format", 0, "expected json or csv");
    manifest_.command = std::move(command);
    manifest_.seed = common.seed;
    manifest_.tool_version = EVWEIGHT_VERSION;
    set("format", common.format);
    set("seed", std::to_string(common.seed));
    set("chunk-size", std::to_string(common.chunk_size));
  }

  void set(const std::string& flag, const std::string& value) { manifest_.settings[flag] = value; }
  void set_samples(std::uint64_t n) {
    manifest_.n_samples = n;
    set("samples", std::to_string(n));
  }

  std::string load(const std::string& role, const std::string& path) {
    std::string text = read_file(path);
    manifest_.input_digests[role] = cli::sha256_hex(text);
    set(role, path);
    return text;
  }

  RejectionOptions rejection() const {
    RejectionOptions opts;
    opts.chunk_size = common_.chunk_size;
    return opts;
  }

  /// Fixes the manifest; call once all inputs are loaded.
  const std::string& seal() {
    digest_ = manifest_.digest();
    if (expected_digest_ && *expected_digest_ != digest_)
      throw InputError("manifest", 0, "inputs or settings differ from the recorded run");
    dir_.emplace(common_.out);
    return digest_;
  }

  const std::string& digest() const { return digest_; }
  const cli::OutputDir& dir() const { return *dir_; }

  void write_csv(const std::string& name, const CsvBuilder& csv) const { dir_->write(name, csv.str()); }

  void finish(const json& result) {
    cli::write_result(*dir_, result, common_.format, digest_);
    manifest_.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    dir_->write("manifest.json", manifest_.to_json().dump(2) + "\n");
  }

 private:
  CommonOptions common_;
  std::optional<std::string> expected_digest_;
  std::chrono::steady_clock::time_point start_;
  cli::RunManifest manifest_;
  std::string digest_;
  std::optional<cli::OutputDir> dir_;
};

template <class T>
json scenario_pair(const T& h1, const T& h2) {
  return {{"H1", h1}, {"H2", h2}};
}

void run_categorical(const CategoricalOptions& o, Run& run, std::uint64_t samples, std::uint64_t seed) {
  const auto chosen = parse_conclusion(o.conclusion);
  if (!chosen) throw InputError("--conclusion", 0, "expected id, inc or exc");
  if (o.bins == 0) throw InputError("--bins", 0, "must be positive");
  if (samples == 0) throw InputError("--samples", 0, "must be positive");
  run.set("conclusion", std::string(to_string(*chosen)));
  run.set("bins", std::to_string(o.bins));
  run.set_samples(samples);

  ConclusionCounts counts;
  if (!o.validation.empty()) counts = parse_conclusion_counts(run.load("validation", o.validation), o.validation);
  CategoricalPrior prior;
  if (!o.prior.empty()) prior = parse_categorical_prior(run.load("prior", o.prior), o.prior);
  std::vector<std::uint64_t> sizes;
  if (!o.sweep.empty()) {
    if (o.validation.empty()) throw InputError("--sweep", 0, "requires --validation");
    sizes = parse_counts(o.sweep, "--sweep");
    run.set("sweep", join(sizes));
  }
  const std::string& digest = run.seal();

  const RatePairSample sample = sample_rate_pairs(counts, samples, RngStream(seed), prior, run.rejection());
  json all = json::object();
  for (Conclusion c : kAllConclusions) {
    all[std::string(to_string(c))] = lr_from_rate_pairs(c, sample);
    const DensityGrid g = joint_density_grid(sample, c, o.bins);
    CsvBuilder csv(digest, {"p", "q", "density"});
    for (std::size_t i = 0; i < g.bins; ++i)
      for (std::size_t k = 0; k < g.bins; ++k)
        csv.row({format_double(g.center(i)), format_double(g.center(k)), format_double(g.at(i, k))});
    run.write_csv("density_grid_" + std::string(to_string(c)) + ".csv", csv);
  }

  json result = {{"conclusion", to_string(*chosen)},
                 {"lr", all[std::string(to_string(*chosen))]},
                 {"all_conclusions", all},
                 {"counts", counts},
                 {"hyperparams", hyperparams_to_json(prior)},
                 {"proposals", sample.proposals}};

  if (!sizes.empty()) {
    const SweepTable table = lr_sweep(counts, sizes, samples, RngStream(seed, 1), run.rejection(), prior);
    CsvBuilder csv(digest, {"size", "lr_id", "se_id", "lr_inc", "se_inc", "lr_exc", "se_exc"});
    for (const SweepRow& row : table.rows) {
      std::vector<std::string> fields{std::to_string(row.size)};
      for (const LrEstimate& e : row.lr) {
        fields.push_back(format_double(e.lr));
        fields.push_back(format_double(e.mc_std_err.value_or(0.0)));
      }
      csv.row(fields);
    }
    run.write_csv("sweep.csv", csv);
    json asym = json::object();
    for (Conclusion c : kAllConclusions) {
      const auto& a = table.asymptote[static_cast<int>(c)];
      asym[std::string(to_string(c))] = a ? json(*a) : json(nullptr);
    }
    result["sweep_asymptote"] = asym;
  }
  run.finish(result);
}

void run_scalar(const ScalarOptions& o, Run& run) {
  run.set("r", format_double(o.r));
  const auto grid = parse_grid(o.grid, "--grid");
  run.set("grid", o.grid);
  NormalGammaParams h1 = default_scalar_prior_h1(), h2 = default_scalar_prior_h2();
  if (!o.prior.empty()) std::tie(h1, h2) = parse_scenario_priors<NormalGammaParams>(run.load("prior", o.prior), o.prior);
  PerScenario<double> validation;
  if (!o.validation.empty()) validation = parse_scalar_validation(run.load("validation", o.validation), o.validation);
  const std::string& digest = run.seal();

  auto updated = [](const NormalGammaParams& p, const std::vector<double>& xs) {
    return xs.empty() ? p : update_normal_gamma(p, ScalarValidationSummary::from_values(xs));
  };
  const NormalGammaParams p1 = updated(h1, validation.h1);
  const NormalGammaParams p2 = updated(h2, validation.h2);

  CsvBuilder csv(digest, {"r", "density_h1", "density_h2", "lr_a"});
  for (const ScalarCurvePoint& pt : lr_curve(p1, p2, grid))
    csv.row({format_double(pt.r), format_double(pt.density_h1), format_double(pt.density_h2),
             format_double(pt.lr.lr)});
  run.write_csv("lr_curve.csv", csv);

  run.finish({{"r", o.r},
              {"lr", lr_for_scalar(o.r, p1, p2)},
              {"validation_n", {{"H1", validation.h1.size()}, {"H2", validation.h2.size()}}},
              {"prior", scenario_pair(h1, h2)},
              {"posterior", scenario_pair(p1, p2)}});
}

json domain_json(const QuadratureSpec& s) {
  return {{"shape", {s.a_lo, s.a_hi}}, {"rate", {s.b_lo, s.b_hi}}};
}

void run_interval(const IntervalOptions& o, Run& run) {
  IntervalSplit split{};
  if (o.log10_lo && o.log10_hi && !o.lo && !o.hi) {
    split = split_log10_interval(*o.log10_lo, *o.log10_hi);
    run.set("log10-lo", format_double(*o.log10_lo));
    run.set("log10-hi", format_double(*o.log10_hi));
  } else if (o.lo && o.hi && !o.log10_lo && !o.log10_hi) {
    split = split_interval({*o.lo, *o.hi});
    run.set("lo", format_double(*o.lo));
    run.set("hi", format_double(*o.hi));
  } else {
    throw InputError("interval", 0, "give either --lo/--hi or --log10-lo/--log10-hi");
  }
  const auto grid = parse_grid(o.width_grid, "--width-grid");
  if (grid.front() <= 0.0) throw InputError("--width-grid", 0, "widths must be positive");
  run.set("width-grid", o.width_grid);
  run.set("strict-boundary", o.strict_boundary ? "true" : "false");

  IntervalPrior prior;
  if (!o.prior.empty()) prior = parse_interval_prior(run.load("prior", o.prior), o.prior);
  PerScenario<IntervalSplit> validation;
  if (!o.validation.empty())
    validation = parse_interval_validation(run.load("validation", o.validation), o.validation);
  const std::string& digest = run.seal();

  auto updated = [](const NormalGammaParams& mid, const GammaConjParams& width,
                    const std::vector<IntervalSplit>& xs) {
    if (xs.empty()) return std::make_pair(mid, width);
    std::vector<double> ms, ws;
    for (const IntervalSplit& s : xs) {
      ms.push_back(s.midpoint);
      ws.push_back(s.width);
    }
    return std::make_pair(update_normal_gamma(mid, ScalarValidationSummary::from_values(ms)),
                          update_gamma_conj(width, WidthSummary::from_widths(ws)));
  };
  const auto [m1, w1] = updated(prior.mid_h1, prior.width_h1, validation.h1);
  const auto [m2, w2] = updated(prior.mid_h2, prior.width_h2, validation.h2);
  const WidthPredictive pred1(w1, fitted_width_domain(w1), o.strict_boundary);
  const WidthPredictive pred2(w2, fitted_width_domain(w2), o.strict_boundary);
  const IntervalLr lr = lr_for_interval(split, m1, m2, pred1, pred2);

  CsvBuilder csv(digest, {"w", "density_h1", "density_h2", "lr_w"});
  for (const WidthCurvePoint& pt : width_curve(pred1, pred2, grid))
    csv.row({format_double(pt.w), format_double(pt.density_h1), format_double(pt.density_h2),
             format_double(pt.lr_w.lr)});
  run.write_csv("width_curve.csv", csv);

  IntervalPrior posterior{m1, m2, w1, w2};
  run.finish({{"midpoint", split.midpoint},
              {"width", split.width},
              {"lr", lr.total},
              {"lr_midpoint", lr.midpoint},
              {"lr_width", lr.width},
              {"validation_n", {{"H1", validation.h1.size()}, {"H2", validation.h2.size()}}},
              {"boundary_mass_fraction", {{"H1", pred1.boundary_mass_fraction()},
                                          {"H2", pred2.boundary_mass_fraction()}}},
              {"domain", {{"H1", domain_json(pred1.spec())}, {"H2", domain_json(pred2.spec())}}},
              {"prior", prior},
              {"posterior", posterior}});
}

void run_two_expert(const TwoExpertOptions& o, Run& run) {
  if (o.x.empty()) throw InputError("--x", 0, "required");
  const Vec2 x = parse_pair(o.x, "--x");
  run.set("x", format_double(x(0)) + "," + format_double(x(1)));
  DfConvention conv;
  if (o.df_convention == "n0") conv = DfConvention::n0;
  else if (o.df_convention == "n0-1") conv = DfConvention::n0_minus_1;
  else throw InputError("--df-convention", 0, "expected n0 or n0-1");
  PriorVariant variant;
  if (o.prior_variant == "display") variant = PriorVariant::display;
  else if (o.prior_variant == "prose") variant = PriorVariant::prose;
  else throw InputError("--prior-variant", 0, "expected display or prose");
  run.set("df-convention", std::string(to_string(conv)));
  const auto sizes = parse_counts(o.sweep, "--sweep");
  run.set("sweep", join(sizes));

  auto [h1, h2] = two_expert_priors(variant);
  if (o.prior.empty())
    run.set("prior-variant", std::string(to_string(variant)));
  else
    std::tie(h1, h2) = parse_scenario_priors<NormalWishartParams>(run.load("prior", o.prior), o.prior);
  PerScenario<Vec2> validation;
  if (!o.validation.empty()) validation = parse_pair_validation(run.load("validation", o.validation), o.validation);
  const std::string& digest = run.seal();

  auto updated = [](const NormalWishartParams& p, const std::vector<Vec2>& xs) {
    return xs.empty() ? p : update_normal_wishart(p, PairedLrSummary::from_pairs(xs));
  };
  const NormalWishartParams p1 = updated(h1, validation.h1);
  const NormalWishartParams p2 = updated(h2, validation.h2);

  CsvBuilder csv(digest, {"m", "lr_a"});
  for (const PairSweepRow& row : pair_lr_sweep(x, h1, h2, worked_example_pair_data(), sizes, conv))
    csv.row({std::to_string(row.m), format_double(row.lr.lr)});
  run.write_csv("pair_sweep.csv", csv);

  run.finish({{"x", {x(0), x(1)}},
              {"lr", lr_for_pair(x, p1, p2, conv)},
              {"df_convention", to_string(conv)},
              {"validation_n", {{"H1", validation.h1.size()}, {"H2", validation.h2.size()}}},
              {"prior", scenario_pair(h1, h2)},
              {"posterior", scenario_pair(p1, p2)}});
}

void run_coin(const CoinOptions& o, Run& run) {
  const std::string seq = detail::trim(o.seq);
  TossSequence tosses;
  try {
    tosses = parse_tosses(seq);
  } catch (const DomainError& e) {
    throw InputError("--seq", 0, e.what());
  }
  run.set("seq", seq);
  run.seal();
  const CoinReport r = coin_report(tosses);
  run.finish({{"seq", seq},
              {"A", r.a},
              {"B", r.b},
              {"C", r.c},
              {"C_likelihood_weighted", r.c_likelihood_weighted}});
}

// ---------------------------------------------------------------- app ---

void add_common(CLI::App& sub, CommonOptions& c) {
  sub.add_option("--out", c.out, "Output directory")->capture_default_str();
  sub.add_option("--format", c.format, "Result format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  sub.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub.add_option("--samples", c.samples, "Accepted Monte Carlo samples")->capture_default_str();
  sub.add_option("--chunk-size", c.chunk_size, "Samples per deterministic chunk")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void build_app(CLI::App& app, Options& o) {
  app.require_subcommand(1);
  app.set_version_flag("--version", EVWEIGHT_VERSION);

  auto* cat = app.add_subcommand("categorical", "LR for an ID / inconclusive / exclusion conclusion");
  add_common(*cat, o.common);
  cat->add_option("--conclusion", o.categorical.conclusion, "id, inc or exc")->capture_default_str();
  cat->add_option("--validation", o.categorical.validation, "Validation counts (JSON or scenario,conclusion CSV)");
  cat->add_option("--prior", o.categorical.prior, "Dirichlet base concentrations (JSON)");
  cat->add_option("--sweep", o.categorical.sweep, "Study sizes n1,n2,... for sweep.csv");
  cat->add_option("--bins", o.categorical.bins, "Density grid bins per axis")->capture_default_str();

  auto* sc = app.add_subcommand("scalar", "LR for a reported log10 LR");
  add_common(*sc, o.common);
  sc->add_option("--r", o.scalar.r, "Reported log10 LR")->required();
  sc->add_option("--validation", o.scalar.validation, "scenario,log10_lr CSV");
  sc->add_option("--prior", o.scalar.prior, "Normal-gamma priors (JSON)");
  sc->add_option("--grid", o.scalar.grid, "Curve grid lo:hi:n")->capture_default_str();

  auto* iv = app.add_subcommand("interval", "LR for a reported LR interval");
  add_common(*iv, o.common);
  iv->add_option("--lo", o.interval.lo, "Lower LR bound");
  iv->add_option("--hi", o.interval.hi, "Upper LR bound");
  iv->add_option("--log10-lo", o.interval.log10_lo, "Lower log10 LR bound");
  iv->add_option("--log10-hi", o.interval.log10_hi, "Upper log10 LR bound");
  iv->add_option("--validation", o.interval.validation, "scenario,log10_lo,log10_hi CSV");
  iv->add_option("--prior", o.interval.prior, "Midpoint and width priors (JSON)");
  iv->add_option("--width-grid", o.interval.width_grid, "Curve grid lo:hi:n")->capture_default_str();
  iv->add_option("--strict-boundary", o.interval.strict_boundary,
                 "Fail when quadrature mass reaches the domain edge")
      ->capture_default_str();

  auto* te = app.add_subcommand("two-expert", "LR for log10 LRs reported by two experts");
  te->alias("two_expert");
  add_common(*te, o.common);
  te->add_option("--x", o.two_expert.x, "Reported pair a,b")->required();
  te->add_option("--validation", o.two_expert.validation, "scenario,log10_lr_b,log10_lr_c CSV");
  te->add_option("--prior", o.two_expert.prior, "Normal-Wishart priors (JSON)");
  te->add_option("--df-convention", o.two_expert.df_convention, "Predictive t degrees of freedom: n0 or n0-1")
      ->capture_default_str();
  te->add_option("--prior-variant", o.two_expert.prior_variant, "display or prose built-in priors")
      ->capture_default_str();
  te->add_option("--sweep", o.two_expert.sweep, "Validation sizes m for pair_sweep.csv")->capture_default_str();

  auto* coin = app.add_subcommand("coin", "Next-toss probabilities for three observers");
  add_common(*coin, o.common);
  coin->add_option("--seq", o.coin.seq, "Toss sequence, e.g. HHHHHTTT")->required();

  auto* rep = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  rep->add_option("manifest", o.replay.manifest, "manifest.json of an earlier run")->required();
  rep->add_option("--out", o.common.out, "Output directory")->capture_default_str();
}

int dispatch(CLI::App& app, Options& o, std::optional<std::string> expected_digest);

int replay(const Options& o) {
  const json m = parse_json_text(read_file(o.replay.manifest), o.replay.manifest);
  std::vector<std::string> args{"evweight"};
  std::string digest;
  try {
    args.push_back(m.at("command").get<std::string>());
    for (const auto& [flag, value] : m.at("settings").items()) {
      args.push_back("--" + flag);
      args.push_back(value.get<std::string>());
    }
    digest = m.at("digest").get<std::string>();
  } catch (const json::exception& e) {
    throw InputError(o.replay.manifest, 0, e.what());
  }
  if (args[1] == "replay") throw InputError(o.replay.manifest, 0, "cannot replay a replay");
  args.push_back("--out");
  args.push_back(o.common.out);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  CLI::App app{"evweight"};
  Options fresh;
  build_app(app, fresh);
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    throw InputError(o.replay.manifest, 0, std::string("recorded settings do not parse: ") + e.what());
  }
  return dispatch(app, fresh, digest);
}

int dispatch(CLI::App& app, Options& o, std::optional<std::string> expected_digest) {
  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "replay") return replay(o);
  Run run(name, o.common, std::move(expected_digest));
  if (name == "categorical") run_categorical(o.categorical, run, o.common.samples, o.common.seed);
  else if (name == "scalar") run_scalar(o.scalar, run);
  else if (name == "interval") run_interval(o.interval, run);
  else if (name == "two-expert") run_two_expert(o.two_expert, run);
  else if (name == "coin") run_coin(o.coin, run);
  std::cout << (std::filesystem::path(o.common.out) / "manifest.json").string() << "\n";
  return 0;
}

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "evweight: " << kind << ": " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recipient likelihood ratios for forensic expert opinions"};
  Options options;
  build_app(app, options);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }
  try {
    return dispatch(app, options, std::nullopt);
  } catch (const InputError& e) {
    return report("input error", e, kExitInput);
  } catch (const DomainError& e) {
    return report("invalid input", e, kExitInput);
  } catch (const std::filesystem::filesystem_error& e) {
    return report("file error", e, kExitInput);
  } catch (const IntractableConstraintError& e) {
    return report("intractable constraint", e, kExitNumerical);
  } catch (const ConvergenceError& e) {
    return report("convergence failure", e, kExitNumerical);
  } catch (const std::exception& e) {
    return report("numerical failure", e, kExitNumerical);
  }
}
