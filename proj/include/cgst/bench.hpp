#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cgst/io.hpp"

namespace cgst {

// ---- Statistics ------------------------------------------------------------------------------

// Mean and the 0.5 / 99.5 percentiles (linear interpolation between order statistics).
struct BandStats {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  long n = 0;
};
BandStats band_stats(std::vector<double> values);

// Width of the 99% band of a mean of `n` draws in log10 units: log10(hi / lo) / sqrt(n).
double log_band_width(const BandStats& s);

// Ordinary least squares of log10 y on log10 x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n_points = 0;
  double at(double x) const;  // log10 of the fitted y at x
};
LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

// ---- Sweep rows ------------------------------------------------------------------------------

struct SweepRow {
  std::string series;    // fitted model or sub-sweep label
  std::string variable;  // name of the swept quantity
  double x = 0.0;
  BandStats stats;
  std::uint64_t seed = 0;
  std::string config_hash;
  double total_shots = 0.0;
};

// Columns: series, point-variable name, point value, mean_distance, p0.5, p99.5, n_repeats, seed,
// config_hash, total_shots. Numbers are printed with 17 significant digits.
std::string write_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_csv(const std::string& text);

// Log-log plot of mean distance with its percentile band, one polyline per series. A pure function of
// the rows, so re-plotting a CSV reproduces the file byte for byte.
std::string render_svg(const std::vector<SweepRow>& rows, const std::string& title);

// ---- Experiments -----------------------------------------------------------------------------

// Everything a repeat needs that does not depend on the repeat: truth, ideal start, design.
struct Experiment {
  RunConfig cfg;
  GateSet truth;  // analytic gate set per cfg.truth
  GateSet ideal;  // start point in the fitted variant
  Design design;  // templates and depth schedule up to cfg.p_max
};

// Truth from the filtered integrals of cfg.noise; design from select_fiducial_pairs for parametrised
// models, the amplified depth-1 templates of general_design for the general model.
Experiment make_experiment(const RunConfig& cfg);

// Keeps the first n templates (design order for parametrised models, greedy order for the general
// one). Beyond the design size, further general_design templates not yet used are appended.
Design truncate_design(const Experiment& ex, std::size_t n);

struct RepeatOutcome {
  double distance = 0.0;  // per cfg.distance_includes_spam; general fits are gauge-optimised first
  FitResult fit;
  Dataset data;
};

// Samples data for `design` (analytic or Monte Carlo per cfg.data) with `seed` and fits it.
RepeatOutcome run_repeat(const Experiment& ex, const Design& design, std::uint64_t seed);
// Same, on given data.
RepeatOutcome fit_and_score(const Experiment& ex, const Design& design, const Dataset& data);

// Data seed of repeat `rep` at sweep point `point`, derived from the master seed.
std::uint64_t repeat_seed(std::uint64_t master, std::uint64_t point, std::uint64_t rep);

// Runs f(0..n-1) on up to hardware_concurrency threads; results in index order.
std::vector<double> parallel_map(int n, const std::function<double(int)>& f);

// 1 / max Gamma1 of the truth over the two durations (infinite without decay).
double saturation_depth(const Experiment& ex);

struct SweepOutput {
  std::vector<SweepRow> rows;
  std::optional<LineFit> slope;  // shots and depth sweeps
  std::string note;              // one-line summary for the console
};

// Mean distance vs shots per circuit at cfg.p_max.
SweepOutput sweep_shots(const RunConfig& cfg);
// Mean distance vs p_max over cfg.sweep.p_max at cfg.shots. The slope excludes p = 1 and p beyond
// the saturation depth.
SweepOutput sweep_depth(const RunConfig& cfg);
// Markovian and non-Markovian fits to the same datasets (non-Markovian design) over cfg.sweep.tau_c.
SweepOutput sweep_tau_c(const RunConfig& cfg);
// Mean distance vs number of templates for cfg.model.
SweepOutput sweep_circuits(const RunConfig& cfg);
// Parametrised (cfg.model.variant) against gauge-optimised general fits at equal total shots and
// equal p_max, over cfg.sweep.shots (shots per circuit of the parametrised design).
SweepOutput compare_general(const RunConfig& cfg);

// Monte Carlo gate channels against the closed form, entry by entry.
struct McValidationRow {
  int gate = 0;
  int row = 0;
  int col = 0;
  double mc = 0.0;
  double stderr_ = 0.0;
  double closed_form = 0.0;
  double z = 0.0;  // |mc - closed_form| / stderr_ (0 when both agree to 1e-12)
};
std::vector<McValidationRow> mc_validate(const RunConfig& cfg);
std::string write_mc_csv(const std::vector<McValidationRow>& rows);

}  // namespace cgst
