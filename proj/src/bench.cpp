#include "cgst/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace cgst {

// ---- Statistics ------------------------------------------------------------------------------

namespace {

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  const double w = pos - static_cast<double>(i);
  return sorted[i] * (1.0 - w) + sorted[i + 1] * w;
}

}  // namespace

BandStats band_stats(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::InvalidParameter, "no values for band statistics");
  std::sort(values.begin(), values.end());
  BandStats s;
  s.n = static_cast<long>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.lo = percentile(values, 0.005);
  s.hi = percentile(values, 0.995);
  return s;
}

double log_band_width(const BandStats& s) {
  constexpr double tiny = 1e-300;
  return (std::log10(std::max(s.hi, tiny)) - std::log10(std::max(s.lo, tiny))) /
         std::sqrt(static_cast<double>(std::max<long>(s.n, 1)));
}

double LineFit::at(double x) const { return intercept + slope * std::log10(x); }

LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "slope fit needs paired points");
  if (x.size() < 2) throw Error(ErrorKind::InvalidParameter, "slope fit needs at least two points");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorKind::InvalidParameter, "log-log fit needs positive points");
    mx += std::log10(x[i]) / n;
    my += std::log10(y[i]) / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log10(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log10(y[i]) - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::InvalidParameter, "slope fit needs distinct x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.n_points = x.size();
  return f;
}

// ---- CSV -------------------------------------------------------------------------------------

namespace {

constexpr const char* kCsvHeader = "series,variable,x,mean_distance,p0.5,p99.5,n_repeats,seed,config_hash,total_shots";

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, "bad number '" + s + "' in CSV");
  }
}

}  // namespace

std::string write_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    if (r.series.find(',') != std::string::npos || r.variable.find(',') != std::string::npos)
      throw Error(ErrorKind::InvalidParameter, "CSV labels must not contain commas");
    out += r.series + "," + r.variable + "," + num(r.x) + "," + num(r.stats.mean) + "," + num(r.stats.lo) + "," +
           num(r.stats.hi) + "," + std::to_string(r.stats.n) + "," + std::to_string(r.seed) + "," + r.config_hash +
           "," + num(r.total_shots) + "\n";
  }
  return out;
}

std::vector<SweepRow> read_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw Error(ErrorKind::Parse, "unexpected CSV header");
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 10) throw Error(ErrorKind::Parse, "CSV row needs 10 fields: " + line);
    SweepRow r;
    r.series = f[0];
    r.variable = f[1];
    r.x = parse_double(f[2]);
    r.stats.mean = parse_double(f[3]);
    r.stats.lo = parse_double(f[4]);
    r.stats.hi = parse_double(f[5]);
    r.stats.n = std::stol(f[6]);
    r.seed = std::stoull(f[7]);
    r.config_hash = f[8];
    r.total_shots = parse_double(f[9]);
    rows.push_back(r);
  }
  return rows;
}

// ---- SVG -------------------------------------------------------------------------------------

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string render_svg(const std::vector<SweepRow>& rows, const std::string& title) {
  constexpr double width = 640, height = 420, left = 70, right = 150, top = 40, bottom = 50;
  constexpr double tiny = 1e-300;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::vector<std::string> order;
  std::map<std::string, std::vector<const SweepRow*>> by_series;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& r : rows) {
    if (!by_series.count(r.series)) order.push_back(r.series);
    by_series[r.series].push_back(&r);
    const double lx = std::log10(std::max(r.x, tiny));
    x0 = std::min(x0, lx);
    x1 = std::max(x1, lx);
    for (double v : {r.stats.lo, r.stats.hi, r.stats.mean}) {
      if (!(v > 0.0)) continue;
      y0 = std::min(y0, std::log10(v));
      y1 = std::max(y1, std::log10(v));
    }
  }
  if (rows.empty() || !std::isfinite(y0)) {
    x0 = 0;
    x1 = 1;
    y0 = -1;
    y1 = 0;
  }
  x0 = std::floor(x0 * 2) / 2;
  x1 = std::ceil(x1 * 2) / 2;
  if (x1 <= x0) x1 = x0 + 1;
  y0 = std::floor(y0);
  y1 = std::ceil(y1);
  if (y1 <= y0) y1 = y0 + 1;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (std::log10(std::max(x, tiny)) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) {
    const double ly = std::clamp(std::log10(std::max(y, tiny)), y0, y1);
    return top + (y1 - ly) / (y1 - y0) * ph;
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fmt2(left) << "\" y=\"24\" font-size=\"14\">" << escape(title) << "</text>\n";
  os << "<rect x=\"" << fmt2(left) << "\" y=\"" << fmt2(top) << "\" width=\"" << fmt2(pw) << "\" height=\"" << fmt2(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(y0); d <= static_cast<int>(y1); ++d) {
    const double y = top + (y1 - d) / (y1 - y0) * ph;
    os << "<line x1=\"" << fmt2(left) << "\" y1=\"" << fmt2(y) << "\" x2=\"" << fmt2(left + pw) << "\" y2=\"" << fmt2(y)
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << fmt2(left - 8) << "\" y=\"" << fmt2(y + 4) << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(x0)); d <= static_cast<int>(std::floor(x1)); ++d) {
    const double x = left + (d - x0) / (x1 - x0) * pw;
    os << "<line x1=\"" << fmt2(x) << "\" y1=\"" << fmt2(top) << "\" x2=\"" << fmt2(x) << "\" y2=\"" << fmt2(top + ph)
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << fmt2(x) << "\" y=\"" << fmt2(top + ph + 18) << "\" text-anchor=\"middle\">1e" << d
       << "</text>\n";
  }
  const std::string xlabel = rows.empty() ? "x" : rows.front().variable;
  os << "<text x=\"" << fmt2(left + pw / 2) << "\" y=\"" << fmt2(height - 10) << "\" text-anchor=\"middle\">"
     << escape(xlabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << fmt2(top + ph / 2) << "\" transform=\"rotate(-90 16 " << fmt2(top + ph / 2)
     << ")\" text-anchor=\"middle\">mean trace distance</text>\n";

  for (std::size_t s = 0; s < order.size(); ++s) {
    const char* colour = palette[s % 6];
    auto pts = by_series[order[s]];
    std::stable_sort(pts.begin(), pts.end(), [](const SweepRow* a, const SweepRow* b) { return a->x < b->x; });
    std::string band, line;
    for (const auto* r : pts) band += fmt2(px(r->x)) + "," + fmt2(py(r->stats.hi)) + " ";
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) band += fmt2(px((*it)->x)) + "," + fmt2(py((*it)->stats.lo)) + " ";
    for (const auto* r : pts) line += fmt2(px(r->x)) + "," + fmt2(py(r->stats.mean)) + " ";
    os << "<polygon points=\"" << band << "\" fill=\"" << colour << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    os << "<polyline points=\"" << line << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n";
    for (const auto* r : pts)
      os << "<circle cx=\"" << fmt2(px(r->x)) << "\" cy=\"" << fmt2(py(r->stats.mean)) << "\" r=\"3\" fill=\"" << colour
         << "\"/>\n";
    const double ly = top + 16 + 18 * static_cast<double>(s);
    os << "<line x1=\"" << fmt2(left + pw + 12) << "\" y1=\"" << fmt2(ly) << "\" x2=\"" << fmt2(left + pw + 32)
       << "\" y2=\"" << fmt2(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"3\"/>\n";
    os << "<text x=\"" << fmt2(left + pw + 38) << "\" y=\"" << fmt2(ly + 4) << "\">" << escape(order[s]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// ---- Experiments -----------------------------------------------------------------------------

namespace {

ModelVariant truth_variant(const RunConfig& cfg) {
  return cfg.noise.amplitude ? ModelVariant::NonMarkovianAmplitude : ModelVariant::NonMarkovian;
}

Design amplified_general_templates(const PulseSet& pulses, int target_count = 0) {
  Design d = general_design(ideal_gate_set(pulses), {1}, target_count);
  d.amplified.assign(d.circuits.size(), true);
  return d;
}

}  // namespace

Experiment make_experiment(const RunConfig& cfg) {
  cfg.validate();
  Experiment ex;
  ex.cfg = cfg;
  const ModelVariant v = cfg.model.variant;
  ex.truth = analytic_gate_set(cfg.noise, cfg.pulses, cfg.truth == TruthModel::Fitted ? v : truth_variant(cfg), cfg.quad);
  ex.ideal = ideal_gate_set(cfg.pulses, v);
  ex.design = cfg.model.general ? amplified_general_templates(cfg.pulses) : select_fiducial_pairs(ex.ideal, v);
  ex.design.variant = v;
  ex.design.depth_schedule = depth_schedule(cfg.p_max);
  ex.design.shots_per_circuit = cfg.shots;
  return ex;
}

Design truncate_design(const Experiment& ex, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidParameter, "a design needs at least one circuit");
  Design d = ex.design;
  if (n <= d.circuits.size()) {
    d.circuits.resize(n);
    d.amplified.resize(n);
    return d;
  }
  const Design extra = amplified_general_templates(ex.cfg.pulses, static_cast<int>(n));
  std::set<std::string> have;
  for (const auto& c : d.circuits) have.insert(to_string(c));
  for (const auto& c : extra.circuits) {
    if (d.circuits.size() == n) break;
    if (have.insert(to_string(c)).second) {
      d.circuits.push_back(c);
      d.amplified.push_back(true);
    }
  }
  if (d.circuits.size() < n) throw Error(ErrorKind::DegenerateDesign, "not enough distinct templates");
  return d;
}

RepeatOutcome fit_and_score(const Experiment& ex, const Design& design, const Dataset& data) {
  RepeatOutcome out;
  const FitConfig fc = ex.cfg.fit_config(design.depth_schedule.back());
  if (ex.cfg.model.general) {
    out.fit = general_fit(design, data, fc);
    const GateSetPTMs truth = to_ptms(ex.truth);
    const GaugeResult g = gauge_optimize(out.fit.ptms, truth);
    out.fit.ptms = g.gauge_fixed;
    out.fit.theta = pack_general(g.gauge_fixed);
    out.distance = benchmark_distance(g.gauge_fixed, truth, ex.cfg.distance_includes_spam);
  } else {
    out.fit = mle_fit(design, data, fc, ex.ideal);
    out.distance = benchmark_distance(*out.fit.gate_set, ex.truth, ex.cfg.distance_includes_spam);
  }
  out.data = data;
  return out;
}

namespace {

Dataset sample(const Experiment& ex, const Design& design, std::uint64_t seed) {
  if (ex.cfg.data == DataSource::Analytic) return analytic_dataset(ex.truth, design, seed);
  return mc_dataset(ex.cfg.noise, ex.cfg.pulses, design, seed, ex.cfg.mc_mode);
}

}  // namespace

RepeatOutcome run_repeat(const Experiment& ex, const Design& design, std::uint64_t seed) {
  return fit_and_score(ex, design, sample(ex, design, seed));
}

std::uint64_t repeat_seed(std::uint64_t master, std::uint64_t point, std::uint64_t rep) {
  RngStream rng(master, {0xbe, point, rep});
  return rng.engine()();
}

namespace {

template <typename T>
std::vector<T> run_indexed(int n, const std::function<T(int)>& f) {
  std::vector<T> out(static_cast<std::size_t>(std::max(n, 0)));
  const int workers = std::max(1, std::min<int>(n, static_cast<int>(std::thread::hardware_concurrency())));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        out[static_cast<std::size_t>(i)] = f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

SweepRow make_row(const RunConfig& cfg, const std::string& series, const std::string& variable, double x,
                  const std::vector<double>& distances, double total_shots) {
  SweepRow r;
  r.series = series;
  r.variable = variable;
  r.x = x;
  r.stats = band_stats(distances);
  r.seed = cfg.seed;
  r.config_hash = config_hash(cfg);
  r.total_shots = total_shots;
  return r;
}

std::vector<double> repeat_distances(const Experiment& ex, const Design& design, std::uint64_t point) {
  return run_indexed<double>(ex.cfg.repeats, [&](int rep) {
    return run_repeat(ex, design, repeat_seed(ex.cfg.seed, point, static_cast<std::uint64_t>(rep))).distance;
  });
}

double total_shots(const Design& d) {
  return static_cast<double>(d.shots_per_circuit) * static_cast<double>(d.all_circuits().size());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

std::vector<double> parallel_map(int n, const std::function<double(int)>& f) { return run_indexed<double>(n, f); }

double saturation_depth(const Experiment& ex) {
  const double g = std::max(ex.truth.fp_pi.gamma1, ex.truth.fp_half.gamma1);
  return g > 0.0 ? 1.0 / g : std::numeric_limits<double>::infinity();
}

SweepOutput sweep_shots(const RunConfig& cfg) {
  const Experiment ex = make_experiment(cfg);
  SweepOutput out;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < cfg.sweep.shots.size(); ++i) {
    Design d = ex.design;
    d.shots_per_circuit = cfg.sweep.shots[i];
    const auto dist = repeat_distances(ex, d, i);
    out.rows.push_back(make_row(cfg, to_string(cfg.model), "shots", static_cast<double>(d.shots_per_circuit), dist,
                                total_shots(d)));
    xs.push_back(out.rows.back().x);
    ys.push_back(out.rows.back().stats.mean);
  }
  if (xs.size() >= 2) {
    out.slope = loglog_fit(xs, ys);
    out.note = "slope vs shots " + fmt(out.slope->slope);
  }
  return out;
}

SweepOutput sweep_depth(const RunConfig& cfg) {
  RunConfig base = cfg;
  base.p_max = *std::max_element(cfg.sweep.p_max.begin(), cfg.sweep.p_max.end());
  const Experiment ex = make_experiment(base);
  const double sat = saturation_depth(ex);
  SweepOutput out;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < cfg.sweep.p_max.size(); ++i) {
    Design d = ex.design;
    d.depth_schedule = depth_schedule(cfg.sweep.p_max[i]);
    const auto dist = repeat_distances(ex, d, i);
    out.rows.push_back(make_row(cfg, to_string(cfg.model), "p_max", cfg.sweep.p_max[i], dist, total_shots(d)));
    if (cfg.sweep.p_max[i] > 1 && cfg.sweep.p_max[i] <= sat) {
      xs.push_back(out.rows.back().x);
      ys.push_back(out.rows.back().stats.mean);
    }
  }
  if (xs.size() >= 2) {
    out.slope = loglog_fit(xs, ys);
    out.note = "slope vs p_max " + fmt(out.slope->slope) + " over " + std::to_string(xs.size()) +
               " points, saturation depth 1/Gamma1 = " + fmt(sat);
  }
  return out;
}

SweepOutput sweep_tau_c(const RunConfig& cfg) {
  SweepOutput out;
  int worse = 0;
  for (std::size_t i = 0; i < cfg.sweep.tau_c.size(); ++i) {
    RunConfig c = cfg;
    c.noise.phase.tau_c = cfg.sweep.tau_c[i];
    c.model = {false, ModelVariant::NonMarkovian};
    const Experiment nm = make_experiment(c);
    Experiment mk = nm;
    mk.cfg.model = {false, ModelVariant::Markovian};
    mk.ideal = ideal_gate_set(c.pulses, ModelVariant::Markovian);
    const auto pairs = run_indexed<std::pair<double, double>>(c.repeats, [&](int rep) {
      const Dataset data = sample(nm, nm.design, repeat_seed(c.seed, i, static_cast<std::uint64_t>(rep)));
      return std::make_pair(fit_and_score(mk, nm.design, data).distance, fit_and_score(nm, nm.design, data).distance);
    });
    std::vector<double> dm, dn;
    for (const auto& p : pairs) {
      dm.push_back(p.first);
      dn.push_back(p.second);
    }
    out.rows.push_back(make_row(cfg, "markov", "tau_c", c.noise.phase.tau_c, dm, total_shots(nm.design)));
    out.rows.push_back(make_row(cfg, "nonmarkov", "tau_c", c.noise.phase.tau_c, dn, total_shots(nm.design)));
    worse += out.rows.back().stats.mean > out.rows[out.rows.size() - 2].stats.mean;
  }
  out.note = "points where the non-Markovian fit is worse: " + std::to_string(worse);
  return out;
}

SweepOutput sweep_circuits(const RunConfig& cfg) {
  const Experiment ex = make_experiment(cfg);
  std::vector<int> counts = cfg.sweep.circuits;
  if (counts.empty())
    for (int n = 1; n <= static_cast<int>(ex.design.circuits.size()) + 5; ++n) counts.push_back(n);
  SweepOutput out;
  double best_drop = 0.0;
  int drop_at = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const Design d = truncate_design(ex, static_cast<std::size_t>(counts[i]));
    const auto dist = repeat_distances(ex, d, i);
    out.rows.push_back(make_row(cfg, to_string(cfg.model), "circuits", counts[i], dist, total_shots(d)));
    if (i > 0) {
      const double drop = std::log10(out.rows[i - 1].stats.mean) - std::log10(out.rows[i].stats.mean);
      if (drop > best_drop) {
        best_drop = drop;
        drop_at = counts[i];
      }
    }
  }
  out.note = "largest drop at " + std::to_string(drop_at) + " circuits (" + fmt(best_drop) +
             " decades); design size " + std::to_string(ex.design.circuits.size());
  return out;
}

SweepOutput compare_general(const RunConfig& cfg) {
  RunConfig pc = cfg, gc = cfg;
  if (pc.model.general) pc.model = {false, ModelVariant::Markovian};
  gc.model = {true, ModelVariant::Markovian};
  const Experiment ep = make_experiment(pc), eg = make_experiment(gc);
  SweepOutput out;
  std::string ratios;
  for (std::size_t i = 0; i < cfg.sweep.shots.size(); ++i) {
    Design dp = ep.design, dg = eg.design;
    dp.shots_per_circuit = cfg.sweep.shots[i];
    const double budget = total_shots(dp);
    dg.shots_per_circuit =
        std::max<long>(1, std::lround(budget / static_cast<double>(dg.all_circuits().size())));
    const auto a = repeat_distances(ep, dp, 2 * i);
    const auto b = repeat_distances(eg, dg, 2 * i + 1);
    out.rows.push_back(make_row(cfg, to_string(pc.model), "shots", static_cast<double>(dp.shots_per_circuit), a, budget));
    out.rows.push_back(make_row(cfg, "general", "shots", static_cast<double>(dp.shots_per_circuit), b, total_shots(dg)));
    ratios += (ratios.empty() ? "" : ", ") +
              fmt(out.rows.back().stats.mean / out.rows[out.rows.size() - 2].stats.mean);
  }
  out.note = "general / parametrised mean distance: " + ratios;
  return out;
}

std::vector<McValidationRow> mc_validate(const RunConfig& cfg) {
  cfg.validate();
  const GateSet an = analytic_gate_set(cfg.noise, cfg.pulses, truth_variant(cfg), cfg.quad);
  std::vector<McValidationRow> rows;
  for (auto id : kAllGates) {
    const auto ch = mc_gate_channel(cfg.noise, cfg.pulses.pulse(id), cfg.seed, {static_cast<std::uint64_t>(index(id))});
    const PTM ref = gate_ptm(an, id);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        McValidationRow row;
        row.gate = index(id) + 1;
        row.row = r;
        row.col = c;
        row.mc = ch.mean(r, c);
        row.stderr_ = ch.stderr_(r, c);
        row.closed_form = ref(r, c);
        const double diff = std::abs(row.mc - row.closed_form);
        row.z = diff <= 1e-12 ? 0.0 : diff / std::max(row.stderr_, 1e-300);
        rows.push_back(row);
      }
  }
  return rows;
}

std::string write_mc_csv(const std::vector<McValidationRow>& rows) {
  std::string out = "gate,row,col,mc,stderr,closed_form,z\n";
  for (const auto& r : rows)
    out += "G" + std::to_string(r.gate) + "," + std::to_string(r.row) + "," + std::to_string(r.col) + "," + num(r.mc) +
           "," + num(r.stderr_) + "," + num(r.closed_form) + "," + num(r.z) + "\n";
  return out;
}

}  // namespace cgst
