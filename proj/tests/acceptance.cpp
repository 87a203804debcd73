// Acceptance run: one PASS/FAIL line per criterion 1-8, tolerances pinned below.
// Usage: acceptance [N ...] runs only the listed criteria. Artifacts go to acceptance_out/.
// Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cgst/bench.hpp"

using namespace cgst;

namespace {

const std::string kOut = "acceptance_out";

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> notes;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void save(const std::string& name, const std::string& title, const std::vector<SweepRow>& rows) {
  const std::string csv = write_csv(rows);
  write_text_file(kOut + "/" + name + ".csv", csv);
  write_text_file(kOut + "/" + name + ".svg", render_svg(read_csv(csv), title));
}

std::vector<SweepRow> series(const std::vector<SweepRow>& rows, const std::string& name) {
  std::vector<SweepRow> out;
  for (const auto& r : rows)
    if (r.series == name) out.push_back(r);
  return out;
}

RunConfig base(double tau_c, double c, const std::string& model) {
  RunConfig cfg;
  cfg.noise.phase = {tau_c, c};
  cfg.model = model_from_string(model);
  cfg.seed = 1;
  return cfg;
}

// Largest decrease of log10(mean) between consecutive rows; returns the x where it lands.
std::pair<double, double> largest_drop(const std::vector<SweepRow>& rows) {
  double best = 0.0, at = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double d = std::log10(rows[i - 1].stats.mean) - std::log10(rows[i].stats.mean);
    if (d > best) {
      best = d;
      at = rows[i].x;
    }
  }
  return {at, best};
}

// ---- 1: shot scaling -----------------------------------------------------------------------

constexpr double kShotSlopeLo = -0.65, kShotSlopeHi = -0.35;

Outcome criterion1() {
  Outcome o;
  o.pass = true;
  RunConfig cfg = base(5e-6, 2e3, "markov");
  cfg.repeats = 20;
  cfg.sweep.shots = {100, 1000, 10000};
  std::vector<SweepRow> all;
  for (int p : {4, 16}) {
    cfg.p_max = p;
    auto s = sweep_shots(cfg);
    for (auto& r : s.rows) r.series = "p_max=" + std::to_string(p);
    all.insert(all.end(), s.rows.begin(), s.rows.end());
    const double m = s.slope->slope;
    o.pass = o.pass && m >= kShotSlopeLo && m <= kShotSlopeHi;
    o.summary += (o.summary.empty() ? "" : ", ") + ("slope(p_max=" + std::to_string(p) + ") = " + fmt(m));
  }
  save("c1_shots", "distance vs shots per circuit", all);
  o.summary += " in [" + fmt(kShotSlopeLo) + ", " + fmt(kShotSlopeHi) + "]";
  return o;
}

// ---- 2: depth scaling and saturation --------------------------------------------------------

constexpr double kDepthSlopeLo = -1.2, kDepthSlopeHi = -0.8;
constexpr double kSaturationBands = 2.0;

std::vector<int> depths_to(int p) {
  std::vector<int> v;
  for (int q = 1; q <= p; q *= 2) v.push_back(q);
  return v;
}

Outcome criterion2() {
  Outcome o;
  // 1/Gamma1 = 714 at the pi pulse: tau_c from the low-noise depth figure, c scaled to this drive.
  RunConfig cfg = base(5e-4, 2.7636e11, "markov");
  cfg.truth = TruthModel::Fitted;
  cfg.shots = 1000;
  cfg.repeats = 100;
  cfg.sweep.p_max = depths_to(4096);
  const double sat = saturation_depth(make_experiment(cfg));
  const auto s = sweep_depth(cfg);
  save("c2_depth", "distance vs depth (well-specified Markovian)", s.rows);
  const LineFit line = *s.slope;
  const bool slope_ok = line.slope >= kDepthSlopeLo && line.slope <= kDepthSlopeHi;
  bool sat_ok = true;
  int beyond = 0;
  std::string devs;
  for (const auto& r : s.rows) {
    if (r.x <= sat) continue;
    ++beyond;
    const double dev = std::log10(r.stats.mean) - line.at(r.x);
    const double need = kSaturationBands * log_band_width(r.stats);
    sat_ok = sat_ok && dev > need;
    devs += (devs.empty() ? "" : ", ") + ("p=" + fmt(r.x) + ": " + fmt(dev, 3) + " > " + fmt(need, 3));
  }
  sat_ok = sat_ok && beyond >= 2;
  o.pass = slope_ok && sat_ok;
  o.summary = "1/Gamma1 = " + fmt(sat) + ", slope over 2 <= p <= 1/Gamma1 = " + fmt(line.slope) + " in [" +
              fmt(kDepthSlopeLo) + ", " + fmt(kDepthSlopeHi) + "]; upward deviation (dex) vs 2 band widths " + devs;
  o.notes.push_back("data from the Markovian parametrisation of the filtered integrals (truth 'fitted'); the 1/p "
                    "argument G^p = G(p Gamma1, p Delta1) assumes this model");

  // Same noise, full non-Markovian truth and fit: delta2 at the pi/2 pulse is not amplified by
  // single-gate germs, so its depth-1 error sets a floor.
  RunConfig full = cfg;
  full.truth = TruthModel::Full;
  full.model = model_from_string("nonmarkov");
  full.repeats = 20;
  const auto f = sweep_depth(full);
  save("c2_depth_full_truth", "distance vs depth (full truth, non-Markovian fit)", f.rows);
  o.notes.push_back("analysis: full analytic truth with the non-Markovian fit gives slope " + fmt(f.slope->slope) +
                    " over the same range; delta2(t_pi/2) ~ Gamma1(t_pi/2) is only estimated at depth 1");
  return o;
}

// ---- 3: non-Markovian ordering ---------------------------------------------------------------

Outcome criterion3() {
  Outcome o;
  RunConfig cfg = base(5e-4, 1.6e11, "nonmarkov");
  cfg.p_max = 16;
  cfg.shots = 100000;
  cfg.repeats = 100;
  cfg.sweep.tau_c = {5e-7, 1e-6, 5e-6, 1e-5, 5e-5, 1e-4, 5e-4};
  const auto s = sweep_tau_c(cfg);
  save("c3_tauc", "Markovian vs non-Markovian fits over tau_c", s.rows);
  const auto mk = series(s.rows, "markov"), nm = series(s.rows, "nonmarkov");
  int worse = 0;
  for (std::size_t i = 0; i < mk.size(); ++i)
    if (nm[i].stats.mean > mk[i].stats.mean) ++worse;
  const auto& a = mk.back().stats;
  const auto& b = nm.back().stats;
  // Bands of the mean in log10 units, half a band width on either side of each mean.
  const double sep = std::log10(a.mean / b.mean);
  const double need = 0.5 * (log_band_width(a) + log_band_width(b));
  const double span = std::log10(cfg.sweep.tau_c.back() / cfg.sweep.tau_c.front());
  o.pass = worse == 0 && sep > need && mk.size() >= 6 && span >= 3.0 - 1e-12;
  o.summary = std::to_string(mk.size()) + " tau_c points over " + fmt(span, 3) + " decades, non-Markovian worse at " +
              std::to_string(worse) + "; at tau_c = " + fmt(mk.back().x) + " log10(markov/nonmarkov) = " + fmt(sep, 3) +
              " > mean-band half-widths " + fmt(need, 3);
  o.notes.push_back("single-estimate 99% ranges at the largest tau_c: markov [" + fmt(a.lo) + ", " + fmt(a.hi) +
                    "], nonmarkov [" + fmt(b.lo) + ", " + fmt(b.hi) + "]" +
                    (b.hi < a.lo ? " (disjoint)" : " (overlapping)"));
  return o;
}

// ---- 4: circuit-count drop -------------------------------------------------------------------

constexpr int kParamDropAt = 11;
constexpr int kGeneralCountLo = 67, kGeneralCountHi = 90;

Outcome criterion4() {
  Outcome o;
  RunConfig cfg = base(5e-4, 1.6e11, "markov");
  cfg.p_max = 16;
  cfg.shots = 100000;
  cfg.repeats = 20;
  cfg.distance_includes_spam = true;
  const auto p = sweep_circuits(cfg);
  save("c4_circuits_parametrised", "distance vs circuits (parametrised)", p.rows);
  const auto [p_at, p_drop] = largest_drop(p.rows);

  // Greedy general templates at depth 1: first count at which the Jacobian reaches the pool rank.
  const GateSet ideal = ideal_gate_set(cfg.pulses);
  const Design pool = general_design(ideal, {1}, kGeneralCountHi);
  const MatX jac = general_probability_jacobian(to_ptms(ideal), pool.circuits);
  const int max_rank = numerical_rank(jac, 1e-7);
  int full_at = 0;
  for (int n = 1; n <= jac.rows() && full_at == 0; ++n)
    if (numerical_rank(jac.topRows(n), 1e-7) == max_rank) full_at = n;

  RunConfig g = cfg;
  g.model = model_from_string("general");
  g.p_max = 1;
  g.repeats = 10;
  g.sweep.circuits = {10, 20, 30, 40, 50, full_at - 1, full_at, 60, 67, 72, 80, 90};
  std::sort(g.sweep.circuits.begin(), g.sweep.circuits.end());
  g.sweep.circuits.erase(std::unique(g.sweep.circuits.begin(), g.sweep.circuits.end()), g.sweep.circuits.end());
  const auto gs = sweep_circuits(g);
  save("c4_circuits_general", "distance vs circuits (general)", gs.rows);
  const auto [g_at, g_drop] = largest_drop(gs.rows);

  const bool param_ok = static_cast<int>(p_at) == kParamDropAt;
  const bool general_ok = static_cast<int>(g_at) == full_at && full_at >= kGeneralCountLo && full_at <= kGeneralCountHi;
  o.pass = param_ok && general_ok;
  o.summary = "parametrised drop at " + fmt(p_at) + " circuits (" + fmt(p_drop, 3) + " dex, want " +
              std::to_string(kParamDropAt) + "); general drop at " + fmt(g_at) + " (" + fmt(g_drop, 3) +
              " dex), greedy full-rank count " + std::to_string(full_at) + " (rank " + std::to_string(max_rank) +
              ", want count in [" + std::to_string(kGeneralCountLo) + ", " + std::to_string(kGeneralCountHi) + "])";
  if (!param_ok)
    o.notes.push_back("analysis: the gates-plus-SPAM distance drops once the 4 filtered Markovian parameters are "
                      "identified; with depths 1..16 per template that happens at 6 templates. Ideal SPAM sits on the "
                      "Bloch-ball and POVM boundaries, so the 7 SPAM-targeted circuits are not needed to pin it");
  if (!general_ok)
    o.notes.push_back("analysis: the TP general model has 67 parameters but a 12-dimensional gauge, so the "
                      "probability Jacobian saturates at rank " + std::to_string(max_rank) +
                      " (55 with deeper circuits). A rank-greedy design reaches it in " + std::to_string(full_at) +
                      " circuits; no count in [67, 90] is singled out by the rank");
  return o;
}

// ---- 5: head-to-head at equal budget ---------------------------------------------------------

constexpr double kMinRatio = 3.0;

Outcome criterion5() {
  Outcome o;
  RunConfig cfg = base(5e-6, 2e3, "markov");
  cfg.p_max = 16;
  cfg.repeats = 20;
  cfg.sweep.shots = {100, 1000, 10000};
  const auto s = compare_general(cfg);
  save("c5_compare_general", "parametrised vs general at equal total shots", s.rows);
  const auto par = series(s.rows, "markov"), gen = series(s.rows, "general");
  double worst = 1e300;
  std::string ratios;
  for (std::size_t i = 0; i < par.size(); ++i) {
    const double r = gen[i].stats.mean / par[i].stats.mean;
    worst = std::min(worst, r);
    ratios += (ratios.empty() ? "" : ", ") + fmt(r, 3) + " at " + fmt(par[i].total_shots) + " shots";
  }
  o.pass = worst >= kMinRatio;
  o.summary = "general / parametrised mean distance: " + ratios + "; min " + fmt(worst, 3) + " >= " + fmt(kMinRatio);
  return o;
}

// ---- 6: depth-reallocation advantage ---------------------------------------------------------

Outcome criterion6() {
  Outcome o;
  RunConfig cfg = base(5e-6, 2e3, "markov");
  cfg.shots = 1000;
  cfg.repeats = 20;
  cfg.sweep.p_max = depths_to(512);
  auto depth = sweep_depth(cfg);
  RunConfig sc = cfg;
  sc.p_max = 16;
  sc.sweep.shots = {100, 1000, 10000};
  auto shots = sweep_shots(sc);
  std::vector<double> xd, yd, xs, ys;
  for (auto& r : depth.rows) {
    r.series = "add depths";
    xd.push_back(r.total_shots);
    yd.push_back(r.stats.mean);
  }
  for (auto& r : shots.rows) {
    r.series = "add shots";
    xs.push_back(r.total_shots);
    ys.push_back(r.stats.mean);
  }
  std::vector<SweepRow> both = depth.rows;
  both.insert(both.end(), shots.rows.begin(), shots.rows.end());
  for (auto& r : both) {
    r.x = r.total_shots;
    r.variable = "total_shots";
  }
  save("c6_reallocation", "distance vs total shots", both);
  const double md = loglog_fit(xd, yd).slope, ms = loglog_fit(xs, ys).slope;
  o.pass = md < ms;
  o.summary = "slope vs total shots: adding depths 1..512 at N=1000 " + fmt(md) + ", adding shots at p_max=16 " +
              fmt(ms) + " (depth must be steeper)";
  return o;
}

// ---- 7: oracle equivalence -------------------------------------------------------------------

constexpr double kFreqTimeRel = 1e-6;
constexpr double kMcSigmas = 3.0;
constexpr double kPowerTol = 1e-10;

QuadConfig tight() {
  QuadConfig q;
  q.abs_tol = 1e-12;
  q.rel_tol = 1e-10;
  return q;
}

double rel_diff(const FilteredParams& a, const FilteredParams& b) {
  const double fa[] = {a.gamma1, a.gamma2, a.delta1, a.delta2, a.delta_gamma1};
  const double fb[] = {b.gamma1, b.gamma2, b.delta1, b.delta2, b.delta_gamma1};
  double num = 0.0, den = 0.0;
  for (int k = 0; k < 5; ++k) {
    num = std::max(num, std::abs(fa[k] - fb[k]));
    den = std::max(den, std::abs(fb[k]));
  }
  return den > 0.0 ? num / den : num;
}

Outcome criterion7() {
  Outcome o;
  const PulseSet pulses = PulseSet::from_rabi(2.0 * kPi * 50e3);
  const QuadConfig q = tight();

  // (a) frequency vs time domain. S and C are related by C(s) = (1/2pi) int S(w) e^{iws} dw.
  struct Psd {
    std::string name;
    std::function<double(double)> s;
    double scale;
    CovarianceFn c;
    std::optional<OUParams> ou;  // also checks the amplitude integral
  };
  const auto lor = [](OUParams p) { return [p](double w) { return psd_eval(PSDModel{LorentzianPSD{p}}, w); }; };
  const OUParams a{5e-6, 2e3}, b{5e-7, 4e5}, c{5e-4, 2e4}, d1{5e-6, 2e13}, d2{5e-5, 1e11};
  const double gv = 1e7, gs = 2e-6;
  const std::vector<Psd> psds = {
      {"OU(5e-6, 2e3)", lor(a), 1.0 / a.tau_c, ou_covariance_fn(a), a},
      {"OU(5e-7, 4e5)", lor(b), 1.0 / b.tau_c, ou_covariance_fn(b), b},
      {"OU(5e-4, 2e4)", lor(c), 1.0 / c.tau_c, ou_covariance_fn(c), c},
      {"OU(5e-6, 2e13) + OU(5e-5, 1e11)", [&](double w) { return lor(d1)(w) + lor(d2)(w); }, 1.0 / d1.tau_c,
       [&](double s) { return ou_covariance_fn(d1)(s) + ou_covariance_fn(d2)(s); }, std::nullopt},
      {"Gaussian(sigma 2e-6)", [=](double w) { return gv * gs * std::sqrt(2.0 * kPi) * std::exp(-0.5 * w * w * gs * gs); },
       1.0 / gs, [=](double s) { return gv * std::exp(-0.5 * s * s / (gs * gs)); }, std::nullopt}};
  double worst_ft = 0.0;
  std::string worst_name;
  for (const auto& p : psds)
    for (auto id : kAllGates) {
      const PulseSpec pulse = pulses.pulse(id);
      FilteredParams f, t;
      if (p.ou) {
        f = filtered_params_freq(PSDModel{LorentzianPSD{*p.ou}}, pulse, q, PSDModel{LorentzianPSD{*p.ou}});
        t = filtered_params_time(p.c, pulse, q, p.c);
      } else {
        f = filtered_params_freq(p.s, p.scale, pulse, q);
        t = filtered_params_time(p.c, pulse, q);
      }
      const double r = rel_diff(f, t);
      if (r > worst_ft) {
        worst_ft = r;
        worst_name = p.name;
      }
    }
  const bool ft_ok = worst_ft < kFreqTimeRel;

  // (b) Monte Carlo channels at 1e5 trajectories, seed fixed before looking at results.
  struct McSetting {
    std::string name;
    OUParams phase;
    std::optional<OUParams> amp;
  };
  const std::vector<McSetting> mcs = {{"phase OU(5e-6, 2.2366e13)", {5e-6, 2.2366e13}, std::nullopt},
                                      {"phase OU(5e-7, 1e15)", {5e-7, 1e15}, std::nullopt},
                                      {"phase + amplitude OU(5e-6, 2.2366e13)", {5e-6, 2.2366e13}, OUParams{5e-6, 2.2366e13}}};
  bool mc_ok = true;
  std::string mc_line;
  std::string mc_csv;
  for (const auto& m : mcs) {
    RunConfig cfg = base(m.phase.tau_c, m.phase.c, "markov");
    cfg.noise.amplitude = m.amp;
    cfg.noise.n_traj = 100000;
    const auto rows = mc_validate(cfg);
    double zmax = 0.0;
    int over = 0;
    for (const auto& r : rows) {
      zmax = std::max(zmax, r.z);
      if (r.z > kMcSigmas) ++over;
    }
    mc_ok = mc_ok && over == 0;
    mc_line += (mc_line.empty() ? "" : "; ") + m.name + " max z " + fmt(zmax, 3);
    mc_csv += "# " + m.name + "\n" + write_mc_csv(rows);
  }
  write_text_file(kOut + "/c7_mc.csv", mc_csv);

  // (c) G(fp, area)^p = G(p fp, p area) for Markovian integrals.
  double worst_pow = 0.0;
  NoiseConfig nc;
  nc.phase = {5e-6, 2.2366e13};
  const GateSet an = analytic_gate_set(nc, pulses, ModelVariant::Markovian);
  for (const FilteredParams& fp : {FilteredParams{1.3e-3, 0, 2.1e-3, 0, 0}, an.fp_pi, an.fp_half})
    for (double area : {kPi, kPi / 2})
      for (Phase ph : {Phase::Zero, Phase::HalfPi, Phase::Pi, Phase::ThreeHalfPi}) {
        const auto gate = [&](double k) {
          return chi_to_ptm<double>(process_matrix(
              ph, chi_blocks<double>(k * area, k * fp.gamma1, k * fp.gamma2, k * fp.delta1, k * fp.delta2, k * fp.delta_gamma1)));
        };
        const PTM g = gate(1.0);
        PTM power = PTM::Identity();
        for (int p = 1; p <= 64; ++p) {
          power = g * power;
          worst_pow = std::max(worst_pow, (power - gate(p)).cwiseAbs().maxCoeff());
        }
      }
  const bool pow_ok = worst_pow < kPowerTol;

  o.pass = ft_ok && mc_ok && pow_ok;
  o.summary = "freq vs time max rel " + fmt(worst_ft, 3) + " (" + worst_name + ") < " + fmt(kFreqTimeRel) +
              "; MC " + mc_line + " (<= " + fmt(kMcSigmas) + "); gate power max dev " + fmt(worst_pow, 3) + " < " +
              fmt(kPowerTol);

  // Outside the closed form's validity (tau_c^3 c >> 1) the second-order cumulant channel is biased.
  RunConfig qs = base(5e-4, 1.6e11, "markov");
  qs.noise.n_traj = 100000;
  double zq = 0.0, dq = 0.0;
  for (const auto& r : mc_validate(qs))
    if (r.z > zq) {
      zq = r.z;
      dq = std::abs(r.mc - r.closed_form);
    }
  o.notes.push_back("analysis (not part of the pass test): quasi-static OU(5e-4, 1.6e11), tau_c^3 c = 20, max z " +
                    fmt(zq, 3) + " with |MC - closed form| = " + fmt(dq, 3) +
                    " at that entry; the gap is of order Gamma1^2 and stays under time-step refinement");
  return o;
}

// ---- 8: identifiability and gauge ------------------------------------------------------------

constexpr double kMultiStartTol = 1e-6;
constexpr double kGaugeCostTol = 1e-10;
constexpr double kSpectrumTol = 1e-10;

std::vector<double> sorted_eigs(const PTM& g) {
  Eigen::EigenSolver<PTM> es(g);
  std::vector<double> v;
  for (int i = 0; i < 4; ++i) {
    v.push_back(es.eigenvalues()(i).real());
    v.push_back(std::abs(es.eigenvalues()(i).imag()));
  }
  std::sort(v.begin(), v.end());
  return v;
}

Outcome criterion8() {
  Outcome o;
  const PulseSet pulses = PulseSet::from_rabi(2.0 * kPi * 50e3);
  GateSet truth = ideal_gate_set(pulses);
  truth.fp_pi = {3e-3, 0, 2e-3, 0, 0};
  truth.fp_half = {1.5e-3, 0, 1e-3, 0, 0};
  Design d = select_fiducial_pairs(ideal_gate_set(pulses), ModelVariant::Markovian);
  d.depth_schedule = depth_schedule(4);
  FitConfig fc;
  fc.variant = ModelVariant::Markovian;
  fc.depth_schedule = d.depth_schedule;
  const auto tp = to_ptms(truth);
  const auto obs = exact_observations(tp, d.all_circuits());
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  // Starts perturbed around the ideal set.
  double worst_start = 0.0;
  for (int s = 0; s < 20; ++s) {
    GateSet init = ideal_gate_set(pulses);
    init.r = Vec3(0.1 * u(rng), 0.1 * u(rng), 0.9 + 0.1 * u(rng));
    init.e = Vec4d(1.0 + 0.05 * u(rng), 0.1 * u(rng), 0.1 * u(rng), 0.9 + 0.05 * u(rng));
    init.fp_pi = {5e-3 * (1 + u(rng)), 0, 1e-2 * u(rng), 0, 0};
    init.fp_half = {5e-3 * (1 + u(rng)), 0, 1e-2 * u(rng), 0, 0};
    project_feasible(init);
    const auto r = mle_fit(obs, fc, init);
    worst_start = std::max(worst_start, (r.theta - pack(truth)).cwiseAbs().maxCoeff());
  }

  // Starts spread over the SPAM set: exact fits are either the truth or a discrete gauge image of it.
  int literal = 0, image = 0, stuck = 0;
  double worst_image_gauge = 0.0;
  for (int s = 0; s < 20; ++s) {
    GateSet init = ideal_gate_set(pulses);
    init.r = Vec3(u(rng), u(rng), u(rng)) * 0.55;
    init.e = Vec4d(1.0 + 0.2 * u(rng), 0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng));
    init.fp_pi = {2.5e-3 * (1 + u(rng)), 0, 5e-3 * u(rng), 0, 0};
    init.fp_half = {2.5e-3 * (1 + u(rng)), 0, 5e-3 * u(rng), 0, 0};
    project_feasible(init);
    const auto r = mle_fit(obs, fc, init);
    if (r.final_cost > 1.0) {
      ++stuck;
      continue;
    }
    worst_image_gauge = std::max(worst_image_gauge, gauge_optimize(r.ptms, tp).cost);
    ((r.theta - pack(truth)).cwiseAbs().maxCoeff() < kMultiStartTol ? literal : image)++;
  }

  // Constructed gauge orbits.
  double worst_gauge = 0.0;
  std::normal_distribution<double> n(0.0, 0.3);
  for (int k = 0; k < 10; ++k) {
    Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
    for (int r = 1; r < 4; ++r)
      for (int c = 0; c < 4; ++c) t(r, c) += n(rng);
    worst_gauge = std::max(worst_gauge, gauge_optimize(apply_gauge(tp, t), tp).cost);
  }

  // Linear GST spectra.
  double worst_spec = 0.0;
  NoiseConfig nc;
  nc.phase = {5e-6, 2e13};
  for (auto v : {ModelVariant::Markovian, ModelVariant::NonMarkovian}) {
    const auto g = to_ptms(analytic_gate_set(nc, pulses, v));
    const auto est = linear_gst(linear_gst_inputs(g));
    for (std::size_t i = 0; i < 5; ++i) {
      const auto ea = sorted_eigs(est.gates[i]), eb = sorted_eigs(g.gates[i]);
      for (std::size_t k = 0; k < ea.size(); ++k) worst_spec = std::max(worst_spec, std::abs(ea[k] - eb[k]));
    }
  }

  o.pass = worst_start < kMultiStartTol && worst_gauge < kGaugeCostTol && worst_spec < kSpectrumTol;
  o.summary = "20 perturbed starts max |theta - truth| " + fmt(worst_start, 3) + " < " + fmt(kMultiStartTol) +
              "; 10 gauge orbits max cost " + fmt(worst_gauge, 3) + " < " + fmt(kGaugeCostTol) +
              "; linear GST max spectrum error " + fmt(worst_spec, 3) + " < " + fmt(kSpectrumTol);
  o.notes.push_back("analysis: 20 starts spread over the SPAM set end on the truth " + std::to_string(literal) +
                    "x, on an exact gauge image " + std::to_string(image) + "x (max gauge cost " +
                    fmt(worst_image_gauge, 3) + "), stalled " + std::to_string(stuck) +
                    "x. The images are (r, e_vec) -> (-r, -e_vec), i.e. diag(1,-1,-1,-1), which commutes with every "
                    "unital PTM, sometimes composed with delta1 shifts of 2 pi. With the truth's SPAM on the Bloch-ball "
                    "and POVM boundaries the constraints remove the continuous diag(1,l,l,l) gauge, not this discrete one");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<Outcome (*)(), double>> criteria = {
      {criterion1, 600}, {criterion2, 900}, {criterion3, 1800}, {criterion4, 1200},
      {criterion5, 1800}, {criterion6, 1800}, {criterion7, 1200}, {criterion8, 600}};
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!pick.empty() && !pick.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].first();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= criteria[i].second;
    const bool pass = o.pass && in_time;
    all_pass = all_pass && pass;
    std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << o.summary << "  [" << fmt(secs, 3)
              << " s, budget " << fmt(criteria[i].second) << " s" << (in_time ? "" : ", over budget") << "]\n";
    for (const auto& n : o.notes) std::cout << "    " << n << "\n";
    std::cout.flush();
  }
  return all_pass ? 0 : 1;
}
