#include "cgst/estimation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>

namespace cgst {

namespace {

constexpr double kPClip = 1e-12;
// Floor on p and 1 - p in the least-squares weights. With the bare 1e-12 clip an ideal start
// (p = 0 or 1 exactly) weights its residuals by ~1e12 and the first step jumps far away.
constexpr double kLsWeightFloor = 1e-4;

double clip(double p) { return std::clamp(p, kPClip, 1.0 - kPClip); }

// p(1-p) with each factor floored, and its derivative in p.
std::pair<double, double> ls_variance(double q) {
  const double a = std::max(q, kLsWeightFloor), b = std::max(1.0 - q, kLsWeightFloor);
  const double da = q > kLsWeightFloor ? 1.0 : 0.0, db = 1.0 - q > kLsWeightFloor ? -1.0 : 0.0;
  return {a * b, da * b + a * db};
}

MatX pinv_tall(const MatX& m) {
  return (m.transpose() * m).inverse() * m.transpose();
}

PTM gate(const GateSetPTMs& g, GateId id) { return g.gates[static_cast<std::size_t>(index(id))]; }

PTM fiducial(const GateSetPTMs& g, const std::optional<GateId>& f) {
  return f ? gate(g, *f) : PTM::Identity();
}

// Probabilities of every observation, germ powers shared between circuits.
VecX probabilities(const GateSetPTMs& g, const std::vector<Observation>& obs) {
  std::map<std::pair<int, int>, PTM> powers;
  VecX p(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Circuit& c = obs[i].circuit;
    const auto key = std::make_pair(index(c.germ), c.reps);
    auto it = powers.find(key);
    if (it == powers.end()) it = powers.emplace(key, gate_power(gate(g, c.germ), c.reps)).first;
    Vec4d v = g.rho;
    if (c.prep) v = gate(g, *c.prep) * v;
    v = it->second * v;
    if (c.meas) v = gate(g, *c.meas) * v;
    p(static_cast<Eigen::Index>(i)) = g.meas.dot(v);
  }
  return p;
}

// x log(x / p), accurate near p = x when x - p is passed in directly.
double kl_term(double x, double p, double x_minus_p) { return x > 0.0 ? x * std::log1p(x_minus_p / p) : 0.0; }

// Predictions outside [1e-12, 1 - 1e-12] (general model) pay N (p - clip(p))^2 / 1e-4 on top of
// the clipped likelihood, so the cost keeps a gradient there and stays >= 0.
double excursion(double q) { return q - clip(q); }

double cost_of(CostKind kind, const VecX& p, const std::vector<Observation>& obs) {
  double c = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double q = p(static_cast<Eigen::Index>(i)), f = obs[i].freq, n = obs[i].shots;
    if (kind == CostKind::LeastSquares) {
      c += n * (f - q) * (f - q) / ls_variance(q).first;
    } else {
      const double qc = clip(q), x = excursion(q);
      c += n * (kl_term(f, qc, f - qc) + kl_term(1.0 - f, 1.0 - qc, qc - f) + x * x / kLsWeightFloor);
    }
  }
  return c;
}

// dC/dp per observation.
VecX cost_gradient(CostKind kind, const VecX& p, const std::vector<Observation>& obs) {
  VecX d(p.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double q = p(k), f = obs[i].freq, n = obs[i].shots;
    if (kind == CostKind::LeastSquares) {
      const auto [v, dv] = ls_variance(q);
      d(k) = n * (-2.0 * (f - q) / v - (f - q) * (f - q) * dv / (v * v));
    } else if (excursion(q) != 0.0) {
      d(k) = n * 2.0 * excursion(q) / kLsWeightFloor;
    } else {
      d(k) = n * (q - f) / (q * (1.0 - q));
    }
  }
  return d;
}

// Gauss-Newton curvature weight per observation.
double curvature_weight(CostKind kind, double q, double n) {
  if (kind == CostKind::LeastSquares) return 2.0 * n / ls_variance(q).first;
  if (excursion(q) != 0.0) return 2.0 * n / kLsWeightFloor;
  return n / (q * (1.0 - q));
}

struct Model {
  std::function<GateSetPTMs(const VecX&)> ptms;
  std::function<void(VecX&)> project = [](VecX&) {};
  std::function<bool(const VecX&)> acceptable = [](const VecX&) { return true; };
  // Outward normals of the constraints active at theta.
  std::function<std::vector<VecX>(const VecX&)> active_normals = [](const VecX&) { return std::vector<VecX>{}; };
};

// Levenberg-Marquardt step restricted to the null space of the constraint normals the free step
// would cross.
VecX constrained_step(const MatX& a, const VecX& g, const std::vector<VecX>& normals) {
  VecX step = -a.ldlt().solve(g);
  std::vector<VecX> held;
  for (std::size_t round = 0; round <= normals.size(); ++round) {
    bool added = false;
    for (const auto& nrm : normals) {
      if (nrm.dot(step) <= 1e-15 * nrm.norm() * step.norm()) continue;
      if (std::find_if(held.begin(), held.end(), [&](const VecX& h) { return &h == &nrm || h == nrm; }) != held.end())
        continue;
      held.push_back(nrm);
      added = true;
    }
    if (!added) break;
    MatX c(static_cast<Eigen::Index>(held.size()), g.size());
    for (std::size_t k = 0; k < held.size(); ++k) c.row(static_cast<Eigen::Index>(k)) = held[k].transpose();
    Eigen::JacobiSVD<MatX> svd(c, Eigen::ComputeFullV);
    const Eigen::Index rank = svd.rank();
    const MatX z = svd.matrixV().rightCols(g.size() - rank);
    if (z.cols() == 0) return VecX::Zero(g.size());
    const MatX az = z.transpose() * a * z;
    step = -z * az.ldlt().solve(z.transpose() * g);
  }
  return step;
}

MatX jacobian(const Model& m, const VecX& theta, const std::vector<Observation>& obs, double h) {
  MatX j(static_cast<Eigen::Index>(obs.size()), theta.size());
  VecX t = theta;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    t(k) = theta(k) + h;
    const VecX up = probabilities(m.ptms(t), obs);
    t(k) = theta(k) - h;
    const VecX dn = probabilities(m.ptms(t), obs);
    t(k) = theta(k);
    j.col(k) = (up - dn) / (2.0 * h);
  }
  return j;
}

StageReport run_stage(const Model& m, VecX& theta, const std::vector<Observation>& obs, CostKind kind,
                      const FitConfig& cfg) {
  StageReport rep;
  rep.kind = kind;
  rep.n_circuits = obs.size();
  VecX p = probabilities(m.ptms(theta), obs);
  double c = cost_of(kind, p, obs);
  rep.cost_start = c;
  double lambda = 1e-3;
  for (rep.iterations = 0; rep.iterations < cfg.max_iterations; ++rep.iterations) {
    const MatX j = jacobian(m, theta, obs, cfg.fd_step);
    VecX w(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) w(i) = curvature_weight(kind, p(i), obs[static_cast<std::size_t>(i)].shots);
    const VecX g = j.transpose() * cost_gradient(kind, p, obs);
    const MatX h = j.transpose() * w.asDiagonal() * j;

    const double dmax = h.diagonal().maxCoeff();
    const VecX dscale = h.diagonal().cwiseMax(1e-12 * dmax + std::numeric_limits<double>::min());
    const auto normals = m.active_normals(theta);

    bool accepted = false;
    double c_new = c;
    VecX cand, p_new;
    while (lambda < 1e14) {
      MatX a = h;
      a.diagonal() += lambda * dscale;
      cand = theta + constrained_step(a, g, normals);
      m.project(cand);
      if (!cand.allFinite() || !m.acceptable(cand)) {
        lambda *= 10.0;
        continue;
      }
      p_new = probabilities(m.ptms(cand), obs);
      c_new = cost_of(kind, p_new, obs);
      if (c_new < c) {
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      rep.converged = true;  // no descent direction left within the feasible set
      break;
    }
    const double drop = c - c_new;
    theta = cand;
    p = p_new;
    c = c_new;
    const bool small = drop <= cfg.ftol * c + cfg.cost_atol;
    const bool trusted = lambda <= 1.0;
    lambda = std::max(lambda * 0.3, 1e-12);
    if (small && trusted) {
      rep.converged = true;
      ++rep.iterations;
      break;
    }
  }
  rep.cost_end = c;
  return rep;
}

std::vector<Observation> stage_subset(const std::vector<Observation>& obs, int depth) {
  std::vector<Observation> out;
  for (const auto& o : obs)
    if (o.circuit.reps <= depth) out.push_back(o);
  return out;
}

// cold_restart: every stage also runs from the initial point and keeps the lower final cost.
FitResult run_staged(const Model& m, VecX theta, const std::vector<Observation>& obs, const FitConfig& cfg,
                     bool cold_restart = false) {
  const VecX init = theta;
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  FitResult res;
  const int sw = cfg.switch_depth();
  for (int depth : cfg.depth_schedule) {
    const auto sub = stage_subset(obs, depth);
    if (sub.empty()) continue;
    const CostKind kind = depth < sw ? CostKind::LeastSquares : CostKind::Likelihood;
    StageReport rep = run_stage(m, theta, sub, kind, cfg);
    if (cold_restart && !res.stages.empty()) {
      VecX alt = init;
      const StageReport rep_alt = run_stage(m, alt, sub, kind, cfg);
      if (rep_alt.cost_end < rep.cost_end) {
        theta = alt;
        rep.cost_end = rep_alt.cost_end;
        rep.iterations += rep_alt.iterations;
        rep.converged = rep_alt.converged;
      }
    }
    rep.depth = depth;
    rep.theta = theta;
    if (!rep.converged && cfg.require_convergence)
      throw Error(ErrorKind::OptimizationFailure,
                  "stage at depth " + std::to_string(depth) + " hit the iteration limit");
    res.converged = res.converged && rep.converged;
    res.stages.push_back(rep);
  }
  if (res.stages.empty()) throw Error(ErrorKind::OptimizationFailure, "no observations within the depth schedule");
  res.theta = theta;
  res.ptms = m.ptms(theta);
  res.final_kind = res.stages.back().kind;
  res.final_cost = res.stages.back().cost_end;
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

// Per duration, CP holds at gamma2 = delta2 = 0 whenever gamma1 >= 0, and to second order the
// feasible set is the cone gamma1 >= |(gamma2, delta2)|. A step through the apex of that cone
// (the ideal start) is pulled back by shrinking (gamma2, delta2) radially until the gate is CP.
void retract_to_cp(GateSet& gs, double tol) {
  for (auto id : {GateId::G1, GateId::G2}) {
    const auto min_eig = [&] { return cptp_check(gate_chi(gs, id)).min_eigenvalue; };
    if (min_eig() >= -0.5 * tol) continue;
    FilteredParams& fp = gate_spec(id).pi_pulse ? gs.fp_pi : gs.fp_half;
    const double g2 = fp.gamma2, d2 = fp.delta2;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      fp.gamma2 = mid * g2;
      fp.delta2 = mid * d2;
      (min_eig() >= -0.5 * tol ? lo : hi) = mid;
    }
    fp.gamma2 = lo * g2;
    fp.delta2 = lo * d2;
  }
}

double min_chi_eigenvalue(const GateSet& gs) {
  double m = std::numeric_limits<double>::infinity();
  for (auto id : {GateId::G1, GateId::G2}) m = std::min(m, cptp_check(gate_chi(gs, id)).min_eigenvalue);
  return m;
}

// Active constraints in pack order: Bloch sphere on r (0..2), the two faces of the POVM cone
// |e_vec| <= e0 and |e_vec| <= 2 - e0 on e (3..6), and lower bounds at zero.
std::vector<VecX> spam_and_box_normals(const VecX& t, const std::vector<Eigen::Index>& bounded) {
  constexpr double tol = 1e-9;
  std::vector<VecX> out;
  const Vec3 r = t.segment<3>(0);
  if (r.squaredNorm() >= 1.0 - tol) {
    VecX nrm = VecX::Zero(t.size());
    nrm.segment<3>(0) = r.normalized();
    out.push_back(nrm);
  }
  const double e0 = t(3);
  const Vec3 ev = t.segment<3>(4);
  const double en = ev.norm();
  if (en > 0.0) {
    for (double side : {-1.0, 1.0}) {
      const double bound = side < 0 ? e0 : 2.0 - e0;
      if (en >= bound - tol) {
        VecX nrm = VecX::Zero(t.size());
        nrm(3) = side;
        nrm.segment<3>(4) = ev / en;
        out.push_back(nrm);
      }
    }
  }
  for (auto k : bounded)
    if (t(k) <= 0.0) {
      VecX nrm = VecX::Zero(t.size());
      nrm(k) = -1.0;
      out.push_back(nrm);
    }
  return out;
}

void check_coverage(const Design& design, const Dataset& data) {
  std::set<std::string> have;
  for (const auto& r : data.records) have.insert(to_string(r.circuit));
  for (const auto& c : design.all_circuits())
    if (!have.count(to_string(c)))
      throw Error(ErrorKind::InvalidConfig, "dataset lacks design circuit " + to_string(c));
}

bool markovian_content_only(const GateSet& gs) {
  for (const auto* fp : {&gs.fp_pi, &gs.fp_half})
    if (fp->gamma2 != 0.0 || fp->delta2 != 0.0 || fp->delta_gamma1 != 0.0) return false;
  return true;
}

}  // namespace

// ---- Linear inversion ------------------------------------------------------------------------

Vec4d linear_qst(const VecX& frequencies, const MatX& povm) {
  if (povm.cols() != 4 || povm.rows() != frequencies.size())
    throw Error(ErrorKind::LengthMismatch, "POVM matrix must be m x 4 with m frequencies");
  if (numerical_rank(povm) < 4) throw Error(ErrorKind::RankDeficient, "POVM matrix is not full column rank");
  return pinv_tall(povm) * frequencies;
}

MatX pauli_povm() {
  MatX a(6, 4);
  for (int k = 0; k < 3; ++k)
    for (int s = 0; s < 2; ++s) {
      Vec4d e = Vec4d::Zero();
      e(0) = 1.0;
      e(k + 1) = s == 0 ? 1.0 : -1.0;
      a.row(2 * k + s) = meas_vector(e).transpose();
    }
  return a;
}

PTM linear_qpt(const MatX& f, const MatX& a, const MatX& b) {
  if (a.cols() != 4 || b.rows() != 4 || f.rows() != a.rows() || f.cols() != b.cols())
    throw Error(ErrorKind::LengthMismatch, "linear QPT shapes disagree");
  if (numerical_rank(a) < 4 || numerical_rank(b) < 4)
    throw Error(ErrorKind::RankDeficient, "fiducial matrices are not full rank");
  const MatX g = pinv_tall(a) * f * b.transpose() * (b * b.transpose()).inverse();
  return g;
}

LinearGstInputs linear_gst_inputs(const GateSetPTMs& g) {
  MatX a(static_cast<Eigen::Index>(kMeasFiducials.size()), 4);
  for (std::size_t k = 0; k < kMeasFiducials.size(); ++k)
    a.row(static_cast<Eigen::Index>(k)) = g.meas.transpose() * fiducial(g, kMeasFiducials[k]);
  MatX b(4, static_cast<Eigen::Index>(kPrepFiducials.size()));
  for (std::size_t s = 0; s < kPrepFiducials.size(); ++s)
    b.col(static_cast<Eigen::Index>(s)) = fiducial(g, kPrepFiducials[s]) * g.rho;
  LinearGstInputs in;
  for (auto id : kAllGates) in.f[static_cast<std::size_t>(index(id))] = a * gate(g, id) * b;
  in.gram = a * b;
  in.r0 = a * g.rho;
  in.q0 = g.meas.transpose() * b;
  return in;
}

GateSetPTMs linear_gst(const LinearGstInputs& in) {
  if (in.gram.cols() != 4 || in.q0.size() != 4 || in.r0.size() != in.gram.rows())
    throw Error(ErrorKind::LengthMismatch, "linear GST shapes disagree");
  if (numerical_rank(in.gram) < 4) throw Error(ErrorKind::SingularGram, "Gram matrix has rank < 4");
  const MatX gp = pinv_tall(in.gram);
  GateSetPTMs out;
  for (std::size_t i = 0; i < 5; ++i) {
    if (in.f[i].rows() != in.gram.rows() || in.f[i].cols() != 4)
      throw Error(ErrorKind::LengthMismatch, "linear GST F matrix shape");
    out.gates[i] = gp * in.f[i];
  }
  out.rho = gp * in.r0;
  out.meas = in.q0.transpose();
  return out;
}

// ---- Maximum likelihood ----------------------------------------------------------------------

std::string to_string(CostKind k) { return k == CostKind::LeastSquares ? "least-squares" : "likelihood"; }

void FitConfig::validate() const {
  if (depth_schedule.empty()) throw Error(ErrorKind::InvalidConfig, "empty depth schedule");
  for (std::size_t i = 1; i < depth_schedule.size(); ++i)
    if (depth_schedule[i] <= depth_schedule[i - 1])
      throw Error(ErrorKind::InvalidConfig, "depth schedule must be strictly increasing");
  if (cost_switch_depth != 0 &&
      std::find(depth_schedule.begin(), depth_schedule.end(), cost_switch_depth) == depth_schedule.end())
    throw Error(ErrorKind::InvalidConfig, "cost_switch_depth must be one of the schedule depths");
  if (max_iterations < 1 || !(fd_step > 0.0) || !(ftol >= 0.0) || !(cost_atol >= 0.0))
    throw Error(ErrorKind::InvalidConfig, "optimizer tolerances out of range");
}

int FitConfig::switch_depth() const {
  if (cost_switch_depth != 0) return cost_switch_depth;
  return depth_schedule.size() >= 2 ? depth_schedule[depth_schedule.size() - 2] : depth_schedule.front();
}

std::vector<Observation> observations(const Dataset& d) {
  d.validate();
  std::vector<Observation> out;
  out.reserve(d.records.size());
  for (const auto& r : d.records)
    if (r.shots > 0)
      out.push_back({r.circuit, static_cast<double>(r.shots), static_cast<double>(r.plus_counts) / r.shots});
  return out;
}

std::vector<Observation> exact_observations(const GateSetPTMs& g, const std::vector<Circuit>& circuits,
                                            double shots) {
  std::vector<Observation> out;
  out.reserve(circuits.size());
  for (const auto& c : circuits) out.push_back({c, shots, std::clamp(circuit_probability(g, c), 0.0, 1.0)});
  return out;
}

double cost(CostKind kind, const GateSetPTMs& g, const std::vector<Observation>& obs) {
  return cost_of(kind, probabilities(g, obs), obs);
}

FitResult mle_fit(const std::vector<Observation>& obs, const FitConfig& cfg, const GateSet& init) {
  const ModelVariant v = cfg.variant;
  const PulseSet pulses = init.pulses;
  GateSet start = init;
  start.variant = v;
  start.fp_pi = restrict_to(v, start.fp_pi);
  start.fp_half = restrict_to(v, start.fp_half);
  if (!validate_constraints(start).ok(1e-10))
    throw Error(ErrorKind::OptimizationFailure, "initial gate set violates the constraints");
  const bool nm = has_nonmarkov(v);
  if (nm && min_chi_eigenvalue(start) < -cfg.cp_tolerance)
    throw Error(ErrorKind::OptimizationFailure, "initial gate set is not completely positive");

  Model m;
  m.ptms = [&](const VecX& t) { return to_ptms(unpack(t, v, pulses)); };
  m.project = [&](VecX& t) {
    GateSet gs = unpack(t, v, pulses);
    project_feasible(gs);
    if (nm) retract_to_cp(gs, cfg.cp_tolerance);
    t = pack(gs);
  };
  if (nm) m.acceptable = [&](const VecX& t) { return min_chi_eigenvalue(unpack(t, v, pulses)) >= -cfg.cp_tolerance; };
  // gamma2 at t_pi/2 and delta2 at t_pi vanish for every spectrum; they stay pinned at zero.
  std::vector<Eigen::Index> pinned;
  for (int k = 0; k < param_count(v); ++k)
    if (structurally_zero(v, pulses, k)) pinned.push_back(k);
  std::vector<Eigen::Index> bounded;
  const auto names = param_names(v);
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k].rfind("gamma1", 0) == 0 || names[k].rfind("delta_gamma1", 0) == 0)
      bounded.push_back(static_cast<Eigen::Index>(k));
  m.active_normals = [&, bounded, pinned](const VecX& t) {
    auto out = spam_and_box_normals(t, bounded);
    for (auto k : pinned)
      for (double sgn : {-1.0, 1.0}) {
        VecX nrm = VecX::Zero(t.size());
        nrm(k) = sgn;
        out.push_back(nrm);
      }
    if (!nm) return out;
    // Complete positivity per duration, active within 10x the tolerance. Normal = -grad(min eig).
    const int per = filtered_count(v);
    for (int block = 0; block < 2; ++block) {
      const GateId id = block == 0 ? GateId::G1 : GateId::G2;
      const auto min_eig = [&](const VecX& x) { return cptp_check(gate_chi(unpack(x, v, pulses), id)).min_eigenvalue; };
      if (min_eig(t) >= 10.0 * cfg.cp_tolerance) continue;
      VecX nrm = VecX::Zero(t.size()), x = t;
      for (int k = 7 + block * per; k < 7 + (block + 1) * per; ++k) {
        const double h = cfg.fd_step;
        x(k) = t(k) + h;
        const double up = min_eig(x);
        x(k) = t(k) - h;
        nrm(k) = -(up - min_eig(x)) / (2.0 * h);
        x(k) = t(k);
      }
      if (nrm.norm() > 0.0) out.push_back(nrm);
    }
    return out;
  };

  VecX theta0 = pack(start);
  for (auto k : pinned) theta0(k) = 0.0;
  FitResult res = run_staged(m, theta0, obs, cfg);
  res.variant = v;
  res.gate_set = unpack(res.theta, v, pulses);
  double resid = validate_constraints(*res.gate_set).max_violation();
  if (nm) resid = std::max(resid, -min_chi_eigenvalue(*res.gate_set));
  res.constraint_residual = std::max(0.0, resid);
  return res;
}

FitResult mle_fit(const Design& design, const Dataset& data, const FitConfig& cfg, const GateSet& init) {
  design.validate();
  check_coverage(design, data);
  return mle_fit(observations(data), cfg, init);
}

FitResult general_fit(const std::vector<Observation>& obs, const FitConfig& cfg,
                      const std::optional<GateSetPTMs>& init) {
  Model m;
  m.ptms = [](const VecX& t) { return unpack_general(t); };
  const GateSetPTMs start = init ? *init : to_ptms(ideal_gate_set(PulseSet{}));
  FitResult res = run_staged(m, pack_general(start), obs, cfg, true);
  res.general = true;
  res.variant = cfg.variant;
  return res;
}

FitResult general_fit(const Design& design, const Dataset& data, const FitConfig& cfg,
                      const std::optional<GateSetPTMs>& init) {
  design.validate();
  check_coverage(design, data);
  return general_fit(observations(data), cfg, init);
}

// ---- Gauge -----------------------------------------------------------------------------------

GateSetPTMs apply_gauge(const GateSetPTMs& g, const Eigen::Matrix4d& t) {
  const Eigen::Matrix4d ti = t.inverse();
  GateSetPTMs out;
  for (std::size_t i = 0; i < 5; ++i) out.gates[i] = t * g.gates[i] * ti;
  out.rho = t * g.rho;
  out.meas = (g.meas.transpose() * ti).transpose();
  return out;
}

namespace {

Eigen::Matrix4d gauge_matrix(const VecX& x) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Zero();
  t(0, 0) = 1.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) t(r + 1, c) = x(4 * r + c);
  return t;
}

VecX gauge_residual(const GateSetPTMs& est, const GateSetPTMs& target, const VecX& x) {
  const GateSetPTMs g = apply_gauge(est, gauge_matrix(x));
  VecX r(5 * 16 + 8);
  for (std::size_t i = 0; i < 5; ++i) {
    const PTM d = g.gates[i] - target.gates[i];
    r.segment(static_cast<Eigen::Index>(16 * i), 16) = Eigen::Map<const VecX>(d.data(), 16);
  }
  r.segment<4>(80) = g.rho - target.rho;
  r.segment<4>(84) = g.meas - target.meas;
  return r;
}

// Residuals T G_i - G_i^t T, T rho - rho^t, M - M^t T are affine in T; their least-squares
// solution is a starting point that does not depend on how far `est` sits from `target`.
VecX linear_gauge_start(const GateSetPTMs& est, const GateSetPTMs& target) {
  auto lin = [&](const VecX& x) {
    const Eigen::Matrix4d t = gauge_matrix(x);
    VecX r(5 * 16 + 8);
    for (std::size_t i = 0; i < 5; ++i) {
      const PTM d = t * est.gates[i] - target.gates[i] * t;
      r.segment(static_cast<Eigen::Index>(16 * i), 16) = Eigen::Map<const VecX>(d.data(), 16);
    }
    r.segment<4>(80) = t * est.rho - target.rho;
    r.segment<4>(84) = est.meas - (target.meas.transpose() * t).transpose();
    return r;
  };
  const VecX zero = VecX::Zero(12);
  const VecX b = lin(zero);
  MatX a(b.size(), 12);
  for (int k = 0; k < 12; ++k) a.col(k) = lin(VecX::Unit(12, k)) - b;
  return a.colPivHouseholderQr().solve(-b);
}

}  // namespace

GaugeResult gauge_optimize(const GateSetPTMs& est, const GateSetPTMs& target) {
  for (const auto& g : est.gates)
    if ((g.row(0) - Eigen::RowVector4d(1, 0, 0, 0)).cwiseAbs().maxCoeff() > 1e-8)
      throw Error(ErrorKind::OptimizationFailure, "gauge optimisation needs a TP estimate");
  VecX x(12);
  x << 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  VecX r = gauge_residual(est, target, x);
  const VecX x_lin = linear_gauge_start(est, target);
  if (std::abs(gauge_matrix(x_lin).determinant()) > 1e-12) {
    const VecX r_lin = gauge_residual(est, target, x_lin);
    if (r_lin.allFinite() && r_lin.squaredNorm() < r.squaredNorm()) {
      x = x_lin;
      r = r_lin;
    }
  }
  double c = r.squaredNorm(), lambda = 1e-3;
  GaugeResult out;
  constexpr double h = 1e-7;
  for (out.iterations = 0; out.iterations < 500 && c > 1e-28; ++out.iterations) {
    MatX j(r.size(), 12);
    VecX t = x;
    for (int k = 0; k < 12; ++k) {
      t(k) = x(k) + h;
      const VecX up = gauge_residual(est, target, t);
      t(k) = x(k) - h;
      j.col(k) = (up - gauge_residual(est, target, t)) / (2.0 * h);
      t(k) = x(k);
    }
    const MatX jtj = j.transpose() * j;
    const VecX g = j.transpose() * r;
    bool accepted = false;
    VecX cand, r_new;
    while (lambda < 1e14) {
      MatX a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      cand = x - a.ldlt().solve(g);
      if (std::abs(gauge_matrix(cand).determinant()) > 1e-12) {
        r_new = gauge_residual(est, target, cand);
        if (r_new.allFinite() && r_new.squaredNorm() < c) {
          accepted = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
    const double drop = c - r_new.squaredNorm();
    x = cand;
    r = r_new;
    c = r.squaredNorm();
    lambda = std::max(lambda * 0.3, 1e-12);
    if (drop <= 1e-15 * c) break;
  }
  out.t = gauge_matrix(x);
  if (std::abs(out.t.determinant()) <= 1e-12) throw Error(ErrorKind::OptimizationFailure, "gauge matrix is singular");
  out.gauge_fixed = apply_gauge(est, out.t);
  out.cost = c;
  return out;
}

// ---- Benchmark -------------------------------------------------------------------------------

double benchmark_distance(const GateSet& est, const GateSet& truth, bool include_spam) {
  const bool closed = markovian_content_only(est) && markovian_content_only(truth);
  double sum = 0.0;
  for (auto id : kAllGates)
    sum += closed ? gate_trace_distance(est.params_for(id), truth.params_for(id))
                  : general_channel_distance(gate_ptm(est, id), gate_ptm(truth, id));
  if (!include_spam) return sum / 5.0;
  const auto [tr, tm] = fiducial_trace_distances(est.r, truth.r, est.e, truth.e);
  return (sum + tr + tm) / 7.0;
}

double benchmark_distance(const GateSetPTMs& est, const GateSetPTMs& truth, bool include_spam) {
  double sum = 0.0;
  for (std::size_t i = 0; i < 5; ++i) sum += general_channel_distance(est.gates[i], truth.gates[i]);
  if (!include_spam) return sum / 5.0;
  const auto [tr, tm] = fiducial_trace_distances(bloch_from_rho(est.rho), bloch_from_rho(truth.rho),
                                                 povm_from_meas(est.meas), povm_from_meas(truth.meas));
  return (sum + tr + tm) / 7.0;
}

}  // namespace cgst
