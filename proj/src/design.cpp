#include "cgst/design.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace cgst {

namespace {

std::string fid_string(const std::optional<GateId>& g) { return g ? to_string(*g) : "{}"; }

std::optional<GateId> parse_fid(const std::string& s) {
  if (s == "{}" || s.empty()) return std::nullopt;
  return gate_from_string(s);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Splits "# key: value" header lines; returns false for non-header lines.
bool parse_header(const std::string& line, std::string& key, std::string& value) {
  if (line.empty() || line[0] != '#') return false;
  const auto colon = line.find(':');
  if (colon == std::string::npos) {
    key.clear();
    return true;
  }
  key = trim(line.substr(1, colon - 1));
  value = trim(line.substr(colon + 1));
  return true;
}

int fid_order(const std::optional<GateId>& g) { return g ? index(*g) : -1; }

bool lex_less(const Circuit& a, const Circuit& b) {
  return std::tuple(index(a.germ), fid_order(a.prep), fid_order(a.meas)) <
         std::tuple(index(b.germ), fid_order(b.prep), fid_order(b.meas));
}

}  // namespace

std::string to_string(const Circuit& c) {
  return fid_string(c.prep) + ";" + to_string(c.germ) + "^" + std::to_string(c.reps) + ";" + fid_string(c.meas);
}

Circuit parse_circuit(const std::string& text) {
  const std::string s = trim(text);
  const auto a = s.find(';');
  const auto b = s.find(';', a == std::string::npos ? 0 : a + 1);
  if (a == std::string::npos || b == std::string::npos) throw Error(ErrorKind::Parse, "bad circuit '" + s + "'");
  Circuit c;
  c.prep = parse_fid(s.substr(0, a));
  c.meas = parse_fid(s.substr(b + 1));
  const std::string germ = s.substr(a + 1, b - a - 1);
  const auto caret = germ.find('^');
  c.germ = gate_from_string(germ.substr(0, caret));
  if (caret != std::string::npos) {
    try {
      std::size_t used = 0;
      c.reps = std::stoi(germ.substr(caret + 1), &used);
      if (used != germ.size() - caret - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, "bad germ power in '" + s + "'");
    }
  }
  if (c.reps < 1) throw Error(ErrorKind::Parse, "germ power must be >= 1 in '" + s + "'");
  return c;
}

void Design::validate() const {
  if (circuits.size() != amplified.size())
    throw Error(ErrorKind::LengthMismatch, "design circuits and amplified flags differ in length");
  if (depth_schedule.empty() || depth_schedule.front() != 1)
    throw Error(ErrorKind::InvalidConfig, "depth schedule must start at 1");
  for (std::size_t i = 1; i < depth_schedule.size(); ++i)
    if (depth_schedule[i] <= depth_schedule[i - 1])
      throw Error(ErrorKind::InvalidConfig, "depth schedule must be strictly increasing");
  if (shots_per_circuit < 1) throw Error(ErrorKind::InvalidConfig, "shots per circuit must be >= 1");
}

std::vector<Circuit> Design::circuits_up_to(int max_p) const {
  std::vector<Circuit> out;
  for (int p : depth_schedule) {
    if (p > max_p) break;
    for (std::size_t i = 0; i < circuits.size(); ++i) {
      if (amplified[i]) {
        Circuit c = circuits[i];
        c.reps = p;
        out.push_back(c);
      } else if (circuits[i].reps == p) {
        out.push_back(circuits[i]);
      }
    }
  }
  // Fixed circuits whose power is not on the schedule still run once.
  for (std::size_t i = 0; i < circuits.size(); ++i)
    if (!amplified[i] && circuits[i].reps <= max_p &&
        std::find(depth_schedule.begin(), depth_schedule.end(), circuits[i].reps) == depth_schedule.end())
      out.push_back(circuits[i]);
  return out;
}

void Dataset::validate() const {
  for (const auto& r : records)
    if (r.shots < 0 || r.plus_counts < 0 || r.plus_counts > r.shots)
      throw Error(ErrorKind::InvalidParameter, "counts out of range for " + to_string(r.circuit));
}

Dataset Dataset::up_to(int max_p) const {
  Dataset d;
  d.header = header;
  for (const auto& r : records)
    if (r.circuit.reps <= max_p) d.records.push_back(r);
  return d;
}

long Dataset::total_shots() const {
  long n = 0;
  for (const auto& r : records) n += r.shots;
  return n;
}

void write_dataset(std::ostream& os, const Dataset& d) {
  os << "# cgst dataset\n";
  for (const auto& [k, v] : d.header) os << "# " << k << ": " << v << "\n";
  for (const auto& r : d.records) os << to_string(r.circuit) << "  " << r.shots << "  " << r.plus_counts << "\n";
}

Dataset read_dataset(std::istream& is) {
  Dataset d;
  std::string line, key, value;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (parse_header(line, key, value)) {
      if (!key.empty()) d.header[key] = value;
      continue;
    }
    std::istringstream ls(line);
    std::string circ;
    Record r;
    if (!(ls >> circ >> r.shots >> r.plus_counts))
      throw Error(ErrorKind::Parse, "dataset line " + std::to_string(lineno) + ": expected 'circuit shots plus'");
    r.circuit = parse_circuit(circ);
    d.records.push_back(r);
  }
  d.validate();
  return d;
}

void write_design(std::ostream& os, const Design& d) {
  os << "# cgst design\n# variant: " << to_string(d.variant) << "\n# depth_schedule: ";
  for (std::size_t i = 0; i < d.depth_schedule.size(); ++i) os << (i ? "," : "") << d.depth_schedule[i];
  os << "\n# shots_per_circuit: " << d.shots_per_circuit << "\n";
  for (std::size_t i = 0; i < d.circuits.size(); ++i)
    os << to_string(d.circuits[i]) << "  " << (d.amplified[i] ? "amplified" : "fixed") << "\n";
}

Design read_design(std::istream& is) {
  Design d;
  d.depth_schedule.clear();
  std::string line, key, value;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (parse_header(line, key, value)) {
      if (key == "variant") d.variant = variant_from_string(value);
      if (key == "shots_per_circuit") d.shots_per_circuit = std::stol(value);
      if (key == "depth_schedule") {
        std::istringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ',')) d.depth_schedule.push_back(std::stoi(tok));
      }
      continue;
    }
    std::istringstream ls(line);
    std::string circ, kind;
    if (!(ls >> circ >> kind) || (kind != "amplified" && kind != "fixed"))
      throw Error(ErrorKind::Parse, "design line '" + line + "'");
    d.circuits.push_back(parse_circuit(circ));
    d.amplified.push_back(kind == "amplified");
  }
  if (d.depth_schedule.empty()) d.depth_schedule = {1};
  d.validate();
  return d;
}

PTM gate_power(const PTM& g, int p) {
  PTM result = PTM::Identity(), base = g;
  for (unsigned e = static_cast<unsigned>(p); e; e >>= 1) {
    if (e & 1u) result = base * result;
    base = base * base;
  }
  return result;
}

PTM circuit_ptm(const GateSetPTMs& g, const Circuit& c) {
  PTM m = gate_power(g.gates[static_cast<std::size_t>(index(c.germ))], c.reps);
  if (c.prep) m = m * g.gates[static_cast<std::size_t>(index(*c.prep))];
  if (c.meas) m = g.gates[static_cast<std::size_t>(index(*c.meas))] * m;
  return m;
}

double circuit_probability(const GateSetPTMs& g, const Circuit& c, int outcome) {
  const double plus = g.meas.dot(circuit_ptm(g, c) * g.rho);
  return outcome > 0 ? plus : 1.0 - plus;
}

double circuit_probability(const GateSet& gs, const Circuit& c, int outcome) {
  return circuit_probability(to_ptms(gs), c, outcome);
}

MatX amplification_gradient(const GateSet& gs, GateId germ, int p, double eps) {
  const int n = param_count(gs.variant);
  const VecX th0 = pack(gs);
  MatX out(16, n - 7);
  const auto entry = [&](const VecX& th) -> Eigen::Matrix<double, 16, 1> {
    const PTM g = gate_power(gate_ptm(unpack(th, gs.variant, gs.pulses), germ), p).transpose();
    return Eigen::Map<const Eigen::Matrix<double, 16, 1>>(g.data());
  };
  for (int k = 7; k < n; ++k) {
    VecX a = th0, b = th0;
    a(k) += eps;
    b(k) -= eps;
    out.col(k - 7) = (entry(a) - entry(b)) / (2.0 * eps * p);
  }
  return out;
}

MatX probability_jacobian(const GateSet& gs, const std::vector<Circuit>& circuits, double eps) {
  const VecX th0 = pack(gs);
  MatX j(static_cast<Eigen::Index>(circuits.size()), th0.size());
  for (Eigen::Index k = 0; k < th0.size(); ++k) {
    VecX a = th0, b = th0;
    a(k) += eps;
    b(k) -= eps;
    const auto ga = to_ptms(unpack(a, gs.variant, gs.pulses)), gb = to_ptms(unpack(b, gs.variant, gs.pulses));
    for (std::size_t i = 0; i < circuits.size(); ++i)
      j(static_cast<Eigen::Index>(i), k) =
          (circuit_probability(ga, circuits[i]) - circuit_probability(gb, circuits[i])) / (2.0 * eps);
  }
  return j;
}

MatX general_probability_jacobian(const GateSetPTMs& g, const std::vector<Circuit>& circuits, double eps) {
  const VecX th0 = pack_general(g);
  MatX j(static_cast<Eigen::Index>(circuits.size()), th0.size());
  for (Eigen::Index k = 0; k < th0.size(); ++k) {
    VecX a = th0, b = th0;
    a(k) += eps;
    b(k) -= eps;
    const auto ga = unpack_general(a), gb = unpack_general(b);
    for (std::size_t i = 0; i < circuits.size(); ++i)
      j(static_cast<Eigen::Index>(i), k) =
          (circuit_probability(ga, circuits[i]) - circuit_probability(gb, circuits[i])) / (2.0 * eps);
  }
  return j;
}

Eigen::Matrix<double, 5, 4> fiducial_gram(const GateSetPTMs& g) {
  Eigen::Matrix<double, 5, 4> m;
  for (std::size_t b = 0; b < kMeasFiducials.size(); ++b)
    for (std::size_t s = 0; s < kPrepFiducials.size(); ++s) {
      const Circuit c{kPrepFiducials[s], GateId::G1, 0, kMeasFiducials[b]};
      PTM h = PTM::Identity();
      if (c.prep) h = g.gates[static_cast<std::size_t>(index(*c.prep))];
      if (c.meas) h = g.gates[static_cast<std::size_t>(index(*c.meas))] * h;
      m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(s)) = g.meas.dot(h * g.rho);
    }
  return m;
}

int numerical_rank(const MatX& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MatX> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

bool structurally_zero(ModelVariant variant, const PulseSet& pulses, int k) {
  if (!has_nonmarkov(variant) || k < 7) return false;
  const int per = filtered_count(variant);
  const int off = (k - 7) % per;
  const double t = (k - 7) < per ? pulses.t_pi : pulses.t_half;
  const double w = pulses.omega_rabi * t;
  if (off == 2) return std::abs(std::cos(w)) < 1e-12;
  if (off == 3) return std::abs(std::sin(w)) < 1e-12;
  return false;
}

Design select_fiducial_pairs(const GateSet& gs_in, ModelVariant variant, double eps, const std::vector<int>& depths) {
  GateSet gs = gs_in;
  gs.variant = variant;
  const auto ptms = to_ptms(gs);
  if (numerical_rank(fiducial_gram(ptms), 1e-9) < 4)
    throw Error(ErrorKind::DegenerateDesign, "fiducials are not informationally complete (Gram rank < 4)");
  if (depths.empty() || depths.front() != 1)
    throw Error(ErrorKind::InvalidParameter, "scoring depths must start at 1");

  const int n = param_count(variant);
  const int per_duration = filtered_count(variant);

  std::vector<Circuit> candidates;
  for (auto germ : kAllGates)
    for (const auto& prep : kPrepFiducials)
      for (const auto& meas : kMeasFiducials) candidates.push_back(Circuit{prep, germ, 1, meas});
  std::sort(candidates.begin(), candidates.end(), lex_less);

  // Jacobian rows of every candidate at every scoring depth.
  std::vector<MatX> jd;
  for (int p : depths) {
    std::vector<Circuit> at = candidates;
    for (auto& c : at) c.reps = p;
    jd.push_back(probability_jacobian(gs, at, eps));
  }
  double jmax = 0.0;
  for (const auto& j : jd) jmax = std::max(jmax, j.cwiseAbs().maxCoeff());
  const double tol = 1e-7 * jmax;
  // Rows a candidate contributes: every depth when amplified, depth 1 otherwise.
  const auto block = [&](std::size_t i, bool amplified) {
    const Eigen::Index nd = amplified ? static_cast<Eigen::Index>(jd.size()) : 1;
    MatX b(nd, n);
    for (Eigen::Index r = 0; r < nd; ++r) b.row(r) = jd[static_cast<std::size_t>(r)].row(static_cast<Eigen::Index>(i));
    return b;
  };
  // Orthonormal basis of the selected Jacobian rows.
  std::vector<Eigen::RowVectorXd> basis;
  const auto residual = [&](MatX b) {
    for (Eigen::Index r = 0; r < b.rows(); ++r)
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) b.row(r) -= b.row(r).dot(q) * q;
    return b;
  };
  const auto absorb = [&](const MatX& b) {
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
      Eigen::RowVectorXd v = b.row(r);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) v -= v.dot(q) * q;
      if (v.norm() > tol) basis.push_back(v / v.norm());
    }
  };

  Design d;
  d.variant = variant;
  std::vector<bool> used(candidates.size(), false);
  for (int k = 0; k < n; ++k) {
    // Offsets within one duration block: 0 gamma1, 1 delta1, [2 gamma2, 3 delta2], [last delta_gamma1].
    std::optional<bool> pi_block;
    bool nonmarkov_param = false;
    if (k >= 7) {
      pi_block = (k - 7) < per_duration;
      const int off = (k - 7) % per_duration;
      nonmarkov_param = has_nonmarkov(variant) && (off == 2 || off == 3);
    }
    const bool amplified = !nonmarkov_param;
    // Most sensitive circuit among those adding a new Jacobian direction; if none does, most sensitive.
    std::size_t best[2] = {candidates.size(), candidates.size()};
    double best_s[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto& c = candidates[i];
      if (used[i] || (pi_block && gate_spec(c.germ).pi_pulse != *pi_block)) continue;
      const MatX b = block(i, amplified);
      const double s = b.col(k).norm();
      if (s <= tol) continue;
      const double rn = residual(b).rowwise().norm().maxCoeff();
      const int kind = rn > tol ? 0 : 1;
      if (s > best_s[kind] * (1.0 + 1e-9)) {
        best_s[kind] = s;
        best[kind] = i;
      }
    }
    std::size_t pick = best[0] != candidates.size() ? best[0] : best[1];
    if (pick == candidates.size() && structurally_zero(variant, gs.pulses, k)) {
      for (std::size_t i = 0; i < candidates.size() && pick == candidates.size(); ++i)
        if (!used[i] && (!pi_block || gate_spec(candidates[i].germ).pi_pulse == *pi_block)) pick = i;
    }
    if (pick == candidates.size())
      throw Error(ErrorKind::DegenerateDesign, "parameter " + param_names(variant)[static_cast<std::size_t>(k)] +
                                                   " has no sensitivity on any fiducial pair");
    absorb(block(pick, amplified));
    used[pick] = true;
    d.circuits.push_back(candidates[pick]);
    d.amplified.push_back(amplified);
  }
  return d;
}

std::vector<int> depth_schedule(int max_p) {
  if (max_p < 1 || (max_p & (max_p - 1)) != 0)
    throw Error(ErrorKind::InvalidParameter, "max depth must be a power of two");
  std::vector<int> out;
  for (int p = 1; p <= max_p; p *= 2) out.push_back(p);
  return out;
}

Design general_design(const GateSet& gs_ideal, const std::vector<int>& depths, int target_count) {
  const auto g = to_ptms(gs_ideal);
  std::vector<Circuit> pool;
  for (int p : depths)
    for (auto germ : kAllGates)
      for (const auto& prep : kPrepFiducials)
        for (const auto& meas : kMeasFiducials) pool.push_back(Circuit{prep, germ, p, meas});
  const MatX jp = general_probability_jacobian(g, pool);
  const double tol = 1e-7;
  const int attainable = numerical_rank(jp, tol);

  Design d;
  d.variant = gs_ideal.variant;
  std::vector<bool> used(pool.size(), false);
  // Orthonormal basis of the selected rows; residual norm = volume gain of adding a row.
  std::vector<Eigen::RowVectorXd> basis;
  const double scale = jp.rowwise().norm().maxCoeff();
  while (static_cast<int>(basis.size()) < attainable) {
    std::size_t best = pool.size();
    double best_res = 0.0;
    Eigen::RowVectorXd best_row;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (used[i]) continue;
      Eigen::RowVectorXd r = jp.row(static_cast<Eigen::Index>(i));
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) r -= r.dot(q) * q;
      const double res = r.norm();
      if (res > best_res * (1.0 + 1e-9) && res > tol * scale) {
        best_res = res;
        best = i;
        best_row = r / res;
      }
    }
    if (best == pool.size()) break;
    used[best] = true;
    basis.push_back(best_row);
    d.circuits.push_back(pool[best]);
    d.amplified.push_back(false);
  }
  // Beyond the attainable rank: maximise the smallest nonzero singular value.
  while (static_cast<int>(d.circuits.size()) < target_count) {
    MatX cur(static_cast<Eigen::Index>(d.circuits.size()) + 1, jp.cols());
    for (std::size_t i = 0; i < d.circuits.size(); ++i) {
      const auto it = std::find(pool.begin(), pool.end(), d.circuits[i]);
      cur.row(static_cast<Eigen::Index>(i)) = jp.row(it - pool.begin());
    }
    std::size_t best = pool.size();
    double best_s = -1.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (used[i]) continue;
      cur.row(cur.rows() - 1) = jp.row(static_cast<Eigen::Index>(i));
      Eigen::JacobiSVD<MatX> svd(cur);
      const double s = svd.singularValues()(std::max(0, static_cast<int>(basis.size()) - 1));
      if (s > best_s * (1.0 + 1e-9)) {
        best_s = s;
        best = i;
      }
    }
    if (best == pool.size()) break;
    used[best] = true;
    d.circuits.push_back(pool[best]);
    d.amplified.push_back(false);
  }
  d.depth_schedule.clear();
  for (int p : depths)
    if (d.depth_schedule.empty() || p > d.depth_schedule.back()) d.depth_schedule.push_back(p);
  if (d.depth_schedule.empty() || d.depth_schedule.front() != 1) d.depth_schedule.insert(d.depth_schedule.begin(), 1);
  return d;
}

}  // namespace cgst
