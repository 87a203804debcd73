#include "cgst/gateset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cgst {

const std::array<GateSpec, 5>& gate_specs() {
  static const std::array<GateSpec, 5> specs = {{
      {GateId::G1, kPi, Phase::Zero, true},
      {GateId::G2, kPi / 2, Phase::Zero, false},
      {GateId::G3, kPi / 2, Phase::ThreeHalfPi, false},
      {GateId::G4, kPi / 2, Phase::HalfPi, false},
      {GateId::G5, kPi / 2, Phase::Pi, false},
  }};
  return specs;
}

const GateSpec& gate_spec(GateId id) { return gate_specs()[static_cast<std::size_t>(index(id))]; }

std::string to_string(GateId id) { return "G" + std::to_string(index(id) + 1); }

GateId gate_from_string(const std::string& s) {
  if (s.size() == 2 && (s[0] == 'G' || s[0] == 'g') && s[1] >= '1' && s[1] <= '5')
    return static_cast<GateId>(s[1] - '1');
  throw Error(ErrorKind::Parse, "unknown gate '" + s + "'");
}

bool has_nonmarkov(ModelVariant v) {
  return v == ModelVariant::NonMarkovian || v == ModelVariant::NonMarkovianAmplitude;
}
bool has_amplitude(ModelVariant v) {
  return v == ModelVariant::MarkovianAmplitude || v == ModelVariant::NonMarkovianAmplitude;
}
int filtered_count(ModelVariant v) { return 2 + (has_nonmarkov(v) ? 2 : 0) + (has_amplitude(v) ? 1 : 0); }
int param_count(ModelVariant v) { return 7 + 2 * filtered_count(v); }

std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::Markovian: return "markov";
    case ModelVariant::NonMarkovian: return "nonmarkov";
    case ModelVariant::MarkovianAmplitude: return "markov-amp";
    case ModelVariant::NonMarkovianAmplitude: return "nonmarkov-amp";
  }
  return "markov";
}

ModelVariant variant_from_string(const std::string& s) {
  if (s == "markov") return ModelVariant::Markovian;
  if (s == "nonmarkov") return ModelVariant::NonMarkovian;
  if (s == "markov-amp") return ModelVariant::MarkovianAmplitude;
  if (s == "nonmarkov-amp") return ModelVariant::NonMarkovianAmplitude;
  throw Error(ErrorKind::Parse, "unknown model variant '" + s + "'");
}

void PulseSet::validate() const {
  if (!(omega_rabi > 0.0) || !(t_pi > 0.0) || !(t_half > 0.0))
    throw Error(ErrorKind::InvalidParameter, "Rabi frequency and durations must be > 0");
  if (std::abs(omega_rabi * t_pi - kPi) > 1e-12 * kPi)
    throw Error(ErrorKind::InconsistentArea, "Omega * t_pi != pi");
  if (std::abs(omega_rabi * t_half - kPi / 2) > 1e-12 * kPi)
    throw Error(ErrorKind::InconsistentArea, "Omega * t_half != pi/2");
}

PulseSpec PulseSet::pulse(GateId id) const {
  const auto& g = gate_spec(id);
  return {omega_rabi, g.pi_pulse ? t_pi : t_half, radians(g.phase)};
}

PulseSet PulseSet::from_rabi(double omega_rabi) { return {omega_rabi, kPi / omega_rabi, kPi / (2.0 * omega_rabi)}; }

GateSet ideal_gate_set(const PulseSet& pulses, ModelVariant variant) {
  pulses.validate();
  GateSet gs;
  gs.pulses = pulses;
  gs.variant = variant;
  return gs;
}

GateSet ideal_gate_set(double omega_rabi, double t_pi, double t_half, ModelVariant variant) {
  return ideal_gate_set(PulseSet{omega_rabi, t_pi, t_half}, variant);
}

FilteredParams restrict_to(ModelVariant v, FilteredParams fp) {
  if (!has_nonmarkov(v)) fp.gamma2 = fp.delta2 = 0.0;
  if (!has_amplitude(v)) fp.delta_gamma1 = 0.0;
  return fp;
}

namespace {

void push_fp(std::vector<double>& out, const FilteredParams& fp, ModelVariant v) {
  out.push_back(fp.gamma1);
  out.push_back(fp.delta1);
  if (has_nonmarkov(v)) {
    out.push_back(fp.gamma2);
    out.push_back(fp.delta2);
  }
  if (has_amplitude(v)) out.push_back(fp.delta_gamma1);
}

FilteredParams read_fp(const VecX& th, int& k, ModelVariant v) {
  FilteredParams fp;
  fp.gamma1 = th(k++);
  fp.delta1 = th(k++);
  if (has_nonmarkov(v)) {
    fp.gamma2 = th(k++);
    fp.delta2 = th(k++);
  }
  if (has_amplitude(v)) fp.delta_gamma1 = th(k++);
  return fp;
}

}  // namespace

VecX pack(const GateSet& gs) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(param_count(gs.variant)));
  for (int i = 0; i < 3; ++i) out.push_back(gs.r(i));
  for (int i = 0; i < 4; ++i) out.push_back(gs.e(i));
  push_fp(out, gs.fp_pi, gs.variant);
  push_fp(out, gs.fp_half, gs.variant);
  return Eigen::Map<VecX>(out.data(), static_cast<Eigen::Index>(out.size()));
}

GateSet unpack(const VecX& theta, ModelVariant variant, const PulseSet& pulses) {
  if (theta.size() != param_count(variant))
    throw Error(ErrorKind::LengthMismatch, "theta has " + std::to_string(theta.size()) + " entries, variant " +
                                               to_string(variant) + " needs " + std::to_string(param_count(variant)));
  GateSet gs;
  gs.variant = variant;
  gs.pulses = pulses;
  gs.r = theta.segment<3>(0);
  gs.e = theta.segment<4>(3);
  int k = 7;
  gs.fp_pi = read_fp(theta, k, variant);
  gs.fp_half = read_fp(theta, k, variant);
  return gs;
}

std::vector<std::string> param_names(ModelVariant v) {
  std::vector<std::string> n = {"r1", "r2", "r3", "e0", "e1", "e2", "e3"};
  for (const char* d : {"pi", "half"}) {
    n.push_back(std::string("gamma1_") + d);
    n.push_back(std::string("delta1_") + d);
    if (has_nonmarkov(v)) {
      n.push_back(std::string("gamma2_") + d);
      n.push_back(std::string("delta2_") + d);
    }
    if (has_amplitude(v)) n.push_back(std::string("delta_gamma1_") + d);
  }
  return n;
}

Vec4d rho_vector(const Vec3& r) { return Vec4d(1.0, r(0), r(1), r(2)) / std::sqrt(2.0); }
Vec4d meas_vector(const Vec4d& e) { return e / std::sqrt(2.0); }
Vec3 bloch_from_rho(const Vec4d& rho) { return rho.tail<3>() / rho(0); }
Vec4d povm_from_meas(const Vec4d& meas) { return meas * std::sqrt(2.0); }

ProcessMatrix gate_chi(const GateSet& gs, GateId id) {
  const auto& spec = gate_spec(id);
  const FilteredParams fp = restrict_to(gs.variant, gs.params_for(id));
  const auto blocks = chi_blocks<double>(spec.area, fp.gamma1, fp.gamma2, fp.delta1, fp.delta2, fp.delta_gamma1);
  return process_matrix(spec.phase, blocks);
}

PTM gate_ptm(const GateSet& gs, GateId id) { return chi_to_ptm<double>(gate_chi(gs, id)); }

GateSetPTMs to_ptms(const GateSet& gs) {
  GateSetPTMs out;
  for (auto id : kAllGates) out.gates[static_cast<std::size_t>(index(id))] = gate_ptm(gs, id);
  out.rho = rho_vector(gs.r);
  out.meas = meas_vector(gs.e);
  return out;
}

double ConstraintReport::max_violation() const {
  return std::max({gamma1_pi, gamma1_half, delta_gamma1_pi, delta_gamma1_half, bloch, e0_range, e_cone});
}

ConstraintReport validate_constraints(const GateSet& gs) {
  ConstraintReport rep;
  rep.gamma1_pi = std::max(0.0, -gs.fp_pi.gamma1);
  rep.gamma1_half = std::max(0.0, -gs.fp_half.gamma1);
  if (has_amplitude(gs.variant)) {
    rep.delta_gamma1_pi = std::max(0.0, -gs.fp_pi.delta_gamma1);
    rep.delta_gamma1_half = std::max(0.0, -gs.fp_half.delta_gamma1);
  }
  rep.bloch = std::max(0.0, gs.r.squaredNorm() - 1.0);
  const double e0 = gs.e(0);
  rep.e0_range = std::max({0.0, -e0, e0 - 2.0});
  const double lim = std::min(e0 * e0, (2.0 - e0) * (2.0 - e0));
  rep.e_cone = std::max(0.0, gs.e.tail<3>().squaredNorm() - lim);
  return rep;
}

Vec3 project_bloch(const Vec3& r) {
  const double n = r.norm();
  return n > 1.0 ? Vec3(r / n) : r;
}

namespace {

Eigen::Vector2d project_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d d = b - a;
  const double s = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return a + s * d;
}

}  // namespace

Vec4d project_povm(const Vec4d& e) {
  // The cone is rotation-symmetric in e_vec, so project (e0, |e_vec|) onto the triangle
  // (0,0), (2,0), (1,1) and keep the direction of e_vec.
  const double x = e(0);
  const Vec3 v = e.tail<3>();
  const double y = v.norm();
  if (x >= 0.0 && x <= 2.0 && y <= std::min(x, 2.0 - x)) return e;
  const Eigen::Vector2d p(x, y);
  const std::array<Eigen::Vector2d, 3> verts = {Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0), Eigen::Vector2d(1, 1)};
  Eigen::Vector2d best = verts[0];
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const auto q = project_segment(p, verts[static_cast<std::size_t>(i)], verts[static_cast<std::size_t>((i + 1) % 3)]);
    const double d = (q - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  Vec4d out;
  out(0) = best(0);
  out.tail<3>() = y > 0.0 ? Vec3(v * (best(1) / y)) : Vec3::Zero();
  return out;
}

void project_feasible(GateSet& gs) {
  for (FilteredParams* fp : {&gs.fp_pi, &gs.fp_half}) {
    fp->gamma1 = std::max(0.0, fp->gamma1);
    fp->delta_gamma1 = std::max(0.0, fp->delta_gamma1);
  }
  gs.r = project_bloch(gs.r);
  gs.e = project_povm(gs.e);
}

VecX pack_general(const GateSetPTMs& g) {
  VecX th(kGeneralParams);
  th.segment<3>(0) = bloch_from_rho(g.rho);
  th.segment<4>(3) = povm_from_meas(g.meas);
  int k = 7;
  for (const auto& G : g.gates)
    for (int a = 1; a < 4; ++a)
      for (int b = 0; b < 4; ++b) th(k++) = G(a, b);
  return th;
}

GateSetPTMs unpack_general(const VecX& theta) {
  if (theta.size() != kGeneralParams)
    throw Error(ErrorKind::LengthMismatch, "general theta needs 67 entries");
  GateSetPTMs g;
  g.rho = rho_vector(theta.segment<3>(0));
  g.meas = meas_vector(theta.segment<4>(3));
  int k = 7;
  for (auto& G : g.gates) {
    G.setZero();
    G(0, 0) = 1.0;
    for (int a = 1; a < 4; ++a)
      for (int b = 0; b < 4; ++b) G(a, b) = theta(k++);
  }
  return g;
}

}  // namespace cgst
