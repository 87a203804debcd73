#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cgst/channels.hpp"

namespace cgst {

enum class GateId { G1 = 0, G2, G3, G4, G5 };
inline constexpr int kNumGates = 5;
inline constexpr std::array<GateId, 5> kAllGates = {GateId::G1, GateId::G2, GateId::G3, GateId::G4, GateId::G5};

struct GateSpec {
  GateId id;
  double area;  // theta
  Phase phase;
  bool pi_pulse;  // duration t_pi, otherwise t_half
};

// (pi, 0), (pi/2, 0), (pi/2, 3pi/2), (pi/2, pi/2), (pi/2, pi)
const std::array<GateSpec, 5>& gate_specs();
const GateSpec& gate_spec(GateId id);
std::string to_string(GateId id);
GateId gate_from_string(const std::string& s);
inline int index(GateId id) { return static_cast<int>(id); }

enum class ModelVariant { Markovian, NonMarkovian, MarkovianAmplitude, NonMarkovianAmplitude };

bool has_nonmarkov(ModelVariant v);
bool has_amplitude(ModelVariant v);
// Filtered parameters estimated per pulse duration: 2, 4, 3 or 5.
int filtered_count(ModelVariant v);
// 7 SPAM parameters + 2 * filtered_count: 11, 15, 13, 17.
int param_count(ModelVariant v);
std::string to_string(ModelVariant v);
ModelVariant variant_from_string(const std::string& s);

struct PulseSet {
  double omega_rabi = 2.0 * kPi * 50e3;
  double t_pi = 1e-5;
  double t_half = 5e-6;

  // Omega t_pi = pi and Omega t_half = pi/2 within 1e-12 relative; throws InconsistentArea.
  void validate() const;
  PulseSpec pulse(GateId id) const;
  static PulseSet from_rabi(double omega_rabi);
};

struct GateSet {
  Vec3 r = Vec3(0.0, 0.0, 1.0);
  Vec4d e = Vec4d(1.0, 0.0, 0.0, 1.0);
  FilteredParams fp_pi;
  FilteredParams fp_half;
  ModelVariant variant = ModelVariant::Markovian;
  PulseSet pulses;

  const FilteredParams& params_for(GateId id) const { return gate_spec(id).pi_pulse ? fp_pi : fp_half; }
};

GateSet ideal_gate_set(double omega_rabi, double t_pi, double t_half,
                       ModelVariant variant = ModelVariant::Markovian);
GateSet ideal_gate_set(const PulseSet& pulses, ModelVariant variant = ModelVariant::Markovian);

// Zeroes the filtered parameters the variant does not carry.
FilteredParams restrict_to(ModelVariant v, FilteredParams fp);

// Order: r1..r3, e0..e3, then for t_pi and t_half in turn:
// gamma1, delta1 [, gamma2, delta2] [, delta_gamma1].
VecX pack(const GateSet& gs);
GateSet unpack(const VecX& theta, ModelVariant variant, const PulseSet& pulses);
std::vector<std::string> param_names(ModelVariant v);

// Dense superoperator view shared by the parametrised and general models.
struct GateSetPTMs {
  std::array<PTM, 5> gates;
  Vec4d rho;   // |rho_0>> = (1, r) / sqrt(2)
  Vec4d meas;  // <<M_0| = e / sqrt(2)
};

Vec4d rho_vector(const Vec3& r);
Vec4d meas_vector(const Vec4d& e);
Vec3 bloch_from_rho(const Vec4d& rho);
Vec4d povm_from_meas(const Vec4d& meas);

ProcessMatrix gate_chi(const GateSet& gs, GateId id);
PTM gate_ptm(const GateSet& gs, GateId id);
GateSetPTMs to_ptms(const GateSet& gs);

struct ConstraintReport {
  double gamma1_pi = 0.0;  // magnitude of each violation, 0 when satisfied
  double gamma1_half = 0.0;
  double delta_gamma1_pi = 0.0;
  double delta_gamma1_half = 0.0;
  double bloch = 0.0;  // |r|^2 - 1
  double e0_range = 0.0;
  double e_cone = 0.0;  // |e_vec|^2 - min(e0^2, (2 - e0)^2)

  double max_violation() const;
  bool ok(double tol = 1e-10) const { return max_violation() <= tol; }
};

ConstraintReport validate_constraints(const GateSet& gs);

// Euclidean projection onto the feasible set: gamma1, delta_gamma1 >= 0, |r| <= 1, e in the
// double cone |e_vec| <= min(e0, 2 - e0).
void project_feasible(GateSet& gs);
Vec4d project_povm(const Vec4d& e);
Vec3 project_bloch(const Vec3& r);

// General TP gate set: 5 x 12 free PTM entries (rows X, Y, Z) + r (3) + e (4) = 67.
inline constexpr int kGeneralParams = 67;
VecX pack_general(const GateSetPTMs& g);
GateSetPTMs unpack_general(const VecX& theta);

}  // namespace cgst
