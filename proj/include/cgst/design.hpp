#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cgst/gateset.hpp"

namespace cgst {

struct Circuit {
  std::optional<GateId> prep;
  GateId germ = GateId::G1;
  int reps = 1;
  std::optional<GateId> meas;

  auto operator<=>(const Circuit&) const = default;
};

// "prep;germ^p;meas", with "{}" for an empty fiducial.
std::string to_string(const Circuit& c);
Circuit parse_circuit(const std::string& s);

inline constexpr std::array<std::optional<GateId>, 4> kPrepFiducials = {std::nullopt, GateId::G1, GateId::G2,
                                                                        GateId::G3};
inline constexpr std::array<std::optional<GateId>, 5> kMeasFiducials = {std::nullopt, GateId::G2, GateId::G3,
                                                                        GateId::G4, GateId::G5};

struct Design {
  // Templates with reps = 1. Amplified circuits are repeated at every depth of the schedule,
  // the others are run as stored.
  std::vector<Circuit> circuits;
  std::vector<bool> amplified;
  std::vector<int> depth_schedule = {1};
  long shots_per_circuit = 1000;
  ModelVariant variant = ModelVariant::Markovian;

  void validate() const;
  // Circuits run at schedule depths <= max_p, grouped by depth.
  std::vector<Circuit> circuits_up_to(int max_p) const;
  std::vector<Circuit> all_circuits() const { return circuits_up_to(depth_schedule.back()); }
};

struct Record {
  Circuit circuit;
  long shots = 0;
  long plus_counts = 0;
};

struct Dataset {
  std::map<std::string, std::string> header;
  std::vector<Record> records;

  void validate() const;
  // Records whose germ power is <= max_p.
  Dataset up_to(int max_p) const;
  long total_shots() const;
};

void write_dataset(std::ostream& os, const Dataset& d);
Dataset read_dataset(std::istream& is);
void write_design(std::ostream& os, const Design& d);
Design read_design(std::istream& is);

PTM gate_power(const PTM& g, int p);
PTM circuit_ptm(const GateSetPTMs& g, const Circuit& c);

// Probability of outcome +1 (M_0) or -1 (1 - M_0).
double circuit_probability(const GateSetPTMs& g, const Circuit& c, int outcome = +1);
double circuit_probability(const GateSet& gs, const Circuit& c, int outcome = +1);

// d[PTM(germ^p)]/d theta / p for every filtered parameter of gs.variant (columns in pack order after
// the 7 SPAM entries), rows are the 16 PTM entries in row-major order. Central differences.
MatX amplification_gradient(const GateSet& gs, GateId germ, int p, double eps = 1e-6);

// Jacobian of the +1 probabilities of `circuits` with respect to pack(gs), central differences.
MatX probability_jacobian(const GateSet& gs, const std::vector<Circuit>& circuits, double eps = 1e-4);
// Same for the 67-entry general parametrisation.
MatX general_probability_jacobian(const GateSetPTMs& g, const std::vector<Circuit>& circuits, double eps = 1e-4);

// Gram matrix <<E_b|F_s>> = meas^T H_b H_s rho over the measurement and preparation fiducials (5 x 4).
Eigen::Matrix<double, 5, 4> fiducial_gram(const GateSetPTMs& g);

int numerical_rank(const MatX& m, double rel_tol = 1e-9);

// True for gamma2 (delta2) of a duration with cos(Omega t) = 0 (sin(Omega t) = 0): its filter
// prefactor vanishes, so the integral is zero for every spectrum.
bool structurally_zero(ModelVariant variant, const PulseSet& pulses, int k);

// One distinct circuit per parameter of `variant`, taken in pack order. A candidate (prep, germ, meas)
// is scored by its central-difference sensitivities dp/dtheta_k stacked over the scoring `depths`
// (depth 1 only for the non-amplified non-Markovian gamma2/delta2 circuits). The pick is the most
// sensitive candidate among those adding a new direction to the stacked Jacobian, plain sensitivity
// once none does. Filtered parameters only consider germs of their own duration. Ties go to the
// lexicographically smaller (germ, prep, meas). A structurally zero parameter without sensitivity
// gets the first unused candidate; any other parameter without sensitivity is a DegenerateDesign
// error. Scoring over several depths matters: G2^4 is the identity, so a fiducial pair that reads
// out the pi/2 over-rotation at p = 1 can be blind to it at every p = 4k.
Design select_fiducial_pairs(const GateSet& gs, ModelVariant variant, double eps = 1e-4,
                             const std::vector<int>& depths = {1, 2, 4, 8, 16});

// {1, 2, 4, ..., max_p}; max_p must be a power of two.
std::vector<int> depth_schedule(int max_p);

// Greedy choice over (prep, germ^p, meas) triples with p in `depths`: each step takes the circuit
// that most increases the Jacobian rank, then the log-volume of its nonzero singular values.
// Stops when the rank of the full candidate pool is reached, or at target_count if that is larger.
Design general_design(const GateSet& gs_ideal, const std::vector<int>& depths = {1}, int target_count = 0);

}  // namespace cgst
