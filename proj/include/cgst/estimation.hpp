#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cgst/design.hpp"

namespace cgst {

// ---- Linear inversion ------------------------------------------------------------------------

// Rows of A are measurement effects <<E_k| (4-vectors), f_k their observed probabilities.
// Returns |rho>> = (A^T A)^-1 A^T f. Throws RankDeficient unless A has rank 4.
Vec4d linear_qst(const VecX& frequencies, const MatX& povm);

// Six-element Pauli POVM {(1 +- sigma_k)/2}, rows ordered +x, -x, +y, -y, +z, -z.
MatX pauli_povm();

// F_{ks} = <<E_k| G |rho_s>>, columns of B are the prepared states.
// G = (A^T A)^-1 A^T F B^T (B B^T)^-1. Throws RankDeficient.
PTM linear_qpt(const MatX& f, const MatX& a, const MatX& b);

struct LinearGstInputs {
  std::array<MatX, 5> f;  // F_i(b, s) = <<E_b| G_i |rho_s>>, 5 x 4
  MatX gram;              // g(b, s) = <<E_b|rho_s>>
  VecX r0;                // R0(b) = <<E_b|rho_0>>
  Eigen::RowVectorXd q0;  // Q0(s) = <<M_0|rho_s>>
};

// Exact inputs over the measurement fiducials x preparation fiducials of `g`.
LinearGstInputs linear_gst_inputs(const GateSetPTMs& g);

// G_i = g^+ F_i, rho = g^+ R0, M = Q0. The result equals B^-1 (G_i, rho, M) B for the unknown
// preparation-fiducial matrix B, i.e. the truth only up to a similarity transform. Throws
// SingularGram when g has rank < 4.
GateSetPTMs linear_gst(const LinearGstInputs& in);

// ---- Maximum likelihood ----------------------------------------------------------------------

enum class CostKind { LeastSquares, Likelihood };
std::string to_string(CostKind k);

struct FitConfig {
  ModelVariant variant = ModelVariant::Markovian;
  bool general = false;  // 67-parameter TP-PTM model instead of `variant`
  std::vector<int> depth_schedule = {1};
  // Stages below this depth use the least-squares cost, the rest the likelihood.
  // 0 selects the second-to-last stage.
  int cost_switch_depth = 0;
  double ftol = 1e-12;     // relative cost decrease that ends a stage
  double cost_atol = 1e-10;  // absolute decrease (in log-likelihood units) that ends a stage
  int max_iterations = 400;  // per stage
  double fd_step = 1e-7;
  double cp_tolerance = 1e-8;  // non-Markovian chi eigenvalue floor
  bool require_convergence = false;  // throw OptimizationFailure when a stage hits max_iterations

  void validate() const;
  int switch_depth() const;
};

// One (circuit, weight, frequency) term of the cost. Weight is the shot count.
struct Observation {
  Circuit circuit;
  double shots = 0.0;
  double freq = 0.0;
};

std::vector<Observation> observations(const Dataset& d);
// Noise-free frequencies of `circuits` under `g`, each with weight `shots`.
std::vector<Observation> exact_observations(const GateSetPTMs& g, const std::vector<Circuit>& circuits,
                                            double shots = 1e12);

// Both costs are sums over circuits and the two outcomes, weighted by shots, probabilities clipped
// to [1e-12, 1 - 1e-12]:
//   least squares   N (f - p)^2 / p + N (f - p)^2 / (1 - p), with p and 1 - p floored at 1e-4
//                   in the weights
//   likelihood      N f log(f/p) + N (1 - f) log((1 - f)/(1 - p)), plus N (p - clip(p))^2 / 1e-4
//                   for predictions outside the clip range (general model)
// The likelihood form is the negative log-likelihood minus its value at p = f.
double cost(CostKind kind, const GateSetPTMs& g, const std::vector<Observation>& obs);

struct StageReport {
  int depth = 0;
  CostKind kind = CostKind::LeastSquares;
  std::size_t n_circuits = 0;
  double cost_start = 0.0;
  double cost_end = 0.0;
  int iterations = 0;
  bool converged = false;
  VecX theta;  // estimate at the end of the stage
};

struct FitResult {
  bool general = false;
  ModelVariant variant = ModelVariant::Markovian;
  VecX theta;
  std::optional<GateSet> gate_set;  // parametrised fits only
  GateSetPTMs ptms;
  CostKind final_kind = CostKind::Likelihood;
  double final_cost = 0.0;
  std::vector<StageReport> stages;
  double constraint_residual = 0.0;
  double wall_seconds = 0.0;
  bool converged = true;
};

// Staged projected Levenberg-Marquardt. Stage k uses every observation with germ power <= the k-th
// schedule depth and warm-starts from stage k-1. Iterates are projected onto the constraint set
// (gamma1, delta_gamma1 >= 0, Bloch ball, POVM cone); non-Markovian steps whose chi has an
// eigenvalue below -cp_tolerance are rejected. Throws OptimizationFailure on an infeasible init.
FitResult mle_fit(const std::vector<Observation>& obs, const FitConfig& cfg, const GateSet& init);
// Checks that `data` covers every circuit of `design` first.
FitResult mle_fit(const Design& design, const Dataset& data, const FitConfig& cfg, const GateSet& init);

// Same machinery over the 67 general parameters; TP is structural, CP and SPAM positivity are not
// imposed. Starts from `init` (ideal gate set by default). The general cost has local minima, so
// every stage after the first also runs from `init` and keeps whichever start ends lower.
FitResult general_fit(const std::vector<Observation>& obs, const FitConfig& cfg,
                      const std::optional<GateSetPTMs>& init = std::nullopt);
FitResult general_fit(const Design& design, const Dataset& data, const FitConfig& cfg,
                      const std::optional<GateSetPTMs>& init = std::nullopt);

// ---- Gauge -----------------------------------------------------------------------------------

// (T G_i T^-1, T rho, M T^-1)
GateSetPTMs apply_gauge(const GateSetPTMs& g, const Eigen::Matrix4d& t);

struct GaugeResult {
  GateSetPTMs gauge_fixed;
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  double cost = 0.0;
  int iterations = 0;
};

// Minimises sum_i ||T G_i T^-1 - G_i^t||_F^2 + ||T rho - rho^t||^2 + ||M T^-1 - M^t||^2 over T with
// first row (1, 0, 0, 0) (12 free entries). Levenberg-Marquardt starts from T = 1 or from the
// least-squares solution of the linearised residuals, whichever is lower. Throws
// OptimizationFailure if `est` is not TP or T becomes singular.
GaugeResult gauge_optimize(const GateSetPTMs& est, const GateSetPTMs& target);

// ---- Benchmark -------------------------------------------------------------------------------

// Mean trace distance over the five gates, plus the two fiducial terms when include_spam.
// Parametrised pairs use the closed-form gate distance when both sets are Markovian (no
// gamma2/delta2/delta_gamma1 content), the Choi-state distance otherwise.
double benchmark_distance(const GateSet& est, const GateSet& truth, bool include_spam = false);
// Choi-state distance per gate; gauge-optimise general estimates before calling.
double benchmark_distance(const GateSetPTMs& est, const GateSetPTMs& truth, bool include_spam = false);

}  // namespace cgst
