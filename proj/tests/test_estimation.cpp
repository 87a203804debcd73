#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cgst/estimation.hpp"
#include "cgst/simulator.hpp"

using namespace cgst;

namespace {

const PulseSet kPulses = PulseSet::from_rabi(2 * kPi * 50e3);

GateSet markov_truth() {
  GateSet gs = ideal_gate_set(kPulses);
  gs.fp_pi = {3e-3, 0, 2e-3, 0, 0};
  gs.fp_half = {1.5e-3, 0, 1e-3, 0, 0};
  return gs;
}

Design markov_design(int max_p) {
  Design d = select_fiducial_pairs(ideal_gate_set(kPulses), ModelVariant::Markovian);
  d.depth_schedule = depth_schedule(max_p);
  return d;
}

FitConfig config_for(const Design& d) {
  FitConfig c;
  c.variant = d.variant;
  c.depth_schedule = d.depth_schedule;
  return c;
}

Eigen::Matrix4d random_tp_gauge(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (int r = 1; r < 4; ++r)
    for (int c = 0; c < 4; ++c) t(r, c) += n(rng);
  return t;
}

// Theta with (r, e_vec) -> (-r, -e_vec): the lambda = -1 element of the diag(1, l, l, l) gauge, which
// commutes with every unital PTM.
VecX mirrored(VecX t) {
  t.segment<3>(0) *= -1.0;
  t.segment<3>(4) *= -1.0;
  return t;
}

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

}  // namespace

// ---- Linear inversion ------------------------------------------------------------------------

TEST(LinearQst, PureAndMixedStates) {
  const MatX a = pauli_povm();
  const Vec4d up = rho_vector(Vec3(0, 0, 1));
  EXPECT_LT((bloch_from_rho(linear_qst(a * up, a)) - Vec3(0, 0, 1)).norm(), 1e-14);
  const Vec4d mixed = rho_vector(Vec3::Zero());
  EXPECT_LT(bloch_from_rho(linear_qst(a * mixed, a)).norm(), 1e-14);
}

TEST(LinearQst, FiniteSamplesCanBeNonphysical) {
  const MatX a = pauli_povm();
  const VecX p = a * rho_vector(Vec3(0.6, 0, 0.8));
  int outside = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    RngStream rng(7, {s});
    VecX f(6);
    for (int k = 0; k < 6; k += 2) {
      f(k) = std::binomial_distribution<int>(50, p(k))(rng.engine()) / 50.0;
      f(k + 1) = 1.0 - f(k);
    }
    const Vec3 r = bloch_from_rho(linear_qst(f, a));
    if (r.norm() > 1.0) {
      ++outside;
      EXPECT_NEAR(project_bloch(r).norm(), 1.0, 1e-14);
    }
  }
  EXPECT_GT(outside, 0);
}

TEST(LinearQst, RankDeficientThrows) {
  MatX a = pauli_povm().topRows(4);  // x and y only
  try {
    linear_qst(VecX::Zero(4), a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
  }
}

TEST(LinearQpt, IdealAndNoisyChannels) {
  const MatX a = pauli_povm();
  MatX b(4, 4);
  const Vec3 states[4] = {Vec3(0, 0, 1), Vec3(0, 0, -1), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  for (int s = 0; s < 4; ++s) b.col(s) = rho_vector(states[s]);
  const PTM pi = unitary_ptm(pulse_unitary(kPi, 0.0));
  EXPECT_LT((linear_qpt(a * pi * b, a, b) - Eigen::Vector4d(1, 1, -1, -1).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((linear_qpt(a * b, a, b) - PTM::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  const PTM noisy = gate_ptm(markov_truth(), GateId::G3);
  EXPECT_LT((linear_qpt(a * noisy * b, a, b) - noisy).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(linear_qpt(a * b.leftCols(3), a, b.leftCols(3)), Error);
}

TEST(LinearGst, IdealSetIsSimilar) {
  const auto g = to_ptms(ideal_gate_set(kPulses));
  const auto est = linear_gst(linear_gst_inputs(g));
  for (std::size_t i = 0; i < 5; ++i) {
    const auto a = sorted_eigs(est.gates[i]), b = sorted_eigs(g.gates[i]);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-10);
  }
}

TEST(LinearGst, NoisySpectraMatchGeneratingChannels) {
  NoiseConfig nc;
  nc.phase = {5e-6, 2e13};
  for (auto v : {ModelVariant::Markovian, ModelVariant::NonMarkovian}) {
    const auto g = to_ptms(analytic_gate_set(nc, kPulses, v));
    const auto est = linear_gst(linear_gst_inputs(g));
    for (std::size_t i = 0; i < 5; ++i) {
      const auto a = sorted_eigs(est.gates[i]), b = sorted_eigs(g.gates[i]);
      for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-10);
    }
    // Same probabilities as the generating set.
    Design d = general_design(ideal_gate_set(kPulses), {1});
    for (const auto& c : d.circuits) EXPECT_NEAR(circuit_probability(est, c), circuit_probability(g, c), 1e-12);
  }
}

TEST(LinearGst, GaugeInvariantPredictions) {
  std::mt19937_64 rng(3);
  const auto g = to_ptms(markov_truth());
  const auto t = random_tp_gauge(rng, 0.2);
  const auto moved = apply_gauge(g, t);
  const Design d = general_design(ideal_gate_set(kPulses), {1, 2, 4});
  for (const auto& c : d.circuits) EXPECT_NEAR(circuit_probability(moved, c), circuit_probability(g, c), 1e-12);
}

TEST(LinearGst, SingularGramThrows) {
  auto in = linear_gst_inputs(to_ptms(ideal_gate_set(kPulses)));
  in.gram.col(3) = in.gram.col(2);
  try {
    linear_gst(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularGram);
  }
}

// ---- Costs -----------------------------------------------------------------------------------

TEST(Cost, ZeroAtExactFrequenciesAndPositiveElsewhere) {
  const auto g = to_ptms(markov_truth());
  const Design d = markov_design(8);
  const auto obs = exact_observations(g, d.all_circuits(), 1000.0);
  EXPECT_LT(cost(CostKind::Likelihood, g, obs), 1e-9);
  EXPECT_LT(cost(CostKind::LeastSquares, g, obs), 1e-9);
  const auto ideal = to_ptms(ideal_gate_set(kPulses));
  EXPECT_GT(cost(CostKind::Likelihood, ideal, obs), 0.0);
  EXPECT_GT(cost(CostKind::LeastSquares, ideal, obs), 0.0);
}

TEST(Cost, LikelihoodMatchesBinomialLogLikelihoodDifference) {
  const auto g = to_ptms(markov_truth());
  const Design d = markov_design(4);
  const Dataset ds = analytic_dataset(g, d.all_circuits(), 200, 5);
  const auto obs = observations(ds);
  double ref = 0.0;
  for (const auto& o : obs) {
    const double p = circuit_probability(g, o.circuit), f = o.freq;
    if (f > 0) ref += o.shots * f * std::log(f / p);
    if (f < 1) ref += o.shots * (1 - f) * std::log((1 - f) / (1 - p));
  }
  EXPECT_NEAR(cost(CostKind::Likelihood, g, obs), ref, 1e-9 * std::abs(ref));
}

TEST(FitConfig, Validation) {
  FitConfig c;
  c.depth_schedule = {1, 2, 4};
  EXPECT_EQ(c.switch_depth(), 2);
  c.cost_switch_depth = 3;
  EXPECT_THROW(c.validate(), Error);
  c.cost_switch_depth = 4;
  EXPECT_NO_THROW(c.validate());
  c.depth_schedule = {1, 1};
  EXPECT_THROW(c.validate(), Error);
}

// ---- Parametrised MLE ------------------------------------------------------------------------

TEST(MleFit, IdealDataIsAFixedPoint) {
  const GateSet ideal = ideal_gate_set(kPulses);
  const Design d = markov_design(16);
  const auto r = mle_fit(exact_observations(to_ptms(ideal), d.all_circuits()), config_for(d), ideal);
  EXPECT_LT((r.theta - pack(ideal)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(MleFit, RecoversMarkovianTruthFromExactData) {
  const GateSet truth = markov_truth();
  const Design d = markov_design(16);
  const auto r = mle_fit(exact_observations(to_ptms(truth), d.all_circuits()), config_for(d), ideal_gate_set(kPulses));
  EXPECT_LT((r.theta - pack(truth)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT(r.constraint_residual, 1e-8);
  ASSERT_EQ(r.stages.size(), 5u);
  EXPECT_EQ(r.stages[0].kind, CostKind::LeastSquares);
  EXPECT_EQ(r.stages[3].kind, CostKind::Likelihood);
  EXPECT_EQ(r.stages[4].n_circuits, 55u);
}

TEST(MleFit, RecoversNonMarkovianTruthFromExactData) {
  NoiseConfig nc;
  nc.phase = {5e-6, 2e13};
  const GateSet truth = analytic_gate_set(nc, kPulses, ModelVariant::NonMarkovian);
  Design d = select_fiducial_pairs(ideal_gate_set(kPulses, ModelVariant::NonMarkovian), ModelVariant::NonMarkovian);
  d.depth_schedule = depth_schedule(16);
  const auto r = mle_fit(exact_observations(to_ptms(truth), d.all_circuits()), config_for(d),
                         ideal_gate_set(kPulses, ModelVariant::NonMarkovian));
  EXPECT_LT((r.theta - pack(truth)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(r.gate_set->fp_half.gamma2, 0.0);
  EXPECT_EQ(r.gate_set->fp_pi.delta2, 0.0);
  EXPECT_LT(r.constraint_residual, 1e-8);
}

TEST(MleFit, FeasibleAndNeverWorseThanInit) {
  const GateSet truth = markov_truth();
  Design d = markov_design(16);
  d.shots_per_circuit = 100;
  FitConfig cfg = config_for(d);
  cfg.depth_schedule = {16};
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Dataset ds = analytic_dataset(truth, d, 40 + s);
    const GateSet init = ideal_gate_set(kPulses);
    const auto r = mle_fit(d, ds, cfg, init);
    EXPECT_LT(validate_constraints(*r.gate_set).max_violation(), 1e-8);
    const auto obs = observations(ds);
    EXPECT_LE(cost(CostKind::Likelihood, r.ptms, obs), cost(CostKind::Likelihood, to_ptms(init), obs));
  }
}

TEST(MleFit, StagesImproveAccuracyOnAverage) {
  const GateSet truth = markov_truth();
  Design d = markov_design(16);
  d.shots_per_circuit = 1000;
  const FitConfig cfg = config_for(d);
  std::vector<double> mean(d.depth_schedule.size(), 0.0);
  const int repeats = 100;
  for (int k = 0; k < repeats; ++k) {
    const auto r = mle_fit(d, analytic_dataset(truth, d, 1000 + static_cast<std::uint64_t>(k)), cfg, ideal_gate_set(kPulses));
    for (std::size_t s = 0; s < r.stages.size(); ++s)
      mean[s] += benchmark_distance(unpack(r.stages[s].theta, ModelVariant::Markovian, kPulses), truth) / repeats;
  }
  for (std::size_t s = 1; s < mean.size(); ++s) EXPECT_LT(mean[s], mean[s - 1]) << "stage " << s;
}

namespace {

GateSet perturbed_ideal(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GateSet init = ideal_gate_set(kPulses);
  init.r = Vec3(0.1 * u(rng), 0.1 * u(rng), 0.9 + 0.1 * u(rng));
  init.e = Vec4d(1.0 + 0.05 * u(rng), 0.1 * u(rng), 0.1 * u(rng), 0.9 + 0.05 * u(rng));
  init.fp_pi = {5e-3 * (1 + u(rng)), 0, 1e-2 * u(rng), 0, 0};
  init.fp_half = {5e-3 * (1 + u(rng)), 0, 1e-2 * u(rng), 0, 0};
  project_feasible(init);
  return init;
}

}  // namespace

TEST(MleFit, MultiStartFromPerturbedIdealRecoversTruth) {
  const GateSet truth = markov_truth();
  const Design d = markov_design(4);
  const auto obs = exact_observations(to_ptms(truth), d.all_circuits());
  std::mt19937_64 rng(17);
  for (int s = 0; s < 20; ++s) {
    const auto r = mle_fit(obs, config_for(d), perturbed_ideal(rng));
    EXPECT_LT((r.theta - pack(truth)).cwiseAbs().maxCoeff(), 1e-6) << "start " << s;
  }
}

// Starts spread over the whole SPAM set also reach exact fits that are not the truth: the l = -1
// element of diag(1, l, l, l), and its composition with reflections of delta1 (delta1 enters through
// cos and sin of delta1 / 2, period 4 pi). Every exact fit is gauge-equivalent to the truth; starts
// that do not reach one end far above the noise floor.
TEST(MleFit, BroadMultiStartEndsOnGaugeImagesOrFailsVisibly) {
  const GateSet truth = markov_truth();
  const Design d = markov_design(4);
  const auto tp = to_ptms(truth);
  const auto obs = exact_observations(tp, d.all_circuits());
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int literal = 0, image = 0, stuck = 0;
  for (int s = 0; s < 20; ++s) {
    GateSet init = ideal_gate_set(kPulses);
    init.r = Vec3(u(rng), u(rng), u(rng)) * 0.55;
    init.e = Vec4d(1.0 + 0.2 * u(rng), 0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng));
    init.fp_pi = {2.5e-3 * (1 + u(rng)), 0, 5e-3 * u(rng), 0, 0};
    init.fp_half = {2.5e-3 * (1 + u(rng)), 0, 5e-3 * u(rng), 0, 0};
    project_feasible(init);
    const auto r = mle_fit(obs, config_for(d), init);
    if (r.final_cost > 1.0) {
      EXPECT_GT(r.final_cost, 1e6) << "start " << s;
      ++stuck;
      continue;
    }
    EXPECT_LT(gauge_optimize(r.ptms, tp).cost, 1e-12) << "start " << s;
    ((r.theta - pack(truth)).cwiseAbs().maxCoeff() < 1e-6 ? literal : image)++;
  }
  EXPECT_GT(literal, 0);
  EXPECT_GT(image, 0);
  EXPECT_LE(stuck, 5);
}

TEST(MleFit, InversionImageHasIdenticalProbabilities) {
  const GateSet truth = markov_truth();
  const GateSet image = unpack(mirrored(pack(truth)), ModelVariant::Markovian, kPulses);
  EXPECT_TRUE(validate_constraints(image).ok());
  for (const auto& c : markov_design(16).all_circuits())
    EXPECT_NEAR(circuit_probability(image, c), circuit_probability(truth, c), 1e-14);
}

TEST(MleFit, DeepDataResolvesDeltaBranch) {
  const GateSet truth = markov_truth();
  Design d = markov_design(16);
  d.shots_per_circuit = 1000;
  const Dataset ds = analytic_dataset(truth, d, 77);
  const auto r = mle_fit(d, ds, config_for(d), ideal_gate_set(kPulses));
  const auto obs = observations(ds);
  for (double shift : {2 * kPi / 16, -2 * kPi / 16}) {
    for (int k : {8, 10}) {  // delta1 at t_pi and t_pi/2
      VecX alt = r.theta;
      alt(k) += shift;
      EXPECT_GT(cost(CostKind::Likelihood, to_ptms(unpack(alt, ModelVariant::Markovian, kPulses)), obs),
                cost(CostKind::Likelihood, r.ptms, obs) + 10.0);
    }
  }
}

TEST(MleFit, Errors) {
  const Design d = markov_design(4);
  Dataset partial = analytic_dataset(markov_truth(), d, 1);
  partial.records.pop_back();
  EXPECT_THROW(mle_fit(d, partial, config_for(d), ideal_gate_set(kPulses)), Error);
  GateSet bad = ideal_gate_set(kPulses);
  bad.r = Vec3(0, 0, 1.5);
  try {
    mle_fit(exact_observations(to_ptms(markov_truth()), d.all_circuits()), config_for(d), bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OptimizationFailure);
  }
}

// ---- General model ---------------------------------------------------------------------------

namespace {

Design amplified_general_design(int max_p) {
  Design d = general_design(ideal_gate_set(kPulses), {1});
  d.amplified.assign(d.circuits.size(), true);
  d.depth_schedule = depth_schedule(max_p);
  return d;
}

}  // namespace

TEST(GeneralFit, ExactIdealDataAfterGauge) {
  const auto ideal = to_ptms(ideal_gate_set(kPulses));
  const Design d = amplified_general_design(4);
  FitConfig cfg = config_for(d);
  cfg.general = true;
  const auto r = general_fit(exact_observations(ideal, d.all_circuits()), cfg);
  const auto g = gauge_optimize(r.ptms, ideal);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_LT((g.gauge_fixed.gates[i] - ideal.gates[i]).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GeneralFit, ExactNoisyDataAfterGauge) {
  const auto truth = to_ptms(markov_truth());
  const Design d = amplified_general_design(8);
  FitConfig cfg = config_for(d);
  cfg.general = true;
  const auto r = general_fit(exact_observations(truth, d.all_circuits()), cfg);
  const auto g = gauge_optimize(r.ptms, truth);
  EXPECT_LT(benchmark_distance(g.gauge_fixed, truth, true), 1e-6);
}

TEST(GeneralFit, SampledDataOverfits) {
  const GateSet truth = markov_truth();
  Design d = amplified_general_design(4);
  d.shots_per_circuit = 200;
  FitConfig cfg = config_for(d);
  cfg.general = true;
  const Dataset ds = analytic_dataset(truth, d, 9);
  const auto r = general_fit(d, ds, cfg);
  const auto obs = observations(ds);
  EXPECT_LT(cost(CostKind::Likelihood, r.ptms, obs), cost(CostKind::Likelihood, to_ptms(truth), obs));
  for (const auto& g : r.ptms.gates) EXPECT_LT((g.row(0) - Eigen::RowVector4d(1, 0, 0, 0)).norm(), 1e-15);
}

// Rank at the solution is 67 minus the 12 TP gauge directions.
TEST(GeneralFit, JacobianRankAtSolution) {
  const auto truth = to_ptms(markov_truth());
  const Design d = amplified_general_design(4);
  FitConfig cfg = config_for(d);
  cfg.general = true;
  const auto r = general_fit(exact_observations(truth, d.all_circuits()), cfg);
  EXPECT_EQ(numerical_rank(general_probability_jacobian(r.ptms, d.all_circuits()), 1e-7), kGeneralParams - 12);
}

// ---- Gauge -----------------------------------------------------------------------------------

TEST(GaugeOptimize, IdentityWhenAlreadyAligned) {
  const auto g = to_ptms(markov_truth());
  const auto r = gauge_optimize(g, g);
  EXPECT_LT(r.cost, 1e-28);
  EXPECT_LT((r.t - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(GaugeOptimize, RecoversConstructedOrbits) {
  std::mt19937_64 rng(21);
  const auto target = to_ptms(markov_truth());
  for (int k = 0; k < 10; ++k) {
    const auto t0 = random_tp_gauge(rng, 0.3);
    const auto est = apply_gauge(target, t0);
    const auto r = gauge_optimize(est, target);
    EXPECT_LT(r.cost, 1e-10) << k;
    EXPECT_LT((r.t * t0 - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-6);
    for (const auto& c : markov_design(4).all_circuits())
      EXPECT_NEAR(circuit_probability(r.gauge_fixed, c), circuit_probability(est, c), 1e-12);
  }
}

TEST(GaugeOptimize, RejectsNonTpEstimate) {
  auto g = to_ptms(markov_truth());
  g.gates[2](0, 3) = 0.1;
  EXPECT_THROW(gauge_optimize(g, g), Error);
}

// ---- Benchmark -------------------------------------------------------------------------------

TEST(BenchmarkDistance, ZeroForIdenticalSets) {
  EXPECT_EQ(benchmark_distance(markov_truth(), markov_truth(), true), 0.0);
  EXPECT_LT(benchmark_distance(to_ptms(markov_truth()), to_ptms(markov_truth()), true), 1e-15);
}

TEST(BenchmarkDistance, ClosedFormGateTerm) {
  GateSet truth = ideal_gate_set(kPulses);
  truth.fp_pi.gamma1 = truth.fp_half.gamma1 = 0.01;
  const double term = std::abs(1 - std::exp(-0.01)) / 4 + 0.5 * std::sqrt(1 + std::exp(-0.01) - 2 * std::exp(-0.005));
  EXPECT_NEAR(benchmark_distance(ideal_gate_set(kPulses), truth), term, 1e-15);
  // The Choi route agrees for Markovian pairs.
  EXPECT_NEAR(benchmark_distance(to_ptms(ideal_gate_set(kPulses)), to_ptms(truth)), term, 1e-12);
}

TEST(BenchmarkDistance, SpamTermsAddOnlyFiducialDistances) {
  const GateSet truth = markov_truth();
  GateSet est = truth;
  est.fp_pi.delta1 += 1e-3;
  est.r = Vec3(0.1, 0, 0.9);
  est.e = Vec4d(0.95, 0, 0.05, 0.9);
  const double gates = benchmark_distance(est, truth), all = benchmark_distance(est, truth, true);
  const auto [tr, tm] = fiducial_trace_distances(est.r, truth.r, est.e, truth.e);
  EXPECT_NEAR(7 * all - 5 * gates, tr + tm, 1e-14);
}

TEST(BenchmarkDistance, NonMarkovianSetsUseChoiDistance) {
  NoiseConfig nc;
  nc.phase = {5e-6, 2e13};
  const GateSet a = analytic_gate_set(nc, kPulses, ModelVariant::NonMarkovian);
  const GateSet b = ideal_gate_set(kPulses);
  double ref = 0.0;
  for (auto id : kAllGates) ref += general_channel_distance(gate_ptm(a, id), gate_ptm(b, id)) / 5;
  EXPECT_NEAR(benchmark_distance(a, b), ref, 1e-15);
}
