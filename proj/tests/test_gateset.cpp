#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cgst/gateset.hpp"

using namespace cgst;

namespace {

const PulseSet kPulses = PulseSet::from_rabi(2 * kPi * 50e3);

double expectation(const GateSetPTMs& g, const PTM& op) { return g.meas.dot(op * g.rho); }

}  // namespace

TEST(GateSpecs, AnglesAndPhases) {
  const auto& s = gate_specs();
  EXPECT_EQ(s[0].area, kPi);
  EXPECT_EQ(s[0].phase, Phase::Zero);
  EXPECT_TRUE(s[0].pi_pulse);
  const std::array<Phase, 4> phases = {Phase::Zero, Phase::ThreeHalfPi, Phase::HalfPi, Phase::Pi};
  for (int i = 1; i < 5; ++i) {
    EXPECT_EQ(s[static_cast<std::size_t>(i)].area, kPi / 2);
    EXPECT_EQ(s[static_cast<std::size_t>(i)].phase, phases[static_cast<std::size_t>(i - 1)]);
    EXPECT_FALSE(s[static_cast<std::size_t>(i)].pi_pulse);
  }
  EXPECT_EQ(gate_from_string("G4"), GateId::G4);
  EXPECT_EQ(to_string(GateId::G3), "G3");
  EXPECT_THROW(gate_from_string("G6"), Error);
}

TEST(IdealGateSet, InvariantsAndActions) {
  const GateSet gs = ideal_gate_set(kPulses);
  EXPECT_TRUE(validate_constraints(gs).ok());
  EXPECT_EQ(gs.r, Vec3(0, 0, 1));
  EXPECT_EQ(gs.e, Vec4d(1, 0, 0, 1));
  const auto g = to_ptms(gs);
  EXPECT_NEAR(expectation(g, PTM::Identity()), 1.0, 1e-15);
  EXPECT_NEAR(expectation(g, g.gates[0]), 0.0, 1e-15);
  EXPECT_LT((g.gates[4] * g.gates[1] - PTM::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((g.gates[3] * g.gates[2] - PTM::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(IdealGateSet, RejectsInconsistentArea) {
  try {
    ideal_gate_set(2 * kPi * 50e3, 1e-5 * (1 + 1e-9), 5e-6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InconsistentArea);
  }
}

TEST(PackUnpack, LengthsPerVariant) {
  EXPECT_EQ(param_count(ModelVariant::Markovian), 11);
  EXPECT_EQ(param_count(ModelVariant::NonMarkovian), 15);
  EXPECT_EQ(param_count(ModelVariant::MarkovianAmplitude), 13);
  EXPECT_EQ(param_count(ModelVariant::NonMarkovianAmplitude), 17);
  for (auto v : {ModelVariant::Markovian, ModelVariant::NonMarkovian, ModelVariant::MarkovianAmplitude,
                 ModelVariant::NonMarkovianAmplitude}) {
    EXPECT_EQ(pack(ideal_gate_set(kPulses, v)).size(), param_count(v));
    EXPECT_EQ(static_cast<int>(param_names(v).size()), param_count(v));
    EXPECT_EQ(variant_from_string(to_string(v)), v);
  }
}

TEST(PackUnpack, RoundTripOnRandomVectors) {
  std::mt19937_64 g(21);
  std::normal_distribution<double> n;
  for (auto v : {ModelVariant::Markovian, ModelVariant::NonMarkovianAmplitude}) {
    for (int i = 0; i < 10; ++i) {
      VecX th(param_count(v));
      for (Eigen::Index k = 0; k < th.size(); ++k) th(k) = n(g);
      EXPECT_EQ(pack(unpack(th, v, kPulses)), th);
    }
  }
  try {
    unpack(VecX::Zero(12), ModelVariant::Markovian, kPulses);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
  }
}

TEST(PackUnpack, MarkovianOrder) {
  GateSet gs = ideal_gate_set(kPulses);
  gs.fp_pi = {0.1, 0.0, 0.2, 0.0, 0.0};
  gs.fp_half = {0.3, 0.0, 0.4, 0.0, 0.0};
  const VecX th = pack(gs);
  EXPECT_EQ(th.tail<4>(), Eigen::Vector4d(0.1, 0.2, 0.3, 0.4));
}

TEST(Constraints, Examples) {
  GateSet gs = ideal_gate_set(kPulses);
  gs.e = Vec4d(1, 0.8, 0.8, 0);
  const auto rep = validate_constraints(gs);
  EXPECT_FALSE(rep.ok());
  EXPECT_NEAR(rep.e_cone, 0.28, 1e-14);
  gs = ideal_gate_set(kPulses);
  gs.r = Vec3(0.6, 0.0, 0.8);
  EXPECT_TRUE(validate_constraints(gs).ok());
  gs.fp_half.gamma1 = -0.02;
  EXPECT_NEAR(validate_constraints(gs).gamma1_half, 0.02, 1e-15);
}

TEST(Constraints, AgreeWithChannelPhysicality) {
  std::mt19937_64 g(22);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int feasible = 0, infeasible = 0;
  for (int i = 0; i < 400; ++i) {
    GateSet gs = ideal_gate_set(kPulses);
    gs.r = Vec3(u(g), u(g), u(g)) * 0.7;
    gs.e = Vec4d(1 + 0.3 * u(g), 0.5 * u(g), 0.5 * u(g), 0.5 * u(g));
    gs.fp_pi = {0.05 * u(g), 0, 0.3 * u(g), 0, 0};
    gs.fp_half = {0.05 * u(g), 0, 0.3 * u(g), 0, 0};
    bool physical = true;
    for (auto id : kAllGates) physical = physical && cptp_check(gate_chi(gs, id)).passes(1e-8);
    Eigen::SelfAdjointEigenSolver<Mat2c> rho(state_operator(gs.r)), m(povm_operator(gs.e)),
        mc(Mat2c(Mat2c::Identity() - povm_operator(gs.e)));
    physical = physical && rho.eigenvalues().minCoeff() >= -1e-12 && m.eigenvalues().minCoeff() >= -1e-12 &&
               mc.eigenvalues().minCoeff() >= -1e-12;
    EXPECT_EQ(validate_constraints(gs).ok(), physical);
    (physical ? feasible : infeasible)++;
  }
  EXPECT_GT(feasible, 20);
  EXPECT_GT(infeasible, 20);
}

TEST(Projection, LandsOnFeasibleSetAndIsIdempotent) {
  std::mt19937_64 g(23);
  std::normal_distribution<double> n;
  for (int i = 0; i < 200; ++i) {
    GateSet gs = ideal_gate_set(kPulses, ModelVariant::MarkovianAmplitude);
    gs.r = Vec3(n(g), n(g), n(g));
    gs.e = Vec4d(1 + n(g), n(g), n(g), n(g));
    gs.fp_pi = {n(g), 0, n(g), 0, n(g)};
    gs.fp_half = {n(g), 0, n(g), 0, n(g)};
    project_feasible(gs);
    EXPECT_TRUE(validate_constraints(gs).ok(1e-12));
    GateSet again = gs;
    project_feasible(again);
    EXPECT_LT((pack(again) - pack(gs)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Projection, PovmIsNearestPointInCone) {
  std::mt19937_64 g(24);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Vec4d e(1 + n(g), n(g), n(g), n(g));
    const Vec4d p = project_povm(e);
    const double d = (p - e).norm();
    // Random feasible points are never closer.
    for (int k = 0; k < 200; ++k) {
      const double e0 = 2 * u(g);
      Vec3 v(n(g), n(g), n(g));
      v *= u(g) * std::min(e0, 2 - e0) / v.norm();
      Vec4d q;
      q << e0, v;
      EXPECT_GE((q - e).norm(), d - 1e-12);
    }
  }
}

TEST(GeneralModel, PackUnpackRoundTrip) {
  GateSet gs = ideal_gate_set(kPulses);
  gs.fp_pi = {0.01, 0, 0.02, 0, 0};
  gs.r = Vec3(0.1, 0.2, 0.9);
  const auto g = to_ptms(gs);
  const VecX th = pack_general(g);
  EXPECT_EQ(th.size(), kGeneralParams);
  const auto back = unpack_general(th);
  for (int i = 0; i < 5; ++i)
    EXPECT_LT((back.gates[static_cast<std::size_t>(i)] - g.gates[static_cast<std::size_t>(i)]).norm(), 1e-15);
  EXPECT_LT((back.rho - g.rho).norm(), 1e-15);
  EXPECT_LT((back.meas - g.meas).norm(), 1e-15);
  EXPECT_THROW(unpack_general(VecX::Zero(66)), Error);
}

TEST(GateSetPTMs, VectorsMatchOperators) {
  const Vec3 r(0.2, -0.1, 0.7);
  const Vec4d e(0.9, 0.1, 0.2, 0.3);
  // <<M|rho>> = Tr(M rho)
  EXPECT_NEAR(meas_vector(e).dot(rho_vector(r)), (povm_operator(e) * state_operator(r)).trace().real(), 1e-15);
  EXPECT_LT((bloch_from_rho(rho_vector(r)) - r).norm(), 1e-15);
  EXPECT_LT((povm_from_meas(meas_vector(e)) - e).norm(), 1e-15);
}
