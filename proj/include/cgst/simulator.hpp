#pragma once

#include <optional>

#include "cgst/design.hpp"

namespace cgst {

struct NoiseConfig {
  OUParams phase;
  std::optional<OUParams> amplitude;
  double mc_dt = 0.0;  // s; 0 selects min(tau_c, 2 pi / Omega) / 50
  long n_traj = 10000;

  // Throws InvalidConfig unless mc_dt <= min(tau_c, 2 pi / Omega) / 20 and n_traj >= 1.
  void validate(double omega_rabi) const;
  double step(double omega_rabi) const;
};

struct McChannel {
  PTM mean = PTM::Zero();
  PTM stderr_ = PTM::Zero();  // per-entry standard error of the mean
  long n_traj = 0;
};

// Trajectory-averaged channel of one noisy pulse. Trajectory i uses streams (seed, key..., i, 0) for
// phase noise and (seed, key..., i, 1) for amplitude noise, both stationary-initialised. Each step
// applies exp(-i H dt) with the noise averaged over the step end points.
McChannel mc_gate_channel(const NoiseConfig& noise, const PulseSpec& pulse, std::uint64_t seed,
                          const std::vector<std::uint64_t>& key = {});

// Unitary of one pulse under a single noise realisation (phase and amplitude samples on the step grid).
Mat2c trajectory_unitary(const PulseSpec& pulse, double dt, const std::vector<double>& phase,
                         const std::vector<double>* amplitude);

struct McGateSet {
  GateSetPTMs ptms;  // ideal rho and M0, Monte Carlo gates
  std::array<PTM, 5> stderr_;
};

// Gate k uses key {k}.
McGateSet mc_gate_set(const NoiseConfig& noise, const PulseSet& pulses, std::uint64_t seed);

// Parametrised gate set with the filtered integrals of the configured OU spectra and ideal SPAM.
GateSet analytic_gate_set(const NoiseConfig& noise, const PulseSet& pulses, ModelVariant variant,
                          const QuadConfig& quad = {});

// Binomial sampling of every circuit at `shots`; circuit i uses stream (seed, 0x5a, i).
Dataset analytic_dataset(const GateSetPTMs& truth, const std::vector<Circuit>& circuits, long shots,
                         std::uint64_t seed);
Dataset analytic_dataset(const GateSet& truth, const Design& design, std::uint64_t seed);

enum class McMode { TwoStage, PerShot };

// TwoStage: mc_gate_set (seed) composed per circuit, then analytic_dataset (seed + 1).
// PerShot: every gate of every shot draws fresh stationary noise; shot s of circuit i uses key
// (0x73, i, s, position).
Dataset mc_dataset(const NoiseConfig& noise, const PulseSet& pulses, const std::vector<Circuit>& circuits, long shots,
                   std::uint64_t seed, McMode mode = McMode::TwoStage);
Dataset mc_dataset(const NoiseConfig& noise, const PulseSet& pulses, const Design& design, std::uint64_t seed,
                   McMode mode = McMode::TwoStage);

}  // namespace cgst
