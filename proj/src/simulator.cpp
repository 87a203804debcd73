#include "cgst/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace cgst {

namespace {

double default_dt(const NoiseConfig& n, double omega_rabi) {
  double tau = n.phase.tau_c;
  if (n.amplitude) tau = std::min(tau, n.amplitude->tau_c);
  return std::min(tau, 2.0 * kPi / omega_rabi);
}

// exp(-i (a . sigma) dt / 2)
Mat2c step_unitary(double ax, double ay, double az, double dt) {
  const double norm = std::sqrt(ax * ax + ay * ay + az * az);
  const std::complex<double> i(0.0, 1.0);
  Mat2c u;
  if (norm == 0.0) return Mat2c::Identity();
  const double c = std::cos(0.5 * norm * dt), s = std::sin(0.5 * norm * dt) / norm;
  u(0, 0) = c - i * s * az;
  u(1, 1) = c + i * s * az;
  u(0, 1) = -i * s * std::complex<double>(ax, -ay);
  u(1, 0) = -i * s * std::complex<double>(ax, ay);
  return u;
}

struct PulseGrid {
  int n_steps;
  double dt;
};

PulseGrid grid_for(const NoiseConfig& noise, const PulseSpec& pulse) {
  const double target = noise.step(pulse.omega_rabi);
  const int n = std::max(1, static_cast<int>(std::ceil(pulse.duration / target - 1e-9)));
  return {n, pulse.duration / n};
}

void sample(const OUParams& p, double dt, int n_steps, RngStream& rng, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(n_steps) + 1);
  const OUStepper st(p, dt);
  out[0] = st.start(Start::Stationary, rng);
  for (int k = 0; k < n_steps; ++k) out[static_cast<std::size_t>(k) + 1] = st.step(out[static_cast<std::size_t>(k)], rng);
}

Mat2c noisy_unitary(const NoiseConfig& noise, const PulseSpec& pulse, const PulseGrid& g, std::uint64_t seed,
                    std::vector<std::uint64_t> key, std::vector<double>& ph, std::vector<double>& am) {
  key.push_back(0);
  RngStream rp(seed, key);
  sample(noise.phase, g.dt, g.n_steps, rp, ph);
  if (noise.amplitude) {
    key.back() = 1;
    RngStream ra(seed, key);
    sample(*noise.amplitude, g.dt, g.n_steps, ra, am);
    return trajectory_unitary(pulse, g.dt, ph, &am);
  }
  return trajectory_unitary(pulse, g.dt, ph, nullptr);
}

}  // namespace

void NoiseConfig::validate(double omega_rabi) const {
  try {
    phase.validate();
    if (amplitude) amplitude->validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::InvalidConfig, e.what());
  }
  if (!(omega_rabi > 0.0)) throw Error(ErrorKind::InvalidConfig, "Rabi frequency must be > 0");
  if (n_traj < 1) throw Error(ErrorKind::InvalidConfig, "n_traj must be >= 1");
  if (mc_dt < 0.0) throw Error(ErrorKind::InvalidConfig, "mc_dt must be >= 0");
  if (mc_dt > 0.0 && mc_dt > default_dt(*this, omega_rabi) / 20.0 * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidConfig, "mc_dt exceeds min(tau_c, 2 pi / Omega) / 20");
}

double NoiseConfig::step(double omega_rabi) const {
  return mc_dt > 0.0 ? mc_dt : default_dt(*this, omega_rabi) / 50.0;
}

Mat2c trajectory_unitary(const PulseSpec& pulse, double dt, const std::vector<double>& phase,
                         const std::vector<double>* amplitude) {
  const double cphi = std::cos(pulse.phase), sphi = std::sin(pulse.phase);
  Mat2c u = Mat2c::Identity();
  for (std::size_t k = 0; k + 1 < phase.size(); ++k) {
    const double d = 0.5 * (phase[k] + phase[k + 1]);
    const double w = pulse.omega_rabi + (amplitude ? 0.5 * ((*amplitude)[k] + (*amplitude)[k + 1]) : 0.0);
    u = step_unitary(w * cphi, -w * sphi, d, dt) * u;
  }
  return u;
}

McChannel mc_gate_channel(const NoiseConfig& noise, const PulseSpec& pulse, std::uint64_t seed,
                          const std::vector<std::uint64_t>& key) {
  noise.validate(pulse.omega_rabi);
  pulse.validate();
  const PulseGrid g = grid_for(noise, pulse);
  PTM sum = PTM::Zero(), sum2 = PTM::Zero();
  std::vector<double> ph, am;
  for (long i = 0; i < noise.n_traj; ++i) {
    std::vector<std::uint64_t> k = key;
    k.push_back(static_cast<std::uint64_t>(i));
    const PTM p = unitary_ptm(noisy_unitary(noise, pulse, g, seed, k, ph, am));
    sum += p;
    sum2 += p.cwiseProduct(p);
  }
  McChannel out;
  const double n = static_cast<double>(noise.n_traj);
  out.n_traj = noise.n_traj;
  out.mean = sum / n;
  if (noise.n_traj > 1) {
    const PTM var = ((sum2 - n * out.mean.cwiseProduct(out.mean)) / (n - 1.0)).cwiseMax(0.0);
    out.stderr_ = (var / n).cwiseSqrt();
  }
  return out;
}

McGateSet mc_gate_set(const NoiseConfig& noise, const PulseSet& pulses, std::uint64_t seed) {
  pulses.validate();
  McGateSet out;
  for (auto id : kAllGates) {
    const auto ch = mc_gate_channel(noise, pulses.pulse(id), seed, {static_cast<std::uint64_t>(index(id))});
    out.ptms.gates[static_cast<std::size_t>(index(id))] = ch.mean;
    out.stderr_[static_cast<std::size_t>(index(id))] = ch.stderr_;
  }
  out.ptms.rho = rho_vector(Vec3(0, 0, 1));
  out.ptms.meas = meas_vector(Vec4d(1, 0, 0, 1));
  return out;
}

GateSet analytic_gate_set(const NoiseConfig& noise, const PulseSet& pulses, ModelVariant variant,
                          const QuadConfig& quad) {
  GateSet gs = ideal_gate_set(pulses, variant);
  std::optional<PSDModel> amp;
  if (noise.amplitude && has_amplitude(variant)) amp = PSDModel{LorentzianPSD{*noise.amplitude}};
  const PSDModel psd = LorentzianPSD{noise.phase};
  gs.fp_pi = restrict_to(variant, filtered_params_freq(psd, pulses.pulse(GateId::G1), quad, amp));
  gs.fp_half = restrict_to(variant, filtered_params_freq(psd, pulses.pulse(GateId::G2), quad, amp));
  return gs;
}

Dataset analytic_dataset(const GateSetPTMs& truth, const std::vector<Circuit>& circuits, long shots,
                         std::uint64_t seed) {
  Dataset d;
  d.header["seed"] = std::to_string(seed);
  d.header["generator"] = "analytic";
  d.records.reserve(circuits.size());
  for (std::size_t i = 0; i < circuits.size(); ++i) {
    const double p = std::clamp(circuit_probability(truth, circuits[i]), 0.0, 1.0);
    RngStream rng(seed, {0x5a, static_cast<std::uint64_t>(i)});
    std::binomial_distribution<long> bin(shots, p);
    d.records.push_back({circuits[i], shots, bin(rng.engine())});
  }
  return d;
}

Dataset analytic_dataset(const GateSet& truth, const Design& design, std::uint64_t seed) {
  Dataset d = analytic_dataset(to_ptms(truth), design.all_circuits(), design.shots_per_circuit, seed);
  d.header["variant"] = to_string(design.variant);
  d.header["omega_rabi"] = std::to_string(truth.pulses.omega_rabi);
  d.header["t_pi"] = std::to_string(truth.pulses.t_pi);
  d.header["t_half"] = std::to_string(truth.pulses.t_half);
  return d;
}

Dataset mc_dataset(const NoiseConfig& noise, const PulseSet& pulses, const std::vector<Circuit>& circuits, long shots,
                   std::uint64_t seed, McMode mode) {
  pulses.validate();
  noise.validate(pulses.omega_rabi);
  if (mode == McMode::TwoStage) {
    Dataset d = analytic_dataset(mc_gate_set(noise, pulses, seed).ptms, circuits, shots, seed + 1);
    d.header["generator"] = "mc-two-stage";
    return d;
  }
  Dataset d;
  d.header["seed"] = std::to_string(seed);
  d.header["generator"] = "mc-per-shot";
  std::vector<double> ph, am;
  for (std::size_t i = 0; i < circuits.size(); ++i) {
    const Circuit& c = circuits[i];
    std::vector<GateId> seq;
    if (c.prep) seq.push_back(*c.prep);
    for (int r = 0; r < c.reps; ++r) seq.push_back(c.germ);
    if (c.meas) seq.push_back(*c.meas);
    long plus = 0;
    for (long s = 0; s < shots; ++s) {
      Eigen::Vector2cd psi(1.0, 0.0);
      for (std::size_t pos = 0; pos < seq.size(); ++pos) {
        const PulseSpec pulse = pulses.pulse(seq[pos]);
        const PulseGrid g = grid_for(noise, pulse);
        psi = noisy_unitary(noise, pulse, g, seed,
                            {0x73, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(s), pos}, ph, am) *
              psi;
      }
      RngStream shot(seed, {0x74, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(s)});
      if (shot.uniform() < std::norm(psi(0))) ++plus;
    }
    d.records.push_back({c, shots, plus});
  }
  return d;
}

Dataset mc_dataset(const NoiseConfig& noise, const PulseSet& pulses, const Design& design, std::uint64_t seed,
                   McMode mode) {
  Dataset d = mc_dataset(noise, pulses, design.all_circuits(), design.shots_per_circuit, seed, mode);
  d.header["variant"] = to_string(design.variant);
  return d;
}

}  // namespace cgst
