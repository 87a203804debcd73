#include "cgst/noise.hpp"

#include <algorithm>
#include <cmath>

namespace cgst {

void OUParams::validate() const {
  if (!(tau_c > 0.0) || !std::isfinite(tau_c))
    throw Error(ErrorKind::InvalidParameter, "OU tau_c must be > 0");
  if (!(c >= 0.0) || !std::isfinite(c))
    throw Error(ErrorKind::InvalidParameter, "OU diffusion constant c must be >= 0");
}

void TimeGrid::validate() const {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidParameter, "time grid dt must be > 0");
  if (n_steps < 1) throw Error(ErrorKind::InvalidParameter, "time grid needs n_steps >= 1");
}

RngStream::RngStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> key)
    : RngStream(master_seed, std::vector<std::uint64_t>(key)) {}

RngStream::RngStream(std::uint64_t master_seed, const std::vector<std::uint64_t>& key) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * key.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master_seed);
  for (auto k : key) push(k);
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

OUStepper::OUStepper(const OUParams& p, double dt) {
  p.validate();
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidParameter, "OU step dt must be > 0");
  decay_ = std::exp(-dt / p.tau_c);
  kick_ = std::sqrt(p.c * p.tau_c / 2.0 * -std::expm1(-2.0 * dt / p.tau_c));
  stationary_sd_ = std::sqrt(p.variance());
}

Trajectory ou_trajectory(const OUParams& params, const TimeGrid& grid, RngStream& stream,
                         Start start) {
  params.validate();
  grid.validate();
  OUStepper stepper(params, grid.dt);
  Trajectory out;
  out.values.resize(static_cast<std::size_t>(grid.n_steps) + 1);
  double x = stepper.start(start, stream);
  out.values[0] = x;
  for (int n = 0; n < grid.n_steps; ++n) {
    x = stepper.step(x, stream);
    out.values[static_cast<std::size_t>(n) + 1] = x;
  }
  return out;
}

double covariance(const OUParams& params, double lag) {
  params.validate();
  return params.variance() * std::exp(-std::abs(lag) / params.tau_c);
}

CovarianceFn ou_covariance_fn(const OUParams& params) {
  params.validate();
  const double var = params.variance();
  const double tau = params.tau_c;
  return [var, tau](double lag) { return var * std::exp(-std::abs(lag) / tau); };
}

void validate(const PSDModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LorentzianPSD>) {
          m.ou.validate();
        } else if constexpr (std::is_same_v<T, WhitePSD>) {
          if (!(m.level >= 0.0)) throw Error(ErrorKind::InvalidParameter, "white PSD level < 0");
        } else {
          if (m.omega.size() != m.s.size() || m.omega.size() < 2)
            throw Error(ErrorKind::InvalidParameter, "tabulated PSD needs >= 2 matching points");
          if (m.omega.front() < 0.0)
            throw Error(ErrorKind::InvalidParameter, "tabulated PSD grid must start at omega >= 0");
          for (std::size_t i = 1; i < m.omega.size(); ++i)
            if (!(m.omega[i] > m.omega[i - 1]))
              throw Error(ErrorKind::InvalidParameter, "tabulated PSD grid must increase");
          for (double v : m.s)
            if (!(v >= 0.0)) throw Error(ErrorKind::InvalidParameter, "tabulated PSD value < 0");
        }
      },
      model);
}

double psd_eval(const PSDModel& model, double omega) {
  return std::visit(
      [omega](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LorentzianPSD>) {
          const double x = omega * m.ou.tau_c;
          return m.ou.c * m.ou.tau_c * m.ou.tau_c / (1.0 + x * x);
        } else if constexpr (std::is_same_v<T, WhitePSD>) {
          return m.level;
        } else {
          const double w = std::abs(omega);
          if (w < m.omega.front() || w > m.omega.back()) return 0.0;
          auto it = std::upper_bound(m.omega.begin(), m.omega.end(), w);
          if (it == m.omega.end()) return m.s.back();
          const auto i = static_cast<std::size_t>(it - m.omega.begin());
          const double w0 = m.omega[i - 1], w1 = m.omega[i];
          const double f = (w - w0) / (w1 - w0);
          return m.s[i - 1] + f * (m.s[i] - m.s[i - 1]);
        }
      },
      model);
}

double psd_frequency_scale(const PSDModel& model) {
  if (const auto* l = std::get_if<LorentzianPSD>(&model)) return 1.0 / l->ou.tau_c;
  if (const auto* t = std::get_if<TabulatedPSD>(&model)) return t->omega.back();
  return 0.0;
}

}  // namespace cgst
