#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "cgst/types.hpp"

namespace cgst {

// Ornstein-Uhlenbeck process d(delta) = -delta/tau_c dt + sqrt(c) dW.
struct OUParams {
  double tau_c = 5e-6;  // s
  double c = 0.0;       // s^-3

  void validate() const;
  double variance() const { return c * tau_c / 2.0; }
  // tau_c^3 c; the second-order cumulant expansion assumes this is small.
  double validity_product() const { return tau_c * tau_c * tau_c * c; }
};

struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.0;
  int n_steps = 1;

  void validate() const;
  double at(int n) const { return t0 + n * dt; }
};

struct Trajectory {
  std::vector<double> values;  // n_steps + 1 samples
};

enum class Start { Zero, Stationary };

// Independent random stream keyed by (master seed, key words). Two streams with the
// same key produce identical draws regardless of how many other streams exist or in
// which order they are consumed.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> key);
  RngStream(std::uint64_t master_seed, const std::vector<std::uint64_t>& key);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Exact one-step update of the OU process on a uniform grid.
class OUStepper {
 public:
  OUStepper(const OUParams& p, double dt);

  double start(Start s, RngStream& rng) const {
    return s == Start::Stationary ? stationary_sd_ * rng.normal() : 0.0;
  }
  double step(double x, RngStream& rng) const { return x * decay_ + kick_ * rng.normal(); }

 private:
  double decay_;
  double kick_;
  double stationary_sd_;
};

Trajectory ou_trajectory(const OUParams& params, const TimeGrid& grid, RngStream& stream,
                         Start start = Start::Stationary);

// C(lag) = (c tau_c / 2) exp(-|lag| / tau_c)
double covariance(const OUParams& params, double lag);

struct LorentzianPSD {
  OUParams ou;
};
struct WhitePSD {
  double level = 0.0;
};
// One-sided table on omega >= 0, evaluated at |omega|; zero outside the grid.
struct TabulatedPSD {
  std::vector<double> omega;
  std::vector<double> s;
};

using PSDModel = std::variant<LorentzianPSD, WhitePSD, TabulatedPSD>;

void validate(const PSDModel& model);
double psd_eval(const PSDModel& model, double omega);

// Characteristic angular frequency scale of the PSD (1/tau_c for Lorentzian), or 0 if none.
double psd_frequency_scale(const PSDModel& model);

using CovarianceFn = std::function<double(double)>;

CovarianceFn ou_covariance_fn(const OUParams& params);

}  // namespace cgst
