#include "cgst/filter.hpp"

#include <cmath>

namespace cgst {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0 + x * x * x * x / 120.0;
  return std::sin(x) / x;
}

// (sin(x t) - x t) / x^2, stable for small x t.
double sin_minus_linear(double x, double t) {
  const double y = x * t;
  if (std::abs(y) < 0.05) {
    const double y2 = y * y;
    return t * t * y * (-1.0 / 6.0 + y2 * (1.0 / 120.0 + y2 * (-1.0 / 5040.0 + y2 / 362880.0)));
  }
  return (std::sin(y) - y) / (x * x);
}

// Oscillation-averaged filters, used beyond omega_max.
double filter_tail(FilterKind kind, double w, const PulseSpec& p) {
  const double W = p.omega_rabi, t = p.duration;
  switch (kind) {
    case FilterKind::G1:
      return (1.0 / (4.0 * kPi)) * (1.0 / ((w - W) * (w - W)) + 1.0 / ((w + W) * (w + W)));
    case FilterKind::D1:
      return W * t / (2.0 * kPi * (W * W - w * w));
    case FilterKind::G2: {
      const double c = std::cos(W * t);
      return c * c / (2.0 * kPi * (w * w - W * W));
    }
    case FilterKind::D2:
      return std::sin(W * t) * std::cos(W * t) / (2.0 * kPi * (w * w - W * W));
    case FilterKind::AMP:
      return 1.0 / (kPi * w * w);
  }
  return 0.0;
}

std::vector<double> uniform_breaks(double a, double b, int n) {
  std::vector<double> br;
  br.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) br.push_back(a + (b - a) * i / n);
  br.back() = b;
  return br;
}

using SpectralFn = std::function<double(double)>;

double freq_integral(const SpectralFn& s, double scale, FilterKind kind, const PulseSpec& pulse,
                     const QuadConfig& quad) {
  const double W = pulse.omega_rabi, t = pulse.duration;
  const double omega_max = quad.cutoff_factor * std::max({scale, W, 4.0 / t});
  const double width = std::max(kPi / t, omega_max / 4000.0);
  const int n = std::max(1, static_cast<int>(std::ceil(omega_max / width)));
  auto br = uniform_breaks(0.0, omega_max, n);
  if (W < omega_max) br.push_back(W);
  if (scale > 0.0)
    for (double k : {1.0, 10.0, 100.0})
      if (k * scale < omega_max) br.push_back(k * scale);
  auto f = [&](double w) { return s(w) * filter_eval(kind, w, pulse); };
  auto main = integrate(f, br, quad);
  double total = main.value;
  if (quad.include_tail) {
    // The averaged tail is smooth and single-signed, so its own relative target suffices.
    auto g = [&](double w) { return s(w) * filter_tail(kind, w, pulse); };
    total += integrate_tail(g, omega_max, quad).value;
  }
  return 2.0 * total;
}

FilteredParams freq_params(const SpectralFn& s, double scale, const PulseSpec& pulse, const QuadConfig& quad,
                           const SpectralFn& amp, double amp_scale) {
  pulse.validate();
  FilteredParams fp;
  fp.gamma1 = freq_integral(s, scale, FilterKind::G1, pulse, quad);
  fp.delta1 = freq_integral(s, scale, FilterKind::D1, pulse, quad);
  fp.gamma2 = freq_integral(s, scale, FilterKind::G2, pulse, quad);
  fp.delta2 = freq_integral(s, scale, FilterKind::D2, pulse, quad);
  if (amp) fp.delta_gamma1 = freq_integral(amp, amp_scale, FilterKind::AMP, pulse, quad);
  return fp;
}

enum class Rate { G1, D1, G2, D2, AMP };

double inner_rate(const CovarianceFn& cov, Rate r, double W, double tp, const QuadConfig& quad) {
  if (tp <= 0.0) return 0.0;
  auto f = [&](double tpp) -> double {
    const double s = tp - tpp;
    const double c = cov(s);
    switch (r) {
      case Rate::G1: return c * std::cos(W * s);
      case Rate::D1: return c * std::sin(W * s);
      case Rate::G2: return c * std::cos(W * (tp + tpp));
      case Rate::D2: return c * std::sin(W * (tp + tpp));
      case Rate::AMP: return c;
    }
    return 0.0;
  };
  const int n = 1 + static_cast<int>(std::ceil(W * tp / kPi));
  return integrate(f, uniform_breaks(0.0, tp, n), quad).value;
}

QuadConfig inner_config(const QuadConfig& quad) {
  QuadConfig q = quad;
  q.abs_tol = std::max(quad.abs_tol * 0.1, 1e-15);
  q.rel_tol = std::max(quad.rel_tol * 0.1, 1e-14);
  return q;
}

double outer_integral(const CovarianceFn& cov, Rate r, const PulseSpec& pulse, const QuadConfig& quad) {
  const double W = pulse.omega_rabi, t = pulse.duration;
  const QuadConfig iq = inner_config(quad);
  auto f = [&](double tp) { return inner_rate(cov, r, W, tp, iq); };
  const int n = 1 + static_cast<int>(std::ceil(W * t / kPi));
  return integrate(f, uniform_breaks(0.0, t, n), quad).value;
}

}  // namespace

void PulseSpec::validate() const {
  if (!(omega_rabi > 0.0)) throw Error(ErrorKind::InvalidParameter, "Rabi frequency must be > 0");
  if (!(duration > 0.0)) throw Error(ErrorKind::InvalidParameter, "pulse duration must be > 0");
}

FilteredParams operator*(double s, const FilteredParams& fp) {
  return {s * fp.gamma1, s * fp.gamma2, s * fp.delta1, s * fp.delta2, s * fp.delta_gamma1};
}

double filter_eval(FilterKind kind, double omega, const PulseSpec& pulse) {
  const double W = pulse.omega_rabi, t = pulse.duration;
  const double w = std::abs(omega);
  switch (kind) {
    case FilterKind::G1: {
      // (t/4)(eta(W - w) + eta(W + w)), eta(x) = (2/t) sin^2(x t/2) / (pi x^2)
      const double a = sinc(0.5 * (W - w) * t), b = sinc(0.5 * (W + w) * t);
      return t * t / (8.0 * kPi) * (a * a + b * b);
    }
    case FilterKind::D1: {
      // The poles of W t / (2 pi (W^2 - w^2)) and sin((w - W) t) / (w - W)^2 cancel at w = W;
      // the combined regular part is t / (4 pi (w + W)).
      const double x = w - W, y = w + W;
      return t / (4.0 * kPi * y) + sin_minus_linear(x, t) / (4.0 * kPi) -
             std::sin(y * t) / (4.0 * kPi * y * y);
    }
    case FilterKind::G2:
    case FilterKind::D2: {
      const double pref = kind == FilterKind::G2 ? std::cos(W * t) : std::sin(W * t);
      // sin((w - W) t/2) / (w - W) = (t/2) sinc((w - W) t/2)
      return pref / (kPi * (w + W)) * 0.5 * t * sinc(0.5 * (w - W) * t) * std::sin(0.5 * (w + W) * t);
    }
    case FilterKind::AMP: {
      const double a = sinc(0.5 * w * t);
      return t * t / (2.0 * kPi) * a * a;
    }
  }
  return 0.0;
}

FilteredParams filtered_params_freq(const PSDModel& psd, const PulseSpec& pulse, const QuadConfig& quad,
                                    const std::optional<PSDModel>& amp_psd) {
  validate(psd);
  SpectralFn s = [&psd](double w) { return psd_eval(psd, w); };
  SpectralFn a;
  double amp_scale = 0.0;
  if (amp_psd) {
    validate(*amp_psd);
    a = [&amp_psd](double w) { return psd_eval(*amp_psd, w); };
    amp_scale = psd_frequency_scale(*amp_psd);
  }
  return freq_params(s, psd_frequency_scale(psd), pulse, quad, a, amp_scale);
}

FilteredParams filtered_params_freq(const std::function<double(double)>& psd, double frequency_scale,
                                    const PulseSpec& pulse, const QuadConfig& quad) {
  return freq_params(psd, frequency_scale, pulse, quad, nullptr, 0.0);
}

double filtered_integral_time(const CovarianceFn& cov, FilterKind kind, const PulseSpec& pulse,
                              const QuadConfig& quad) {
  pulse.validate();
  switch (kind) {
    case FilterKind::G1: return outer_integral(cov, Rate::G1, pulse, quad);
    case FilterKind::D1: return outer_integral(cov, Rate::D1, pulse, quad);
    case FilterKind::G2: return outer_integral(cov, Rate::G2, pulse, quad);
    case FilterKind::D2: return outer_integral(cov, Rate::D2, pulse, quad);
    case FilterKind::AMP: return 2.0 * outer_integral(cov, Rate::AMP, pulse, quad);
  }
  return 0.0;
}

InstantRates instantaneous_rates(const CovarianceFn& cov, double omega_rabi, double t_prime,
                                 const QuadConfig& quad) {
  return {inner_rate(cov, Rate::G1, omega_rabi, t_prime, quad), inner_rate(cov, Rate::D1, omega_rabi, t_prime, quad),
          inner_rate(cov, Rate::G2, omega_rabi, t_prime, quad), inner_rate(cov, Rate::D2, omega_rabi, t_prime, quad)};
}

FilteredParams filtered_params_time(const CovarianceFn& cov, const PulseSpec& pulse, const QuadConfig& quad,
                                    const CovarianceFn& amp_cov) {
  pulse.validate();
  FilteredParams fp;
  fp.gamma1 = outer_integral(cov, Rate::G1, pulse, quad);
  fp.delta1 = outer_integral(cov, Rate::D1, pulse, quad);
  fp.gamma2 = outer_integral(cov, Rate::G2, pulse, quad);
  fp.delta2 = outer_integral(cov, Rate::D2, pulse, quad);
  if (amp_cov) fp.delta_gamma1 = 2.0 * outer_integral(amp_cov, Rate::AMP, pulse, quad);
  return fp;
}

double non_markovianity(const CovarianceFn& cov, const PulseSpec& pulse, const QuadConfig& quad) {
  pulse.validate();
  const double W = pulse.omega_rabi, t = pulse.duration;
  const QuadConfig iq = inner_config(quad);
  auto f = [&](double tp) {
    const auto r = instantaneous_rates(cov, W, tp, iq);
    const double g = 0.5 * r.gamma1 - 0.5 * std::hypot(r.gamma2, r.delta2);
    return 0.5 * (std::abs(g) - g);
  };
  const int n = 1 + static_cast<int>(std::ceil(W * t / kPi));
  return integrate(f, uniform_breaks(0.0, t, n), quad).value;
}

}  // namespace cgst
