#pragma once

#include <optional>

#include "cgst/noise.hpp"
#include "cgst/quadrature.hpp"

namespace cgst {

struct PulseSpec {
  double omega_rabi = 2.0 * kPi * 50e3;  // rad/s
  double duration = 1e-5;                // s
  double phase = 0.0;                    // rad, one of 0, pi/2, pi, 3pi/2

  void validate() const;
  double area() const { return omega_rabi * duration; }
};

// Filtered decoherence/phase integrals for one pulse duration.
struct FilteredParams {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta_gamma1 = 0.0;

  bool operator==(const FilteredParams&) const = default;
};

FilteredParams operator*(double s, const FilteredParams& fp);

enum class FilterKind { G1, D1, G2, D2, AMP };

// Filter functions of the five integrals. All are even in omega.
// F_G2 and F_D2 are normalised as the Fourier transforms of the time-domain
// gamma2/delta2 integrands, i.e. prefactors cos(Omega t)/pi and sin(Omega t)/pi.
double filter_eval(FilterKind kind, double omega, const PulseSpec& pulse);

// Gamma_n = int S(w) F_n(w) dw over the real line. The amplitude integral is only
// computed when amp_psd is given.
FilteredParams filtered_params_freq(const PSDModel& psd, const PulseSpec& pulse, const QuadConfig& quad,
                                    const std::optional<PSDModel>& amp_psd = std::nullopt);

// Phase-noise integrals for an arbitrary even spectral density; frequency_scale marks where
// its structure sits (0 if none).
FilteredParams filtered_params_freq(const std::function<double(double)>& psd, double frequency_scale,
                                    const PulseSpec& pulse, const QuadConfig& quad);

// Same integrals from the covariance, by nested quadrature of the instantaneous rates
//   gamma1(t') = int_0^t' C(t'-t'') cos(Omega (t'-t'')) dt''
//   delta1(t') = int_0^t' C(t'-t'') sin(Omega (t'-t'')) dt''
//   gamma2(t') = int_0^t' C(t'-t'') cos(Omega (t'+t'')) dt''
//   delta2(t') = int_0^t' C(t'-t'') sin(Omega (t'+t'')) dt''
// and Delta Gamma1 = int_0^t int_0^t C_amp(t'-t'').
FilteredParams filtered_params_time(const CovarianceFn& cov, const PulseSpec& pulse, const QuadConfig& quad,
                                    const CovarianceFn& amp_cov = nullptr);

// Single integral of filtered_params_time.
double filtered_integral_time(const CovarianceFn& cov, FilterKind kind, const PulseSpec& pulse,
                              const QuadConfig& quad);

struct InstantRates {
  double gamma1, delta1, gamma2, delta2;
};
InstantRates instantaneous_rates(const CovarianceFn& cov, double omega_rabi, double t_prime,
                                 const QuadConfig& quad);

// Theta = sqrt(delta1^2 - delta2^2 - gamma2^2), exposed only through the even functions
// cos(Theta/2) and sin(Theta/2)/Theta so negative radicands need no complex arithmetic.
template <typename Scalar = double>
struct ThetaValue {
  Scalar radicand;
  Scalar cos_half;
  Scalar sinc_half;  // sin(Theta/2) / Theta
};

template <typename Scalar>
ThetaValue<Scalar> theta(Scalar delta1, Scalar delta2, Scalar gamma2) {
  using std::cos, std::sin, std::cosh, std::sinh, std::sqrt, std::abs;
  const Scalar r = delta1 * delta1 - delta2 * delta2 - gamma2 * gamma2;
  ThetaValue<Scalar> out{r, Scalar(0), Scalar(0)};
  if (abs(r) < Scalar(1e-2)) {
    // Power series in z = -r/4: cos(sqrt(r)/2) = sum z^k/(2k)!, sin(sqrt(r)/2)/sqrt(r) = 1/2 sum z^k/(2k+1)!
    const Scalar z = -r / Scalar(4);
    Scalar term_c(1), term_s(1), sc(0), ss(0);
    for (int k = 0; k < 8; ++k) {
      sc += term_c;
      ss += term_s;
      term_c *= z / Scalar((2 * k + 1) * (2 * k + 2));
      term_s *= z / Scalar((2 * k + 2) * (2 * k + 3));
    }
    out.cos_half = sc;
    out.sinc_half = ss / Scalar(2);
  } else if (r > Scalar(0)) {
    const Scalar th = sqrt(r);
    out.cos_half = cos(th / Scalar(2));
    out.sinc_half = sin(th / Scalar(2)) / th;
  } else {
    const Scalar th = sqrt(-r);
    out.cos_half = cosh(th / Scalar(2));
    out.sinc_half = sinh(th / Scalar(2)) / th;
  }
  return out;
}

inline ThetaValue<double> theta(const FilteredParams& fp) {
  return theta<double>(fp.delta1, fp.delta2, fp.gamma2);
}

// N_CP(t) = 1/2 int_0^t (|g| - g) dt', g = gamma1/2 - sqrt(gamma2^2 + delta2^2)/2.
double non_markovianity(const CovarianceFn& cov, const PulseSpec& pulse, const QuadConfig& quad);

}  // namespace cgst
