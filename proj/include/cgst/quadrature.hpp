#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "cgst/types.hpp"

namespace cgst {

struct QuadConfig {
  // Error target: err <= max(abs_tol * L1, rel_tol * |I|), where L1 is the integral of |f|.
  // Measuring the absolute part against L1 keeps the tolerance invariant under rescaling
  // of the noise strength.
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 500000;
  // Frequency cutoff omega_max = cutoff_factor * max(1/tau_c, Omega, 4/t).
  double cutoff_factor = 50.0;
  // Integrate the remainder beyond omega_max through the map omega = omega_max / u.
  bool include_tail = true;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
  long evaluations = 0;
};

namespace detail {

struct GKSegment {
  double a, b, value, error, l1;
  bool operator<(const GKSegment& o) const { return error < o.error; }
};

// Gauss-Kronrod 7/15 rule with the QUADPACK error heuristic.
template <class F>
GKSegment gk15(F& f, double a, double b) {
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
  constexpr double eps = std::numeric_limits<double>::epsilon();

  const double centr = 0.5 * (a + b);
  const double hl = 0.5 * (b - a);
  const double dhl = std::abs(hl);
  std::array<double, 7> fv1{}, fv2{};
  const double fc = f(centr);
  double resg = fc * wg[3];
  double resk = fc * wgk[7];
  double resabs = std::abs(resk);
  for (int j = 0; j < 3; ++j) {
    const int jt = 2 * j + 1;
    const double absc = hl * xgk[jt];
    const double f1 = f(centr - absc), f2 = f(centr + absc);
    fv1[jt] = f1;
    fv2[jt] = f2;
    resg += wg[j] * (f1 + f2);
    resk += wgk[jt] * (f1 + f2);
    resabs += wgk[jt] * (std::abs(f1) + std::abs(f2));
  }
  for (int j = 0; j < 4; ++j) {
    const int jt = 2 * j;
    const double absc = hl * xgk[jt];
    const double f1 = f(centr - absc), f2 = f(centr + absc);
    fv1[jt] = f1;
    fv2[jt] = f2;
    resk += wgk[jt] * (f1 + f2);
    resabs += wgk[jt] * (std::abs(f1) + std::abs(f2));
  }
  const double reskh = 0.5 * resk;
  double resasc = wgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) resasc += wgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  resabs *= dhl;
  resasc *= dhl;
  double err = std::abs((resk - resg) * hl);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {a, b, resk * hl, err, resabs};
}

}  // namespace detail

// Adaptive global-subdivision quadrature over [breaks.front(), breaks.back()], starting from
// the panels given by consecutive breakpoints. Throws QuadratureFailure when the target is
// not met within cfg.max_subdivisions panels.
template <class F>
QuadResult integrate(F&& f, std::vector<double> breaks, const QuadConfig& cfg) {
  if (breaks.size() < 2) throw Error(ErrorKind::InvalidParameter, "integrate needs >= 2 breakpoints");
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  QuadResult out;
  if (breaks.size() < 2) return out;

  std::priority_queue<detail::GKSegment> heap;
  double value = 0.0, error = 0.0, l1 = 0.0;
  long evals = 0;
  // Segments that can no longer be bisected in floating point.
  double frozen_value = 0.0, frozen_error = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    auto s = detail::gk15(f, breaks[i], breaks[i + 1]);
    evals += 15;
    value += s.value;
    error += s.error;
    l1 += s.l1;
    heap.push(s);
  }
  int n_segments = static_cast<int>(heap.size());
  int since_resum = 0;
  auto target = [&] { return std::max(cfg.abs_tol * l1, cfg.rel_tol * std::abs(value)); };
  while (error > target()) {
    if (heap.empty()) break;
    if (n_segments >= cfg.max_subdivisions)
      throw Error(ErrorKind::QuadratureFailure,
                  "tolerance not met: error " + std::to_string(error) + " > target " +
                      std::to_string(target()));
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        std::abs(worst.b - worst.a) < 1e3 * std::numeric_limits<double>::epsilon() *
                                              std::max(std::abs(worst.a), std::abs(worst.b))) {
      frozen_value += worst.value;
      frozen_error += worst.error;
      if (heap.empty()) break;
      continue;
    }
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    evals += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
    ++n_segments;
    if (++since_resum == 2000) {
      since_resum = 0;
      auto copy = heap;
      value = frozen_value;
      error = frozen_error;
      l1 = 0.0;
      while (!copy.empty()) {
        value += copy.top().value;
        error += copy.top().error;
        l1 += copy.top().l1;
        copy.pop();
      }
    }
  }
  if (error > target() && frozen_error > 0.0)
    throw Error(ErrorKind::QuadratureFailure, "round-off limits the attainable accuracy");
  out.value = value;
  out.error = error;
  out.l1 = l1;
  out.evaluations = evals;
  return out;
}

template <class F>
QuadResult integrate(F&& f, double a, double b, const QuadConfig& cfg) {
  return integrate(std::forward<F>(f), std::vector<double>{a, b}, cfg);
}

// Integral over [a, inf) via omega = a / u, u in (0, 1]. Requires a > 0.
template <class F>
QuadResult integrate_tail(F&& f, double a, const QuadConfig& cfg, int panels = 64) {
  if (!(a > 0.0)) throw Error(ErrorKind::InvalidParameter, "tail integral needs a > 0");
  auto g = [&](double u) { return f(a / u) * a / (u * u); };
  std::vector<double> br;
  // Geometric panels towards u = 0 where the mapped integrand oscillates fastest.
  for (int i = 0; i <= panels; ++i) br.push_back(std::pow(2.0, -0.5 * (panels - i)));
  br.front() = 0.0;
  return integrate(g, br, cfg);
}

}  // namespace cgst
