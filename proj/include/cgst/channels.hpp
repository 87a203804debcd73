#pragma once

#include <array>
#include <utility>

#include "cgst/filter.hpp"

namespace cgst {

enum class Phase { Zero, HalfPi, Pi, ThreeHalfPi };

// Maps a drive phase in radians to its layout; throws unless it is a multiple of pi/2.
Phase phase_from_radians(double phi);
double radians(Phase p);

template <typename Scalar>
struct ChiBlocksT {
  Block2<Scalar> chi_a;  // (I, X) dressed-population sector
  Block2<Scalar> chi_b;  // (Y, Z) coherence sector
};
using ChiBlocks = ChiBlocksT<double>;

// Process-matrix blocks of a noisy pulse of area theta = Omega t.
//   chi_A = (1 + e^-G1) 1 + 2 h [(c cos(Th/2) - D1 s sinc) sz - (s cos(Th/2) + D1 c sinc) sy]
//   chi_B = (1 - e^-G1) 1 - 2 h sinc [(G2 c + D2 s) sz + (G2 s - D2 c) sx]
// with h = exp(-(G1 + dG1)/2), c = cos theta, s = sin theta, sinc = sin(Th/2)/Th.
template <typename Scalar>
ChiBlocksT<Scalar> chi_blocks(Scalar area, Scalar g1, Scalar g2, Scalar d1, Scalar d2, Scalar dg1) {
  using std::cos, std::sin, std::exp;
  const auto th = theta<Scalar>(d1, d2, g2);
  const Scalar c = cos(area), s = sin(area);
  const Scalar e1 = exp(-g1);
  const Scalar h = exp(-(g1 + dg1) / Scalar(2));
  const auto I = pauli<Scalar>(0), X = pauli<Scalar>(1), Y = pauli<Scalar>(2), Z = pauli<Scalar>(3);
  using C = Complex<Scalar>;
  ChiBlocksT<Scalar> out;
  const Scalar az = c * th.cos_half - d1 * s * th.sinc_half;
  const Scalar ay = s * th.cos_half + d1 * c * th.sinc_half;
  out.chi_a = C(Scalar(1) + e1) * I + C(Scalar(2) * h) * (C(az) * Z - C(ay) * Y);
  const Scalar bz = g2 * c + d2 * s;
  const Scalar bx = g2 * s - d2 * c;
  out.chi_b = C(Scalar(1) - e1) * I - C(Scalar(2) * h * th.sinc_half) * (C(bz) * Z + C(bx) * X);
  return out;
}

ChiBlocks chi_blocks(const FilteredParams& fp, const PulseSpec& pulse);

// Assembles the 4x4 process matrix of a pulse with drive phase `phase`.
template <typename Scalar>
Chi<Scalar> process_matrix(Phase phase, const ChiBlocksT<Scalar>& b) {
  using C = Complex<Scalar>;
  const auto& A = b.chi_a;
  const auto& B = b.chi_b;
  Chi<Scalar> m = Chi<Scalar>::Zero();
  switch (phase) {
    case Phase::Zero:
    case Phase::Pi: {
      const Scalar sgn = phase == Phase::Zero ? Scalar(1) : Scalar(-1);
      m(0, 0) = A(0, 0);
      m(0, 1) = sgn * A(0, 1);
      m(1, 0) = sgn * A(1, 0);
      m(1, 1) = A(1, 1);
      m(2, 2) = B(0, 0);
      m(2, 3) = sgn * B(0, 1);
      m(3, 2) = sgn * B(1, 0);
      m(3, 3) = B(1, 1);
      break;
    }
    case Phase::HalfPi:
      m(0, 0) = A(0, 0);
      m(0, 2) = -A(0, 1);
      m(2, 0) = -A(1, 0);
      m(2, 2) = A(1, 1);
      m(1, 1) = B(0, 0);
      m(1, 3) = B(0, 1);
      m(3, 1) = B(1, 0);
      m(3, 3) = B(1, 1);
      break;
    case Phase::ThreeHalfPi:
      m(0, 0) = A(0, 0);
      m(0, 2) = A(0, 1);
      m(2, 0) = A(1, 0);
      m(2, 2) = A(1, 1);
      m(1, 1) = B(0, 0);
      m(1, 3) = -B(0, 1);
      m(3, 1) = -B(1, 0);
      m(3, 3) = B(1, 1);
      break;
  }
  return m * C(Scalar(0.5));
}

namespace detail {

// T[a][b][m][n] = Tr(E_a E_m E_b E_n^dagger), E = sigma / sqrt(2).
template <typename Scalar>
const std::array<Complex<Scalar>, 256>& chi_ptm_table() {
  static const std::array<Complex<Scalar>, 256> table = [] {
    std::array<Complex<Scalar>, 256> t{};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int m = 0; m < 4; ++m)
          for (int n = 0; n < 4; ++n)
            t[64 * a + 16 * b + 4 * m + n] =
                (pauli<Scalar>(a) * pauli<Scalar>(m) * pauli<Scalar>(b) * pauli<Scalar>(n)).trace() /
                Complex<Scalar>(Scalar(4));
    return t;
  }();
  return table;
}

template <typename Scalar>
const Eigen::Matrix<Complex<Scalar>, 16, 16>& ptm_to_chi_map() {
  static const Eigen::Matrix<Complex<Scalar>, 16, 16> inv = [] {
    const auto& t = chi_ptm_table<Scalar>();
    Eigen::Matrix<Complex<Scalar>, 16, 16> m;
    for (int k = 0; k < 16; ++k)
      for (int j = 0; j < 16; ++j) m(k, j) = t[16 * k + j];
    return Eigen::Matrix<Complex<Scalar>, 16, 16>(m.inverse());
  }();
  return inv;
}

}  // namespace detail

// [G]_ab = Tr{E_a E(E_b)} with E(rho) = sum chi_mn E_m rho E_n^dagger.
template <typename Scalar>
Ptm<Scalar> chi_to_ptm(const Chi<Scalar>& chi) {
  const auto& t = detail::chi_ptm_table<Scalar>();
  Ptm<Scalar> g;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Complex<Scalar> acc(0);
      for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) acc += chi(m, n) * t[64 * a + 16 * b + 4 * m + n];
      g(a, b) = acc.real();
    }
  return g;
}

template <typename Scalar>
Chi<Scalar> ptm_to_chi(const Ptm<Scalar>& g) {
  Eigen::Matrix<Complex<Scalar>, 16, 1> v;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) v(4 * a + b) = Complex<Scalar>(g(a, b));
  const Eigen::Matrix<Complex<Scalar>, 16, 1> x = detail::ptm_to_chi_map<Scalar>() * v;
  Chi<Scalar> chi;
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) chi(m, n) = x(4 * m + n);
  return chi;
}

template <typename Scalar>
Vec4<Scalar> ptm_apply(const Ptm<Scalar>& g, const Vec4<Scalar>& state) {
  return g * state;
}

// Choi state J = (1/4) sum_ab G_ab sigma_a (x) sigma_b^T, unit trace for TP maps.
template <typename Scalar>
Eigen::Matrix<Complex<Scalar>, 4, 4> choi_matrix(const Ptm<Scalar>& g) {
  using C = Complex<Scalar>;
  Eigen::Matrix<C, 4, 4> j = Eigen::Matrix<C, 4, 4>::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (g(a, b) == Scalar(0)) continue;
      const auto sa = pauli<Scalar>(a);
      const auto sbt = pauli<Scalar>(b).transpose().eval();
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
          j.template block<2, 2>(2 * i, 2 * k) += C(g(a, b) / Scalar(4)) * sa(i, k) * sbt;
    }
  return j;
}

// Unitary of a pulse: exp(-i theta/2 (cos phi X - sin phi Y)).
Mat2c pulse_unitary(double area, double phi);
PTM unitary_ptm(const Mat2c& u);

struct CptpReport {
  double tp_violation = 0.0;   // Frobenius norm of sum chi_ab E_b^dagger E_a - 1
  double min_eigenvalue = 0.0;
  bool passes(double tol) const { return tp_violation <= tol && min_eigenvalue >= -tol; }
};

CptpReport cptp_check(const ProcessMatrix& chi);

// Trace norm of a Hermitian matrix.
double trace_norm(const Eigen::Matrix4cd& m);
double trace_norm(const Mat2c& m);

// Closed-form trace distance between two Markovian parametrised gates.
double gate_trace_distance(const FilteredParams& a, const FilteredParams& b);

// (T_rho, T_M) = (|r_a - r_b|, |e_a[1..3] - e_b[1..3]|).
std::pair<double, double> fiducial_trace_distances(const Vec3& r_a, const Vec3& r_b, const Vec4d& e_a,
                                                   const Vec4d& e_b);

// 1/2 || J_a - J_b ||_1.
double general_channel_distance(const PTM& a, const PTM& b);

// Operators from Bloch/POVM coefficients: rho = (1 + r.sigma)/2, M = (e0 1 + e.sigma)/2.
Mat2c state_operator(const Vec3& r);
Mat2c povm_operator(const Vec4d& e);

}  // namespace cgst
