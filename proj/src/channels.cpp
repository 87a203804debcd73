#include "cgst/channels.hpp"

#include <cmath>

namespace cgst {

Phase phase_from_radians(double phi) {
  const double q = phi / (kPi / 2.0);
  const double k = std::round(q);
  if (std::abs(q - k) > 1e-9) throw Error(ErrorKind::InvalidParameter, "drive phase must be a multiple of pi/2");
  const int m = ((static_cast<int>(k) % 4) + 4) % 4;
  return static_cast<Phase>(m);
}

double radians(Phase p) { return static_cast<int>(p) * kPi / 2.0; }

ChiBlocks chi_blocks(const FilteredParams& fp, const PulseSpec& pulse) {
  if (fp.gamma1 < 0.0) throw Error(ErrorKind::NonphysicalParameter, "gamma1 < 0");
  if (fp.delta_gamma1 < 0.0) throw Error(ErrorKind::NonphysicalParameter, "delta_gamma1 < 0");
  return chi_blocks<double>(pulse.area(), fp.gamma1, fp.gamma2, fp.delta1, fp.delta2, fp.delta_gamma1);
}

Mat2c pulse_unitary(double area, double phi) {
  const Mat2c n = std::cos(phi) * pauli(1) - std::sin(phi) * pauli(2);
  const std::complex<double> i(0.0, 1.0);
  return std::cos(area / 2.0) * Mat2c::Identity() - i * std::sin(area / 2.0) * n;
}

PTM unitary_ptm(const Mat2c& u) {
  PTM g;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) g(a, b) = 0.5 * (pauli(a) * u * pauli(b) * u.adjoint()).trace().real();
  return g;
}

CptpReport cptp_check(const ProcessMatrix& chi) {
  Mat2c acc = Mat2c::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) acc += chi(a, b) * pauli(b).adjoint() * pauli(a) / 2.0;
  CptpReport r;
  r.tp_violation = (acc - Mat2c::Identity()).norm();
  const Eigen::Matrix4cd herm = 0.5 * (chi + chi.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(herm, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  return r;
}

double trace_norm(const Eigen::Matrix4cd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double trace_norm(const Mat2c& m) {
  Eigen::SelfAdjointEigenSolver<Mat2c> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double gate_trace_distance(const FilteredParams& a, const FilteredParams& b) {
  const double ea = std::exp(-a.gamma1), eb = std::exp(-b.gamma1);
  const double cross = 2.0 * std::exp(-(a.gamma1 + b.gamma1) / 2.0) * std::cos((a.delta1 - b.delta1) / 2.0);
  const double rad = std::max(0.0, ea + eb - cross);
  return std::abs(ea - eb) / 4.0 + 0.5 * std::sqrt(rad);
}

std::pair<double, double> fiducial_trace_distances(const Vec3& r_a, const Vec3& r_b, const Vec4d& e_a,
                                                   const Vec4d& e_b) {
  return {(r_a - r_b).norm(), (e_a.tail<3>() - e_b.tail<3>()).norm()};
}

double general_channel_distance(const PTM& a, const PTM& b) {
  return 0.5 * trace_norm(Eigen::Matrix4cd(choi_matrix<double>(a) - choi_matrix<double>(b)));
}

Mat2c state_operator(const Vec3& r) {
  Mat2c m = pauli(0);
  for (int k = 0; k < 3; ++k) m += r(k) * pauli(k + 1);
  return 0.5 * m;
}

Mat2c povm_operator(const Vec4d& e) {
  Mat2c m = Mat2c::Zero();
  for (int k = 0; k < 4; ++k) m += e(k) * pauli(k);
  return 0.5 * m;
}

}  // namespace cgst
