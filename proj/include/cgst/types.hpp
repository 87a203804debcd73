#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cgst {

template <typename Scalar>
using Complex = std::complex<Scalar>;

// Superoperator in the normalized Pauli basis E_a = sigma_a / sqrt(2), order (I, X, Y, Z).
template <typename Scalar>
using Ptm = Eigen::Matrix<Scalar, 4, 4>;

template <typename Scalar>
using Chi = Eigen::Matrix<Complex<Scalar>, 4, 4>;

template <typename Scalar>
using Block2 = Eigen::Matrix<Complex<Scalar>, 2, 2>;

template <typename Scalar>
using Vec4 = Eigen::Matrix<Scalar, 4, 1>;

using PTM = Ptm<double>;
using ProcessMatrix = Chi<double>;
using Mat2c = Eigen::Matrix2cd;
using Vec2c = Eigen::Vector2cd;
using Vec3 = Eigen::Vector3d;
using Vec4d = Vec4<double>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;

enum class ErrorKind {
  InvalidParameter,
  QuadratureFailure,
  NonphysicalParameter,
  InconsistentArea,
  LengthMismatch,
  DegenerateDesign,
  RankDeficient,
  SingularGram,
  OptimizationFailure,
  InvalidConfig,
  Parse,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Pauli matrices, index 0..3 = I, X, Y, Z.
template <typename Scalar = double>
Eigen::Matrix<Complex<Scalar>, 2, 2> pauli(int a) {
  using C = Complex<Scalar>;
  Eigen::Matrix<C, 2, 2> m;
  switch (a) {
    case 0: m << C(1), C(0), C(0), C(1); break;
    case 1: m << C(0), C(1), C(1), C(0); break;
    case 2: m << C(0), C(0, -1), C(0, 1), C(0); break;
    case 3: m << C(1), C(0), C(0), C(-1); break;
    default: throw Error(ErrorKind::InvalidParameter, "pauli index out of range");
  }
  return m;
}

}  // namespace cgst
