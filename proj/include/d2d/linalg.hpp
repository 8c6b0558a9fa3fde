#pragma once

#include <Eigen/Dense>
#include <complex>

namespace d2d {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kLn2 = 0.69314718055994530942;

}  // namespace d2d
