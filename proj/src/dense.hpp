#pragma once

#include <Eigen/Dense>
#include <complex>

namespace wpcj {

using cxd = std::complex<double>;
using VecXd = Eigen::VectorXd;
using MatXd = Eigen::MatrixXd;
using VecXcd = Eigen::VectorXcd;
using MatXcd = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

} // namespace wpcj
