#pragma once

#include <complex>

#include <Eigen/Dense>

namespace dfc {

using Matrix  = Eigen::MatrixXd;
using Vector  = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

}  // namespace dfc
