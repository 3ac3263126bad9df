#pragma once

#include <complex>

#include <Eigen/Dense>

namespace subsketch {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

}  // namespace subsketch
