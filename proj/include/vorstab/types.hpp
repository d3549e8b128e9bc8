#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>

namespace vorstab {

using Real = double;
using Complex = std::complex<Real>;
using Index = Eigen::Index;

// (j,k)-indexed cell data, j = radial ring, k = angular sector. Column k is
// contiguous, so radial sweeps run down columns.
using ArrayRT = Eigen::ArrayXXd;
using ArrayRTc = Eigen::ArrayXXcd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using CirculationVector = Eigen::VectorXd;

inline constexpr Real pi = 3.14159265358979323846264338327950288;

}  // namespace vorstab
