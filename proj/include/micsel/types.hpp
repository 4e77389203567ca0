#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace micsel {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Point2 = Eigen::Vector2d;

// Sorted, duplicate-free microphone indices.
using IndexSet = std::vector<int>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical failure inside a solver that the caller cannot recover from.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace micsel
