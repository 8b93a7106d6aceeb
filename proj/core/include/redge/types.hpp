#pragma once

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace redge {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thrown when a numeric parameter is outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when array dimensions do not line up.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace redge
