#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace saftlab {

using cplx = std::complex<double>;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using IMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Integer lattice point. Ordered lexicographically so it can key a std::map.
using IntVec = std::vector<std::int64_t>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// exp(i * phase), computed from sin/cos so the modulus is exactly representable.
inline cplx unit_phase(double phase) { return {std::cos(phase), std::sin(phase)}; }

/// Shapes or dimensions that do not fit together. Not a numerical failure.
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Inputs are well-formed but violate a numerical contract (singular B,
/// constraint residual over tolerance, vanishing determinant, ...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace saftlab
