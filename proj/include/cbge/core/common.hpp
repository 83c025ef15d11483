#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace cbge {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using BoolVec = std::vector<bool>;

/// Thrown when a caller violates a documented precondition.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when input data cannot be mapped to a valid economy.
class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when the economy admits no equilibrium representation
/// (e.g. the intermediate-input network is too dense to invert).
class ModelIllPosedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a derived object is internally inconsistent.
class InvalidStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Kahan-compensated sum; used where exact cancellation matters
/// (deficit de-meaning must produce a sum of exactly zero).
inline double compensated_sum(const Vec& v) {
    double sum = 0.0, c = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double y = v[i] - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

} // namespace cbge
