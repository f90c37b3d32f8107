// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace starnoma {

using cd = std::complex<double>;
using Cvec = Eigen::VectorXcd;
using RowCvec = Eigen::RowVectorXcd;
using Cmat = Eigen::MatrixXcd;
using Rvec = Eigen::VectorXd;
using Rmat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLn2 = 0.69314718055994530942;
inline constexpr double kSpeedOfLight = 299792458.0;

/// Raised on precondition violations (bad dimensions, out-of-range angles, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a QoS target cannot be met by the closed-form allocation.
class InfeasibleQos : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Which face of the surface serves a user.
enum class Side : std::uint8_t { reflect, transmit };

inline const char* to_string(Side s) { return s == Side::reflect ? "reflect" : "transmit"; }

/// h * w for a row channel and a column beamformer.
inline cd apply_row(const RowCvec& h, const Cvec& w) {
    if (h.size() != w.size()) throw InvalidArgument("apply_row: dimension mismatch");
    cd acc = 0.0;
    for (Eigen::Index n = 0; n < h.size(); ++n) acc += h(n) * w(n);
    return acc;
}

inline double log2p1(double x) { return std::log1p(x) / kLn2; }

} // namespace starnoma
