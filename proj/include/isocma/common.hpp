// SPDX-License-Identifier: Apache-2.0
//
// Shared scalar types, physical constants and the error type used across
// the isocma core.

#pragma once

#include <Eigen/Core>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace isocma {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;

namespace phys {
inline constexpr double c0 = 299792458.0;            // m/s
inline constexpr double mu0 = 1.25663706212e-6;      // H/m
inline constexpr double eps0 = 8.8541878128e-12;     // F/m
inline constexpr double eta0 = mu0 * c0;             // ohms
inline constexpr double pi = std::numbers::pi;
}  // namespace phys

inline double wavelength(double frequency) { return phys::c0 / frequency; }
inline double wavenumber(double frequency) { return 2.0 * phys::pi * frequency / phys::c0; }

/// Error categories; the C API maps these one-to-one onto its status codes.
enum class ErrorCode {
    InvalidArgument = 1,
    Validation = 2,
    Numerical = 3,
    NotFound = 4,
    Io = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

/// Frequency relabelling for a thin substrate: the structure is solved in free
/// space at f * sqrt(eps_eff) and reported at f.
struct FrequencyScale {
    double eps_eff = 1.0;

    double to_solver(double reported) const;
    double to_reported(double solver) const;
};

}  // namespace isocma
