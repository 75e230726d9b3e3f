// bessellab: simulation and verification laboratory for Bessel processes of
// dimension delta = 2(1 - mu) with mu in (0,1).
//
// SPDX-License-Identifier: MIT

#pragma once

#include <stdexcept>
#include <string>

namespace bessellab {

/// Thrown when a numeric routine (quadrature, continued fraction, series)
/// cannot reach its requested tolerance; the message records what was
/// achieved so callers can report it.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a simulation budget is exhausted before the requested horizon
/// is reached (e.g. the additive clock did not cover the target time span).
class horizon_error : public std::runtime_error {
public:
    explicit horizon_error(const std::string& what) : std::runtime_error(what) {}
};

/**
 * Parameter triple of a Bessel process of dimension delta in (0,2).
 *
 * The three parametrizations in use are tied together exactly:
 *
 *   delta = 2(1 - mu),    nu = delta/2 - 1 = -mu,    mu in (0,1).
 *
 * c_mu = 1 / (2^mu Gamma(1+mu)) is the constant appearing in the
 * last-zero compensator and in the excursion-length tail; nearly every
 * closed form in this library uses it, so it is precomputed once.
 *
 * BesselParams::from_mu is defined in specfun.hpp (it needs the Gamma
 * function); include that header — or any header built on top of it — before
 * constructing parameter sets.
 */
struct BesselParams {
    double delta;  ///< dimension, in (0,2)
    double mu;     ///< index parameter, in (0,1); delta = 2(1-mu)
    double nu;     ///< signed index, = -mu
    double c_mu;   ///< 1 / (2^mu Gamma(1+mu))

    /// Build the full triple from mu alone. Boundary values are rejected:
    /// mu = 0 is two-dimensional Brownian motion (never hits 0) and mu = 1
    /// is the zero-dimensional process (absorbed at 0); neither is in scope.
    static BesselParams from_mu(double mu);
};

}  // namespace bessellab
