// bessellab: extraction of the random times attached to a Bessel path — the
// last zero before a horizon, hitting times, the inverse local time, the
// pseudo-stopping time built from the pre-last-zero supremum, excursion
// lengths, and the terminal value of the last-zero compensator.
//
// All extractors work on the discrete PathGrid: a grid value of R at or
// below the path's zero_threshold counts as a visit to 0. Under linear
// interpolation the minimum of R over a grid interval is the smaller
// endpoint value, so interval-based and point-based zero detection coincide.
//
// SPDX-License-Identifier: MIT

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bessellab/params.hpp"
#include "bessellab/pathsim.hpp"
#include "bessellab/rng.hpp"
#include "bessellab/specfun.hpp"

namespace bessellab {

/// Random times and excursion functionals of one path, as extracted at the
/// path horizon T.
struct RandomTimesRecord {
    double g_last_zero = 0.0;             ///< last zero-set visit at or before T
    double meander = 0.0;                 ///< R_T / sqrt(T - g); 0 when R_T is on the zero set
    std::map<double, double> hitting;     ///< requested level -> first hitting time (absent: not hit)
    std::map<double, double> tau;         ///< requested local-time level u -> tau_u (absent: L_T <= u)
    double rho = 0.0;                     ///< pseudo-stopping time in [0, g]
    std::vector<double> excursion_lengths;
    double compensator_terminal = 0.0;    ///< A_inf = c_mu int_0^T (T-u)^{-mu} dL_u
};

namespace detail {

inline void require_path(const PathGrid& path) {
    if (path.times.size() < 2 || path.times.size() != path.r.size()) {
        throw std::invalid_argument("randomtimes: path needs matching times/r with >= 2 points");
    }
}

/// Index of the largest grid time <= T.
inline std::size_t grid_index_at_or_before(const PathGrid& path, double T) {
    auto it = std::upper_bound(path.times.begin(), path.times.end(), T);
    if (it == path.times.begin()) {
        throw std::domain_error("randomtimes: T precedes the grid start");
    }
    return static_cast<std::size_t>(it - path.times.begin()) - 1;
}

}  // namespace detail

/**
 * Largest grid time <= T at which R sits on the zero set (value at or below
 * the path's zero_threshold). Returns 0 when no later visit exists; since
 * paths start at R_0 = 0 the scan always terminates there.
 */
inline double last_zero_before(const PathGrid& path, double T) {
    detail::require_path(path);
    if (T > path.times.back() * (1.0 + 1e-12) + 1e-12) {
        throw std::domain_error("last_zero_before: T=" + std::to_string(T) +
                                " beyond path horizon " + std::to_string(path.times.back()));
    }
    std::size_t k = detail::grid_index_at_or_before(path, T);
    for (;; --k) {
        if (path.r[k] <= path.zero_threshold) return path.times[k];
        if (k == 0) break;
    }
    return 0.0;
}

/**
 * Exact probability that the continuous process visits 0 inside one grid
 * step, given the exact endpoint values:
 *
 *   P(zero in (t, t+dt) | R_t = r0, R_{t+dt} = r1)
 *     = 1 - I_{mu}(w) / I_{-mu}(w),    w = r0 r1 / dt,
 *
 * the ratio of the zero-killed to the unkilled transition kernel (their
 * shared Gaussian and power factors cancel). At mu = 1/2 this reduces to
 * 1 - tanh(w), the reflection-principle answer for |BM|. The tail obeys
 * 1 - I_mu/I_{-mu} = (2/pi) sin(pi mu) K_mu(w) / I_{-mu}(w) < 2 e^{-2w},
 * so callers may treat w > 12 as zero-free (error < 8e-11).
 */
inline double step_zero_probability(const BesselParams& params, double r0, double r1,
                                    double dt) {
    if (r0 < 0.0 || r1 < 0.0 || !(dt > 0.0)) {
        throw std::domain_error("step_zero_probability: need r0, r1 >= 0 and dt > 0");
    }
    const double w = r0 * r1 / dt;
    if (w > 12.0) return 0.0;
    if (w == 0.0) return 1.0;  // an endpoint sits exactly on 0
    // I_{nu}(w) = e^w w^{nu} * [e^{-w} I_nu(w) w^{-nu}]; the scaled series is
    // accurate through w = 30, far past the cutoff above.
    const double scaled_pos = detail::bessel_ie_scaled_series(params.mu, w);
    const double scaled_neg = detail::bessel_ie_scaled_series(-params.mu, w);
    return 1.0 - std::pow(w, 2.0 * params.mu) * scaled_pos / scaled_neg;
}

/**
 * Posterior draw of the location of the last zero of the continuous path.
 * Conditionally on the exact skeleton, zero visits inside distinct steps are
 * independent events with the step_zero_probability above; scanning steps
 * k = first_step, first_step - 1, ..., 0 and stopping at the first success
 * therefore samples the step containing the last zero at or below node
 * first_step + 1 exactly. Returns the step index (the step spans
 * times[k] .. times[k+1]), or -1 when no step fires (impossible for paths
 * started on the zero set, where step 0 fires with probability 1).
 *
 * Draws are consumed in descending step order, so a caller may continue the
 * scan below a smaller node with a second call without double-drawing.
 */
inline std::ptrdiff_t sample_last_zero_step(const PathGrid& path, std::size_t first_step,
                                            RngStream& stream) {
    detail::require_path(path);
    if (first_step + 1 >= path.times.size()) {
        throw std::domain_error("sample_last_zero_step: step index beyond the grid");
    }
    for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(first_step); k >= 0; --k) {
        const double dt = path.times[k + 1] - path.times[k];
        const double q = step_zero_probability(path.params, path.r[k], path.r[k + 1], dt);
        if (q >= 1.0 || (q > 0.0 && stream.uniform() < q)) return k;
    }
    return -1;
}

/**
 * Place the sampled zero inside its step. Interior steps use a uniform draw
 * (the last-zero density is flat at step scale); the step at the time origin
 * uses dt * U^{1/mu}, the exact small-time shape of the t^{mu-1} density, so
 * the Beta mass below one grid step — (dt)^mu, sizeable for small mu — lands
 * with the right within-step law.
 */
inline double place_zero_in_step(const PathGrid& path, std::ptrdiff_t step,
                                 RngStream& stream) {
    if (step < 0 || step + 1 >= static_cast<std::ptrdiff_t>(path.times.size())) {
        throw std::domain_error("place_zero_in_step: bad step index");
    }
    const double t0 = path.times[step];
    const double dt = path.times[step + 1] - t0;
    if (step == 0 && path.r[0] == 0.0) {
        return t0 + dt * std::pow(stream.uniform(), 1.0 / path.params.mu);
    }
    return t0 + dt * stream.uniform();
}

/**
 * First time the path crosses the level a > 0, located by linear
 * interpolation inside the first grid interval whose right endpoint reaches
 * a. Returns nullopt when the level is never reached on the grid.
 */
inline std::optional<double> first_hitting(const PathGrid& path, double a) {
    detail::require_path(path);
    if (!(a > 0.0)) {
        throw std::domain_error("first_hitting: level must be positive, got " +
                                std::to_string(a));
    }
    if (path.r[0] >= a) return path.times[0];
    for (std::size_t k = 1; k < path.r.size(); ++k) {
        if (path.r[k] >= a) {
            const double r0 = path.r[k - 1];
            const double r1 = path.r[k];
            const double t0 = path.times[k - 1];
            const double dt = path.times[k] - t0;
            return r1 > r0 ? t0 + dt * (a - r0) / (r1 - r0) : path.times[k];
        }
    }
    return std::nullopt;
}

/// First grid time with L > u (right-continuous inverse of the local time on
/// the grid); nullopt when the path's local time never exceeds u.
inline std::optional<double> inverse_local_time(const PathGrid& path, double u) {
    detail::require_path(path);
    if (path.l.size() != path.times.size()) {
        throw std::invalid_argument("inverse_local_time: path carries no local time channel");
    }
    if (u < 0.0) {
        throw std::domain_error("inverse_local_time: u must be nonnegative");
    }
    auto it = std::upper_bound(path.l.begin(), path.l.end(), u);
    if (it == path.l.end()) return std::nullopt;
    return path.times[static_cast<std::size_t>(it - path.l.begin())];
}

/**
 * The pseudo-stopping time rho: the last grid time strictly before the last
 * zero g at which R_t / sqrt(1 - t) attains its supremum over [0, g).
 * Requires a unit horizon (the normalization sqrt(1-t) is tied to it).
 * An empty pre-g segment (g = 0) yields 0.
 */
inline double pseudo_stopping_time(const PathGrid& path) {
    detail::require_path(path);
    const double T = path.times.back();
    if (std::fabs(T - 1.0) > 1e-9) {
        throw std::domain_error("pseudo_stopping_time: requires horizon 1, got " +
                                std::to_string(T));
    }
    const double g = last_zero_before(path, T);
    double best = -1.0;
    double arg = 0.0;
    for (std::size_t k = 0; k < path.times.size() && path.times[k] < g; ++k) {
        const double denom = std::sqrt(1.0 - path.times[k]);
        const double v = path.r[k] / denom;
        if (v >= best) {  // >= : ties broken by the last attaining index
            best = v;
            arg = path.times[k];
        }
    }
    return best < 0.0 ? 0.0 : arg;
}

/**
 * Lengths of the completed excursions above the zero threshold: maximal
 * intervals where R stays above zero_threshold, measured between the
 * flanking zero-set grid visits. An excursion still running at the horizon
 * has no closing visit and is dropped.
 */
inline std::vector<double> extract_excursions(const PathGrid& path) {
    detail::require_path(path);
    std::vector<double> lengths;
    std::ptrdiff_t last_zero = -1;
    for (std::size_t k = 0; k < path.r.size(); ++k) {
        if (path.r[k] <= path.zero_threshold) {
            if (last_zero >= 0 && k > static_cast<std::size_t>(last_zero) + 1) {
                lengths.push_back(path.times[k] - path.times[static_cast<std::size_t>(last_zero)]);
            }
            last_zero = static_cast<std::ptrdiff_t>(k);
        }
    }
    return lengths;
}

/// Terminal meander value R_T / sqrt(T - g); by convention 0 when R_T is on
/// the zero set (in which case g = T).
inline double meander_value(const PathGrid& path) {
    detail::require_path(path);
    const double T = path.times.back();
    const double g = last_zero_before(path, T);
    if (g >= T) return 0.0;
    return path.r.back() / std::sqrt(T - g);
}

/**
 * Terminal value of the last-zero compensator
 *
 *   A_inf = c_mu int_0^T (T-u)^{-mu} dL_u.
 *
 * Each grid increment of L is spread uniformly over its interval and the
 * singular factor (T-u)^{-mu} is integrated in closed form against that
 * density, which tames the u -> T singularity without truncation:
 *
 *   int_{t_k}^{t_{k+1}} (T-u)^{-mu} du = [(T-t_k)^{1-mu} - (T-t_{k+1})^{1-mu}] / (1-mu).
 */
inline double compensator_terminal(const PathGrid& path, double T) {
    detail::require_path(path);
    if (path.l.size() != path.times.size()) {
        throw std::invalid_argument("compensator_terminal: path carries no local time channel");
    }
    if (std::fabs(T - path.times.back()) > 1e-9 * std::max(1.0, T)) {
        throw std::domain_error("compensator_terminal: T must equal the path horizon");
    }
    const double mu = path.params.mu;
    const double om = 1.0 - mu;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
        const double dl = path.l[k + 1] - path.l[k];
        if (dl == 0.0) continue;
        const double dt = path.times[k + 1] - path.times[k];
        const double w =
            (std::pow(T - path.times[k], om) - std::pow(T - path.times[k + 1], om)) / (om * dt);
        acc += dl * w;
    }
    return path.params.c_mu * acc;
}

/// Assemble the full record in one pass over the path.
inline RandomTimesRecord build_random_times_record(
    const PathGrid& path, const std::vector<double>& hitting_levels = {},
    const std::vector<double>& tau_levels = {}) {
    RandomTimesRecord rec;
    const double T = path.times.back();
    rec.g_last_zero = last_zero_before(path, T);
    rec.meander = meander_value(path);
    for (double a : hitting_levels) {
        if (auto t = first_hitting(path, a)) rec.hitting[a] = *t;
    }
    for (double u : tau_levels) {
        if (auto t = inverse_local_time(path, u)) rec.tau[u] = *t;
    }
    if (std::fabs(T - 1.0) <= 1e-9) rec.rho = pseudo_stopping_time(path);
    rec.excursion_lengths = extract_excursions(path);
    if (path.l.size() == path.times.size()) {
        rec.compensator_terminal = compensator_terminal(path, T);
    }
    return rec;
}

}  // namespace bessellab
