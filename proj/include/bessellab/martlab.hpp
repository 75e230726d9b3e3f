// bessellab: the martingale laboratory — balayage martingales built from the
// local time, the Azema-type projection onto the slow filtration, Doob
// maximal-identity checks, optional-stopping diagnostics at the last zero,
// terminal-functional orthogonality, and the three-term decomposition of the
// zero-set martingale.
//
// SPDX-License-Identifier: MIT

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bessellab/laws.hpp"
#include "bessellab/params.hpp"
#include "bessellab/pathsim.hpp"
#include "bessellab/quadrature.hpp"
#include "bessellab/randomtimes.hpp"
#include "bessellab/specfun.hpp"
#include "bessellab/stats.hpp"

namespace bessellab {

/// A pair (F, f) with F an antiderivative of f; the data of a balayage
/// martingale F(L_t) - f(L_t) R_t^{2mu}.
struct BalayageSpec {
    std::function<double(double)> F;
    std::function<double(double)> f;
    std::string description;
};

/// Verify F(x) - F(0) = int_0^x f at the given points (adaptive quadrature,
/// tolerance tol); throws std::invalid_argument on mismatch.
inline void validate_balayage(const BalayageSpec& spec, const std::vector<double>& points,
                              double tol = 1e-8) {
    QuadOptions opt;
    opt.abs_tol = 0.1 * tol;
    const double f0 = spec.F(0.0);
    for (double x : points) {
        const double lhs = spec.F(x) - f0;
        const double rhs = integrate([&](double y) { return spec.f(y); }, 0.0, x, opt);
        if (std::fabs(lhs - rhs) > tol) {
            throw std::invalid_argument(
                "validate_balayage: F(x)-F(0) != int f at x=" + std::to_string(x) +
                " (diff " + std::to_string(lhs - rhs) + ") for spec '" + spec.description + "'");
        }
    }
}

/// Pathwise balayage martingale M_t = F(L_t) - f(L_t) R_t^{2mu}.
inline std::vector<double> balayage_martingale(const PathGrid& path,
                                               const BalayageSpec& spec) {
    const double two_mu = 2.0 * path.params.mu;
    std::vector<double> out(path.times.size());
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        out[k] = spec.F(path.l[k]) - spec.f(path.l[k]) * std::pow(path.r[k], two_mu);
    }
    return out;
}

/**
 * Pathwise projection of the balayage martingale onto the slow filtration:
 *
 *   Lambda_t = 2^mu Gamma(1+mu) f(L_t) (t - g(t))^mu - F(L_t),
 *
 * with g(t) the running last zero. For F(x) = x, f == 1 this is the
 * equilibrium combination 2^mu Gamma(1+mu) (t-g(t))^mu - L_t whose
 * expectation vanishes identically in t.
 */
inline std::vector<double> azema_projection(const PathGrid& path, const BalayageSpec& spec) {
    const double mu = path.params.mu;
    const double pref = std::pow(2.0, mu) * gamma_fn(1.0 + mu);
    std::vector<double> out(path.times.size());
    double g = path.times[0];
    for (std::size_t k = 0; k < path.times.size(); ++k) {
        if (path.r[k] <= path.zero_threshold) g = path.times[k];
        out[k] = pref * spec.f(path.l[k]) * std::pow(path.times[k] - g, mu) -
                 spec.F(path.l[k]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Doob maximal identity.
// ---------------------------------------------------------------------------

/// Barrier given as a right-continuous step function of the local time:
/// value values[i] on [knots[i], knots[i+1]), with knots[0] = 0 and the last
/// piece extending to infinity.
struct PiecewiseConstantBarrier {
    std::vector<double> knots;
    std::vector<double> values;

    double operator()(double x) const {
        std::size_t i = 0;
        while (i + 1 < knots.size() && x >= knots[i + 1]) ++i;
        return values[i];
    }
};

/// Tail integral int_x^u phi^{-2mu} for a piecewise-constant barrier, in
/// closed form (no quadrature error; lets the Doob spec satisfy the
/// antiderivative invariant to machine precision).
inline double barrier_tail_integral(const BesselParams& params,
                                    const PiecewiseConstantBarrier& phi, double x,
                                    double u) {
    if (x >= u) return 0.0;
    const double two_mu = 2.0 * params.mu;
    double acc = 0.0;
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        const double lo = std::max(x, phi.knots[i]);
        const double hi =
            std::min(u, i + 1 < phi.knots.size() ? phi.knots[i + 1]
                                                 : std::numeric_limits<double>::infinity());
        if (hi > lo) acc += (hi - lo) * std::pow(phi.values[i], -two_mu);
    }
    return acc;
}

/**
 * The balayage data of the barrier-crossing martingale:
 *
 *   F(x) = 1 - exp(-int_x^u phi^{-2mu}),   f(x) = F'(x) = -phi(x)^{-2mu} e^{-int_x^u},
 *
 * both vanishing for x >= u. The resulting M = F(L) - f(L) R^{2mu} is a
 * positive martingale with M_0 = 1 - exp(-int_0^u phi^{-2mu}) that dies at
 * tau_u, which makes it the canonical test bed for the maximal identity
 * P(sup M > a) = (M_0/a) ^ 1.
 */
inline BalayageSpec make_doob_spec(const BesselParams& params,
                                   const PiecewiseConstantBarrier& phi, double u) {
    BalayageSpec spec;
    spec.description = "doob barrier martingale, u=" + std::to_string(u);
    const double two_mu = 2.0 * params.mu;
    spec.F = [params, phi, u](double x) -> double {
        if (x >= u) return 0.0;
        return 1.0 - std::exp(-barrier_tail_integral(params, phi, x, u));
    };
    spec.f = [params, phi, u, two_mu](double x) -> double {
        if (x >= u) return 0.0;
        return -std::pow(phi(x), -two_mu) *
               std::exp(-barrier_tail_integral(params, phi, x, u));
    };
    return spec;
}

/// Extra channels of doob_maximal_check beyond the headline report.
struct DoobDetail {
    double m0 = 0.0;                    ///< initial martingale value
    double ks_uniform = 0.0;            ///< KS of M_0/sup vs Uniform(0,1)
    double censored_fraction = 0.0;     ///< paths whose martingale had not died
    std::vector<double> sup_values;
};

/**
 * Check Doob's maximal identity P(sup_t M_t > a) = (M_0/a) ^ 1 on supplied
 * paths. The headline report tests a = 2 M_0 against probability 1/2; the
 * detail channel carries the M_0/sup uniformity distance. Paths whose
 * martingale is still alive at the grid end contribute their running sup (an
 * undercount); their fraction is reported so callers can budget it.
 */
inline StatReport doob_maximal_check(const std::vector<PathGrid>& paths,
                                     const BalayageSpec& spec,
                                     DoobDetail* detail = nullptr,
                                     std::uint64_t seed = 0) {
    if (paths.empty()) throw std::invalid_argument("doob_maximal_check: no paths");
    const double m0 = spec.F(0.0);
    if (!(m0 > 0.0)) {
        throw std::invalid_argument("doob_maximal_check: spec has nonpositive M_0");
    }
    std::vector<double> sups;
    sups.reserve(paths.size());
    std::size_t censored = 0;
    for (const auto& path : paths) {
        const std::vector<double> m = balayage_martingale(path, spec);
        double sup = 0.0;
        for (double v : m) {
            if (v < -1e-9) {
                throw std::invalid_argument(
                    "doob_maximal_check: spec yields a negative martingale value " +
                    std::to_string(v));
            }
            sup = std::max(sup, v);
        }
        if (m.back() > 1e-9 * m0) ++censored;
        sups.push_back(sup);
    }
    std::vector<double> indicator(sups.size());
    for (std::size_t i = 0; i < sups.size(); ++i) {
        indicator[i] = sups[i] > 2.0 * m0 ? 1.0 : 0.0;
    }
    StatReport rep = moment_report(indicator, 0.5, "doob-maximal", seed);
    if (detail != nullptr) {
        detail->m0 = m0;
        detail->censored_fraction =
            static_cast<double>(censored) / static_cast<double>(paths.size());
        std::vector<double> ratio(sups.size());
        for (std::size_t i = 0; i < sups.size(); ++i) ratio[i] = m0 / sups[i];
        detail->ks_uniform = ks_statistic(ratio, [](double x) {
            return x <= 0.0 ? 0.0 : (x >= 1.0 ? 1.0 : x);
        });
        detail->sup_values = std::move(sups);
    }
    return rep;
}

/**
 * Empirical probability that R rises above the barrier phi(L) before the
 * local time exceeds u, against the closed form
 * 1 - exp(-int_0^u phi^{-2mu}). Every supplied path must reach tau_u;
 * otherwise the undecided paths are listed in a horizon_error.
 */
template <typename Phi>
StatReport barrier_crossing_check(const std::vector<PathGrid>& paths, Phi&& phi, double u,
                                  std::uint64_t seed = 0) {
    if (paths.empty()) throw std::invalid_argument("barrier_crossing_check: no paths");
    std::vector<double> crossed;
    crossed.reserve(paths.size());
    std::size_t unreached = 0;
    std::string first_unreached;
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const auto& path = paths[p];
        std::size_t stop = path.times.size();  // exclusive
        for (std::size_t k = 0; k < path.l.size(); ++k) {
            if (path.l[k] > u) {
                stop = k + 1;  // include tau_u itself (a zero-set time)
                break;
            }
        }
        if (stop == path.times.size() && !path.l.empty() && path.l.back() <= u) {
            ++unreached;
            if (unreached <= 8) {
                first_unreached += (first_unreached.empty() ? "" : ", ") + std::to_string(p);
            }
            continue;
        }
        bool hit = false;
        for (std::size_t k = 0; k < stop; ++k) {
            if (path.r[k] > phi(path.l[k])) {
                hit = true;
                break;
            }
        }
        crossed.push_back(hit ? 1.0 : 0.0);
    }
    if (unreached > 0) {
        throw horizon_error("barrier_crossing_check: " + std::to_string(unreached) +
                            " paths did not reach tau_u (indices " + first_unreached +
                            "...); extend the simulation horizon");
    }
    const BesselParams& params = paths.front().params;
    const double target = hitting_probability(params, phi, u);
    return moment_report(crossed, target, "hitting-barrier", seed);
}

// ---------------------------------------------------------------------------
// Optional stopping at the last zero.
// ---------------------------------------------------------------------------

/// Result of the optional-stopping diagnostic: the Monte Carlo gap report
/// and the closed-form value of the same gap.
struct StoppingGapResult {
    StatReport report;
    double closed_form_gap = 0.0;
};

/// Closed-form E[ E[h(g)|F_g] - h(g) ] obtained by integrating the
/// conditional-law evaluation at the zero-set state (r=0, t=g) against the
/// Beta(mu, 1-mu) law of g.
template <typename H>
double optional_stopping_gap_closed_form(const BesselParams& params, H&& h) {
    QuadOptions opt;
    opt.abs_tol = 1e-9;
    const double integral = integrate_beta_kernel(
        [&](double g) {
            return conditional_h_integral(params, h, 0.0, g, 1.0) - h(g);
        },
        params.mu, 1.0 - params.mu, opt);
    return std::sin(kPi * params.mu) / kPi * integral;
}

/**
 * Optional-stopping gap at the last zero: for each sampled g, evaluate the
 * time-g conditional expectation of h(g') through the conditional law
 * (state r = 0) and subtract h(g). A uniformly integrable martingale
 * stopped at a *stopping* time would make the mean gap vanish; at the
 * honest time g it equals the closed-form gap instead (mu(1-mu) for
 * h(x) = x), quantifying the failure of optional stopping.
 */
template <typename H>
StoppingGapResult optional_stopping_gap(const BesselParams& params,
                                        const std::vector<double>& g_samples, H&& h,
                                        std::uint64_t seed = 0) {
    if (g_samples.size() < 2) {
        throw std::invalid_argument("optional_stopping_gap: need at least two samples");
    }
    StoppingGapResult res;
    res.closed_form_gap = optional_stopping_gap_closed_form(params, h);
    std::vector<double> gaps;
    gaps.reserve(g_samples.size());
    for (double g : g_samples) {
        gaps.push_back(conditional_h_integral(params, h, 0.0, g, 1.0) - h(g));
    }
    res.report = moment_report(gaps, res.closed_form_gap, "stopping-gap", seed);
    return res;
}

template <typename H>
StoppingGapResult optional_stopping_gap(const std::vector<PathGrid>& paths, H&& h,
                                        std::uint64_t seed = 0) {
    if (paths.empty()) throw std::invalid_argument("optional_stopping_gap: no paths");
    std::vector<double> gs;
    gs.reserve(paths.size());
    for (const auto& path : paths) gs.push_back(last_zero_before(path, path.times.back()));
    return optional_stopping_gap(paths.front().params, gs, h, seed);
}

// ---------------------------------------------------------------------------
// Orthogonality of the terminal functional X^f.
// ---------------------------------------------------------------------------

/// A twice-differentiable test function bundled with its derivatives.
struct C2Function {
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> ddf;
    std::string description;
};

/**
 * Monte Carlo check that X^f = f(R_1) - f(0) - R_1 f'(R_1) + (1-g) f''(R_1)
 * integrates to zero against any bounded functional w(g, L_1) of the slow
 * history: reports E[X^f w] with its standard error, target 0.
 */
template <typename W>
StatReport xf_orthogonality(const BesselParams& /*params*/,
                            const std::vector<double>& r1_samples,
                            const std::vector<double>& g_samples,
                            const std::vector<double>& l1_samples, const C2Function& fn,
                            W&& w, std::uint64_t seed = 0) {
    if (r1_samples.size() != g_samples.size() || r1_samples.size() != l1_samples.size() ||
        r1_samples.size() < 2) {
        throw std::invalid_argument("xf_orthogonality: need matched samples with n >= 2");
    }
    const double f0 = fn.f(0.0);
    std::vector<double> prod(r1_samples.size());
    for (std::size_t i = 0; i < r1_samples.size(); ++i) {
        const double r = r1_samples[i];
        const double x = fn.f(r) - f0 - r * fn.df(r) + (1.0 - g_samples[i]) * fn.ddf(r);
        prod[i] = x * w(g_samples[i], l1_samples[i]);
    }
    return moment_report(prod, 0.0, "xf-orthogonality", seed);
}

template <typename W>
StatReport xf_orthogonality(const std::vector<PathGrid>& paths, const C2Function& fn,
                            W&& w, std::uint64_t seed = 0) {
    if (paths.empty()) throw std::invalid_argument("xf_orthogonality: no paths");
    std::vector<double> r1, g, l1;
    r1.reserve(paths.size());
    g.reserve(paths.size());
    l1.reserve(paths.size());
    for (const auto& path : paths) {
        r1.push_back(path.r.back());
        g.push_back(last_zero_before(path, path.times.back()));
        l1.push_back(path.l.back());
    }
    return xf_orthogonality(paths.front().params, r1, g, l1, fn, w, seed);
}

// ---------------------------------------------------------------------------
// Three-term decomposition of the zero-set martingale.
// ---------------------------------------------------------------------------

/**
 * Evaluate the zero-set martingale decomposition
 *
 *   Mhat = Mhat1 - Mhat2 - Mhat3
 *
 * at the state (r = R_t, t, g_t = last zero before t), horizon T, where
 *
 *   Mhat1 = int m(dz) f(z) p(T-t; r, z)                (terminal-law term)
 *   Mhat2 = (1 - theta) int_0^inf dz z f(z sqrt(T-g_t)) e^{-z^2/2}
 *   Mhat3 = (sin(pi mu)/pi) int_0^inf dz z e^{-z^2/2}
 *             int_0^1 dw f(z sqrt(T-t) sqrt(1-w)) (1-w)^{-mu} w^{mu-1}
 *                        e^{-r^2/(2 w (T-t))}
 *
 * with theta = Q(mu, r^2/(2(T-t))) the supermartingale value. The weights
 * above are the corrected ones, forced by the f == 1 self-consistency
 * Mhat = 1 - (1-theta) - theta = 0; `as_printed` switches Mhat2's weight to
 * theta and Mhat3's kernel to w^{-mu} — an alternative printed form kept
 * for documentation, which breaks that identity (and the r = 0 vanishing)
 * except at mu = 1/2.
 *
 * The l_unused parameter is part of the state tuple for interface symmetry
 * with the other martingale evaluators; the decomposition does not depend
 * on the local time. Quadrature tolerance: 1e-7 absolute overall.
 */
template <typename F>
double mhat_decomposition(const BesselParams& params, F&& f, double r,
                          double /*l_unused*/, double t, double g_t, double T,
                          bool as_printed = false) {
    if (!(g_t <= t) || !(t < T)) {
        throw std::domain_error("mhat_decomposition: need g_t <= t < T");
    }
    if (r < 0.0) {
        throw std::domain_error("mhat_decomposition: r must be nonnegative");
    }
    const double mu = params.mu;
    const double span = T - t;
    const double r2 = r * r;

    QuadOptions opt;
    opt.abs_tol = 1e-9;

    // --- Mhat1: terminal-law integral against the speed measure. ----------
    // Kernel f(z) t^{mu-1} e^{-(r-z)^2/(2 span)} ie_scaled(-mu, r z/span)
    // z^{1-2mu}; the z^{1-2mu} power at the origin is removed exactly, the
    // Gaussian tail is compactified.
    const double smu = std::pow(span, mu - 1.0);
    auto m1_smooth = [&](double z) -> double {
        const double diff = r - z;
        return f(z) * smu * std::exp(-diff * diff / (2.0 * span)) *
               bessel_ie_scaled(params.nu, r * z / span);
    };
    const double z_split = std::max(1.0, r + 6.0 * std::sqrt(span));
    const double alpha1 = 2.0 - 2.0 * mu;  // z^{1-2mu} = z^{alpha1 - 1}
    const double m1_left =
        std::pow(z_split, alpha1) *
        integrate_beta_kernel([&](double zeta) { return m1_smooth(z_split * zeta); },
                              alpha1, 1.0, opt);
    const double m1_right = integrate_to_inf(
        [&](double z) { return m1_smooth(z) * std::pow(z, 1.0 - 2.0 * mu); }, z_split,
        opt);
    const double m1 = m1_left + m1_right;

    // --- Mhat2: meander term with the supermartingale weight. -------------
    const double theta = reg_upper_gamma(mu, r2 / (2.0 * span));
    const double w2 = as_printed ? theta : 1.0 - theta;
    const double scale2 = std::sqrt(T - g_t);
    const double m2_integral = integrate_to_inf(
        [&](double z) { return z * f(z * scale2) * std::exp(-0.5 * z * z); }, 0.0, opt);
    const double m2 = w2 * m2_integral;

    // --- Mhat3: conditional-law term. --------------------------------------
    const double alpha3 = as_printed ? 1.0 - mu : mu;  // w^{mu-1} vs w^{-mu}
    const double scale3 = std::sqrt(span);
    QuadOptions inner_opt;
    inner_opt.abs_tol = 1e-10;
    auto inner = [&](double z) -> double {
        return integrate_beta_kernel(
            [&](double w) -> double {
                double expfac = 1.0;
                if (r2 > 0.0) {
                    const double denom = 2.0 * w * span;
                    if (denom <= 0.0) return 0.0;
                    expfac = std::exp(-r2 / denom);
                }
                return f(z * scale3 * std::sqrt(1.0 - w)) * expfac;
            },
            alpha3, 1.0 - mu, inner_opt);
    };
    const double m3_outer = integrate_to_inf(
        [&](double z) { return z * std::exp(-0.5 * z * z) * inner(z); }, 0.0, opt);
    const double m3 = std::sin(kPi * mu) / kPi * m3_outer;

    return m1 - m2 - m3;
}

}  // namespace bessellab
