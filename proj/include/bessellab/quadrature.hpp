// bessellab: adaptive Gauss-Kronrod quadrature with the endpoint-power
// substitutions needed by the closed-form laws (beta-type kernels, Gaussian
// tails on the half line).
//
// SPDX-License-Identifier: MIT

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "bessellab/params.hpp"

namespace bessellab {

/// Tuning knobs for adaptive integration. `stop_above` short-circuits the
/// refinement loop as soon as the running estimate of a *positive* integrand
/// exceeds the given value; callers that only need to detect divergence past
/// a cap (e.g. an exponent that already underflows exp(-x) to 0) use it to
/// avoid chasing a non-integrable singularity.
struct QuadOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    int max_intervals = 4000;
    double stop_above = std::numeric_limits<double>::infinity();
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15
// constants). Positive abscissae; even nodes are the embedded Gauss points.
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};

inline constexpr double kGK15WeightsK[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};

inline constexpr double kGK15WeightsG[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct Segment {
    double a, b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

/// One Gauss-Kronrod 15 panel on [a,b]; returns the Kronrod value and an
/// error estimate from the Gauss/Kronrod discrepancy (QUADPACK's scaling).
template <typename F>
Segment gk15_panel(F&& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);

    const double f_center = f(mid);
    double result_gauss = kGK15WeightsG[3] * f_center;
    double result_kronrod = kGK15WeightsK[7] * f_center;
    double result_abs = std::fabs(result_kronrod);

    double fv[7][2];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kGK15Nodes[j];
        fv[j][0] = f(mid - dx);
        fv[j][1] = f(mid + dx);
        const double fsum = fv[j][0] + fv[j][1];
        result_kronrod += kGK15WeightsK[j] * fsum;
        result_abs += kGK15WeightsK[j] * (std::fabs(fv[j][0]) + std::fabs(fv[j][1]));
        if (j % 2 == 1) {  // nodes 1,3,5 are the non-central Gauss points
            result_gauss += kGK15WeightsG[j / 2] * fsum;
        }
    }

    const double mean = 0.5 * result_kronrod;
    double result_asc = kGK15WeightsK[7] * std::fabs(f_center - mean);
    for (int j = 0; j < 7; ++j) {
        result_asc += kGK15WeightsK[j] *
                      (std::fabs(fv[j][0] - mean) + std::fabs(fv[j][1] - mean));
    }

    Segment seg;
    seg.a = a;
    seg.b = b;
    seg.value = result_kronrod * half;
    result_abs *= std::fabs(half);
    result_asc *= std::fabs(half);
    double err = std::fabs((result_kronrod - result_gauss) * half);
    if (result_asc != 0.0 && err != 0.0) {
        err = result_asc * std::min(1.0, std::pow(200.0 * err / result_asc, 1.5));
    }
    const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
    if (result_abs > std::numeric_limits<double>::min() / eps50) {
        err = std::max(err, eps50 * result_abs);
    }
    seg.error = err;
    return seg;
}

}  // namespace detail

/**
 * Adaptive integral of f over the finite interval [a, b].
 *
 * Globally adaptive bisection of the segment with the largest error estimate
 * until the summed error meets max(abs_tol, rel_tol * |integral|). Throws
 * numeric_error when the interval budget is exhausted first, reporting the
 * error that was achieved.
 */
template <typename F>
double integrate(F&& f, double a, double b, QuadOptions opt = QuadOptions{}) {
    if (opt.max_intervals <= 0) {
        throw std::invalid_argument("integrate: max_intervals must be positive");
    }
    if (a == b) return 0.0;
    std::vector<detail::Segment> heap;
    heap.reserve(64);
    heap.push_back(detail::gk15_panel(f, a, b));

    for (;;) {
        double total = 0.0;
        double total_err = 0.0;
        for (const auto& seg : heap) {
            total += seg.value;
            total_err += seg.error;
        }
        if (total_err <= std::max(opt.abs_tol, opt.rel_tol * std::fabs(total))) {
            return total;
        }
        if (total > opt.stop_above) {
            return total;
        }
        if (static_cast<int>(heap.size()) >= opt.max_intervals) {
            throw numeric_error("integrate: interval budget exhausted, error estimate " +
                                std::to_string(total_err) + " above tolerance " +
                                std::to_string(opt.abs_tol));
        }
        std::pop_heap(heap.begin(), heap.end());
        const detail::Segment worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            throw numeric_error("integrate: interval collapsed below double resolution "
                                "with error estimate still above tolerance");
        }
        heap.push_back(detail::gk15_panel(f, worst.a, mid));
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(detail::gk15_panel(f, mid, worst.b));
        std::push_heap(heap.begin(), heap.end());
    }
}

/**
 * Integral of a beta-type kernel over [0, 1]:
 *
 *   int_0^1 z^{alpha-1} (1-z)^{beta-1} g(z) dz,   alpha, beta > 0,
 *
 * with g continuous on [0, 1]. The endpoint power singularities are removed
 * exactly by the substitutions z = v^{1/alpha} (left half) and
 * 1 - z = w^{1/beta} (right half), so the adaptive rule only ever sees a
 * bounded integrand. This is the workhorse behind the arcsine-type laws,
 * whose densities have exponents alpha = mu, beta = 1 - mu.
 */
template <typename G>
double integrate_beta_kernel(G&& g, double alpha, double beta,
                             QuadOptions opt = QuadOptions{}) {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw std::domain_error("integrate_beta_kernel: exponents must be positive");
    }
    QuadOptions half_opt = opt;
    half_opt.abs_tol = 0.5 * opt.abs_tol;

    const double inv_alpha = 1.0 / alpha;
    const double left = integrate(
        [&](double v) {
            const double z = std::pow(v, inv_alpha);
            return inv_alpha * std::pow(1.0 - z, beta - 1.0) * g(z);
        },
        0.0, std::pow(0.5, alpha), half_opt);

    const double inv_beta = 1.0 / beta;
    const double right = integrate(
        [&](double w) {
            const double z = 1.0 - std::pow(w, inv_beta);
            return inv_beta * std::pow(z, alpha - 1.0) * g(z);
        },
        0.0, std::pow(0.5, beta), half_opt);

    return left + right;
}

/**
 * Integral of f over [a, inf) for integrands with at least exponential
 * decay, via the rational compactification x = a + s/(1-s). The transformed
 * integrand must vanish as s -> 1 (true for the Gaussian and exponential
 * tails this library integrates); values that underflow to 0 are fine.
 */
template <typename F>
double integrate_to_inf(F&& f, double a, QuadOptions opt = QuadOptions{}) {
    return integrate(
        [&](double s) {
            const double om = 1.0 - s;
            const double x = a + s / om;
            const double fx = f(x);
            return fx == 0.0 ? 0.0 : fx / (om * om);
        },
        0.0, 1.0, opt);
}

}  // namespace bessellab
