#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

#include "stroock/errors.hpp"

namespace stroock {

// Adaptive Gauss-Kronrod (G7, K15) with recursive bisection.
// Integrable endpoint singularities converge through depth refinement;
// callers with a known power-law endpoint should substitute it away first
// (see power_substituted_integral below).

namespace quad_detail {

// K15 nodes/weights on [-1, 1]; the embedded G7 uses the odd-indexed nodes.
inline constexpr double kK15Nodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
inline constexpr double kK15Weights[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double kG7Weights[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870};

template <class F>
void gk15(const F& f, double a, double b, double& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fk = 0.0, fg = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double v = f(c + h * kK15Nodes[i]);
        fk += kK15Weights[i] * v;
        if (i % 2 == 1) fg += kG7Weights[i / 2] * v;
    }
    kronrod = fk * h;
    err = std::abs((fk - fg) * h);
}

} // namespace quad_detail

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};

template <class F>
QuadResult adaptive_quadrature(const F& f, double a, double b, double abs_tol,
                               int max_depth = 52) {
    if (a == b) return {0.0, 0.0, true};

    struct Rec {
        const F& f;
        double abs_tol;
        int max_depth;
        QuadResult out;

        void run(double lo, double hi, double tol, int depth) {
            double v, e;
            quad_detail::gk15(f, lo, hi, v, e);
            if (e <= tol || depth >= max_depth) {
                out.value += v;
                out.error_estimate += e;
                if (e > tol) out.converged = false;
                return;
            }
            const double mid = 0.5 * (lo + hi);
            run(lo, mid, 0.5 * tol, depth + 1);
            run(mid, hi, 0.5 * tol, depth + 1);
        }
    } rec{f, abs_tol, max_depth, {}};

    rec.run(a, b, abs_tol, 0);
    return rec.out;
}

template <class F>
double integrate_or_throw(const F& f, double a, double b, double abs_tol,
                          const char* what = "adaptive quadrature") {
    QuadResult r = adaptive_quadrature(f, a, b, abs_tol);
    if (!r.converged)
        throw numeric_error(std::string(what) + ": failed to reach tolerance", r.error_estimate);
    return r.value;
}

// Integral of x^power_exponent * g(x) over [0, length] with g continuous,
// power_exponent > -1. Substituting x = w^p with p = 1/(1+power_exponent)
// removes the endpoint singularity analytically:
//   integral = p * length^(1+power_exponent) * int_0^1 g(length * w^p) dw.
template <class G>
QuadResult power_substituted_integral(const G& g, double length, double power_exponent,
                                      double abs_tol) {
    if (length <= 0.0) return {0.0, 0.0, true};
    if (power_exponent <= -1.0)
        throw domain_error("power_substituted_integral: non-integrable exponent");
    const double p = 1.0 / (1.0 + power_exponent);
    const double scale = p * std::pow(length, 1.0 + power_exponent);
    auto h = [&](double w) { return g(length * std::pow(w, p)); };
    QuadResult r = adaptive_quadrature(h, 0.0, 1.0, abs_tol / std::max(scale, 1e-300));
    r.value *= scale;
    r.error_estimate *= scale;
    return r;
}

// Golden-section maximization of a unimodal function on [lo, hi].
template <class F>
double golden_section_max(const F& f, double lo, double hi, double x_tol = 1e-12) {
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > x_tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace stroock
