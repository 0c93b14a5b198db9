#include "stroock/kernels.hpp"

#include <cmath>
#include <limits>

#include "stroock/quadrature.hpp"

namespace stroock {

namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Inner fBm integral for H > 1/2:
//   int_r^t (u-r)^(H-3/2) u^(H-1/2) du
//     = (t-r)^(H-1/2) * int_0^1 v^(H-3/2) (r + (t-r)v)^(H-1/2) dv.
double fbm_inner_high(double hurst, double t, double r, double tol) {
    const double len = t - r;
    auto g = [&](double v) { return std::pow(r + len * v, hurst - 0.5); };
    QuadResult q = power_substituted_integral(g, 1.0, hurst - 1.5, tol);
    if (!q.converged)
        throw numeric_error("fbm kernel: inner quadrature failed", q.error_estimate);
    return std::pow(len, hurst - 0.5) * q.value;
}

// Inner fBm integral for H < 1/2:
//   int_r^t (u-r)^(H-1/2) u^(H-3/2) du
//     = (t-r)^(H+1/2) * int_0^1 v^(H-1/2) (r + (t-r)v)^(H-3/2) dv.
double fbm_inner_low(double hurst, double t, double r, double tol) {
    const double len = t - r;
    auto g = [&](double v) { return std::pow(r + len * v, hurst - 1.5); };
    // The v-integral grows like r^(2H-1) as r -> 0; scale the target accordingly.
    const double scale = std::max(1.0, std::pow(r, 2.0 * hurst - 1.0));
    QuadResult q = power_substituted_integral(g, 1.0, hurst - 0.5, tol * scale);
    if (!q.converged)
        throw numeric_error("fbm kernel: inner quadrature failed", q.error_estimate);
    return std::pow(len, hurst + 0.5) * q.value;
}

double tabulated_value(const TabulatedKernel& k, double t, double r) {
    const double ft = t * static_cast<double>(k.n_t);
    const double fr = r * static_cast<double>(k.n_r);
    std::size_t it = std::min(static_cast<std::size_t>(ft), k.n_t - 1);
    std::size_t ir = std::min(static_cast<std::size_t>(fr), k.n_r - 1);
    const double wt = ft - static_cast<double>(it);
    const double wr = fr - static_cast<double>(ir);
    auto at = [&](std::size_t i, std::size_t j) { return k.values[i * (k.n_r + 1) + j]; };
    return (1.0 - wt) * ((1.0 - wr) * at(it, ir) + wr * at(it, ir + 1)) +
           wt * ((1.0 - wr) * at(it + 1, ir) + wr * at(it + 1, ir + 1));
}

} // namespace

KernelSpec KernelSpec::brownian(std::function<double(double)> xi,
                                std::function<double(double)> eta,
                                std::function<double(double)> eta_antiderivative) {
    return KernelSpec{BrownianKernel{std::move(xi), std::move(eta), std::move(eta_antiderivative)}};
}

KernelSpec KernelSpec::standard_brownian() {
    return brownian([](double) { return 1.0; }, [](double) { return 1.0; },
                    [](double r) { return r; });
}

KernelSpec KernelSpec::fbm(double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw domain_error("fbm: H must lie in (0, 1)");
    if (hurst == 0.5) return standard_brownian();
    return KernelSpec{FbmKernel{hurst}};
}

KernelSpec KernelSpec::ou(double C, double lambda) {
    if (!(C > 0.0) || !(lambda > 0.0)) throw domain_error("ou: require C > 0, lambda > 0");
    return KernelSpec{OuKernel{C, lambda}};
}

KernelSpec KernelSpec::tabulated(std::size_t n_t, std::size_t n_r, std::vector<double> values) {
    if (n_t < 1 || n_r < 1 || values.size() != (n_t + 1) * (n_r + 1))
        throw domain_error("tabulated: grid size mismatch");
    // (H1): the t = 0 row must vanish
    for (std::size_t j = 0; j <= n_r; ++j)
        if (values[j] != 0.0) throw domain_error("tabulated: K(0, r) must be 0");
    return KernelSpec{TabulatedKernel{n_t, n_r, std::move(values)}};
}

double fbm_c_h(double hurst) {
    if (!(hurst > 0.5 && hurst < 1.0)) throw domain_error("fbm_c_h: need 1/2 < H < 1");
    const double log_num = std::log(hurst) + std::log(2.0 * hurst - 1.0);
    return std::exp(0.5 * (log_num - log_beta(2.0 - 2.0 * hurst, hurst - 0.5)));
}

double fbm_c_tilde_h(double hurst) {
    if (!(hurst > 0.0 && hurst < 0.5)) throw domain_error("fbm_c_tilde_h: need 0 < H < 1/2");
    const double log_num = std::log(2.0 * hurst) - std::log(1.0 - 2.0 * hurst);
    return std::exp(0.5 * (log_num - log_beta(1.0 - 2.0 * hurst, hurst + 0.5)));
}

double kernel_value(const KernelSpec& spec, double t, double r, double tol) {
    if (t < 0.0 || t > 1.0 || r < 0.0 || r > 1.0)
        throw domain_error("kernel_value: t, r must lie in [0, 1]");
    if (t == 0.0) return 0.0; // (H1)

    if (const auto* b = std::get_if<BrownianKernel>(&spec.family))
        return (r <= t) ? b->xi(t) * b->eta(r) : 0.0;

    if (const auto* o = std::get_if<OuKernel>(&spec.family))
        return (r > 0.0 && r <= t) ? o->C * std::exp(o->lambda * (r - t)) : 0.0;

    if (const auto* tab = std::get_if<TabulatedKernel>(&spec.family))
        return tabulated_value(*tab, t, r);

    const auto& f = std::get<FbmKernel>(spec.family);
    const double H = f.hurst;
    if (r >= t) return 0.0;
    if (r == 0.0) return std::numeric_limits<double>::infinity(); // integrable blow-up
    if (H > 0.5) {
        return fbm_c_h(H) * std::pow(r, 0.5 - H) * fbm_inner_high(H, t, r, tol);
    }
    const double first = std::pow(t / r, H - 0.5) * std::pow(t - r, H - 0.5);
    const double second = (H - 0.5) * std::pow(r, 0.5 - H) * fbm_inner_low(H, t, r, tol);
    return fbm_c_tilde_h(H) * (first - second);
}

GridPath g_epsilon(const KernelSpec& spec, const TelegraphPath& path, const GridPath& grid) {
    if (path.horizon < 1.0) throw domain_error("g_epsilon: path horizon must cover [0, 1]");
    GridPath out = grid;

    for (std::size_t i = 0; i < out.times.size(); ++i) {
        const double t = out.times[i];
        if (t == 0.0) {
            out.values[i] = 0.0;
            continue;
        }
        if (const auto* b = std::get_if<BrownianKernel>(&spec.family)) {
            SegmentWeight w;
            if (b->eta_antiderivative) {
                w = SegmentWeight::with_antiderivative(b->eta_antiderivative);
            } else {
                w = SegmentWeight::from_function(b->eta);
            }
            out.values[i] = b->xi(t) * integrate_theta(path, w, 0.0, t);
        } else if (const auto* o = std::get_if<OuKernel>(&spec.family)) {
            const double C = o->C, lam = o->lambda;
            auto anti = [C, lam, t](double r) { return (C / lam) * std::exp(lam * (r - t)); };
            out.values[i] = integrate_theta(path, SegmentWeight::with_antiderivative(anti), 0.0, t);
        } else {
            // fbm / tabulated: per-segment quadrature of K(t, .)
            const KernelSpec& s = spec;
            auto w = SegmentWeight::from_function(
                [&s, t](double r) { return kernel_value(s, t, r); }, 1e-8);
            out.values[i] = integrate_theta(path, w, 0.0, t);
        }
    }
    return out;
}

namespace {

// Endpoint power exponent of |K(t, .)|^2-type integrands at r -> 0 and r -> t.
void fbm_square_exponents(double H, double& at_zero, double& at_t) {
    at_zero = (H > 0.5) ? (1.0 - 2.0 * H) : (2.0 * H - 1.0);
    at_t = 2.0 * H - 1.0;
}

// Integral of f over [lo, hi] where f behaves like (x-lo)^a_lo near lo and
// (hi-x)^a_hi near hi; split at the midpoint and substitute each power away.
template <class F>
double endpoint_power_integral(const F& f, double lo, double hi, double a_lo, double a_hi,
                               double tol) {
    if (hi <= lo) return 0.0;
    const double mid = 0.5 * (lo + hi);
    auto g_lo = [&](double x) { return f(lo + x) * std::pow(x, -a_lo); };
    auto g_hi = [&](double x) { return f(hi - x) * std::pow(x, -a_hi); };
    QuadResult q1 = power_substituted_integral(g_lo, mid - lo, a_lo, 0.5 * tol);
    QuadResult q2 = power_substituted_integral(g_hi, hi - mid, a_hi, 0.5 * tol);
    if (!q1.converged || !q2.converged)
        throw numeric_error("endpoint_power_integral: failed to reach tolerance",
                            q1.error_estimate + q2.error_estimate);
    return q1.value + q2.value;
}

} // namespace

double h2_modulus(const KernelSpec& spec, double s, double t, double tol) {
    if (!(0.0 <= s && s <= t && t <= 1.0)) throw domain_error("h2_modulus: require 0 <= s <= t <= 1");
    if (s == t) return 0.0;

    if (const auto* f = std::get_if<FbmKernel>(&spec.family)) {
        double a0, at;
        fbm_square_exponents(f->hurst, a0, at);
        auto diff2 = [&](double r) {
            const double d = kernel_value(spec, t, r) - kernel_value(spec, s, r);
            return d * d;
        };
        auto tail2 = [&](double r) {
            const double v = kernel_value(spec, t, r);
            return v * v;
        };
        // Both kernels blow up at r -> 0; K(s, .) additionally at r -> s-.
        double part1 = (s > 0.0)
                           ? endpoint_power_integral(diff2, 0.0, s, a0, std::min(at, 0.0), tol)
                           : 0.0;
        double part2 = endpoint_power_integral(tail2, s, t, s == 0.0 ? a0 : 0.0, at, tol);
        return part1 + part2;
    }

    // Elsewhere the integrand is piecewise smooth with breakpoints at r = s
    // and r = t (K vanishes past t); integrate the pieces separately.
    auto diff2 = [&](double r) {
        const double d = kernel_value(spec, t, r) - kernel_value(spec, s, r);
        return d * d;
    };
    auto tail2 = [&](double r) {
        const double v = kernel_value(spec, t, r);
        return v * v;
    };
    double total = 0.0;
    if (s > 0.0) total += integrate_or_throw(diff2, 0.0, s, 0.5 * tol, "h2_modulus");
    total += integrate_or_throw(tail2, s, t, 0.5 * tol, "h2_modulus");
    return total;
}

H2Fit fit_h2_modulus(const KernelSpec& spec, std::size_t n_grid, double tol) {
    // Pairs (s, t) on a uniform grid of (0, 1]; regress log h2 on log (t - s).
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < n_grid; ++i) {
        for (std::size_t j = i + 1; j <= n_grid; ++j) {
            const double s = static_cast<double>(i) / static_cast<double>(n_grid);
            const double t = static_cast<double>(j) / static_cast<double>(n_grid);
            const double m = h2_modulus(spec, s, t, tol);
            if (m <= 0.0) continue;
            xs.push_back(std::log(t - s));
            ys.push_back(std::log(m));
        }
    }
    if (xs.size() < 2) throw domain_error("fit_h2_modulus: not enough grid pairs");
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    H2Fit fit;
    fit.alpha = sxy / sxx;
    fit.constant = std::exp(my - fit.alpha * mx);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double resid = std::abs(ys[k] - (std::log(fit.constant) + fit.alpha * xs[k]));
        fit.max_residual = std::max(fit.max_residual, resid);
    }
    return fit;
}

KernelSelfTest kernel_selftest(const KernelSpec& spec, std::size_t n_grid, double tol) {
    KernelSelfTest report;
    for (std::size_t j = 0; j <= 100; ++j) {
        const double r = static_cast<double>(j) / 100.0;
        report.max_h1_violation =
            std::max(report.max_h1_violation, std::abs(kernel_value(spec, 0.0, r)));
    }
    report.h2 = fit_h2_modulus(spec, n_grid, tol);
    return report;
}

} // namespace stroock
