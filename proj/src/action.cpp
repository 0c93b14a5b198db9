#include "stroock/action.hpp"

#include <algorithm>
#include <cmath>

#include "stroock/quadrature.hpp"

namespace stroock {

double path_rate(const GridPath& f) {
    if (f.cells() < 1) throw domain_error("path_rate: need at least one cell");
    if (f.values[0] != 0.0) throw domain_error("path_rate: f(0) must be 0");
    double total = 0.0;
    for (std::size_t i = 0; i < f.cells(); ++i) {
        const double dt = f.times[i + 1] - f.times[i];
        const double cost = lambda_star((f.values[i + 1] - f.values[i]) / dt);
        if (is_infinite_rate(cost)) return kInfiniteRate;
        total += dt * cost;
    }
    return total;
}

namespace {

// Integral of K(t, .) over [a, b], a < b <= t <= 1, per family.
double kernel_cell_integral(const KernelSpec& spec, double t, double a, double b) {
    if (const auto* br = std::get_if<BrownianKernel>(&spec.family)) {
        double eta_int;
        if (br->eta_antiderivative) {
            eta_int = br->eta_antiderivative(b) - br->eta_antiderivative(a);
        } else {
            eta_int = integrate_or_throw(br->eta, a, b, 1e-12, "kernel_cell_integral");
        }
        return br->xi(t) * eta_int;
    }
    if (const auto* ou = std::get_if<OuKernel>(&spec.family)) {
        const double C = ou->C, lam = ou->lambda;
        return (C / lam) * (std::exp(lam * (b - t)) - std::exp(lam * (a - t)));
    }
    if (const auto* fbm = std::get_if<FbmKernel>(&spec.family)) {
        const double H = fbm->hurst;
        const double a_lo = (a == 0.0) ? -std::abs(H - 0.5) : 0.0;
        const double a_hi = (b == t && H < 0.5) ? (H - 0.5) : 0.0;
        auto f = [&](double r) { return kernel_value(spec, t, r); };
        // reuse the split/substitution machinery through two halves
        const double mid = 0.5 * (a + b);
        auto g_lo = [&](double x) { return f(a + x) * std::pow(x, -a_lo); };
        auto g_hi = [&](double x) { return f(b - x) * std::pow(x, -a_hi); };
        QuadResult q1 = power_substituted_integral(g_lo, mid - a, a_lo, 5e-10);
        QuadResult q2 = power_substituted_integral(g_hi, b - mid, a_hi, 5e-10);
        if (!q1.converged || !q2.converged)
            throw numeric_error("kernel_cell_integral: fbm quadrature failed",
                                q1.error_estimate + q2.error_estimate);
        return q1.value + q2.value;
    }
    auto f = [&](double r) { return kernel_value(spec, t, r); };
    return integrate_or_throw(f, a, b, 1e-10, "kernel_cell_integral");
}

// Dense symmetric positive-definite solve, in-place Cholesky.
bool cholesky_solve(std::vector<double>& m, std::vector<double>& rhs, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        double d = m[k * n + k];
        for (std::size_t p = 0; p < k; ++p) d -= m[k * n + p] * m[k * n + p];
        if (!(d > 0.0)) return false;
        const double l = std::sqrt(d);
        m[k * n + k] = l;
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = m[i * n + k];
            for (std::size_t p = 0; p < k; ++p) v -= m[i * n + p] * m[k * n + p];
            m[i * n + k] = v / l;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double v = rhs[i];
        for (std::size_t p = 0; p < i; ++p) v -= m[i * n + p] * rhs[p];
        rhs[i] = v / m[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double v = rhs[ii];
        for (std::size_t p = ii + 1; p < n; ++p) v -= m[p * n + ii] * rhs[p];
        rhs[ii] = v / m[ii * n + ii];
    }
    return true;
}

struct AugLag {
    const std::vector<double>& A; // m x n row-major
    std::size_t m, n;
    const std::vector<double>& target;
    double dc;  // control cell width
    double ub;  // 1 - barrier_offset
    double w;   // barrier weight
    double mu;  // penalty
    const std::vector<double>& y;

    void residual(const std::vector<double>& phi, std::vector<double>& r) const {
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            const double* row = &A[i * n];
            for (std::size_t j = 0; j < n; ++j) s += row[j] * phi[j];
            r[i] = s - target[i];
        }
    }

    double value(const std::vector<double>& phi, std::vector<double>& r) const {
        residual(phi, r);
        double v = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            v += dc * lambda_star(phi[j]);
            v -= w * (std::log(ub - phi[j]) + std::log(ub + phi[j]));
        }
        for (std::size_t i = 0; i < m; ++i) v += y[i] * r[i] + 0.5 * mu * r[i] * r[i];
        return v;
    }

    void gradient(const std::vector<double>& phi, const std::vector<double>& r,
                  std::vector<double>& g) const {
        std::vector<double> s(m);
        for (std::size_t i = 0; i < m; ++i) s[i] = y[i] + mu * r[i];
        for (std::size_t j = 0; j < n; ++j) {
            double gj = dc * lambda_star_prime(phi[j]) +
                        w * (1.0 / (ub - phi[j]) - 1.0 / (ub + phi[j]));
            for (std::size_t i = 0; i < m; ++i) gj += A[i * n + j] * s[i];
            g[j] = gj;
        }
    }
};

} // namespace

std::vector<std::vector<double>> kernel_forward_matrix(const KernelSpec& spec, const GridPath& f,
                                                       std::size_t n_control) {
    const std::size_t m = f.cells();
    std::vector<std::vector<double>> A(m, std::vector<double>(n_control, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
        const double t = f.times[i + 1];
        for (std::size_t j = 0; j < n_control; ++j) {
            const double a = static_cast<double>(j) / static_cast<double>(n_control);
            double b = static_cast<double>(j + 1) / static_cast<double>(n_control);
            if (a >= t) break;
            b = std::min(b, t);
            A[i][j] = kernel_cell_integral(spec, t, a, b);
        }
    }
    return A;
}

KernelRateResult kernel_rate(const KernelSpec& spec, const GridPath& f,
                             const KernelRateOptions& options) {
    if (f.cells() < 1) throw domain_error("kernel_rate: need at least one cell");
    if (f.values[0] != 0.0) throw domain_error("kernel_rate: f(0) must be 0 by (H1)");

    const std::size_t m = f.cells();
    const std::size_t n = options.n_control;
    const double dc = 1.0 / static_cast<double>(n);
    const double ub = 1.0 - options.barrier_offset;

    // Flatten the forward map; A^T A is reused by every Newton step.
    auto rows = kernel_forward_matrix(spec, f, n);
    std::vector<double> A(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) A[i * n + j] = rows[i][j];
    std::vector<double> ata(n * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double aij = A[i * n + j];
            if (aij == 0.0) continue;
            for (std::size_t k = 0; k <= j; ++k) ata[j * n + k] += aij * A[i * n + k];
        }
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) ata[j * n + k] = ata[k * n + j];

    std::vector<double> target(f.values.begin() + 1, f.values.end());
    std::vector<double> phi(n, 0.0), y(m, 0.0), r(m), g(n), step(n);
    double w = options.barrier_weight0;
    double mu = options.mu0;

    KernelRateResult result;
    double best_residual = kInfiniteRate;

    for (int outer = 0; outer < options.max_outer; ++outer) {
        AugLag lag{A, m, n, target, dc, ub, w, mu, y};
        double fval = lag.value(phi, r);
        for (int inner = 0; inner < options.max_inner; ++inner) {
            lag.gradient(phi, r, g);
            double gmax = 0.0;
            for (double v : g) gmax = std::max(gmax, std::abs(v));
            if (gmax < 1e-10 * std::max(1.0, mu)) break;

            // Hessian: diag(dc L''(phi) + w bar''(phi)) + mu A^T A
            std::vector<double> h(ata);
            for (std::size_t j = 0; j < n * n; ++j) h[j] *= mu;
            for (std::size_t j = 0; j < n; ++j) {
                const double lo = ub + phi[j], hi = ub - phi[j];
                h[j * n + j] += dc * lambda_star_second(phi[j]) +
                                w * (1.0 / (hi * hi) + 1.0 / (lo * lo));
            }
            step = g;
            if (!cholesky_solve(h, step, n)) break;

            // fraction-to-boundary, then Armijo backtracking
            double alpha = 1.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (step[j] > 0.0) alpha = std::min(alpha, 0.995 * (phi[j] + ub) / step[j]);
                if (step[j] < 0.0) alpha = std::min(alpha, 0.995 * (phi[j] - ub) / step[j]);
            }
            double slope = 0.0;
            for (std::size_t j = 0; j < n; ++j) slope -= g[j] * step[j];
            std::vector<double> trial(n);
            bool accepted = false;
            for (int bt = 0; bt < 40; ++bt) {
                for (std::size_t j = 0; j < n; ++j) trial[j] = phi[j] - alpha * step[j];
                const double fv = lag.value(trial, r);
                if (fv <= fval + 1e-4 * alpha * slope) {
                    phi.swap(trial);
                    fval = fv;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) break;
        }

        lag.residual(phi, r);
        double rmax = 0.0;
        for (double v : r) rmax = std::max(rmax, std::abs(v));
        best_residual = std::min(best_residual, rmax);
        result.outer_iterations = outer + 1;

        if (rmax <= options.tol_feas && w <= 1e-10) break;

        for (std::size_t i = 0; i < m; ++i) y[i] += mu * r[i];
        mu = std::min(mu * 2.0, options.mu_max);
        w *= 0.5;
    }

    std::vector<double> final_r(m);
    AugLag{A, m, n, target, dc, ub, w, mu, y}.residual(phi, final_r);
    double rmax = 0.0;
    for (double v : final_r) rmax = std::max(rmax, std::abs(v));

    result.control = phi;
    result.control_cells.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        result.control_cells[j] = (static_cast<double>(j) + 0.5) * dc;
    result.feasibility_residual = rmax;

    if (rmax <= options.tol_feas) {
        double v = 0.0;
        for (std::size_t j = 0; j < n; ++j) v += dc * lambda_star(phi[j]);
        result.value = v;
        return result;
    }
    if (rmax > options.infeasibility_cut) {
        // No control in the box tracks the target: infinite rate is the answer.
        result.value = kInfiniteRate;
        return result;
    }
    double v = 0.0;
    for (std::size_t j = 0; j < n; ++j) v += dc * lambda_star(phi[j]);
    throw solver_error("kernel_rate: augmented Lagrangian did not reach feasibility", rmax, v);
}

double sde_rate(const std::function<double(double)>& b,
                const std::function<double(double)>& sigma, double x0, const GridPath& x,
                const RateModel& model, double tol_sigma, double tol_feas) {
    if (x.cells() < 1) throw domain_error("sde_rate: need at least one cell");
    if (x.values[0] != x0) throw domain_error("sde_rate: x(0) must equal x0");
    double total = 0.0;
    for (std::size_t i = 0; i < x.cells(); ++i) {
        const double dt = x.times[i + 1] - x.times[i];
        const double slope = (x.values[i + 1] - x.values[i]) / dt;
        const double bi = b(x.values[i]);
        const double si = sigma(x.values[i]);
        if (std::abs(si) > tol_sigma) {
            const double cost = gamma_cost(model, (slope - bi) / si);
            if (is_infinite_rate(cost)) return kInfiniteRate;
            total += dt * cost;
        } else if (std::abs(slope - bi) > tol_feas) {
            return kInfiniteRate; // sigma vanished and the drift cannot explain the slope
        }
    }
    return total;
}

} // namespace stroock
