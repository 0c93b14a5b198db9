#include "stroock/sde.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace stroock {

LambdaSpec LambdaSpec::kappa_eps(double kappa) {
    if (!(kappa > 0.0)) throw domain_error("LambdaSpec: kappa must be positive");
    LambdaSpec s;
    s.form = Form::kappa_eps;
    s.kappa = kappa;
    return s;
}

LambdaSpec LambdaSpec::power(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw domain_error("LambdaSpec: beta must lie in (0, 1)");
    LambdaSpec s;
    s.form = Form::power;
    s.beta = beta;
    return s;
}

LambdaSpec LambdaSpec::custom_fn(std::function<double(double)> fn) {
    LambdaSpec s;
    s.form = Form::custom;
    s.custom = std::move(fn);
    return s;
}

double LambdaSpec::operator()(double epsilon) const {
    double v = 0.0;
    switch (form) {
        case Form::kappa_eps: v = kappa * epsilon; break;
        case Form::power: v = std::pow(epsilon, beta); break;
        case Form::custom: v = custom(epsilon); break;
    }
    if (!(v > 0.0)) throw domain_error("LambdaSpec: lambda(eps) must be positive");
    return v;
}

const char* LambdaSpec::name() const {
    switch (form) {
        case Form::kappa_eps: return "kappa_eps";
        case Form::power: return "power";
        case Form::custom: return "custom";
    }
    return "?";
}

DriftDiffusion DriftDiffusion::make(std::function<double(double)> b,
                                    std::function<double(double)> sigma, double lipschitz_hint) {
    DriftDiffusion dd;
    dd.b = std::move(b);
    dd.sigma = std::move(sigma);
    dd.lipschitz_hint = lipschitz_hint;
    if (lipschitz_hint > 0.0) {
        // Deterministic spot check on pairs in [-10, 10].
        CounterRng rng(RngSeed{0x48335F4C69702121ULL, 0});
        for (int k = 0; k < 256; ++k) {
            const double z = 20.0 * rng.next_unit() - 10.0;
            const double zp = 20.0 * rng.next_unit() - 10.0;
            const double lhs = std::abs(dd.b(z) - dd.b(zp)) + std::abs(dd.sigma(z) - dd.sigma(zp));
            if (lhs > lipschitz_hint * std::abs(z - zp) * (1.0 + 1e-12)) {
                dd.lipschitz_check_passed = false;
                break;
            }
        }
    }
    return dd;
}

namespace {

// Dormand-Prince 5(4) on the augmented state
//   y = (x, int b(x) ds, int sigma(x) theta ds).
struct State {
    double x, ib, ist;
};

struct Derivs {
    const DriftDiffusion& dd;
    double theta; // +-1/eps on the current segment
    double drive; // lambda(eps) * theta

    State operator()(const State& y) const {
        const double bx = dd.b(y.x);
        const double sx = dd.sigma(y.x);
        return State{bx + drive * sx, bx, sx * theta};
    }
};

State axpy(const State& y, double a, const State& d) {
    return State{y.x + a * d.x, y.ib + a * d.ib, y.ist + a * d.ist};
}

// One adaptive DP45 integration from t0 to t1 with the segment's frozen theta.
void integrate_segment(const Derivs& f, State& y, double t0, double t1, const SdeOptions& opts) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    double t = t0;
    double h = t1 - t0;
    while (t < t1) {
        h = std::min(h, t1 - t);
        const State k1 = f(y);
        const State k2 = f(axpy(y, h * a21, k1));
        State tmp = y;
        tmp = axpy(tmp, h * a31, k1);
        tmp = axpy(tmp, h * a32, k2);
        const State k3 = f(tmp);
        tmp = y;
        tmp = axpy(tmp, h * a41, k1);
        tmp = axpy(tmp, h * a42, k2);
        tmp = axpy(tmp, h * a43, k3);
        const State k4 = f(tmp);
        tmp = y;
        tmp = axpy(tmp, h * a51, k1);
        tmp = axpy(tmp, h * a52, k2);
        tmp = axpy(tmp, h * a53, k3);
        tmp = axpy(tmp, h * a54, k4);
        const State k5 = f(tmp);
        tmp = y;
        tmp = axpy(tmp, h * a61, k1);
        tmp = axpy(tmp, h * a62, k2);
        tmp = axpy(tmp, h * a63, k3);
        tmp = axpy(tmp, h * a64, k4);
        tmp = axpy(tmp, h * a65, k5);
        const State k6 = f(tmp);
        State y5 = y;
        y5 = axpy(y5, h * b1, k1);
        y5 = axpy(y5, h * b3, k3);
        y5 = axpy(y5, h * b4, k4);
        y5 = axpy(y5, h * b5, k5);
        y5 = axpy(y5, h * b6, k6);
        const State k7 = f(y5);

        const double err_x = h * (e1 * k1.x + e3 * k3.x + e4 * k4.x + e5 * k5.x + e6 * k6.x +
                                  e7 * k7.x);
        const double err_ib = h * (e1 * k1.ib + e3 * k3.ib + e4 * k4.ib + e5 * k5.ib +
                                   e6 * k6.ib + e7 * k7.ib);
        const double err_ist = h * (e1 * k1.ist + e3 * k3.ist + e4 * k4.ist + e5 * k5.ist +
                                    e6 * k6.ist + e7 * k7.ist);
        const double scale = opts.tol_ode * (1.0 + std::abs(y.x));
        const double err = std::max({std::abs(err_x), std::abs(err_ib), std::abs(err_ist)});

        if (err <= scale || h <= 1e-15 * std::max(1.0, std::abs(t1))) {
            t += h;
            y = y5;
            if (std::abs(y.x) > opts.magnitude_cap)
                throw divergence_error("simulate: trajectory exceeded the magnitude cap", t);
        }
        const double ratio = (err > 0.0) ? std::pow(scale / err, 0.2) : 5.0;
        h *= std::clamp(0.9 * ratio, 0.2, 5.0);
    }
}

} // namespace

namespace {

struct Trace {
    GridPath samples;
    std::vector<double> ib_at_nodes;  // int_0^{t_i} b(X) ds
    std::vector<double> ist_at_nodes; // int_0^{t_i} sigma(X) theta ds
    std::vector<double> jump_sum;     // sum_{tau_j <= t_i} sigma(X(tau_j-)) theta(tau_j-)
};

Trace run(const DriftDiffusion& dd, double x0, double epsilon, const LambdaSpec& lam,
          const TelegraphPath& path, const GridPath& grid, const SdeOptions& opts) {
    if (path.epsilon != epsilon) throw domain_error("simulate: path.epsilon mismatch");
    if (grid.times.empty() || grid.times.front() < 0.0 || grid.times.back() > path.horizon)
        throw domain_error("simulate: grid must lie within [0, horizon]");

    const double lambda = lam(epsilon);
    Trace tr;
    tr.samples = grid;
    tr.ib_at_nodes.assign(grid.times.size(), 0.0);
    tr.ist_at_nodes.assign(grid.times.size(), 0.0);
    tr.jump_sum.assign(grid.times.size(), 0.0);

    State y{x0, 0.0, 0.0};
    double t = 0.0;
    double jump_acc = 0.0;
    std::size_t next_jump = 0;
    std::size_t next_node = 0;

    while (next_node < grid.times.size()) {
        // next hard breakpoint: jump time or grid node, whichever first
        const double t_jump = (next_jump < path.jump_times.size())
                                  ? path.jump_times[next_jump]
                                  : std::numeric_limits<double>::infinity();
        const double t_node = grid.times[next_node];
        const double t_stop = std::min(t_jump, t_node);

        const int sign = path.sign_on_segment(next_jump);
        const double theta = static_cast<double>(sign) / epsilon;
        if (t_stop > t) integrate_segment(Derivs{dd, theta, lambda * theta}, y, t, t_stop, opts);
        t = t_stop;

        if (t == t_node) {
            tr.samples.values[next_node] = y.x;
            tr.ib_at_nodes[next_node] = y.ib;
            tr.ist_at_nodes[next_node] = y.ist;
            tr.jump_sum[next_node] = jump_acc;
            ++next_node;
        }
        if (t == t_jump) {
            jump_acc += dd.sigma(y.x) * theta; // left limits: pre-jump state and sign
            ++next_jump;
        }
    }
    return tr;
}

} // namespace

GridPath simulate(const DriftDiffusion& dd, double x0, double epsilon, const LambdaSpec& lam,
                  const TelegraphPath& path, const GridPath& grid, const SdeOptions& opts) {
    return run(dd, x0, epsilon, lam, path, grid, opts).samples;
}

MartingaleDiagnostics martingale_diagnostics(const DriftDiffusion& dd, double x0, double epsilon,
                                             const LambdaSpec& lam, const TelegraphPath& path,
                                             const GridPath& grid, const SdeOptions& opts) {
    Trace tr = run(dd, x0, epsilon, lam, path, grid, opts);
    const double lambda = lam(epsilon);
    const double eps2 = epsilon * epsilon;

    MartingaleDiagnostics diag;
    diag.t = tr.samples.times;
    diag.x = tr.samples.values;
    const std::size_t n = tr.samples.times.size();
    diag.drift_term.resize(n);
    diag.compensated_jump_term.resize(n);
    diag.dtheta_term.resize(n);
    diag.residual.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const double compensated = tr.jump_sum[i] - tr.ist_at_nodes[i] / eps2;
        // dtheta jumps by -2 theta(tau-), so the Stieltjes sum is -2 * jump_sum
        diag.drift_term[i] = tr.ib_at_nodes[i];
        diag.compensated_jump_term[i] = -lambda * eps2 * compensated;
        diag.dtheta_term[i] = -(lambda * eps2 / 2.0) * (-2.0 * tr.jump_sum[i]);
        diag.residual[i] = (diag.x[i] - x0) - diag.drift_term[i] -
                           diag.compensated_jump_term[i] - diag.dtheta_term[i];
        diag.max_abs_residual = std::max(diag.max_abs_residual, std::abs(diag.residual[i]));
    }
    return diag;
}

double gronwall_bound(double L, double b0, double sigma0, double x0, double lambda_over_eps) {
    const double c1 = std::abs(b0) + std::abs(sigma0);
    const double c2 = L + 1.0;
    return (std::abs(x0) + c1) * std::exp(c2 * (1.0 + lambda_over_eps));
}

} // namespace stroock
