#include "stroock/rate.hpp"

#include <cmath>

#include "stroock/quadrature.hpp"

namespace stroock {

double lambda_cgf(double alpha, CgfMode mode) {
    if (mode == CgfMode::closed_form) {
        // sqrt(1 + a^2) - 1 without cancellation for small alpha
        const double a2 = alpha * alpha;
        return a2 / (std::sqrt(1.0 + a2) + 1.0);
    }
    // Bracket the analytic maximizer x* = alpha / sqrt(1 + alpha^2), then polish;
    // this keeps the oracle independent of search bounds.
    const double x_star = alpha / std::sqrt(1.0 + alpha * alpha);
    const double lo = std::max(-1.0, x_star - 0.25);
    const double hi = std::min(1.0, x_star + 0.25);
    auto objective = [alpha](double x) { return alpha * x - lambda_star(x); };
    const double x_hat = golden_section_max(objective, lo, hi, 1e-12);
    return objective(x_hat);
}

double finite_eps_cgf(double alpha, double T, ChainStart initial) {
    if (!(T > 0.0)) throw domain_error("finite_eps_cgf: T must be positive");
    // M = Q + alpha*diag(1,-1); (M + I)^2 = (1 + alpha^2) I, so
    //   e^{T M} = e^{-T} [cosh(Ts) I + sinh(Ts)/s (M + I)],  s = sqrt(1 + alpha^2).
    // With observation vector (1,1):
    //   E = e^{-T} [cosh(Ts) + c * sinh(Ts)/s],
    // where c = v0 (M+I) (1,1)^T equals 1 (stationary) or 1 + alpha (start at +1).
    const double s = std::sqrt(1.0 + alpha * alpha);
    const double c = (initial == ChainStart::stationary) ? 1.0 : 1.0 + alpha;
    // log E = -T + Ts + log( (1 + c/s)/2 + e^{-2Ts} (1 - c/s)/2 )
    const double u = c / s;
    const double tail = std::exp(-2.0 * T * s) * 0.5 * (1.0 - u);
    const double log_e = -T + T * s + std::log(0.5 * (1.0 + u) + tail);
    return log_e / T;
}

double finite_dim_rate(const std::vector<double>& times, const std::vector<double>& values,
                       const RateModel& model) {
    if (times.empty() || times.size() != values.size())
        throw domain_error("finite_dim_rate: times and values must be nonempty, equal length");
    double prev_t = 0.0, prev_x = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > prev_t))
            throw domain_error("finite_dim_rate: times must be strictly increasing from 0");
        const double dt = times[i] - prev_t;
        const double cost = gamma_cost(model, (values[i] - prev_x) / dt);
        if (is_infinite_rate(cost)) return kInfiniteRate;
        total += dt * cost;
        prev_t = times[i];
        prev_x = values[i];
    }
    return total;
}

} // namespace stroock
