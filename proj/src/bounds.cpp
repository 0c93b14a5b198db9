#include "stroock/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "stroock/mc.hpp"
#include "stroock/quadrature.hpp"
#include "stroock/telegraph.hpp"

namespace stroock {

namespace {

double exponent_term(const BoundParams& p, double eta) {
    const double width = p.iota2 - p.iota1;
    return eta * p.a -
           0.5 * eta * eta * p.rho * p.rho * width * std::exp(p.epsilon / p.lambda * eta * p.rho);
}

void validate(const BoundParams& p) {
    if (p.rho < 0.0) throw domain_error("BoundParams: rho must be nonnegative");
    if (p.iota1 > p.iota2) throw domain_error("BoundParams: iota1 must be <= iota2");
    if (!(p.lambda > 0.0) || !(p.epsilon > 0.0))
        throw domain_error("BoundParams: epsilon, lambda must be positive");
}

} // namespace

double log_exponential_inequality_bound(const BoundParams& p) {
    validate(p);
    if (p.eta < 0.0) throw domain_error("BoundParams: eta must be nonnegative");
    const double log_bound = -exponent_term(p, p.eta) / (p.lambda * p.lambda);
    return std::min(log_bound, 0.0);
}

double exponential_inequality_bound(const BoundParams& p) {
    return std::exp(log_exponential_inequality_bound(p));
}

double log_exponential_inequality_bound_optimized(const BoundParams& p, double* eta_star) {
    validate(p);
    // exponent_term is 0 at eta = 0, increases while the linear part wins,
    // then the exponential quadratic takes over: bracket by doubling.
    double hi = 1.0;
    for (int k = 0; k < 60 && exponent_term(p, hi) > 0.0; ++k) hi *= 2.0;
    const double eta_opt =
        golden_section_max([&](double eta) { return exponent_term(p, eta); }, 0.0, hi, 1e-10);
    if (eta_star) *eta_star = eta_opt;
    const double log_bound = -exponent_term(p, eta_opt) / (p.lambda * p.lambda);
    return std::min(log_bound, 0.0);
}

double comparison_bound(const BoundParams& p, double delta) {
    validate(p);
    if (!(delta > 0.0)) throw domain_error("comparison_bound: delta must be positive");
    const double smallness = 1.0 - p.epsilon * p.lambda * p.M;
    if (!(smallness > 1.0 / std::sqrt(2.0)))
        throw domain_error("comparison_bound: smallness condition 1 - eps*lambda*M > 1/sqrt(2) violated");
    const double lam2 = p.lambda * p.lambda;
    const double rho2 = p.rho * p.rho;
    return 2.0 * std::sqrt(2.0) * p.B +
           4.0 * p.M * p.M * p.epsilon * p.epsilon * (2.0 + 3.0 * lam2) *
               std::exp(4.0 * p.M * p.epsilon / p.lambda) +
           std::log((rho2 + p.y0_hat * p.y0_hat + p.y0_check * p.y0_check) /
                    (rho2 + delta * delta));
}

InequalityVerdict elementary_inequality_check(double a, double b, double rho, double beta) {
    if (rho < 0.0 || !(beta > 0.0 && beta < 1.0))
        return InequalityVerdict::precondition_not_met;
    const double lhs_pre = b * b;
    const double base = rho * rho + a * a;
    if (lhs_pre > beta * base) return InequalityVerdict::precondition_not_met;
    const double denom = (1.0 - std::sqrt(beta)) * (1.0 - std::sqrt(beta));
    const double rhs = (rho * rho + (a + b) * (a + b)) / denom;
    // tiny rounding slack: the inequality is tight at b = -sqrt(beta*base)*sign(a)
    return (base <= rhs * (1.0 + 1e-12)) ? InequalityVerdict::holds : InequalityVerdict::fails;
}

namespace {

// Exact antiderivative of the piecewise-linear interpolant of f.
SegmentWeight piecewise_linear_weight(const GridPath& f) {
    auto grid = std::make_shared<GridPath>(f);
    auto cums = std::make_shared<std::vector<double>>(f.times.size(), 0.0);
    for (std::size_t i = 0; i + 1 < f.times.size(); ++i) {
        const double h = f.times[i + 1] - f.times[i];
        (*cums)[i + 1] = (*cums)[i] + 0.5 * h * (f.values[i] + f.values[i + 1]);
    }
    return SegmentWeight::with_antiderivative([grid, cums](double r) {
        const auto& g = *grid;
        if (r <= g.times.front()) return (*cums).front();
        if (r >= g.times.back()) return (*cums).back();
        const auto it = std::upper_bound(g.times.begin(), g.times.end(), r);
        const std::size_t j = static_cast<std::size_t>(it - g.times.begin()) - 1;
        const double h = g.times[j + 1] - g.times[j];
        const double s = r - g.times[j];
        const double slope = (g.values[j + 1] - g.values[j]) / h;
        return (*cums)[j] + g.values[j] * s + 0.5 * slope * s * s;
    });
}

double l2_norm_squared(const GridPath& f) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < f.times.size(); ++i) {
        const double h = f.times[i + 1] - f.times[i];
        const double v0 = f.values[i], v1 = f.values[i + 1];
        total += h * (v0 * v0 + v0 * v1 + v1 * v1) / 3.0;
    }
    return total;
}

} // namespace

ExpMomentEstimate exp_moment_statistic(const GridPath& f, double eta, double epsilon,
                                       std::uint64_t n, RngSeed seed, unsigned threads) {
    if (!(eta >= 0.0 && eta < 0.5))
        throw domain_error("exp_moment_statistic: eta must lie in [0, 1/2)");
    const double norm2 = l2_norm_squared(f);
    if (!(norm2 > 0.0)) throw domain_error("exp_moment_statistic: ||f||_L2 must be positive");
    const SegmentWeight weight = piecewise_linear_weight(f);

    std::vector<double> stats(n, 0.0);
    parallel_samples(n, threads, [&](std::uint64_t i) {
        TelegraphPath path =
            sample_path(epsilon, 1.0, seed.with_stream(seed.stream + i), InitialLaw::stationary);
        const double g = integrate_theta(path, weight, 0.0, 1.0);
        stats[i] = std::exp(eta * g * g / norm2);
    });

    ExpMomentEstimate est;
    est.n = n;
    double sum = 0.0, sum2 = 0.0;
    for (double v : stats) {
        sum += v;
        sum2 += v * v;
    }
    const double nf = static_cast<double>(n);
    est.mean = sum / nf;
    const double var = std::max(0.0, sum2 / nf - est.mean * est.mean);
    est.ci_half_width = 1.959963984540054 * std::sqrt(var / nf);
    return est;
}

double sup_compensated_martingale(const TelegraphPath& path, double lambda) {
    const double eps = path.epsilon;
    double sup = 0.0; // M(0) = 0
    double theta_int = 0.0;
    double jump_sum = 0.0;
    double prev = 0.0;
    for (std::size_t j = 0; j < path.jump_times.size(); ++j) {
        const double s = path.sign_on_segment(j) / eps;
        theta_int += (path.jump_times[j] - prev) * s;
        sup = std::max(sup, lambda * (eps * eps * jump_sum - theta_int));
        jump_sum += s;
        sup = std::max(sup, lambda * (eps * eps * jump_sum - theta_int));
        prev = path.jump_times[j];
    }
    const double s = path.sign_on_segment(path.jump_times.size()) / eps;
    theta_int += (path.horizon - prev) * s;
    return std::max(sup, lambda * (eps * eps * jump_sum - theta_int));
}

std::vector<BoundCell> exponential_bound_grid(const std::vector<double>& epsilons,
                                              const std::vector<double>& levels,
                                              const LambdaSpec& lam, std::uint64_t n,
                                              RngSeed seed, unsigned threads) {
    if (n == 0) throw domain_error("exponential_bound_grid: n must be positive");
    std::vector<BoundCell> cells;
    std::uint64_t stream = seed.stream;
    for (double eps : epsilons) {
        const double lambda = lam(eps);
        std::vector<double> sups(n, 0.0);
        parallel_samples(n, threads, [&](std::uint64_t i) {
            TelegraphPath path = sample_path(eps, 1.0, seed.with_stream(stream + i),
                                             InitialLaw::stationary);
            sups[i] = sup_compensated_martingale(path, lambda);
        });
        stream += n;
        for (double a : levels) {
            BoundCell cell;
            cell.epsilon = eps;
            cell.a = a;
            cell.lambda = lambda;
            cell.n = n;
            for (double s : sups) cell.hits += (s > a) ? 1u : 0u;
            cell.freq = static_cast<double>(cell.hits) / static_cast<double>(n);
            cell.ci99_low = binomial_ci_low(cell.hits, n, 0.99);
            cell.ci99_high = binomial_ci_high(cell.hits, n, 0.99);
            BoundParams p;
            p.rho = 1.0; // |eps * theta| = 1
            p.a = a;
            p.iota1 = 0.0;
            p.iota2 = 1.0;
            p.epsilon = eps;
            p.lambda = lambda;
            cell.log_bound = log_exponential_inequality_bound_optimized(p);
            cell.bound = std::exp(cell.log_bound);
            cell.consistent = cell.ci99_low <= cell.bound;
            cells.push_back(cell);
        }
    }
    return cells;
}

} // namespace stroock
