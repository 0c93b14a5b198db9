#pragma once

#include <cstdint>
#include <vector>

#include "stroock/grid.hpp"
#include "stroock/rng.hpp"
#include "stroock/sde.hpp"
#include "stroock/telegraph.hpp"

namespace stroock {

// Parameters of the appendix concentration inequalities.
struct BoundParams {
    double rho = 1.0;    // sup bound on the integrand gamma
    double B = 0.0;      // drift envelope constant
    double M = 0.0;      // jump envelope constant
    double eta = 1.0;    // Chernoff parameter (> 0; optimized when requested)
    double a = 1.0;      // exceedance level
    double iota1 = 0.0;  // stopping-time window [iota1, iota2]
    double iota2 = 1.0;
    double epsilon = 0.1;
    double lambda = 0.1; // lambda(epsilon)
    double y0_hat = 0.0; // initial magnitudes of the comparison pair
    double y0_check = 0.0;
};

// log of the exponential-inequality tail bound on
//   P( sup_{[iota1, tau]} lambda*eps * int gamma dN~ > a ):
//   -lambda^-2 (eta a - eta^2 rho^2 (iota2 - iota1) e^{eps eta rho / lambda} / 2),
// capped at 0 (probabilities never exceed 1). Computed in log-space: lambda^-2
// overflows the plain exponential for small lambda.
double log_exponential_inequality_bound(const BoundParams& p);

// Probability-scale value, clamped to [0, 1].
double exponential_inequality_bound(const BoundParams& p);

// Same bound minimized over eta > 0 (the statement holds for every eta, so
// the infimum is the usable bound).
double log_exponential_inequality_bound_optimized(const BoundParams& p, double* eta_star = nullptr);

// Upper bound on lambda^2(eps) * log P(sup |U^eps| > delta) under the
// comparison hypotheses:
//   2 sqrt(2) B + 4 M^2 eps^2 (2 + 3 lambda^2) e^{4 M eps / lambda}
//     + log((rho^2 + y0_hat^2 + y0_check^2) / (rho^2 + delta^2)).
// Requires the smallness condition 1 - eps*lambda*M > 1/sqrt(2).
double comparison_bound(const BoundParams& p, double delta);

enum class InequalityVerdict { holds, fails, precondition_not_met };

// Transcription check of the elementary inequality: under
// |b|^2 <= beta (rho^2 + a^2), 0 < beta < 1, it must hold that
// rho^2 + a^2 <= (rho^2 + (a+b)^2) / (1 - sqrt(beta))^2.
InequalityVerdict elementary_inequality_check(double a, double b, double rho, double beta);

// Monte Carlo mean of exp(eta * |int_0^1 f theta_eps|^2 / ||f||_L2^2) over n
// telegraph paths; finite for eta < 1/2 by the Gaussian-integrability bound.
struct ExpMomentEstimate {
    double mean = 0.0;
    double ci_half_width = 0.0; // 95% normal
    std::uint64_t n = 0;
};
ExpMomentEstimate exp_moment_statistic(const GridPath& f, double eta, double epsilon,
                                       std::uint64_t n, RngSeed seed, unsigned threads = 1);

// Pathwise sup over [0, horizon] of the scaled compensated-jump martingale
//   M(t) = lambda * eps^2 * int_0^t theta(s-) dN~^{eps^-2}(ds).
// M is linear between jumps, so the sup is attained at a jump or an endpoint
// and is evaluated exactly from the path arithmetic.
double sup_compensated_martingale(const TelegraphPath& path, double lambda);

// One (epsilon, a) cell of the empirical-vs-bound comparison for the
// exponential inequality: hit frequency of {sup M > a}, its 99% exact
// binomial interval, and the eta-optimized bound.
struct BoundCell {
    double epsilon = 0.0;
    double a = 0.0;
    double lambda = 0.0;
    std::uint64_t n = 0;
    std::uint64_t hits = 0;
    double freq = 0.0;
    double ci99_low = 0.0;
    double ci99_high = 1.0;
    double bound = 1.0;     // probability scale
    double log_bound = 0.0;
    bool consistent = false; // ci99_low <= bound
};

std::vector<BoundCell> exponential_bound_grid(const std::vector<double>& epsilons,
                                              const std::vector<double>& levels,
                                              const LambdaSpec& lam, std::uint64_t n,
                                              RngSeed seed, unsigned threads = 1);

} // namespace stroock
