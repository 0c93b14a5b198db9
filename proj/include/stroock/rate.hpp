#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "stroock/errors.hpp"

namespace stroock {

// Domain boundaries (|x| > 1, |x| > kappa) are first-class: infinite cost is
// an explicit sentinel assigned at the domain check, never the result of a
// floating overflow. All rate comparisons treat it as absorbing.
inline constexpr double kInfiniteRate = std::numeric_limits<double>::infinity();

inline bool is_infinite_rate(double v) { return std::isinf(v) && v > 0.0; }

// Local cost of the telegraph occupation:
//   1 - sqrt(1 - x^2) on [-1, 1] (closed endpoints, value 1 at |x| = 1),
//   infinite outside.
inline double lambda_star(double x) {
    const double ax = std::abs(x);
    if (ax > 1.0) return kInfiniteRate;
    if (ax == 1.0) return 1.0;
    return 1.0 - std::sqrt(1.0 - x * x);
}

// d/dx lambda_star on the open interval (-1, 1).
inline double lambda_star_prime(double x) { return x / std::sqrt(1.0 - x * x); }

inline double lambda_star_second(double x) {
    const double s = 1.0 - x * x;
    return 1.0 / (s * std::sqrt(s));
}

enum class CgfMode { closed_form, legendre_numeric };

// Scaled cumulant generating function Lambda(alpha) = sup_x {alpha x - lambda_star(x)}.
// closed_form: sqrt(1 + alpha^2) - 1. legendre_numeric: golden-section
// maximization around the analytic maximizer x = alpha / sqrt(1 + alpha^2),
// kept as an independent cross-oracle.
double lambda_cgf(double alpha, CgfMode mode = CgfMode::closed_form);

enum class ChainStart { plus, stationary };

// (1/T) log E exp(alpha * int_0^T xi(s) ds) for the unit-rate telegraph chain,
// computed exactly from the 2x2 tilted generator Q + alpha*diag(1,-1)
// (eigenvalues -1 +- sqrt(1+alpha^2)); evaluated in log-space so large T is safe.
// T plays the role of eps^-2.
double finite_eps_cgf(double alpha, double T, ChainStart initial = ChainStart::stationary);

// Occupation measure of the two-state chain: mass at +1 (mass at -1 implied).
struct OccupationMeasure {
    double nu_plus = 0.5;

    double nu_minus() const { return 1.0 - nu_plus; }
};

// Donsker-Varadhan rate of the two-state occupation: (sqrt(nu+) - sqrt(nu-))^2.
inline double occupation_rate(const OccupationMeasure& nu) {
    if (nu.nu_plus < 0.0 || nu.nu_plus > 1.0)
        throw domain_error("occupation_rate: nu_plus must lie in [0, 1]");
    const double d = std::sqrt(nu.nu_plus) - std::sqrt(nu.nu_minus());
    return d * d;
}

// Regime descriptor with its local cost:
//   kappa:     Gamma_kappa(x) = lambda_star(x / kappa) (finite iff |x| <= kappa)
//   gaussian:  x^2 / 2
//   unit_path: lambda_star
struct RateModel {
    enum class Regime { kappa, gaussian, unit_path };

    Regime regime = Regime::unit_path;
    double kappa = 1.0;

    static RateModel kappa_regime(double k) {
        if (!(k > 0.0)) throw domain_error("RateModel: kappa must be positive");
        return RateModel{Regime::kappa, k};
    }
    static RateModel gaussian() { return RateModel{Regime::gaussian, 0.0}; }
    static RateModel unit_path() { return RateModel{Regime::unit_path, 0.0}; }
};

// Per-regime local cost Gamma of Theorem-2.2 type rates.
inline double gamma_cost(const RateModel& model, double x) {
    switch (model.regime) {
        case RateModel::Regime::kappa: return lambda_star(x / model.kappa);
        case RateModel::Regime::gaussian: return 0.5 * x * x;
        case RateModel::Regime::unit_path: return lambda_star(x);
    }
    return kInfiniteRate;
}

// Finite-dimensional rate sum_i (t_i - t_{i-1}) * cost((x_i - x_{i-1}) / (t_i - t_{i-1}))
// with t_0 = 0, x_0 = 0 implied. Infinite if any increment leaves the cost domain.
double finite_dim_rate(const std::vector<double>& times, const std::vector<double>& values,
                       const RateModel& model);

} // namespace stroock
