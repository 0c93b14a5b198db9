#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "stroock/errors.hpp"
#include "stroock/rng.hpp"

namespace stroock {

// Exact, lossless representation of the scaled telegraph noise
// theta_eps(t) = (1/eps) * (-1)^{N(t / eps^2)}: the initial sign plus the
// ordered Poisson jump times (intensity eps^-2) in t-coordinates.
//
// Immutable after construction; safe to share across threads.
struct TelegraphPath {
    double epsilon = 1.0;
    double horizon = 1.0;
    int initial_sign = +1;                 // +1 or -1
    std::vector<double> jump_times;        // strictly increasing, in (0, horizon]

    // Sign of theta on segment j (between jump j-1 and jump j), so
    // theta = sign_on_segment(j) / epsilon there.
    int sign_on_segment(std::size_t j) const {
        return (j % 2 == 0) ? initial_sign : -initial_sign;
    }

    // Number of jumps at times <= t.
    std::size_t jumps_up_to(double t) const;
};

enum class InitialLaw {
    fixed_plus,   // N(0) = 0 forces xi(0) = +1 (the construction's convention)
    fixed_minus,
    stationary,   // fair coin, mu(+1) = mu(-1) = 1/2
};

enum class Side { left, right };

// Expected jump count above this rejects with capacity_error instead of
// silently exhausting memory.
inline constexpr double kMaxExpectedJumps = 1e8;

TelegraphPath sample_path(double epsilon, double horizon, RngSeed seed,
                          InitialLaw initial = InitialLaw::fixed_plus);

// theta_eps(t), i.e. +-1/eps on the segment containing t. At a jump time the
// value is the post-jump (right-continuous) one; Side::left gives theta(t-).
double theta_at(const TelegraphPath& path, double t, Side side = Side::right);

// Theta_eps(t) = int_0^t theta_eps(r) dr, continuous piecewise linear with
// slopes +-1/eps; evaluated exactly from the segments.
double theta_integral(const TelegraphPath& path, double t);

// Weight for integrate_theta: either supplies a closed-form antiderivative
// in r (exact segment sums) or is integrated by adaptive quadrature per
// segment to abs tolerance tol_quad.
struct SegmentWeight {
    std::function<double(double)> value;            // required for quadrature mode
    std::function<double(double)> antiderivative;   // empty => quadrature
    double tol_quad = 1e-10;

    static SegmentWeight one();
    static SegmentWeight from_function(std::function<double(double)> f, double tol = 1e-10);
    static SegmentWeight with_antiderivative(std::function<double(double)> antiderivative);
};

// int_a^b weight(r) * theta_eps(r) dr, computed segment by segment.
double integrate_theta(const TelegraphPath& path, const SegmentWeight& weight,
                       double a, double b);

// Jump sum minus compensator: int_0^t theta(s-) dN~^{eps^-2}(ds)
//   = sum_{tau_j <= t} theta(tau_j-)  -  eps^-2 * int_0^t theta(s) ds,
// computed exactly from the path arithmetic.
double compensated_theta_integral(const TelegraphPath& path, double t);

// Residual of the Ito decomposition
//   Theta(t) = eps/2 - eps^2 * (compensated integral) - (eps^2/2) * theta(t),
// which must vanish pathwise up to rounding.
double decomposition_residual(const TelegraphPath& path, double t);

// CSV dump: header `segment_index,start_t,end_t,theta_value`.
void write_path_csv(std::ostream& os, const TelegraphPath& path);

} // namespace stroock
