#include "stroock/telegraph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "stroock/format.hpp"
#include "stroock/quadrature.hpp"

namespace stroock {

std::size_t TelegraphPath::jumps_up_to(double t) const {
    return static_cast<std::size_t>(
        std::upper_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin());
}

TelegraphPath sample_path(double epsilon, double horizon, RngSeed seed, InitialLaw initial) {
    if (!(epsilon > 0.0)) throw domain_error("sample_path: epsilon must be positive");
    if (!(horizon > 0.0)) throw domain_error("sample_path: horizon must be positive");

    const double rate = 1.0 / (epsilon * epsilon);
    if (rate * horizon > kMaxExpectedJumps)
        throw capacity_error("sample_path: expected jump count exceeds 1e8 (desk-scale cap)");

    CounterRng rng(seed);
    TelegraphPath path;
    path.epsilon = epsilon;
    path.horizon = horizon;
    switch (initial) {
        case InitialLaw::fixed_plus: path.initial_sign = +1; break;
        case InitialLaw::fixed_minus: path.initial_sign = -1; break;
        case InitialLaw::stationary: path.initial_sign = rng.next_sign(); break;
    }
    path.jump_times.reserve(static_cast<std::size_t>(rate * horizon * 1.1) + 16);
    double t = rng.next_exponential(rate);
    while (t <= horizon) {
        path.jump_times.push_back(t);
        t += rng.next_exponential(rate);
    }
    return path;
}

double theta_at(const TelegraphPath& path, double t, Side side) {
    if (t < 0.0 || t > path.horizon)
        throw domain_error("theta_at: t outside [0, horizon]");
    std::size_t jumps = path.jumps_up_to(t);
    if (side == Side::left && jumps > 0 && path.jump_times[jumps - 1] == t) --jumps;
    return static_cast<double>(path.sign_on_segment(jumps)) / path.epsilon;
}

double theta_integral(const TelegraphPath& path, double t) {
    if (t < 0.0 || t > path.horizon)
        throw domain_error("theta_integral: t outside [0, horizon]");
    double sum = 0.0;
    double seg_start = 0.0;
    std::size_t j = 0;
    for (; j < path.jump_times.size() && path.jump_times[j] < t; ++j) {
        sum += static_cast<double>(path.sign_on_segment(j)) * (path.jump_times[j] - seg_start);
        seg_start = path.jump_times[j];
    }
    sum += static_cast<double>(path.sign_on_segment(j)) * (t - seg_start);
    return sum / path.epsilon;
}

SegmentWeight SegmentWeight::one() {
    SegmentWeight w;
    w.value = [](double) { return 1.0; };
    w.antiderivative = [](double r) { return r; };
    return w;
}

SegmentWeight SegmentWeight::from_function(std::function<double(double)> f, double tol) {
    SegmentWeight w;
    w.value = std::move(f);
    w.tol_quad = tol;
    return w;
}

SegmentWeight SegmentWeight::with_antiderivative(std::function<double(double)> antiderivative) {
    SegmentWeight w;
    w.antiderivative = std::move(antiderivative);
    return w;
}

double integrate_theta(const TelegraphPath& path, const SegmentWeight& weight,
                       double a, double b) {
    if (a < 0.0 || b > path.horizon || a > b)
        throw domain_error("integrate_theta: require 0 <= a <= b <= horizon");
    if (a == b) return 0.0;

    auto segment_integral = [&](double lo, double hi) -> double {
        if (weight.antiderivative) return weight.antiderivative(hi) - weight.antiderivative(lo);
        return integrate_or_throw(weight.value, lo, hi, weight.tol_quad, "integrate_theta");
    };

    double sum = 0.0;
    double seg_start = a;
    std::size_t j = path.jumps_up_to(a);
    // jump at a exactly belongs to the segment to the right of a
    for (; j < path.jump_times.size() && path.jump_times[j] < b; ++j) {
        if (path.jump_times[j] <= seg_start) continue;
        sum += static_cast<double>(path.sign_on_segment(j)) *
               segment_integral(seg_start, path.jump_times[j]);
        seg_start = path.jump_times[j];
    }
    sum += static_cast<double>(path.sign_on_segment(path.jumps_up_to(seg_start))) *
           segment_integral(seg_start, b);
    return sum / path.epsilon;
}

double compensated_theta_integral(const TelegraphPath& path, double t) {
    if (t < 0.0 || t > path.horizon)
        throw domain_error("compensated_theta_integral: t outside [0, horizon]");
    double jump_sum = 0.0;
    const std::size_t jumps = path.jumps_up_to(t);
    for (std::size_t j = 0; j < jumps; ++j)
        jump_sum += static_cast<double>(path.sign_on_segment(j)) / path.epsilon;
    const double compensator = theta_integral(path, t) / (path.epsilon * path.epsilon);
    return jump_sum - compensator;
}

double decomposition_residual(const TelegraphPath& path, double t) {
    const double eps = path.epsilon;
    const double lhs = theta_integral(path, t);
    const double rhs = eps / 2.0 - eps * eps * compensated_theta_integral(path, t) -
                       (eps * eps / 2.0) * theta_at(path, t, Side::right);
    return lhs - rhs;
}

void write_path_csv(std::ostream& os, const TelegraphPath& path) {
    os << "segment_index,start_t,end_t,theta_value\n";
    double seg_start = 0.0;
    for (std::size_t j = 0; j <= path.jump_times.size(); ++j) {
        const double seg_end = (j < path.jump_times.size()) ? path.jump_times[j] : path.horizon;
        os << j << ',' << format_double(seg_start) << ',' << format_double(seg_end) << ','
           << format_double(static_cast<double>(path.sign_on_segment(j)) / path.epsilon) << '\n';
        seg_start = seg_end;
        if (seg_start >= path.horizon) break;
    }
}

} // namespace stroock
