#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "stroock/errors.hpp"

namespace stroock {

// A real function sampled on the uniform grid 0 = t_0 < ... < t_n = 1
// (or another horizon). Holds targets f, x, controls phi, and G_eps samples.
struct GridPath {
    std::vector<double> times;
    std::vector<double> values;

    std::size_t nodes() const { return times.size(); }
    std::size_t cells() const { return times.empty() ? 0 : times.size() - 1; }

    static GridPath uniform(std::size_t n_cells, double horizon = 1.0) {
        if (n_cells < 1) throw domain_error("GridPath: need at least one cell");
        GridPath g;
        g.times.resize(n_cells + 1);
        g.values.assign(n_cells + 1, 0.0);
        for (std::size_t i = 0; i <= n_cells; ++i)
            g.times[i] = horizon * static_cast<double>(i) / static_cast<double>(n_cells);
        return g;
    }

    template <class F>
    static GridPath sample(std::size_t n_cells, F&& f, double horizon = 1.0) {
        GridPath g = uniform(n_cells, horizon);
        for (std::size_t i = 0; i < g.times.size(); ++i) g.values[i] = f(g.times[i]);
        return g;
    }

    // Piecewise-linear interpolation between nodes.
    double at(double t) const {
        const std::size_t n = cells();
        if (n == 0) return values.empty() ? 0.0 : values[0];
        if (t <= times.front()) return values.front();
        if (t >= times.back()) return values.back();
        const double dt = (times.back() - times.front()) / static_cast<double>(n);
        auto j = static_cast<std::size_t>((t - times.front()) / dt);
        if (j >= n) j = n - 1;
        const double w = (t - times[j]) / (times[j + 1] - times[j]);
        return values[j] + w * (values[j + 1] - values[j]);
    }
};

} // namespace stroock
