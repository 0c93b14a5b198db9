#pragma once

#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

#include "stroock/errors.hpp"
#include "stroock/grid.hpp"
#include "stroock/telegraph.hpp"

namespace stroock {

// K(t,r) = xi(t) * eta(r) * 1_{[0,t]}(r). eta_antiderivative, when supplied,
// makes g_epsilon exact per telegraph segment.
struct BrownianKernel {
    std::function<double(double)> xi;
    std::function<double(double)> eta;
    std::function<double(double)> eta_antiderivative; // optional
};

// Volterra kernel of fractional Brownian motion, Hurst index H in (0,1),
// H != 1/2 (H = 1/2 is constructed as a Brownian kernel instead).
struct FbmKernel {
    double hurst;
};

// K(t,r) = C * exp(lambda (r - t)) * 1_{(0,t]}(r).
struct OuKernel {
    double C;
    double lambda;
};

// K sampled on a uniform (t, r) grid over [0,1]^2, bilinearly interpolated.
// First-order accurate between nodes.
struct TabulatedKernel {
    std::size_t n_t = 0; // values is (n_t+1) x (n_r+1), row-major in t
    std::size_t n_r = 0;
    std::vector<double> values;
};

struct KernelSpec {
    std::variant<BrownianKernel, FbmKernel, OuKernel, TabulatedKernel> family;

    static KernelSpec brownian(std::function<double(double)> xi,
                               std::function<double(double)> eta,
                               std::function<double(double)> eta_antiderivative = {});
    // xi = eta = 1: K = 1_{[0,t]}, G_eps reduces to Theta_eps.
    static KernelSpec standard_brownian();
    static KernelSpec fbm(double hurst); // H = 1/2 maps to standard_brownian
    static KernelSpec ou(double C, double lambda);
    static KernelSpec tabulated(std::size_t n_t, std::size_t n_r, std::vector<double> values);
};

// fBm normalization constants, via log-gamma for stability near H = 0 or 1.
double fbm_c_h(double hurst);       // H > 1/2
double fbm_c_tilde_h(double hurst); // H < 1/2

// K(t,r). fBm kernels evaluate the inner u-integral by adaptive quadrature
// after substituting the endpoint power law away; returns +infinity at the
// r -> 0 blow-up of the fBm kernel (square-integrable).
double kernel_value(const KernelSpec& spec, double t, double r, double tol = 1e-9);

// G_eps(t_i) = int_0^1 K(t_i, r) theta_eps(r) dr on the template grid.
// Closed-form segment antiderivatives where the family provides them,
// per-segment quadrature otherwise.
GridPath g_epsilon(const KernelSpec& spec, const TelegraphPath& path, const GridPath& grid);

// int_0^1 (K(t,r) - K(s,r))^2 dr, the (H2) modulus, by quadrature.
double h2_modulus(const KernelSpec& spec, double s, double t, double tol = 1e-8);

// Least-squares fit of log h2(s,t) = log c + alpha log(t - s) over an
// n_grid x n_grid set of pairs; certifies nothing, reports the empirical fit.
struct H2Fit {
    double alpha = 0.0;
    double constant = 0.0;
    double max_residual = 0.0; // max |log h2 - fit| over the pairs
};
H2Fit fit_h2_modulus(const KernelSpec& spec, std::size_t n_grid = 10, double tol = 1e-6);

struct KernelSelfTest {
    double max_h1_violation = 0.0; // max_r |K(0,r)| over a scan grid
    H2Fit h2;
};
KernelSelfTest kernel_selftest(const KernelSpec& spec, std::size_t n_grid = 10,
                               double tol = 1e-6);

} // namespace stroock
