#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "stroock/grid.hpp"
#include "stroock/kernels.hpp"
#include "stroock/rate.hpp"

namespace stroock {

// Exact rate of the piecewise-linear interpolant of f:
//   sum_i dt * lambda_star((f_{i+1} - f_i) / dt),
// infinite as soon as one slope leaves [-1, 1]. The discrete derivative is
// the unique feasible control, so no optimization is involved.
double path_rate(const GridPath& f);

struct KernelRateOptions {
    std::size_t n_control = 200;
    double tol_feas = 1e-6;        // sup-norm feasibility target on A*phi = f
    double barrier_offset = 1e-9;  // controls live in |phi| <= 1 - barrier_offset
    double barrier_weight0 = 1e-2; // halved each outer round
    int max_outer = 30;
    double mu0 = 1e4;              // initial augmented-Lagrangian penalty
    double mu_max = 1e10;
    int max_inner = 60;            // Newton iterations per outer round
    // Residuals above this after the final round mean no control with
    // |phi| <= 1 can meet the target: the rate is infinite.
    double infeasibility_cut = 1e-3;
};

struct KernelRateResult {
    double value = 0.0;                  // kInfiniteRate when infeasible
    std::vector<double> control;         // minimizing piecewise-constant phi
    std::vector<double> control_cells;   // cell midpoints of the control grid
    double feasibility_residual = 0.0;   // sup-norm of A*phi - f at return
    int outer_iterations = 0;
};

// Kernel-constrained rate
//   I(f) = inf { int lambda_star(phi) : f(t) = int_0^1 K(t,r) phi(r) dr }
// discretized with piecewise-constant controls; augmented-Lagrangian outer
// loop, log-barrier on the control box, damped-Newton inner iterations.
// f.values[0] must be 0 (forced by (H1)).
KernelRateResult kernel_rate(const KernelSpec& spec, const GridPath& f,
                             const KernelRateOptions& options = {});

// Forward map alone: the matrix A with A[i][j] = int_{cell j} K(t_i, r) dr
// over the control cells, rows indexed by the target nodes t_1..t_m.
std::vector<std::vector<double>> kernel_forward_matrix(const KernelSpec& spec,
                                                       const GridPath& f,
                                                       std::size_t n_control);

// Freidlin-Wentzell rate of a discretized path: for scalar dynamics the
// constraint pins the control cell by cell,
//   phi_i = (slope_i - b(x_i)) / sigma(x_i),
// so the infimum is a plain sum. Cells with |sigma| <= tol_sigma cost zero
// when the drift alone explains the slope and are unreachable otherwise.
double sde_rate(const std::function<double(double)>& b,
                const std::function<double(double)>& sigma, double x0, const GridPath& x,
                const RateModel& model, double tol_sigma = 1e-12, double tol_feas = 1e-6);

} // namespace stroock
