#pragma once

#include <stdexcept>
#include <string>

namespace stroock {

// Invalid inputs (bad epsilon, t outside [0, horizon], non-increasing times ...).
// Maps to CLI exit code 2.
using domain_error = std::domain_error;

// A numeric routine failed to reach its accuracy target. Carries the achieved
// error estimate. Maps to CLI exit code 3.
class numeric_error : public std::runtime_error {
public:
    numeric_error(const std::string& what, double achieved_error)
        : std::runtime_error(what), achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

// An iterative solver ran out of iterations. Carries the best
// (feasibility, objective) pair seen. Maps to CLI exit code 3.
class solver_error : public std::runtime_error {
public:
    solver_error(const std::string& what, double best_feasibility, double best_objective)
        : std::runtime_error(what),
          best_feasibility_(best_feasibility),
          best_objective_(best_objective) {}

    double best_feasibility() const noexcept { return best_feasibility_; }
    double best_objective() const noexcept { return best_objective_; }

private:
    double best_feasibility_;
    double best_objective_;
};

// Request exceeds the desk-scale envelope (e.g. > 1e8 expected jumps).
// Maps to CLI exit code 4.
class capacity_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace stroock
