#pragma once

#include <array>
#include <functional>
#include <vector>

namespace patchant {

struct SimplexOptions {
    double initial_step = 0.5;   // in each coordinate, reflected inward at the bounds
    double x_tol = 1e-3;         // simplex diameter, in units of the box size per coordinate
    double f_tol = 1e-9;         // spread of vertex values
    std::size_t max_evaluations = 2000;
    int restarts = 1;            // fresh simplex around the best point after convergence
};

struct SimplexResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

// Nelder-Mead on a box. Every trial point is passed through `project` (after clamping to the box),
// so additional constraints can be imposed by the caller.
SimplexResult minimize_box(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                           const std::vector<double>& lower, const std::vector<double>& upper,
                           const SimplexOptions& opt = {},
                           const std::function<void(std::vector<double>&)>& project = nullptr);

}  // namespace patchant
