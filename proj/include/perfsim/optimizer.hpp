#pragma once

#include <functional>
#include <vector>

#include "perfsim/error.hpp"
#include "perfsim/population.hpp"

namespace perfsim {

/// A differentiable (or value-only) objective over a boxed parameter set.
struct Objective {
    std::function<double(const std::vector<double>&)> value;
    std::function<std::vector<double>(const std::vector<double>&)> gradient;  // may be empty
    int dimension = 1;
    std::vector<double> box_lo;
    std::vector<double> box_hi;
};

struct SolveResult {
    std::vector<double> theta;
    int iterations = 0;
    double grad_norm = 0.0;
};

/// Projected gradient descent with Armijo backtracking (halving). Terminates
/// when the projected-gradient norm drops to `tol`; throws DidNotConverge
/// after max_iters. Deterministic; the line search never increases the value.
SolveResult minimize_smooth_convex(const Objective& obj, std::vector<double> theta0, double tol,
                                   int max_iters);

/// Deterministic multistart wrapper for non-convex 1-D objectives: descends
/// from theta0 and from a uniform grid of starts over the box, returns the
/// best value (ties: smallest theta).
SolveResult minimize_multistart_1d(const Objective& obj, const std::vector<double>& theta0, double tol,
                                   int max_iters, int starts = 33);

/// Threshold maximizing weighted 0-1 accuracy of 1{x >= theta} over a 1-D
/// binary-labeled population. Scans support midpoints plus boundary
/// candidates; ties resolved toward the smallest threshold.
double best_threshold_1d(const PopulationState& pop);

/// Exhaustive 1-D grid minimizer, test oracle. Ties keep the first (lowest)
/// grid point.
double grid_search_oracle(const Objective& obj, double lo, double hi, double step);

}  // namespace perfsim
