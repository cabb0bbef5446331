#pragma once

#include <functional>
#include <span>
#include <vector>

namespace credit::detail {

struct SimplexOptions {
    double initial_step = 0.3;
    double size_tolerance = 1e-10; // characteristic simplex size
    int max_iterations = 20000;
    int max_restarts = 20;
    /// A run also ends when the best value improves by less than
    /// stall_tolerance (relative) over this many iterations per dimension.
    int stall_iterations_per_dim = 200;
    double stall_tolerance = 1e-12;
    /// Restarts stop once one lowers the objective by less than this
    /// fraction of its value.
    double restart_tolerance = 1e-12;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    /// Best value after every iteration, restarts included.
    std::vector<double> descent_log;
};

using Objective = std::function<double(std::span<const double>)>;

/// Unconstrained Nelder-Mead minimisation (GSL nmsimplex2). After the
/// simplex contracts below the size tolerance it is rebuilt around the best
/// vertex (or stalls, see SimplexOptions); this repeats until a restart no longer lowers the objective.
/// Non-finite objective values are treated as +huge.
SimplexResult minimize_simplex(const Objective& objective, std::vector<double> start,
                               const SimplexOptions& options);

} // namespace credit::detail
