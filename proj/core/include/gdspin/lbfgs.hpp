#pragma once

// Limited-memory BFGS with a strong-Wolfe line search.

#include <functional>
#include <span>
#include <vector>

namespace gdspin {

struct LbfgsParams {
    int memory = 10;            ///< number of stored (s, y) pairs
    int max_iters = 10000;
    double grad_tol = 1e-9;     ///< stop when max_i |g_i| <= grad_tol
    double c1 = 1e-4;           ///< sufficient decrease constant
    double c2 = 0.9;            ///< curvature constant
    int max_line_search = 40;   ///< function evaluations per line search

    /// Throws std::invalid_argument unless 0 < c1 < c2 < 1 and memory >= 1.
    void validate() const;
};

enum class LbfgsStatus { converged, max_iterations, line_search_failed };

/// Objective callback: returns f(x) and writes the gradient into grad.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LbfgsOutcome {
    std::vector<double> x;
    double f = 0.0;
    std::vector<double> grad;
    int iterations = 0;
    int evaluations = 0;
    LbfgsStatus status = LbfgsStatus::converged;
    /// f after each accepted iteration, starting with f(x0).
    std::vector<double> history;
};

LbfgsOutcome minimize_lbfgs(const Objective& objective, std::vector<double> x0,
                            const LbfgsParams& params);

/// Directional function phi(alpha) = f(x + alpha d); returns (phi, phi').
using LineFunction = std::function<std::pair<double, double>(double alpha)>;

struct LineSearchResult {
    bool ok = false;    ///< strong Wolfe conditions hold at alpha
    double alpha = 0.0; ///< accepted step, or the best decreasing step found
    double f = 0.0;
    double dg = 0.0;
    int evaluations = 0;
};

/// Bracketing and zoom search for a step satisfying the strong Wolfe
/// conditions phi(a) <= phi(0) + c1 a phi'(0) and |phi'(a)| <= c2 |phi'(0)|.
/// Requires phi'(0) < 0.
LineSearchResult line_search_strong_wolfe(const LineFunction& phi, double f0, double dg0,
                                          double alpha0, double c1, double c2, int max_evals);

} // namespace gdspin
