#pragma once

#include <functional>

namespace spca {

struct QuadratureOptions {
    double interval_tol = 1e-13;  // per-interval acceptance threshold
    double global_tol = 1e-10;    // cap on the accumulated error estimate
    int max_depth = 52;
    int initial_panels = 8;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_err_estimate = 0.0;
    long evaluations = 0;
};

/// Adaptive Simpson integration of f over [a, b]. Throws
/// QuadratureNonConvergence when the accumulated error estimate misses the
/// global target even at full recursion depth.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureOptions& opt = {});

}  // namespace spca
