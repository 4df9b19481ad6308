#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "spca/dataset.hpp"
#include "spca/objective.hpp"

namespace spca {

struct SolverConfig {
    /// Objective-decrease stopping threshold; 0 selects
    /// 1e-12 * max(1, |f(init)|).
    double delta = 0.0;
    int max_iter = 10000;
    double sample_point_tol = kSamplePointTol;
    /// Multiplicative shrink of the escape-step candidate epsilon.
    double epsilon_shrink = 0.5;
    int max_backtrack = 200;
    /// Record the objective value after every iteration.
    bool record_trace = false;
};

enum class SolverStatus { Converged, MaxIterReached };

/// Data-driven bound: every minimizer of the sample objective lies in the
/// centered ball of radius H + 1/2.
struct RadiusBound {
    double R0;           // 0.75-quantile of the observation norms
    double H;            // one plus the largest root of the bounding parabola
    double coefficient;  // 2 P_n{||X|| <= R0} - 1, at least 1/2
};

struct SolverResult {
    Eigen::VectorXd v;
    double objective;
    int iterations;
    SolverStatus status;
    int escape_steps_taken;
    double norm;
    /// Unit direction; absent when the fit collapsed to the origin.
    std::optional<Eigen::VectorXd> direction;
    /// Artificial error resets (escape steps with a move); at most n.
    int step12_resets;
    /// Length polishing was skipped because the iterate converged onto a
    /// sample point or a sample direction.
    bool polish_skipped;
    RadiusBound radius;
    /// Objective after each iteration (index 0 = initial value) when
    /// SolverConfig::record_trace is set.
    std::vector<double> trace;
};

/// Step scale L(v) >= 2; excludes the coincident terms when v sits on a
/// sample point. Throws UndefinedScale when every term is excluded.
double step_scale(const Eigen::VectorXd& v, const DataSet& data, double eta = kSamplePointTol);

/// One Weiszfeld update T(v), equal to v - gradient(v) / L(v).
Eigen::VectorXd weiszfeld_step(const Eigen::VectorXd& v, const DataSet& data,
                               double eta = kSamplePointTol);

/// Escape update at the sample point sign*X_k: identity when the point is
/// stationary, otherwise a backtracked move along the clamped descent
/// direction. Throws BacktrackExhausted if no strict decrease is found.
Eigen::VectorXd escape_step(Eigen::Index k, int sign, const DataSet& data,
                            const SolverConfig& cfg = {});

RadiusBound radius_bound(const DataSet& data);

/// Minimizes f along the ray {lambda * u : lambda >= 0} using golden-section
/// search in the convex variable t = lambda^2; returns the optimal lambda.
double ray_line_search(const Eigen::VectorXd& u, const DataSet& data,
                       double eta = kSamplePointTol);

struct EigenPair {
    Eigen::VectorXd vector;  // unit length, sign-normalized
    double value;
};

/// Leading eigenpair of the centered sample covariance (cyclic Jacobi).
EigenPair pca_leading(const DataSet& data);

/// Full iterative minimization: Weiszfeld steps at regular points, escape
/// steps at sample points, then a final ray polish of the length.
SolverResult solve(const DataSet& data, const SolverConfig& cfg = {},
                   const std::optional<Eigen::VectorXd>& init = std::nullopt);

}  // namespace spca
