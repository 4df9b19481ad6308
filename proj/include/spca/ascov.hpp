#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "spca/sampling.hpp"

namespace spca {

enum class AscovMethod { SpcaPlugin, PcaFormula };

/// Monte-Carlo plug-in estimate of a limiting covariance. For SpcaPlugin the
/// matrix is O(q1 e1 e1' + q2 (I - e1 e1')) O' by construction; for
/// PcaFormula q1 = 0 and q2 is the scalar coefficient of the projector.
struct AscovEstimate {
    double q1;
    double q2;
    Eigen::MatrixXd sigma_matrix;
    long mc_draws;
    double se_q1;  // batch-means standard errors (20 batches)
    double se_q2;
    double psi_used;
    AscovMethod method;
    /// Set when the radial law lacks the moments the formula needs
    /// (t with nu < 3 for the plug-in, nu < 5 for the PCA formula).
    bool nonfinite_moment;
};

/// Plug-in for the limiting covariance of the raw minimizer: estimates the
/// gradient/Hessian moments at v = psi o1 by Monte Carlo and assembles q1,
/// q2. Throws InvalidPsi unless psi > 0.
AscovEstimate ascov_spca(const EllipticalSpec& spec, double psi, long mc_draws,
                         std::uint64_t seed, int n_threads = 0);

/// Classical PCA limiting covariance: lambda^2/(lambda^2-1)^2 *
/// E(Z1^2 Z2^2)/E(Z1^2)^2 * O (I - e1 e1') O', with the Z-moments estimated
/// by Monte Carlo.
AscovEstimate ascov_pca(const EllipticalSpec& spec, long mc_draws, std::uint64_t seed,
                        int n_threads = 0);

/// Joint norm/direction blocks of a limiting covariance around h != 0.
struct NormDirectionSplit {
    double norm_var;         // h' S h / ||h||^2
    Eigen::MatrixXd dir_cov;  // Q S Q / ||h||^2 with Q = I - hh'/||h||^2
    Eigen::VectorXd cross;    // Q S h / ||h||^2
};

NormDirectionSplit split_norm_direction(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& h);

}  // namespace spca
