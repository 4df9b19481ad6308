#pragma once

#include <Eigen/Dense>
#include <optional>

#include "spca/dataset.hpp"

namespace spca {

/// Relative tolerance of the sample-point classifier: v counts as +-X_i
/// when ||v -+ X_i|| <= eta * (1 + ||X_i||).
inline constexpr double kSamplePointTol = 1e-9;

struct SamplePointRef {
    Eigen::Index index;
    int sign;  // +1 for X_i, -1 for -X_i
};

/// Returns the first sample point (scanning i ascending, + before -) that v
/// coincides with, or nullopt when v is a regular point.
std::optional<SamplePointRef> classify_sample_point(const Eigen::VectorXd& v, const DataSet& data,
                                                    double eta = kSamplePointTol);

/// Mean of ||X_i - v|| ||X_i + v|| - ||X_i||^2. Computed through a
/// cancellation-free rational form with compensated summation, so the
/// evenness and |f| <= ||v||^2 bounds hold at any data scale.
double objective_value(const Eigen::VectorXd& v, const DataSet& data);

/// ||aa' - bb'||_* via the closed-form nonzero eigenvalues of the rank-two
/// difference; equals ||a - b|| ||a + b||.
double nuclear_norm_rank2(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Same objective evaluated through the nuclear-norm route; agrees with
/// objective_value to roundoff.
double objective_nuclear(const Eigen::VectorXd& v, const DataSet& data);

/// Gradient of the sample objective at a regular point. Throws
/// SamplePointHit when v is within eta of some +-X_i.
Eigen::VectorXd gradient(const Eigen::VectorXd& v, const DataSet& data,
                         double eta = kSamplePointTol);

struct SamplePointGradient {
    Eigen::VectorXd grad;  // sum over the 2n signed points, own/coincident terms excluded
    int multiplicity;      // data points coinciding with +-query (at least 1: the query itself)
};

/// The one-sided gradient sum at the sample point sign*X_k: terms
/// (||y + w|| / ||y - w||)(y - w) over y in {+-X_i} excluding points that
/// coincide with +-w. Duplicated observations fold into the multiplicity.
SamplePointGradient sample_point_gradient(Eigen::Index k, int sign, const DataSet& data,
                                          double eta = kSamplePointTol);

/// Clamped steepest-descent vector at a sample point:
/// max{||grad_k|| - 2 m ||X_k||, 0} * grad_k / ||grad_k||, zero when grad_k = 0.
Eigen::VectorXd modified_gradient(Eigen::Index k, int sign, const DataSet& data,
                                  double eta = kSamplePointTol);

/// Hessian of the sample objective at a regular point.
Eigen::MatrixXd hessian(const Eigen::VectorXd& v, const DataSet& data,
                        double eta = kSamplePointTol);

struct SignCovariance {
    Eigen::MatrixXd matrix;  // p x p, symmetric PSD, unit trace
    double leading_eig;      // in [1/p, 1]
};

/// Spatial sign covariance mean(X_i X_i' / ||X_i||^2) over the nonzero rows.
SignCovariance sign_covariance(const DataSet& data);

}  // namespace spca
