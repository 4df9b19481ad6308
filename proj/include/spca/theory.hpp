#pragma once

#include <vector>

namespace spca {

enum class TauMethod { ClosedForm2, ClosedForm3, ClosedForm4, Quadrature };

/// Leading eigenvalue tau of the spatial sign covariance under the spiked
/// elliptical model, together with the (p-1)-fold tail eigenvalue.
struct TauResult {
    double lambda;
    int p;
    double tau;
    double tau0;  // (1 - tau) / (p - 1)
    TauMethod method;
    double abs_err_estimate;
};

/// tau(lambda, p) by adaptive quadrature of the sign-covariance integral,
/// compactified to the unit interval. Valid for any lambda > 0, p >= 2.
TauResult tau_quadrature(double lambda, int p);

/// Closed forms for p in {2, 3, 4}; the p = 3 expression bridges its
/// removable singularity at lambda = 1 with a short series.
TauResult tau_closed(double lambda, int p);

/// Dispatch: closed form when p <= 4, quadrature otherwise.
TauResult tau(double lambda, int p);

/// Unique root of lambda -> tau(lambda, p) - 1/2. Equals 1 at p = 2 and
/// grows like sqrt(p).
double lambda_star(int p);

/// The constant C with tau(C sqrt(p), p) -> 1/2 as p grows; approximately
/// 1.633978435.
double threshold_constant();

struct TauScalingRow {
    int p;
    double p_tau;   // p * tau(lambda, p)   -> lambda^2
    double p_tau0;  // p * tau0(lambda, p)  -> 1
};

std::vector<TauScalingRow> tau_scaling_checks(double lambda, const std::vector<int>& p_list);

enum class RadialLaw { GaussianChi };

/// Norm psi of the population minimizer under the Gaussian radial law;
/// zero exactly in the non-identifiable regime tau <= 1/2.
struct PopulationNorm {
    double lambda;
    int p;
    double sigma;
    double psi;
    RadialLaw radial;
};

PopulationNorm population_norm(double lambda, int p, double sigma);

/// Restriction h(t) of the population objective to the spiked ray,
/// parameterized by t = ||v||^2 (sigma = 1, Gaussian radial law).
double population_objective_h(double t, double lambda, int p);

/// Derivative h'(t); h'(0) = 1 - 2 tau(lambda, p).
double population_objective_h_derivative(double t, double lambda, int p);

}  // namespace spca
