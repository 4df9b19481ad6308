#include "spca/sampling.hpp"

#include <cmath>

namespace spca {
namespace {

constexpr double kSqrt2Pi = 2.50662827463100050242;

double icdf_rational(double u) noexcept {
    // Acklam's rational approximation, relative error below 1.15e-9.
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (u < p_low) {
        const double q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - u));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = u - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

double standard_normal_icdf(double u) noexcept {
    double x = icdf_rational(u);
    // One Halley step against the exact CDF brings the result to roundoff.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - u;
    const double adj = e * kSqrt2Pi * std::exp(0.5 * x * x);
    return x - adj / (1.0 + 0.5 * x * adj);
}

double Rng::normal() noexcept { return standard_normal_icdf(uniform01()); }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15ull));
}

EllipticalSpec::EllipticalSpec(int p_, Eigen::MatrixXd O_, double lambda_, double sigma_,
                               Radial radial_)
    : p(p_), O(std::move(O_)), lambda(lambda_), sigma(sigma_), radial(radial_) {
    if (p < 2) throw UnsupportedDim("EllipticalSpec requires p >= 2");
    if (!(lambda > 1.0)) throw Error("EllipticalSpec requires lambda > 1");
    if (!(sigma > 0.0)) throw Error("EllipticalSpec requires sigma > 0");
    if (O.rows() != p || O.cols() != p) throw DimensionMismatch("O must be p x p");
    const double dev =
        (O.transpose() * O - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
    if (dev > 1e-10) throw Error("O is not orthogonal (deviation " + std::to_string(dev) + ")");
    if (radial.kind == Radial::StudentT && radial.nu < 1)
        throw Error("StudentT radial law requires nu >= 1");
}

EllipticalSpec EllipticalSpec::gaussian(int p, double lambda, double sigma) {
    return {p, Eigen::MatrixXd::Identity(p, p), lambda, sigma, Radial{Radial::Gaussian, 0}};
}

EllipticalSpec EllipticalSpec::gaussian(int p, Eigen::MatrixXd O, double lambda, double sigma) {
    return {p, std::move(O), lambda, sigma, Radial{Radial::Gaussian, 0}};
}

EllipticalSpec EllipticalSpec::student_t(int p, double lambda, double sigma, int nu) {
    return {p, Eigen::MatrixXd::Identity(p, p), lambda, sigma, Radial{Radial::StudentT, nu}};
}

EllipticalSpec EllipticalSpec::student_t(int p, Eigen::MatrixXd O, double lambda, double sigma,
                                         int nu) {
    return {p, std::move(O), lambda, sigma, Radial{Radial::StudentT, nu}};
}

DataSet sample_elliptical(const EllipticalSpec& spec, Eigen::Index n, std::uint64_t seed) {
    if (n < 1) throw Error("sample size must be at least 1");
    Rng rng(seed);
    const bool identity = spec.O.isIdentity(0.0);
    Eigen::MatrixXd rows(n, spec.p);
    Eigen::VectorXd z(spec.p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < spec.p; ++j) z[j] = rng.normal();
        if (spec.radial.kind == Radial::StudentT) {
            // chi^2_nu as a sum of squared normals keeps the draw order fixed.
            double chi2 = 0.0;
            for (int j = 0; j < spec.radial.nu; ++j) {
                const double g = rng.normal();
                chi2 += g * g;
            }
            z *= std::sqrt(static_cast<double>(spec.radial.nu) / chi2);
        }
        z[0] *= spec.lambda;
        z *= spec.sigma;
        if (identity) {
            rows.row(i) = z.transpose();
        } else {
            rows.row(i) = (spec.O * z).transpose();
        }
    }
    return DataSet(std::move(rows));
}

DataSet sample_spherical(Radial radial, int p, Eigen::Index n, std::uint64_t seed) {
    if (n < 1) throw Error("sample size must be at least 1");
    if (p < 1) throw UnsupportedDim("sample_spherical requires p >= 1");
    if (radial.kind == Radial::StudentT && radial.nu < 1)
        throw Error("StudentT radial law requires nu >= 1");
    Rng rng(seed);
    Eigen::MatrixXd rows(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) rows(i, j) = rng.normal();
        if (radial.kind == Radial::StudentT) {
            double chi2 = 0.0;
            for (int j = 0; j < radial.nu; ++j) {
                const double g = rng.normal();
                chi2 += g * g;
            }
            rows.row(i) *= std::sqrt(static_cast<double>(radial.nu) / chi2);
        }
    }
    return DataSet(std::move(rows));
}

MarginSpec::MarginSpec(Model m, double theta_, double second_sd_)
    : model(m), theta(theta_), second_sd(second_sd_) {
    if (!(theta >= 1.0)) throw Error("MarginSpec requires theta >= 1");
    if (!(second_sd > 0.0)) throw Error("MarginSpec requires second_sd > 0");
}

DataSet sample_margins(const MarginSpec& spec, Eigen::Index n, std::uint64_t seed) {
    if (n < 1) throw Error("sample size must be at least 1");
    Rng rng(seed);
    const double sds[3] = {spec.theta, spec.second_sd, 1.0};
    Eigen::MatrixXd rows(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) {
            switch (spec.model) {
                case MarginSpec::Normal:
                    rows(i, j) = sds[j] * rng.normal();
                    break;
                case MarginSpec::Uniform: {
                    // Uniform on [-a, a] with a = sd * sqrt(3) has variance sd^2.
                    const double a = sds[j] * std::sqrt(3.0);
                    rows(i, j) = a * (2.0 * rng.uniform01() - 1.0);
                    break;
                }
                case MarginSpec::Bernoulli:
                    rows(i, j) = rng.uniform01() < 0.5 ? -sds[j] : sds[j];
                    break;
            }
        }
    }
    return DataSet(std::move(rows));
}

Eigen::MatrixXd random_orthogonal(int p, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd g(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) g(i, j) = rng.normal();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < p; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

}  // namespace spca
