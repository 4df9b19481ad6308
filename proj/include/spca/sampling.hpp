#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "spca/dataset.hpp"

namespace spca {

/// SplitMix64 stream. Chosen over std engines for bit-stable output across
/// platforms and for cheap seed derivation per replicate.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform on the open interval (0, 1).
    double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    /// Standard normal through the inverse CDF; monotone in the underlying
    /// uniform, hence reproducible to the last bit everywhere.
    double normal() noexcept;

private:
    std::uint64_t state_;
};

/// Stream seed for replicate r of a study keyed by `seed`; order-independent
/// so replicates can run on any schedule.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Inverse standard normal CDF (rational approximation plus one Halley
/// refinement); u must lie in (0, 1).
double standard_normal_icdf(double u) noexcept;

struct Radial {
    enum Kind { Gaussian, StudentT } kind = Gaussian;
    int nu = 0;  // degrees of freedom, StudentT only
};

/// The spiked elliptical model X = O Lambda Z with Lambda = sigma diag(lambda, 1, ..., 1).
struct EllipticalSpec {
    int p;
    Eigen::MatrixXd O;
    double lambda;
    double sigma;
    Radial radial;

    EllipticalSpec(int p_, Eigen::MatrixXd O_, double lambda_, double sigma_, Radial radial_);

    static EllipticalSpec gaussian(int p, double lambda, double sigma = 1.0);
    static EllipticalSpec gaussian(int p, Eigen::MatrixXd O, double lambda, double sigma = 1.0);
    static EllipticalSpec student_t(int p, double lambda, double sigma, int nu);
    static EllipticalSpec student_t(int p, Eigen::MatrixXd O, double lambda, double sigma, int nu);
};

DataSet sample_elliptical(const EllipticalSpec& spec, Eigen::Index n, std::uint64_t seed);

/// Draws from the spherical base law Z alone (lambda = sigma = 1, O = I).
DataSet sample_spherical(Radial radial, int p, Eigen::Index n, std::uint64_t seed);

/// Three-variate independent-margin models with population covariance
/// diag(theta^2, second_sd^2, 1).
struct MarginSpec {
    enum Model { Normal, Uniform, Bernoulli } model = Normal;
    double theta = 1.0;
    double second_sd = 1.0;

    MarginSpec(Model m, double theta_, double second_sd_ = 1.0);
};

DataSet sample_margins(const MarginSpec& spec, Eigen::Index n, std::uint64_t seed);

/// Deterministic orthogonal matrix: QR of a seeded Gaussian matrix with the
/// R-diagonal sign fixed.
Eigen::MatrixXd random_orthogonal(int p, std::uint64_t seed);

}  // namespace spca
