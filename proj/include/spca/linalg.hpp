#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace spca {

/// Kahan-Babuska-Neumaier compensated accumulator. Used for the long data
/// reductions so that symmetry identities survive n up to 1e6 terms.
class KahanSum {
public:
    void add(double x) noexcept {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Per-coordinate compensated accumulator for vector reductions.
class KahanVec {
public:
    explicit KahanVec(Eigen::Index dim) : acc_(static_cast<std::size_t>(dim)) {}
    void add(const Eigen::VectorXd& x) {
        for (Eigen::Index i = 0; i < x.size(); ++i) acc_[static_cast<std::size_t>(i)].add(x[i]);
    }
    Eigen::VectorXd value() const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(acc_.size()));
        for (std::size_t i = 0; i < acc_.size(); ++i) out[static_cast<Eigen::Index>(i)] = acc_[i].value();
        return out;
    }

private:
    std::vector<KahanSum> acc_;
};

/// Compensated sum of a term vector.
double kahan_sum(const Eigen::ArrayXd& terms);

struct EigenSym {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // orthonormal columns, vectors.col(k) <-> values[k]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Meant for the
/// small dense problems in this library (p up to a few hundred).
EigenSym jacobi_eigensymm(Eigen::MatrixXd a, int max_sweeps = 64);

/// Largest absolute eigenvalue of a symmetric matrix.
double spectral_norm_symm(const Eigen::MatrixXd& a);

/// Lower empirical quantile: smallest order statistic with ecdf >= q.
double lower_quantile(std::vector<double> values, double q);

/// Flips v (in place) so that its largest-magnitude coordinate is positive;
/// ties broken by the first such coordinate.
void normalize_sign(Eigen::VectorXd& v);

/// Runs fn(i) for i in [0, count) on up to n_threads workers. Falls back to
/// the calling thread when count or n_threads is small. fn must be safe to
/// call concurrently for distinct i.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t)>& fn, int n_threads);

/// Worker count: explicit argument if > 0, otherwise the THREADS environment
/// variable, otherwise hardware concurrency.
int resolve_threads(int requested);

}  // namespace spca
