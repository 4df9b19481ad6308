#include "spca/ascov.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "spca/linalg.hpp"

namespace spca {
namespace {

constexpr int kBatches = 20;

struct BatchPlan {
    std::vector<long> sizes;
    long total;
};

BatchPlan plan_batches(long mc_draws) {
    if (mc_draws < 1) throw Error("mc_draws must be at least 1");
    const int b = static_cast<int>(std::min<long>(kBatches, mc_draws));
    BatchPlan plan{std::vector<long>(b, mc_draws / b), mc_draws};
    for (long r = 0; r < mc_draws % b; ++r) ++plan.sizes[static_cast<std::size_t>(r)];
    return plan;
}

double batch_se(const std::vector<double>& values) {
    const auto b = static_cast<double>(values.size());
    if (values.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= b;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= (b - 1.0);
    return std::sqrt(var / b);
}

// Per-batch moment estimates with v = psi o1; tail quantities are averaged
// over all p-1 tail directions of O to cut the Monte-Carlo variance.
struct SpcaMoments {
    double a1 = 0, a2 = 0, b2 = 0, a4 = 0, b4 = 0, c1 = 0, d1 = 0, s1 = 0, s2 = 0;

    double denom1() const { return a1 - 2.0 * a2 + 2.0 * a4; }
    double denom2() const { return a1 - 2.0 * b2 + 2.0 * b4; }
    double q1(double psi) const {
        return 2.0 * (c1 - s1 + psi * psi) / (denom1() * denom1());
    }
    double q2() const { return 2.0 * (d1 - s2) / (denom2() * denom2()); }
};

SpcaMoments spca_batch(const EllipticalSpec& spec, double psi, long draws, std::uint64_t seed) {
    const int p = spec.p;
    const Eigen::VectorXd o1 = spec.O.col(0);
    const Eigen::VectorXd v = psi * o1;
    const DataSet xs = sample_elliptical(spec, draws, seed);

    KahanSum a1, a2, b2, a4, b4, c1, d1, s1, s2;
    Eigen::VectorXd x(p), dm(p), dp(p), dm_o(p), dp_o(p), x_o(p);
    for (Eigen::Index i = 0; i < xs.n(); ++i) {
        x = xs.row(i).transpose();
        dm = v - x;
        dp = v + x;
        const double nm = dm.norm();
        const double np_ = dp.norm();
        const double ratio = np_ / nm;

        a1.add(ratio + 1.0 / ratio);

        // coordinates of the draw in the model's eigenbasis
        dm_o.noalias() = spec.O.transpose() * dm;
        dp_o.noalias() = spec.O.transpose() * dp;
        x_o.noalias() = spec.O.transpose() * x;

        a2.add(np_ / (nm * nm * nm) * dm_o[0] * dm_o[0]);
        a4.add(dp_o[0] * dm_o[0] / (np_ * nm));
        c1.add(ratio * ratio * dm_o[0] * dm_o[0]);
        s1.add(x_o[0] * x_o[0]);

        const double tails = static_cast<double>(p - 1);
        const double tail_m2 = dm_o.tail(p - 1).squaredNorm();
        b2.add(np_ / (nm * nm * nm) * tail_m2 / tails);
        b4.add(dp_o.tail(p - 1).dot(dm_o.tail(p - 1)) / (np_ * nm) / tails);
        d1.add(ratio * ratio * tail_m2 / tails);
        s2.add(x_o.tail(p - 1).squaredNorm() / tails);
    }
    const double inv = 1.0 / static_cast<double>(draws);
    SpcaMoments m;
    m.a1 = a1.value() * inv;
    m.a2 = a2.value() * inv;
    m.b2 = b2.value() * inv;
    m.a4 = a4.value() * inv;
    m.b4 = b4.value() * inv;
    m.c1 = c1.value() * inv;
    m.d1 = d1.value() * inv;
    m.s1 = s1.value() * inv;
    m.s2 = s2.value() * inv;
    return m;
}

Eigen::MatrixXd spiked_matrix(const Eigen::MatrixXd& o, double lead, double tail) {
    const Eigen::Index p = o.rows();
    const Eigen::VectorXd o1 = o.col(0);
    const Eigen::MatrixXd proj = o1 * o1.transpose();
    return lead * proj + tail * (Eigen::MatrixXd::Identity(p, p) - proj);
}

}  // namespace

AscovEstimate ascov_spca(const EllipticalSpec& spec, double psi, long mc_draws,
                         std::uint64_t seed, int n_threads) {
    if (!(psi > 0.0)) throw InvalidPsi("ascov_spca requires psi > 0");
    const BatchPlan plan = plan_batches(mc_draws);
    const auto b = static_cast<std::int64_t>(plan.sizes.size());
    std::vector<SpcaMoments> batches(static_cast<std::size_t>(b));
    parallel_for(
        b,
        [&](std::int64_t i) {
            batches[static_cast<std::size_t>(i)] =
                spca_batch(spec, psi, plan.sizes[static_cast<std::size_t>(i)],
                           derive_seed(seed, static_cast<std::uint64_t>(i)));
        },
        n_threads);

    SpcaMoments pooled;
    std::vector<double> q1s, q2s;
    q1s.reserve(batches.size());
    q2s.reserve(batches.size());
    for (std::size_t i = 0; i < batches.size(); ++i) {
        const double w = static_cast<double>(plan.sizes[i]) / static_cast<double>(plan.total);
        const SpcaMoments& m = batches[i];
        pooled.a1 += w * m.a1;
        pooled.a2 += w * m.a2;
        pooled.b2 += w * m.b2;
        pooled.a4 += w * m.a4;
        pooled.b4 += w * m.b4;
        pooled.c1 += w * m.c1;
        pooled.d1 += w * m.d1;
        pooled.s1 += w * m.s1;
        pooled.s2 += w * m.s2;
        q1s.push_back(m.q1(psi));
        q2s.push_back(m.q2());
    }

    AscovEstimate est;
    est.q1 = pooled.q1(psi);
    est.q2 = pooled.q2();
    est.sigma_matrix = spiked_matrix(spec.O, est.q1, est.q2);
    est.mc_draws = plan.total;
    est.se_q1 = batch_se(q1s);
    est.se_q2 = batch_se(q2s);
    est.psi_used = psi;
    est.method = AscovMethod::SpcaPlugin;
    est.nonfinite_moment = spec.radial.kind == Radial::StudentT && spec.radial.nu < 3;
    return est;
}

AscovEstimate ascov_pca(const EllipticalSpec& spec, long mc_draws, std::uint64_t seed,
                        int n_threads) {
    const BatchPlan plan = plan_batches(mc_draws);
    const auto b = static_cast<std::int64_t>(plan.sizes.size());
    const int p = spec.p;
    struct PcaBatch {
        double m2 = 0;   // E(Z1^2), symmetrized over coordinates
        double m22 = 0;  // E(Z1^2 Z2^2), symmetrized over pairs
    };
    std::vector<PcaBatch> batches(static_cast<std::size_t>(b));
    parallel_for(
        b,
        [&](std::int64_t i) {
            const long draws = plan.sizes[static_cast<std::size_t>(i)];
            const DataSet zs = sample_spherical(spec.radial, p, draws,
                                                derive_seed(seed, 0x9CA0000u + static_cast<std::uint64_t>(i)));
            KahanSum m2, m22;
            for (Eigen::Index r = 0; r < zs.n(); ++r) {
                const Eigen::VectorXd z = zs.row(r);
                const Eigen::ArrayXd z2 = z.array().square();
                const double sum2 = z2.sum();
                const double sum4 = z2.square().sum();
                m2.add(sum2 / p);
                // sum over ordered pairs i != j of z_i^2 z_j^2
                m22.add((sum2 * sum2 - sum4) / (static_cast<double>(p) * (p - 1)));
            }
            batches[static_cast<std::size_t>(i)] = {m2.value() / draws, m22.value() / draws};
        },
        n_threads);

    const double lam2 = spec.lambda * spec.lambda;
    const double factor = lam2 / ((lam2 - 1.0) * (lam2 - 1.0));
    double m2 = 0, m22 = 0;
    std::vector<double> coeffs;
    coeffs.reserve(batches.size());
    for (std::size_t i = 0; i < batches.size(); ++i) {
        const double w = static_cast<double>(plan.sizes[i]) / static_cast<double>(plan.total);
        m2 += w * batches[i].m2;
        m22 += w * batches[i].m22;
        coeffs.push_back(factor * batches[i].m22 / (batches[i].m2 * batches[i].m2));
    }
    const double coeff = factor * m22 / (m2 * m2);

    AscovEstimate est;
    est.q1 = 0.0;
    est.q2 = coeff;
    est.sigma_matrix = spiked_matrix(spec.O, 0.0, coeff);
    est.mc_draws = plan.total;
    est.se_q1 = 0.0;
    est.se_q2 = batch_se(coeffs);
    est.psi_used = 0.0;
    est.method = AscovMethod::PcaFormula;
    est.nonfinite_moment = spec.radial.kind == Radial::StudentT && spec.radial.nu < 5;
    return est;
}

NormDirectionSplit split_norm_direction(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& h) {
    if (sigma.rows() != sigma.cols() || sigma.rows() != h.size())
        throw DimensionMismatch("split_norm_direction: dimension mismatch");
    const double h2 = h.squaredNorm();
    if (h2 == 0.0) throw ZeroVector();
    const Eigen::MatrixXd q =
        Eigen::MatrixXd::Identity(h.size(), h.size()) - h * h.transpose() / h2;
    NormDirectionSplit out;
    out.norm_var = h.dot(sigma * h) / h2;
    out.dir_cov = q * sigma * q / h2;
    out.cross = q * sigma * h / h2;
    return out;
}

}  // namespace spca
