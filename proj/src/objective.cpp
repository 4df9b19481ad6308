#include "spca/objective.hpp"

#include <cmath>

#include "spca/linalg.hpp"

namespace spca {
namespace {

void check_dims(const Eigen::VectorXd& v, const DataSet& data) {
    if (v.size() != data.p())
        throw DimensionMismatch("vector length " + std::to_string(v.size()) +
                                " does not match data dimension " + std::to_string(data.p()));
}

// ||x - v|| ||x + v|| - ||x||^2 without the catastrophic cancellation of the
// literal form: the numerator uses the exact product identity
// ||x-v||^2 ||x+v||^2 = (||x||^2 + ||v||^2)^2 - 4 (x'v)^2.
double objective_term(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double v2) {
    const double x2 = x.squaredNorm();
    const double xv = x.dot(v);
    const double num = v2 * v2 + 2.0 * x2 * v2 - 4.0 * xv * xv;
    const double den = (x - v).norm() * (x + v).norm() + x2;
    if (den == 0.0) return 0.0;  // only when x = v = 0
    return num / den;
}

}  // namespace

std::optional<SamplePointRef> classify_sample_point(const Eigen::VectorXd& v, const DataSet& data,
                                                    double eta) {
    check_dims(v, data);
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double thresh = eta * (1.0 + data.rows().row(i).norm());
        if ((v.transpose() - data.rows().row(i)).norm() <= thresh) return SamplePointRef{i, +1};
        if ((v.transpose() + data.rows().row(i)).norm() <= thresh) return SamplePointRef{i, -1};
    }
    return std::nullopt;
}

double objective_value(const Eigen::VectorXd& v, const DataSet& data) {
    check_dims(v, data);
    const double v2 = v.squaredNorm();
    KahanSum acc;
    for (Eigen::Index i = 0; i < data.n(); ++i)
        acc.add(objective_term(data.rows().row(i).transpose(), v, v2));
    return acc.value() / static_cast<double>(data.n());
}

double nuclear_norm_rank2(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw DimensionMismatch("nuclear_norm_rank2: size mismatch");
    const double a2 = a.squaredNorm();
    const double b2 = b.squaredNorm();
    const double ab = a.dot(b);
    // phi_+ - phi_- for the two nonzero eigenvalues of aa' - bb'.
    const double rad = (a2 - b2) * (a2 - b2) - 4.0 * ab * ab + 4.0 * a2 * b2;
    return std::sqrt(std::max(rad, 0.0));
}

double objective_nuclear(const Eigen::VectorXd& v, const DataSet& data) {
    check_dims(v, data);
    KahanSum acc;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const Eigen::VectorXd x = data.row(i);
        acc.add(nuclear_norm_rank2(v, x) - x.squaredNorm());
    }
    return acc.value() / static_cast<double>(data.n());
}

Eigen::VectorXd gradient(const Eigen::VectorXd& v, const DataSet& data, double eta) {
    check_dims(v, data);
    if (auto hit = classify_sample_point(v, data, eta)) throw SamplePointHit(hit->index, hit->sign);
    KahanVec acc(data.p());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const Eigen::VectorXd x = data.row(i);
        const Eigen::VectorXd dm = v - x;
        const Eigen::VectorXd dp = v + x;
        const double nm = dm.norm();
        const double np = dp.norm();
        acc.add((np / nm) * dm + (nm / np) * dp);
    }
    return acc.value() / static_cast<double>(data.n());
}

SamplePointGradient sample_point_gradient(Eigen::Index k, int sign, const DataSet& data,
                                          double eta) {
    if (k < 0 || k >= data.n()) throw IndexOutOfRange("sample index out of range");
    if (sign != 1 && sign != -1) throw Error("sign must be +-1");
    const Eigen::VectorXd w = sign > 0 ? data.row(k) : Eigen::VectorXd(-data.row(k));

    KahanVec acc(data.p());
    int multiplicity = 0;
    for (Eigen::Index j = 0; j < data.n(); ++j) {
        const Eigen::VectorXd xj = data.row(j);
        const double guard = eta * (1.0 + xj.norm());
        if ((xj - w).norm() <= guard || (xj + w).norm() <= guard) {
            // Coincides with +-w (includes j = k); contributes only the
            // 2||X_k|| term folded into the clamp multiplicity.
            ++multiplicity;
            continue;
        }
        for (int s : {+1, -1}) {
            const Eigen::VectorXd y = s > 0 ? xj : Eigen::VectorXd(-xj);
            acc.add(((y + w).norm() / (y - w).norm()) * (y - w));
        }
    }
    return {acc.value(), multiplicity};
}

Eigen::VectorXd modified_gradient(Eigen::Index k, int sign, const DataSet& data, double eta) {
    const SamplePointGradient g = sample_point_gradient(k, sign, data, eta);
    const double gnorm = g.grad.norm();
    if (gnorm == 0.0) return Eigen::VectorXd::Zero(data.p());
    const double clamp =
        std::max(gnorm - 2.0 * g.multiplicity * data.rows().row(k).norm(), 0.0);
    return (clamp / gnorm) * g.grad;
}

Eigen::MatrixXd hessian(const Eigen::VectorXd& v, const DataSet& data, double eta) {
    check_dims(v, data);
    if (auto hit = classify_sample_point(v, data, eta)) throw SamplePointHit(hit->index, hit->sign);
    const Eigen::Index p = data.p();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const Eigen::VectorXd x = data.row(i);
        const Eigen::VectorXd dm = x - v;
        const Eigen::VectorXd dp = x + v;
        const double nm = dm.norm();
        const double np = dp.norm();
        acc += (np / nm) * (eye - dm * dm.transpose() / (nm * nm));
        acc += (nm / np) * (eye - dp * dp.transpose() / (np * np));
        acc -= (dm * dp.transpose() + dp * dm.transpose()) / (nm * np);
    }
    return acc / static_cast<double>(data.n());
}

SignCovariance sign_covariance(const DataSet& data) {
    const Eigen::Index p = data.p();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p, p);
    Eigen::Index m = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const Eigen::VectorXd x = data.row(i);
        const double x2 = x.squaredNorm();
        if (x2 == 0.0) continue;  // the population integrand is undefined at 0
        s += x * x.transpose() / x2;
        ++m;
    }
    if (m == 0) throw AllZeroData();
    s /= static_cast<double>(m);
    const EigenSym es = jacobi_eigensymm(s);
    return {std::move(s), es.values[0]};
}

}  // namespace spca
