#include "spca/solver.hpp"

#include <cmath>
#include <vector>

#include "spca/linalg.hpp"

namespace spca {
namespace {

/// Vectorized per-candidate quantities shared by the iteration loop. The
/// norms ||v -+ x_i|| are accumulated from explicit coordinate differences,
/// which stays accurate arbitrarily close to the sample points.
struct Workspace {
    const Eigen::MatrixXd& X;
    Eigen::Index n, p;
    Eigen::ArrayXd row_sq, row_norm, thresh;
    Eigen::ArrayXd nm2, np2, nm, np_, s;
    double v2 = 0.0;

    Workspace(const DataSet& d, double eta)
        : X(d.rows()), n(d.n()), p(d.p()), nm2(d.n()), np2(d.n()) {
        row_sq = X.rowwise().squaredNorm().array();
        row_norm = row_sq.sqrt();
        thresh = eta * (1.0 + row_norm);
    }

    void at(const Eigen::VectorXd& v) {
        v2 = v.squaredNorm();
        nm2.setZero();
        np2.setZero();
        for (Eigen::Index j = 0; j < p; ++j) {
            const auto col = X.col(j).array();
            nm2 += (col - v[j]).square();
            np2 += (col + v[j]).square();
        }
        nm = nm2.sqrt();
        np_ = np2.sqrt();
        s = (X * v).array();
    }

    std::optional<SamplePointRef> classify() const {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (nm[i] <= thresh[i]) return SamplePointRef{i, +1};
            if (np_[i] <= thresh[i]) return SamplePointRef{i, -1};
        }
        return std::nullopt;
    }

    double objective() const {
        const Eigen::ArrayXd den = nm * np_ + row_sq;
        const Eigen::ArrayXd num = v2 * v2 + 2.0 * row_sq * v2 - 4.0 * s.square();
        const Eigen::ArrayXd terms = (den > 0.0).select(num / den, 0.0);
        return kahan_sum(terms) / static_cast<double>(n);
    }

    double objective_at(const Eigen::VectorXd& v) {
        at(v);
        return objective();
    }

    /// L(v); coincident terms are excluded so the scale stays defined on
    /// sample points (duplicated observations excluded alongside).
    double scale() const {
        KahanSum acc;
        Eigen::Index excluded = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (nm[i] <= thresh[i] || np_[i] <= thresh[i]) {
                ++excluded;
                continue;
            }
            acc.add((nm2[i] + np2[i]) / (nm[i] * np_[i]));
        }
        if (excluded == n) throw UndefinedScale();
        return acc.value() / static_cast<double>(n);
    }

    /// T(v) for a regular point. The coefficient uses the exact identity
    /// ||v+x||^2 - ||v-x||^2 = 4 x'v.
    Eigen::VectorXd weiszfeld() const {
        const double L = scale();
        const Eigen::ArrayXd c = 4.0 * s / (nm * np_);
        return (X.transpose() * c.matrix()) / (L * static_cast<double>(n));
    }
};

Eigen::VectorXd signed_row(const DataSet& data, Eigen::Index k, int sign) {
    return sign > 0 ? Eigen::VectorXd(data.row(k)) : Eigen::VectorXd(-data.row(k));
}

double max_escape_radius(const Workspace& ws) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < ws.n; ++i)
        if (ws.row_norm[i] > 0.0) m = std::max(m, 2.0 * ws.row_norm[i]);
    return m;
}

struct EscapeOutcome {
    Eigen::VectorXd v;
    double objective;
    bool moved;
};

/// Backtracked move away from a non-stationary sample point; assumes the
/// clamp ||grad|| - 2 m ||X_k|| > 0 was already checked. The candidate must
/// descend below f_ref, which callers cap at the current iterate's value so
/// the classifier's snap-to-sample-point tolerance cannot move uphill.
EscapeOutcome escape_from(const Eigen::VectorXd& w, const Eigen::VectorXd& grad, double f_ref,
                          Workspace& ws, const SolverConfig& cfg) {
    const double m = max_escape_radius(ws);
    if (m == 0.0) throw AllZeroData();
    const Eigen::VectorXd d = -grad.normalized();
    double eps = 0.5 * m;
    for (int trial = 0; trial < cfg.max_backtrack; ++trial) {
        const Eigen::VectorXd cand = w - eps * d;
        const double f = ws.objective_at(cand);
        if (f < f_ref) return {cand, f, true};
        eps *= cfg.epsilon_shrink;
    }
    throw BacktrackExhausted();
}

double golden_section_ray(Workspace& ws, const Eigen::VectorXd& u, double t_hi) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = 0.0, b = t_hi;
    const auto eval = [&](double t) { return ws.objective_at(std::sqrt(t) * u); };
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = eval(x1);
    double f2 = eval(x2);
    const double tol = 1e-12 * (1.0 + t_hi);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = eval(x2);
        }
    }
    const double t_mid = 0.5 * (a + b);
    // f vanishes at t = 0 exactly, so a nonnegative ray minimum means the
    // boundary wins over any interior point the tolerance can resolve.
    if (eval(t_mid) >= 0.0) return 0.0;
    return t_mid;
}

bool direction_at_sample_point(const Eigen::VectorXd& u, const Workspace& ws, double eta) {
    for (Eigen::Index i = 0; i < ws.n; ++i) {
        if (ws.row_norm[i] == 0.0) continue;
        const Eigen::VectorXd xhat = ws.X.row(i).transpose() / ws.row_norm[i];
        if ((u - xhat).norm() <= 2.0 * eta || (u + xhat).norm() <= 2.0 * eta) return true;
    }
    return false;
}

Eigen::VectorXd initial_direction(const DataSet& data) {
    if (data.n() >= 2) {
        try {
            return pca_leading(data).vector;
        } catch (const DegenerateData&) {
            // fall through to the marginal-variance fallback
        }
    }
    const Eigen::RowVectorXd mean = data.rows().colwise().mean();
    Eigen::Index best = 0;
    double best_var = -1.0;
    for (Eigen::Index j = 0; j < data.p(); ++j) {
        const double var = (data.rows().col(j).array() - mean[j]).square().sum();
        if (var > best_var) {
            best_var = var;
            best = j;
        }
    }
    if (best_var > 0.0) return Eigen::VectorXd::Unit(data.p(), best);
    // All rows identical: point the init along the repeated observation.
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double norm = data.rows().row(i).norm();
        if (norm > 0.0) return data.row(i) / norm;
    }
    throw AllZeroData();
}

}  // namespace

double step_scale(const Eigen::VectorXd& v, const DataSet& data, double eta) {
    if (v.size() != data.p()) throw DimensionMismatch("step_scale: dimension mismatch");
    Workspace ws(data, eta);
    ws.at(v);
    return ws.scale();
}

Eigen::VectorXd weiszfeld_step(const Eigen::VectorXd& v, const DataSet& data, double eta) {
    if (v.size() != data.p()) throw DimensionMismatch("weiszfeld_step: dimension mismatch");
    Workspace ws(data, eta);
    ws.at(v);
    if (auto hit = ws.classify()) throw SamplePointHit(hit->index, hit->sign);
    return ws.weiszfeld();
}

Eigen::VectorXd escape_step(Eigen::Index k, int sign, const DataSet& data,
                            const SolverConfig& cfg) {
    const Eigen::VectorXd w = signed_row(data, k, sign);
    const SamplePointGradient g = sample_point_gradient(k, sign, data, cfg.sample_point_tol);
    const double gnorm = g.grad.norm();
    if (gnorm - 2.0 * g.multiplicity * data.rows().row(k).norm() <= 0.0) return w;
    Workspace ws(data, cfg.sample_point_tol);
    return escape_from(w, g.grad, ws.objective_at(w), ws, cfg).v;
}

RadiusBound radius_bound(const DataSet& data) {
    if (data.all_zero()) throw AllZeroData();
    const Eigen::Index n = data.n();
    std::vector<double> norms(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) norms[static_cast<std::size_t>(i)] = data.rows().row(i).norm();
    const double r0 = lower_quantile(norms, 0.75);
    Eigen::Index inside = 0;
    for (double v : norms)
        if (v <= r0) ++inside;
    const double coeff = 2.0 * static_cast<double>(inside) / static_cast<double>(n) - 1.0;
    // Largest root of c h^2 - 2 h R0 - R0^2 (the f(0) term vanishes exactly).
    const double root = r0 * (1.0 + std::sqrt(1.0 + coeff)) / coeff;
    return {r0, root + 1.0, coeff};
}

double ray_line_search(const Eigen::VectorXd& u, const DataSet& data, double eta) {
    if (u.size() != data.p()) throw DimensionMismatch("ray_line_search: dimension mismatch");
    if (std::abs(u.norm() - 1.0) > 1e-10) throw Error("ray_line_search requires a unit direction");
    Workspace ws(data, eta);
    // In one dimension every direction is a sample direction and the search
    // (a convex piecewise-linear function of t) is still well posed, so the
    // collinearity guard applies only for p >= 2.
    if (data.p() >= 2 && direction_at_sample_point(u, ws, eta))
        throw DirectionAtSamplePoint("ray passes through a sample direction");
    const RadiusBound rb = radius_bound(data);
    const double t_hi = (rb.H + 0.5) * (rb.H + 0.5);
    return std::sqrt(golden_section_ray(ws, u, t_hi));
}

EigenPair pca_leading(const DataSet& data) {
    if (data.n() < 2) throw DegenerateData();
    const Eigen::MatrixXd centered = data.rows().rowwise() - data.rows().colwise().mean();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(data.n());
    if (cov.cwiseAbs().maxCoeff() == 0.0) throw DegenerateData();
    EigenSym es = jacobi_eigensymm(cov);
    Eigen::VectorXd lead = es.vectors.col(0);
    normalize_sign(lead);
    return {std::move(lead), es.values[0]};
}

SolverResult solve(const DataSet& data, const SolverConfig& cfg,
                   const std::optional<Eigen::VectorXd>& init) {
    if (data.all_zero()) throw AllZeroData();
    const double eta = cfg.sample_point_tol;
    const RadiusBound rb = radius_bound(data);
    Workspace ws(data, eta);

    Eigen::VectorXd v = init ? *init : initial_direction(data);
    if (v.size() != data.p()) throw DimensionMismatch("solve: init dimension mismatch");
    double f_cur = ws.objective_at(v);
    const double delta = cfg.delta > 0.0 ? cfg.delta : 1e-12 * std::max(1.0, std::abs(f_cur));

    SolverResult res;
    res.status = SolverStatus::MaxIterReached;
    res.escape_steps_taken = 0;
    res.step12_resets = 0;
    res.polish_skipped = false;
    res.radius = rb;
    if (cfg.record_trace) res.trace.push_back(f_cur);

    int iter = 0;
    double err = delta + 1.0;
    bool collapsed = false;
    while (err > delta && iter < cfg.max_iter) {
        ++iter;
        ws.at(v);
        const auto hit = ws.classify();
        if (!hit) {
            Eigen::VectorXd v_new = ws.weiszfeld();
            if (v_new.norm() <= 1e-14) {
                // T drove the iterate into the origin: the non-identifiable
                // regime's fixed point.
                v = Eigen::VectorXd::Zero(data.p());
                f_cur = 0.0;
                collapsed = true;
                if (cfg.record_trace) res.trace.push_back(f_cur);
                err = 0.0;
                break;
            }
            const double f_new = ws.objective_at(v_new);
            err = f_cur - f_new;
            v = std::move(v_new);
            f_cur = f_new;
        } else {
            const SamplePointGradient g =
                sample_point_gradient(hit->index, hit->sign, data, eta);
            const double clamp =
                g.grad.norm() - 2.0 * g.multiplicity * data.rows().row(hit->index).norm();
            if (clamp <= 0.0) {
                err = 0.0;  // stationary sample point
            } else {
                const Eigen::VectorXd w = signed_row(data, hit->index, hit->sign);
                try {
                    const double f_ref = std::min(f_cur, ws.objective_at(w));
                    EscapeOutcome out = escape_from(w, g.grad, f_ref, ws, cfg);
                    v = std::move(out.v);
                    f_cur = out.objective;
                    err = delta + 1.0;  // artificial reset, at most once per point
                    ++res.escape_steps_taken;
                    ++res.step12_resets;
                } catch (const BacktrackExhausted&) {
                    err = 0.0;  // numerically flat: accept the point
                }
            }
        }
        if (cfg.record_trace) res.trace.push_back(f_cur);
    }
    if (err <= delta) res.status = SolverStatus::Converged;
    res.iterations = iter;

    // Length polish along the fitted direction; skipped when the loop
    // settled on a sample point, where the ray restriction is not smooth.
    const double pre_norm = v.norm();
    if (!collapsed && pre_norm > 0.0) {
        ws.at(v);
        if (ws.classify()) {
            res.polish_skipped = true;
        } else {
            const Eigen::VectorXd u = v / pre_norm;
            const double t_hi = (rb.H + 0.5) * (rb.H + 0.5);
            const double t_opt = golden_section_ray(ws, u, t_hi);
            const Eigen::VectorXd polished = std::sqrt(t_opt) * u;
            const double f_polished = ws.objective_at(polished);
            // The polish must not move uphill; the search tolerance can
            // otherwise overshoot an almost-flat ray minimum.
            if (f_polished < f_cur) {
                v = polished;
                f_cur = f_polished;
            }
            if (cfg.record_trace) res.trace.push_back(f_cur);
        }
    }

    res.norm = v.norm();
    normalize_sign(v);
    if (res.norm > 0.0) {
        res.direction = v / res.norm;
    } else {
        v = Eigen::VectorXd::Zero(data.p());
        res.direction = std::nullopt;
    }
    res.objective = objective_value(v, data);
    res.v = std::move(v);
    return res;
}

}  // namespace spca
