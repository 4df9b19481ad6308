#include "spca/quadrature.hpp"

#include <cmath>

#include "spca/errors.hpp"
#include "spca/linalg.hpp"

namespace spca {
namespace {

struct Worker {
    const std::function<double(double)>& f;
    const QuadratureOptions& opt;
    KahanSum total;
    double err = 0.0;
    long evals = 0;
    bool depth_exhausted = false;

    double eval(double x) {
        ++evals;
        return f(x);
    }

    // One level of Simpson refinement with Richardson correction.
    void recurse(double a, double b, double fa, double fm, double fb, double whole, int depth) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = eval(lm);
        const double frm = eval(rm);
        const double h = b - a;
        const double left = h / 12.0 * (fa + 4.0 * flm + fm);
        const double right = h / 12.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        if (std::abs(delta) <= 15.0 * opt.interval_tol || depth >= opt.max_depth) {
            if (depth >= opt.max_depth && std::abs(delta) > 15.0 * opt.interval_tol)
                depth_exhausted = true;
            total.add(left + right + delta / 15.0);
            err += std::abs(delta) / 15.0;
            return;
        }
        recurse(a, m, fa, flm, fm, left, depth + 1);
        recurse(m, b, fm, frm, fb, right, depth + 1);
    }
};

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureOptions& opt) {
    Worker w{f, opt, {}, 0.0, 0, false};
    if (a == b) return {0.0, 0.0, 0};

    const int panels = opt.initial_panels > 0 ? opt.initial_panels : 1;
    const double h = (b - a) / panels;
    double x0 = a;
    double f0 = w.eval(x0);
    for (int k = 0; k < panels; ++k) {
        const double x1 = (k + 1 == panels) ? b : a + (k + 1) * h;
        const double xm = 0.5 * (x0 + x1);
        const double f1 = w.eval(x1);
        const double fm = w.eval(xm);
        const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        w.recurse(x0, x1, f0, fm, f1, whole, 0);
        x0 = x1;
        f0 = f1;
    }

    if (w.depth_exhausted && w.err > opt.global_tol)
        throw QuadratureNonConvergence("adaptive Simpson did not reach the requested tolerance");
    return {w.total.value(), w.err, w.evals};
}

}  // namespace spca
