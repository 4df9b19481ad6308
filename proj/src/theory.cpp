#include "spca/theory.hpp"

#include <cmath>
#include <string>

#include "spca/errors.hpp"
#include "spca/quadrature.hpp"

namespace spca {
namespace {

constexpr double kPi = 3.14159265358979323846;

void require_tau_domain(double lambda, int p) {
    if (!(lambda > 0.0)) throw Error("tau requires lambda > 0");
    if (p < 2) throw UnsupportedDim("tau requires p >= 2");
}

// Integrand of tau after compactification: substituting 1 + u = 1/z^2 in the
// half-line integral gives tau = int_0^1 [lambda z / sqrt(1 + (lambda^2-1) z^2)]^(p-1) dz,
// which is smooth on [0, 1] for every lambda > 0. Evaluated in log space so
// large p only underflows gracefully.
double tau_integrand(double z, double lambda, int p) {
    if (z <= 0.0) return 0.0;
    const double log_base = std::log(lambda) + std::log(z) -
                            0.5 * std::log1p((lambda * lambda - 1.0) * z * z);
    return std::exp(static_cast<double>(p - 1) * log_base);
}

double closed_i2(double lambda) { return lambda / (lambda + 1.0); }

double closed_i3(double lambda) {
    const double w2 = lambda * lambda - 1.0;
    if (std::abs(lambda - 1.0) < 1e-4) {
        // lambda^2 * (1/3 - w2/5 + w2^2/7 - w2^3/9), bridging the 0/0 form.
        return lambda * lambda *
               (1.0 / 3.0 + w2 * (-1.0 / 5.0 + w2 * (1.0 / 7.0 - w2 / 9.0)));
    }
    if (lambda > 1.0) {
        const double w = std::sqrt(w2);
        return lambda * lambda / w2 * (1.0 - std::acos(1.0 / lambda) / w);
    }
    const double m = std::sqrt(-w2);
    return lambda * lambda / w2 * (1.0 - std::atanh(m) / m);
}

double closed_i4(double lambda) { return lambda * lambda / ((lambda + 1.0) * (lambda + 1.0)); }

TauResult make_tau(double lambda, int p, double value, TauMethod method, double err) {
    return {lambda, p, value, (1.0 - value) / static_cast<double>(p - 1), method, err};
}

// Beta(1/2, (p-1)/2) expectation of g via w = sin^2(phi), which absorbs both
// endpoint singularities of the Beta density.
template <typename G>
double beta_expectation(const G& g, int p, const QuadratureOptions& opt) {
    const double log_coef =
        std::log(2.0) + std::lgamma(0.5 * p) - 0.5 * std::log(kPi) - std::lgamma(0.5 * (p - 1));
    const auto integrand = [&](double phi) {
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        double weight;
        if (p == 2) {
            weight = 1.0;
        } else if (c <= 0.0) {
            return 0.0;
        } else {
            weight = std::exp(static_cast<double>(p - 2) * std::log(c));
        }
        return g(s * s) * weight;
    };
    return std::exp(log_coef) * integrate_adaptive(integrand, 0.0, 0.5 * kPi, opt).value;
}

// E over the chi_p radius of (r, .)-expectations; weight in log space.
template <typename G>
double chi_expectation(const G& g_of_r, int p, const QuadratureOptions& opt) {
    const double log_norm = (1.0 - 0.5 * p) * std::log(2.0) - std::lgamma(0.5 * p);
    const double r_max = std::sqrt(static_cast<double>(p)) + 12.0;
    const auto integrand = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double log_w = log_norm + static_cast<double>(p - 1) * std::log(r) - 0.5 * r * r;
        if (log_w < -745.0) return 0.0;
        return g_of_r(r) * std::exp(log_w);
    };
    return integrate_adaptive(integrand, 0.0, r_max, opt).value;
}

// Inner integrands of the ray objective and its t-derivative. S and B are
// ||X||^2 and X_1^2 given the radius r and the beta variable w.
double h_value_term(double r, double w, double t, double lambda) {
    const double s = r * r * (1.0 + (lambda * lambda - 1.0) * w);
    const double b = lambda * lambda * r * r * w;
    const double rad = std::max((s + t) * (s + t) - 4.0 * t * b, 0.0);
    return std::sqrt(rad) - s;
}

double h_deriv_term(double r, double w, double t, double lambda) {
    const double s = r * r * (1.0 + (lambda * lambda - 1.0) * w);
    const double b = lambda * lambda * r * r * w;
    const double rad = std::max((s + t) * (s + t) - 4.0 * t * b, 0.0);
    if (rad == 0.0) return 0.0;  // measure-zero symmetric point
    const double g = (s + t - 2.0 * b) / std::sqrt(rad);
    return std::min(1.0, std::max(-1.0, g));
}

template <typename Term>
double h_double_integral(double t, double lambda, int p, const Term& term) {
    QuadratureOptions inner;
    inner.interval_tol = 1e-12;
    inner.global_tol = 1e-7;
    inner.max_depth = 40;
    QuadratureOptions outer;
    outer.interval_tol = 1e-11;
    outer.global_tol = 1e-6;
    outer.max_depth = 44;
    outer.initial_panels = 16;
    const auto per_radius = [&](double r) {
        return beta_expectation([&](double w) { return term(r, w, t, lambda); }, p, inner);
    };
    return chi_expectation(per_radius, p, outer);
}

}  // namespace

TauResult tau_quadrature(double lambda, int p) {
    require_tau_domain(lambda, p);
    QuadratureOptions opt;
    const QuadratureResult q =
        integrate_adaptive([&](double z) { return tau_integrand(z, lambda, p); }, 0.0, 1.0, opt);
    return make_tau(lambda, p, q.value, TauMethod::Quadrature, q.abs_err_estimate);
}

TauResult tau_closed(double lambda, int p) {
    require_tau_domain(lambda, p);
    switch (p) {
        case 2:
            return make_tau(lambda, 2, closed_i2(lambda), TauMethod::ClosedForm2, 1e-15);
        case 3:
            return make_tau(lambda, 3, closed_i3(lambda), TauMethod::ClosedForm3, 1e-14);
        case 4:
            return make_tau(lambda, 4, closed_i4(lambda), TauMethod::ClosedForm4, 1e-15);
        default:
            throw UnsupportedDim("closed-form tau available only for p in {2, 3, 4}");
    }
}

TauResult tau(double lambda, int p) {
    require_tau_domain(lambda, p);
    return p <= 4 ? tau_closed(lambda, p) : tau_quadrature(lambda, p);
}

double lambda_star(int p) {
    if (p < 2) throw UnsupportedDim("lambda_star requires p >= 2");
    const auto f = [p](double lambda) { return tau(lambda, p).tau - 0.5; };
    double lo = 1.0;
    const double flo = f(lo);
    if (flo == 0.0) return lo;
    if (flo > 0.0) throw Error("tau(1, p) > 1/2 cannot happen");
    double hi = 2.0;
    while (f(hi) <= 0.0) {
        hi *= 2.0;
        if (hi > 1e9) throw Error("lambda_star bracket expansion failed");
    }
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) <= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double threshold_constant() {
    // Limit of tau(C sqrt(p), p): 1 - sqrt(pi/2) e^{1/(2C^2)} erfc(1/(sqrt2 C)) / C.
    const auto limit = [](double c) {
        const double x = 1.0 / (std::sqrt(2.0) * c);
        return 1.0 - std::sqrt(0.5 * kPi) * std::exp(x * x) * std::erfc(x) / c;
    };
    double lo = 0.5, hi = 5.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (limit(mid) < 0.5 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<TauScalingRow> tau_scaling_checks(double lambda, const std::vector<int>& p_list) {
    std::vector<TauScalingRow> rows;
    rows.reserve(p_list.size());
    for (int p : p_list) {
        const TauResult t = tau(lambda, p);
        rows.push_back({p, p * t.tau, p * t.tau0});
    }
    return rows;
}

double population_objective_h(double t, double lambda, int p) {
    require_tau_domain(lambda, p);
    if (t < 0.0) throw Error("h is defined for t >= 0");
    return h_double_integral(t, lambda, p, h_value_term);
}

double population_objective_h_derivative(double t, double lambda, int p) {
    require_tau_domain(lambda, p);
    if (t < 0.0) throw Error("h' is defined for t >= 0");
    return h_double_integral(t, lambda, p, h_deriv_term);
}

PopulationNorm population_norm(double lambda, int p, double sigma) {
    require_tau_domain(lambda, p);
    if (!(sigma > 0.0)) throw Error("population_norm requires sigma > 0");
    const double tau_val = tau(lambda, p).tau;
    if (tau_val <= 0.5) return {lambda, p, sigma, 0.0, RadialLaw::GaussianChi};

    // h is strictly convex with h'(0) = 1 - 2 tau < 0 and h' -> 1, so the
    // minimizer is the unique sign change of h'.
    const double t_cap = 100.0 * lambda * lambda;
    double hi = 1.0;
    while (population_objective_h_derivative(hi, lambda, p) <= 0.0) {
        hi *= 2.0;
        if (hi > t_cap) throw Error("population_norm bracket expansion failed");
    }
    double lo = 0.0;
    const double tol = 1e-10 * std::max(1.0, hi);
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (population_objective_h_derivative(mid, lambda, p) <= 0.0 ? lo : hi) = mid;
    }
    return {lambda, p, sigma, sigma * std::sqrt(0.5 * (lo + hi)), RadialLaw::GaussianChi};
}

}  // namespace spca
