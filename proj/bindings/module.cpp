#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spca/ascov.hpp"
#include "spca/linalg.hpp"
#include "spca/solver.hpp"
#include "spca/studies.hpp"
#include "spca/theory.hpp"

namespace py = pybind11;

namespace {

spca::DataSet make_dataset(const Eigen::MatrixXd& rows) { return spca::DataSet(rows); }

spca::Radial radial_from_nu(int nu) {
    return nu > 0 ? spca::Radial{spca::Radial::StudentT, nu} : spca::Radial{spca::Radial::Gaussian, 0};
}

spca::EllipticalSpec make_spec(int p, double lam, double sigma, int nu,
                               const std::optional<Eigen::MatrixXd>& o) {
    return {p, o ? *o : Eigen::MatrixXd::Identity(p, p), lam, sigma, radial_from_nu(nu)};
}

spca::MarginSpec::Model margin_model(const std::string& name) {
    if (name == "Normal") return spca::MarginSpec::Normal;
    if (name == "Uniform") return spca::MarginSpec::Uniform;
    if (name == "Bernoulli") return spca::MarginSpec::Bernoulli;
    throw spca::Error("unknown margin model " + name);
}

}  // namespace

PYBIND11_MODULE(_spca, m) {
    m.doc() = "Robust first principal component via the product-norm M-estimator";

    py::register_exception<spca::Error>(m, "SpcaError");

    py::class_<spca::SolverResult>(m, "SolverResult")
        .def_readonly("v", &spca::SolverResult::v)
        .def_readonly("objective", &spca::SolverResult::objective)
        .def_readonly("iterations", &spca::SolverResult::iterations)
        .def_property_readonly("converged",
                               [](const spca::SolverResult& r) {
                                   return r.status == spca::SolverStatus::Converged;
                               })
        .def_readonly("escape_steps_taken", &spca::SolverResult::escape_steps_taken)
        .def_readonly("norm", &spca::SolverResult::norm)
        .def_readonly("direction", &spca::SolverResult::direction)
        .def_readonly("step12_resets", &spca::SolverResult::step12_resets)
        .def_readonly("polish_skipped", &spca::SolverResult::polish_skipped)
        .def_property_readonly("radius_H",
                               [](const spca::SolverResult& r) { return r.radius.H; })
        .def_readonly("trace", &spca::SolverResult::trace);

    py::class_<spca::TauResult>(m, "TauResult")
        .def_readonly("lam", &spca::TauResult::lambda)
        .def_readonly("p", &spca::TauResult::p)
        .def_readonly("tau", &spca::TauResult::tau)
        .def_readonly("tau0", &spca::TauResult::tau0)
        .def_readonly("abs_err_estimate", &spca::TauResult::abs_err_estimate)
        .def_property_readonly("method", [](const spca::TauResult& t) {
            switch (t.method) {
                case spca::TauMethod::ClosedForm2:
                    return "closed-form-p2";
                case spca::TauMethod::ClosedForm3:
                    return "closed-form-p3";
                case spca::TauMethod::ClosedForm4:
                    return "closed-form-p4";
                default:
                    return "quadrature";
            }
        });

    py::class_<spca::AscovEstimate>(m, "AscovEstimate")
        .def_readonly("q1", &spca::AscovEstimate::q1)
        .def_readonly("q2", &spca::AscovEstimate::q2)
        .def_readonly("sigma_matrix", &spca::AscovEstimate::sigma_matrix)
        .def_readonly("mc_draws", &spca::AscovEstimate::mc_draws)
        .def_readonly("se_q1", &spca::AscovEstimate::se_q1)
        .def_readonly("se_q2", &spca::AscovEstimate::se_q2)
        .def_readonly("psi_used", &spca::AscovEstimate::psi_used)
        .def_readonly("nonfinite_moment", &spca::AscovEstimate::nonfinite_moment);

    m.def(
        "objective_value",
        [](const Eigen::VectorXd& v, const Eigen::MatrixXd& x) {
            return spca::objective_value(v, make_dataset(x));
        },
        py::arg("v"), py::arg("data"));
    m.def(
        "objective_nuclear",
        [](const Eigen::VectorXd& v, const Eigen::MatrixXd& x) {
            return spca::objective_nuclear(v, make_dataset(x));
        },
        py::arg("v"), py::arg("data"));
    m.def(
        "gradient",
        [](const Eigen::VectorXd& v, const Eigen::MatrixXd& x) {
            return spca::gradient(v, make_dataset(x));
        },
        py::arg("v"), py::arg("data"));
    m.def(
        "hessian",
        [](const Eigen::VectorXd& v, const Eigen::MatrixXd& x) {
            return spca::hessian(v, make_dataset(x));
        },
        py::arg("v"), py::arg("data"));
    m.def(
        "modified_gradient",
        [](Eigen::Index k, int sign, const Eigen::MatrixXd& x) {
            return spca::modified_gradient(k, sign, make_dataset(x));
        },
        py::arg("k"), py::arg("sign"), py::arg("data"));
    m.def(
        "sign_covariance",
        [](const Eigen::MatrixXd& x) {
            const spca::SignCovariance s = spca::sign_covariance(make_dataset(x));
            return py::make_tuple(s.matrix, s.leading_eig);
        },
        py::arg("data"), "Returns (matrix, leading_eigenvalue).");

    m.def(
        "solve",
        [](const Eigen::MatrixXd& x, double delta, int max_iter,
           const std::optional<Eigen::VectorXd>& init, bool record_trace) {
            spca::SolverConfig cfg;
            cfg.delta = delta;
            cfg.max_iter = max_iter;
            cfg.record_trace = record_trace;
            return spca::solve(make_dataset(x), cfg, init);
        },
        py::arg("data"), py::arg("delta") = 0.0, py::arg("max_iter") = 10000,
        py::arg("init") = std::nullopt, py::arg("record_trace") = false);
    m.def(
        "step_scale",
        [](const Eigen::VectorXd& v, const Eigen::MatrixXd& x) {
            return spca::step_scale(v, make_dataset(x));
        },
        py::arg("v"), py::arg("data"));
    m.def(
        "weiszfeld_step",
        [](const Eigen::VectorXd& v, const Eigen::MatrixXd& x) {
            return spca::weiszfeld_step(v, make_dataset(x));
        },
        py::arg("v"), py::arg("data"));
    m.def(
        "radius_bound",
        [](const Eigen::MatrixXd& x) {
            const spca::RadiusBound rb = spca::radius_bound(make_dataset(x));
            return py::make_tuple(rb.R0, rb.H, rb.coefficient);
        },
        py::arg("data"), "Returns (R0, H, coefficient).");
    m.def(
        "ray_line_search",
        [](const Eigen::VectorXd& u, const Eigen::MatrixXd& x) {
            return spca::ray_line_search(u, make_dataset(x));
        },
        py::arg("u"), py::arg("data"));
    m.def(
        "pca_leading",
        [](const Eigen::MatrixXd& x) {
            const spca::EigenPair e = spca::pca_leading(make_dataset(x));
            return py::make_tuple(e.vector, e.value);
        },
        py::arg("data"), "Returns (unit eigenvector, eigenvalue).");

    m.def(
        "tau", [](double lam, int p) { return spca::tau(lam, p); }, py::arg("lam"), py::arg("p"));
    m.def(
        "tau_closed", [](double lam, int p) { return spca::tau_closed(lam, p); }, py::arg("lam"),
        py::arg("p"));
    m.def(
        "tau_quadrature", [](double lam, int p) { return spca::tau_quadrature(lam, p); },
        py::arg("lam"), py::arg("p"));
    m.def("lambda_star", &spca::lambda_star, py::arg("p"));
    m.def("threshold_constant", &spca::threshold_constant);
    m.def(
        "population_norm",
        [](double lam, int p, double sigma) { return spca::population_norm(lam, p, sigma).psi; },
        py::arg("lam"), py::arg("p"), py::arg("sigma") = 1.0,
        "Norm of the population minimizer under the Gaussian radial law.");

    m.def(
        "sample_elliptical",
        [](int p, double lam, double sigma, int nu, Eigen::Index n, std::uint64_t seed,
           const std::optional<Eigen::MatrixXd>& o) {
            return spca::sample_elliptical(make_spec(p, lam, sigma, nu, o), n, seed).rows();
        },
        py::arg("p"), py::arg("lam"), py::arg("sigma"), py::arg("nu"), py::arg("n"),
        py::arg("seed"), py::arg("O") = std::nullopt,
        "Draws n rows of O Lambda Z; nu <= 0 selects the Gaussian radial law.");
    m.def(
        "sample_margins",
        [](const std::string& model, double theta, double second_sd, Eigen::Index n,
           std::uint64_t seed) {
            return spca::sample_margins(spca::MarginSpec(margin_model(model), theta, second_sd),
                                        n, seed)
                .rows();
        },
        py::arg("model"), py::arg("theta"), py::arg("second_sd"), py::arg("n"), py::arg("seed"));
    m.def("random_orthogonal", &spca::random_orthogonal, py::arg("p"), py::arg("seed"));

    m.def(
        "ascov_spca",
        [](int p, double lam, double sigma, int nu, double psi, long mc_draws, std::uint64_t seed,
           const std::optional<Eigen::MatrixXd>& o, int threads) {
            return spca::ascov_spca(make_spec(p, lam, sigma, nu, o), psi, mc_draws, seed, threads);
        },
        py::arg("p"), py::arg("lam"), py::arg("sigma"), py::arg("nu"), py::arg("psi"),
        py::arg("mc_draws") = 200000, py::arg("seed") = 42, py::arg("O") = std::nullopt,
        py::arg("threads") = 0);
    m.def(
        "ascov_pca",
        [](int p, double lam, double sigma, int nu, long mc_draws, std::uint64_t seed,
           const std::optional<Eigen::MatrixXd>& o, int threads) {
            return spca::ascov_pca(make_spec(p, lam, sigma, nu, o), mc_draws, seed, threads);
        },
        py::arg("p"), py::arg("lam"), py::arg("sigma"), py::arg("nu"),
        py::arg("mc_draws") = 200000, py::arg("seed") = 42, py::arg("O") = std::nullopt,
        py::arg("threads") = 0);
    m.def(
        "split_norm_direction",
        [](const Eigen::MatrixXd& sigma, const Eigen::VectorXd& h) {
            const spca::NormDirectionSplit s = spca::split_norm_direction(sigma, h);
            return py::make_tuple(s.norm_var, s.dir_cov, s.cross);
        },
        py::arg("sigma"), py::arg("h"), "Returns (norm_var, dir_cov, cross).");
}
