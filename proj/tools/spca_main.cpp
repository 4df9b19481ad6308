#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spca/ascov.hpp"
#include "spca/io.hpp"
#include "spca/linalg.hpp"
#include "spca/solver.hpp"
#include "spca/studies.hpp"
#include "spca/theory.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitNonConvergence = 4;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw spca::Error("cannot open output file " + out_path);
    out << text;
}

std::string tau_method_name(spca::TauMethod m) {
    switch (m) {
        case spca::TauMethod::ClosedForm2:
            return "closed-form-p2";
        case spca::TauMethod::ClosedForm3:
            return "closed-form-p3";
        case spca::TauMethod::ClosedForm4:
            return "closed-form-p4";
        case spca::TauMethod::Quadrature:
            return "quadrature";
    }
    return "?";
}

struct SolveArgs {
    std::string input;
    std::string out;
    double tol = 0.0;
    int max_iter = 10000;
};

int run_solve(const SolveArgs& args) {
    spca::DataSet data = [&] {
        if (args.input.empty() || args.input == "-") return spca::read_csv_dataset(std::cin);
        return spca::read_csv_dataset_file(args.input);
    }();

    spca::SolverConfig cfg;
    cfg.delta = args.tol;
    cfg.max_iter = args.max_iter;
    const spca::SolverResult res = spca::solve(data, cfg);

    std::ostringstream rep;
    rep << "n " << data.n() << "  p " << data.p() << "\n";
    rep << "status " << (res.status == spca::SolverStatus::Converged ? "converged" : "max-iter")
        << "  iterations " << res.iterations << "  escape_steps " << res.escape_steps_taken
        << "\n";
    rep << "objective " << spca::format_double(res.objective) << "\n";
    rep << "norm " << spca::format_double(res.norm) << "\n";
    rep << "direction";
    if (res.direction) {
        for (Eigen::Index j = 0; j < res.direction->size(); ++j)
            rep << ' ' << spca::format_double((*res.direction)[j]);
        rep << "\nsign_convention largest-magnitude coordinate nonnegative\n";
    } else {
        rep << " none (fit collapsed to the origin)\n";
    }
    rep << "radius_R0 " << spca::format_double(res.radius.R0) << "  radius_H "
        << spca::format_double(res.radius.H) << "  bound_H_plus_half "
        << spca::format_double(res.radius.H + 0.5) << "\n";
    if (res.polish_skipped) rep << "note length polish skipped (sample-point fit)\n";
    std::cout << rep.str();

    if (!args.out.empty()) {
        std::ostringstream csv;
        csv << "norm,objective,iterations,escape_steps,status,radius_H";
        for (Eigen::Index j = 0; j < data.p(); ++j) csv << ",v_" << (j + 1);
        csv << "\n";
        csv << spca::format_double(res.norm) << ',' << spca::format_double(res.objective) << ','
            << res.iterations << ',' << res.escape_steps_taken << ','
            << (res.status == spca::SolverStatus::Converged ? "converged" : "max-iter") << ','
            << spca::format_double(res.radius.H);
        for (Eigen::Index j = 0; j < data.p(); ++j) csv << ',' << spca::format_double(res.v[j]);
        csv << "\n";
        emit(csv.str(), args.out);
    }
    return res.status == spca::SolverStatus::Converged ? kExitOk : kExitNonConvergence;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust first principal component via the product-norm M-estimator"};
    app.require_subcommand(1);

    // ---- solve ----
    SolveArgs solve_args;
    auto* cmd_solve = app.add_subcommand("solve", "Fit the estimator to a CSV of observations");
    cmd_solve->add_option("input", solve_args.input, "input CSV path ('-' for stdin)");
    cmd_solve->add_option("--out", solve_args.out, "also write a one-row CSV summary here");
    cmd_solve->add_option("--tol", solve_args.tol, "objective-decrease stopping threshold");
    cmd_solve->add_option("--max-iter", solve_args.max_iter, "iteration cap");

    // ---- tau ----
    double tau_lambda = 0.0;
    int tau_p = 0;
    bool tau_use_closed = false, tau_use_quad = false;
    auto* cmd_tau = app.add_subcommand("tau", "Leading sign-covariance eigenvalue tau(lambda, p)");
    cmd_tau->add_option("--lambda", tau_lambda, "spike scale, > 0")->required();
    cmd_tau->add_option("--p", tau_p, "dimension, >= 2")->required();
    cmd_tau->add_flag("--closed", tau_use_closed, "force the closed form (p in {2,3,4})");
    cmd_tau->add_flag("--quad", tau_use_quad, "force adaptive quadrature");
    std::string tau_out;
    cmd_tau->add_option("--out", tau_out, "output path (default stdout)");

    // ---- lambda-star ----
    int ls_p = 0;
    std::string ls_range;
    auto* cmd_ls = app.add_subcommand("lambda-star", "Identifiability threshold lambda*_p");
    cmd_ls->add_option("--p", ls_p, "single dimension");
    cmd_ls->add_option("--p-range", ls_range, "inclusive range A:B");
    std::string ls_out;
    cmd_ls->add_option("--out", ls_out, "output path (default stdout)");

    // ---- psi ----
    double psi_lambda = 0.0, psi_sigma = 1.0;
    int psi_p = 0;
    auto* cmd_psi = app.add_subcommand("psi", "Population minimizer norm (Gaussian radial law)");
    cmd_psi->add_option("--lambda", psi_lambda)->required();
    cmd_psi->add_option("--p", psi_p)->required();
    cmd_psi->add_option("--sigma", psi_sigma, "scale, default 1");
    std::string psi_out;
    cmd_psi->add_option("--out", psi_out, "output path (default stdout)");

    // ---- ascov ----
    double ac_lambda = 0.0, ac_psi = 0.0;
    int ac_p = 0, ac_nu = 0, ac_threads = 0;
    long ac_draws = 200000;
    long ac_psi_n = 100000;
    std::uint64_t ac_seed = 42;
    auto* cmd_ascov =
        app.add_subcommand("ascov", "Plug-in asymptotic covariances (proposed vs PCA)");
    cmd_ascov->add_option("--lambda", ac_lambda)->required();
    cmd_ascov->add_option("--p", ac_p)->required();
    cmd_ascov->add_option("--nu", ac_nu, "t degrees of freedom; omit for Gaussian");
    cmd_ascov->add_option("--psi", ac_psi, "override psi (skips the automatic choice)");
    cmd_ascov->add_option("--mc-draws", ac_draws);
    cmd_ascov->add_option("--psi-n", ac_psi_n, "sample size of the large-n solve for psi");
    cmd_ascov->add_option("--seed", ac_seed);
    cmd_ascov->add_option("--threads", ac_threads);
    std::string ac_out;
    cmd_ascov->add_option("--out", ac_out, "output path (default stdout)");

    // ---- sim1 ----
    spca::Sim1Config s1;
    std::vector<std::string> s1_models;
    std::string s1_out;
    auto* cmd_sim1 = app.add_subcommand("sim1", "Identifiability study (margin models)");
    cmd_sim1->add_option("--models", s1_models, "subset of Normal,Uniform,Bernoulli")
        ->delimiter(',');
    cmd_sim1->add_option("--n-list", s1.n_list)->delimiter(',');
    cmd_sim1->add_option("--theta-grid", s1.theta_grid, "default: 20 points on [1,3]")
        ->delimiter(',');
    cmd_sim1->add_option("--replicates", s1.replicates);
    cmd_sim1->add_option("--seed", s1.seed);
    cmd_sim1->add_option("--threads", s1.threads);
    cmd_sim1->add_flag("--tail-theta", s1.tail_theta,
                       "use covariance diag(theta^2, theta, 1) instead of diag(theta^2, 1, 1)");
    cmd_sim1->add_option("--out", s1_out, "output CSV path (default stdout)");

    // ---- sim2 ----
    spca::Sim2Config s2;
    std::string s2_out;
    auto* cmd_sim2 = app.add_subcommand("sim2", "Efficiency study (ASCOV comparison)");
    cmd_sim2->add_option("--p-list", s2.p_list)->delimiter(',');
    cmd_sim2->add_option("--nu-list", s2.nu_list, "t dof per cell; 0 = Gaussian")->delimiter(',');
    cmd_sim2->add_option("--lambda-grid", s2.lambda_grid)->delimiter(',');
    cmd_sim2->add_option("--mc-draws", s2.mc_draws);
    cmd_sim2->add_option("--psi-n", s2.psi_solve_n);
    cmd_sim2->add_option("--seed", s2.seed);
    cmd_sim2->add_option("--threads", s2.threads);
    cmd_sim2->add_flag("--empirical", s2.empirical,
                       "estimate both ASCOVs from repeated finite-sample fits");
    cmd_sim2->add_option("--empirical-n", s2.empirical_n);
    cmd_sim2->add_option("--empirical-replicates", s2.empirical_replicates);
    cmd_sim2->add_option("--out", s2_out, "output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (cmd_solve->parsed()) return run_solve(solve_args);

        if (cmd_tau->parsed()) {
            if (tau_use_closed && tau_use_quad)
                throw CLI::ValidationError("tau", "--closed and --quad are mutually exclusive");
            const spca::TauResult t = tau_use_closed  ? spca::tau_closed(tau_lambda, tau_p)
                                      : tau_use_quad ? spca::tau_quadrature(tau_lambda, tau_p)
                                                     : spca::tau(tau_lambda, tau_p);
            std::ostringstream out;
            out << "tau " << spca::format_double(t.tau) << "\n";
            out << "tau0 " << spca::format_double(t.tau0) << "\n";
            out << "method " << tau_method_name(t.method) << "\n";
            out << (t.tau > 0.5 ? "identifiable (tau > 1/2)\n"
                                : "not identifiable (tau <= 1/2)\n");
            emit(out.str(), tau_out);
            return kExitOk;
        }

        if (cmd_ls->parsed()) {
            int lo = ls_p, hi = ls_p;
            if (!ls_range.empty()) {
                const auto colon = ls_range.find(':');
                if (colon == std::string::npos)
                    throw CLI::ValidationError("--p-range", "expected A:B");
                try {
                    lo = std::stoi(ls_range.substr(0, colon));
                    hi = std::stoi(ls_range.substr(colon + 1));
                } catch (const std::exception&) {
                    throw CLI::ValidationError("--p-range", "expected numeric A:B");
                }
            }
            if (lo < 2 || hi < lo) throw CLI::ValidationError("lambda-star", "need 2 <= A <= B");
            std::ostringstream out;
            out << "p,lambda_star\n";
            for (int p = lo; p <= hi; ++p)
                out << p << ',' << spca::format_double(spca::lambda_star(p)) << '\n';
            emit(out.str(), ls_out);
            return kExitOk;
        }

        if (cmd_psi->parsed()) {
            const spca::PopulationNorm pn = spca::population_norm(psi_lambda, psi_p, psi_sigma);
            const spca::TauResult t = spca::tau(psi_lambda, psi_p);
            std::ostringstream out;
            out << "psi " << spca::format_double(pn.psi) << "\n";
            out << "tau " << spca::format_double(t.tau) << "\n";
            out << (pn.psi > 0.0 ? "identifiable regime\n" : "psi = 0 (tau <= 1/2)\n");
            emit(out.str(), psi_out);
            return kExitOk;
        }

        if (cmd_ascov->parsed()) {
            const spca::Radial radial = ac_nu > 0 ? spca::Radial{spca::Radial::StudentT, ac_nu}
                                                  : spca::Radial{spca::Radial::Gaussian, 0};
            const spca::EllipticalSpec spec(ac_p, Eigen::MatrixXd::Identity(ac_p, ac_p),
                                            ac_lambda, 1.0, radial);
            double psi = ac_psi;
            if (!(psi > 0.0)) {
                if (radial.kind == spca::Radial::Gaussian) {
                    psi = spca::population_norm(ac_lambda, ac_p, 1.0).psi;
                } else {
                    const spca::DataSet data = spca::sample_elliptical(
                        spec, ac_psi_n, spca::derive_seed(ac_seed, 0xF00Du));
                    psi = spca::solve(data).norm;
                }
                if (!(psi > 0.0)) {
                    std::cerr << "error: psi = 0, the spike is below the identifiability "
                                 "threshold (lambda*_p = "
                              << spca::format_double(spca::lambda_star(ac_p))
                              << "); ascov needs tau > 1/2\n";
                    return kExitUsage;
                }
            }
            const spca::AscovEstimate sp =
                spca::ascov_spca(spec, psi, ac_draws, spca::derive_seed(ac_seed, 1), ac_threads);
            const spca::AscovEstimate pc =
                spca::ascov_pca(spec, ac_draws, spca::derive_seed(ac_seed, 2), ac_threads);
            const spca::NormDirectionSplit split =
                spca::split_norm_direction(sp.sigma_matrix, psi * spec.O.col(0));
            std::ostringstream out;
            out << "psi_used " << spca::format_double(psi) << "\n";
            out << "q1 " << spca::format_double(sp.q1) << " se "
                << spca::format_double(sp.se_q1) << "\n";
            out << "q2 " << spca::format_double(sp.q2) << " se "
                << spca::format_double(sp.se_q2) << "\n";
            out << "log_spectral_spca_direction "
                << spca::format_double(std::log(spca::spectral_norm_symm(split.dir_cov))) << "\n";
            out << "pca_coefficient " << spca::format_double(pc.q2) << " se "
                << spca::format_double(pc.se_q2) << "\n";
            out << "log_spectral_pca "
                << spca::format_double(std::log(spca::spectral_norm_symm(pc.sigma_matrix)))
                << "\n";
            if (sp.nonfinite_moment) out << "warning spca moments need nu >= 3\n";
            if (pc.nonfinite_moment) out << "warning pca moments need nu >= 5\n";
            emit(out.str(), ac_out);
            return kExitOk;
        }

        if (cmd_sim1->parsed()) {
            if (!s1_models.empty()) {
                s1.models.clear();
                for (const std::string& name : s1_models) {
                    if (name == "Normal")
                        s1.models.push_back(spca::MarginSpec::Normal);
                    else if (name == "Uniform")
                        s1.models.push_back(spca::MarginSpec::Uniform);
                    else if (name == "Bernoulli")
                        s1.models.push_back(spca::MarginSpec::Bernoulli);
                    else
                        throw CLI::ValidationError("--models", "unknown model " + name);
                }
            }
            emit(spca::sim1_csv(spca::run_sim1(s1)), s1_out);
            return kExitOk;
        }

        if (cmd_sim2->parsed()) {
            emit(spca::sim2_csv(spca::run_sim2(s2)), s2_out);
            return kExitOk;
        }
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const spca::CsvParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const spca::UnsupportedDim& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const spca::AllZeroData& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const spca::DegenerateData& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const spca::QuadratureNonConvergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const spca::BacktrackExhausted& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}
