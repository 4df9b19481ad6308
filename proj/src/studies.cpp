#include "spca/studies.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "spca/ascov.hpp"
#include "spca/io.hpp"
#include "spca/linalg.hpp"
#include "spca/theory.hpp"

namespace spca {
namespace {

std::uint64_t bits_of(double x) { return std::bit_cast<std::uint64_t>(x); }

/// Replicate seed keyed by the cell parameters, not the grid layout, so a
/// cell reproduces regardless of which grid it is part of.
std::uint64_t sim1_task_seed(std::uint64_t seed, MarginSpec::Model model, Eigen::Index n,
                             double theta, bool tail_theta, int replicate) {
    std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(model) + 1);
    s = derive_seed(s, static_cast<std::uint64_t>(n));
    s = derive_seed(s, bits_of(theta));
    s = derive_seed(s, tail_theta ? 2 : 1);
    return derive_seed(s, static_cast<std::uint64_t>(replicate));
}

std::vector<double> default_theta_grid() {
    std::vector<double> grid(20);
    for (int k = 0; k < 20; ++k) grid[static_cast<std::size_t>(k)] = 1.0 + 2.0 * k / 19.0;
    return grid;
}

double log_spectral(const Eigen::MatrixXd& m) { return std::log(spectral_norm_symm(m)); }

/// n * Cov of sign-aligned unit directions around o1.
Eigen::MatrixXd empirical_direction_ascov(const std::vector<Eigen::VectorXd>& dirs,
                                          const Eigen::VectorXd& o1, Eigen::Index n) {
    const Eigen::Index p = o1.size();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
    for (const Eigen::VectorXd& d : dirs) {
        const Eigen::VectorXd aligned = d.dot(o1) >= 0.0 ? d : Eigen::VectorXd(-d);
        const Eigen::VectorXd dev = aligned - o1;
        acc += dev * dev.transpose();
    }
    return acc * static_cast<double>(n) / static_cast<double>(dirs.size());
}

}  // namespace

const char* margin_model_name(MarginSpec::Model m) {
    switch (m) {
        case MarginSpec::Normal:
            return "Normal";
        case MarginSpec::Uniform:
            return "Uniform";
        case MarginSpec::Bernoulli:
            return "Bernoulli";
    }
    return "?";
}

std::vector<Sim1Row> run_sim1(const Sim1Config& cfg) {
    if (cfg.replicates < 1) throw Error("sim1 requires replicates >= 1");
    if (cfg.models.empty() || cfg.n_list.empty()) throw Error("sim1 grids must be nonempty");
    const std::vector<double> grid =
        cfg.theta_grid.empty() ? default_theta_grid() : cfg.theta_grid;

    struct Cell {
        MarginSpec::Model model;
        Eigen::Index n;
        double theta;
    };
    std::vector<Cell> cells;
    for (MarginSpec::Model m : cfg.models)
        for (Eigen::Index n : cfg.n_list)
            for (double theta : grid) cells.push_back({m, n, theta});
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        if (a.model != b.model) return a.model < b.model;
        if (a.n != b.n) return a.n < b.n;
        return a.theta < b.theta;
    });

    const auto r = static_cast<std::int64_t>(cfg.replicates);
    const auto n_tasks = static_cast<std::int64_t>(cells.size()) * r;
    std::vector<double> abs_v1(static_cast<std::size_t>(n_tasks));
    std::vector<double> tail(static_cast<std::size_t>(n_tasks));

    parallel_for(
        n_tasks,
        [&](std::int64_t task) {
            const Cell& cell = cells[static_cast<std::size_t>(task / r)];
            const int rep = static_cast<int>(task % r);
            const double second_sd = cfg.tail_theta ? std::sqrt(cell.theta) : 1.0;
            const MarginSpec spec(cell.model, cell.theta, second_sd);
            const DataSet data = sample_margins(
                spec, cell.n,
                sim1_task_seed(cfg.seed, cell.model, cell.n, cell.theta, cfg.tail_theta, rep));
            const SolverResult fit = solve(data);
            if (fit.norm > fit.radius.H + 0.5 + 1e-9 * (1.0 + fit.radius.H))
                throw Error("fitted norm exceeded the radius bound");
            abs_v1[static_cast<std::size_t>(task)] = std::abs(fit.v[0]);
            tail[static_cast<std::size_t>(task)] =
                std::sqrt(fit.v[1] * fit.v[1] + fit.v[2] * fit.v[2]);
        },
        cfg.threads);

    const double threshold = lambda_star(3);
    std::vector<Sim1Row> rows;
    rows.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        KahanSum sum_v1, sum_tail;
        for (std::int64_t k = 0; k < r; ++k) {
            sum_v1.add(abs_v1[c * static_cast<std::size_t>(r) + static_cast<std::size_t>(k)]);
            sum_tail.add(tail[c * static_cast<std::size_t>(r) + static_cast<std::size_t>(k)]);
        }
        rows.push_back({cells[c].model, cells[c].n, cells[c].theta,
                        sum_v1.value() / cfg.replicates, sum_tail.value() / cfg.replicates,
                        cfg.replicates, cfg.seed, threshold});
    }
    return rows;
}

std::string sim1_csv(const std::vector<Sim1Row>& rows) {
    std::ostringstream out;
    out << "model,n,theta,mean_abs_v1,mean_tail_norm,replicates,seed,threshold\n";
    for (const Sim1Row& row : rows) {
        out << margin_model_name(row.model) << ',' << row.n << ',' << format_double(row.theta)
            << ',' << format_double(row.mean_abs_v1) << ',' << format_double(row.mean_tail_norm)
            << ',' << row.replicates << ',' << row.seed << ',' << format_double(row.threshold)
            << '\n';
    }
    return out.str();
}

std::vector<Sim2Row> run_sim2(const Sim2Config& cfg) {
    if (cfg.p_list.empty() || cfg.nu_list.empty() || cfg.lambda_grid.empty())
        throw Error("sim2 grids must be nonempty");

    struct Cell {
        int p;
        int nu;
        double lambda;
    };
    std::vector<Cell> cells;
    for (int p : cfg.p_list)
        for (int nu : cfg.nu_list)
            for (double lambda : cfg.lambda_grid) cells.push_back({p, nu, lambda});
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        if (a.p != b.p) return a.p < b.p;
        if (a.nu != b.nu) return a.nu < b.nu;
        return a.lambda < b.lambda;
    });

    std::vector<Sim2Row> rows;
    rows.reserve(cells.size());
    for (const Cell& cell : cells) {
        const Radial radial = cell.nu > 0 ? Radial{Radial::StudentT, cell.nu}
                                          : Radial{Radial::Gaussian, 0};
        const EllipticalSpec spec(cell.p, Eigen::MatrixXd::Identity(cell.p, cell.p), cell.lambda,
                                  1.0, radial);
        std::uint64_t cell_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(cell.p));
        cell_seed = derive_seed(cell_seed, static_cast<std::uint64_t>(cell.nu) + 7);
        cell_seed = derive_seed(cell_seed, bits_of(cell.lambda));
        const Eigen::VectorXd o1 = spec.O.col(0);

        Sim2Row row{cell.p, cell.nu, cell.lambda, 0.0, 0.0, cfg.mc_draws, cfg.seed, false, false};
        if (cfg.empirical) {
            std::vector<Eigen::VectorXd> spca_dirs(
                static_cast<std::size_t>(cfg.empirical_replicates));
            std::vector<Eigen::VectorXd> pca_dirs(
                static_cast<std::size_t>(cfg.empirical_replicates));
            parallel_for(
                cfg.empirical_replicates,
                [&](std::int64_t rep) {
                    const DataSet data = sample_elliptical(
                        spec, cfg.empirical_n,
                        derive_seed(cell_seed, 0xE000000u + static_cast<std::uint64_t>(rep)));
                    const EigenPair pca = pca_leading(data);
                    const SolverResult fit = solve(data, {}, pca.vector);
                    spca_dirs[static_cast<std::size_t>(rep)] =
                        fit.direction ? *fit.direction : pca.vector;
                    pca_dirs[static_cast<std::size_t>(rep)] = pca.vector;
                },
                cfg.threads);
            row.log_spectral_spca =
                log_spectral(empirical_direction_ascov(spca_dirs, o1, cfg.empirical_n));
            row.log_spectral_pca =
                log_spectral(empirical_direction_ascov(pca_dirs, o1, cfg.empirical_n));
            row.mc_draws = cfg.empirical_replicates;
        } else {
            double psi;
            if (radial.kind == Radial::Gaussian) {
                psi = population_norm(cell.lambda, cell.p, 1.0).psi;
            } else {
                const DataSet data =
                    sample_elliptical(spec, cfg.psi_solve_n, derive_seed(cell_seed, 0xF00Du));
                psi = solve(data).norm;
            }
            const AscovEstimate spca_est =
                ascov_spca(spec, psi, cfg.mc_draws, derive_seed(cell_seed, 1), cfg.threads);
            const AscovEstimate pca_est =
                ascov_pca(spec, cfg.mc_draws, derive_seed(cell_seed, 2), cfg.threads);
            const NormDirectionSplit split =
                split_norm_direction(spca_est.sigma_matrix, psi * o1);
            row.log_spectral_spca = log_spectral(split.dir_cov);
            row.log_spectral_pca = log_spectral(pca_est.sigma_matrix);
            row.spca_flag = spca_est.nonfinite_moment;
            row.pca_flag = pca_est.nonfinite_moment;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string sim2_csv(const std::vector<Sim2Row>& rows) {
    std::ostringstream out;
    out << "p,nu,lambda,log_spectral_spca,log_spectral_pca,mc_draws,seed\n";
    for (const Sim2Row& row : rows) {
        out << row.p << ',' << row.nu << ',' << format_double(row.lambda) << ','
            << format_double(row.log_spectral_spca) << ',' << format_double(row.log_spectral_pca)
            << ',' << row.mc_draws << ',' << row.seed << '\n';
    }
    return out.str();
}

}  // namespace spca
