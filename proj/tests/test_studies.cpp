#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spca/io.hpp"
#include "spca/studies.hpp"

using namespace spca;

namespace {

Sim1Config tiny_sim1() {
    Sim1Config cfg;
    cfg.models = {MarginSpec::Normal, MarginSpec::Bernoulli};
    cfg.n_list = {100};
    cfg.theta_grid = {1.0, 2.5};
    cfg.replicates = 8;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("sim1 emits one row per cell in sorted order") {
    const Sim1Config cfg = tiny_sim1();
    const std::vector<Sim1Row> rows = run_sim1(cfg);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].model == MarginSpec::Normal);
    CHECK(rows[0].theta == 1.0);
    CHECK(rows[1].theta == 2.5);
    CHECK(rows[2].model == MarginSpec::Bernoulli);
    for (const Sim1Row& r : rows) {
        CHECK(r.replicates == 8);
        CHECK(r.threshold == doctest::Approx(1.815).epsilon(0.005));
        CHECK(r.mean_abs_v1 >= 0.0);
        CHECK(r.mean_tail_norm >= 0.0);
    }
}

TEST_CASE("sim1 reruns are byte-identical and thread-count independent") {
    Sim1Config cfg = tiny_sim1();
    cfg.threads = 1;
    const std::string a = sim1_csv(run_sim1(cfg));
    cfg.threads = 2;
    const std::string b = sim1_csv(run_sim1(cfg));
    CHECK(a == b);
    CHECK(a.find("model,n,theta,mean_abs_v1,mean_tail_norm,replicates,seed,threshold\n") == 0);
}

TEST_CASE("sim1 separates the two theta regimes") {
    Sim1Config cfg;
    cfg.models = {MarginSpec::Normal};
    cfg.n_list = {400};
    cfg.theta_grid = {1.1, 2.8};
    cfg.replicates = 20;
    cfg.seed = 11;
    const std::vector<Sim1Row> rows = run_sim1(cfg);
    CHECK(rows[0].mean_abs_v1 < 0.35);
    CHECK(rows[1].mean_abs_v1 > 0.9);
    CHECK(rows[1].mean_tail_norm < 0.35);
}

TEST_CASE("bernoulli margins identify earlier than normal ones") {
    // At theta = 1.5 (below the elliptical threshold 1.815) the Bernoulli
    // model already locks onto the spike while the normal model does not.
    Sim1Config cfg;
    cfg.models = {MarginSpec::Normal, MarginSpec::Bernoulli};
    cfg.n_list = {800};
    cfg.theta_grid = {1.5};
    cfg.replicates = 30;
    cfg.seed = 99;
    const std::vector<Sim1Row> rows = run_sim1(cfg);
    REQUIRE(rows.size() == 2);
    const double normal_v1 = rows[0].mean_abs_v1;
    const double bernoulli_v1 = rows[1].mean_abs_v1;
    CHECK(bernoulli_v1 > normal_v1);
    CHECK(bernoulli_v1 > 0.3);
}

TEST_CASE("sim1 default grid covers [1, 3] with 20 points") {
    Sim1Config cfg;
    cfg.models = {MarginSpec::Uniform};
    cfg.n_list = {50};
    cfg.replicates = 1;
    cfg.seed = 3;
    const std::vector<Sim1Row> rows = run_sim1(cfg);
    REQUIRE(rows.size() == 20);
    CHECK(rows.front().theta == 1.0);
    CHECK(rows.back().theta == 3.0);
}

TEST_CASE("sim2 plug-in rows and determinism") {
    Sim2Config cfg;
    cfg.p_list = {3};
    cfg.nu_list = {3, 0};  // t3 and Gaussian
    cfg.lambda_grid = {5.0};
    cfg.mc_draws = 20000;
    cfg.psi_solve_n = 20000;
    cfg.seed = 13;
    const std::vector<Sim2Row> rows = run_sim2(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].nu == 0);  // sorted by (p, nu, lambda)
    CHECK(rows[1].nu == 3);
    CHECK(rows[1].pca_flag);       // t3 lacks fourth moments
    CHECK_FALSE(rows[1].spca_flag);
    const std::string a = sim2_csv(rows);
    const std::string b = sim2_csv(run_sim2(cfg));
    CHECK(a == b);
    CHECK(a.find("p,nu,lambda,log_spectral_spca,log_spectral_pca,mc_draws,seed\n") == 0);
}

TEST_CASE("sim2 nu dependence: PCA improves with lighter tails, SPCA barely moves") {
    Sim2Config cfg;
    cfg.p_list = {5};
    cfg.nu_list = {3, 5, 10};
    cfg.lambda_grid = {10.0};
    cfg.mc_draws = 100000;
    cfg.psi_solve_n = 50000;
    cfg.seed = 21;
    const std::vector<Sim2Row> rows = run_sim2(cfg);
    REQUIRE(rows.size() == 3);
    // rows sorted by nu: 3, 5, 10; the PCA column decreases in nu
    CHECK(rows[0].log_spectral_pca > rows[1].log_spectral_pca);
    CHECK(rows[1].log_spectral_pca > rows[2].log_spectral_pca);
    // the SPCA column varies by < 25% across nu
    double lo = 1e300, hi = -1e300;
    for (const Sim2Row& r : rows) {
        lo = std::min(lo, std::exp(r.log_spectral_spca));
        hi = std::max(hi, std::exp(r.log_spectral_spca));
    }
    CHECK(hi / lo < 1.25);
}

TEST_CASE("sim2 empirical path runs and orders heavy-tail efficiencies") {
    Sim2Config cfg;
    cfg.p_list = {3};
    cfg.nu_list = {3};
    cfg.lambda_grid = {10.0};
    cfg.empirical = true;
    cfg.empirical_n = 400;
    cfg.empirical_replicates = 60;
    cfg.seed = 17;
    const std::vector<Sim2Row> rows = run_sim2(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].log_spectral_spca < rows[0].log_spectral_pca);
}

TEST_CASE("csv doubles round-trip") {
    std::istringstream in("a,b\n0.1,2\n-3.5e-2,4\n");
    const DataSet d = read_csv_dataset(in);
    CHECK(d.n() == 2);
    CHECK(d.rows()(0, 0) == 0.1);
    CHECK(format_double(d.rows()(1, 0)) == "-0.035000000000000003");
}

TEST_CASE("csv parser edge cases") {
    std::istringstream empty("");
    CHECK_THROWS_AS(read_csv_dataset(empty), CsvParseError);
    std::istringstream only_header("x,y\n");
    CHECK_THROWS_AS(read_csv_dataset(only_header), CsvParseError);
    std::istringstream headerless("1,0\n");
    CHECK(read_csv_dataset(headerless).n() == 1);
    std::istringstream ragged("1,0\n2\n");
    CHECK_THROWS_AS(read_csv_dataset(ragged), CsvParseError);
    std::istringstream bad_field("x,y\n1,oops\n");
    CHECK_THROWS_AS(read_csv_dataset(bad_field), CsvParseError);
}
