#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "igtk/common.hpp"
#include "igtk/mc_harness.hpp"
#include "igtk/model_zoo.hpp"

using namespace igtk;

namespace {

Eigen::VectorXd vec1(double a) {
    Eigen::VectorXd v(1);
    v << a;
    return v;
}

std::vector<Eigen::VectorXd> rows(const std::vector<double>& xs) {
    std::vector<Eigen::VectorXd> out;
    for (double x : xs) out.push_back(vec1(x));
    return out;
}

}  // namespace

TEST_CASE("newton solve lands on closed-form estimators") {
    SUBCASE("gaussian mean: sample average") {
        const ModelPtr m = gaussian_mean(2);
        std::vector<Eigen::VectorXd> data;
        Eigen::VectorXd a(2), b(2), c(2);
        a << 1.0, 0.0;
        b << 0.0, 2.0;
        c << -1.0, 1.0;
        data = {a, b, c};
        const MleResult r = mle_solve(*m, data, Eigen::VectorXd::Zero(2), MleControls{});
        REQUIRE(r.status == MleStatus::Converged);
        CHECK(r.theta_hat[0] == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(r.theta_hat[1] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(r.steps <= 2);
    }
    SUBCASE("poisson: sample average") {
        const MleResult r =
            mle_solve(*poisson(), rows({1, 3, 2, 0, 4}), vec1(1.0), MleControls{});
        REQUIRE(r.status == MleStatus::Converged);
        // converged to the score tolerance, not to machine precision
        CHECK(r.theta_hat[0] == doctest::Approx(2.0).epsilon(1e-8));
    }
    SUBCASE("bernoulli: success fraction") {
        const MleResult r =
            mle_solve(*bernoulli(), rows({1, 0, 1, 1}), vec1(0.5), MleControls{});
        REQUIRE(r.status == MleStatus::Converged);
        CHECK(r.theta_hat[0] == doctest::Approx(0.75).epsilon(1e-8));
    }
}

TEST_CASE("newton solve zeroes the score for the curved family") {
    const ModelPtr m = curved_gaussian_efron();
    RngStream rng(99, 0, 0);
    const auto data = sample_batch(*m, vec1(0.2), 40, rng);
    const MleResult r = mle_solve(*m, data, vec1(0.2), MleControls{});
    REQUIRE(r.status == MleStatus::Converged);
    Eigen::VectorXd score = Eigen::VectorXd::Zero(1);
    for (const auto& x : data) score += m->score1(x, r.theta_hat);
    CHECK(std::abs(score[0]) <= 40.0 * 1e-9);
}

TEST_CASE("degenerate data cannot converge") {
    // all-zero poisson counts push the estimate toward the domain boundary
    const MleResult r = mle_solve(*poisson(), rows({0, 0, 0, 0}), vec1(0.5), MleControls{});
    CHECK(r.status != MleStatus::Converged);
}

TEST_CASE("simulation is deterministic and matches the exact gaussian covariance") {
    SimulationPlan plan;
    plan.model = gaussian_mean(1);
    plan.theta_true = vec1(0.5);
    plan.n_grid = {25, 50};
    plan.replicates = 2000;
    plan.master_seed = 31;
    const SimulationResult r1 = simulate_covariance(plan);
    const SimulationResult r2 = simulate_covariance(plan);
    REQUIRE(r1.per_n.size() == 2);
    CHECK(r1.valid);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(r1.per_n[i].cov(0, 0) == r2.per_n[i].cov(0, 0));  // bitwise reproducible
        CHECK(r1.per_n[i].cov_se(0, 0) == r2.per_n[i].cov_se(0, 0));
        CHECK(r1.per_n[i].dropped == 0);
        const double n = static_cast<double>(r1.per_n[i].n);
        const double ncov = n * r1.per_n[i].cov(0, 0);
        const double nse = n * r1.per_n[i].cov_se(0, 0);
        CHECK(std::abs(ncov - 1.0) < 5.0 * nse);
        // jackknife SE of a gaussian variance estimate: ≈ cov·√(2/R)
        CHECK(nse / ncov > 0.5 * std::sqrt(2.0 / 2000.0));
        CHECK(nse / ncov < 2.0 * std::sqrt(2.0 / 2000.0));
        CHECK(std::abs(r1.per_n[i].bias[0]) < 5.0 * r1.per_n[i].bias_se[0]);
    }
}

TEST_CASE("plan validation") {
    SimulationPlan plan;
    plan.model = gaussian_mean(1);
    plan.theta_true = vec1(0.0);
    plan.n_grid = {50, 50};
    plan.replicates = 2000;
    CHECK_THROWS_AS((void)simulate_covariance(plan), InvalidSpec);
    plan.n_grid = {50, 100};
    plan.replicates = 10;
    CHECK_THROWS_AS((void)simulate_covariance(plan), InvalidSpec);
}

TEST_CASE("expansion fit recovers a synthetic law exactly") {
    SimulationResult fake;
    fake.plan.model = gaussian_mean(1);
    fake.plan.theta_true = vec1(0.0);
    for (long n : {20L, 40L, 80L, 160L, 320L}) {
        PerNStats s;
        s.n = n;
        s.cov = Eigen::MatrixXd::Constant(1, 1, (2.0 + 5.0 / n) / n);
        s.cov_se = Eigen::MatrixXd::Constant(1, 1, 1e-9 * s.cov(0, 0));
        s.bias = Eigen::VectorXd::Zero(1);
        s.bias_se = Eigen::VectorXd::Zero(1);
        fake.per_n.push_back(s);
    }
    const FitRecord f = fit_expansion(fake, Eigen::MatrixXd::Constant(1, 1, 2.0),
                                      Eigen::MatrixXd::Constant(1, 1, 5.0));
    CHECK(f.C1(0, 0) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(f.C2(0, 0) == doctest::Approx(5.0).epsilon(1e-8));
    CHECK(f.max_abs_z < 1e-3);
}

TEST_CASE("expansion fit rejects a degenerate design") {
    SimulationResult fake;
    fake.plan.model = gaussian_mean(1);
    fake.plan.theta_true = vec1(0.0);
    for (int rep = 0; rep < 4; ++rep) {
        PerNStats s;
        s.n = 100;  // identical design rows: rank-1 weighted design
        s.cov = Eigen::MatrixXd::Constant(1, 1, 0.01);
        s.cov_se = Eigen::MatrixXd::Constant(1, 1, 1e-4);
        fake.per_n.push_back(s);
    }
    CHECK_THROWS_AS((void)fit_expansion(fake, Eigen::MatrixXd::Ones(1, 1),
                                        Eigen::MatrixXd::Zero(1, 1)),
                    IllConditionedFit);
}

TEST_CASE("curved family covariance stays near the information bound at moderate n") {
    SimulationPlan plan;
    plan.model = curved_gaussian_efron();
    plan.theta_true = vec1(0.0);
    plan.n_grid = {100, 200};
    plan.replicates = 20000;
    plan.master_seed = 77;
    const SimulationResult r = simulate_covariance(plan);
    CHECK(r.valid);
    for (const auto& s : r.per_n) {
        const double ncov = static_cast<double>(s.n) * s.cov(0, 0);
        CAPTURE(s.n);
        CHECK(ncov > 0.95);
        CHECK(ncov < 1.03);
        CHECK(s.dropped <= 2);
    }
}
