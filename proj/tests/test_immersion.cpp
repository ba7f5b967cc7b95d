#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "igtk/immersion.hpp"
#include "igtk/model_zoo.hpp"

using namespace igtk;

namespace {

Eigen::VectorXd vec1(double a) {
    Eigen::VectorXd v(1);
    v << a;
    return v;
}

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

ImmersionReport report_at(const ModelPtr& m, const Eigen::VectorXd& theta) {
    const auto engine = ExpectationEngine::auto_for(*m);
    const auto table = moment_table(*m, theta, engine);
    return immersion_report(table, metric(table));
}

}  // namespace

TEST_CASE("standard gaussian immersion grams in closed form") {
    const auto r = report_at(gaussian_mean(1), vec1(0.3));
    CHECK(r.GramE(0, 0) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(r.GramMix(0, 0, 0) == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(r.GramH(0, 0, 0, 0) == doctest::Approx(3.0 / 16.0).epsilon(1e-13));
    CHECK(r.radial(0, 0) == doctest::Approx(-0.25).epsilon(1e-13));
    CHECK(r.GramII(0, 0, 0, 0) == doctest::Approx(3.0 / 16.0).epsilon(1e-13));
    CHECK(r.Ssharp(0, 0) == doctest::Approx(3.0 / 16.0).epsilon(1e-13));
    CHECK(r.kappa_sq == doctest::Approx(3.0 / 16.0).epsilon(1e-13));
    CHECK(r.min_eig_GramII == doctest::Approx(3.0 / 16.0).epsilon(1e-13));
}

TEST_CASE("multivariate gaussian second fundamental form on symmetric pairs") {
    // GramII = (δδ+δδ+δδ)/16; pair-matrix eigenvalues {1/4, 1/8, 1/8} for d=2
    const auto r = report_at(gaussian_mean(2), vec2(0.4, -0.8));
    CHECK(r.GramII(0, 0, 0, 0) == doctest::Approx(3.0 / 16.0).epsilon(1e-12));
    CHECK(r.GramII(0, 0, 1, 1) == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
    CHECK(r.GramII(0, 1, 0, 1) == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
    CHECK(r.min_eig_GramII == doctest::Approx(1.0 / 8.0).epsilon(1e-11));
    // S♯ = (d+2)/16 · I
    CHECK((r.Ssharp - 0.25 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.kappa_sq == doctest::Approx(2.0 * 0.25).epsilon(1e-12));
}

TEST_CASE("curved gaussian at the origin matches the frozen extrinsic values") {
    const auto r = report_at(curved_gaussian_efron(), vec1(0.0));
    CHECK(r.GramMix(0, 0, 0) == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(r.GramH(0, 0, 0, 0) == doctest::Approx(19.0 / 16.0).epsilon(1e-13));
    CHECK(r.GramII(0, 0, 0, 0) == doctest::Approx(19.0 / 16.0).epsilon(1e-13));
    CHECK(r.Ssharp(0, 0) == doctest::Approx(19.0 / 16.0).epsilon(1e-13));
    CHECK(r.kappa_sq == doctest::Approx(19.0 / 16.0).epsilon(1e-13));
    // the classical curvature diagnostic is a different quantity
    CHECK(efron_gamma_sq_curved_gaussian(0.0) == doctest::Approx(4.0));
    CHECK(efron_gamma_sq_curved_gaussian(0.5) == doctest::Approx(4.0 / 8.0).epsilon(1e-13));
}

TEST_CASE("cauchy location extrinsic quantities from adaptive quadrature") {
    const auto r = report_at(cauchy_location(), vec1(0.0));
    CHECK(r.GramH(0, 0, 0, 0) == doctest::Approx(27.0 / 128.0).epsilon(1e-8));
    CHECK(r.GramII(0, 0, 0, 0) == doctest::Approx(27.0 / 128.0).epsilon(1e-8));
    CHECK(r.Ssharp(0, 0) == doctest::Approx(27.0 / 64.0).epsilon(1e-8));
    CHECK(r.kappa_sq == doctest::Approx(27.0 / 32.0).epsilon(1e-8));
}

TEST_CASE("graph surface grams at the origin") {
    const auto r = report_at(graph_surface_gaussian(), vec2(0.0, 0.0));
    // GramH = (5/16) δ_ij δ_kl + (1/16)(δ_ik δ_jl + δ_il δ_jk)
    CHECK(r.GramH(0, 0, 0, 0) == doctest::Approx(7.0 / 16.0).epsilon(1e-12));
    CHECK(r.GramH(0, 0, 1, 1) == doctest::Approx(5.0 / 16.0).epsilon(1e-12));
    CHECK(r.GramH(0, 1, 0, 1) == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
    CHECK((r.Ssharp - 0.5 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(r.kappa_sq == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gauss equation holds for the embedded graph surface") {
    const ModelPtr m = graph_surface_gaussian();
    const auto engine = ExpectationEngine::auto_for(*m);
    for (const auto& theta : {vec2(0.0, 0.0), vec2(0.3, -0.2), vec2(-0.5, 0.8)}) {
        CAPTURE(theta.transpose());
        const auto table = moment_table(*m, theta, engine);
        const auto imm = immersion_report(table, metric(table));
        const auto snap = geometry_snapshot(*m, theta, engine);
        CHECK(gauss_residual(snap.Riem, imm.GramII).max_abs() < 1e-5);
    }
}

TEST_CASE("extrinsic term stays positive semidefinite across the grid") {
    for (const auto& gp : builtin_theta_grid()) {
        CAPTURE(gp.model->name());
        const auto r = report_at(gp.model, gp.theta);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            0.5 * (r.Ssharp + r.Ssharp.transpose()));
        CHECK(es.eigenvalues().minCoeff() >= -1e-9);
        CHECK(r.min_eig_GramII >= -1e-9);
    }
}

TEST_CASE("pair-basis eigenvalues of a hand-built tensor") {
    // t_ijkl = a δ_ij δ_kl has pair-matrix eigenvalues {a·d, 0, ...}
    const int d = 2;
    Tensor4 t(d);
    const double a = 0.7;
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) t(i, i, k, k) = a;
    CHECK(min_eig_sym_pairs(t) == doctest::Approx(0.0).epsilon(1e-12));
    // subtracting a multiple of the identity-pair form shifts the bottom eigenvalue
    Tensor4 shifted = t;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    shifted(i, j, k, l) -= 0.1 * 0.5 * ((i == k && j == l ? 1.0 : 0.0) +
                                                        (i == l && j == k ? 1.0 : 0.0));
    CHECK(min_eig_sym_pairs(shifted) == doctest::Approx(-0.1).epsilon(1e-11));
}
