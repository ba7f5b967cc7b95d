// Acceptance gate: one line per criterion, PASS/FAIL with measured values.
// Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igtk/correction.hpp"
#include "igtk/expectation.hpp"
#include "igtk/geometry.hpp"
#include "igtk/immersion.hpp"
#include "igtk/mc_harness.hpp"
#include "igtk/model_zoo.hpp"
#include "igtk/rng.hpp"
#include "igtk/singular.hpp"
#include "igtk/tensors.hpp"

using namespace igtk;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("CRITERION %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

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

Eigen::VectorXd vec3(double a, double b, double c) {
    Eigen::VectorXd v(3);
    v << a, b, c;
    return v;
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

template <typename Fn>
void guarded(int id, Fn&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(id, false, std::string("exception: ") + e.what());
    }
}

// ---- criterion 1: second-order term vanishes in full exponential families --

void criterion1() {
    struct Case {
        ModelPtr model;
        std::vector<Eigen::VectorXd> pts;
    };
    std::vector<Case> cases;
    cases.push_back({gaussian_mean(1),
                     {vec1(-1.0), vec1(-0.3), vec1(0.3), vec1(1.0), vec1(1.7)}});
    cases.push_back({gaussian_mean(3),
                     {vec3(0.2, -0.5, 1.0), vec3(0.0, 0.0, 0.0), vec3(0.6, 0.6, -0.6),
                      vec3(-0.8, 0.1, 0.4), vec3(0.5, 0.5, 0.5)}});
    cases.push_back({poisson(), {vec1(0.5), vec1(1.0), vec1(1.7), vec1(2.5), vec1(4.0)}});
    cases.push_back({bernoulli(), {vec1(0.15), vec1(0.35), vec1(0.5), vec1(0.65), vec1(0.8)}});

    double max_p = 0.0, max_ds = 0.0;
    for (const auto& c : cases) {
        const auto engine = ExpectationEngine::auto_for(*c.model);
        for (const auto& th : c.pts) {
            const auto rep = correction_report(*c.model, th, engine);
            max_p = std::max(max_p, max_abs(rep.P_user));
            max_ds = std::max(max_ds, max_abs(rep.D_user + rep.Ssharp_user));
        }
    }
    const bool pass = max_p <= 1e-6 && max_ds <= 1e-6;
    report(1, pass,
           "max|P_user|=" + fmt(max_p) + " max|D+Ssharp|=" + fmt(max_ds) + " threshold=1e-06");
}

// ---- criterion 2: d=1 reduction and identically zero curvature ------------

void criterion2() {
    const std::string efron = curved_gaussian_efron()->name();
    const std::string cauchy = cauchy_location()->name();
    double max_fr = 0.0;
    double max_rsharp = 0.0;
    int points = 0;
    for (const auto& gp : builtin_theta_grid()) {
        const std::string name = gp.model->name();
        if (name != efron && name != cauchy) continue;
        ++points;
        const auto engine = ExpectationEngine::auto_for(*gp.model);
        const auto rep = correction_report(*gp.model, gp.theta, engine);
        max_fr = std::max(max_fr, rep.full_vs_reduced);
        max_rsharp = std::max(max_rsharp, max_abs(rep.Rsharp_user));
    }
    const bool pass = points > 0 && max_fr <= 1e-8 && max_rsharp == 0.0;
    report(2, pass,
           "max|full-reduced|=" + fmt(max_fr) + " threshold=1e-08 max|Rsharp|=" + fmt(max_rsharp) +
               " (exact 0 required, " + std::to_string(points) + " points)");
}

// ---- criterion 3: S# is positive semidefinite ------------------------------

void criterion3() {
    double worst = 0.0;  // most negative min eigenvalue
    for (const auto& gp : builtin_theta_grid()) {
        const auto engine = ExpectationEngine::auto_for(*gp.model);
        const auto table = moment_table(*gp.model, gp.theta, engine);
        const auto m = metric(table);
        const auto imm = immersion_report(table, m);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            0.5 * (imm.Ssharp + imm.Ssharp.transpose()));
        worst = std::min(worst, es.eigenvalues().minCoeff());
    }
    const bool pass = worst >= -1e-9;
    report(3, pass, "min eig Ssharp=" + fmt(worst) + " threshold=-1e-09");
}

// ---- criterion 4: Gauss equation against the flat ambient space ------------

void criterion4() {
    double worst = 0.0;
    for (const auto& gp : builtin_theta_grid()) {
        const auto engine = ExpectationEngine::auto_for(*gp.model);
        const auto snap = geometry_snapshot(*gp.model, gp.theta, engine);
        const auto table = moment_table(*gp.model, gp.theta, engine);
        const auto m = metric(table);
        const auto imm = immersion_report(table, m);
        worst = std::max(worst, gauss_residual(snap.Riem, imm.GramII).max_abs());
    }
    const auto graph = graph_surface_gaussian();
    const auto engine = ExpectationEngine::auto_for(*graph);
    const auto snap0 = geometry_snapshot(*graph, vec2(0.0, 0.0), engine);
    const double r1212 = snap0.Riem(0, 1, 0, 1);
    const bool pass = worst <= 1e-5 && std::abs(r1212 - 1.0) <= 1e-5;
    report(4, pass,
           "max|gauss residual|=" + fmt(worst) + " threshold=1e-05 graph R_1212(0)=" + fmt(r1212) +
               " (want 1 +- 1e-05)");
}

// ---- criterion 5: P transforms as a (0,2)-tensor ---------------------------

void criterion5() {
    struct Base {
        ModelPtr model;
        Eigen::VectorXd theta;
    };
    std::vector<Base> bases;
    bases.push_back({curved_gaussian_efron(), vec1(0.25)});
    bases.push_back({cauchy_location(), vec1(0.6)});
    bases.push_back({poisson(), vec1(1.5)});
    bases.push_back({graph_surface_gaussian(), vec2(0.3, -0.2)});

    RngStream rng(0xACCE5501ULL, 0, 0);
    double worst_rel = 0.0;
    int count = 0;
    for (const auto& b : bases) {
        const int d = b.model->dim();
        const auto engine = ExpectationEngine::auto_for(*b.model);
        const Eigen::MatrixXd P = correction_report(*b.model, b.theta, engine).P_user;
        for (int r = 0; r < 5; ++r) {
            Eigen::MatrixXd B;
            do {
                B = Eigen::MatrixXd::Identity(d, d);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) B(i, j) += 0.3 * rng.next_gauss();
            } while (std::abs(B.determinant()) < 0.3);
            Tensor3 C(d);
            for (int i = 0; i < d; ++i)
                for (int a = 0; a < d; ++a)
                    for (int bb = a; bb < d; ++bb) {
                        const double v = 0.2 * rng.next_gauss();
                        C(i, a, bb) = v;
                        C(i, bb, a) = v;
                    }
            const auto reparam =
                std::make_shared<QuadraticReparamModel>(b.model, b.theta, B, C);
            const auto rep_u =
                correction_report(*reparam, Eigen::VectorXd::Zero(d),
                                  ExpectationEngine::auto_for(*reparam));
            const Eigen::MatrixXd expected = B.transpose() * P * B;
            const double rel = max_abs(rep_u.P_user - expected) / max_abs(expected);
            worst_rel = std::max(worst_rel, rel);
            ++count;
        }
    }
    const bool pass = count == 20 && worst_rel <= 1e-4;
    report(5, pass,
           "max rel err=" + fmt(worst_rel) + " threshold=1e-04 (" + std::to_string(count) +
               " reparameterizations)");
}

// ---- criterion 6: Levi-Civita Christoffels vs the moment formula -----------

void criterion6() {
    double worst = 0.0;
    for (const auto& gp : builtin_theta_grid()) {
        const auto engine = ExpectationEngine::auto_for(*gp.model);
        const auto table = moment_table(*gp.model, gp.theta, engine);
        const int d = gp.model->dim();
        const double h = 1e-3 * std::max(1.0, gp.theta.lpNorm<Eigen::Infinity>());

        // ∂_k g_ij by Richardson-extrapolated central differences of the
        // metric itself, independent of the moment identity being tested.
        Tensor3 dg(d);
        for (int k = 0; k < d; ++k) {
            auto diff = [&](double step) {
                Eigen::VectorXd tp = gp.theta, tm = gp.theta;
                tp[k] += step;
                tm[k] -= step;
                const Eigen::MatrixXd gp_ = moment_table(*gp.model, tp, engine).g;
                const Eigen::MatrixXd gm_ = moment_table(*gp.model, tm, engine).g;
                return Eigen::MatrixXd(((gp_ - gm_) / (2.0 * step)).eval());
            };
            const Eigen::MatrixXd D = (4.0 * diff(0.5 * h) - diff(h)) / 3.0;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) dg(k, i, j) = D(i, j);
        }
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) {
                    const double lc = 0.5 * (dg(i, j, k) + dg(j, i, k) - dg(k, i, j));
                    const double mom = table.Ge(i, j, k) + 0.5 * table.T(i, j, k);
                    worst = std::max(worst, std::abs(lc - mom));
                }
    }
    const bool pass = worst <= 1e-6;
    report(6, pass, "max|Gamma_LC - (Ge + T/2)|=" + fmt(worst) + " threshold=1e-06");
}

// ---- criterion 7: Monte Carlo covariance expansion fit ---------------------

void criterion7() {
    const auto t0 = std::chrono::steady_clock::now();

    SimulationPlan plan;
    plan.model = curved_gaussian_efron();
    plan.theta_true = vec1(0.0);
    plan.n_grid = {25, 50, 100, 200, 400};
    plan.replicates = 200000;
    plan.master_seed = 20260814;
    const auto result = simulate_covariance(plan);

    const auto engine = ExpectationEngine::auto_for(*plan.model);
    const auto corr = correction_report(*plan.model, plan.theta_true, engine);
    const auto table = moment_table(*plan.model, plan.theta_true, engine);
    const auto fit = fit_expansion(result, corr, table.g);
    const double c1 = fit.C1(0, 0), c2 = fit.C2(0, 0);

    SimulationPlan gm_plan;
    gm_plan.model = gaussian_mean(1);
    gm_plan.theta_true = vec1(0.5);
    gm_plan.n_grid = plan.n_grid;
    gm_plan.replicates = plan.replicates;
    gm_plan.master_seed = plan.master_seed;
    const auto gm_result = simulate_covariance(gm_plan);
    const auto gm_engine = ExpectationEngine::auto_for(*gm_plan.model);
    const auto gm_corr = correction_report(*gm_plan.model, gm_plan.theta_true, gm_engine);
    const auto gm_table = moment_table(*gm_plan.model, gm_plan.theta_true, gm_engine);
    const auto gm_fit = fit_expansion(gm_result, gm_corr, gm_table.g);
    const double gm_c2 = gm_fit.C2(0, 0), gm_se = gm_fit.C2_se(0, 0);

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool efron_ok =
        result.valid && c1 >= 0.98 && c1 <= 1.02 && c2 >= 2.8 && c2 <= 5.2;
    const bool gm_ok = gm_result.valid && std::abs(gm_c2) <= 3.0 * gm_se;
    const bool pass = efron_ok && gm_ok && secs <= 600.0;
    report(7, pass,
           "C1=" + fmt(c1) + " (band [0.98,1.02]) C2=" + fmt(c2) +
               " (band [2.8,5.2] vs prediction 4) gm |C2|=" + fmt(std::abs(gm_c2)) +
               " <= 3*se=" + fmt(3.0 * gm_se) + " runtime=" + fmt(secs) + "s (limit 600)");
}

// ---- criteria 8 and 9: z_n slopes and posterior mse rates ------------------

std::vector<double> rate_grid() {
    std::vector<double> ns;
    for (int i = 0; i <= 8; ++i) ns.push_back(std::pow(10.0, 2.0 + 0.5 * i));
    return ns;
}

bool is_regular(const NormalCrossingSpec& spec) {
    for (const auto& t : spec.terms)
        if (t.k != 1 || t.h != 0) return false;
    return true;
}

void criterion8() {
    const auto ns = rate_grid();
    double worst_z = 0.0;
    bool lambda_exact = true;
    for (const auto& named : builtin_spec_library()) {
        const auto rep = singular_report(named.spec, ns);
        worst_z = std::max(worst_z, std::abs(rep.z_fit.slope + rep.lambda.value()));
        if (is_regular(named.spec))
            lambda_exact = lambda_exact && rep.lambda.value() == 0.5 * named.spec.dim();
    }
    const bool pass = worst_z <= 0.02 && lambda_exact;
    report(8, pass,
           "max|z slope + lambda|=" + fmt(worst_z) + " threshold=0.02 regular lambda exact=" +
               (lambda_exact ? "yes" : "no") + " (10 specs)");
}

void criterion9() {
    const auto ns = rate_grid();
    double worst_mse = 0.0, worst_regular = 0.0;
    for (const auto& named : builtin_spec_library()) {
        const auto rep = singular_report(named.spec, ns);
        worst_mse = std::max(worst_mse, std::abs(rep.mse_fit.slope + rep.mse_rate));
        if (is_regular(named.spec))
            worst_regular = std::max(worst_regular, std::abs(rep.mse_fit.slope + 1.0));
    }
    const bool pass = worst_mse <= 0.05 && worst_regular <= 0.02;
    report(9, pass,
           "max|mse slope + min 1/k|=" + fmt(worst_mse) + " threshold=0.05 regular dev=" +
               fmt(worst_regular) + " threshold=0.02");
}

// ---- criterion 10: Bartlett and third-moment identities ---------------------

void criterion10() {
    double worst = 0.0;
    for (const auto& gp : builtin_theta_grid()) {
        const auto engine = ExpectationEngine::auto_for(*gp.model);
        const auto table = moment_table(*gp.model, gp.theta, engine);
        const auto bart = bartlett_residuals(table, *gp.model, gp.theta, engine);
        worst = std::max(worst, bart.r1.cwiseAbs().maxCoeff());
        worst = std::max(worst, bart.r2.cwiseAbs().maxCoeff());
        worst = std::max(worst, third_moment_identity_residual(table).max_abs());
    }
    const bool pass = worst <= 1e-8;
    report(10, pass, "max residual=" + fmt(worst) + " threshold=1e-08");
}

// ---- criterion 11: null directions of a rank-deficient family ---------------

void criterion11() {
    const auto model = degenerate_sum_gaussian();
    const auto nd = null_directions(*model, vec2(0.3, -0.1));
    double basis_err = 1.0, quad = 1.0;
    if (nd.basis.size() == 1) {
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        basis_err = std::max(std::abs(nd.basis[0][0] - inv_sqrt2),
                             std::abs(nd.basis[0][1] + inv_sqrt2));
        quad = std::abs(nd.verified_quadratic[0]);
    }
    const bool pass = nd.basis.size() == 1 && basis_err <= 1e-8 && quad <= 1e-10;
    report(11, pass,
           "basis count=" + std::to_string(nd.basis.size()) + " |v-(1,-1)/sqrt2|=" +
               fmt(basis_err) + " E[(v.s)^2]=" + fmt(quad) + " threshold=1e-10");
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    guarded(1, criterion1);
    guarded(2, criterion2);
    guarded(3, criterion3);
    guarded(4, criterion4);
    guarded(5, criterion5);
    guarded(6, criterion6);
    guarded(7, criterion7);
    guarded(8, criterion8);
    guarded(9, criterion9);
    guarded(10, criterion10);
    guarded(11, criterion11);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("ACCEPTANCE: %d/11 criteria passed in %.1fs\n", 11 - failures, secs);
    return failures == 0 ? 0 : 1;
}
