#include "igtk/mc_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "igtk/common.hpp"

namespace igtk {

namespace {

Eigen::VectorXd score_sum(const ParametricModel& model, const std::vector<Eigen::VectorXd>& data,
                          const Eigen::VectorXd& theta) {
    Eigen::VectorXd U = Eigen::VectorXd::Zero(theta.size());
    for (const auto& x : data) U += model.score1(x, theta);
    return U;
}

Eigen::MatrixXd hessian_sum(const ParametricModel& model, const std::vector<Eigen::VectorXd>& data,
                            const Eigen::VectorXd& theta) {
    const int d = static_cast<int>(theta.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
    for (const auto& x : data) H += model.score2(x, theta);
    return H;
}

}  // namespace

MleResult mle_solve(const ParametricModel& model, const std::vector<Eigen::VectorXd>& data,
                    const Eigen::VectorXd& init, const MleControls& controls) {
    MleResult r;
    r.theta_hat = init;
    if (data.empty()) throw InvalidSpec("mle_solve requires nonempty data");
    const double tol = controls.grad_tol * static_cast<double>(data.size());

    if (!model.regular_domain(init)) {
        r.status = MleStatus::DomainExit;
        return r;
    }
    Eigen::VectorXd theta = init;
    Eigen::VectorXd U = score_sum(model, data, theta);
    double unorm = U.norm();

    for (int step = 0; step < controls.max_steps; ++step) {
        if (!std::isfinite(unorm)) {
            r.status = MleStatus::NonConvergence;
            r.theta_hat = theta;
            r.grad_norm = unorm;
            r.steps = step;
            return r;
        }
        if (unorm <= tol) {
            r.status = MleStatus::Converged;
            r.theta_hat = theta;
            r.grad_norm = unorm;
            r.steps = step;
            return r;
        }
        const Eigen::MatrixXd H = hessian_sum(model, data, theta);
        Eigen::VectorXd delta;
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
        if (lu.isInvertible()) {
            delta = -lu.solve(U);
        } else {
            delta = U / (1.0 + unorm);  // ascent fallback when the Hessian degenerates
        }
        if (delta.norm() > controls.max_step_norm)
            delta *= controls.max_step_norm / delta.norm();

        // Damping: halve until the score norm decreases inside the domain. If
        // no fraction of the step decreases ‖U‖ (a hump of ‖U‖ between the
        // iterate and the root), take the largest in-domain step anyway and
        // let the iteration cap decide; pure norm-descent would stall there.
        bool accepted = false;
        bool any_in_domain = false;
        Eigen::VectorXd free_cand;
        double lambda = 1.0;
        for (int bt = 0; bt < 30; ++bt, lambda *= 0.5) {
            const Eigen::VectorXd cand = theta + lambda * delta;
            if (!model.regular_domain(cand)) continue;
            if (!any_in_domain) {
                any_in_domain = true;
                free_cand = cand;
            }
            const Eigen::VectorXd Uc = score_sum(model, data, cand);
            const double cnorm = Uc.norm();
            if (std::isfinite(cnorm) && cnorm < unorm * (1.0 - 1e-4 * lambda)) {
                theta = cand;
                U = Uc;
                unorm = cnorm;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!any_in_domain) {
                r.status = MleStatus::DomainExit;
                r.theta_hat = theta;
                r.grad_norm = unorm;
                r.steps = step;
                return r;
            }
            theta = free_cand;
            U = score_sum(model, data, theta);
            unorm = U.norm();
        }
    }
    r.theta_hat = theta;
    r.grad_norm = unorm;
    r.steps = controls.max_steps;
    r.status = unorm <= tol ? MleStatus::Converged : MleStatus::NonConvergence;
    return r;
}

SimulationResult simulate_covariance(const SimulationPlan& plan) {
    if (!plan.model) throw InvalidSpec("simulation plan has no model");
    if (plan.replicates < 1000) throw InvalidSpec("simulation plan requires replicates >= 1000");
    for (std::size_t i = 1; i < plan.n_grid.size(); ++i)
        if (plan.n_grid[i] <= plan.n_grid[i - 1])
            throw InvalidSpec("n_grid must be strictly increasing");

    const ParametricModel& model = *plan.model;
    const int d = model.dim();
    SimulationResult result;
    result.plan = plan;

    unsigned n_threads = std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;
    n_threads = std::min<unsigned>(n_threads, 16);

    for (std::size_t ni = 0; ni < plan.n_grid.size(); ++ni) {
        const long n = plan.n_grid[ni];
        // Replicates are independent streams keyed by (ni, r), so a static
        // striping over threads reproduces the sequential results exactly.
        Eigen::MatrixXd estimates(plan.replicates, d);
        std::vector<char> converged(static_cast<std::size_t>(plan.replicates), 0);
        std::vector<std::exception_ptr> errors(n_threads);
        auto worker = [&](unsigned slot) {
            try {
                std::vector<Eigen::VectorXd> data(static_cast<std::size_t>(n),
                                                  Eigen::VectorXd(model.space().ambient_dim));
                for (long r = slot; r < plan.replicates; r += n_threads) {
                    RngStream stream(plan.master_seed, ni, static_cast<std::uint64_t>(r));
                    for (long t = 0; t < n; ++t)
                        data[static_cast<std::size_t>(t)] = model.sample(plan.theta_true, stream);
                    const MleResult m = mle_solve(model, data, plan.theta_true, plan.mle);
                    if (m.status == MleStatus::Converged) {
                        estimates.row(r) = m.theta_hat.transpose();
                        converged[static_cast<std::size_t>(r)] = 1;
                    }
                }
            } catch (...) {
                errors[slot] = std::current_exception();
            }
        };
        if (n_threads == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
            for (auto& th : pool) th.join();
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
        Eigen::MatrixXd kept(plan.replicates, d);
        long kept_count = 0;
        long dropped = 0;
        for (long r = 0; r < plan.replicates; ++r) {
            if (converged[static_cast<std::size_t>(r)])
                kept.row(kept_count++) = estimates.row(r);
            else
                ++dropped;
        }

        PerNStats stats;
        stats.n = n;
        stats.dropped = dropped;
        const long R = kept_count;
        if (R < 10) {
            result.valid = false;
            result.invalid_reason = "fewer than 10 converged replicates at n=" + std::to_string(n);
            result.per_n.push_back(std::move(stats));
            continue;
        }
        const Eigen::MatrixXd X = kept.topRows(R);
        const Eigen::VectorXd mean = X.colwise().mean();
        const Eigen::MatrixXd centered = X.rowwise() - mean.transpose();
        const Eigen::MatrixXd S2 = centered.transpose() * centered;  // Σ (θ−mean)(θ−mean)ᵀ
        stats.cov = S2 / static_cast<double>(R - 1);
        stats.bias = mean - plan.theta_true;
        stats.bias_se.resize(d);
        for (int j = 0; j < d; ++j)
            stats.bias_se[j] =
                std::sqrt(stats.cov(j, j) / static_cast<double>(R));

        // Delete-1 jackknife over replicates for the covariance entries.
        const double Rd = static_cast<double>(R);
        Eigen::MatrixXd jack_mean = Eigen::MatrixXd::Zero(d, d);
        Eigen::MatrixXd jack_sq = Eigen::MatrixXd::Zero(d, d);
        for (long r = 0; r < R; ++r) {
            const Eigen::VectorXd row = centered.row(r).transpose();  // θ_r − mean
            // Covariance with replicate r removed, from centered sums:
            // mean_{-r} = mean − row/(R−1);
            // Σ_{-r}(θ−mean_{-r})(θ−mean_{-r})ᵀ = S2 − row rowᵀ R/(R−1).
            const Eigen::MatrixXd C_r =
                (S2 - row * row.transpose() * (Rd / (Rd - 1.0))) / (Rd - 2.0);
            jack_mean += C_r;
            jack_sq += C_r.cwiseProduct(C_r);
        }
        jack_mean /= Rd;
        stats.cov_se.resize(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const double var_jack =
                    (jack_sq(i, j) / Rd - jack_mean(i, j) * jack_mean(i, j)) * (Rd - 1.0);
                stats.cov_se(i, j) = std::sqrt(std::max(0.0, var_jack));
            }

        if (static_cast<double>(dropped) / static_cast<double>(plan.replicates) >
            plan.drop_budget) {
            result.valid = false;
            result.invalid_reason = "drop budget exceeded at n=" + std::to_string(n) + " (" +
                                    std::to_string(dropped) + "/" +
                                    std::to_string(plan.replicates) + ")";
        }
        result.per_n.push_back(std::move(stats));
    }
    return result;
}

FitRecord fit_expansion(const SimulationResult& result, const Eigen::MatrixXd& C1_pred,
                        const Eigen::MatrixXd& C2_pred) {
    const std::size_t G = result.per_n.size();
    if (G < 3) throw IllConditionedFit("fit_expansion requires >= 3 grid points");
    const int d = static_cast<int>(C1_pred.rows());

    FitRecord f;
    f.C1.resize(d, d);
    f.C1_se.resize(d, d);
    f.C2.resize(d, d);
    f.C2_se.resize(d, d);
    f.z1.resize(d, d);
    f.z2.resize(d, d);

    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            // WLS of y = n·cov(n) on [1, 1/n] with jackknife weights.
            Eigen::Matrix2d XtWX = Eigen::Matrix2d::Zero();
            Eigen::Vector2d XtWy = Eigen::Vector2d::Zero();
            double max_w = 0.0, min_w = std::numeric_limits<double>::infinity();
            for (const auto& s : result.per_n) {
                const double nn = static_cast<double>(s.n);
                const double y = nn * s.cov(i, j);
                const double se = std::max(nn * s.cov_se(i, j), 1e-300);
                const double w = 1.0 / (se * se);
                max_w = std::max(max_w, w);
                min_w = std::min(min_w, w);
                Eigen::Vector2d row(1.0, 1.0 / nn);
                XtWX += w * row * row.transpose();
                XtWy += w * row * y;
            }
            const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(XtWX);
            const double emin = es.eigenvalues().minCoeff(), emax = es.eigenvalues().maxCoeff();
            if (!(emin > 0.0) || emax / emin > 1e16 || max_w / min_w > 1e16)
                throw IllConditionedFit("weighted design matrix condition number too large");
            // Condition number of the weighted design W^{1/2}X is sqrt of XtWX's.
            if (std::sqrt(emax / emin) > 1e8)
                throw IllConditionedFit("weighted design matrix condition number exceeds 1e8");
            const Eigen::Matrix2d cov_params = XtWX.inverse();
            const Eigen::Vector2d beta = cov_params * XtWy;
            f.C1(i, j) = beta[0];
            f.C2(i, j) = beta[1];
            f.C1_se(i, j) = std::sqrt(std::max(0.0, cov_params(0, 0)));
            f.C2_se(i, j) = std::sqrt(std::max(0.0, cov_params(1, 1)));
            f.z1(i, j) = (beta[0] - C1_pred(i, j)) / std::max(f.C1_se(i, j), 1e-300);
            f.z2(i, j) = (beta[1] - C2_pred(i, j)) / std::max(f.C2_se(i, j), 1e-300);
            f.max_abs_z = std::max({f.max_abs_z, std::abs(f.z1(i, j)), std::abs(f.z2(i, j))});
        }
    return f;
}

FitRecord fit_expansion(const SimulationResult& result, const CorrectionReport& prediction,
                        const Eigen::MatrixXd& I_user) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(I_user);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw SingularFisher(es.eigenvalues().minCoeff(), "metric not positive definite");
    const Eigen::MatrixXd I_inv = es.eigenvectors() *
                                  es.eigenvalues().cwiseInverse().asDiagonal() *
                                  es.eigenvectors().transpose();
    return fit_expansion(result, I_inv, I_inv * prediction.P_user * I_inv);
}

}  // namespace igtk
