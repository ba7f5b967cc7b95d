#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igtk/correction.hpp"
#include "igtk/model.hpp"

namespace igtk {

// Damped-Newton controls for the score-root solve. grad_tol applies to the
// mean score, i.e. convergence requires ‖Σ_t s(x_t, θ̂)‖ ≤ n · grad_tol.
struct MleControls {
    int max_steps = 60;
    double grad_tol = 1e-9;
    double max_step_norm = 1.0;
};

enum class MleStatus { Converged, NonConvergence, DomainExit };

struct MleResult {
    MleStatus status = MleStatus::NonConvergence;
    Eigen::VectorXd theta_hat;
    double grad_norm = 0.0;
    int steps = 0;
};

MleResult mle_solve(const ParametricModel& model, const std::vector<Eigen::VectorXd>& data,
                    const Eigen::VectorXd& init, const MleControls& controls);

struct SimulationPlan {
    ModelPtr model;
    Eigen::VectorXd theta_true;
    std::vector<long> n_grid;   // strictly increasing
    long replicates = 1000;     // ≥ 1000
    std::uint64_t master_seed = 0;
    MleControls mle;
    double drop_budget = 1e-3;  // max dropped/replicates before invalidation
};

struct PerNStats {
    long n = 0;
    Eigen::MatrixXd cov;        // empirical covariance of θ̂ (mean-subtracted)
    Eigen::MatrixXd cov_se;     // delete-1 jackknife SE per covariance entry
    Eigen::VectorXd bias;       // mean(θ̂) − θ_true
    Eigen::VectorXd bias_se;
    long dropped = 0;
};

struct FitRecord {
    Eigen::MatrixXd C1, C1_se;
    Eigen::MatrixXd C2, C2_se;
    Eigen::MatrixXd z1;         // (Ĉ1 − I⁻¹) / SE, entrywise
    Eigen::MatrixXd z2;         // (Ĉ2 − I⁻¹PI⁻¹) / SE, entrywise
    double max_abs_z = 0.0;
};

struct SimulationResult {
    SimulationPlan plan;
    std::vector<PerNStats> per_n;
    bool valid = true;
    std::string invalid_reason;
};

// Deterministic given the master seed: replicate r at grid index ni uses the
// counter-based substream keyed (master_seed, ni, r). Covariance, not MSE;
// bias reported separately.
SimulationResult simulate_covariance(const SimulationPlan& plan);

// Entrywise weighted least squares of n·Cov(n) = C1 + C2/n with jackknife
// weights; z-scores against the prediction's I⁻¹ and I⁻¹ P_user I⁻¹.
// Throws IllConditionedFit when the weighted design is degenerate.
FitRecord fit_expansion(const SimulationResult& result, const Eigen::MatrixXd& C1_pred,
                        const Eigen::MatrixXd& C2_pred);
FitRecord fit_expansion(const SimulationResult& result, const CorrectionReport& prediction,
                        const Eigen::MatrixXd& I_user);

}  // namespace igtk
