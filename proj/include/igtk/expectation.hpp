#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "igtk/model.hpp"
#include "igtk/tensors.hpp"

namespace igtk {

// Quadrature / Monte Carlo engine for expectations under p_θ. Every result
// carries a nonnegative error estimate.
struct ExpectationEngine {
    enum class Method { GaussHermite, AdaptiveGrid, DiscreteSum, MonteCarlo };

    Method method = Method::GaussHermite;
    // GaussHermite
    int order = 24;
    // AdaptiveGrid
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double truncation = 1e-10;
    // DiscreteSum
    double tail_tol = 1e-12;
    // MonteCarlo
    long samples = 100000;
    std::uint64_t seed = 0;

    static ExpectationEngine gauss_hermite(int order);
    static ExpectationEngine adaptive_grid(double abs_tol = 1e-10, double rel_tol = 1e-8,
                                           double truncation = 1e-10);
    static ExpectationEngine discrete_sum(double tail_tol = 1e-12);
    static ExpectationEngine monte_carlo(long samples, std::uint64_t seed);
    // Default engine for a model's sample space.
    static ExpectationEngine auto_for(const ParametricModel& model);

    std::string describe() const;
};

// E[f(x)] for vector-valued f; value plus componentwise-max error estimate.
struct IntegralResult {
    Eigen::VectorXd value;
    double err = 0.0;
};
IntegralResult integrate(const ParametricModel& model, const Eigen::VectorXd& theta,
                         const ExpectationEngine& engine, int out_dim,
                         const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& f);

// All score-product moments at θ. Layouts: T(i,j,k)=E[s_i s_j s_k];
// Ge(i,j,k)=E[s_ij s_k]; kappa(i,j,k)=E[s_ijk]; Q(i,j,k,l)=E[s_ij s_kl];
// M(i,j,k,l)=E[s_ij s_k s_l]; F(i,j,k,l)=E[s_i s_j s_k s_l]. Es1 and Es2 are
// the raw first/second score means kept for the Bartlett residuals.
struct MomentTable {
    Eigen::VectorXd theta;
    Eigen::MatrixXd g;
    Tensor3 T, Ge, kappa;
    Tensor4 Q, M, F;
    Eigen::VectorXd Es1;
    Eigen::MatrixXd Es2;
    double err = 0.0;

    int dim() const { return static_cast<int>(theta.size()); }
};

// Integrates every entry in one pass, then enforces the exact symmetry group
// of each tensor (full for T, kappa, F; pair (i,j) for Ge; pairs and pair
// swap for Q; pairs for M).
MomentTable moment_table(const ParametricModel& model, const Eigen::VectorXd& theta,
                         const ExpectationEngine& engine);

// r1_i = E[s_i], r2_ij = g_ij + E[s_ij]; both vanish for correctly normalized
// families. E[s_i] and E[s_ij] are re-integrated with the supplied engine.
struct BartlettResiduals {
    Eigen::VectorXd r1;
    Eigen::MatrixXd r2;
    double err = 0.0;
};
BartlettResiduals bartlett_residuals(const MomentTable& table, const ParametricModel& model,
                                     const Eigen::VectorXd& theta, const ExpectationEngine& engine);

// r_ijk = kappa_ijk + Ge_ijk + Ge_ikj + Ge_jki + T_ijk (zero in exact
// arithmetic for any dominated family).
Tensor3 third_moment_identity_residual(const MomentTable& table);

// ∂_k g_ij assembled from moments alone: Ge_ikj + Ge_jki + T_ijk.
// Layout dg(k,i,j) = ∂_k g_ij.
Tensor3 metric_derivative_from_moments(const MomentTable& table);

}  // namespace igtk
