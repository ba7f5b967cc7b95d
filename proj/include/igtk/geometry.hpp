#pragma once

#include <Eigen/Dense>

#include "igtk/expectation.hpp"
#include "igtk/model.hpp"
#include "igtk/tensors.hpp"

namespace igtk {

// Fisher metric with inverse and eigen-range. Throws SingularFisher when the
// smallest eigenvalue is below pd_tol relative to the largest.
struct Metric {
    Eigen::MatrixXd g;
    Eigen::MatrixXd g_inv;
    double min_eig = 0.0;
    double max_eig = 0.0;
};
Metric metric(const MomentTable& table, double pd_tol = 1e-10);

// Levi-Civita connection coefficients. Layouts:
// first(i,j,k) = Γ_ij,k (first kind), second(k,i,j) = Γ^k_ij.
struct Christoffels {
    Tensor3 first;
    Tensor3 second;
};
Christoffels christoffel(const MomentTable& table, const Metric& m);

// Full intrinsic snapshot at θ. dg(k,i,j) = ∂_k g_ij (moment identity);
// Riem(i,j,k,l) = g_im R^m_jkl with R^m_jkl = ∂_k Γ^m_lj − ∂_l Γ^m_kj
// + Γ^m_kr Γ^r_lj − Γ^m_lr Γ^r_kj (∂Γ by central differences with one
// Richardson level); Rsharp_ij = g^{kl} R_ikjl.
struct GeometrySnapshot {
    Eigen::VectorXd theta;
    Eigen::MatrixXd g;
    Eigen::MatrixXd g_inv;
    Tensor3 dg;
    Tensor3 Gamma_first;
    Tensor3 Gamma_second;
    Tensor4 Riem;
    Eigen::MatrixXd Rsharp;
    double min_eig_g = 0.0;
    // symmetry-check residuals (not projections)
    double riemann_antisym_residual = 0.0;
    double riemann_pair_residual = 0.0;
    double bianchi_residual = 0.0;
};

// Central-difference step for ∂Γ: h = max(1, ‖θ‖) · eps^(1/3) · scale.
double fd_step(const Eigen::VectorXd& theta, double scale = 1.0);

GeometrySnapshot geometry_snapshot(const ParametricModel& model, const Eigen::VectorXd& theta,
                                   const ExpectationEngine& engine, double pd_tol = 1e-10);

// (∇²ℓ)_ij = U2_ij − Γ^k_ij U1_k.
Eigen::MatrixXd covariant_hessian(const Eigen::MatrixXd& U2, const Eigen::VectorXd& U1,
                                  const Tensor3& Gamma_second);

}  // namespace igtk
