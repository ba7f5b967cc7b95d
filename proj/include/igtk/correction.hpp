#pragma once

#include <Eigen/Dense>

#include "igtk/expectation.hpp"
#include "igtk/geometry.hpp"
#include "igtk/immersion.hpp"

namespace igtk {

// Γ-killing quadratic chart θ(u) = θ₀ + A u + ½ Hq[u,u] with A = g^{-1/2}
// (symmetric principal square root) and Hq^i_ab = −Γ^i_jk A^j_a A^k_b.
// Layout Hq(i,a,b). The pulled-back metric at u=0 is the identity and the
// pulled-back Christoffels vanish there.
struct NormalChart {
    Eigen::VectorXd theta0;
    Eigen::MatrixXd A;
    Eigen::MatrixXd A_inv;
    Tensor3 Hq;

    Eigen::VectorXd map(const Eigen::VectorXd& u) const;       // θ(u)
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& u) const;  // A + Hq·u
};

NormalChart build_normal_chart(const GeometrySnapshot& snapshot);

// Exact chain-rule transport of every moment into chart coordinates
// (s'_a = J s, s'_ab = JJ s₂ + Hq s₁, s'_abc = JJJ s₃ + (Hq J sym) s₂ at
// u = 0); linear combinations of base-table entries, no re-integration.
MomentTable pushforward_moments(const MomentTable& table, const NormalChart& chart);

// P in chart coordinates, full form:
// P_ij = g^{km}(Q_ikjm − g_ik g_jm) + Γ̂^m_ik Γ̂^k_jm + Γ̂^k_ik Γ̂^m_jm
//      + ¼ κ_ikl κ_jrs (g^{kl}g^{rs} + g^{kr}g^{ls} + g^{ks}g^{lr})
//      + ½ κ_jrs (Γ̂^k_ik g^{rs} + Γ̂^r_ik g^{ks} + Γ̂^s_ik g^{kr})
//      + ½ κ_ikl (Γ̂^m_jm g^{kl} + Γ̂^k_jm g^{ml} + Γ̂^l_jm g^{mk}),
// with Γ̂^m_ik = g^{ml} Ge_ikl and indices raised by the chart metric inverse.
Eigen::MatrixXd p_tensor_full(const MomentTable& moments_nc);

// Reduced form, valid under the chart tangency conditions Ge' = −½T',
// κ' = +½T' (residuals ≤ tangency_tol, else TangencyViolation):
// P_ij = Σ_k Q_ikjk − δ_ij − ½ κ_ikl κ_jkl + ¼ κ_irr κ_jss.
Eigen::MatrixXd p_tensor_reduced(const MomentTable& moments_nc, double tangency_tol = 1e-6);

struct CorrectionReport {
    Eigen::VectorXd theta0;
    NormalChart chart;
    MomentTable moments_nc;
    Eigen::MatrixXd P_nc;
    Eigen::MatrixXd P_user;
    Eigen::MatrixXd Rsharp_user;
    Eigen::MatrixXd Ssharp_user;
    Eigen::MatrixXd D_user;
    double full_vs_reduced = 0.0;
    double tangency_residual_e = 0.0;      // max |Ge' + ½T'|
    double tangency_residual_kappa = 0.0;  // max |κ' − ½T'|
};

// P_user = A⁻ᵀ P_nc A⁻¹ (transport as a (0,2)-tensor by the chart's linear
// part); D_user = P_user − ½ Rsharp_user − Ssharp_user.
CorrectionReport decompose(const Eigen::MatrixXd& P_nc, const NormalChart& chart,
                           const Eigen::MatrixXd& Rsharp_user, const Eigen::MatrixXd& Ssharp_user);

// Full pipeline at θ: snapshot → immersion → chart → pushforward → P (full
// and reduced) → decomposition.
CorrectionReport correction_report(const ParametricModel& model, const Eigen::VectorXd& theta,
                                   const ExpectationEngine& engine);

// C(n) = I⁻¹/n + I⁻¹ P_user I⁻¹ / n².
Eigen::MatrixXd predict_covariance(const CorrectionReport& report, const Eigen::MatrixXd& I,
                                   long n);

}  // namespace igtk
