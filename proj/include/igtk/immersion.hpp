#pragma once

#include <Eigen/Dense>

#include "igtk/expectation.hpp"
#include "igtk/geometry.hpp"
#include "igtk/tensors.hpp"

namespace igtk {

// Extrinsic data of the square-root-density immersion ψ = √p, derived purely
// from MomentTable algebra (∂_iψ = ½ s_i ψ, ∂_i∂_jψ = (½ s_ij + ¼ s_i s_j)ψ):
//   GramE_ij   = ⟨e_i, e_j⟩     = ¼ g_ij
//   GramMix_ijk = ⟨e_ij, e_k⟩   = ¼ Ge_ijk + ⅛ T_ijk
//   GramH_ijkl = ⟨e_ij, e_kl⟩   = ¼ Q + ⅛ M_ijkl + ⅛ M_klij + 1/16 F
//   radial_ij  = ⟨e_ij, ψ⟩      = −¼ g_ij
//   GramII_ijkl = ⟨II_ij, II_kl⟩ = GramH − 4 g^{ab} GramMix_ija GramMix_klb
//   Ssharp_ij  = g^{kl} GramII_ikjl,  kappa_sq = g^{ik} g^{jl} GramII_ijkl
struct ImmersionReport {
    Eigen::VectorXd theta;
    Eigen::MatrixXd GramE;
    Tensor3 GramMix;
    Tensor4 GramH;
    Eigen::MatrixXd radial;
    Tensor4 GramII;
    Eigen::MatrixXd Ssharp;
    double kappa_sq = 0.0;
    double min_eig_GramII = 0.0;  // as a form on symmetric index pairs
};

// Fills GramE, GramMix, GramH, radial (pure algebra, no integration).
ImmersionReport ambient_grams(const MomentTable& table);
// GramII from the tangential projection; requires positive-definite g.
void sff_gram(ImmersionReport& report, const Eigen::MatrixXd& g_inv);
// Ssharp and kappa_sq contractions.
void s_sharp(ImmersionReport& report, const Eigen::MatrixXd& g_inv);
// One-call convenience: all of the above.
ImmersionReport immersion_report(const MomentTable& table, const Metric& m);

// residual_ijkl = Riem_ijkl − 4 (GramII_ikjl − GramII_iljk).
Tensor4 gauss_residual(const Tensor4& Riem, const Tensor4& GramII);

// Classical one-parameter statistical curvature of the curved-Gaussian family
// with mean (θ, θ²): γ²(θ) = 4 / (1 + 4θ²)³. Reported alongside kappa_sq as a
// diagnostic ratio; the two are related but not equal.
double efron_gamma_sq_curved_gaussian(double theta);

// Smallest eigenvalue of a rank-4 tensor viewed as a symmetric matrix on the
// d(d+1)/2 symmetric index pairs (off-diagonal pairs weighted √2).
double min_eig_sym_pairs(const Tensor4& t);

}  // namespace igtk
