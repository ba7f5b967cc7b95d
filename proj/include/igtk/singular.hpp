#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igtk/expectation.hpp"
#include "igtk/model.hpp"

namespace igtk {

// Resolved additive normal-crossing data: K̃(u) = Σ_j c_j u_j^{2k_j} on the
// box [−ε, ε]^d with Jacobian factor Π_j |u_j|^{h_j} and prior value ψ(0).
struct NormalCrossingTerm {
    double c = 1.0;
    int k = 1;
    int h = 0;
};

struct NormalCrossingSpec {
    std::vector<NormalCrossingTerm> terms;
    double epsilon = 1.0;
    double psi0 = 1.0;

    int dim() const { return static_cast<int>(terms.size()); }
    void validate() const;  // throws InvalidSpec
};

// Exact rational value with reduced numerator/denominator.
struct Rational {
    long long num = 0;
    long long den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};
Rational rational_sum(const std::vector<Rational>& parts);

// λ = Σ_j (h_j + 1) / (2 k_j), exact rational arithmetic.
Rational rlct(const NormalCrossingSpec& spec);

// A = (1/k) · c^{−(h+1)/(2k)} · Γ((h+1)/(2k)): the infinite-domain constant
// of one coordinate factor.
double a_constant(double c, int k, int h);

// z_n = ψ(0) · Π_j 2∫₀^ε u^{h_j} exp(−n c_j u^{2k_j}) du, each factor by
// adaptive quadrature after rescaling t = u (n c)^{1/(2k)}; relative error
// ≤ 1e-10 uniformly in n.
double z_n(const NormalCrossingSpec& spec, double n);

// E_posterior[Σ_j b_j u_j²] = Σ_j b_j · (u_j²-inserted factor / plain factor).
double posterior_mse(const NormalCrossingSpec& spec, double n, const std::vector<double>& b);

// Least-squares slope of log(value) vs log(n). Requires ≥ 4 points spanning
// ≥ 3 decades; residual is the RMS of log-scale fit residuals.
struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
};
RateFit fit_rate(const std::vector<double>& ns, const std::vector<double>& values);

// G_jj(u) = 2k_j(2k_j−1) c_j u_j^{2k_j−2}, Γ^j_jj = (k_j−1)/u_j. Throws
// OnSingularStratum when any u_j = 0.
struct ResolvedGeometry {
    Eigen::VectorXd G_diag;
    Eigen::VectorXd Gamma_jjj;
};
ResolvedGeometry resolved_geometry(const NormalCrossingSpec& spec, const Eigen::VectorXd& u);

// Tangent-cone data of a nonnegative function K with K(θ₀) = 0: leading even
// order 2k, leading homogeneous part Φ along the requested directions, and
// G(v,w) = ½[Φ(v+w) − Φ(v) − Φ(w)]. Φ(y) is extracted as lim K(θ₀+ty)/t^2k.
struct TangentCone {
    int order = 0;  // 2k
    double phi_v = 0.0;
    double phi_w = 0.0;
    double phi_vw = 0.0;  // Φ(v+w)
    double G = 0.0;
};
TangentCone tangent_cone(const std::function<double(const Eigen::VectorXd&)>& K,
                         const Eigen::VectorXd& theta0, const Eigen::VectorXd& v,
                         const Eigen::VectorXd& w);

// Orthonormal basis of ker I(θ) (eigenvalue cutoff 1e-8·λ_max), each vector
// sign-normalized and verified by directly integrating E[(v·s)²].
struct NullDirections {
    std::vector<Eigen::VectorXd> basis;
    std::vector<double> verified_quadratic;  // E[(v·s)²] per basis vector
};
NullDirections null_directions(const ParametricModel& model, const Eigen::VectorXd& theta,
                               const ExpectationEngine& engine);
NullDirections null_directions(const ParametricModel& model, const Eigen::VectorXd& theta);

// Full report over an n-grid.
struct SingularReport {
    NormalCrossingSpec spec;
    Rational lambda;
    double mse_rate = 0.0;  // min_j 1/k_j
    std::vector<double> n_grid;
    std::vector<double> z_values;
    std::vector<double> mse_values;
    RateFit z_fit;
    RateFit mse_fit;
    std::vector<double> a_constants;
};
SingularReport singular_report(const NormalCrossingSpec& spec, const std::vector<double>& n_grid,
                               const std::vector<double>& b = {});

// The 10-spec library used by the rate-validation sweeps (k_j ∈ {1,2,3},
// h_j ∈ {0,1,2}; regular specs are all-k=1, h=0).
struct NamedSpec {
    std::string name;
    NormalCrossingSpec spec;
};
std::vector<NamedSpec> builtin_spec_library();

}  // namespace igtk
