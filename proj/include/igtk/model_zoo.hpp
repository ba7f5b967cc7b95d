#pragma once

#include <functional>
#include <string>
#include <vector>

#include "igtk/model.hpp"

namespace igtk {

// Built-in models. gaussian_mean(d): N(θ, I_d). poisson(): mean-parameterized
// Poisson. bernoulli(): success probability θ. curved_gaussian_efron():
// bivariate N((θ, θ²), I). graph_surface_gaussian(): trivariate
// N((θ₁, θ₂, ½|θ|²), I). cauchy_location(): Cauchy(θ, 1).
// degenerate_sum_gaussian(): bivariate N((θ₁+θ₂, θ₁+θ₂), I), rank-1 Fisher.
ModelPtr gaussian_mean(int d);
ModelPtr poisson();
ModelPtr bernoulli();
ModelPtr curved_gaussian_efron();
ModelPtr graph_surface_gaussian();
ModelPtr cauchy_location();
ModelPtr degenerate_sum_gaussian();

// Registry lookup by name: "gaussian-mean" (takes dim), "poisson",
// "bernoulli", "curved-gaussian-efron", "graph-surface-gaussian",
// "cauchy-location", "degenerate-sum-gaussian".
ModelPtr model_by_name(const std::string& name, int dim = 1);
std::vector<std::string> builtin_model_names();

// All regular built-ins (positive-definite Fisher on their θ grids), paired
// with representative θ points inside regular_domain, for sweep-style checks.
struct GridPoint {
    ModelPtr model;
    Eigen::VectorXd theta;
};
std::vector<GridPoint> builtin_theta_grid();

// Max relative error of analytic scores vs central finite differences of
// logp, per derivative order, over `trials` randomized (x, θ) draws.
struct DerivativeCheck {
    double max_err1 = 0.0;
    double max_err2 = 0.0;
    double max_err3 = 0.0;
    bool ok = false;  // all orders below the 1e-4 failure threshold
};
DerivativeCheck check_derivatives(const ParametricModel& model, const Eigen::VectorXd& theta,
                                  int trials, std::uint64_t seed);

// n i.i.d. draws; deterministic given (θ, n, stream state).
std::vector<Eigen::VectorXd> sample_batch(const ParametricModel& model,
                                          const Eigen::VectorXd& theta, long n, RngStream stream);

// Base model viewed through a quadratic chart θ = θ₀ + B u + ½ C[u,u]
// (C symmetric in its two lower indices, layout C(i,a,b) = ∂²θ^i/∂u^a∂u^b).
// Scores transform by the exact chain rule; the u-origin maps to θ₀.
class QuadraticReparamModel : public ParametricModel {
public:
    QuadraticReparamModel(ModelPtr base, Eigen::VectorXd theta0, Eigen::MatrixXd B, Tensor3 C);

    std::string name() const override;
    int dim() const override;
    const SampleSpace& space() const override;
    double logp(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
    Eigen::VectorXd score1(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
    Eigen::MatrixXd score2(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
    Tensor3 score3(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const override;
    Eigen::VectorXd sample(const Eigen::VectorXd& u, RngStream& rng) const override;
    bool regular_domain(const Eigen::VectorXd& u) const override;
    Eigen::VectorXd quadrature_center(const Eigen::VectorXd& u) const override;

    Eigen::VectorXd map(const Eigen::VectorXd& u) const;       // θ(u)
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& u) const;  // ∂θ/∂u

private:
    ModelPtr base_;
    Eigen::VectorXd theta0_;
    Eigen::MatrixXd B_;
    Tensor3 C_;
};

}  // namespace igtk
