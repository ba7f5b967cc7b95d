#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "igtk/rng.hpp"
#include "igtk/tensors.hpp"

namespace igtk {

enum class SpaceKind { RealLine, NonnegIntegers, FiniteSet, RealVector };
enum class WeightHint { Gaussian, HeavyTailed, Discrete };

// Describes the sample space and which quadrature family fits it.
struct SampleSpace {
    SpaceKind kind = SpaceKind::RealLine;
    WeightHint weight_hint = WeightHint::Gaussian;
    int ambient_dim = 1;                  // length of a sample point vector
    std::vector<double> finite_support;   // populated when kind == FiniteSet
};

// A dominated parametric family with analytic log-density derivatives in θ
// up to order 3 and an exact sampler. Sample points are dense vectors of
// length space().ambient_dim (integer-valued samples are stored as doubles).
class ParametricModel {
public:
    virtual ~ParametricModel() = default;

    virtual std::string name() const = 0;
    virtual int dim() const = 0;  // parameter dimension d
    virtual const SampleSpace& space() const = 0;

    virtual double logp(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const = 0;
    virtual Eigen::VectorXd score1(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const = 0;
    virtual Eigen::MatrixXd score2(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const = 0;
    virtual Tensor3 score3(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const = 0;

    virtual Eigen::VectorXd sample(const Eigen::VectorXd& theta, RngStream& rng) const = 0;
    virtual bool regular_domain(const Eigen::VectorXd& theta) const = 0;

    // Location used to center quadrature rules: the mean for Gaussian-weight
    // spaces, the symmetry center for heavy-tailed ones. Unused for discrete.
    virtual Eigen::VectorXd quadrature_center(const Eigen::VectorXd& theta) const;
};

using ModelPtr = std::shared_ptr<const ParametricModel>;

}  // namespace igtk
