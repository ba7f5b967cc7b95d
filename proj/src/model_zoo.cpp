#include "igtk/model_zoo.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "igtk/common.hpp"

namespace igtk {

Eigen::VectorXd ParametricModel::quadrature_center(const Eigen::VectorXd& theta) const {
    (void)theta;
    throw DomainError("model '" + name() + "' does not define a quadrature center");
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Unit-covariance Gaussian with mean map μ(θ); all built-in curved families
// here have vanishing third derivative of μ, which the score formulas assume.
class GaussianMeanMapModel : public ParametricModel {
public:
    GaussianMeanMapModel(int param_dim, int ambient_dim) : d_(param_dim) {
        space_.kind = ambient_dim == 1 ? SpaceKind::RealLine : SpaceKind::RealVector;
        space_.weight_hint = WeightHint::Gaussian;
        space_.ambient_dim = ambient_dim;
    }

    int dim() const override { return d_; }
    const SampleSpace& space() const override { return space_; }

    virtual Eigen::VectorXd mean(const Eigen::VectorXd& theta) const = 0;
    // dmean: m×d Jacobian ∂μ_a/∂θ_i; d2mean: per ambient coordinate a, the
    // d×d Hessian of μ_a.
    virtual Eigen::MatrixXd dmean(const Eigen::VectorXd& theta) const = 0;
    virtual std::vector<Eigen::MatrixXd> d2mean(const Eigen::VectorXd& theta) const = 0;

    double logp(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        const Eigen::VectorXd r = x - mean(theta);
        return -0.5 * r.squaredNorm() - 0.5 * space_.ambient_dim * kLog2Pi;
    }

    Eigen::VectorXd score1(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        const Eigen::VectorXd r = x - mean(theta);
        return dmean(theta).transpose() * r;
    }

    Eigen::MatrixXd score2(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        const Eigen::VectorXd r = x - mean(theta);
        const Eigen::MatrixXd J = dmean(theta);
        Eigen::MatrixXd out = -J.transpose() * J;
        const auto H = d2mean(theta);
        for (int a = 0; a < space_.ambient_dim; ++a) out += r[a] * H[a];
        return out;
    }

    Tensor3 score3(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        (void)x;
        const Eigen::MatrixXd J = dmean(theta);
        const auto H = d2mean(theta);
        Tensor3 out(d_);
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j)
                for (int k = 0; k < d_; ++k) {
                    double v = 0.0;
                    for (int a = 0; a < space_.ambient_dim; ++a)
                        v -= J(a, i) * H[a](j, k) + J(a, j) * H[a](i, k) + J(a, k) * H[a](i, j);
                    out(i, j, k) = v;
                }
        return out;
    }

    Eigen::VectorXd sample(const Eigen::VectorXd& theta, RngStream& rng) const override {
        Eigen::VectorXd x = mean(theta);
        for (int a = 0; a < space_.ambient_dim; ++a) x[a] += rng.next_gauss();
        return x;
    }

    Eigen::VectorXd quadrature_center(const Eigen::VectorXd& theta) const override {
        return mean(theta);
    }

protected:
    int d_;
    SampleSpace space_;
};

class GaussianMeanModel final : public GaussianMeanMapModel {
public:
    explicit GaussianMeanModel(int d) : GaussianMeanMapModel(d, d) {}
    std::string name() const override {
        return "gaussian-mean(" + std::to_string(d_) + ")";
    }
    Eigen::VectorXd mean(const Eigen::VectorXd& theta) const override { return theta; }
    Eigen::MatrixXd dmean(const Eigen::VectorXd&) const override {
        return Eigen::MatrixXd::Identity(d_, d_);
    }
    std::vector<Eigen::MatrixXd> d2mean(const Eigen::VectorXd&) const override {
        return std::vector<Eigen::MatrixXd>(d_, Eigen::MatrixXd::Zero(d_, d_));
    }
    bool regular_domain(const Eigen::VectorXd&) const override { return true; }
};

class CurvedGaussianEfronModel final : public GaussianMeanMapModel {
public:
    CurvedGaussianEfronModel() : GaussianMeanMapModel(1, 2) {}
    std::string name() const override { return "curved-gaussian-efron"; }
    Eigen::VectorXd mean(const Eigen::VectorXd& theta) const override {
        Eigen::VectorXd m(2);
        m << theta[0], theta[0] * theta[0];
        return m;
    }
    Eigen::MatrixXd dmean(const Eigen::VectorXd& theta) const override {
        Eigen::MatrixXd J(2, 1);
        J << 1.0, 2.0 * theta[0];
        return J;
    }
    std::vector<Eigen::MatrixXd> d2mean(const Eigen::VectorXd&) const override {
        std::vector<Eigen::MatrixXd> H(2, Eigen::MatrixXd::Zero(1, 1));
        H[1](0, 0) = 2.0;
        return H;
    }
    bool regular_domain(const Eigen::VectorXd&) const override { return true; }
};

class GraphSurfaceGaussianModel final : public GaussianMeanMapModel {
public:
    GraphSurfaceGaussianModel() : GaussianMeanMapModel(2, 3) {}
    std::string name() const override { return "graph-surface-gaussian"; }
    Eigen::VectorXd mean(const Eigen::VectorXd& theta) const override {
        Eigen::VectorXd m(3);
        m << theta[0], theta[1], 0.5 * theta.squaredNorm();
        return m;
    }
    Eigen::MatrixXd dmean(const Eigen::VectorXd& theta) const override {
        Eigen::MatrixXd J(3, 2);
        J << 1.0, 0.0, 0.0, 1.0, theta[0], theta[1];
        return J;
    }
    std::vector<Eigen::MatrixXd> d2mean(const Eigen::VectorXd&) const override {
        std::vector<Eigen::MatrixXd> H(3, Eigen::MatrixXd::Zero(2, 2));
        H[2] = Eigen::MatrixXd::Identity(2, 2);
        return H;
    }
    bool regular_domain(const Eigen::VectorXd&) const override { return true; }
};

class DegenerateSumGaussianModel final : public GaussianMeanMapModel {
public:
    DegenerateSumGaussianModel() : GaussianMeanMapModel(2, 2) {}
    std::string name() const override { return "degenerate-sum-gaussian"; }
    Eigen::VectorXd mean(const Eigen::VectorXd& theta) const override {
        const double m = theta[0] + theta[1];
        Eigen::VectorXd out(2);
        out << m, m;
        return out;
    }
    Eigen::MatrixXd dmean(const Eigen::VectorXd&) const override {
        return Eigen::MatrixXd::Ones(2, 2);
    }
    std::vector<Eigen::MatrixXd> d2mean(const Eigen::VectorXd&) const override {
        return std::vector<Eigen::MatrixXd>(2, Eigen::MatrixXd::Zero(2, 2));
    }
    bool regular_domain(const Eigen::VectorXd&) const override { return false; }
};

class PoissonModel final : public ParametricModel {
public:
    PoissonModel() {
        space_.kind = SpaceKind::NonnegIntegers;
        space_.weight_hint = WeightHint::Discrete;
        space_.ambient_dim = 1;
    }
    std::string name() const override { return "poisson"; }
    int dim() const override { return 1; }
    const SampleSpace& space() const override { return space_; }
    double logp(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        return x[0] * std::log(theta[0]) - theta[0] - std::lgamma(x[0] + 1.0);
    }
    Eigen::VectorXd score1(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        return Eigen::VectorXd::Constant(1, x[0] / theta[0] - 1.0);
    }
    Eigen::MatrixXd score2(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        return Eigen::MatrixXd::Constant(1, 1, -x[0] / (theta[0] * theta[0]));
    }
    Tensor3 score3(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        Tensor3 t(1);
        t(0, 0, 0) = 2.0 * x[0] / (theta[0] * theta[0] * theta[0]);
        return t;
    }
    Eigen::VectorXd sample(const Eigen::VectorXd& theta, RngStream& rng) const override {
        return Eigen::VectorXd::Constant(1, static_cast<double>(rng.next_poisson(theta[0])));
    }
    bool regular_domain(const Eigen::VectorXd& theta) const override { return theta[0] > 0.0; }

private:
    SampleSpace space_;
};

class BernoulliModel final : public ParametricModel {
public:
    BernoulliModel() {
        space_.kind = SpaceKind::FiniteSet;
        space_.weight_hint = WeightHint::Discrete;
        space_.ambient_dim = 1;
        space_.finite_support = {0.0, 1.0};
    }
    std::string name() const override { return "bernoulli"; }
    int dim() const override { return 1; }
    const SampleSpace& space() const override { return space_; }
    double logp(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        return x[0] * std::log(theta[0]) + (1.0 - x[0]) * std::log(1.0 - theta[0]);
    }
    Eigen::VectorXd score1(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        return Eigen::VectorXd::Constant(1, x[0] / theta[0] - (1.0 - x[0]) / (1.0 - theta[0]));
    }
    Eigen::MatrixXd score2(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        const double t = theta[0];
        return Eigen::MatrixXd::Constant(1, 1,
                                         -x[0] / (t * t) - (1.0 - x[0]) / ((1.0 - t) * (1.0 - t)));
    }
    Tensor3 score3(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        const double t = theta[0];
        Tensor3 out(1);
        out(0, 0, 0) =
            2.0 * x[0] / (t * t * t) - 2.0 * (1.0 - x[0]) / ((1.0 - t) * (1.0 - t) * (1.0 - t));
        return out;
    }
    Eigen::VectorXd sample(const Eigen::VectorXd& theta, RngStream& rng) const override {
        return Eigen::VectorXd::Constant(1, static_cast<double>(rng.next_bernoulli(theta[0])));
    }
    bool regular_domain(const Eigen::VectorXd& theta) const override {
        return theta[0] > 0.0 && theta[0] < 1.0;
    }

private:
    SampleSpace space_;
};

class CauchyLocationModel final : public ParametricModel {
public:
    CauchyLocationModel() {
        space_.kind = SpaceKind::RealLine;
        space_.weight_hint = WeightHint::HeavyTailed;
        space_.ambient_dim = 1;
    }
    std::string name() const override { return "cauchy-location"; }
    int dim() const override { return 1; }
    const SampleSpace& space() const override { return space_; }
    double logp(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        const double u = x[0] - theta[0];
        return -std::log(std::numbers::pi) - std::log1p(u * u);
    }
    Eigen::VectorXd score1(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        const double u = x[0] - theta[0];
        return Eigen::VectorXd::Constant(1, 2.0 * u / (1.0 + u * u));
    }
    Eigen::MatrixXd score2(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        const double u = x[0] - theta[0];
        const double w = 1.0 + u * u;
        return Eigen::MatrixXd::Constant(1, 1, (2.0 * u * u - 2.0) / (w * w));
    }
    Tensor3 score3(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const override {
        const double u = x[0] - theta[0];
        const double w = 1.0 + u * u;
        Tensor3 out(1);
        out(0, 0, 0) = (4.0 * u * u * u - 12.0 * u) / (w * w * w);
        return out;
    }
    Eigen::VectorXd sample(const Eigen::VectorXd& theta, RngStream& rng) const override {
        return Eigen::VectorXd::Constant(1, rng.next_cauchy(theta[0]));
    }
    bool regular_domain(const Eigen::VectorXd&) const override { return true; }
    Eigen::VectorXd quadrature_center(const Eigen::VectorXd& theta) const override {
        return theta;
    }

private:
    SampleSpace space_;
};

}  // namespace

ModelPtr gaussian_mean(int d) {
    if (d < 1) throw InvalidSpec("gaussian-mean requires dim >= 1");
    return std::make_shared<GaussianMeanModel>(d);
}
ModelPtr poisson() { return std::make_shared<PoissonModel>(); }
ModelPtr bernoulli() { return std::make_shared<BernoulliModel>(); }
ModelPtr curved_gaussian_efron() { return std::make_shared<CurvedGaussianEfronModel>(); }
ModelPtr graph_surface_gaussian() { return std::make_shared<GraphSurfaceGaussianModel>(); }
ModelPtr cauchy_location() { return std::make_shared<CauchyLocationModel>(); }
ModelPtr degenerate_sum_gaussian() { return std::make_shared<DegenerateSumGaussianModel>(); }

ModelPtr model_by_name(const std::string& name, int dim) {
    if (name == "gaussian-mean") return gaussian_mean(dim);
    if (name == "poisson") return poisson();
    if (name == "bernoulli") return bernoulli();
    if (name == "curved-gaussian-efron") return curved_gaussian_efron();
    if (name == "graph-surface-gaussian") return graph_surface_gaussian();
    if (name == "cauchy-location") return cauchy_location();
    if (name == "degenerate-sum-gaussian") return degenerate_sum_gaussian();
    throw InvalidSpec("unknown model '" + name + "'");
}

std::vector<std::string> builtin_model_names() {
    return {"gaussian-mean",         "poisson",
            "bernoulli",             "curved-gaussian-efron",
            "graph-surface-gaussian", "cauchy-location",
            "degenerate-sum-gaussian"};
}

namespace {
Eigen::VectorXd vec1(double a) { return Eigen::VectorXd::Constant(1, a); }
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
}  // namespace

std::vector<GridPoint> builtin_theta_grid() {
    std::vector<GridPoint> g;
    const auto gm1 = gaussian_mean(1);
    for (double t : {-1.0, 0.3, 1.7}) g.push_back({gm1, vec1(t)});
    g.push_back({gaussian_mean(2), vec2(0.4, -0.8)});
    g.push_back({gaussian_mean(3), vec3(0.2, -0.5, 1.0)});
    const auto po = poisson();
    for (double t : {0.5, 1.0, 2.5, 4.0}) g.push_back({po, vec1(t)});
    const auto be = bernoulli();
    for (double t : {0.15, 0.35, 0.5, 0.8}) g.push_back({be, vec1(t)});
    const auto ef = curved_gaussian_efron();
    for (double t : {-0.6, -0.3, 0.0, 0.25, 0.5}) g.push_back({ef, vec1(t)});
    const auto gs = graph_surface_gaussian();
    g.push_back({gs, vec2(0.0, 0.0)});
    g.push_back({gs, vec2(0.3, -0.2)});
    g.push_back({gs, vec2(-0.5, 0.8)});
    const auto ca = cauchy_location();
    for (double t : {-1.0, 0.0, 0.6, 1.2}) g.push_back({ca, vec1(t)});
    return g;
}

namespace {

void require_finite(double v, const char* what, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& theta, int index) {
    if (std::isfinite(v)) return;
    std::ostringstream os;
    os << "non-finite " << what << " at x=[" << x.transpose() << "], theta=[" << theta.transpose()
       << "], index " << index;
    throw DerivativeEvaluationError(os.str());
}

}  // namespace

DerivativeCheck check_derivatives(const ParametricModel& model, const Eigen::VectorXd& theta,
                                  int trials, std::uint64_t seed) {
    const int d = model.dim();
    DerivativeCheck rep;
    RngStream rng(seed, 0x5eedca11ULL, 0);
    const double h = 1e-5 * std::max(1.0, theta.lpNorm<Eigen::Infinity>());
    for (int t = 0; t < trials; ++t) {
        // Jitter θ inside the regular domain (models with an empty regular
        // domain are checked at θ itself); sample x from the model there.
        Eigen::VectorXd th = theta;
        for (int attempt = 0; attempt < 50; ++attempt) {
            Eigen::VectorXd cand = theta;
            for (int i = 0; i < d; ++i) cand[i] += 0.05 * rng.next_gauss();
            if (model.regular_domain(cand)) {
                th = cand;
                break;
            }
        }
        const Eigen::VectorXd x = model.sample(th, rng);

        const Eigen::VectorXd s1 = model.score1(x, th);
        const Eigen::MatrixXd s2 = model.score2(x, th);
        const Tensor3 s3 = model.score3(x, th);

        for (int k = 0; k < d; ++k) {
            Eigen::VectorXd tp = th, tm = th;
            tp[k] += h;
            tm[k] -= h;
            const double fd1 = (model.logp(x, tp) - model.logp(x, tm)) / (2.0 * h);
            require_finite(fd1, "logp difference", x, th, k);
            rep.max_err1 = std::max(rep.max_err1,
                                    std::abs(s1[k] - fd1) / std::max(1.0, std::abs(s1[k])));

            const Eigen::VectorXd fd2 = (model.score1(x, tp) - model.score1(x, tm)) / (2.0 * h);
            const Eigen::MatrixXd fd3 = (model.score2(x, tp) - model.score2(x, tm)) / (2.0 * h);
            for (int i = 0; i < d; ++i) {
                require_finite(s2(i, k), "score2", x, th, i * d + k);
                rep.max_err2 = std::max(
                    rep.max_err2, std::abs(s2(i, k) - fd2[i]) / std::max(1.0, std::abs(s2(i, k))));
                for (int j = 0; j < d; ++j) {
                    require_finite(s3(i, j, k), "score3", x, th, (i * d + j) * d + k);
                    rep.max_err3 =
                        std::max(rep.max_err3, std::abs(s3(i, j, k) - fd3(i, j)) /
                                                   std::max(1.0, std::abs(s3(i, j, k))));
                }
            }
        }
    }
    rep.ok = rep.max_err1 <= 1e-4 && rep.max_err2 <= 1e-4 && rep.max_err3 <= 1e-4;
    return rep;
}

std::vector<Eigen::VectorXd> sample_batch(const ParametricModel& model,
                                          const Eigen::VectorXd& theta, long n, RngStream stream) {
    if (n < 1) throw SamplingError("sample_batch requires n >= 1");
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) out.push_back(model.sample(theta, stream));
    return out;
}

QuadraticReparamModel::QuadraticReparamModel(ModelPtr base, Eigen::VectorXd theta0,
                                             Eigen::MatrixXd B, Tensor3 C)
    : base_(std::move(base)), theta0_(std::move(theta0)), B_(std::move(B)), C_(std::move(C)) {}

std::string QuadraticReparamModel::name() const { return base_->name() + "@quadratic-chart"; }
int QuadraticReparamModel::dim() const { return base_->dim(); }
const SampleSpace& QuadraticReparamModel::space() const { return base_->space(); }

Eigen::VectorXd QuadraticReparamModel::map(const Eigen::VectorXd& u) const {
    const int d = dim();
    Eigen::VectorXd th = theta0_ + B_ * u;
    for (int i = 0; i < d; ++i) {
        double q = 0.0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) q += C_(i, a, b) * u[a] * u[b];
        th[i] += 0.5 * q;
    }
    return th;
}

Eigen::MatrixXd QuadraticReparamModel::jacobian(const Eigen::VectorXd& u) const {
    const int d = dim();
    Eigen::MatrixXd J = B_;
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < d; ++a) {
            double acc = 0.0;
            for (int b = 0; b < d; ++b) acc += C_(i, a, b) * u[b];
            J(i, a) += acc;
        }
    return J;
}

double QuadraticReparamModel::logp(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    return base_->logp(x, map(u));
}

Eigen::VectorXd QuadraticReparamModel::score1(const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& u) const {
    return jacobian(u).transpose() * base_->score1(x, map(u));
}

Eigen::MatrixXd QuadraticReparamModel::score2(const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& u) const {
    const int d = dim();
    const Eigen::VectorXd th = map(u);
    const Eigen::MatrixXd J = jacobian(u);
    const Eigen::VectorXd s1 = base_->score1(x, th);
    Eigen::MatrixXd out = J.transpose() * base_->score2(x, th) * J;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double acc = 0.0;
            for (int i = 0; i < d; ++i) acc += C_(i, a, b) * s1[i];
            out(a, b) += acc;
        }
    return out;
}

Tensor3 QuadraticReparamModel::score3(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const {
    const int d = dim();
    const Eigen::VectorXd th = map(u);
    const Eigen::MatrixXd J = jacobian(u);
    const Eigen::MatrixXd s2 = base_->score2(x, th);
    const Tensor3 s3 = base_->score3(x, th);
    Tensor3 out(d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c) {
                double v = 0.0;
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        for (int k = 0; k < d; ++k)
                            v += s3(i, j, k) * J(i, a) * J(j, b) * J(k, c);
                        v += s2(i, j) *
                             (C_(i, a, b) * J(j, c) + C_(i, a, c) * J(j, b) + C_(i, b, c) * J(j, a));
                    }
                out(a, b, c) = v;
            }
    return out;
}

Eigen::VectorXd QuadraticReparamModel::sample(const Eigen::VectorXd& u, RngStream& rng) const {
    return base_->sample(map(u), rng);
}

bool QuadraticReparamModel::regular_domain(const Eigen::VectorXd& u) const {
    if (!base_->regular_domain(map(u))) return false;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian(u));
    const auto& sv = svd.singularValues();
    return sv[sv.size() - 1] > 1e-8 * sv[0];
}

Eigen::VectorXd QuadraticReparamModel::quadrature_center(const Eigen::VectorXd& u) const {
    return base_->quadrature_center(map(u));
}

}  // namespace igtk
