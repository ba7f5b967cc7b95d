#include "igtk/expectation.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

#include "igtk/common.hpp"
#include "igtk/rng.hpp"

namespace igtk {

ExpectationEngine ExpectationEngine::gauss_hermite(int order) {
    ExpectationEngine e;
    e.method = Method::GaussHermite;
    e.order = order;
    return e;
}

ExpectationEngine ExpectationEngine::adaptive_grid(double abs_tol, double rel_tol,
                                                   double truncation) {
    ExpectationEngine e;
    e.method = Method::AdaptiveGrid;
    e.abs_tol = abs_tol;
    e.rel_tol = rel_tol;
    e.truncation = truncation;
    return e;
}

ExpectationEngine ExpectationEngine::discrete_sum(double tail_tol) {
    ExpectationEngine e;
    e.method = Method::DiscreteSum;
    e.tail_tol = tail_tol;
    return e;
}

ExpectationEngine ExpectationEngine::monte_carlo(long samples, std::uint64_t seed) {
    ExpectationEngine e;
    e.method = Method::MonteCarlo;
    e.samples = samples;
    e.seed = seed;
    return e;
}

ExpectationEngine ExpectationEngine::auto_for(const ParametricModel& model) {
    switch (model.space().weight_hint) {
        case WeightHint::Gaussian: return gauss_hermite(24);
        case WeightHint::HeavyTailed: return adaptive_grid();
        case WeightHint::Discrete: return discrete_sum();
    }
    return gauss_hermite(24);
}

std::string ExpectationEngine::describe() const {
    std::ostringstream os;
    switch (method) {
        case Method::GaussHermite: os << "gauss-hermite(order=" << order << ")"; break;
        case Method::AdaptiveGrid:
            os << "adaptive-grid(abs=" << abs_tol << ",rel=" << rel_tol
               << ",trunc=" << truncation << ")";
            break;
        case Method::DiscreteSum: os << "discrete-sum(tail=" << tail_tol << ")"; break;
        case Method::MonteCarlo: os << "monte-carlo(samples=" << samples << ",seed=" << seed << ")"; break;
    }
    return os.str();
}

namespace {

struct Rule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

// Golub–Welsch nodes/weights from a symmetric-tridiagonal Jacobi matrix.
Rule golub_welsch(const Eigen::VectorXd& beta, double weight_integral) {
    const int n = static_cast<int>(beta.size()) + 1;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n - 1; ++k) {
        J(k, k + 1) = beta[k];
        J(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule r;
    r.nodes = es.eigenvalues();
    r.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        const double v0 = es.eigenvectors()(0, k);
        r.weights[k] = weight_integral * v0 * v0;
    }
    return r;
}

// Hermite rule for weight e^{-t^2} on R.
const Rule& hermite_rule(int order) {
    static std::mutex mu;
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    Eigen::VectorXd beta(order - 1);
    for (int k = 1; k < order; ++k) beta[k - 1] = std::sqrt(k / 2.0);
    return cache.emplace(order, golub_welsch(beta, std::sqrt(std::numbers::pi))).first->second;
}

// Legendre rule for weight 1 on [-1, 1].
const Rule& legendre_rule(int order) {
    static std::mutex mu;
    static std::map<int, Rule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    Eigen::VectorXd beta(order - 1);
    for (int k = 1; k < order; ++k) beta[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    return cache.emplace(order, golub_welsch(beta, 2.0)).first->second;
}

using Integrand = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Tensor-product Gauss–Hermite expectation for x ~ N(center, I_m).
Eigen::VectorXd gh_pass(const ParametricModel& model, const Eigen::VectorXd& theta, int out_dim,
                        const Integrand& f, int order) {
    const int m = model.space().ambient_dim;
    const Rule& rule = hermite_rule(order);
    const Eigen::VectorXd center = model.quadrature_center(theta);
    const double norm = std::pow(std::numbers::pi, -0.5 * m);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(out_dim);
    Eigen::VectorXd x(m), fx(out_dim);
    std::vector<int> idx(m, 0);
    const double sqrt2 = std::numbers::sqrt2;
    while (true) {
        double w = norm;
        for (int a = 0; a < m; ++a) {
            x[a] = center[a] + sqrt2 * rule.nodes[idx[a]];
            w *= rule.weights[idx[a]];
        }
        f(x, fx);
        acc += w * fx;
        int a = 0;
        for (; a < m; ++a) {
            if (++idx[a] < order) break;
            idx[a] = 0;
        }
        if (a == m) break;
    }
    return acc;
}

IntegralResult integrate_gauss_hermite(const ParametricModel& model, const Eigen::VectorXd& theta,
                                       const ExpectationEngine& engine, int out_dim,
                                       const Integrand& f) {
    if (model.space().weight_hint != WeightHint::Gaussian)
        throw ExpectationError("gauss-hermite engine requires a gaussian-weight sample space (model '" +
                               model.name() + "')");
    if (engine.order < 2) throw ExpectationError("gauss-hermite order must be >= 2");
    const Eigen::VectorXd lo = gh_pass(model, theta, out_dim, f, engine.order);
    const Eigen::VectorXd hi = gh_pass(model, theta, out_dim, f, 2 * engine.order);
    IntegralResult r;
    r.value = hi;
    const double scale = hi.size() ? hi.lpNorm<Eigen::Infinity>() : 0.0;
    r.err = (hi - lo).lpNorm<Eigen::Infinity>() + 1e-13 * (1.0 + scale);
    return r;
}

// Adaptive composite Gauss–Legendre on the compactified domain x = c + tan v.
// The transformed weight p(c + tan v) sec² v is smooth and bounded for
// heavy-tailed densities; panels are bisected until the two-half refinement
// changes the panel value by less than its share of the tolerance.
struct AdaptiveWorker {
    const ParametricModel& model;
    const Eigen::VectorXd& theta;
    const Integrand& f;
    int out_dim;
    double center;
    double abs_tol;
    double rel_tol;
    double scale_hint = 1.0;
    double err_acc = 0.0;
    long panel_count = 0;

    Eigen::VectorXd panel(double a, double b) {
        const Rule& rule = legendre_rule(15);
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(out_dim);
        Eigen::VectorXd x(1), fx(out_dim);
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int k = 0; k < 15; ++k) {
            const double v = mid + half * rule.nodes[k];
            const double t = std::tan(v);
            x[0] = center + t;
            const double sec2 = 1.0 + t * t;
            const double w = std::exp(model.logp(x, theta)) * sec2;
            f(x, fx);
            acc += (half * rule.weights[k] * w) * fx;
        }
        return acc;
    }

    Eigen::VectorXd refine(double a, double b, const Eigen::VectorXd& whole, double tol_share,
                           int depth) {
        if (++panel_count > 200000)
            throw ExpectationError("adaptive-grid quadrature exceeded panel budget");
        const double mid = 0.5 * (a + b);
        const Eigen::VectorXd left = panel(a, mid);
        const Eigen::VectorXd right = panel(mid, b);
        const Eigen::VectorXd fine = left + right;
        const double diff = (fine - whole).lpNorm<Eigen::Infinity>();
        if (diff <= tol_share || depth >= 48) {
            if (depth >= 48 && diff > tol_share)
                throw ExpectationError("adaptive-grid quadrature failed to converge");
            err_acc += diff;
            return fine;
        }
        return refine(a, mid, left, 0.5 * tol_share, depth + 1) +
               refine(mid, b, right, 0.5 * tol_share, depth + 1);
    }
};

IntegralResult integrate_adaptive(const ParametricModel& model, const Eigen::VectorXd& theta,
                                  const ExpectationEngine& engine, int out_dim,
                                  const Integrand& f) {
    if (model.space().ambient_dim != 1 || model.space().kind != SpaceKind::RealLine)
        throw ExpectationError("adaptive-grid engine requires a one-dimensional real sample space");
    const double c = model.quadrature_center(theta)[0];
    const double half_pi = 0.5 * std::numbers::pi;
    const double delta = half_pi * engine.truncation;  // neglected tail mass <= truncation
    const double a = -half_pi + delta, b = half_pi - delta;

    AdaptiveWorker worker{model, theta, f, out_dim, c, engine.abs_tol, engine.rel_tol};
    // Rough pass for the relative-tolerance scale.
    Eigen::VectorXd rough = Eigen::VectorXd::Zero(out_dim);
    const int pre = 8;
    for (int k = 0; k < pre; ++k)
        rough += worker.panel(a + (b - a) * k / pre, a + (b - a) * (k + 1) / pre);
    const double scale = rough.size() ? rough.lpNorm<Eigen::Infinity>() : 0.0;
    const double tol = std::max(engine.abs_tol, engine.rel_tol * std::max(scale, 1e-30));

    IntegralResult r;
    Eigen::VectorXd total = Eigen::VectorXd::Zero(out_dim);
    for (int k = 0; k < pre; ++k) {
        const double pa = a + (b - a) * k / pre, pb = a + (b - a) * (k + 1) / pre;
        total += worker.refine(pa, pb, worker.panel(pa, pb), tol / pre, 0);
    }
    r.value = total;
    r.err = worker.err_acc + engine.truncation * (1.0 + scale);
    return r;
}

IntegralResult integrate_discrete(const ParametricModel& model, const Eigen::VectorXd& theta,
                                  const ExpectationEngine& engine, int out_dim,
                                  const Integrand& f) {
    const auto& sp = model.space();
    Eigen::VectorXd x(1), fx(out_dim);
    IntegralResult r;
    r.value = Eigen::VectorXd::Zero(out_dim);

    if (sp.kind == SpaceKind::FiniteSet) {
        double mass = 0.0;
        for (double v : sp.finite_support) {
            x[0] = v;
            const double p = std::exp(model.logp(x, theta));
            f(x, fx);
            r.value += p * fx;
            mass += p;
        }
        if (std::abs(mass - 1.0) > 1e-10)
            throw ExpectationError("finite-set density does not sum to 1 (model '" + model.name() +
                                   "')");
        r.err = 1e-15 * (1.0 + r.value.lpNorm<Eigen::Infinity>());
        return r;
    }
    if (sp.kind != SpaceKind::NonnegIntegers)
        throw ExpectationError("discrete-sum engine requires a discrete sample space");

    // Scores of the supported count models grow at most polynomially (degree
    // <= 1 per factor, products of total order <= 4), so weighting the stop
    // rule by (1+x)^4 bounds the discarded tail contribution.
    double mass = 0.0;
    int quiet = 0;
    const long cap = 1000000;
    for (long k = 0;; ++k) {
        if (k > cap) throw ExpectationError("discrete-sum exceeded summation cap");
        x[0] = static_cast<double>(k);
        const double p = std::exp(model.logp(x, theta));
        if (std::isfinite(p) && p > 0.0) {
            f(x, fx);
            r.value += p * fx;
            mass += p;
        }
        const double growth = std::pow(1.0 + static_cast<double>(k), 4);
        if (k >= 5 && p * growth < 0.01 * engine.tail_tol) {
            if (++quiet >= 8) break;
        } else {
            quiet = 0;
        }
    }
    if (mass < 1.0 - 1e-9)
        throw ExpectationError("discrete-sum captured mass " + std::to_string(mass) +
                               " < 1 (model '" + model.name() + "')");
    r.err = engine.tail_tol + 1e-15 * (1.0 + r.value.lpNorm<Eigen::Infinity>());
    return r;
}

IntegralResult integrate_monte_carlo(const ParametricModel& model, const Eigen::VectorXd& theta,
                                     const ExpectationEngine& engine, int out_dim,
                                     const Integrand& f) {
    if (engine.samples < 2) throw ExpectationError("monte-carlo engine requires samples >= 2");
    RngStream stream(engine.seed, 0x4d43ULL, 0);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(out_dim);
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(out_dim);
    Eigen::VectorXd fx(out_dim);
    for (long i = 0; i < engine.samples; ++i) {
        const Eigen::VectorXd x = model.sample(theta, stream);
        f(x, fx);
        if (!fx.allFinite())
            throw DerivativeEvaluationError("non-finite integrand in monte-carlo engine");
        sum += fx;
        sumsq += fx.cwiseProduct(fx);
    }
    const double n = static_cast<double>(engine.samples);
    IntegralResult r;
    r.value = sum / n;
    double max_se = 0.0;
    for (int j = 0; j < out_dim; ++j) {
        const double var = std::max(0.0, sumsq[j] / n - r.value[j] * r.value[j]);
        max_se = std::max(max_se, std::sqrt(var / (n - 1.0)));
    }
    r.err = max_se;
    return r;
}

}  // namespace

IntegralResult integrate(const ParametricModel& model, const Eigen::VectorXd& theta,
                         const ExpectationEngine& engine, int out_dim,
                         const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& f) {
    IntegralResult r;
    switch (engine.method) {
        case ExpectationEngine::Method::GaussHermite:
            r = integrate_gauss_hermite(model, theta, engine, out_dim, f);
            break;
        case ExpectationEngine::Method::AdaptiveGrid:
            r = integrate_adaptive(model, theta, engine, out_dim, f);
            break;
        case ExpectationEngine::Method::DiscreteSum:
            r = integrate_discrete(model, theta, engine, out_dim, f);
            break;
        case ExpectationEngine::Method::MonteCarlo:
            r = integrate_monte_carlo(model, theta, engine, out_dim, f);
            break;
    }
    if (!r.value.allFinite())
        throw DerivativeEvaluationError("non-finite expectation value (model '" + model.name() +
                                        "', engine " + engine.describe() + ")");
    return r;
}

MomentTable moment_table(const ParametricModel& model, const Eigen::VectorXd& theta,
                         const ExpectationEngine& engine) {
    const int d = model.dim();
    const int d2 = d * d, d3 = d2 * d, d4 = d3 * d;
    // Flat layout: g | T | Ge | kappa | Q | M | F | Es1 | Es2.
    const int og = 0, oT = og + d2, oGe = oT + d3, oK = oGe + d3, oQ = oK + d3, oM = oQ + d4,
              oF = oM + d4, oE1 = oF + d4, oE2 = oE1 + d;
    const int total = oE2 + d2;

    auto pack = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
        const Eigen::VectorXd s1 = model.score1(x, theta);
        const Eigen::MatrixXd s2 = model.score2(x, theta);
        const Tensor3 s3 = model.score3(x, theta);
        for (int i = 0; i < d; ++i) {
            out[oE1 + i] = s1[i];
            for (int j = 0; j < d; ++j) {
                out[og + i * d + j] = s1[i] * s1[j];
                out[oE2 + i * d + j] = s2(i, j);
                for (int k = 0; k < d; ++k) {
                    out[oT + (i * d + j) * d + k] = s1[i] * s1[j] * s1[k];
                    out[oGe + (i * d + j) * d + k] = s2(i, j) * s1[k];
                    out[oK + (i * d + j) * d + k] = s3(i, j, k);
                    for (int l = 0; l < d; ++l) {
                        const int p = ((i * d + j) * d + k) * d + l;
                        out[oQ + p] = s2(i, j) * s2(k, l);
                        out[oM + p] = s2(i, j) * s1[k] * s1[l];
                        out[oF + p] = s1[i] * s1[j] * s1[k] * s1[l];
                    }
                }
            }
        }
    };

    const IntegralResult res = integrate(model, theta, engine, total, pack);

    MomentTable t;
    t.theta = theta;
    t.err = res.err;
    t.g.resize(d, d);
    t.Es2.resize(d, d);
    t.Es1.resize(d);
    Tensor3 T(d), Ge(d), K(d);
    Tensor4 Q(d), M(d), F(d);
    for (int i = 0; i < d; ++i) {
        t.Es1[i] = res.value[oE1 + i];
        for (int j = 0; j < d; ++j) {
            t.g(i, j) = res.value[og + i * d + j];
            t.Es2(i, j) = res.value[oE2 + i * d + j];
            for (int k = 0; k < d; ++k) {
                T(i, j, k) = res.value[oT + (i * d + j) * d + k];
                Ge(i, j, k) = res.value[oGe + (i * d + j) * d + k];
                K(i, j, k) = res.value[oK + (i * d + j) * d + k];
                for (int l = 0; l < d; ++l) {
                    const int p = ((i * d + j) * d + k) * d + l;
                    Q(i, j, k, l) = res.value[oQ + p];
                    M(i, j, k, l) = res.value[oM + p];
                    F(i, j, k, l) = res.value[oF + p];
                }
            }
        }
    }
    // Enforce the exact symmetry group of every tensor.
    t.g = 0.5 * (t.g + t.g.transpose()).eval();
    t.Es2 = 0.5 * (t.Es2 + t.Es2.transpose()).eval();
    t.T = symmetrize_full(T);
    t.Ge = symmetrize_pair12(Ge);
    t.kappa = symmetrize_full(K);
    t.Q = symmetrize_pairs_and_swap(Q);
    t.M = symmetrize_pairs(M);
    t.F = symmetrize_full(F);
    return t;
}

BartlettResiduals bartlett_residuals(const MomentTable& table, const ParametricModel& model,
                                     const Eigen::VectorXd& theta,
                                     const ExpectationEngine& engine) {
    const int d = model.dim();
    auto pack = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
        const Eigen::VectorXd s1 = model.score1(x, theta);
        const Eigen::MatrixXd s2 = model.score2(x, theta);
        for (int i = 0; i < d; ++i) {
            out[i] = s1[i];
            for (int j = 0; j < d; ++j) out[d + i * d + j] = s2(i, j);
        }
    };
    const IntegralResult res = integrate(model, theta, engine, d + d * d, pack);
    BartlettResiduals b;
    b.r1 = res.value.head(d);
    b.r2.resize(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) b.r2(i, j) = table.g(i, j) + res.value[d + i * d + j];
    b.err = res.err;
    return b;
}

Tensor3 third_moment_identity_residual(const MomentTable& table) {
    const int d = table.dim();
    Tensor3 r(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                r(i, j, k) = table.kappa(i, j, k) + table.Ge(i, j, k) + table.Ge(i, k, j) +
                             table.Ge(j, k, i) + table.T(i, j, k);
    return r;
}

Tensor3 metric_derivative_from_moments(const MomentTable& table) {
    const int d = table.dim();
    Tensor3 dg(d);
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                dg(k, i, j) = table.Ge(i, k, j) + table.Ge(j, k, i) + table.T(i, j, k);
    return dg;
}

}  // namespace igtk
