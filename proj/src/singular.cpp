#include "igtk/singular.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "igtk/common.hpp"
#include "igtk/rng.hpp"

namespace igtk {

namespace {

// 15-point Gauss-Legendre rule on [-1, 1], nodes by Newton iteration on P_15.
struct GLRule {
    std::array<double, 15> x{};
    std::array<double, 15> w{};
};

const GLRule& gl15() {
    static const GLRule rule = [] {
        GLRule r;
        constexpr int n = 15;
        for (int i = 0; i < n; ++i) {
            double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = t;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (t * p1 - p0) / (t * t - 1.0);
                const double step = p1 / dp;
                t -= step;
                if (std::abs(step) < 1e-15) break;
            }
            r.x[static_cast<std::size_t>(i)] = t;
            r.w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
        return r;
    }();
    return rule;
}

double gl15_panel(const std::function<double(double)>& f, double a, double b) {
    const GLRule& r = gl15();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 15; ++i) s += r.w[static_cast<std::size_t>(i)] * f(mid + half * r.x[static_cast<std::size_t>(i)]);
    return s * half;
}

double adaptive_scalar(const std::function<double(double)>& f, double a, double b, double tol,
                       int depth) {
    const double whole = gl15_panel(f, a, b);
    const double mid = 0.5 * (a + b);
    const double left = gl15_panel(f, a, mid);
    const double right = gl15_panel(f, mid, b);
    const double err = std::abs(left + right - whole);
    if (err <= tol || depth >= 40) return left + right;
    return adaptive_scalar(f, a, mid, 0.5 * tol, depth + 1) +
           adaptive_scalar(f, mid, b, 0.5 * tol, depth + 1);
}

// ∫₀^T t^p exp(−t^q) dt to relative accuracy ~1e-12; q = 2k ≥ 2, p ≥ 0.
double power_exp_integral(int p, int q, double T) {
    if (T <= 0.0) return 0.0;
    // Beyond t*, the integrand is below e^{-75} of its scale.
    double tmax = std::pow(75.0 + 10.0 * p, 1.0 / q);
    for (int it = 0; it < 4; ++it)
        tmax = std::pow(75.0 + p * std::log1p(tmax), 1.0 / q);
    const double upper = std::min(T, tmax);
    auto f = [p, q](double t) { return std::pow(t, p) * std::exp(-std::pow(t, q)); };
    // Coarse estimate first, then refine against an absolute tolerance.
    double coarse = 0.0;
    const int n_panels = 8;
    for (int i = 0; i < n_panels; ++i)
        coarse += gl15_panel(f, upper * i / n_panels, upper * (i + 1) / n_panels);
    const double tol = 1e-13 * std::max(coarse, 1e-300);
    return adaptive_scalar(f, 0.0, upper, tol, 0);
}

long long gcd_ll(long long a, long long b) { return std::gcd(a, b); }

Rational reduced(long long num, long long den) {
    if (den == 0) throw InvalidSpec("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const long long g = gcd_ll(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational{num, den};
}

}  // namespace

void NormalCrossingSpec::validate() const {
    if (terms.empty()) throw InvalidSpec("normal-crossing spec needs at least one coordinate");
    for (const auto& t : terms) {
        if (!(t.c > 0.0)) throw InvalidSpec("normal-crossing coefficient c must be positive");
        if (t.k < 1) throw InvalidSpec("normal-crossing exponent k must be >= 1");
        if (t.h < 0) throw InvalidSpec("normal-crossing Jacobian power h must be >= 0");
    }
    if (!(epsilon > 0.0)) throw InvalidSpec("normal-crossing box half-width must be positive");
    if (!(psi0 > 0.0)) throw InvalidSpec("prior value at the origin must be positive");
}

Rational rational_sum(const std::vector<Rational>& parts) {
    Rational acc{0, 1};
    for (const auto& p : parts) {
        const Rational r = reduced(p.num, p.den);
        acc = reduced(acc.num * r.den + r.num * acc.den, acc.den * r.den);
    }
    return acc;
}

Rational rlct(const NormalCrossingSpec& spec) {
    spec.validate();
    std::vector<Rational> parts;
    parts.reserve(spec.terms.size());
    for (const auto& t : spec.terms) parts.push_back(Rational{t.h + 1, 2LL * t.k});
    return rational_sum(parts);
}

double a_constant(double c, int k, int h) {
    if (!(c > 0.0) || k < 1 || h < 0) throw InvalidSpec("a_constant needs c > 0, k >= 1, h >= 0");
    const double a = (h + 1.0) / (2.0 * k);
    return std::pow(c, -a) * std::tgamma(a) / k;
}

double z_n(const NormalCrossingSpec& spec, double n) {
    spec.validate();
    if (!(n > 0.0)) throw InvalidSpec("z_n requires n > 0");
    double z = spec.psi0;
    for (const auto& t : spec.terms) {
        // u = t (n c)^{-1/(2k)} turns the factor into an n-independent integrand.
        const double scale = std::pow(n * t.c, -1.0 / (2.0 * t.k));
        const double T = spec.epsilon / scale;
        z *= 2.0 * std::pow(scale, t.h + 1.0) * power_exp_integral(t.h, 2 * t.k, T);
    }
    return z;
}

double posterior_mse(const NormalCrossingSpec& spec, double n, const std::vector<double>& b) {
    spec.validate();
    if (!(n > 0.0)) throw InvalidSpec("posterior_mse requires n > 0");
    std::vector<double> weights = b;
    if (weights.empty()) weights.assign(spec.terms.size(), 1.0);
    if (weights.size() != spec.terms.size())
        throw InvalidSpec("posterior_mse weight vector size mismatch");
    double total = 0.0;
    for (std::size_t j = 0; j < spec.terms.size(); ++j) {
        const auto& t = spec.terms[j];
        const double scale2 = std::pow(n * t.c, -1.0 / t.k);  // (nc)^{-2/(2k)}
        const double T = spec.epsilon * std::pow(n * t.c, 1.0 / (2.0 * t.k));
        const double num = power_exp_integral(t.h + 2, 2 * t.k, T);
        const double den = power_exp_integral(t.h, 2 * t.k, T);
        total += weights[j] * scale2 * num / den;
    }
    return total;
}

RateFit fit_rate(const std::vector<double>& ns, const std::vector<double>& values) {
    if (ns.size() != values.size()) throw InvalidSpec("fit_rate size mismatch");
    if (ns.size() < 4) throw IllConditionedFit("fit_rate requires at least 4 points");
    double nmin = std::numeric_limits<double>::infinity(), nmax = 0.0;
    for (double n : ns) {
        if (!(n > 0.0)) throw InvalidSpec("fit_rate requires positive n");
        nmin = std::min(nmin, n);
        nmax = std::max(nmax, n);
    }
    if (nmax / nmin < 1e3) throw IllConditionedFit("fit_rate requires >= 3 decades of n");
    for (double v : values)
        if (!(v > 0.0)) throw IllConditionedFit("fit_rate requires positive values");

    const std::size_t m = ns.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double x = std::log(ns[i]), y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double md = static_cast<double>(m);
    const double denom = md * sxx - sx * sx;
    RateFit fit;
    fit.slope = (md * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / md;
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = std::log(values[i]) - (fit.intercept + fit.slope * std::log(ns[i]));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / md);
    return fit;
}

ResolvedGeometry resolved_geometry(const NormalCrossingSpec& spec, const Eigen::VectorXd& u) {
    spec.validate();
    if (u.size() != spec.dim()) throw InvalidSpec("resolved_geometry dimension mismatch");
    for (int j = 0; j < u.size(); ++j)
        if (u[j] == 0.0) throw OnSingularStratum("coordinate " + std::to_string(j) + " is zero");
    ResolvedGeometry geo;
    geo.G_diag.resize(u.size());
    geo.Gamma_jjj.resize(u.size());
    for (int j = 0; j < u.size(); ++j) {
        const auto& t = spec.terms[static_cast<std::size_t>(j)];
        const double tk = 2.0 * t.k;
        geo.G_diag[j] = tk * (tk - 1.0) * t.c * std::pow(u[j], tk - 2.0);
        geo.Gamma_jjj[j] = (t.k - 1.0) / u[j];
    }
    return geo;
}

TangentCone tangent_cone(const std::function<double(const Eigen::VectorXd&)>& K,
                         const Eigen::VectorXd& theta0, const Eigen::VectorXd& v,
                         const Eigen::VectorXd& w) {
    const int d = static_cast<int>(theta0.size());
    if (v.size() != d || w.size() != d) throw InvalidSpec("tangent_cone dimension mismatch");
    const double k0 = K(theta0);
    if (!(std::abs(k0) <= 1e-10)) throw InvalidSpec("K(theta0) must vanish");

    // Probe directions: the requested pair, their sum, and two fixed
    // pseudo-random unit vectors to catch anisotropic leading terms.
    std::vector<Eigen::VectorXd> dirs{v, w, v + w};
    RngStream rng(0x74616e67, 0, 0);
    for (int extra = 0; extra < 2; ++extra) {
        Eigen::VectorXd y(d);
        for (int i = 0; i < d; ++i) y[i] = rng.next_gauss();
        if (y.norm() > 0) y /= y.norm();
        dirs.push_back(y);
    }

    // Nonnegativity sample check around theta0.
    for (const auto& y : dirs)
        for (double t : {0.05, 0.2, 0.5})
            if (K(theta0 + t * y) < -1e-9)
                throw InvalidSpec("K is negative near theta0");

    // Leading order along each direction via log2 ratios on a dyadic ladder.
    constexpr int ladder = 12;
    int order = std::numeric_limits<int>::max();
    for (const auto& y : dirs) {
        if (y.norm() == 0.0) continue;
        std::array<double, ladder> f{};
        for (int i = 0; i < ladder; ++i)
            f[static_cast<std::size_t>(i)] = std::abs(K(theta0 + std::ldexp(1.0, -4 - i) * y));
        int best = -1;
        for (int i = 0; i + 2 < ladder; ++i) {
            const double f0 = f[static_cast<std::size_t>(i)], f1 = f[static_cast<std::size_t>(i + 1)],
                         f2 = f[static_cast<std::size_t>(i + 2)];
            if (f0 < 1e-250 || f1 < 1e-250 || f2 < 1e-250) continue;
            const double e01 = std::log2(f0 / f1), e12 = std::log2(f1 / f2);
            if (std::abs(e01 - e12) < 0.2 && e12 > 0.5 && e12 < 60.0) best = static_cast<int>(std::lround(e12));
        }
        if (best > 0) order = std::min(order, best);
    }
    if (order == std::numeric_limits<int>::max())
        throw InvalidSpec("K vanishes along every probe direction");
    if (order % 2 != 0)
        throw OddLeadingOrder("leading order " + std::to_string(order) + " is odd");

    // Φ(y) = lim_{t→0} K(theta0 + t y)/t^order by Neville extrapolation in t.
    auto phi = [&](const Eigen::VectorXd& y) {
        constexpr int m = 4;
        std::array<double, m> ts{}, val{};
        for (int i = 0; i < m; ++i) {
            ts[static_cast<std::size_t>(i)] = std::ldexp(1.0, -4 - i);
            val[static_cast<std::size_t>(i)] =
                K(theta0 + ts[static_cast<std::size_t>(i)] * y) /
                std::pow(ts[static_cast<std::size_t>(i)], order);
        }
        for (int level = 1; level < m; ++level)
            for (int i = 0; i + level < m; ++i) {
                const double t0 = ts[static_cast<std::size_t>(i)],
                             t1 = ts[static_cast<std::size_t>(i + level)];
                val[static_cast<std::size_t>(i)] =
                    (t0 * val[static_cast<std::size_t>(i + 1)] -
                     t1 * val[static_cast<std::size_t>(i)]) /
                    (t0 - t1);
            }
        return val[0];
    };

    TangentCone cone;
    cone.order = order;
    cone.phi_v = phi(v);
    cone.phi_w = phi(w);
    cone.phi_vw = phi(v + w);
    cone.G = 0.5 * (cone.phi_vw - cone.phi_v - cone.phi_w);
    return cone;
}

NullDirections null_directions(const ParametricModel& model, const Eigen::VectorXd& theta,
                               const ExpectationEngine& engine) {
    const MomentTable table = moment_table(model, theta, engine);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(table.g);
    const double lam_max = std::max(0.0, es.eigenvalues().maxCoeff());
    const double cutoff = 1e-8 * std::max(lam_max, 1e-300);

    NullDirections nd;
    const int d = model.dim();
    for (int a = 0; a < d; ++a) {
        if (es.eigenvalues()[a] > cutoff) continue;
        Eigen::VectorXd vec = es.eigenvectors().col(a);
        int imax = 0;
        for (int i = 1; i < d; ++i)
            if (std::abs(vec[i]) > std::abs(vec[imax])) imax = i;
        if (vec[imax] < 0.0) vec = -vec;

        IntegralResult res = integrate(
            model, theta, engine, 1,
            [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
                const double s = vec.dot(model.score1(x, theta));
                out[0] = s * s;
            });
        nd.basis.push_back(std::move(vec));
        nd.verified_quadratic.push_back(res.value[0]);
    }
    return nd;
}

NullDirections null_directions(const ParametricModel& model, const Eigen::VectorXd& theta) {
    return null_directions(model, theta, ExpectationEngine::auto_for(model));
}

SingularReport singular_report(const NormalCrossingSpec& spec, const std::vector<double>& n_grid,
                               const std::vector<double>& b) {
    spec.validate();
    SingularReport rep;
    rep.spec = spec;
    rep.lambda = rlct(spec);
    rep.mse_rate = std::numeric_limits<double>::infinity();
    for (const auto& t : spec.terms) {
        rep.mse_rate = std::min(rep.mse_rate, 1.0 / t.k);
        rep.a_constants.push_back(a_constant(t.c, t.k, t.h));
    }
    rep.n_grid = n_grid;
    for (double n : n_grid) {
        rep.z_values.push_back(z_n(spec, n));
        rep.mse_values.push_back(posterior_mse(spec, n, b));
    }
    rep.z_fit = fit_rate(n_grid, rep.z_values);
    rep.mse_fit = fit_rate(n_grid, rep.mse_values);
    return rep;
}

std::vector<NamedSpec> builtin_spec_library() {
    auto make = [](std::string name, std::vector<NormalCrossingTerm> terms) {
        NamedSpec s;
        s.name = std::move(name);
        s.spec.terms = std::move(terms);
        return s;
    };
    std::vector<NamedSpec> lib;
    lib.push_back(make("regular-1d", {{1.0, 1, 0}}));
    lib.push_back(make("regular-2d", {{1.0, 1, 0}, {2.0, 1, 0}}));
    lib.push_back(make("regular-3d", {{1.0, 1, 0}, {1.0, 1, 0}, {1.0, 1, 0}}));
    lib.push_back(make("quartic-1d", {{1.0, 2, 0}}));
    lib.push_back(make("quartic-line", {{1.0, 2, 0}, {1.0, 1, 0}}));
    lib.push_back(make("sextic-weighted", {{1.0, 3, 2}}));
    lib.push_back(make("double-quartic", {{1.0, 2, 1}, {0.5, 2, 0}}));
    lib.push_back(make("sextic-line", {{2.0, 3, 0}, {1.0, 1, 1}}));
    lib.push_back(make("line-quartic-weighted", {{1.0, 1, 2}, {1.0, 2, 1}}));
    lib.push_back(make("double-sextic", {{1.0, 3, 2}, {1.0, 3, 2}}));
    return lib;
}

}  // namespace igtk
