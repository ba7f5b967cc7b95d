#include "igtk/geometry.hpp"

#include <cmath>
#include <sstream>

#include "igtk/common.hpp"

namespace igtk {

Metric metric(const MomentTable& table, double pd_tol) {
    Metric m;
    m.g = table.g;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.g);
    m.min_eig = es.eigenvalues().minCoeff();
    m.max_eig = es.eigenvalues().maxCoeff();
    if (m.min_eig <= pd_tol * std::max(m.max_eig, 0.0)) {
        std::ostringstream os;
        os << "Fisher information not positive definite: min eig " << m.min_eig << " vs max "
           << m.max_eig;
        throw SingularFisher(m.min_eig, os.str());
    }
    m.g_inv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
              es.eigenvectors().transpose();
    return m;
}

Christoffels christoffel(const MomentTable& table, const Metric& m) {
    const int d = table.dim();
    const Tensor3 dg = metric_derivative_from_moments(table);
    Christoffels c{Tensor3(d), Tensor3(d)};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                c.first(i, j, k) = 0.5 * (dg(i, j, k) + dg(j, i, k) - dg(k, i, j));
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double acc = 0.0;
                for (int l = 0; l < d; ++l) acc += m.g_inv(k, l) * c.first(i, j, l);
                c.second(k, i, j) = acc;
            }
    return c;
}

double fd_step(const Eigen::VectorXd& theta, double scale) {
    const double eps_cbrt = std::cbrt(std::numeric_limits<double>::epsilon());
    return std::max(1.0, theta.norm()) * eps_cbrt * scale;
}

namespace {

Tensor3 gamma_second_at(const ParametricModel& model, const Eigen::VectorXd& theta,
                        const ExpectationEngine& engine, double pd_tol) {
    if (!model.regular_domain(theta)) {
        std::ostringstream os;
        os << "finite-difference evaluation left the regular domain at theta=["
           << theta.transpose() << "]";
        throw DomainError(os.str());
    }
    const MomentTable t = moment_table(model, theta, engine);
    const Metric m = metric(t, pd_tol);
    return christoffel(t, m).second;
}

}  // namespace

GeometrySnapshot geometry_snapshot(const ParametricModel& model, const Eigen::VectorXd& theta,
                                   const ExpectationEngine& engine, double pd_tol) {
    const int d = model.dim();
    GeometrySnapshot s;
    s.theta = theta;

    const MomentTable table = moment_table(model, theta, engine);
    const Metric m = metric(table, pd_tol);
    s.g = m.g;
    s.g_inv = m.g_inv;
    s.min_eig_g = m.min_eig;
    s.dg = metric_derivative_from_moments(table);
    const Christoffels c = christoffel(table, m);
    s.Gamma_first = c.first;
    s.Gamma_second = c.second;

    // ∂_k Γ^m_ij by central differences with one Richardson level:
    // (4 D_{h/2} − D_h) / 3.
    const double h = fd_step(theta);
    Tensor4 dG(d);
    for (int k = 0; k < d; ++k) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
        e[k] = 1.0;
        auto diff = [&](double step) {
            const Tensor3 gp = gamma_second_at(model, theta + step * e, engine, pd_tol);
            const Tensor3 gm = gamma_second_at(model, theta - step * e, engine, pd_tol);
            Tensor3 out = gp;
            out -= gm;
            out *= 1.0 / (2.0 * step);
            return out;
        };
        const Tensor3 Dh = diff(h);
        const Tensor3 Dh2 = diff(0.5 * h);
        for (int mm = 0; mm < d; ++mm)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    dG(k, mm, i, j) = (4.0 * Dh2(mm, i, j) - Dh(mm, i, j)) / 3.0;
    }

    // R^m_jkl = ∂_k Γ^m_lj − ∂_l Γ^m_kj + Γ^m_kr Γ^r_lj − Γ^m_lr Γ^r_kj.
    Tensor4 R13(d);
    for (int mm = 0; mm < d; ++mm)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    double v = dG(k, mm, l, j) - dG(l, mm, k, j);
                    for (int r = 0; r < d; ++r)
                        v += c.second(mm, k, r) * c.second(r, l, j) -
                             c.second(mm, l, r) * c.second(r, k, j);
                    R13(mm, j, k, l) = v;
                }

    s.Riem = Tensor4(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    double v = 0.0;
                    for (int mm = 0; mm < d; ++mm) v += s.g(i, mm) * R13(mm, j, k, l);
                    s.Riem(i, j, k, l) = v;
                }

    s.Rsharp = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double v = 0.0;
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) v += s.g_inv(k, l) * s.Riem(i, k, j, l);
            s.Rsharp(i, j) = v;
        }
    s.Rsharp = 0.5 * (s.Rsharp + s.Rsharp.transpose()).eval();

    // Symmetry residuals are recorded, never projected away.
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    s.riemann_antisym_residual = std::max(
                        {s.riemann_antisym_residual,
                         std::abs(s.Riem(i, j, k, l) + s.Riem(i, j, l, k)),
                         std::abs(s.Riem(i, j, k, l) + s.Riem(j, i, k, l))});
                    s.riemann_pair_residual =
                        std::max(s.riemann_pair_residual,
                                 std::abs(s.Riem(i, j, k, l) - s.Riem(k, l, i, j)));
                    s.bianchi_residual = std::max(
                        s.bianchi_residual, std::abs(s.Riem(i, j, k, l) + s.Riem(i, k, l, j) +
                                                     s.Riem(i, l, j, k)));
                }
    return s;
}

Eigen::MatrixXd covariant_hessian(const Eigen::MatrixXd& U2, const Eigen::VectorXd& U1,
                                  const Tensor3& Gamma_second) {
    const int d = static_cast<int>(U1.size());
    Eigen::MatrixXd out = U2;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k) acc += Gamma_second(k, i, j) * U1[k];
            out(i, j) -= acc;
        }
    return out;
}

}  // namespace igtk
