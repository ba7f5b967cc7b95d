#include "igtk/correction.hpp"

#include <cmath>
#include <sstream>

#include "igtk/common.hpp"

namespace igtk {

Eigen::VectorXd NormalChart::map(const Eigen::VectorXd& u) const {
    const int d = static_cast<int>(theta0.size());
    Eigen::VectorXd th = theta0 + A * u;
    for (int i = 0; i < d; ++i) {
        double q = 0.0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) q += Hq(i, a, b) * u[a] * u[b];
        th[i] += 0.5 * q;
    }
    return th;
}

Eigen::MatrixXd NormalChart::jacobian(const Eigen::VectorXd& u) const {
    const int d = static_cast<int>(theta0.size());
    Eigen::MatrixXd J = A;
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < d; ++a) {
            double acc = 0.0;
            for (int b = 0; b < d; ++b) acc += Hq(i, a, b) * u[b];
            J(i, a) += acc;
        }
    return J;
}

NormalChart build_normal_chart(const GeometrySnapshot& snapshot) {
    const int d = static_cast<int>(snapshot.theta.size());
    NormalChart c;
    c.theta0 = snapshot.theta;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(snapshot.g);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw SingularFisher(es.eigenvalues().minCoeff(),
                             "cannot build a normal chart at a singular metric");
    c.A = es.operatorInverseSqrt();
    c.A_inv = es.operatorSqrt();
    c.Hq = Tensor3(d);
    for (int i = 0; i < d; ++i)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                double acc = 0.0;
                for (int j = 0; j < d; ++j)
                    for (int k = 0; k < d; ++k)
                        acc -= snapshot.Gamma_second(i, j, k) * c.A(j, a) * c.A(k, b);
                c.Hq(i, a, b) = acc;
            }
    return c;
}

MomentTable pushforward_moments(const MomentTable& table, const NormalChart& chart) {
    const int d = table.dim();
    const Eigen::MatrixXd& A = chart.A;
    const Tensor3& H = chart.Hq;

    MomentTable out;
    out.theta = Eigen::VectorXd::Zero(d);  // chart origin
    double anorm = A.lpNorm<Eigen::Infinity>();
    out.err = table.err * std::pow(std::max(1.0, anorm * d), 4);

    out.g = A.transpose() * table.g * A;
    out.Es1 = A.transpose() * table.Es1;
    // E[s'_ab] = A A E[s_ij] + H_ab E[s_i].
    out.Es2.resize(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double acc = 0.0;
            for (int i = 0; i < d; ++i) {
                acc += H(i, a, b) * table.Es1[i];
                for (int j = 0; j < d; ++j) acc += A(i, a) * A(j, b) * table.Es2(i, j);
            }
            out.Es2(a, b) = acc;
        }

    Tensor3 T(d), Ge(d), K(d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c) {
                double t3 = 0.0, ge = 0.0, kp = 0.0;
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        // Hq-contracted second-score pieces.
                        ge += H(i, a, b) * A(j, c) * table.g(i, j);
                        kp -= (H(i, a, b) * A(j, c) + H(i, a, c) * A(j, b) +
                               H(i, b, c) * A(j, a)) *
                              table.g(i, j);
                        for (int k = 0; k < d; ++k) {
                            const double aaa = A(i, a) * A(j, b) * A(k, c);
                            t3 += table.T(i, j, k) * aaa;
                            ge += table.Ge(i, j, k) * aaa;
                            kp += table.kappa(i, j, k) * aaa;
                        }
                    }
                T(a, b, c) = t3;
                Ge(a, b, c) = ge;
                K(a, b, c) = kp;
            }
    out.T = symmetrize_full(T);
    out.Ge = symmetrize_pair12(Ge);
    out.kappa = symmetrize_full(K);

    Tensor4 Q(d), M(d), F(d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e) {
                    double q4 = 0.0, m4 = 0.0, f4 = 0.0;
                    for (int i = 0; i < d; ++i)
                        for (int k = 0; k < d; ++k) q4 += H(i, a, b) * H(k, c, e) * table.g(i, k);
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j)
                            for (int k = 0; k < d; ++k) {
                                // Ge cross terms of Q'; T cross term of M'.
                                q4 += table.Ge(i, j, k) * (A(i, a) * A(j, b) * H(k, c, e) +
                                                           A(i, c) * A(j, e) * H(k, a, b));
                                m4 += H(i, a, b) * table.T(i, j, k) * A(j, c) * A(k, e);
                                for (int l = 0; l < d; ++l) {
                                    const double aaaa = A(i, a) * A(j, b) * A(k, c) * A(l, e);
                                    q4 += table.Q(i, j, k, l) * aaaa;
                                    m4 += table.M(i, j, k, l) * aaaa;
                                    f4 += table.F(i, j, k, l) * aaaa;
                                }
                            }
                    Q(a, b, c, e) = q4;
                    M(a, b, c, e) = m4;
                    F(a, b, c, e) = f4;
                }
    out.Q = symmetrize_pairs_and_swap(Q);
    out.M = symmetrize_pairs(M);
    out.F = symmetrize_full(F);
    return out;
}

Eigen::MatrixXd p_tensor_full(const MomentTable& nc) {
    const int d = nc.dim();
    Eigen::MatrixXd ginv;
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(nc.g);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw SingularFisher(es.eigenvalues().minCoeff(),
                                 "chart metric not positive definite");
        ginv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
               es.eigenvectors().transpose();
    }
    // Γ̂^m_ik = g^{ml} Ge_ikl.
    Tensor3 Ghat(d);
    for (int m = 0; m < d; ++m)
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k) {
                double acc = 0.0;
                for (int l = 0; l < d; ++l) acc += ginv(m, l) * nc.Ge(i, k, l);
                Ghat(m, i, k) = acc;
            }
    Eigen::VectorXd Ghat_trace(d);  // Γ̂^k_ik
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) acc += Ghat(k, i, k);
        Ghat_trace[i] = acc;
    }

    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double v = 0.0;
            for (int k = 0; k < d; ++k)
                for (int m = 0; m < d; ++m)
                    v += ginv(k, m) * (nc.Q(i, k, j, m) - nc.g(i, k) * nc.g(j, m));
            for (int m = 0; m < d; ++m)
                for (int k = 0; k < d; ++k) v += Ghat(m, i, k) * Ghat(k, j, m);
            v += Ghat_trace[i] * Ghat_trace[j];
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    for (int r = 0; r < d; ++r)
                        for (int s = 0; s < d; ++s)
                            v += 0.25 * nc.kappa(i, k, l) * nc.kappa(j, r, s) *
                                 (ginv(k, l) * ginv(r, s) + ginv(k, r) * ginv(l, s) +
                                  ginv(k, s) * ginv(l, r));
            for (int r = 0; r < d; ++r)
                for (int s = 0; s < d; ++s) {
                    v += 0.5 * nc.kappa(j, r, s) * Ghat_trace[i] * ginv(r, s);
                    for (int k = 0; k < d; ++k)
                        v += 0.5 * nc.kappa(j, r, s) *
                             (Ghat(r, i, k) * ginv(k, s) + Ghat(s, i, k) * ginv(k, r));
                }
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    v += 0.5 * nc.kappa(i, k, l) * Ghat_trace[j] * ginv(k, l);
                    for (int m = 0; m < d; ++m)
                        v += 0.5 * nc.kappa(i, k, l) *
                             (Ghat(k, j, m) * ginv(m, l) + Ghat(l, j, m) * ginv(m, k));
                }
            P(i, j) = v;
        }
    return 0.5 * (P + P.transpose()).eval();
}

Eigen::MatrixXd p_tensor_reduced(const MomentTable& nc, double tangency_tol) {
    const int d = nc.dim();
    double res_e = 0.0, res_k = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                res_e = std::max(res_e, std::abs(nc.Ge(i, j, k) + 0.5 * nc.T(i, j, k)));
                res_k = std::max(res_k, std::abs(nc.kappa(i, j, k) - 0.5 * nc.T(i, j, k)));
            }
    if (res_e > tangency_tol || res_k > tangency_tol) {
        std::ostringstream os;
        os << "chart tangency residuals too large: |Ge + T/2| = " << res_e
           << ", |kappa - T/2| = " << res_k << " (tol " << tangency_tol << ")";
        throw TangencyViolation(os.str());
    }
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double v = -(i == j ? 1.0 : 0.0);
            for (int k = 0; k < d; ++k) v += nc.Q(i, k, j, k);
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) v -= 0.5 * nc.kappa(i, k, l) * nc.kappa(j, k, l);
            double tri = 0.0, trj = 0.0;
            for (int r = 0; r < d; ++r) {
                tri += nc.kappa(i, r, r);
                trj += nc.kappa(j, r, r);
            }
            v += 0.25 * tri * trj;
            P(i, j) = v;
        }
    return 0.5 * (P + P.transpose()).eval();
}

CorrectionReport decompose(const Eigen::MatrixXd& P_nc, const NormalChart& chart,
                           const Eigen::MatrixXd& Rsharp_user,
                           const Eigen::MatrixXd& Ssharp_user) {
    CorrectionReport r;
    r.theta0 = chart.theta0;
    r.chart = chart;
    r.P_nc = P_nc;
    r.P_user = chart.A_inv.transpose() * P_nc * chart.A_inv;
    r.Rsharp_user = Rsharp_user;
    r.Ssharp_user = Ssharp_user;
    r.D_user = r.P_user - 0.5 * Rsharp_user - Ssharp_user;
    return r;
}

CorrectionReport correction_report(const ParametricModel& model, const Eigen::VectorXd& theta,
                                   const ExpectationEngine& engine) {
    const GeometrySnapshot snap = geometry_snapshot(model, theta, engine);
    const MomentTable table = moment_table(model, theta, engine);
    Metric m;
    m.g = snap.g;
    m.g_inv = snap.g_inv;
    m.min_eig = snap.min_eig_g;
    const ImmersionReport imm = immersion_report(table, m);

    const NormalChart chart = build_normal_chart(snap);
    const MomentTable nc = pushforward_moments(table, chart);
    const Eigen::MatrixXd P_full = p_tensor_full(nc);
    const Eigen::MatrixXd P_red = p_tensor_reduced(nc);

    CorrectionReport r = decompose(P_full, chart, snap.Rsharp, imm.Ssharp);
    r.moments_nc = nc;
    r.full_vs_reduced = (P_full - P_red).lpNorm<Eigen::Infinity>();
    const int d = nc.dim();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                r.tangency_residual_e = std::max(
                    r.tangency_residual_e, std::abs(nc.Ge(i, j, k) + 0.5 * nc.T(i, j, k)));
                r.tangency_residual_kappa = std::max(
                    r.tangency_residual_kappa, std::abs(nc.kappa(i, j, k) - 0.5 * nc.T(i, j, k)));
            }
    return r;
}

Eigen::MatrixXd predict_covariance(const CorrectionReport& report, const Eigen::MatrixXd& I,
                                   long n) {
    if (n < 1) throw InvalidSpec("predict_covariance requires n >= 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(I);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw SingularFisher(es.eigenvalues().minCoeff(), "metric not positive definite");
    const Eigen::MatrixXd I_inv = es.eigenvectors() *
                                  es.eigenvalues().cwiseInverse().asDiagonal() *
                                  es.eigenvectors().transpose();
    const double nn = static_cast<double>(n);
    return I_inv / nn + I_inv * report.P_user * I_inv / (nn * nn);
}

}  // namespace igtk
