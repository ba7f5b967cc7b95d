#include "igtk/immersion.hpp"

#include <cmath>
#include <numbers>
#include <tuple>
#include <vector>

namespace igtk {

ImmersionReport ambient_grams(const MomentTable& table) {
    const int d = table.dim();
    ImmersionReport r;
    r.theta = table.theta;
    r.GramE = 0.25 * table.g;
    r.radial = -0.25 * table.g;
    r.GramMix = Tensor3(d);
    r.GramH = Tensor4(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                r.GramMix(i, j, k) = 0.25 * table.Ge(i, j, k) + 0.125 * table.T(i, j, k);
                for (int l = 0; l < d; ++l)
                    r.GramH(i, j, k, l) = 0.25 * table.Q(i, j, k, l) +
                                          0.125 * table.M(i, j, k, l) +
                                          0.125 * table.M(k, l, i, j) +
                                          0.0625 * table.F(i, j, k, l);
            }
    return r;
}

void sff_gram(ImmersionReport& report, const Eigen::MatrixXd& g_inv) {
    const int d = static_cast<int>(report.theta.size());
    report.GramII = Tensor4(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) {
                    double tangential = 0.0;
                    for (int a = 0; a < d; ++a)
                        for (int b = 0; b < d; ++b)
                            tangential +=
                                g_inv(a, b) * report.GramMix(i, j, a) * report.GramMix(k, l, b);
                    report.GramII(i, j, k, l) = report.GramH(i, j, k, l) - 4.0 * tangential;
                }
    report.min_eig_GramII = min_eig_sym_pairs(report.GramII);
}

void s_sharp(ImmersionReport& report, const Eigen::MatrixXd& g_inv) {
    const int d = static_cast<int>(report.theta.size());
    report.Ssharp = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double v = 0.0;
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l) v += g_inv(k, l) * report.GramII(i, k, j, l);
            report.Ssharp(i, j) = v;
        }
    report.Ssharp = 0.5 * (report.Ssharp + report.Ssharp.transpose()).eval();
    double ks = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    ks += g_inv(i, k) * g_inv(j, l) * report.GramII(i, j, k, l);
    report.kappa_sq = ks;
}

ImmersionReport immersion_report(const MomentTable& table, const Metric& m) {
    ImmersionReport r = ambient_grams(table);
    sff_gram(r, m.g_inv);
    s_sharp(r, m.g_inv);
    return r;
}

Tensor4 gauss_residual(const Tensor4& Riem, const Tensor4& GramII) {
    const int d = Riem.dim();
    Tensor4 res(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    res(i, j, k, l) =
                        Riem(i, j, k, l) - 4.0 * (GramII(i, k, j, l) - GramII(i, l, j, k));
    return res;
}

double efron_gamma_sq_curved_gaussian(double theta) {
    const double w = 1.0 + 4.0 * theta * theta;
    return 4.0 / (w * w * w);
}

double min_eig_sym_pairs(const Tensor4& t) {
    const int d = t.dim();
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) pairs.emplace_back(i, j);
    const int P = static_cast<int>(pairs.size());
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    // Orthonormal basis of symmetric matrices: e_ii, (e_ij + e_ji)/√2.
    auto basis_entries = [&](int p) {
        const auto [i, j] = pairs[p];
        std::vector<std::tuple<int, int, double>> e;
        if (i == j)
            e.emplace_back(i, j, 1.0);
        else {
            e.emplace_back(i, j, inv_sqrt2);
            e.emplace_back(j, i, inv_sqrt2);
        }
        return e;
    };
    Eigen::MatrixXd B(P, P);
    for (int p = 0; p < P; ++p)
        for (int q = 0; q < P; ++q) {
            double acc = 0.0;
            for (const auto& [a, b, ca] : basis_entries(p))
                for (const auto& [c, e, cb] : basis_entries(q)) acc += ca * cb * t(a, b, c, e);
            B(p, q) = acc;
        }
    B = 0.5 * (B + B.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    return es.eigenvalues().minCoeff();
}

}  // namespace igtk
