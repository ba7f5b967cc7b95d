#include "igtk/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "igtk/common.hpp"

namespace igtk {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string config_hash(const std::string& canonical) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a offset basis
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

json document(const std::string& canonical_config, std::uint64_t seed) {
    json j;
    j["version"] = IGTK_VERSION;
    j["config_hash"] = config_hash(canonical_config);
    j["seed"] = seed;
    return j;
}

json to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json to_json(const Eigen::MatrixXd& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    json a = json::array();
    for (int i = 0; i < m.rows(); ++i)
        for (int k = 0; k < m.cols(); ++k) a.push_back(m(i, k));
    j["data"] = std::move(a);
    return j;
}

json to_json(const Tensor3& t) {
    json j;
    j["dim"] = t.dim();
    j["data"] = t.flat();
    return j;
}

json to_json(const Tensor4& t) {
    json j;
    j["dim"] = t.dim();
    j["data"] = t.flat();
    return j;
}

json to_json(const MomentTable& t) {
    json j;
    j["theta"] = to_json(t.theta);
    j["g"] = to_json(t.g);
    j["T"] = to_json(t.T);
    j["Ge"] = to_json(t.Ge);
    j["kappa"] = to_json(t.kappa);
    j["Q"] = to_json(t.Q);
    j["M"] = to_json(t.M);
    j["F"] = to_json(t.F);
    j["Es1"] = to_json(t.Es1);
    j["Es2"] = to_json(t.Es2);
    j["err"] = t.err;
    return j;
}

json to_json(const GeometrySnapshot& s) {
    json j;
    j["theta"] = to_json(s.theta);
    j["g"] = to_json(s.g);
    j["g_inv"] = to_json(s.g_inv);
    j["dg"] = to_json(s.dg);
    j["Gamma_first"] = to_json(s.Gamma_first);
    j["Gamma_second"] = to_json(s.Gamma_second);
    j["Riem"] = to_json(s.Riem);
    j["Rsharp"] = to_json(s.Rsharp);
    j["min_eig_g"] = s.min_eig_g;
    j["riemann_antisym_residual"] = s.riemann_antisym_residual;
    j["riemann_pair_residual"] = s.riemann_pair_residual;
    j["bianchi_residual"] = s.bianchi_residual;
    return j;
}

json to_json(const ImmersionReport& r) {
    json j;
    j["theta"] = to_json(r.theta);
    j["GramE"] = to_json(r.GramE);
    j["GramMix"] = to_json(r.GramMix);
    j["GramH"] = to_json(r.GramH);
    j["radial"] = to_json(r.radial);
    j["GramII"] = to_json(r.GramII);
    j["Ssharp"] = to_json(r.Ssharp);
    j["kappa_sq"] = r.kappa_sq;
    j["min_eig_GramII"] = r.min_eig_GramII;
    return j;
}

json to_json(const NormalChart& c) {
    json j;
    j["theta0"] = to_json(c.theta0);
    j["A"] = to_json(c.A);
    j["A_inv"] = to_json(c.A_inv);
    j["Hq"] = to_json(c.Hq);
    return j;
}

json to_json(const CorrectionReport& r) {
    json j;
    j["theta0"] = to_json(r.theta0);
    j["chart"] = to_json(r.chart);
    j["moments_nc"] = to_json(r.moments_nc);
    j["P_nc"] = to_json(r.P_nc);
    j["P_user"] = to_json(r.P_user);
    j["Rsharp_user"] = to_json(r.Rsharp_user);
    j["Ssharp_user"] = to_json(r.Ssharp_user);
    j["D_user"] = to_json(r.D_user);
    j["full_vs_reduced"] = r.full_vs_reduced;
    j["tangency_residual_e"] = r.tangency_residual_e;
    j["tangency_residual_kappa"] = r.tangency_residual_kappa;
    return j;
}

json to_json(const SimulationResult& r) {
    json j;
    j["model"] = r.plan.model ? r.plan.model->name() : "";
    j["theta_true"] = to_json(r.plan.theta_true);
    j["n_grid"] = r.plan.n_grid;
    j["replicates"] = r.plan.replicates;
    j["master_seed"] = r.plan.master_seed;
    j["valid"] = r.valid;
    j["invalid_reason"] = r.invalid_reason;
    json per = json::array();
    for (const auto& s : r.per_n) {
        json p;
        p["n"] = s.n;
        p["cov"] = to_json(s.cov);
        p["cov_se"] = to_json(s.cov_se);
        p["bias"] = to_json(s.bias);
        p["bias_se"] = to_json(s.bias_se);
        p["dropped"] = s.dropped;
        per.push_back(std::move(p));
    }
    j["per_n"] = std::move(per);
    return j;
}

json to_json(const FitRecord& f) {
    json j;
    j["C1"] = to_json(f.C1);
    j["C1_se"] = to_json(f.C1_se);
    j["C2"] = to_json(f.C2);
    j["C2_se"] = to_json(f.C2_se);
    j["z1"] = to_json(f.z1);
    j["z2"] = to_json(f.z2);
    j["max_abs_z"] = f.max_abs_z;
    return j;
}

json to_json(const NormalCrossingSpec& s) {
    json j;
    json terms = json::array();
    for (const auto& t : s.terms) {
        json jt;
        jt["c"] = t.c;
        jt["k"] = t.k;
        jt["h"] = t.h;
        terms.push_back(std::move(jt));
    }
    j["terms"] = std::move(terms);
    j["epsilon"] = s.epsilon;
    j["psi0"] = s.psi0;
    return j;
}

json to_json(const SingularReport& r) {
    json j;
    j["spec"] = to_json(r.spec);
    j["lambda"] = {{"num", r.lambda.num}, {"den", r.lambda.den}, {"value", r.lambda.value()}};
    j["mse_rate"] = r.mse_rate;
    j["n_grid"] = r.n_grid;
    j["z_values"] = r.z_values;
    j["mse_values"] = r.mse_values;
    j["z_fit"] = {{"slope", r.z_fit.slope},
                  {"intercept", r.z_fit.intercept},
                  {"residual", r.z_fit.residual}};
    j["mse_fit"] = {{"slope", r.mse_fit.slope},
                    {"intercept", r.mse_fit.intercept},
                    {"residual", r.mse_fit.residual}};
    j["a_constants"] = r.a_constants;
    return j;
}

NormalCrossingSpec spec_from_json(const json& j) {
    NormalCrossingSpec s;
    if (!j.contains("terms") || !j["terms"].is_array())
        throw InvalidSpec("spec json needs a 'terms' array");
    for (const auto& jt : j["terms"]) {
        NormalCrossingTerm t;
        t.c = jt.value("c", 1.0);
        t.k = jt.value("k", 1);
        t.h = jt.value("h", 0);
        s.terms.push_back(t);
    }
    s.epsilon = j.value("epsilon", 1.0);
    s.psi0 = j.value("psi0", 1.0);
    s.validate();
    return s;
}

std::string simulation_csv(const SimulationResult& r) {
    std::ostringstream out;
    out << "n,i,j,cov,cov_se,dropped\n";
    for (const auto& s : r.per_n)
        for (int i = 0; i < s.cov.rows(); ++i)
            for (int j = 0; j < s.cov.cols(); ++j)
                out << s.n << ',' << i << ',' << j << ',' << format_double(s.cov(i, j)) << ','
                    << format_double(s.cov_se(i, j)) << ',' << s.dropped << '\n';
    return out.str();
}

std::string singular_csv(const SingularReport& r) {
    std::ostringstream out;
    out << "n,z_n,posterior_mse\n";
    for (std::size_t i = 0; i < r.n_grid.size(); ++i)
        out << format_double(r.n_grid[i]) << ',' << format_double(r.z_values[i]) << ','
            << format_double(r.mse_values[i]) << '\n';
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open for writing: " + path);
    f << content;
    if (!f) throw UsageError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace igtk
