#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "igtk/common.hpp"
#include "igtk/correction.hpp"
#include "igtk/expectation.hpp"
#include "igtk/geometry.hpp"
#include "igtk/immersion.hpp"
#include "igtk/mc_harness.hpp"
#include "igtk/model_zoo.hpp"
#include "igtk/serialize.hpp"
#include "igtk/singular.hpp"

namespace {

using igtk::json;

struct EngineChoice {
    std::string kind = "auto";
    int order = 24;
    long samples = 100000;
    std::uint64_t seed = 0;
};

igtk::ExpectationEngine make_engine(const EngineChoice& c, const igtk::ParametricModel& model) {
    if (c.kind == "auto") return igtk::ExpectationEngine::auto_for(model);
    if (c.kind == "gauss-hermite") return igtk::ExpectationEngine::gauss_hermite(c.order);
    if (c.kind == "adaptive") return igtk::ExpectationEngine::adaptive_grid();
    if (c.kind == "discrete") return igtk::ExpectationEngine::discrete_sum();
    if (c.kind == "monte-carlo") return igtk::ExpectationEngine::monte_carlo(c.samples, c.seed);
    throw igtk::UsageError("unknown engine: " + c.kind);
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    Eigen::VectorXd out(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
    return out;
}

igtk::ModelPtr load_model(const std::string& name, int dim, const std::vector<double>& theta) {
    igtk::ModelPtr model = igtk::model_by_name(name, dim);
    if (static_cast<int>(theta.size()) != model->dim())
        throw igtk::UsageError("--theta needs " + std::to_string(model->dim()) +
                               " components for model " + model->name());
    return model;
}

std::string canonical_string(const std::string& sub, const std::vector<std::string>& parts) {
    std::string s = sub;
    for (const auto& p : parts) s += "|" + p;
    return s;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text << "\n";
    else
        igtk::write_text_file(out_path, text + "\n");
}

std::string eig_line(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    std::string line;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        if (i) line += "  ";
        line += igtk::format_double(es.eigenvalues()[i]);
    }
    return line;
}

struct CheckReport {
    bool all_ok = true;
    std::ostringstream lines;

    void check(const std::string& name, double measured, double tol) {
        const bool ok = measured <= tol;
        all_ok = all_ok && ok;
        lines << (ok ? "ok   " : "FAIL ") << name << "  measured=" << igtk::format_double(measured)
              << "  tol=" << igtk::format_double(tol) << "\n";
    }
};

int run_verify(const std::string& out_path) {
    CheckReport rep;
    for (const auto& gp : igtk::builtin_theta_grid()) {
        const igtk::ParametricModel& model = *gp.model;
        const auto engine = igtk::ExpectationEngine::auto_for(model);
        const std::string tag = model.name() + "@" + [&] {
            std::string t;
            for (int i = 0; i < gp.theta.size(); ++i)
                t += (i ? "," : "") + igtk::format_double(gp.theta[i]);
            return t;
        }();

        const auto table = igtk::moment_table(model, gp.theta, engine);
        const auto bart = igtk::bartlett_residuals(table, model, gp.theta, engine);
        rep.check(tag + " bartlett-r1", bart.r1.cwiseAbs().maxCoeff(), 1e-8);
        rep.check(tag + " bartlett-r2", bart.r2.cwiseAbs().maxCoeff(), 1e-8);
        rep.check(tag + " third-moment", igtk::third_moment_identity_residual(table).max_abs(),
                  1e-8);

        const auto m = igtk::metric(table);
        const auto gamma = igtk::christoffel(table, m);
        double gamma_vs_moments = 0.0;
        for (int i = 0; i < model.dim(); ++i)
            for (int j = 0; j < model.dim(); ++j)
                for (int k = 0; k < model.dim(); ++k)
                    gamma_vs_moments =
                        std::max(gamma_vs_moments,
                                 std::abs(gamma.first(i, j, k) -
                                          (table.Ge(i, j, k) + 0.5 * table.T(i, j, k))));
        rep.check(tag + " christoffel-moment-identity", gamma_vs_moments, 1e-6);

        const auto imm = igtk::immersion_report(table, m);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            0.5 * (imm.Ssharp + imm.Ssharp.transpose()));
        rep.check(tag + " ssharp-min-eig", std::max(0.0, -es.eigenvalues().minCoeff()), 1e-9);

        const auto corr = igtk::correction_report(model, gp.theta, engine);
        rep.check(tag + " chart-tangency-e", corr.tangency_residual_e, 1e-6);
        rep.check(tag + " chart-tangency-kappa", corr.tangency_residual_kappa, 1e-6);
        rep.check(tag + " p-full-vs-reduced", corr.full_vs_reduced, 1e-6);
    }

    {  // Gauss equation on the embedded graph surface.
        const auto model = igtk::graph_surface_gaussian();
        const auto engine = igtk::ExpectationEngine::auto_for(*model);
        Eigen::VectorXd theta(2);
        theta << 0.3, -0.2;
        const auto snap = igtk::geometry_snapshot(*model, theta, engine);
        const auto table = igtk::moment_table(*model, theta, engine);
        const auto m = igtk::metric(table);
        const auto imm = igtk::immersion_report(table, m);
        rep.check("graph-surface gauss-residual",
                  igtk::gauss_residual(snap.Riem, imm.GramII).max_abs(), 1e-5);
        rep.check("graph-surface riemann-antisym", snap.riemann_antisym_residual, 1e-6);
        rep.check("graph-surface bianchi", snap.bianchi_residual, 1e-6);
    }

    {  // Rank-deficient family: null direction must carry zero score variance.
        const auto model = igtk::degenerate_sum_gaussian();
        Eigen::VectorXd theta(2);
        theta << 0.3, -0.1;
        const auto nd = igtk::null_directions(*model, theta);
        rep.check("degenerate-sum null-count-error",
                  std::abs(static_cast<double>(nd.basis.size()) - 1.0), 0.0);
        double worst = 0.0;
        for (double q : nd.verified_quadratic) worst = std::max(worst, std::abs(q));
        rep.check("degenerate-sum null-quadratic", worst, 1e-10);
    }

    rep.lines << (rep.all_ok ? "verify: all checks passed\n" : "verify: FAILURES present\n");
    emit(rep.lines.str(), out_path);
    return rep.all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"score-moment geometry toolkit"};
    app.require_subcommand(1);

    std::string model_name;
    int dim = 1;
    std::vector<double> theta_in;
    EngineChoice engine_choice;
    std::string out_path;
    std::string format = "json";

    auto add_model_flags = [&](CLI::App* sub) {
        sub->add_option("--model", model_name, "builtin model name")->required();
        sub->add_option("--dim", dim, "dimension for gaussian-mean");
        sub->add_option("--theta", theta_in, "parameter point, comma separated")
            ->required()
            ->delimiter(',');
    };
    auto add_engine_flags = [&](CLI::App* sub) {
        sub->add_option("--engine", engine_choice.kind,
                        "auto|gauss-hermite|adaptive|discrete|monte-carlo");
        sub->add_option("--order", engine_choice.order, "Gauss-Hermite order");
        sub->add_option("--mc-samples", engine_choice.samples, "Monte Carlo sample count");
    };
    auto add_out_flags = [&](CLI::App* sub, bool with_format) {
        sub->add_option("--out", out_path, "write to file instead of stdout");
        if (with_format) sub->add_option("--format", format, "json|csv");
    };

    auto* tensors_cmd = app.add_subcommand("tensors", "score-moment table at a parameter point");
    add_model_flags(tensors_cmd);
    add_engine_flags(tensors_cmd);
    add_out_flags(tensors_cmd, false);

    auto* decompose_cmd =
        app.add_subcommand("decompose", "second-order covariance decomposition at a point");
    add_model_flags(decompose_cmd);
    add_engine_flags(decompose_cmd);
    add_out_flags(decompose_cmd, false);

    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo covariance sweep");
    add_model_flags(simulate_cmd);
    add_engine_flags(simulate_cmd);
    add_out_flags(simulate_cmd, true);
    std::vector<long> n_grid{50, 100, 200};
    long replicates = 1000;
    std::uint64_t seed = 0;
    bool with_fit = false;
    simulate_cmd->add_option("--n-grid", n_grid, "sample sizes, comma separated")->delimiter(',');
    simulate_cmd->add_option("--replicates", replicates, "replicates per sample size");
    simulate_cmd->add_option("--seed", seed, "master seed");
    simulate_cmd->add_flag("--fit", with_fit, "also fit n*cov = C1 + C2/n against predictions");

    auto* verify_cmd = app.add_subcommand("verify", "deterministic invariant checks");
    verify_cmd->add_option("--out", out_path, "write report to file instead of stdout");

    auto* singular_cmd = app.add_subcommand("singular", "normal-crossing rate report");
    std::string spec_path, library_name;
    std::vector<double> sing_n_grid;
    std::vector<double> b_weights;
    bool list_library = false;
    singular_cmd->add_option("--spec", spec_path, "JSON spec file");
    singular_cmd->add_option("--library", library_name, "builtin spec name");
    singular_cmd->add_flag("--list", list_library, "list builtin spec names");
    singular_cmd->add_option("--n-grid", sing_n_grid, "n values, comma separated")->delimiter(',');
    singular_cmd->add_option("--b", b_weights, "mse weights, comma separated")->delimiter(',');
    add_out_flags(singular_cmd, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (*tensors_cmd) {
            const auto model = load_model(model_name, dim, theta_in);
            const auto theta = to_vector(theta_in);
            const auto engine = make_engine(engine_choice, *model);
            const auto table = igtk::moment_table(*model, theta, engine);
            json doc = igtk::document(
                canonical_string("tensors", {model->name(), engine.describe(),
                                             igtk::to_json(theta).dump()}),
                engine_choice.seed);
            doc["engine"] = engine.describe();
            doc["table"] = igtk::to_json(table);
            emit(doc.dump(2), out_path);
            return 0;
        }
        if (*decompose_cmd) {
            const auto model = load_model(model_name, dim, theta_in);
            const auto theta = to_vector(theta_in);
            const auto engine = make_engine(engine_choice, *model);
            const auto report = igtk::correction_report(*model, theta, engine);
            std::cout << "eigenvalues (ascending)\n";
            std::cout << "  P_user      : " << eig_line(report.P_user) << "\n";
            std::cout << "  0.5*Rsharp  : " << eig_line(0.5 * report.Rsharp_user) << "\n";
            std::cout << "  Ssharp      : " << eig_line(report.Ssharp_user) << "\n";
            std::cout << "  D           : " << eig_line(report.D_user) << "\n";
            if (!out_path.empty()) {
                json doc = igtk::document(
                    canonical_string("decompose", {model->name(), engine.describe(),
                                                   igtk::to_json(theta).dump()}),
                    engine_choice.seed);
                doc["engine"] = engine.describe();
                doc["report"] = igtk::to_json(report);
                emit(doc.dump(2), out_path);
            }
            return 0;
        }
        if (*simulate_cmd) {
            const auto model = load_model(model_name, dim, theta_in);
            const auto theta = to_vector(theta_in);
            igtk::SimulationPlan plan;
            plan.model = model;
            plan.theta_true = theta;
            plan.n_grid = n_grid;
            plan.replicates = replicates;
            plan.master_seed = seed;
            const auto result = igtk::simulate_covariance(plan);
            if (format == "csv") {
                emit(igtk::simulation_csv(result), out_path);
                return 0;
            }
            if (format != "json") throw igtk::UsageError("unknown format: " + format);
            json doc = igtk::document(
                canonical_string("simulate",
                                 {model->name(), igtk::to_json(theta).dump(),
                                  std::to_string(replicates), std::to_string(n_grid.size())}),
                seed);
            doc["result"] = igtk::to_json(result);
            if (with_fit) {
                const auto engine = make_engine(engine_choice, *model);
                const auto report = igtk::correction_report(*model, theta, engine);
                const auto table = igtk::moment_table(*model, theta, engine);
                doc["fit"] = igtk::to_json(igtk::fit_expansion(result, report, table.g));
            }
            emit(doc.dump(2), out_path);
            return 0;
        }
        if (*verify_cmd) return run_verify(out_path);
        if (*singular_cmd) {
            if (list_library) {
                std::string names;
                for (const auto& s : igtk::builtin_spec_library()) names += s.name + "\n";
                emit(names, out_path);
                return 0;
            }
            igtk::NormalCrossingSpec spec;
            std::string spec_tag;
            if (!spec_path.empty()) {
                spec = igtk::spec_from_json(json::parse(igtk::read_text_file(spec_path)));
                spec_tag = spec_path;
            } else if (!library_name.empty()) {
                bool found = false;
                for (const auto& s : igtk::builtin_spec_library())
                    if (s.name == library_name) {
                        spec = s.spec;
                        spec_tag = s.name;
                        found = true;
                    }
                if (!found) throw igtk::UsageError("unknown library spec: " + library_name);
            } else {
                throw igtk::UsageError("singular requires --spec or --library");
            }
            std::vector<double> ns = sing_n_grid;
            if (ns.empty())
                for (int i = 0; i <= 8; ++i) ns.push_back(std::pow(10.0, 2.0 + 0.5 * i));
            const auto rep = igtk::singular_report(spec, ns, b_weights);
            if (format == "csv") {
                emit(igtk::singular_csv(rep), out_path);
                return 0;
            }
            if (format != "json") throw igtk::UsageError("unknown format: " + format);
            json doc = igtk::document(
                canonical_string("singular", {spec_tag, igtk::to_json(spec).dump()}), 0);
            doc["report"] = igtk::to_json(rep);
            emit(doc.dump(2), out_path);
            return 0;
        }
    } catch (const igtk::Error& e) {
        json err;
        err["error"]["kind"] = e.kind();
        err["error"]["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err;
        err["error"]["kind"] = "Internal";
        err["error"]["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 2;
}
