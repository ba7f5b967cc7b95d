#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

// Drives the installed binary through its public interface; the test runner
// passes the executable path via IGTK_CLI.

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CmdResult run_cli(const std::string& args) {
    const char* exe = std::getenv("IGTK_CLI");
    REQUIRE(exe != nullptr);
    static int counter = 0;
    ++counter;
    const std::string out_path = "cli_stdout_" + std::to_string(counter) + ".tmp";
    const std::string err_path = "cli_stderr_" + std::to_string(counter) + ".tmp";
    const std::string cmd =
        std::string("\"") + exe + "\" " + args + " > " + out_path + " 2> " + err_path;
    const int status = std::system(cmd.c_str());
    CmdResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return r;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("missing subcommand is a usage error") {
    const CmdResult r = run_cli("");
    CHECK(r.exit_code == 2);
    CHECK(!r.err.empty());
}

TEST_CASE("help exits cleanly") {
    const CmdResult r = run_cli("--help");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "tensors"));
    CHECK(contains(r.out, "singular"));
}

TEST_CASE("unknown model produces a structured error") {
    const CmdResult r = run_cli("tensors --model nope --theta 1.0");
    CHECK(r.exit_code == 1);
    const auto err = nlohmann::json::parse(r.err);
    CHECK(err["error"]["kind"] == "InvalidSpec");
}

TEST_CASE("theta dimension mismatch is rejected") {
    const CmdResult r = run_cli("tensors --model poisson --theta 1.0,2.0");
    CHECK(r.exit_code == 1);
    const auto err = nlohmann::json::parse(r.err);
    CHECK(err["error"]["kind"] == "UsageError");
}

TEST_CASE("tensors emits a versioned, hashed, reproducible document") {
    const CmdResult r1 = run_cli("tensors --model poisson --theta 1.0");
    REQUIRE(r1.exit_code == 0);
    const auto doc = nlohmann::json::parse(r1.out);
    CHECK(doc["version"] == "1.0.0");
    CHECK(doc["config_hash"].get<std::string>().size() == 16);
    REQUIRE(doc.contains("table"));
    CHECK(doc["table"].contains("F"));
    CHECK(doc["table"]["g"]["data"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-12));

    const CmdResult r2 = run_cli("tensors --model poisson --theta 1.0");
    CHECK(r2.exit_code == 0);
    CHECK(r1.out == r2.out);  // byte-identical rerun

    const CmdResult r3 = run_cli("tensors --model poisson --theta 2.0");
    CHECK(nlohmann::json::parse(r3.out)["config_hash"] != doc["config_hash"]);
}

TEST_CASE("decompose prints the eigenvalue split") {
    const CmdResult r = run_cli("decompose --model curved-gaussian-efron --theta 0.0");
    REQUIRE(r.exit_code == 0);
    CHECK(contains(r.out, "eigenvalues (ascending)"));
    CHECK(contains(r.out, "P_user"));
    CHECK(contains(r.out, "Ssharp"));
}

TEST_CASE("verify runs the invariant battery") {
    const CmdResult r = run_cli("verify");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "verify: all checks passed"));
    CHECK(!contains(r.out, "FAIL"));
}

TEST_CASE("simulate csv output and determinism") {
    const std::string args =
        "simulate --model gaussian-mean --dim 1 --theta 0.5 "
        "--n-grid 25,50 --replicates 1000 --seed 7 --format csv";
    const CmdResult r1 = run_cli(args);
    REQUIRE(r1.exit_code == 0);
    CHECK(contains(r1.out, "n,i,j,cov,cov_se,dropped"));
    CHECK(contains(r1.out, "\n25,"));
    CHECK(contains(r1.out, "\n50,"));
    const CmdResult r2 = run_cli(args);
    CHECK(r1.out == r2.out);
}

TEST_CASE("simulate json carries the plan and per-n statistics") {
    const CmdResult r = run_cli(
        "simulate --model gaussian-mean --dim 1 --theta 0.5 "
        "--n-grid 25,50 --replicates 1000 --seed 7");
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["seed"] == 7);
    CHECK(doc["result"]["valid"] == true);
    REQUIRE(doc["result"]["per_n"].size() == 2);
    CHECK(doc["result"]["per_n"][0]["n"] == 25);
    // n*cov within a loose band of the inverse information (= 1)
    const double cov = doc["result"]["per_n"][0]["cov"]["data"][0].get<double>();
    CHECK(25.0 * cov > 0.8);
    CHECK(25.0 * cov < 1.2);
}

TEST_CASE("simulate rejects a non-increasing sample-size grid") {
    const CmdResult r = run_cli(
        "simulate --model gaussian-mean --dim 1 --theta 0.5 "
        "--n-grid 50,25 --replicates 1000 --seed 7");
    CHECK(r.exit_code == 1);
    CHECK(nlohmann::json::parse(r.err)["error"]["kind"] == "InvalidSpec");
}

TEST_CASE("singular library listing and csv sweep") {
    const CmdResult list = run_cli("singular --list");
    REQUIRE(list.exit_code == 0);
    CHECK(contains(list.out, "quartic-line"));
    CHECK(contains(list.out, "regular-2d"));

    const CmdResult csv = run_cli("singular --library regular-2d --format csv");
    REQUIRE(csv.exit_code == 0);
    CHECK(contains(csv.out, "n,z_n,posterior_mse"));
    CHECK(contains(csv.out, "\n100,"));
}

TEST_CASE("singular json reports the exact learning coefficient") {
    const CmdResult r = run_cli("singular --library regular-2d");
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["report"]["lambda"]["num"] == 1);
    CHECK(doc["report"]["lambda"]["den"] == 1);
    CHECK(doc["report"]["z_values"].size() == 9);
}

TEST_CASE("singular accepts a spec file") {
    const std::string spec_path = "cli_spec_quartic.tmp.json";
    {
        std::ofstream f(spec_path);
        f << R"({"terms":[{"c":1.0,"k":2,"h":0}]})";
    }
    const CmdResult r = run_cli("singular --spec " + spec_path + " --n-grid 1e2,1e3,1e4,1e5,1e6");
    std::remove(spec_path.c_str());
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["report"]["lambda"]["num"] == 1);
    CHECK(doc["report"]["lambda"]["den"] == 4);
    const double slope = doc["report"]["z_fit"]["slope"].get<double>();
    CHECK(std::abs(slope + 0.25) < 1e-6);
}

TEST_CASE("singular without a source is a usage error") {
    const CmdResult r = run_cli("singular");
    CHECK(r.exit_code == 1);
    const auto err = nlohmann::json::parse(r.err);
    CHECK(err["error"]["kind"] == "UsageError");
}
