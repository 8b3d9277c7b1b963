#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hopfns/io.hpp"

using namespace hopfns;
namespace fs = std::filesystem;

namespace {

const std::string kCli = HOPFNS_CLI;
const std::string kData = HOPFNS_DATA;

struct Run {
    int code = -1;
    std::string out, err;
};

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("hopfns_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run run(const std::string& args) {
    const fs::path out = scratch() / "stdout", err = scratch() / "stderr";
    const std::string cmd = kCli + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string data(const std::string& name) {
    return kData + "/" + name;
}

fs::path write_temp(const std::string& name, const json& j) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << j.dump();
    return p;
}

}  // namespace

TEST_CASE("coeffs emits a valid report") {
    const Run r = run("coeffs -i " + data("subcritical.json"));
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK_NOTHROW(check_report_json(j));
    CHECK(j["entries"]["sigma_hash"]["value"] == 4);
}

TEST_CASE("schema errors exit with code 2") {
    Run r = run("coeffs -i " + data("bad_schema.json"));
    CHECK(r.code == 2);
    const json e = json::parse(r.err);
    CHECK(e["error"] == "schema");
    CHECK(e["message"].get<std::string>().rfind("quad.a:", 0) == 0);
    CHECK(r.out.empty());

    r = run("coeffs -i " + data("does_not_exist.json"));
    CHECK(r.code == 2);
    r = run("averaged -i " + data("general.json"));
    CHECK(r.code == 2);
    r = run("coeffs");
    CHECK(r.code == 2);
}

TEST_CASE("diagram output is deterministic") {
    const Run a = run("diagram -i " + data("subcritical.json"));
    const Run b = run("diagram -i " + data("subcritical.json"));
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    std::istringstream in(a.out);
    std::string line;
    int rows = -1;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 20);
    CHECK(a.out.rfind("mu,r0_numeric,r0_predicted,rel_err\n", 0) == 0);
}

TEST_CASE("diagram writes to a file with -o") {
    const fs::path p = scratch() / "diagram.csv";
    const Run r = run("diagram -i " + data("supercritical.json") + " --mu-count 6 -o " + p.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    const std::string csv = slurp(p);
    CHECK(csv.rfind("mu,r0_numeric", 0) == 0);
    const Run again = run("diagram -i " + data("supercritical.json") + " --mu-count 6");
    CHECK(again.out == csv);
}

TEST_CASE("branch json and csv") {
    Run r = run("branch -i " + data("supercritical.json") + " --mu-count 6");
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["branch_kind"] == "supercritical");
    CHECK(j["prediction"]["criticality"] == "supercritical");

    r = run("branch -i " + data("supercritical.json") + " --mu-count 6 --format csv");
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("mu,r0,period,floquet,stability,u0\n", 0) == 0);
}

TEST_CASE("descriptor round trip through the CLI") {
    const Descriptor d = load_descriptor(data("slaved3d.json"));
    const fs::path p = write_temp("slaved_roundtrip.json", to_json(d));
    const Run a = run("coeffs -i " + data("slaved3d.json"));
    const Run b = run("coeffs -i " + p.string());
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("shimmy verdict flips with c4 and restores on double negation") {
    json j = json::parse(slurp(data("shimmy.json")));
    const Run base = run("shimmy -i " + data("shimmy.json"));
    REQUIRE(base.code == 0);
    const json b = json::parse(base.out);
    CHECK_NOTHROW(check_shimmy_json(b));

    j["c"][3] = -j["c"][3].get<double>();
    const Run once = run("shimmy -i " + write_temp("shimmy_neg.json", j).string());
    j["c"][3] = -j["c"][3].get<double>();
    const Run twice = run("shimmy -i " + write_temp("shimmy_negneg.json", j).string());
    REQUIRE(once.code == 0);
    REQUIRE(twice.code == 0);
    const std::string v = b["verdict"], v1 = json::parse(once.out)["verdict"], v2 = json::parse(twice.out)["verdict"];
    CHECK(v != "vertical");
    CHECK(v1 != v);
    CHECK(v2 == v);
    CHECK(twice.out == base.out);
}

TEST_CASE("verify exit codes follow the criteria") {
    Run r = run("verify --only 4");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("PASS  [4]", 0) == 0);
    r = run("verify --only 4 --format json");
    CHECK(r.code == 0);
    const json v = json::parse(r.out);
    CHECK(!v.empty());
}
