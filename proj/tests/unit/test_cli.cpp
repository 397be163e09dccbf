#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "amdim/cli.hpp"

#include <json.hpp>

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using amdim::cli::run_cli;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("amdim_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t data_rows(const fs::path& csv) {
    std::ifstream in(csv);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') ++n;
    }
    return n - 1;  // header
}

nlohmann::json manifest(const TempDir& d) { return nlohmann::json::parse(slurp(d.path / "manifest.json")); }

}  // namespace

TEST_CASE("usage errors exit with 2") {
    TempDir d("usage");
    CHECK(run({"--out", d.str(), "dimension", "--gamma", "1.0"}).code == amdim::cli::kExitUsage);
    CHECK(run({"--out", d.str(), "dimension", "--a", "1.5"}).code == amdim::cli::kExitUsage);
    CHECK(run({"--out", d.str(), "region", "--grid", "10by10"}).code == amdim::cli::kExitUsage);
    CHECK(run({"--out", d.str(), "region", "--grid", "1x10"}).code == amdim::cli::kExitUsage);
    CHECK(run({"--out", d.str(), "wald", "--trials", "many"}).code == amdim::cli::kExitUsage);
    CHECK(run({"--out", d.str(), "wald", "--trials", "1.5"}).code == amdim::cli::kExitUsage);
    CHECK(run({"--out", d.str(), "frobnicate"}).code == amdim::cli::kExitUsage);
    CHECK(run({"--out", d.str()}).code == amdim::cli::kExitUsage);
    CHECK(run({"--out", d.str(), "--format", "xml", "region"}).code == amdim::cli::kExitUsage);
    CHECK(run({"--help"}).code == amdim::cli::kExitOk);
}

TEST_CASE("region writes one row per grid node") {
    TempDir d("region");
    const Run r = run({"--out", d.str(), "region", "--grid", "7x5"});
    CHECK(r.code == amdim::cli::kExitOk);
    CHECK(data_rows(d.path / "region.csv") == 35);
    CHECK(fs::exists(d.path / "region.json"));
    CHECK(fs::exists(d.path / "region.svg"));
    const auto m = manifest(d);
    CHECK(m["subcommand"] == "region");
    CHECK(m["exit_status"] == 0);
}

TEST_CASE("format filter limits the files written") {
    TempDir d("format");
    REQUIRE(run({"--out", d.str(), "--format", "csv", "region", "--grid", "4x4"}).code == 0);
    CHECK(fs::exists(d.path / "region.csv"));
    CHECK_FALSE(fs::exists(d.path / "region.json"));
    CHECK_FALSE(fs::exists(d.path / "region.svg"));
    CHECK(fs::exists(d.path / "manifest.json"));
}

TEST_CASE("esn sweep writes one row per point and accepts scientific counts") {
    TempDir d("esn");
    const Run r = run({"--out", d.str(), "esn-sweep", "--points", "6", "--trials", "1e3", "--cap", "3e3"});
    CHECK(r.code == amdim::cli::kExitOk);
    CHECK(data_rows(d.path / "esn.csv") == 6);
    const auto m = manifest(d);
    CHECK(m["parameters"]["trials"] == 1000);
}

TEST_CASE("seed comes from AMDIM_SEED when set") {
    TempDir d("seed");
    ::setenv("AMDIM_SEED", "12345", 1);
    const Run r = run({"--out", d.str(), "--seed", "9", "wald"});
    ::unsetenv("AMDIM_SEED");
    CHECK(r.code == amdim::cli::kExitOk);
    const auto m = manifest(d);
    CHECK(m["seed"] == 12345);
    CHECK(m["seed_source"] == "AMDIM_SEED");

    TempDir e("seed_flag");
    REQUIRE(run({"--out", e.str(), "--seed", "9", "wald"}).code == 0);
    CHECK(manifest(e)["seed"] == 9);
}

TEST_CASE("outputs do not depend on the thread count") {
    const std::vector<std::vector<std::string>> commands{
        {"kac", "--a", "0.1", "--gamma", "1.3", "--len", "2e5"},
        {"measure", "--a", "0.1", "--gamma", "1.3", "--len", "2e5", "--bins", "256"},
        {"wald", "--trials", "5000"},
        {"esn-sweep", "--points", "5", "--trials", "500"},
    };
    for (const auto& cmd : commands) {
        TempDir one("t1");
        TempDir three("t3");
        std::vector<std::string> a{"--out", one.str(), "--threads", "1"};
        std::vector<std::string> b{"--out", three.str(), "--threads", "3"};
        a.insert(a.end(), cmd.begin(), cmd.end());
        b.insert(b.end(), cmd.begin(), cmd.end());
        const Run ra = run(a);
        const Run rb = run(b);
        INFO(cmd.front());
        CHECK(ra.code == rb.code);
        std::size_t files = 0;
        for (const auto& entry : fs::directory_iterator(one.path)) {
            const fs::path other = three.path / entry.path().filename();
            REQUIRE(fs::exists(other));
            CHECK(slurp(entry.path()) == slurp(other));
            ++files;
        }
        CHECK(files >= 2);
    }
}

TEST_CASE("failed checks exit with 1 and are recorded") {
    TempDir d("fail");
    const Run r = run({"--out", d.str(), "walk-exact", "--gamma", "1.25", "--trials", "0"});
    CHECK(r.code == amdim::cli::kExitToleranceFailure);
    CHECK(r.out.find("FAIL") != std::string::npos);
    const auto m = manifest(d);
    CHECK(m["exit_status"] == 1);
    bool any_failed = false;
    for (const auto& c : m["checks"]) any_failed = any_failed || !c["pass"].get<bool>();
    CHECK(any_failed);
}
