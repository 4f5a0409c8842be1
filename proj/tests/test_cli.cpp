#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

std::string binary() {
    const char* p = std::getenv("MSMAC_BIN");
    REQUIRE(p != nullptr);
    return p;
}

fs::path work_dir() {
    auto p = fs::temp_directory_path() / "msmac_cli_test";
    fs::create_directories(p);
    return p;
}

int run(const std::string& args, const fs::path& capture) {
    const std::string cmd = binary() + " " + args + " >" + capture.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_config(const fs::path& p, const std::string& body) {
    std::ofstream out(p);
    out << body;
}

const char* kGoodConfig = R"({
  "seed": 7,
  "devices": {"generator": {"hp": 4, "rp": 12, "lp": 14, "rate_min": 1.0, "rate_max": 5.0}},
  "params": {"n_m": 6, "r_h": 4, "r_r": 12, "r_l": 24},
  "qos": {"delta": [0.002, 0.02, 0.08], "rho": [0.03, 0.08, 0.12]},
  "sim": {"duration": 10.0}
})";

} // namespace

TEST_CASE("assign succeeds on a feasible config") {
    auto dir = work_dir();
    write_config(dir / "good.json", kGoodConfig);
    const int rc = run("--config " + (dir / "good.json").string() + " --out " +
                           (dir / "runs").string() + " assign",
                       dir / "assign.log");
    REQUIRE(rc == 0);
    REQUIRE(slurp(dir / "assign.log").find("F_s=1") != std::string::npos);
}

TEST_CASE("a missing config key names the key and exits nonzero") {
    auto dir = work_dir();
    write_config(dir / "missing.json", R"({"devices": {"generator": {"hp": 1}}})");
    const int rc = run("--config " + (dir / "missing.json").string() + " assign",
                       dir / "missing.log");
    REQUIRE(rc == 2);
    const auto log = slurp(dir / "missing.log");
    REQUIRE(log.find("rp") != std::string::npos);
}

TEST_CASE("a malformed config reports line and column") {
    auto dir = work_dir();
    write_config(dir / "broken.json", "{\n  \"seed\": 1,\n  oops\n}");
    const int rc = run("--config " + (dir / "broken.json").string() + " assign",
                       dir / "broken.log");
    REQUIRE(rc == 2);
    const auto log = slurp(dir / "broken.log");
    REQUIRE(log.find("line 3") != std::string::npos);
    REQUIRE(log.find("column") != std::string::npos);
}

TEST_CASE("infeasible scheduling uses a distinct exit code") {
    auto dir = work_dir();
    write_config(dir / "tight.json", R"({
      "seed": 3,
      "devices": {"generator": {"hp": 10, "rp": 0, "lp": 0, "rate_min": 1.0, "rate_max": 5.0}},
      "params": {"n_m": 1, "r_h": 1, "r_r": 1, "r_l": 1},
      "qos": {"delta": [0.001, 0.01, 0.08], "rho": [0.0, 0.0, 0.0]},
      "sim": {"duration": 5.0}
    })");
    const int rc = run("--config " + (dir / "tight.json").string() + " assign",
                       dir / "tight.log");
    REQUIRE(rc == 3);
}

TEST_CASE("simulate twice with the same seed writes identical reports") {
    auto dir = work_dir();
    write_config(dir / "good.json", kGoodConfig);
    fs::remove_all(dir / "r1");
    fs::remove_all(dir / "r2");
    REQUIRE(run("--config " + (dir / "good.json").string() + " --seed 7 --out " +
                    (dir / "r1").string() + " simulate",
                dir / "sim1.log") == 0);
    REQUIRE(run("--config " + (dir / "good.json").string() + " --seed 7 --out " +
                    (dir / "r2").string() + " simulate",
                dir / "sim2.log") == 0);
    fs::path rep1, rep2;
    for (const auto& e : fs::recursive_directory_iterator(dir / "r1"))
        if (e.path().filename() == "report.csv") rep1 = e.path();
    for (const auto& e : fs::recursive_directory_iterator(dir / "r2"))
        if (e.path().filename() == "report.csv") rep2 = e.path();
    REQUIRE(!rep1.empty());
    REQUIRE(!rep2.empty());
    REQUIRE(slurp(rep1) == slurp(rep2));
}

TEST_CASE("replicate rejects unknown figures") {
    auto dir = work_dir();
    REQUIRE(run("--out " + (dir / "runs").string() + " replicate fig99",
                dir / "fig99.log") == 2);
}

TEST_CASE("report prints a class summary from a saved run") {
    auto dir = work_dir();
    write_config(dir / "good.json", kGoodConfig);
    fs::remove_all(dir / "rep");
    REQUIRE(run("--config " + (dir / "good.json").string() + " --out " +
                    (dir / "rep").string() + " simulate",
                dir / "sim.log") == 0);
    fs::path run_dir;
    for (const auto& e : fs::directory_iterator(dir / "rep")) run_dir = e.path();
    REQUIRE(run("report " + run_dir.string(), dir / "report.log") == 0);
    const auto log = slurp(dir / "report.log");
    REQUIRE(log.find("HP") != std::string::npos);
    REQUIRE(log.find("mean_delay_ms") != std::string::npos);
}
