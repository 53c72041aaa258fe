// Binary-level checks: exit codes, dump-config round trip, config search path.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "bdmac/config.hpp"

using namespace bdmac;
namespace fs = std::filesystem;

namespace {

const std::string kCli = BDMAC_CLI_PATH;

int run(const std::string& args) {
    const int rc = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string capture(const std::string& args, const fs::path& tmp) {
    const fs::path out = tmp / "stdout.txt";
    REQUIRE(std::system(
                (kCli + " " + args + " > " + out.string() + " 2>/dev/null").c_str()) ==
            0);
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const char* name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("exit codes") {
    const fs::path tmp = fresh_dir("bdmac_cli_exit");
    SUBCASE("success") {
        CHECK(run("--out " + (tmp / "ok").string() + " analyze") == 0);
    }
    SUBCASE("malformed config leaves no output files") {
        const fs::path bad = tmp / "bad.json";
        std::ofstream(bad) << "{ this is not json";
        const fs::path out = tmp / "should_not_exist";
        CHECK(run("--config " + bad.string() + " --out " + out.string() +
                  " analyze") == 2);
        CHECK(!fs::exists(out / "analysis.txt"));
        CHECK(!fs::exists(out / "reliability.csv"));
    }
    SUBCASE("unknown config key") {
        const fs::path bad = tmp / "unknown.json";
        std::ofstream(bad) << "{\"made_up\": 1}";
        CHECK(run("--config " + bad.string() + " analyze") == 2);
    }
    SUBCASE("missing config file") {
        CHECK(run("--config /nonexistent.json analyze") == 2);
    }
}

TEST_CASE("dump-config round trip through the binary") {
    const fs::path tmp = fresh_dir("bdmac_cli_dump");
    const std::string first = capture("analyze --dump-config", tmp);
    const AppConfig cfg = config_from_json_text(first);
    CHECK(cfg.scenario.n_stations == 100);
    // feeding the dump back reproduces it byte for byte
    const fs::path cfg_path = tmp / "cfg.json";
    std::ofstream(cfg_path) << first;
    const std::string second =
        capture("--config " + cfg_path.string() + " analyze --dump-config", tmp);
    CHECK(first == second);
}

TEST_CASE("sweep emits one row per axis point") {
    const fs::path tmp = fresh_dir("bdmac_cli_rows");
    CHECK(run("--out " + tmp.string() +
              " sweep --axis n_stations --from 10 --to 500 --steps 50") == 0);
    std::ifstream in(tmp / "sweep_n_stations.csv");
    std::string line;
    int rows = -1;  // header
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 50);
}

TEST_CASE("failed sweep points surface as nan rows") {
    const fs::path tmp = fresh_dir("bdmac_cli_nan");
    // alpha pushes the acceptance probability to 1.0 in double precision,
    // where the logarithmic rate mapping has no value
    AppConfig cfg;
    cfg.platoon.gap.alpha = 60.0;
    const fs::path cfg_path = tmp / "cfg.json";
    std::ofstream(cfg_path) << dump_config(cfg);
    CHECK(run("--config " + cfg_path.string() + " --out " + tmp.string() +
              " platoon --values 5 --mapping log") == 0);
    std::ifstream in(tmp / "platoon_log.csv");
    std::string header, row;
    REQUIRE(std::getline(in, header));
    REQUIRE(std::getline(in, row));
    CHECK(row.find("nan") != std::string::npos);
}

TEST_CASE("config resolution through the environment directory") {
    const fs::path tmp = fresh_dir("bdmac_cli_env");
    AppConfig cfg;
    cfg.scenario.n_stations = 3;
    std::ofstream(tmp / "scenario.json") << dump_config(cfg);
    setenv("BDMAC_CONFIG_DIR", tmp.string().c_str(), 1);
    CHECK(run("--config scenario.json --out " + (tmp / "out").string() +
              " analyze") == 0);
    unsetenv("BDMAC_CONFIG_DIR");
}
