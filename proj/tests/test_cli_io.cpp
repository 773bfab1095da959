#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "netfail/cli.hpp"
#include "netfail/config.hpp"
#include "netfail/format.hpp"

using namespace netfail;
namespace fs = std::filesystem;

namespace {

std::string config_path(const char* name) {
    return std::string(NETFAIL_CONFIG_DIR) + "/" + name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const char* tag) {
    fs::path dir = fs::temp_directory_path() / (std::string("netfail_test_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("parse the shipped base config") {
    auto cfg = parse_config(config_path("fig1.json"));
    CHECK(cfg.plant.n() == 2);
    CHECK(cfg.plant.m() == 1);
    CHECK(enumerate_paths(cfg.g).size() == 3);
    CHECK(enumerate_paths(cfg.gt).size() == 4);
    CHECK_FALSE(cfg.attacker.enabled);
}

TEST_CASE("parse the attacker scenario config") {
    auto cfg = parse_config(config_path("fig1_scenario53.json"));
    CHECK(cfg.attacker.enabled);
    CHECK(cfg.attacker.kappa == 1.0);
    CHECK(cfg.attacker.w == 0.25);
    CHECK(cfg.attacker.horizon == 2);
    CHECK(cfg.simulation.trials == 50);
    CHECK(cfg.gt.dead_paths.size() == 2);
    const LinkSpec& hot = cfg.gt.edges.at({"v1", "v3"});
    REQUIRE(hot.hmm.has_value());
    CHECK(hot.hmm->states() == 2);
}

TEST_CASE("all schema errors are collected, each with a document path") {
    nlohmann::json j = nlohmann::json::parse(slurp(config_path("fig1.json")));
    j["network_G"]["edges"][0]["to"] = "nowhere";          // dangling node
    j["network_G"]["edges"][1]["class"] = {{"type", "gamma"}, {"p0", 0.5}, {"p1", 1.2}};
    j["attacker"]["N"] = 40;                               // beyond enumeration cap
    try {
        config_from_json(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.errors().size() >= 3);
        bool saw_edge = false, saw_range = false, saw_n = false;
        for (const auto& msg : e.errors()) {
            if (msg.find("unknown node") != std::string::npos) saw_edge = true;
            if (msg.find("p1") != std::string::npos) saw_range = true;
            if (msg.find("attacker.N") != std::string::npos) saw_n = true;
        }
        CHECK(saw_edge);
        CHECK(saw_range);
        CHECK(saw_n);
    }
}

TEST_CASE("dead paths and overrides must name real paths") {
    nlohmann::json j = nlohmann::json::parse(slurp(config_path("fig1_scenario53.json")));
    j["network_Gt"]["dead_paths"].push_back("vC>v9>vP");
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("hmm violating its declared gamma bounds is rejected") {
    nlohmann::json j = nlohmann::json::parse(slurp(config_path("fig1_scenario53.json")));
    j["network_Gt"]["edges"][2]["class"]["p1"] = 0.1;  // below what the rows emit
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("parse -> serialize -> parse is idempotent") {
    for (const char* name : {"fig1.json", "fig1_scenario52.json", "fig1_scenario53.json"}) {
        auto cfg = parse_config(config_path(name));
        auto j1 = config_to_json(cfg);
        auto cfg2 = config_from_json(j1);
        auto j2 = config_to_json(cfg2);
        CHECK(j1.dump() == j2.dump());
    }
}

TEST_CASE("mixed links are split during parsing") {
    nlohmann::json j = nlohmann::json::parse(slurp(config_path("fig1.json")));
    j["network_G"]["edges"][0]["mode"] = "mixed";
    j["network_G"]["edges"][0]["dropping_class"] = {{"type", "lambda"}, {"rho", 0.1}, {"open", false}};
    auto cfg = config_from_json(j);
    CHECK(cfg.g.nodes.size() == 7);  // one synthetic node
    for (const auto& [e, spec] : cfg.g.edges) CHECK(spec.mode != LinkMode::mixed);
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.0, 1.0, 0.411, 0.411 / 6.0, 0.156816, 1e-300, 123456.789e10, -0.25}) {
        std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("run_command: analyze writes artifacts and a manifest") {
    auto dir = fresh_dir("analyze");
    int rc = run_command({"--output-dir", dir.string(), "analyze", config_path("fig1_scenario53.json")});
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "analysis.csv"));
    std::string csv = slurp(dir / "analysis.csv");
    CHECK(csv.find("roundtrip") != std::string::npos);
    CHECK(csv.find("0.406816") != std::string::npos);
}

TEST_CASE("run_command: stability verdict drives the exit code") {
    auto dir = fresh_dir("stab");
    int rc = run_command({"--output-dir", dir.string(), "stability",
                          config_path("fig1_scenario53.json"), "--rho", "0.9",
                          "--require-certified"});
    CHECK(rc == 3);
    rc = run_command({"--output-dir", dir.string(), "stability",
                      config_path("fig1_scenario53.json"), "--rho", "0.9"});
    CHECK(rc == 0);  // reported, not enforced
    rc = run_command({"--output-dir", dir.string(), "stability",
                      config_path("fig1_scenario53.json"), "--require-certified"});
    CHECK(rc == 0);  // derived rho = 0.406816 is certified
}

TEST_CASE("run_command: budget reproduces the uniform allocation") {
    auto dir = fresh_dir("budget");
    int rc = run_command({"--output-dir", dir.string(), "budget", config_path("fig1.json"),
                          "--rho-star", "0.411"});
    CHECK(rc == 0);
    std::string csv = slurp(dir / "budget.csv");
    CHECK(csv.find(format_double(0.411 / 6.0)) != std::string::npos);
}

TEST_CASE("run_command: usage and validation failures exit 2") {
    auto dir = fresh_dir("err");
    CHECK(run_command({"--output-dir", dir.string(), "frobnicate"}) == 2);
    CHECK(run_command({"--output-dir", dir.string(), "analyze", "/nonexistent.json"}) == 2);
    CHECK(run_command({"--output-dir", dir.string(), "budget", config_path("fig1.json"),
                       "--rho-star", "1.7"}) == 2);
    // lambda links are not generative
    CHECK(run_command({"--output-dir", dir.string(), "simulate", config_path("fig1.json"),
                       "--trials", "1", "--horizon", "10"}) == 2);
}

TEST_CASE("run_command: simulate is byte-deterministic") {
    auto dir1 = fresh_dir("sim1");
    auto dir2 = fresh_dir("sim2");
    std::vector<std::string> base{"simulate", config_path("fig1_scenario53.json"),
                                  "--trials", "3", "--horizon", "400", "--seed", "9"};
    std::vector<std::string> run1{"--output-dir", dir1.string()};
    run1.insert(run1.end(), base.begin(), base.end());
    std::vector<std::string> run2{"--output-dir", dir2.string()};
    run2.insert(run2.end(), base.begin(), base.end());
    REQUIRE(run_command(run1) == 0);
    REQUIRE(run_command(run2) == 0);
    CHECK(slurp(dir1 / "trace.csv") == slurp(dir2 / "trace.csv"));
    CHECK(slurp(dir1 / "summary.csv") == slurp(dir2 / "summary.csv"));
    CHECK(slurp(dir1 / "manifest.json") == slurp(dir2 / "manifest.json"));
}

TEST_CASE("run_command: tailbound emits the table") {
    auto dir = fresh_dir("tail");
    int rc = run_command({"--output-dir", dir.string(), "tailbound", "--p-tilde", "0.3",
                          "--rho", "0.5", "--k-max", "12", "--oracle"});
    CHECK(rc == 0);
    std::string csv = slurp(dir / "tailbound.csv");
    CHECK(csv.find("k,sigma_k,psi_k,oracle") != std::string::npos);
    // invalid region rejected
    CHECK(run_command({"--output-dir", dir.string(), "tailbound", "--p-tilde", "0.3", "--rho",
                       "0.2"}) == 2);
}

TEST_CASE("run_command: attack-demo trajectories") {
    auto dir = fresh_dir("demo");
    int rc = run_command({"--output-dir", dir.string(), "attack-demo",
                          config_path("fig1_scenario53.json"), "--N", "2", "--w", "0.75",
                          "--kappa", "10", "--trials", "2", "--horizon", "300"});
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "attack_demo.csv"));
}
