#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "netfail/network.hpp"
#include "netfail/simulation.hpp"
#include "netfail/stability.hpp"

namespace netfail {

struct SimulationConfig {
    long horizon = 10000;
    int trials = 1;
    std::uint64_t seed = 1;
    std::vector<double> x0;  // empty: default ones(n)/sqrt(n)
};

struct AnalysisConfig {
    int search_budget = 8;
    double residual_tol = 1e-9;
};

struct ExperimentConfig {
    int schema_version = 1;
    PlantModel plant;
    NetworkGraph g;   // mixed links already split
    NetworkGraph gt;
    AttackerSpec attacker;
    SimulationConfig simulation;
    AnalysisConfig analysis;
};

// Carries every schema violation found, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

// Simulation view of a parsed config; CLI overrides are applied after.
SimulationSetup make_simulation_setup(const ExperimentConfig& c);

std::uint64_t file_fnv1a(const std::string& path);

}  // namespace netfail
