#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netfail/network.hpp"
#include "netfail/stability.hpp"

namespace netfail {

// Optimization-based attacker: at each step it enumerates the feasible
// binary action sequences over the next `horizon` steps, keeps those
// respecting the cumulative budget kappa + w*(t+j) at every prefix, and
// plays the first action of the sequence maximizing the sum of squared
// predicted state norms. Ties prefer fewer attacks, then the
// lexicographically smallest sequence.
struct AttackerSpec {
    bool enabled = false;
    double kappa = 0.0;
    double w = 0.25;
    int horizon = 2;  // enumeration capped at 20
};

int attacker_step(const AttackerSpec& spec, const PlantModel& plant, long t,
                  long past_attacks, const Eigen::VectorXd& x);

struct SimulationSetup {
    PlantModel plant;
    NetworkGraph g;   // plant -> controller, mixed links already split
    NetworkGraph gt;  // controller -> plant
    AttackerSpec attacker;
    long horizon = 10000;
    int trials = 1;
    std::uint64_t seed = 1;
    Eigen::VectorXd x0;  // empty: ones(n) normalized
};

struct TrialResult {
    int trial = 0;
    long steps = 0;               // recorded steps (may stop early on overflow)
    std::vector<double> x;        // row-major steps x n
    std::vector<double> u;        // row-major steps x m
    std::vector<std::uint8_t> l, l_G, l_Gt, l_A;
    std::vector<double> ratio_l, ratio_G, ratio_Gt;  // running averages
    std::map<std::string, std::vector<std::uint8_t>> link_indicators;
    std::optional<long> divergence_step;   // state left the finite range
    std::optional<long> first_exceed_1e6;  // first step with |x| > 1e6
    double final_norm = 0.0;
    double initial_norm = 0.0;
};

TrialResult run_closed_loop(const SimulationSetup& setup, int trial);

// Runs all trials, optionally across threads (capped by NETFAIL_THREADS);
// results are returned in trial order regardless of scheduling.
std::vector<TrialResult> run_trials(const SimulationSetup& setup);

struct ProcessStats {
    std::string name;
    double bound = 1.0;       // derived class bound (lambda view)
    double max_final_ratio = 0.0;
    bool violated = false;    // any final ratio above the bound
};

struct RatioReport {
    std::vector<ProcessStats> rows;  // l, l_G, l_Gt and (if enabled) l_A
};

// Final running ratios against the calculus bounds. The attacker row is
// judged against w + kappa/k: the budget admits kappa extra failures in
// any prefix of length k.
RatioReport empirical_ratio_report(const std::vector<TrialResult>& traces,
                                   const Lambda& bound_l, const Lambda& bound_g,
                                   const Lambda& bound_gt,
                                   const std::optional<AttackerSpec>& attacker);

int thread_cap();

}  // namespace netfail
