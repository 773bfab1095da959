#pragma once

#include <cstdint>
#include <vector>

#include "netfail/rng.hpp"

namespace netfail {

// Entry of a time-varying transition row: c + a*cos^2(f*t) or
// c + a*sin^2(f*t), or a constant. Covers the periodic channel models
// used in the experiments while keeping specs serializable.
struct TransitionExpr {
    enum class Kind { constant, cos2, sin2 };
    Kind kind = Kind::constant;
    double c = 0.0;
    double a = 0.0;
    double f = 0.0;

    double eval(long t) const;
    friend bool operator==(const TransitionExpr&, const TransitionExpr&) = default;
};

// Finite-state time-inhomogeneous Markov chain with a binary output map.
// The output process l(t) = output[state(t)] is the generative model
// behind Gamma-class links.
struct HmmSpec {
    std::vector<double> initial;                    // distribution over states at t = 0
    std::vector<std::vector<TransitionExpr>> rows;  // rows[from][to](t)
    std::vector<int> output;                        // 0/1 per state

    int states() const { return static_cast<int>(initial.size()); }
    double transition(long t, int from, int to) const { return rows[from][to].eval(t); }

    // Structural checks: shapes, probability ranges, and row sums equal to
    // 1 (within 1e-12) for t in [0, sample_horizon). Throws on violation.
    void validate(long sample_horizon = 1024) const;

    // Largest transition mass into states with the given output value over
    // the sampled window; used to check declared Gamma bounds.
    double sup_mass_into(int out_value, long sample_horizon = 1024) const;

    // True iff the sampled transition masses respect Gamma{p0, p1}.
    bool within_gamma(double p0, double p1, long sample_horizon = 1024) const;

    friend bool operator==(const HmmSpec&, const HmmSpec&) = default;
};

// Two-state chain with constant failure probability p1 from every state
// (outputs = state index). Stays within Gamma{1-p1, p1}.
HmmSpec constant_two_state(double p1);

// Samples the output process over [0, horizon). Deterministic per stream.
std::vector<std::uint8_t> generate_hmm_process(const HmmSpec& spec, long horizon,
                                               SplitMix64 rng);

}  // namespace netfail
