#include "netfail/hmm.hpp"

#include <cmath>
#include <stdexcept>

namespace netfail {

double TransitionExpr::eval(long t) const {
    switch (kind) {
        case Kind::constant: return c;
        case Kind::cos2: {
            double v = std::cos(f * static_cast<double>(t));
            return c + a * v * v;
        }
        case Kind::sin2: {
            double v = std::sin(f * static_cast<double>(t));
            return c + a * v * v;
        }
    }
    return c;
}

void HmmSpec::validate(long sample_horizon) const {
    const std::size_t s = initial.size();
    if (s == 0) throw std::invalid_argument("hmm: no states");
    if (rows.size() != s || output.size() != s)
        throw std::invalid_argument("hmm: rows/output size must match state count");
    double isum = 0.0;
    for (double p : initial) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("hmm: initial probability out of range");
        isum += p;
    }
    if (std::abs(isum - 1.0) > 1e-12)
        throw std::invalid_argument("hmm: initial distribution must sum to 1");
    for (int v : output)
        if (v != 0 && v != 1) throw std::invalid_argument("hmm: output map must be binary");
    for (const auto& row : rows)
        if (row.size() != s) throw std::invalid_argument("hmm: ragged transition row");
    for (long t = 0; t < sample_horizon; ++t) {
        for (std::size_t q = 0; q < s; ++q) {
            double rsum = 0.0;
            for (std::size_t r = 0; r < s; ++r) {
                double p = rows[q][r].eval(t);
                if (p < -1e-12 || p > 1.0 + 1e-12)
                    throw std::invalid_argument("hmm: transition probability out of range");
                rsum += p;
            }
            if (std::abs(rsum - 1.0) > 1e-12)
                throw std::invalid_argument("hmm: transition row must sum to 1");
        }
    }
}

double HmmSpec::sup_mass_into(int out_value, long sample_horizon) const {
    const int s = states();
    double sup = 0.0;
    for (long t = 0; t < sample_horizon; ++t) {
        for (int q = 0; q < s; ++q) {
            double mass = 0.0;
            for (int r = 0; r < s; ++r)
                if (output[r] == out_value) mass += rows[q][r].eval(t);
            sup = std::max(sup, mass);
        }
    }
    return sup;
}

bool HmmSpec::within_gamma(double p0, double p1, long sample_horizon) const {
    return sup_mass_into(0, sample_horizon) <= p0 + 1e-12 &&
           sup_mass_into(1, sample_horizon) <= p1 + 1e-12;
}

HmmSpec constant_two_state(double p1) {
    HmmSpec spec;
    spec.initial = {1.0 - p1, p1};
    spec.output = {0, 1};
    TransitionExpr stay{TransitionExpr::Kind::constant, 1.0 - p1, 0.0, 0.0};
    TransitionExpr fail{TransitionExpr::Kind::constant, p1, 0.0, 0.0};
    spec.rows = {{stay, fail}, {stay, fail}};
    return spec;
}

namespace {

int sample_index(const std::vector<double>& weights, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

}  // namespace

std::vector<std::uint8_t> generate_hmm_process(const HmmSpec& spec, long horizon,
                                               SplitMix64 rng) {
    const int s = spec.states();
    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(horizon));
    int state = sample_index(spec.initial, rng.next_double());
    std::vector<double> row(static_cast<std::size_t>(s));
    for (long t = 0; t < horizon; ++t) {
        out.push_back(static_cast<std::uint8_t>(spec.output[state]));
        for (int r = 0; r < s; ++r) row[static_cast<std::size_t>(r)] = spec.transition(t, state, r);
        state = sample_index(row, rng.next_double());
    }
    return out;
}

}  // namespace netfail
