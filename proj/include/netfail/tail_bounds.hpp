#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "netfail/hmm.hpp"

namespace netfail {

// Parameters of the Chernoff-style tail bound on sums h(xi(t)) * chi(t),
// where xi is a chain with 1-output transition mass at most p_tilde and
// chi is a binary process whose excess-over-w_tilde tail probabilities
// sigma_k are summable. Valid for rho strictly inside
// (p_tilde * w_tilde, w_tilde).
struct TailBoundParams {
    double p_tilde = 0.0;
    double w_tilde = 1.0;
    double rho = 0.0;
    std::function<double(long)> sigma;  // null: identically zero

    double phi() const;
    void validate() const;  // throws outside the admissible region
    double sigma_at(long k) const { return sigma ? sigma(k) : 0.0; }
};

// Exact sigma for chi from an attack-budget class with rate w < w_tilde:
// the prefix constraint is violated never once kappa <= (w_tilde - w) k,
// and conservatively assumed violated before that.
std::function<double(long)> pi_sigma(double kappa, double w, double w_tilde);

// Upper bound on P[sum_{t<k} h(xi(t)) chi(t) > rho k]. Evaluated in log
// space so large k neither overflows nor loses the bound.
double psi_k(const TailBoundParams& params, long k);

struct SummabilityCertificate {
    double ratio = 1.0;               // geometric envelope ratio, < 1 when valid
    double finite_sum_estimate = 0.0; // truncated sum plus geometric tail
};

SummabilityCertificate summability_certificate(const TailBoundParams& params,
                                               long truncate_at = 512);

// Exact P[sum_{t<k} h(xi(t)) chi(t) > rho k] by full path enumeration of
// the chain (guard: states^k <= 1e7). chi = nullptr means chi == 1.
double exact_tail_oracle(const HmmSpec& chain, const std::vector<std::uint8_t>* chi,
                         double rho, int k);

struct ExpectationCheck {
    double expectation = 0.0;
    double bound = 0.0;
};

// Exact E[phi^{sum_j h(xi(t_j))}] over the given strictly increasing
// indices, against the closed-form bound phi*((phi-1)p_tilde+1)^{s-1}.
// Throws if the computed expectation exceeds the bound.
ExpectationCheck expectation_lemma_check(const HmmSpec& chain, const std::vector<long>& indices,
                                         double phi, std::optional<double> p_tilde = {});

}  // namespace netfail
