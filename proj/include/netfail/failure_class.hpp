#pragma once

#include <string>
#include <variant>

namespace netfail {

// Annotation vocabulary for binary failure processes. A process class is
// one of:
//   Ideal          -- never fails,
//   Lambda(rho)    -- summable tail probabilities of the failure ratio
//                     beyond rho. `open` tracks whether the guarantee is
//                     "member of every class with bound > rho" (open) or
//                     "member at rho itself" (closed),
//   Gamma(p0, p1)  -- hidden-Markov output process with uniform bounds on
//                     the transition mass into 0-output / 1-output states,
//   Pi(kappa, w)   -- at most kappa + w*k failures in any prefix of
//                     length k, surely.

enum class Openness { open, closed };

struct Ideal {
    friend bool operator==(const Ideal&, const Ideal&) = default;
};

struct Lambda {
    double bound = 0.0;
    Openness openness = Openness::closed;
    friend bool operator==(const Lambda&, const Lambda&) = default;
};

struct Gamma {
    double p0 = 1.0;
    double p1 = 0.0;
    friend bool operator==(const Gamma&, const Gamma&) = default;
};

struct Pi {
    double kappa = 0.0;
    double w = 0.0;
    friend bool operator==(const Pi&, const Pi&) = default;
};

using FailureClass = std::variant<Ideal, Lambda, Gamma, Pi>;

// Validating factories. Throw std::invalid_argument on out-of-range
// parameters. make_lambda normalizes bound 1 to a closed class (every
// binary process lies in the bound-1 class).
FailureClass make_ideal();
FailureClass make_lambda(double bound, Openness openness);
FailureClass make_gamma(double p0, double p1);
FailureClass make_pi(double kappa, double w);

bool is_lambda(const FailureClass& c);
bool is_gamma(const FailureClass& c);

// Constant processes: these are deterministic, hence independent of
// everything and neutral/absorbing under composition.
bool never_fails(const FailureClass& c);   // Ideal, Lambda{0,closed}, Gamma{1,0}
bool always_fails(const FailureClass& c);  // Lambda{1,closed}

// Gamma -> Lambda: the output process of a chain with 1-mass bound p1 has
// failure-ratio bound p1 (open interval). p1 = 0 behaves like an ideal
// link; p1 = 1 carries no information beyond the universal class.
Lambda gamma_to_lambda(const Gamma& g);

// Pi -> Lambda: the average attack rate w bounds the failure ratio. A
// finite budget (w = 0, kappa > 0) vanishes in the ratio limit but is not
// admissible at 0 itself, hence the open bound.
Lambda pi_to_lambda(const Pi& p);

// Weakest Lambda view of any class.
Lambda to_lambda(const FailureClass& c);

// True iff every process annotated `inner` is guaranteed to satisfy the
// `outer` annotation. Closed outer absorbs equal bounds of either
// openness; open outer absorbs only strictly smaller bounds.
bool lambda_contains(const Lambda& outer, const Lambda& inner);

std::string to_string(const FailureClass& c);
std::string to_string(const Lambda& l);

}  // namespace netfail
