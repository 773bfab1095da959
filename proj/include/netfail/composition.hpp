#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "netfail/failure_class.hpp"

namespace netfail {

// A failure class plus the independence declaration of the process behind
// it. Distinct group labels declare mutual independence of the underlying
// sources; a missing label means dependence must be assumed. Labels are
// only ever used to tighten a result: erasing them falls back to the
// conservative rules.
struct AnnotatedProcess {
    FailureClass cls;
    std::optional<std::string> independence_group;
};

// Set of independence groups a (possibly composed) process draws from.
// `all_labeled` is false as soon as an unlabeled non-constant source
// contributes, which disables every tight rule downstream.
struct GroupSet {
    bool all_labeled = true;
    std::set<std::string> labels;

    static GroupSet of(const AnnotatedProcess& p);
    static GroupSet constant() { return GroupSet{}; }
    bool independent_of(const GroupSet& other) const;
    void merge(const GroupSet& other);
};

enum class Rule {
    AndMin,          // parallel paths, dependence allowed: min of bounds
    AndGammaGamma,   // parallel, independent chains: product-form Gamma
    AndGammaLambda,  // parallel, chain against a general process
    OrSum,           // serial links, dependence allowed: sum of bounds
    OrGammaGamma,    // serial, independent chains
    OrGammaLambda,   // serial, chain against a general process
    DropRecursion,   // packet-dropping path: re-indexed link-by-link sum
};

const char* rule_name(Rule r);

struct DerivationStep {
    Rule rule;
    FailureClass lhs;
    FailureClass rhs;
    FailureClass out;
    std::string note;  // conversions, saturation, routing flags
};

struct CompositionResult {
    FailureClass cls;
    Rule rule_applied = Rule::AndMin;  // rule of the final step
    std::vector<DerivationStep> derivation;
    GroupSet groups;
};

enum class FoldKind { And, Or };

// Binary composition of failure indicators on parallel paths (logical
// AND of the indicators: the network fails only if both do).
CompositionResult and_compose(const AnnotatedProcess& a, const AnnotatedProcess& b);

// Binary composition along serial links (logical OR: the path fails if
// either link does).
CompositionResult or_compose(const AnnotatedProcess& a, const AnnotatedProcess& b);

// Fold of a whole operand list. Order is chosen to avoid conservatism:
// mutually independent Gamma operands are folded first with the tight
// Gamma rule (in input order), the rest are folded with the dependence-
// tolerant rule, and the two partial results are bridged with the
// Gamma/Lambda rule when the groups allow it.
CompositionResult compose_many(const std::vector<AnnotatedProcess>& ops, FoldKind kind);

// Internal fold over already-composed operands carrying group sets; used
// by the network derivation where per-path results are combined.
CompositionResult compose_tagged(const std::vector<std::pair<FailureClass, GroupSet>>& ops,
                                 FoldKind kind);

// Evaluates one rule on two operands. Constant operands short-circuit for
// the dependence-tolerant rules; Gamma operands are lowered to their
// Lambda view where a rule needs it. Composition and replay share this.
FailureClass apply_rule(Rule rule, const FailureClass& lhs, const FailureClass& rhs);

// Re-applies every recorded step and checks that it reproduces the stored
// output bit-exactly. Returns the final class.
FailureClass replay_derivation(const CompositionResult& r);

std::string format_derivation(const CompositionResult& r);

}  // namespace netfail
