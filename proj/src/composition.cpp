#include "netfail/composition.hpp"

#include <algorithm>
#include <stdexcept>

namespace netfail {

namespace {

double min3(double a, double b, double c) { return std::min(a, std::min(b, c)); }

Lambda and_min(const Lambda& a, const Lambda& b) {
    if (a.bound < b.bound) return a;
    if (b.bound < a.bound) return b;
    Openness o = (a.openness == Openness::open || b.openness == Openness::open)
                     ? Openness::open
                     : Openness::closed;
    return Lambda{a.bound, o};
}

Lambda or_sum(const Lambda& a, const Lambda& b) {
    double s = a.bound + b.bound;
    if (s >= 1.0) return Lambda{1.0, Openness::closed};
    Openness o = (a.openness == Openness::closed && b.openness == Openness::closed)
                     ? Openness::closed
                     : Openness::open;
    return Lambda{s, o};
}

Gamma and_gamma_gamma(const Gamma& a, const Gamma& b) {
    return Gamma{min3(a.p0 + a.p1 * b.p0, b.p0 + b.p1 * a.p0, 1.0), a.p1 * b.p1};
}

Gamma or_gamma_gamma(const Gamma& a, const Gamma& b) {
    return Gamma{a.p0 * b.p0, min3(a.p1 + a.p0 * b.p1, b.p1 + b.p0 * a.p1, 1.0)};
}

Lambda and_gamma_lambda(const Gamma& g, const Lambda& l) {
    double v = g.p1 * l.bound;
    if (v >= 1.0) return Lambda{1.0, Openness::closed};
    return Lambda{v, Openness::open};
}

Lambda or_gamma_lambda(const Gamma& g, const Lambda& l) {
    double v = g.p1 + g.p0 * l.bound;
    if (v >= 1.0) return Lambda{1.0, Openness::closed};
    return Lambda{v, Openness::open};
}

}  // namespace

FailureClass apply_rule(Rule rule, const FailureClass& lhs, const FailureClass& rhs) {
    switch (rule) {
        case Rule::AndMin: {
            if (never_fails(lhs) || never_fails(rhs)) return Lambda{0.0, Openness::closed};
            if (always_fails(lhs)) return rhs;
            if (always_fails(rhs)) return lhs;
            return and_min(to_lambda(lhs), to_lambda(rhs));
        }
        case Rule::OrSum:
        case Rule::DropRecursion: {
            if (always_fails(lhs) || always_fails(rhs)) return Lambda{1.0, Openness::closed};
            if (never_fails(lhs)) return rhs;
            if (never_fails(rhs)) return lhs;
            return or_sum(to_lambda(lhs), to_lambda(rhs));
        }
        case Rule::AndGammaGamma:
            return and_gamma_gamma(std::get<Gamma>(lhs), std::get<Gamma>(rhs));
        case Rule::OrGammaGamma:
            return or_gamma_gamma(std::get<Gamma>(lhs), std::get<Gamma>(rhs));
        case Rule::AndGammaLambda: {
            if (is_gamma(lhs)) return and_gamma_lambda(std::get<Gamma>(lhs), to_lambda(rhs));
            return and_gamma_lambda(std::get<Gamma>(rhs), to_lambda(lhs));
        }
        case Rule::OrGammaLambda: {
            if (is_gamma(lhs)) return or_gamma_lambda(std::get<Gamma>(lhs), to_lambda(rhs));
            return or_gamma_lambda(std::get<Gamma>(rhs), to_lambda(lhs));
        }
    }
    throw std::logic_error("unknown composition rule");
}

namespace {

struct Partial {
    FailureClass cls;
    GroupSet groups;
    bool present = false;
};

struct Folder {
    FoldKind kind;
    std::vector<DerivationStep> steps;

    FailureClass step(Rule rule, const FailureClass& lhs, const FailureClass& rhs,
                      std::string note = {}) {
        FailureClass out = apply_rule(rule, lhs, rhs);
        steps.push_back(DerivationStep{rule, lhs, rhs, out, std::move(note)});
        return out;
    }
};

}  // namespace

const char* rule_name(Rule r) {
    switch (r) {
        case Rule::AndMin: return "AndMin";
        case Rule::AndGammaGamma: return "AndGammaGamma";
        case Rule::AndGammaLambda: return "AndGammaLambda";
        case Rule::OrSum: return "OrSum";
        case Rule::OrGammaGamma: return "OrGammaGamma";
        case Rule::OrGammaLambda: return "OrGammaLambda";
        case Rule::DropRecursion: return "DropRecursion";
    }
    return "?";
}

GroupSet GroupSet::of(const AnnotatedProcess& p) {
    if (never_fails(p.cls) || always_fails(p.cls)) return constant();
    if (p.independence_group) return GroupSet{true, {*p.independence_group}};
    return GroupSet{false, {}};
}

bool GroupSet::independent_of(const GroupSet& other) const {
    if (!all_labeled || !other.all_labeled) return false;
    for (const auto& l : labels)
        if (other.labels.count(l)) return false;
    return true;
}

void GroupSet::merge(const GroupSet& other) {
    all_labeled = all_labeled && other.all_labeled;
    labels.insert(other.labels.begin(), other.labels.end());
}

CompositionResult compose_tagged(const std::vector<std::pair<FailureClass, GroupSet>>& ops,
                                 FoldKind kind) {
    if (ops.empty()) throw std::invalid_argument("compose: empty operand list");

    const bool is_and = kind == FoldKind::And;
    const Rule tight_gg = is_and ? Rule::AndGammaGamma : Rule::OrGammaGamma;
    const Rule tight_gl = is_and ? Rule::AndGammaLambda : Rule::OrGammaLambda;
    const Rule loose = is_and ? Rule::AndMin : Rule::OrSum;
    const FailureClass neutral =
        is_and ? FailureClass(Lambda{1.0, Openness::closed}) : FailureClass(Lambda{0.0, Openness::closed});

    Folder folder{kind, {}};

    // Normalize attack-budget annotations to their ratio bound up front;
    // no composition rule is stated on the Pi parameters themselves.
    std::vector<std::pair<FailureClass, GroupSet>> norm;
    norm.reserve(ops.size());
    std::vector<std::string> op_note(ops.size());
    for (std::size_t i = 0; i < ops.size(); ++i) {
        FailureClass c = ops[i].first;
        if (std::holds_alternative<Pi>(c) && !never_fails(c)) {
            c = to_lambda(c);
            op_note[i] = "pi lowered to lambda";
        }
        norm.emplace_back(c, ops[i].second);
    }

    // An absorbing constant decides the whole fold.
    for (std::size_t i = 0; i < norm.size(); ++i) {
        const bool absorbing = is_and ? never_fails(norm[i].first) : always_fails(norm[i].first);
        if (!absorbing) continue;
        const FailureClass& other = norm.size() > 1 ? norm[i == 0 ? 1 : 0].first : neutral;
        FailureClass out = folder.step(loose, norm[i].first, other, "absorbing constant");
        return CompositionResult{out, folder.steps.back().rule, std::move(folder.steps),
                                 GroupSet::constant()};
    }

    // Partition into neutral constants, independence-eligible Gamma
    // operands, and the dependence pool.
    std::vector<std::size_t> neutrals, gammas, pool;
    std::set<std::string> consumed;
    for (std::size_t i = 0; i < norm.size(); ++i) {
        const auto& [c, gs] = norm[i];
        if (is_and ? always_fails(c) : never_fails(c)) {
            neutrals.push_back(i);
            continue;
        }
        bool eligible = is_gamma(c) && gs.all_labeled && !gs.labels.empty();
        for (const auto& l : gs.labels)
            if (consumed.count(l)) eligible = false;
        if (eligible) {
            gammas.push_back(i);
            consumed.insert(gs.labels.begin(), gs.labels.end());
        } else {
            pool.push_back(i);
        }
    }

    Partial gfold, pfold;
    for (std::size_t i : gammas) {
        if (!gfold.present) {
            gfold = Partial{norm[i].first, norm[i].second, true};
            continue;
        }
        gfold.cls = folder.step(tight_gg, gfold.cls, norm[i].first, op_note[i]);
        gfold.groups.merge(norm[i].second);
    }
    for (std::size_t i : pool) {
        if (!pfold.present) {
            pfold = Partial{norm[i].first, norm[i].second, true};
            continue;
        }
        std::string note = op_note[i];
        if (is_gamma(pfold.cls) || is_gamma(norm[i].first)) {
            if (!note.empty()) note += "; ";
            note += "gamma lowered to lambda (dependence assumed)";
        }
        pfold.cls = folder.step(loose, pfold.cls, norm[i].first, note);
        pfold.groups.merge(norm[i].second);
    }

    Partial acc;
    if (gfold.present && pfold.present) {
        const bool indep = pfold.groups.independent_of(gfold.groups);
        Rule bridge = indep ? tight_gl : loose;
        std::string note = indep ? "" : "dependence assumed";
        acc.cls = folder.step(bridge, gfold.cls, pfold.cls, std::move(note));
        acc.groups = gfold.groups;
        acc.groups.merge(pfold.groups);
        acc.present = true;
    } else if (gfold.present) {
        acc = gfold;
    } else if (pfold.present) {
        acc = pfold;
    } else {
        // Only neutral constants.
        acc = Partial{norm[neutrals.front()].first, GroupSet::constant(), true};
        neutrals.erase(neutrals.begin());
    }

    for (std::size_t i : neutrals)
        acc.cls = folder.step(loose, acc.cls, norm[i].first, "neutral constant");

    if (folder.steps.empty())
        acc.cls = folder.step(loose, acc.cls, neutral, "single operand");

    return CompositionResult{acc.cls, folder.steps.back().rule, std::move(folder.steps), acc.groups};
}

CompositionResult compose_many(const std::vector<AnnotatedProcess>& ops, FoldKind kind) {
    std::vector<std::pair<FailureClass, GroupSet>> tagged;
    tagged.reserve(ops.size());
    for (const auto& p : ops) tagged.emplace_back(p.cls, GroupSet::of(p));
    return compose_tagged(tagged, kind);
}

CompositionResult and_compose(const AnnotatedProcess& a, const AnnotatedProcess& b) {
    return compose_many({a, b}, FoldKind::And);
}

CompositionResult or_compose(const AnnotatedProcess& a, const AnnotatedProcess& b) {
    return compose_many({a, b}, FoldKind::Or);
}

FailureClass replay_derivation(const CompositionResult& r) {
    if (r.derivation.empty()) throw std::logic_error("replay: empty derivation");
    FailureClass last{};
    for (const auto& s : r.derivation) {
        last = apply_rule(s.rule, s.lhs, s.rhs);
        if (!(last == s.out)) throw std::logic_error("replay: derivation step mismatch");
    }
    if (!(last == r.cls)) throw std::logic_error("replay: final class mismatch");
    return last;
}

std::string format_derivation(const CompositionResult& r) {
    std::string out;
    for (const auto& s : r.derivation) {
        out += "  ";
        out += to_string(s.lhs);
        out += "  <";
        out += rule_name(s.rule);
        out += ">  ";
        out += to_string(s.rhs);
        out += "  =>  ";
        out += to_string(s.out);
        if (!s.note.empty()) {
            out += "   [";
            out += s.note;
            out += "]";
        }
        out += "\n";
    }
    return out;
}

}  // namespace netfail
