#include "netfail/failure_class.hpp"

#include <charconv>
#include <stdexcept>

namespace netfail {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

FailureClass make_ideal() { return Ideal{}; }

FailureClass make_lambda(double bound, Openness openness) {
    require(bound >= 0.0 && bound <= 1.0, "lambda bound must lie in [0,1]");
    if (bound == 1.0) openness = Openness::closed;
    return Lambda{bound, openness};
}

FailureClass make_gamma(double p0, double p1) {
    require(p0 >= 0.0 && p0 <= 1.0, "gamma p0 must lie in [0,1]");
    require(p1 >= 0.0 && p1 <= 1.0, "gamma p1 must lie in [0,1]");
    return Gamma{p0, p1};
}

FailureClass make_pi(double kappa, double w) {
    require(kappa >= 0.0, "pi kappa must be >= 0");
    require(w >= 0.0 && w <= 1.0, "pi w must lie in [0,1]");
    return Pi{kappa, w};
}

bool is_lambda(const FailureClass& c) { return std::holds_alternative<Lambda>(c); }
bool is_gamma(const FailureClass& c) { return std::holds_alternative<Gamma>(c); }

bool never_fails(const FailureClass& c) {
    if (std::holds_alternative<Ideal>(c)) return true;
    if (const auto* l = std::get_if<Lambda>(&c))
        return l->bound == 0.0 && l->openness == Openness::closed;
    if (const auto* g = std::get_if<Gamma>(&c)) return g->p0 == 1.0 && g->p1 == 0.0;
    if (const auto* p = std::get_if<Pi>(&c)) return p->kappa == 0.0 && p->w == 0.0;
    return false;
}

bool always_fails(const FailureClass& c) {
    const auto* l = std::get_if<Lambda>(&c);
    return l != nullptr && l->bound == 1.0 && l->openness == Openness::closed;
}

Lambda gamma_to_lambda(const Gamma& g) {
    if (g.p1 == 0.0) return Lambda{0.0, Openness::closed};
    if (g.p1 == 1.0) return Lambda{1.0, Openness::closed};
    return Lambda{g.p1, Openness::open};
}

Lambda pi_to_lambda(const Pi& p) {
    if (p.w == 0.0) {
        return p.kappa == 0.0 ? Lambda{0.0, Openness::closed} : Lambda{0.0, Openness::open};
    }
    if (p.w == 1.0) return Lambda{1.0, Openness::closed};
    return Lambda{p.w, Openness::open};
}

Lambda to_lambda(const FailureClass& c) {
    if (std::holds_alternative<Ideal>(c)) return Lambda{0.0, Openness::closed};
    if (const auto* l = std::get_if<Lambda>(&c)) return *l;
    if (const auto* g = std::get_if<Gamma>(&c)) return gamma_to_lambda(*g);
    return pi_to_lambda(std::get<Pi>(c));
}

bool lambda_contains(const Lambda& outer, const Lambda& inner) {
    if (outer.bound > inner.bound) return true;
    if (outer.bound < inner.bound) return false;
    return outer.openness == Openness::closed;
}

std::string to_string(const Lambda& l) {
    if (l.openness == Openness::open) return "Lambda(" + format_double(l.bound) + ",1]";
    return "Lambda[" + format_double(l.bound) + "]";
}

std::string to_string(const FailureClass& c) {
    if (std::holds_alternative<Ideal>(c)) return "Ideal";
    if (const auto* l = std::get_if<Lambda>(&c)) return to_string(*l);
    if (const auto* g = std::get_if<Gamma>(&c))
        return "Gamma[p0=" + format_double(g->p0) + ",p1=" + format_double(g->p1) + "]";
    const auto& p = std::get<Pi>(c);
    return "Pi[kappa=" + format_double(p.kappa) + ",w=" + format_double(p.w) + "]";
}

}  // namespace netfail
