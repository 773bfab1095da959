#include "netfail/tail_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace netfail {

double TailBoundParams::phi() const {
    double r = rho / w_tilde;
    return (r * (1.0 - p_tilde)) / (p_tilde * (1.0 - r));
}

void TailBoundParams::validate() const {
    if (!(p_tilde > 0.0 && p_tilde < 1.0))
        throw std::invalid_argument("tail bound: p_tilde must lie in (0,1)");
    if (!(w_tilde > 0.0 && w_tilde <= 1.0))
        throw std::invalid_argument("tail bound: w_tilde must lie in (0,1]");
    if (!(rho > p_tilde * w_tilde && rho < w_tilde))
        throw std::invalid_argument("tail bound: rho must lie in (p_tilde*w_tilde, w_tilde)");
}

std::function<double(long)> pi_sigma(double kappa, double w, double w_tilde) {
    if (!(w_tilde > w))
        throw std::invalid_argument("pi_sigma: requires w_tilde > w");
    return [kappa, w, w_tilde](long k) {
        return kappa <= (w_tilde - w) * static_cast<double>(k) ? 0.0 : 1.0;
    };
}

double psi_k(const TailBoundParams& params, long k) {
    params.validate();
    if (k < 1) throw std::invalid_argument("psi_k: k must be >= 1");
    const double phi = params.phi();
    const double log_phi = std::log(phi);
    const double log_c = std::log1p((phi - 1.0) * params.p_tilde);  // c = (phi-1)p~ + 1 > 1
    const double dk = static_cast<double>(k);

    // phi^{-rho k + 1} (c^{w~ k} - 1) / ((phi-1) p~)  ==  e^b expm1(X)
    const double b = (-params.rho * dk + 1.0) * log_phi - std::log((phi - 1.0) * params.p_tilde);
    const double X = params.w_tilde * dk * log_c;
    double tail_term;
    if (X > 700.0) {
        // expm1 would overflow; fold the exponent and keep the -1 as a
        // log1p correction.
        tail_term = std::exp(b + X + std::log1p(-std::exp(-X)));
    } else {
        tail_term = std::exp(b) * std::expm1(X);
    }
    return params.sigma_at(k) + tail_term;
}

SummabilityCertificate summability_certificate(const TailBoundParams& params, long truncate_at) {
    params.validate();
    const double phi = params.phi();
    const double log_c = std::log1p((phi - 1.0) * params.p_tilde);
    const double ratio = std::exp(-params.rho * std::log(phi) + params.w_tilde * log_c);
    if (!(ratio < 1.0))
        throw std::invalid_argument("summability: envelope ratio is not below 1");

    SummabilityCertificate cert;
    cert.ratio = ratio;
    double sum = 0.0, comp = 0.0;
    for (long k = 1; k <= truncate_at; ++k) {
        double y = psi_k(params, k) - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    // Geometric tail of the phi-part: psi's non-sigma term is bounded by
    // D * ratio^k with D = phi / ((phi-1) p~).
    const double D = phi / ((phi - 1.0) * params.p_tilde);
    cert.finite_sum_estimate =
        sum + D * std::pow(ratio, static_cast<double>(truncate_at + 1)) / (1.0 - ratio);
    return cert;
}

namespace {

struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v) {
        double y = v - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

double exact_tail_oracle(const HmmSpec& chain, const std::vector<std::uint8_t>* chi,
                         double rho, int k) {
    if (k < 1) throw std::invalid_argument("oracle: k must be >= 1");
    if (chi && static_cast<int>(chi->size()) < k)
        throw std::invalid_argument("oracle: chi shorter than k");
    const int s = chain.states();
    double work = std::pow(static_cast<double>(s), static_cast<double>(k));
    if (work > 1e7) throw std::invalid_argument("oracle: states^k exceeds the enumeration guard");

    const double threshold = rho * static_cast<double>(k);
    KahanSum acc;

    // DFS over all chain paths of length k, weighting by exact
    // probability products.
    std::vector<int> state(static_cast<std::size_t>(k));

    std::function<void(int, double, int)> rec = [&](int t, double p, int c) {
        if (p == 0.0) return;
        if (t == k) {
            if (static_cast<double>(c) > threshold) acc.add(p);
            return;
        }
        for (int next = 0; next < s; ++next) {
            double pt = t == 0 ? chain.initial[static_cast<std::size_t>(next)]
                               : chain.transition(t - 1, state[static_cast<std::size_t>(t - 1)],
                                                  next);
            if (pt == 0.0) continue;
            state[static_cast<std::size_t>(t)] = next;
            int on = chain.output[static_cast<std::size_t>(next)] &&
                             (!chi || (*chi)[static_cast<std::size_t>(t)])
                         ? 1
                         : 0;
            rec(t + 1, p * pt, c + on);
        }
    };
    rec(0, 1.0, 0);
    return acc.sum;
}

ExpectationCheck expectation_lemma_check(const HmmSpec& chain, const std::vector<long>& indices,
                                         double phi, std::optional<double> p_tilde) {
    if (indices.empty()) throw std::invalid_argument("expectation check: no indices");
    if (!(phi > 1.0)) throw std::invalid_argument("expectation check: phi must exceed 1");
    for (std::size_t i = 1; i < indices.size(); ++i)
        if (indices[i] <= indices[i - 1])
            throw std::invalid_argument("expectation check: indices must strictly increase");
    const long horizon = indices.back() + 1;
    const int s = chain.states();
    double work = std::pow(static_cast<double>(s), static_cast<double>(horizon));
    if (work > 1e7)
        throw std::invalid_argument("expectation check: states^(t_s+1) exceeds the guard");

    double pt = p_tilde ? *p_tilde : chain.sup_mass_into(1, horizon);

    KahanSum acc;
    std::vector<int> state(static_cast<std::size_t>(horizon));
    std::function<void(long, double, double)> rec = [&](long t, double p, double weight) {
        if (p == 0.0) return;
        if (t == horizon) {
            acc.add(p * weight);
            return;
        }
        for (int next = 0; next < s; ++next) {
            double ptrans = t == 0 ? chain.initial[static_cast<std::size_t>(next)]
                                   : chain.transition(t - 1,
                                                      state[static_cast<std::size_t>(t - 1)], next);
            if (ptrans == 0.0) continue;
            state[static_cast<std::size_t>(t)] = next;
            bool counted = std::find(indices.begin(), indices.end(), t) != indices.end();
            double w = weight;
            if (counted && chain.output[static_cast<std::size_t>(next)] == 1) w *= phi;
            rec(t + 1, p * ptrans, w);
        }
    };
    rec(0, 1.0, 1.0);

    ExpectationCheck check;
    check.expectation = acc.sum;
    check.bound = phi * std::pow((phi - 1.0) * pt + 1.0,
                                 static_cast<double>(indices.size()) - 1.0);
    if (check.expectation > check.bound * (1.0 + 1e-12) + 1e-300)
        throw std::logic_error("expectation check: exact value exceeds the bound");
    return check;
}

}  // namespace netfail
