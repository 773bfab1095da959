#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "netfail/rng.hpp"
#include "netfail/tail_bounds.hpp"

using namespace netfail;

namespace {

TailBoundParams params(double p, double w, double rho) {
    TailBoundParams tb;
    tb.p_tilde = p;
    tb.w_tilde = w;
    tb.rho = rho;
    return tb;
}

// Direct (non-log-space) evaluation, valid while nothing overflows.
double psi_direct(const TailBoundParams& tb, long k) {
    double phi = tb.phi();
    double c = (phi - 1.0) * tb.p_tilde + 1.0;
    return tb.sigma_at(k) + std::pow(phi, -tb.rho * k + 1.0) *
                                (std::pow(c, tb.w_tilde * k) - 1.0) / ((phi - 1.0) * tb.p_tilde);
}

HmmSpec random_chain(SplitMix64& rng, int states) {
    HmmSpec spec;
    spec.initial.assign(states, 0.0);
    double isum = 0.0;
    for (int i = 0; i < states; ++i) {
        spec.initial[i] = rng.next_double() + 0.05;
        isum += spec.initial[i];
    }
    for (auto& v : spec.initial) v /= isum;
    spec.output.assign(states, 0);
    spec.output[states - 1] = 1;  // at least one failure state
    for (int q = 0; q < states; ++q) {
        std::vector<double> row(states);
        double rsum = 0.0;
        for (int r = 0; r < states; ++r) {
            row[r] = rng.next_double() + 0.02;
            rsum += row[r];
        }
        std::vector<TransitionExpr> exprs;
        for (int r = 0; r < states; ++r)
            exprs.push_back(TransitionExpr{TransitionExpr::Kind::constant, row[r] / rsum, 0, 0});
        spec.rows.push_back(std::move(exprs));
    }
    return spec;
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(params(0.0, 1.0, 0.5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(0.3, 0.0, 0.1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(params(0.3, 1.0, 0.2).validate(), std::invalid_argument);  // below p~ w~
    CHECK_THROWS_AS(params(0.3, 0.5, 0.6).validate(), std::invalid_argument);  // above w~
    CHECK_NOTHROW(params(0.3, 1.0, 0.5).validate());
    CHECK_THROWS_AS(psi_k(params(0.3, 1.0, 0.5), 0), std::invalid_argument);
}

TEST_CASE("phi closed form") {
    // (rho/w)(1-p) / (p (1-rho/w)) with p=0.3, w=1, rho=0.5
    CHECK(params(0.3, 1.0, 0.5).phi() == doctest::Approx(7.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("log-space evaluation matches the direct formula") {
    auto tb = params(0.3, 1.0, 0.5);
    for (long k = 1; k <= 50; ++k) {
        double direct = psi_direct(tb, k);
        CHECK(psi_k(tb, k) == doctest::Approx(direct).epsilon(1e-10));
    }
    auto tb2 = params(0.05, 0.7, 0.2);
    for (long k : {1L, 7L, 23L, 50L})
        CHECK(psi_k(tb2, k) == doctest::Approx(psi_direct(tb2, k)).epsilon(1e-10));
    // far beyond the direct range the bound must still evaluate and decay
    CHECK(psi_k(tb, 100000) >= 0.0);
    CHECK(psi_k(tb, 100000) < 1e-300);
}

TEST_CASE("a unit sigma term makes the bound vacuous but valid") {
    auto tb = params(0.3, 1.0, 0.5);
    tb.sigma = [](long) { return 1.0; };
    CHECK(psi_k(tb, 10) >= 1.0);
}

TEST_CASE("geometric decay of the envelope") {
    auto tb = params(0.3, 1.0, 0.5);
    double r = summability_certificate(tb).ratio;
    // successive ratios decrease toward r from above and settle on it
    double prev = psi_k(tb, 2) / psi_k(tb, 1);
    for (long k = 2; k < 120; ++k) {
        double cur = psi_k(tb, k + 1) / psi_k(tb, k);
        CHECK(cur <= prev + 1e-12);
        CHECK(cur >= r - 1e-12);
        prev = cur;
    }
    for (long k = 80; k < 140; ++k) CHECK(psi_k(tb, k + 1) / psi_k(tb, k) <= r + 1e-12);
}

TEST_CASE("summability certificate") {
    auto cert = summability_certificate(params(0.3, 1.0, 0.5));
    // r = phi^{-1/2} ((phi-1) 0.3 + 1) with phi = 7/3
    double expected = std::pow(7.0 / 3.0, -0.5) * 1.4;
    CHECK(cert.ratio == doctest::Approx(expected).epsilon(1e-12));
    CHECK(cert.ratio < 1.0);
    CHECK(cert.finite_sum_estimate > 0.0);

    // boundary degeneracy: rho -> p~ w~ from above pushes r -> 1
    double prev = 0.0;
    for (double eps : {0.2, 0.1, 0.05, 0.01, 0.001}) {
        double r = summability_certificate(params(0.3, 1.0, 0.3 + eps)).ratio;
        CHECK(r < 1.0);
        CHECK(r > prev);
        prev = r;
    }
    CHECK(prev > 0.999);

    // vanishing failure probability sends r to 0
    CHECK(summability_certificate(params(1e-6, 1.0, 0.5)).ratio < 1e-2);
}

TEST_CASE("pi-derived sigma") {
    auto sigma = pi_sigma(2.0, 0.3, 0.5);
    CHECK(sigma(9) == 1.0);
    CHECK(sigma(10) == 0.0);  // kappa <= (w~-w) k from k = 10
    CHECK(sigma(100) == 0.0);
    CHECK_THROWS_AS(pi_sigma(1.0, 0.5, 0.5), std::invalid_argument);
}

TEST_CASE("oracle: deterministic all-failure chain") {
    HmmSpec chain;
    chain.initial = {1.0};
    chain.output = {1};
    chain.rows = {{TransitionExpr{TransitionExpr::Kind::constant, 1.0, 0, 0}}};
    CHECK(exact_tail_oracle(chain, nullptr, 0.5, 4) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("oracle: three-step chain against hand-computed binomial") {
    // initial [0.6,0.4], both rows (0.7,0.3), outputs = state index:
    // X0 ~ B(0.4), X1, X2 ~ B(0.3) independent;
    // P[X0+X1+X2 > 1.5] = 0.4*(1-0.7^2) + 0.6*0.3^2 = 0.258
    HmmSpec chain;
    chain.initial = {0.6, 0.4};
    chain.output = {0, 1};
    TransitionExpr to0{TransitionExpr::Kind::constant, 0.7, 0, 0};
    TransitionExpr to1{TransitionExpr::Kind::constant, 0.3, 0, 0};
    chain.rows = {{to0, to1}, {to0, to1}};
    CHECK(exact_tail_oracle(chain, nullptr, 0.5, 3) == doctest::Approx(0.258).epsilon(1e-13));
}

TEST_CASE("oracle respects a masking chi sequence") {
    HmmSpec chain;
    chain.initial = {1.0};
    chain.output = {1};
    chain.rows = {{TransitionExpr{TransitionExpr::Kind::constant, 1.0, 0, 0}}};
    std::vector<std::uint8_t> chi{1, 0, 1, 0};  // only two counted steps
    // sum = 2 over k = 4; threshold rho*k = 2 -> strict inequality fails
    CHECK(exact_tail_oracle(chain, &chi, 0.5, 4) == 0.0);
    CHECK(exact_tail_oracle(chain, &chi, 0.4, 4) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("oracle enumeration guard") {
    SplitMix64 rng(1);
    HmmSpec chain = random_chain(rng, 3);
    CHECK_THROWS_AS(exact_tail_oracle(chain, nullptr, 0.5, 20), std::invalid_argument);
}

TEST_CASE("periodic channel: oracle stays below the closed-form bound") {
    HmmSpec spec;
    spec.initial = {0.6, 0.4};
    spec.output = {0, 1};
    spec.rows = {
        {{TransitionExpr::Kind::cos2, 0.8, -0.02, 0.1},
         {TransitionExpr::Kind::cos2, 0.2, 0.02, 0.1}},
        {{TransitionExpr::Kind::sin2, 0.8, -0.02, 0.2},
         {TransitionExpr::Kind::sin2, 0.2, 0.02, 0.2}},
    };
    auto tb = params(0.22, 1.0, 0.5);
    for (int k = 1; k <= 10; ++k)
        CHECK(exact_tail_oracle(spec, nullptr, 0.5, k) <= psi_k(tb, k) + 1e-13);
}

TEST_CASE("dominance sweep over random small chains") {
    SplitMix64 rng(61);
    int checked = 0;
    while (checked < 30) {
        int states = 2 + int(rng.next() % 2);
        HmmSpec chain = random_chain(rng, states);
        double p_tilde = chain.sup_mass_into(1, 64);
        if (p_tilde <= 0.0 || p_tilde >= 1.0) continue;
        double rho = p_tilde + (1.0 - p_tilde) * (0.3 + 0.4 * rng.next_double());
        auto tb = params(p_tilde, 1.0, rho);
        for (int k = 1; k <= 12; ++k) {
            double exact = exact_tail_oracle(chain, nullptr, rho, k);
            double bound = psi_k(tb, k);
            REQUIRE(exact <= bound + 1e-13);
        }
        ++checked;
    }
}

TEST_CASE("expectation lemma: trivial and two-index cases") {
    HmmSpec chain;
    chain.initial = {0.6, 0.4};
    chain.output = {0, 1};
    TransitionExpr to0{TransitionExpr::Kind::constant, 0.7, 0, 0};
    TransitionExpr to1{TransitionExpr::Kind::constant, 0.3, 0, 0};
    chain.rows = {{to0, to1}, {to0, to1}};

    auto one = expectation_lemma_check(chain, {5}, 2.0);
    CHECK(one.bound == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(one.expectation <= one.bound);

    auto two = expectation_lemma_check(chain, {2, 4}, 2.0, 0.3);
    CHECK(two.bound == doctest::Approx(2.0 * 1.3).epsilon(1e-14));
    CHECK(two.expectation <= two.bound);
}

TEST_CASE("expectation lemma: silent chain is bounded by phi") {
    HmmSpec chain;
    chain.initial = {0.6, 0.4};
    chain.output = {0, 1};
    TransitionExpr stay{TransitionExpr::Kind::constant, 1.0, 0, 0};
    TransitionExpr off{TransitionExpr::Kind::constant, 0.0, 0, 0};
    chain.rows = {{stay, off}, {stay, off}};  // never outputs 1 after t = 0
    auto chk = expectation_lemma_check(chain, {0, 2, 5}, 2.0, 0.0);
    CHECK(chk.bound == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(chk.expectation == doctest::Approx(0.4 * 2.0 + 0.6).epsilon(1e-13));
}

TEST_CASE("expectation lemma sweep over random chains") {
    SplitMix64 rng(62);
    for (int trial = 0; trial < 30; ++trial) {
        int states = 2 + int(rng.next() % 2);
        HmmSpec chain = random_chain(rng, states);
        std::vector<long> indices;
        long t = rng.next() % 3;
        int s = 1 + int(rng.next() % 6);
        for (int i = 0; i < s; ++i) {
            indices.push_back(t);
            t += 1 + long(rng.next() % 2);
        }
        double phi = 1.2 + 3.0 * rng.next_double();
        auto chk = expectation_lemma_check(chain, indices, phi);
        CHECK(chk.expectation <= chk.bound * (1.0 + 1e-12));
    }
}

TEST_CASE("expectation lemma input validation") {
    HmmSpec chain;
    chain.initial = {1.0};
    chain.output = {0};
    chain.rows = {{TransitionExpr{TransitionExpr::Kind::constant, 1.0, 0, 0}}};
    CHECK_THROWS_AS(expectation_lemma_check(chain, {}, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(expectation_lemma_check(chain, {3, 3}, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(expectation_lemma_check(chain, {0}, 1.0), std::invalid_argument);
}
