#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tristat/estimation.hpp"
#include "tristat/rng.hpp"
#include "tristat/synthgen.hpp"

using namespace tristat;

namespace {

Tensor3 ordinal_tensor(std::size_t n, std::size_t m, std::size_t p, std::size_t card,
                       bool temporal = false) {
    return Tensor3(n, m, p, std::vector<VariableDomain>(m, VariableDomain::ordinal_indexed(card)),
                   temporal);
}

Tensor3 random_tensor(std::size_t n, std::size_t m, std::size_t p, std::size_t card,
                      std::uint64_t seed, bool temporal = false) {
    auto t = ordinal_tensor(n, m, p, card, temporal);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < p; ++k)
                t.set_category(i, j, k, static_cast<int>(uniform_below(rng, card)));
    return t;
}

}  // namespace

TEST_CASE("per-context marginals are direct frequencies") {
    auto t = ordinal_tensor(4, 1, 1, 2);
    t.set_category(0, 0, 0, 0);
    t.set_category(1, 0, 0, 0);
    t.set_category(2, 0, 0, 1);
    t.set_category(3, 0, 0, 1);
    const auto m = estimate_marginals(t, Scope::PerContext);
    CHECK(m.prob(0, 0, 0) == 0.5);
    CHECK(m.prob(0, 0, 1) == 0.5);
}

TEST_CASE("constant variable has a point-mass marginal") {
    auto t = ordinal_tensor(5, 1, 2, 3);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t k = 0; k < 2; ++k) t.set_category(i, 0, k, 1);
    const auto m = estimate_marginals(t, Scope::Pooled);
    CHECK(m.prob(0, 0, 1) == 1.0);
    CHECK(m.prob(0, 0, 0) == 0.0);
    CHECK(m.prob(0, 0, 2) == 0.0);
}

TEST_CASE("pooled marginals of a large uniform tensor converge to 1/L") {
    GenSpec spec;
    spec.n_obs = 1000;
    spec.n_vars = 3;
    spec.n_ctx = 50;
    spec.cardinality = 5;
    spec.n_planted = 0;
    spec.obs_range = {1, 1};
    spec.var_range = {1, 1};
    spec.ctx_range = {1, 1};
    spec.seed = 17;
    const auto [t, manifest] = generate(spec);
    const auto m = estimate_marginals(t, Scope::Pooled);
    for (std::size_t j = 0; j < 3; ++j)
        for (int c = 0; c < 5; ++c)
            CHECK(m.prob(j, 0, c) == Catch::Approx(0.2).margin(0.03));  // 50000 samples
}

TEST_CASE("marginal distributions sum to one over non-missing support") {
    auto t = random_tensor(30, 4, 6, 3, 99);
    t.set_missing(0, 1, 2);
    t.set_missing(5, 1, 2);
    const auto per = estimate_marginals(t, Scope::PerContext);
    for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t k = 0; k < 6; ++k) {
            double sum = 0;
            for (int c = 0; c < 3; ++c) sum += per.prob(j, k, c);
            CHECK(sum == Catch::Approx(1.0).epsilon(1e-12));
        }
}

TEST_CASE("empty support raises EmptySupport") {
    auto t = ordinal_tensor(2, 1, 2, 2);
    t.set_category(0, 0, 1, 0);
    t.set_category(1, 0, 1, 1);
    // context 0 entirely missing
    const auto m = estimate_marginals(t, Scope::PerContext);
    CHECK(m.empty_support(0, 0));
    CHECK_THROWS_AS(m.prob(0, 0, 0), EmptySupport);
    CHECK(m.prob(0, 1, 0) == 0.5);
}

TEST_CASE("joint_prob reduces to the marginal for one variable") {
    auto t = random_tensor(25, 3, 4, 3, 3);
    const auto per = estimate_marginals(t, Scope::PerContext);
    const auto pooled = estimate_marginals(t, Scope::Pooled);
    for (int c = 0; c < 3; ++c) {
        const CellRequirement req{1, c};
        CHECK(joint_prob(t, std::span(&req, 1), Scope::PerContext, 2) ==
              Catch::Approx(per.prob(1, 2, c)).epsilon(1e-14));
        CHECK(joint_prob(t, std::span(&req, 1), Scope::Pooled) ==
              Catch::Approx(pooled.prob(1, 0, c)).epsilon(1e-14));
    }
}

TEST_CASE("joint of perfectly correlated variables equals the marginal") {
    auto t = ordinal_tensor(20, 2, 1, 2);
    std::mt19937_64 rng(11);
    for (std::size_t i = 0; i < 20; ++i) {
        const int c = static_cast<int>(uniform_below(rng, 2));
        t.set_category(i, 0, 0, c);
        t.set_category(i, 1, 0, c);  // variable 1 is a copy
    }
    const auto m = estimate_marginals(t, Scope::PerContext);
    for (int c = 0; c < 2; ++c) {
        const std::vector<CellRequirement> reqs{{0, c}, {1, c}};
        CHECK(joint_prob(t, reqs, Scope::PerContext, 0) ==
              Catch::Approx(m.prob(0, 0, c)).epsilon(1e-14));
    }
}

TEST_CASE("joint_prob matches a brute-force row scan") {
    auto t = random_tensor(30, 3, 1, 3, 21);
    for (int c0 = 0; c0 < 3; ++c0)
        for (int c1 = 0; c1 < 3; ++c1) {
            std::size_t hits = 0;
            for (std::size_t i = 0; i < 30; ++i)
                hits += t.category(i, 0, 0) == c0 && t.category(i, 2, 0) == c1;
            const std::vector<CellRequirement> reqs{{0, c0}, {2, c1}};
            CHECK(joint_prob(t, reqs, Scope::PerContext, 0) ==
                  Catch::Approx(static_cast<double>(hits) / 30.0).epsilon(1e-14));
        }
}

TEST_CASE("joint_prob never exceeds any queried marginal") {
    auto t = random_tensor(40, 3, 5, 3, 31, true);
    const auto pooled = estimate_marginals(t, Scope::Pooled);
    std::mt19937_64 rng(1);
    for (int round = 0; round < 50; ++round) {
        std::vector<CellRequirement> reqs;
        for (std::size_t j = 0; j < 3; ++j)
            if (uniform_below(rng, 2) == 0)
                reqs.push_back({j, static_cast<int>(uniform_below(rng, 3))});
        if (reqs.empty()) continue;
        const double joint = joint_prob(t, reqs, Scope::Pooled);
        for (const auto& r : reqs) CHECK(joint <= pooled.prob(r.var, 0, r.category) + 1e-12);
    }
}

TEST_CASE("transitions of a frozen chain are a point mass") {
    auto t = ordinal_tensor(6, 1, 5, 3, true);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t k = 0; k < 5; ++k) t.set_category(i, 0, k, 2);
    const auto tr = estimate_transitions(t);
    CHECK(tr.joint(0, 2, 2) == 1.0);
    CHECK(tr.prev_marginal(0, 2) == 1.0);
    CHECK(tr.joint(0, 2, 1) == 0.0);
    CHECK(tr.joint(0, 0, 0) == 0.0);
}

TEST_CASE("iid-in-time balanced binary chain has near-uniform pair joints") {
    // 10^5 adjacent pairs: 10000 observations x (11 - 1) steps
    auto t = random_tensor(10000, 1, 11, 2, 555, true);
    const auto tr = estimate_transitions(t);
    for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v)
            CHECK(tr.joint(0, u, v) == Catch::Approx(0.25).margin(0.01));
}

TEST_CASE("joint_transition matches an exhaustive pair-count oracle") {
    auto t = random_tensor(20, 2, 4, 2, 77, true);
    for (int u0 = 0; u0 < 2; ++u0)
        for (int u1 = 0; u1 < 2; ++u1)
            for (int v0 = 0; v0 < 2; ++v0)
                for (int v1 = 0; v1 < 2; ++v1) {
                    std::size_t hits = 0, total = 0;
                    for (std::size_t i = 0; i < 20; ++i)
                        for (std::size_t k = 1; k < 4; ++k) {
                            ++total;
                            hits += t.category(i, 0, k - 1) == u0 &&
                                    t.category(i, 1, k - 1) == u1 &&
                                    t.category(i, 0, k) == v0 && t.category(i, 1, k) == v1;
                        }
                    const std::vector<CellRequirement> prev{{0, u0}, {1, u1}};
                    const std::vector<CellRequirement> next{{0, v0}, {1, v1}};
                    CHECK(joint_pair_prob(t, prev, next) ==
                          Catch::Approx(static_cast<double>(hits) / static_cast<double>(total))
                              .epsilon(1e-14));
                }
}

TEST_CASE("transition prev-marginals equal pooled marginals over contexts 1..Z-1") {
    auto t = random_tensor(50, 3, 7, 3, 13, true);
    const auto tr = estimate_transitions(t);
    for (std::size_t j = 0; j < 3; ++j) {
        std::vector<std::size_t> counts(3, 0);
        std::size_t total = 0;
        for (std::size_t i = 0; i < 50; ++i)
            for (std::size_t k = 0; k + 1 < 7; ++k) {
                ++counts[static_cast<std::size_t>(t.category(i, j, k))];
                ++total;
            }
        for (int u = 0; u < 3; ++u)
            CHECK(tr.prev_marginal(j, u) ==
                  Catch::Approx(static_cast<double>(counts[static_cast<std::size_t>(u)]) /
                                static_cast<double>(total))
                      .epsilon(1e-14));
    }
}

TEST_CASE("pair joints never exceed their prev marginal") {
    auto t = random_tensor(40, 2, 6, 3, 7, true);
    const auto tr = estimate_transitions(t);
    for (std::size_t j = 0; j < 2; ++j)
        for (int u = 0; u < 3; ++u)
            for (int v = 0; v < 3; ++v)
                CHECK(tr.joint(j, u, v) <= tr.prev_marginal(j, u) + 1e-12);
}

TEST_CASE("identical category counts give a zero chi-squared statistic") {
    auto t = ordinal_tensor(8, 2, 1, 2);
    for (std::size_t i = 0; i < 8; ++i) {
        t.set_category(i, 0, 0, static_cast<int>(i % 2));
        t.set_category(i, 1, 0, static_cast<int>(i % 2));
    }
    const GofReport rep = identically_distributed(t, 0.05);
    REQUIRE(rep.pairs.size() == 1);
    CHECK_FALSE(rep.pairs[0].rejected);
    CHECK(rep.pairs[0].statistic == Catch::Approx(0.0).margin(1e-12));
    CHECK(rep.identically_distributed);
}

TEST_CASE("maximally divergent counts are rejected at any conventional level") {
    auto t = ordinal_tensor(100, 2, 1, 2);
    for (std::size_t i = 0; i < 100; ++i) {
        t.set_category(i, 0, 0, 0);
        t.set_category(i, 1, 0, 1);
    }
    const GofReport rep = identically_distributed(t, 0.001);
    REQUIRE(rep.pairs.size() == 1);
    CHECK(rep.pairs[0].rejected);
    CHECK_FALSE(rep.identically_distributed);
}

TEST_CASE("chi-squared gate type-I error is calibrated near alpha") {
    // two samples of 500 from the same uniform |L|=5 source, 1000 repetitions
    std::mt19937_64 rng(2024);
    std::size_t rejections = 0;
    const double alpha = 0.05;
    for (int rep = 0; rep < 1000; ++rep) {
        auto t = ordinal_tensor(500, 2, 1, 5);
        for (std::size_t i = 0; i < 500; ++i) {
            t.set_category(i, 0, 0, static_cast<int>(uniform_below(rng, 5)));
            t.set_category(i, 1, 0, static_cast<int>(uniform_below(rng, 5)));
        }
        // single pair: Bonferroni divisor is 1, the raw test level applies
        const GofReport r = identically_distributed(t, alpha);
        rejections += r.pairs[0].rejected;
    }
    const double rate = static_cast<double>(rejections) / 1000.0;
    // binomial sd at p=0.05, n=1000 is ~0.0069; allow just over 3 sd
    CHECK(rate == Catch::Approx(alpha).margin(0.022));
}

TEST_CASE("mixed-kind variable pairs are never identically distributed") {
    Tensor3 t(4, 2, 1, {VariableDomain::ordinal_indexed(2), VariableDomain::real()}, false);
    for (std::size_t i = 0; i < 4; ++i) {
        t.set_category(i, 0, 0, 0);
        t.set_real(i, 1, 0, 0.5);
    }
    const GofReport rep = identically_distributed(t, 0.05);
    CHECK(rep.pairs[0].rejected);
}

TEST_CASE("two-sample KS detects a clear location shift and accepts identical samples") {
    Tensor3 t(400, 2, 1, {VariableDomain::real(), VariableDomain::real()}, false);
    std::mt19937_64 rng(88);
    for (std::size_t i = 0; i < 400; ++i) {
        const double v = gaussian(rng, 0.0, 1.0);
        t.set_real(i, 0, 0, v);
        t.set_real(i, 1, 0, v + 3.0);
    }
    CHECK_FALSE(identically_distributed(t, 0.05).identically_distributed);

    Tensor3 same(400, 2, 1, {VariableDomain::real(), VariableDomain::real()}, false);
    for (std::size_t i = 0; i < 400; ++i) {
        const double v = gaussian(rng, 0.0, 1.0);
        same.set_real(i, 0, 0, v);
        same.set_real(i, 1, 0, v);
    }
    CHECK(identically_distributed(same, 0.05).identically_distributed);
}

TEST_CASE("tiny supports are skipped and reported, not rejected") {
    auto t = ordinal_tensor(3, 2, 1, 2);
    t.set_category(0, 0, 0, 0);
    t.set_category(1, 0, 0, 1);
    t.set_category(2, 0, 0, 0);
    t.set_category(0, 1, 0, 1);
    t.set_category(1, 1, 0, 0);
    t.set_category(2, 1, 0, 1);
    const GofReport rep = identically_distributed(t, 0.05);
    REQUIRE(rep.pairs.size() == 1);
    CHECK(rep.pairs[0].skipped);
    CHECK_FALSE(rep.pairs[0].rejected);
}

TEST_CASE("observation permutation changes no estimate") {
    auto t = random_tensor(15, 2, 3, 3, 42, true);
    auto shuffled = ordinal_tensor(15, 2, 3, 3, true);
    std::vector<std::size_t> perm{14, 3, 7, 0, 11, 9, 2, 13, 5, 8, 1, 12, 6, 10, 4};
    for (std::size_t i = 0; i < 15; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 3; ++k)
                shuffled.set_category(perm[i], j, k, t.category(i, j, k));

    const auto ma = estimate_marginals(t, Scope::PerContext);
    const auto mb = estimate_marginals(shuffled, Scope::PerContext);
    const auto ta = estimate_transitions(t);
    const auto tb = estimate_transitions(shuffled);
    for (std::size_t j = 0; j < 2; ++j)
        for (int c = 0; c < 3; ++c) {
            for (std::size_t k = 0; k < 3; ++k) CHECK(ma.prob(j, k, c) == mb.prob(j, k, c));
            for (int v = 0; v < 3; ++v) CHECK(ta.joint(j, c, v) == tb.joint(j, c, v));
        }
}
