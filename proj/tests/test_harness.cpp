#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "tristat/exact_tail.hpp"
#include "tristat/harness.hpp"
#include "tristat/io.hpp"
#include "tristat/synthgen.hpp"

using namespace tristat;

namespace {

Pattern pattern_of(std::vector<std::size_t> vars, std::vector<std::size_t> ctxs,
                   std::vector<int> cells) {
    Pattern p;
    p.var_idx = std::move(vars);
    p.ctx_idx = std::move(ctxs);
    p.cells = std::move(cells);
    p.non_constant.assign(p.cells.size(), 0);
    return p;
}

}  // namespace

TEST_CASE("mc frequency of a single binary cell is one half") {
    const Pattern pat = pattern_of({0}, {0}, {1});
    const McResult r = mc_pattern_frequency(pat, 1, 2, CtxModel::MI, 100000, 3);
    CHECK(r.frequency == Catch::Approx(0.5).margin(0.006));
    CHECK(r.ci_low < 0.5);
    CHECK(0.5 < r.ci_high);
}

TEST_CASE("TC analytic value sits inside the Monte-Carlo interval") {
    // |L|=3, |J|=2, |K|=2, |Z|=4: (1/3)^4 * 3 = 0.037037
    const Pattern pat = pattern_of({0, 1}, {0, 1}, {0, 1, 2, 0});
    const McResult r = mc_pattern_frequency(pat, 4, 3, CtxModel::TC, 100000, 11);
    const double analytic = 3.0 / 81.0;
    CHECK(r.ci_low <= analytic);
    CHECK(analytic <= r.ci_high);
}

TEST_CASE("MD analytic factor is an upper bound with a documented gap") {
    // |L|=3, |J|=1, |K|=2 of |Z|=3: exact P(>=1 ordered placement) = 7/27,
    // analytic C(3,2)/9 = 1/3 > 7/27
    const Pattern pat = pattern_of({0}, {0, 1}, {0, 1});
    const McResult r = mc_pattern_frequency(pat, 3, 3, CtxModel::MD, 100000, 17);
    const double exact = 7.0 / 27.0;
    const double analytic = 3.0 / 9.0;
    CHECK(r.ci_low <= exact);
    CHECK(exact <= r.ci_high);
    CHECK(r.frequency <= analytic);
    CHECK(analytic > exact + (r.ci_high - r.ci_low));  // the gap is real, not noise
}

TEST_CASE("mc is deterministic per seed and CIs shrink like 1/sqrt(trials)") {
    const Pattern pat = pattern_of({0}, {0}, {0});
    const McResult a = mc_pattern_frequency(pat, 2, 2, CtxModel::MD, 20000, 5);
    const McResult b = mc_pattern_frequency(pat, 2, 2, CtxModel::MD, 20000, 5);
    CHECK(a.frequency == b.frequency);
    const McResult wide = mc_pattern_frequency(pat, 2, 2, CtxModel::MD, 10000, 5);
    const McResult narrow = mc_pattern_frequency(pat, 2, 2, CtxModel::MD, 160000, 5);
    const double ratio = (wide.ci_high - wide.ci_low) / (narrow.ci_high - narrow.ci_low);
    CHECK(ratio == Catch::Approx(4.0).margin(0.8));  // sqrt(16) = 4
}

TEST_CASE("exact tail oracle handles the trivial pins") {
    CHECK(std::exp(exact_log_binomial_tail(0.5, 2, 1)) == Catch::Approx(0.75).epsilon(1e-15));
    CHECK(exact_log_binomial_tail(1.0, 10, 4) == 0.0);
    CHECK(exact_log_binomial_tail(0.3, 10, 0) == 0.0);
    // reference value for the (p = 0.0784, n_min) grid neighborhood
    const double lt = exact_log_binomial_tail(0.0784, 1000, 99);
    CHECK(std::exp(lt) == Catch::Approx(0.0108124919988).epsilon(1e-9));
}

TEST_CASE("exhaustive miner recovers a planted block on a noisy background") {
    GenSpec spec;
    spec.n_obs = 25;
    spec.n_vars = 6;
    spec.n_ctx = 5;
    spec.cardinality = 4;
    spec.n_planted = 1;
    spec.obs_range = {6, 10};
    spec.var_range = {2, 2};
    spec.ctx_range = {2, 2};
    spec.seed = 3;
    const auto [t, manifest] = generate(spec);

    MinerConfig cfg;
    cfg.min_obs = 4;
    cfg.min_vars = 2;
    cfg.max_vars = 2;
    cfg.min_ctx = 2;
    cfg.max_ctx = 2;
    const auto found = naive_miner(t, cfg);

    const Tricluster& planted = manifest.planted[0].tc;
    bool recovered = false;
    for (const auto& tc : found)
        recovered = recovered ||
                    (std::includes(tc.obs_idx.begin(), tc.obs_idx.end(), planted.obs_idx.begin(),
                                   planted.obs_idx.end()) &&
                     std::includes(tc.var_idx.begin(), tc.var_idx.end(), planted.var_idx.begin(),
                                   planted.var_idx.end()) &&
                     std::includes(tc.ctx_idx.begin(), tc.ctx_idx.end(), planted.ctx_idx.begin(),
                                   planted.ctx_idx.end()));
    CHECK(recovered);
}

TEST_CASE("all synthgen plantings appear in exhaustive output") {
    GenSpec spec;
    spec.n_obs = 30;
    spec.n_vars = 7;
    spec.n_ctx = 6;
    spec.cardinality = 3;
    spec.n_planted = 3;
    spec.obs_range = {5, 9};
    spec.var_range = {2, 3};
    spec.ctx_range = {2, 3};
    spec.seed = 14;
    const auto [t, manifest] = generate(spec);
    MinerConfig cfg;
    cfg.min_obs = 4;
    cfg.min_vars = 2;
    cfg.max_vars = 3;
    cfg.min_ctx = 2;
    cfg.max_ctx = 3;
    const auto found = naive_miner(t, cfg);
    for (const auto& planted : manifest.planted) {
        bool contained = false;
        for (const auto& tc : found)
            contained =
                contained ||
                (std::includes(tc.obs_idx.begin(), tc.obs_idx.end(), planted.tc.obs_idx.begin(),
                               planted.tc.obs_idx.end()) &&
                 std::includes(tc.var_idx.begin(), tc.var_idx.end(), planted.tc.var_idx.begin(),
                               planted.tc.var_idx.end()) &&
                 std::includes(tc.ctx_idx.begin(), tc.ctx_idx.end(), planted.tc.ctx_idx.begin(),
                               planted.tc.ctx_idx.end()));
        CHECK(contained);
    }
}

TEST_CASE("miner output is maximal and deterministically ordered") {
    GenSpec spec;
    spec.n_obs = 20;
    spec.n_vars = 5;
    spec.n_ctx = 4;
    spec.cardinality = 2;
    spec.n_planted = 0;
    spec.obs_range = spec.var_range = spec.ctx_range = {1, 1};
    spec.seed = 8;
    const auto [t, manifest] = generate(spec);
    MinerConfig cfg;
    cfg.min_obs = 3;
    cfg.min_vars = 1;
    cfg.max_vars = 2;
    cfg.min_ctx = 1;
    cfg.max_ctx = 2;
    const auto found = naive_miner(t, cfg);
    REQUIRE_FALSE(found.empty());
    for (std::size_t a = 0; a < found.size(); ++a)
        for (std::size_t b = 0; b < found.size(); ++b) {
            if (a == b) continue;
            const bool contained =
                std::includes(found[b].obs_idx.begin(), found[b].obs_idx.end(),
                              found[a].obs_idx.begin(), found[a].obs_idx.end()) &&
                std::includes(found[b].var_idx.begin(), found[b].var_idx.end(),
                              found[a].var_idx.begin(), found[a].var_idx.end()) &&
                std::includes(found[b].ctx_idx.begin(), found[b].ctx_idx.end(),
                              found[a].ctx_idx.begin(), found[a].ctx_idx.end());
            CHECK((!contained || found[a] == found[b]));
        }
    CHECK(naive_miner(t, cfg) == found);
}

TEST_CASE("an all-distinct real tensor mines to nothing") {
    Tensor3 t(6, 2, 2, {VariableDomain::real(), VariableDomain::real()}, false);
    double v = 0.0;
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k) t.set_real(i, j, k, v += 1.25);
    MinerConfig cfg;
    cfg.min_obs = 2;
    CHECK(naive_miner(t, cfg).empty());
}

TEST_CASE("exhaustive mode refuses oversized search spaces") {
    Tensor3 t(5, 40, 40, std::vector<VariableDomain>(40, VariableDomain::ordinal_indexed(2)),
              false);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 40; ++j)
            for (std::size_t k = 0; k < 40; ++k) t.set_category(i, j, k, 0);
    MinerConfig cfg;
    cfg.max_vars = 6;
    cfg.max_ctx = 6;
    CHECK_THROWS_AS(naive_miner(t, cfg), SearchSpaceTooLarge);

    cfg.mode = MinerConfig::Mode::Greedy;
    CHECK_NOTHROW(naive_miner(t, cfg));
}

TEST_CASE("greedy mode grows constant blocks from seeds") {
    GenSpec spec;
    spec.n_obs = 30;
    spec.n_vars = 6;
    spec.n_ctx = 5;
    spec.cardinality = 4;
    spec.n_planted = 1;
    spec.obs_range = {8, 12};
    spec.var_range = {3, 3};
    spec.ctx_range = {3, 3};
    spec.seed = 44;
    const auto [t, manifest] = generate(spec);
    MinerConfig cfg;
    cfg.mode = MinerConfig::Mode::Greedy;
    cfg.min_obs = 6;
    cfg.min_vars = 2;
    cfg.max_vars = 4;
    cfg.min_ctx = 2;
    cfg.max_ctx = 4;
    const auto found = naive_miner(t, cfg);
    // every emitted tricluster really is constant per (j, k)
    for (const auto& tc : found) {
        const Pattern p = extract_pattern(t, tc);
        CHECK_FALSE(p.any_non_constant());
    }
    // the planting's block shows up in at least one grown tricluster
    const Tricluster& planted = manifest.planted[0].tc;
    bool touched = false;
    for (const auto& tc : found)
        touched = touched || (std::includes(tc.obs_idx.begin(), tc.obs_idx.end(),
                                            planted.obs_idx.begin(), planted.obs_idx.end()));
    CHECK(touched);
}

TEST_CASE("min_obs_grid reproduces the pinned reference cells") {
    const auto cells = min_obs_grid(1000, 50, 50, {3, 5}, {2, 3, 4}, {2}, 0.01);
    auto find = [&](std::size_t L, std::size_t J, CtxModel model) {
        for (const auto& c : cells)
            if (c.cardinality == L && c.n_vars_pattern == J && c.ctx_model == model) return c;
        throw std::logic_error("cell not found");
    };
    const GridCell a = find(5, 3, CtxModel::MD);  // p = 0.0784 -> 99 / 123
    CHECK(a.p_pattern == Catch::Approx(0.0784).epsilon(1e-12));
    CHECK(a.n_min.n_min == 99);
    CHECK(a.n_min_corrected.n_min == 123);

    const GridCell b = find(3, 2, CtxModel::MD);  // p = 15.12 -> not assessable
    CHECK(b.p_pattern == Catch::Approx(15.1234567901).epsilon(1e-9));
    CHECK_FALSE(b.n_min.assessable);
    CHECK_FALSE(b.n_min_corrected.assessable);

    const GridCell c = find(5, 4, CtxModel::TC);  // p = 1.25e-4 -> 1 / 5
    CHECK(c.p_pattern == Catch::Approx(1.2544e-4).epsilon(1e-12));
    CHECK(c.n_min.n_min == 1);
    CHECK(c.n_min_corrected.n_min == 5);
}

TEST_CASE("grid CSV renders dashes for unassessable cells") {
    const auto cells = min_obs_grid(1000, 50, 50, {3}, {2}, {2}, 0.01);
    std::ostringstream os;
    write_grid_csv(os, cells);
    const std::string expected =
        "cardinality,n_vars_pattern,n_ctx_pattern,ctx_model,p_pattern,n_min,n_min_corrected\n"
        "3,2,2,md,15.1235,-,-\n"
        "3,2,2,tc,0.604938,641,671\n";
    CHECK(os.str() == expected);
}
