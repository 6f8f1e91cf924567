#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "tristat/rng.hpp"
#include "tristat/significance.hpp"
#include "tristat/tensor.hpp"

namespace tristat {

// ============================================================================
// Monte-Carlo placement oracle. Draws `trials` observations from the uniform
// |L|-category null and counts how often the pattern's slice sequence shows
// up: at its exact positions (ctx MI), at any increasing placement (ctx MD),
// or at any contiguous start (TC). The analytic factors C(|Z|,|K|) and
// (|Z|-|K|+1) are union bounds over placements, so the analytic p_phi is an
// upper bound on this frequency, with near-equality when placements are rare.
// ============================================================================
struct McResult {
    double frequency = 0.0;
    double ci_low = 0.0, ci_high = 0.0;  // 99% normal-approximation interval
    std::size_t trials = 0;
};

inline McResult mc_pattern_frequency(const Pattern& pat, std::size_t n_ctx_total,
                                     std::size_t cardinality, CtxModel ctx_model,
                                     std::size_t trials, std::uint64_t seed) {
    if (trials == 0) throw InvalidArgument("mc_pattern_frequency requires trials >= 1");
    const std::size_t nj = pat.var_idx.size();
    const std::size_t nk = pat.ctx_idx.size();
    if (nk > n_ctx_total) throw InvalidArgument("pattern has more contexts than the null tensor");
    std::mt19937_64 rng(seed);
    std::vector<int> row(nj * n_ctx_total);
    auto cell = [&](std::size_t jp, std::size_t k) { return row[jp * n_ctx_total + k]; };

    auto slice_matches_at = [&](std::size_t kp, std::size_t k) {
        for (std::size_t jp = 0; jp < nj; ++jp)
            if (cell(jp, k) != pat.at(jp, kp)) return false;
        return true;
    };

    std::size_t hits = 0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        for (auto& v : row) v = static_cast<int>(uniform_below(rng, cardinality));
        bool hit = false;
        switch (ctx_model) {
            case CtxModel::MI: {
                hit = true;
                for (std::size_t kp = 0; kp < nk && hit; ++kp)
                    hit = slice_matches_at(kp, pat.ctx_idx[kp]);
                break;
            }
            case CtxModel::MD: {
                // greedy in-order subsequence match
                std::size_t kp = 0;
                for (std::size_t k = 0; k < n_ctx_total && kp < nk; ++k)
                    if (slice_matches_at(kp, k)) ++kp;
                hit = kp == nk;
                break;
            }
            case CtxModel::TC: {
                for (std::size_t s = 0; s + nk <= n_ctx_total && !hit; ++s) {
                    hit = true;
                    for (std::size_t kp = 0; kp < nk && hit; ++kp)
                        hit = slice_matches_at(kp, s + kp);
                }
                break;
            }
        }
        hits += hit;
    }
    McResult r;
    r.trials = trials;
    r.frequency = static_cast<double>(hits) / static_cast<double>(trials);
    const double half =
        2.5758293035489004 * std::sqrt(std::max(r.frequency * (1.0 - r.frequency),
                                                1.0 / static_cast<double>(trials)) /
                                       static_cast<double>(trials));
    r.ci_low = std::max(0.0, r.frequency - half);
    r.ci_high = std::min(1.0, r.frequency + half);
    return r;
}

// ============================================================================
// Naive baseline miner. Exhaustive mode enumerates (J, K) subspaces within
// the configured size bounds, groups observations by their exact value tuple,
// and emits maximal constant triclusters. Greedy mode seeds on single cells
// and extends while the block stays constant. Stands in for external
// triclustering algorithms in end-to-end tests; makes no performance claims.
// ============================================================================
struct MinerConfig {
    std::size_t min_obs = 2;
    std::size_t min_vars = 1, max_vars = 3;
    std::size_t min_ctx = 1, max_ctx = 3;
    bool contiguous_ctx = false;
    enum class Mode { Exhaustive, Greedy } mode = Mode::Exhaustive;
    std::size_t max_enumerations = 2'000'000;
};

namespace detail {

inline void combinations(std::size_t n, std::size_t lo, std::size_t hi,
                         const std::function<void(const std::vector<std::size_t>&)>& emit) {
    std::vector<std::size_t> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
        if (cur.size() >= lo) emit(cur);
        if (cur.size() == hi) return;
        for (std::size_t v = start; v < n; ++v) {
            cur.push_back(v);
            rec(v + 1);
            cur.pop_back();
        }
    };
    rec(0);
}

inline double count_subsets(std::size_t n, std::size_t lo, std::size_t hi) {
    double total = 0.0;
    for (std::size_t s = lo; s <= hi && s <= n; ++s) total += std::exp(log_binom(n, s));
    return total;
}

}  // namespace detail

inline std::vector<Tricluster> naive_miner(const Tensor3& t, const MinerConfig& cfg) {
    if (cfg.min_vars < 1 || cfg.min_ctx < 1 || cfg.min_obs < 1)
        throw InvalidArgument("miner minimum sizes must be >= 1");
    std::vector<Tricluster> out;

    if (cfg.mode == MinerConfig::Mode::Greedy) {
        // best surviving row subset when coordinate (jj, kk) joins the block:
        // rows of I that share the modal value there (ties to the lowest value)
        auto restrict_rows = [&](const std::vector<std::size_t>& rows, std::size_t jj,
                                 std::size_t kk) {
            std::map<double, std::vector<std::size_t>> by_value;
            for (std::size_t i : rows)
                if (!t.missing(i, jj, kk)) by_value[t.value(i, jj, kk)].push_back(i);
            std::vector<std::size_t> best;
            for (auto& [value, group] : by_value)
                if (group.size() > best.size()) best = std::move(group);
            return best;
        };
        for (std::size_t j = 0; j < t.n_vars(); ++j)
            for (std::size_t k = 0; k < t.n_ctx(); ++k) {
                std::map<double, std::vector<std::size_t>> by_value;
                for (std::size_t i = 0; i < t.n_obs(); ++i)
                    if (!t.missing(i, j, k)) by_value[t.value(i, j, k)].push_back(i);
                for (auto& [value, rows] : by_value) {
                    if (rows.size() < cfg.min_obs) continue;
                    Tricluster tc;
                    tc.obs_idx = rows;
                    tc.var_idx = {j};
                    tc.ctx_idx = {k};
                    tc.contiguous_ctx = cfg.contiguous_ctx;
                    while (true) {
                        // candidate extension keeping the most rows, vars first
                        std::vector<std::size_t> best_rows;
                        std::size_t best_coord = 0;
                        bool best_is_var = true, found = false;
                        auto consider = [&](std::size_t coord, bool is_var) {
                            std::vector<std::size_t> kept = tc.obs_idx;
                            if (is_var) {
                                for (std::size_t kk : tc.ctx_idx)
                                    kept = restrict_rows(kept, coord, kk);
                            } else {
                                for (std::size_t jj : tc.var_idx)
                                    kept = restrict_rows(kept, jj, coord);
                            }
                            if (kept.size() >= cfg.min_obs && kept.size() > best_rows.size()) {
                                best_rows = std::move(kept);
                                best_coord = coord;
                                best_is_var = is_var;
                                found = true;
                            }
                        };
                        if (tc.var_idx.size() < cfg.max_vars)
                            for (std::size_t jj = 0; jj < t.n_vars(); ++jj)
                                if (std::find(tc.var_idx.begin(), tc.var_idx.end(), jj) ==
                                    tc.var_idx.end())
                                    consider(jj, true);
                        if (tc.ctx_idx.size() < cfg.max_ctx)
                            for (std::size_t kk = 0; kk < t.n_ctx(); ++kk) {
                                if (std::find(tc.ctx_idx.begin(), tc.ctx_idx.end(), kk) !=
                                    tc.ctx_idx.end())
                                    continue;
                                if (cfg.contiguous_ctx && kk + 1 != tc.ctx_idx.front() &&
                                    kk != tc.ctx_idx.back() + 1)
                                    continue;
                                consider(kk, false);
                            }
                        if (!found) break;
                        tc.obs_idx = std::move(best_rows);
                        auto& axis = best_is_var ? tc.var_idx : tc.ctx_idx;
                        axis.insert(std::lower_bound(axis.begin(), axis.end(), best_coord),
                                    best_coord);
                    }
                    if (tc.var_idx.size() >= cfg.min_vars && tc.ctx_idx.size() >= cfg.min_ctx &&
                        std::find(out.begin(), out.end(), tc) == out.end())
                        out.push_back(std::move(tc));
                }
            }
    } else {
        double ctx_count;
        if (cfg.contiguous_ctx) {
            ctx_count = 0;
            for (std::size_t s = cfg.min_ctx; s <= cfg.max_ctx && s <= t.n_ctx(); ++s)
                ctx_count += static_cast<double>(t.n_ctx() - s + 1);
        } else {
            ctx_count = detail::count_subsets(t.n_ctx(), cfg.min_ctx, cfg.max_ctx);
        }
        const double var_count = detail::count_subsets(t.n_vars(), cfg.min_vars, cfg.max_vars);
        if (var_count * ctx_count > static_cast<double>(cfg.max_enumerations))
            throw SearchSpaceTooLarge("exhaustive miner would enumerate " +
                                      std::to_string(var_count * ctx_count) + " subspaces");

        std::vector<std::vector<std::size_t>> ctx_sets;
        if (cfg.contiguous_ctx) {
            for (std::size_t s = cfg.min_ctx; s <= cfg.max_ctx && s <= t.n_ctx(); ++s)
                for (std::size_t start = 0; start + s <= t.n_ctx(); ++start) {
                    std::vector<std::size_t> run(s);
                    for (std::size_t k = 0; k < s; ++k) run[k] = start + k;
                    ctx_sets.push_back(std::move(run));
                }
        } else {
            detail::combinations(t.n_ctx(), cfg.min_ctx, cfg.max_ctx,
                                 [&](const std::vector<std::size_t>& ks) { ctx_sets.push_back(ks); });
        }

        detail::combinations(t.n_vars(), cfg.min_vars, cfg.max_vars,
                             [&](const std::vector<std::size_t>& js) {
            for (const auto& ks : ctx_sets) {
                std::map<std::vector<double>, std::vector<std::size_t>> groups;
                std::vector<double> key(js.size() * ks.size());
                for (std::size_t i = 0; i < t.n_obs(); ++i) {
                    bool ok = true;
                    for (std::size_t a = 0; a < js.size() && ok; ++a)
                        for (std::size_t b = 0; b < ks.size() && ok; ++b) {
                            if (t.missing(i, js[a], ks[b]))
                                ok = false;
                            else
                                key[a * ks.size() + b] = t.value(i, js[a], ks[b]);
                        }
                    if (ok) groups[key].push_back(i);
                }
                for (auto& [pattern, rows] : groups)
                    if (rows.size() >= cfg.min_obs) {
                        Tricluster tc;
                        tc.obs_idx = rows;
                        tc.var_idx = js;
                        tc.ctx_idx = ks;
                        tc.contiguous_ctx = cfg.contiguous_ctx;
                        out.push_back(std::move(tc));
                    }
            }
        });
    }

    // maximality: drop candidates strictly contained in another candidate
    auto contains = [](const Tricluster& big, const Tricluster& small) {
        return std::includes(big.obs_idx.begin(), big.obs_idx.end(), small.obs_idx.begin(),
                             small.obs_idx.end()) &&
               std::includes(big.var_idx.begin(), big.var_idx.end(), small.var_idx.begin(),
                             small.var_idx.end()) &&
               std::includes(big.ctx_idx.begin(), big.ctx_idx.end(), small.ctx_idx.begin(),
                             small.ctx_idx.end());
    };
    std::vector<Tricluster> maximal;
    for (std::size_t a = 0; a < out.size(); ++a) {
        bool dominated = false;
        for (std::size_t b = 0; b < out.size() && !dominated; ++b)
            dominated = a != b && !(out[b] == out[a]) && contains(out[b], out[a]);
        // exact duplicates keep only their first occurrence
        for (std::size_t b = 0; b < a && !dominated; ++b) dominated = out[b] == out[a];
        if (!dominated) maximal.push_back(out[a]);
    }
    std::sort(maximal.begin(), maximal.end(), [](const Tricluster& a, const Tricluster& b) {
        if (a.var_idx != b.var_idx) return a.var_idx < b.var_idx;
        if (a.ctx_idx != b.ctx_idx) return a.ctx_idx < b.ctx_idx;
        return a.obs_idx < b.obs_idx;
    });
    return maximal;
}

// ============================================================================
// Reference grid: minimum significant observation counts under the
// theoretical uniform null, for both closed-form context models.
// ============================================================================
struct GridCell {
    std::size_t cardinality, n_vars_pattern, n_ctx_pattern;
    CtxModel ctx_model;  // MD or TC
    double p_pattern;
    MinObsResult n_min, n_min_corrected;
};

inline std::vector<GridCell> min_obs_grid(std::size_t n_obs, std::size_t n_vars,
                                          std::size_t n_ctx, const std::vector<std::size_t>& Ls,
                                          const std::vector<std::size_t>& Js,
                                          const std::vector<std::size_t>& Ks, double alpha) {
    std::vector<GridCell> cells;
    for (std::size_t J : Js)
        for (std::size_t L : Ls)
            for (CtxModel model : {CtxModel::MD, CtxModel::TC})
                for (std::size_t K : Ks) {
                    if (J > n_vars || K > n_ctx) throw InvalidArgument("grid cell exceeds axes");
                    const double placements = model == CtxModel::MD
                                                  ? std::exp(log_binom(n_ctx, K))
                                                  : static_cast<double>(n_ctx - K + 1);
                    const double p =
                        placements * std::pow(static_cast<double>(L),
                                              -static_cast<double>(J) * static_cast<double>(K));
                    GridCell c{L, J, K, model, p, {}, {}};
                    c.n_min = min_observations(p, n_obs, alpha, 1.0);
                    c.n_min_corrected =
                        min_observations(p, n_obs, alpha, std::exp(log_binom(n_vars, J)));
                    cells.push_back(c);
                }
    return cells;
}

// Random constant-coherent subspace: random (J, K) of the requested shape,
// pattern set to the modal value over all observations, I = every observation
// matching that pattern. The natural null counterpart of a planted tricluster.
inline Tricluster random_coherent_subspace(const Tensor3& t, std::size_t n_vars_tric,
                                           std::size_t n_ctx_tric, bool contiguous,
                                           std::mt19937_64& rng, std::size_t max_retries = 256) {
    for (std::size_t attempt = 0; attempt <= max_retries; ++attempt) {
        Tricluster tc;
        tc.contiguous_ctx = contiguous;
        tc.var_idx = sample_indices(rng, t.n_vars(), n_vars_tric);
        if (contiguous) {
            const std::size_t start =
                static_cast<std::size_t>(uniform_below(rng, t.n_ctx() - n_ctx_tric + 1));
            tc.ctx_idx.resize(n_ctx_tric);
            for (std::size_t k = 0; k < n_ctx_tric; ++k) tc.ctx_idx[k] = start + k;
        } else {
            tc.ctx_idx = sample_indices(rng, t.n_ctx(), n_ctx_tric);
        }

        Pattern pat;
        pat.var_idx = tc.var_idx;
        pat.ctx_idx = tc.ctx_idx;
        pat.cells.resize(n_vars_tric * n_ctx_tric);
        bool ok = true;
        for (std::size_t jp = 0; jp < n_vars_tric && ok; ++jp) {
            const std::size_t j = tc.var_idx[jp];
            if (t.domain(j).kind != DomainKind::Ordinal) {
                ok = false;
                break;
            }
            std::vector<std::size_t> counts(t.domain(j).cardinality());
            for (std::size_t kp = 0; kp < n_ctx_tric; ++kp) {
                std::fill(counts.begin(), counts.end(), 0);
                for (std::size_t i = 0; i < t.n_obs(); ++i) {
                    const int c = t.category(i, j, tc.ctx_idx[kp]);
                    if (c >= 0) ++counts[static_cast<std::size_t>(c)];
                }
                std::size_t best = 0;
                for (std::size_t c = 1; c < counts.size(); ++c)
                    if (counts[c] > counts[best]) best = c;
                if (counts[best] == 0) {
                    ok = false;
                    break;
                }
                pat.at(jp, kp) = static_cast<int>(best);
            }
        }
        if (!ok) continue;

        for (std::size_t i = 0; i < t.n_obs(); ++i) {
            bool match = true;
            for (std::size_t jp = 0; jp < n_vars_tric && match; ++jp)
                for (std::size_t kp = 0; kp < n_ctx_tric && match; ++kp)
                    match = t.category(i, tc.var_idx[jp], tc.ctx_idx[kp]) == pat.at(jp, kp);
            if (match) tc.obs_idx.push_back(i);
        }
        if (!tc.obs_idx.empty()) return tc;
    }
    throw Error("random_coherent_subspace: no matching observations after retries");
}

}  // namespace tristat
