#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tristat/special.hpp"
#include "tristat/tensor.hpp"

namespace tristat {

enum class Scope { PerContext, Pooled };

// ============================================================================
// MarginalTable — empirical P(c_jk), per context slice or pooled over Z.
// Denominators are the non-missing support; an additive pseudo-count
// (smoothing) may be spread over the categories.
// ============================================================================
struct MarginalTable {
    Scope scope = Scope::Pooled;
    std::size_t n_vars = 0;
    std::size_t n_ctx = 1;  // 1 when pooled
    double smoothing = 0.0;
    // counts[j][k][c]; k = 0 when pooled
    std::vector<std::vector<std::vector<std::size_t>>> counts;
    std::vector<std::vector<std::size_t>> support;  // non-missing count per (j, k)

    std::size_t slot(std::size_t k) const { return scope == Scope::Pooled ? 0 : k; }

    bool empty_support(std::size_t j, std::size_t k) const {
        return support[j][slot(k)] == 0;
    }

    double prob(std::size_t j, std::size_t k, int c) const {
        const std::size_t s = slot(k);
        const std::size_t total = support[j][s];
        const std::size_t n_cat = counts[j][s].size();
        if (total == 0 && smoothing == 0.0)
            throw EmptySupport("no non-missing support for variable " + std::to_string(j));
        const double num = static_cast<double>(counts[j][s][static_cast<std::size_t>(c)]) + smoothing;
        const double den = static_cast<double>(total) + smoothing * static_cast<double>(n_cat);
        return num / den;
    }
};

inline MarginalTable estimate_marginals(const Tensor3& t, Scope scope, double smoothing = 0.0) {
    MarginalTable m;
    m.scope = scope;
    m.n_vars = t.n_vars();
    m.n_ctx = scope == Scope::Pooled ? 1 : t.n_ctx();
    m.smoothing = smoothing;
    m.counts.resize(t.n_vars());
    m.support.resize(t.n_vars());
    for (std::size_t j = 0; j < t.n_vars(); ++j) {
        const std::size_t card =
            t.domain(j).kind == DomainKind::Ordinal ? t.domain(j).cardinality() : 0;
        m.counts[j].assign(m.n_ctx, std::vector<std::size_t>(card, 0));
        m.support[j].assign(m.n_ctx, 0);
        if (card == 0) continue;  // real variable: no categorical marginals
        for (std::size_t i = 0; i < t.n_obs(); ++i)
            for (std::size_t k = 0; k < t.n_ctx(); ++k) {
                const int c = t.category(i, j, k);
                if (c < 0) continue;
                const std::size_t s = scope == Scope::Pooled ? 0 : k;
                ++m.counts[j][s][static_cast<std::size_t>(c)];
                ++m.support[j][s];
            }
    }
    return m;
}

// ============================================================================
// TransitionTable — stationary first-order Markov statistics, pooled over all
// adjacent context pairs and observations. joint(j,u,v) = P(u at k-1, v at k);
// prev_marginal matches the pooled marginal over contexts 1..Z-1.
// ============================================================================
struct TransitionTable {
    std::size_t n_vars = 0;
    double smoothing = 0.0;
    std::vector<std::vector<std::vector<std::size_t>>> pair_counts;  // [j][u][v]
    std::vector<std::vector<std::size_t>> prev_counts;               // [j][u]
    std::vector<std::size_t> pair_total;                             // per variable
    std::vector<std::size_t> prev_total;

    double joint(std::size_t j, int u, int v) const {
        const std::size_t card = pair_counts[j].size();
        if (pair_total[j] == 0 && smoothing == 0.0)
            throw EmptySupport("no adjacent-pair support for variable " + std::to_string(j));
        const double num =
            static_cast<double>(pair_counts[j][static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]) +
            smoothing;
        const double den = static_cast<double>(pair_total[j]) +
                           smoothing * static_cast<double>(card) * static_cast<double>(card);
        return num / den;
    }

    double prev_marginal(std::size_t j, int u) const {
        const std::size_t card = prev_counts[j].size();
        if (prev_total[j] == 0 && smoothing == 0.0)
            throw EmptySupport("no adjacent-pair support for variable " + std::to_string(j));
        const double num = static_cast<double>(prev_counts[j][static_cast<std::size_t>(u)]) + smoothing;
        const double den =
            static_cast<double>(prev_total[j]) + smoothing * static_cast<double>(card);
        return num / den;
    }
};

inline TransitionTable estimate_transitions(const Tensor3& t, double smoothing = 0.0) {
    if (!t.ctx_is_temporal())
        throw UnsupportedProfile("transition estimation requires a temporal context axis");
    if (t.n_ctx() < 2) throw InvalidArgument("transition estimation requires n_ctx >= 2");
    TransitionTable tr;
    tr.n_vars = t.n_vars();
    tr.smoothing = smoothing;
    tr.pair_counts.resize(t.n_vars());
    tr.prev_counts.resize(t.n_vars());
    tr.pair_total.assign(t.n_vars(), 0);
    tr.prev_total.assign(t.n_vars(), 0);
    for (std::size_t j = 0; j < t.n_vars(); ++j) {
        const std::size_t card =
            t.domain(j).kind == DomainKind::Ordinal ? t.domain(j).cardinality() : 0;
        tr.pair_counts[j].assign(card, std::vector<std::size_t>(card, 0));
        tr.prev_counts[j].assign(card, 0);
        if (card == 0) continue;
        for (std::size_t i = 0; i < t.n_obs(); ++i)
            for (std::size_t k = 1; k < t.n_ctx(); ++k) {
                const int u = t.category(i, j, k - 1);
                const int v = t.category(i, j, k);
                if (u < 0 || v < 0) continue;
                ++tr.pair_counts[j][static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
                ++tr.prev_counts[j][static_cast<std::size_t>(u)];
                ++tr.pair_total[j];
                ++tr.prev_total[j];
            }
    }
    return tr;
}

// ============================================================================
// On-demand joint probabilities across variables (row scans)
// ============================================================================
struct CellRequirement {
    std::size_t var;
    int category;
};

namespace detail {
inline double joint_config_count(const Tensor3& t, std::span<const CellRequirement> reqs) {
    double n = 1.0;
    for (const auto& r : reqs) n *= static_cast<double>(t.domain(r.var).cardinality());
    return n;
}
}  // namespace detail

// P(and_j c_j) at one context slice (Scope::PerContext with ctx set) or pooled
// over all (i, k). Observations missing any queried cell drop out of both
// numerator and denominator.
inline double joint_prob(const Tensor3& t, std::span<const CellRequirement> reqs, Scope scope,
                         std::optional<std::size_t> ctx = std::nullopt, double smoothing = 0.0) {
    if (reqs.empty()) throw InvalidArgument("joint_prob requires at least one queried variable");
    if (scope == Scope::PerContext && !ctx)
        throw InvalidArgument("per-context joint_prob requires a context index");
    std::size_t match = 0, total = 0;
    const std::size_t k0 = scope == Scope::PerContext ? *ctx : 0;
    const std::size_t k1 = scope == Scope::PerContext ? *ctx + 1 : t.n_ctx();
    for (std::size_t i = 0; i < t.n_obs(); ++i)
        for (std::size_t k = k0; k < k1; ++k) {
            bool ok = true, all = true;
            for (const auto& r : reqs) {
                const int c = t.category(i, r.var, k);
                if (c < 0) {
                    ok = false;
                    break;
                }
                if (c != r.category) all = false;
            }
            if (!ok) continue;
            ++total;
            if (all) ++match;
        }
    if (total == 0 && smoothing == 0.0) throw EmptySupport("joint_prob has no non-missing support");
    return (static_cast<double>(match) + smoothing) /
           (static_cast<double>(total) + smoothing * detail::joint_config_count(t, reqs));
}

// P(and_j (prev_j at k-1, next_j at k)) pooled over all adjacent pairs.
// prev and next must query the same variables in the same order.
inline double joint_pair_prob(const Tensor3& t, std::span<const CellRequirement> prev,
                              std::span<const CellRequirement> next, double smoothing = 0.0) {
    if (prev.size() != next.size() || prev.empty())
        throw InvalidArgument("joint_pair_prob requires matching non-empty requirement lists");
    if (t.n_ctx() < 2) throw InvalidArgument("joint_pair_prob requires n_ctx >= 2");
    std::size_t match = 0, total = 0;
    for (std::size_t i = 0; i < t.n_obs(); ++i)
        for (std::size_t k = 1; k < t.n_ctx(); ++k) {
            bool ok = true, all = true;
            for (std::size_t r = 0; r < prev.size(); ++r) {
                const int u = t.category(i, prev[r].var, k - 1);
                const int v = t.category(i, next[r].var, k);
                if (u < 0 || v < 0) {
                    ok = false;
                    break;
                }
                if (u != prev[r].category || v != next[r].category) all = false;
            }
            if (!ok) continue;
            ++total;
            if (all) ++match;
        }
    if (total == 0 && smoothing == 0.0)
        throw EmptySupport("joint_pair_prob has no adjacent-pair support");
    const double cfg = detail::joint_config_count(t, prev) * detail::joint_config_count(t, next);
    return (static_cast<double>(match) + smoothing) / (static_cast<double>(total) + smoothing * cfg);
}

// P(and_j prev_j) over first positions of adjacent pairs (contexts 0..Z-2);
// the denominator of the stationary transition ratio.
inline double joint_first_prob(const Tensor3& t, std::span<const CellRequirement> prev,
                               double smoothing = 0.0) {
    if (prev.empty()) throw InvalidArgument("joint_first_prob requires queried variables");
    if (t.n_ctx() < 2) throw InvalidArgument("joint_first_prob requires n_ctx >= 2");
    std::size_t match = 0, total = 0;
    for (std::size_t i = 0; i < t.n_obs(); ++i)
        for (std::size_t k = 0; k + 1 < t.n_ctx(); ++k) {
            bool ok = true, all = true;
            for (const auto& r : prev) {
                const int c = t.category(i, r.var, k);
                if (c < 0) {
                    ok = false;
                    break;
                }
                if (c != r.category) all = false;
            }
            if (!ok) continue;
            ++total;
            if (all) ++match;
        }
    if (total == 0 && smoothing == 0.0)
        throw EmptySupport("joint_first_prob has no non-missing support");
    return (static_cast<double>(match) + smoothing) /
           (static_cast<double>(total) + smoothing * detail::joint_config_count(t, prev));
}

// ============================================================================
// Goodness-of-fit gate for the identically-distributed assumption.
// Pairwise two-sample chi-squared (ordinal) / Kolmogorov-Smirnov (real) over
// pooled variable distributions, Bonferroni-adjusted across pairs.
// ============================================================================
struct PairTest {
    std::size_t var_a = 0, var_b = 0;
    double statistic = 0.0;
    double p_value = 1.0;
    bool rejected = false;
    bool skipped = false;  // InsufficientSupport after merging
    std::string note;
};

struct GofReport {
    std::vector<PairTest> pairs;
    bool identically_distributed = true;
    double alpha = 0.05;
};

namespace detail {

// two-sample chi-squared on category counts; merges the two smallest-expected
// cells until all expected counts are >= 5
inline PairTest chi2_two_sample(std::vector<double> a, std::vector<double> b) {
    PairTest r;
    double na = 0, nb = 0;
    for (double x : a) na += x;
    for (double x : b) nb += x;
    if (na == 0 || nb == 0) {
        r.skipped = true;
        r.note = "empty sample";
        return r;
    }
    const double n = na + nb;
    auto expected = [&](std::size_t c) {
        const double col = a[c] + b[c];
        return std::min(na * col / n, nb * col / n);
    };
    while (a.size() > 1) {
        std::size_t worst = 0;
        double worst_e = expected(0);
        for (std::size_t c = 1; c < a.size(); ++c)
            if (expected(c) < worst_e) {
                worst_e = expected(c);
                worst = c;
            }
        if (worst_e >= 5.0) break;
        // merge the offending cell into the next-smallest one
        std::size_t other = worst == 0 ? 1 : 0;
        double other_e = expected(other);
        for (std::size_t c = 0; c < a.size(); ++c)
            if (c != worst && expected(c) < other_e) {
                other_e = expected(c);
                other = c;
            }
        a[other] += a[worst];
        b[other] += b[worst];
        a.erase(a.begin() + static_cast<std::ptrdiff_t>(worst));
        b.erase(b.begin() + static_cast<std::ptrdiff_t>(worst));
    }
    if (a.size() < 2) {
        r.skipped = true;
        r.note = "insufficient support after merging";
        return r;
    }
    double stat = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double col = a[c] + b[c];
        const double ea = na * col / n, eb = nb * col / n;
        stat += (a[c] - ea) * (a[c] - ea) / ea + (b[c] - eb) * (b[c] - eb) / eb;
    }
    r.statistic = stat;
    r.p_value = chi2_sf(stat, static_cast<double>(a.size() - 1));
    return r;
}

inline PairTest ks_two_sample(std::vector<double> a, std::vector<double> b) {
    PairTest r;
    if (a.empty() || b.empty()) {
        r.skipped = true;
        r.note = "empty sample";
        return r;
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        const double x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= x) ++ia;
        while (ib < b.size() && b[ib] <= x) ++ib;
        d = std::max(d, std::abs(static_cast<double>(ia) / static_cast<double>(a.size()) -
                                 static_cast<double>(ib) / static_cast<double>(b.size())));
    }
    const double ne = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                      static_cast<double>(a.size() + b.size());
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    r.statistic = d;
    r.p_value = kolmogorov_sf(lambda);
    return r;
}

}  // namespace detail

inline GofReport identically_distributed(const Tensor3& t, double alpha = 0.05) {
    if (t.n_vars() < 2) throw InvalidArgument("identically_distributed requires >= 2 variables");
    GofReport rep;
    rep.alpha = alpha;

    // pooled distribution per variable
    std::vector<std::vector<double>> ord_counts(t.n_vars());
    std::vector<std::vector<double>> real_values(t.n_vars());
    for (std::size_t j = 0; j < t.n_vars(); ++j) {
        if (t.domain(j).kind == DomainKind::Ordinal)
            ord_counts[j].assign(t.domain(j).cardinality(), 0.0);
        for (std::size_t i = 0; i < t.n_obs(); ++i)
            for (std::size_t k = 0; k < t.n_ctx(); ++k) {
                if (t.missing(i, j, k)) continue;
                if (t.domain(j).kind == DomainKind::Ordinal)
                    ord_counts[j][static_cast<std::size_t>(t.category(i, j, k))] += 1.0;
                else
                    real_values[j].push_back(t.value(i, j, k));
            }
    }

    const std::size_t n_pairs = t.n_vars() * (t.n_vars() - 1) / 2;
    const double bonferroni = alpha / static_cast<double>(n_pairs);
    for (std::size_t a = 0; a < t.n_vars(); ++a)
        for (std::size_t b = a + 1; b < t.n_vars(); ++b) {
            PairTest pt;
            const bool oa = t.domain(a).kind == DomainKind::Ordinal;
            const bool ob = t.domain(b).kind == DomainKind::Ordinal;
            if (oa != ob) {
                pt.p_value = 0.0;
                pt.rejected = true;
                pt.note = "mixed domain kinds";
            } else if (oa) {
                // align category counts by label over the union of both domains
                std::vector<std::string> labels = t.domain(a).categories;
                for (const auto& lbl : t.domain(b).categories)
                    if (std::find(labels.begin(), labels.end(), lbl) == labels.end())
                        labels.push_back(lbl);
                std::vector<double> ca(labels.size(), 0.0), cb(labels.size(), 0.0);
                for (std::size_t c = 0; c < labels.size(); ++c) {
                    if (auto ix = t.domain(a).category_index(labels[c]))
                        ca[c] = ord_counts[a][static_cast<std::size_t>(*ix)];
                    if (auto ix = t.domain(b).category_index(labels[c]))
                        cb[c] = ord_counts[b][static_cast<std::size_t>(*ix)];
                }
                pt = detail::chi2_two_sample(std::move(ca), std::move(cb));
                if (!pt.skipped) pt.rejected = pt.p_value < bonferroni;
            } else {
                pt = detail::ks_two_sample(real_values[a], real_values[b]);
                if (!pt.skipped) pt.rejected = pt.p_value < bonferroni;
            }
            pt.var_a = a;
            pt.var_b = b;
            if (pt.rejected) rep.identically_distributed = false;
            rep.pairs.push_back(std::move(pt));
        }
    return rep;
}

}  // namespace tristat
