#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "tristat/tensor.hpp"

namespace tristat {

enum class BinStrategy { EqualWidth, EqualFrequency };

// Per-variable binning over all (i, k) values pooled across contexts.
// Constant variables collapse to a single degenerate category and are
// excluded from significance downstream. Missing cells stay missing.
inline Tensor3 discretize(const Tensor3& t, std::size_t bins, BinStrategy strategy) {
    if (bins < 2) throw InvalidArgument("discretize requires bins >= 2");
    for (std::size_t j = 0; j < t.n_vars(); ++j)
        if (t.domain(j).kind != DomainKind::Real)
            throw DomainMismatch("discretize expects real-valued variables; '" +
                                 t.var_labels()[j] + "' is ordinal");

    std::vector<VariableDomain> domains(t.n_vars());
    std::vector<std::vector<double>> all_edges(t.n_vars());
    std::vector<double> pooled;
    for (std::size_t j = 0; j < t.n_vars(); ++j) {
        pooled.clear();
        for (std::size_t i = 0; i < t.n_obs(); ++i)
            for (std::size_t k = 0; k < t.n_ctx(); ++k)
                if (!t.missing(i, j, k)) pooled.push_back(t.value(i, j, k));
        if (pooled.empty()) {
            // fully missing variable: give it one degenerate bin
            domains[j] = VariableDomain::ordinal_indexed(1);
            domains[j].degenerate = true;
            continue;
        }
        std::sort(pooled.begin(), pooled.end());
        const double lo = pooled.front(), hi = pooled.back();
        std::vector<double> edges;
        if (lo == hi) {
            edges = {lo, hi};  // DegenerateVariable: single bin
        } else if (strategy == BinStrategy::EqualWidth) {
            edges.resize(bins + 1);
            for (std::size_t b = 0; b <= bins; ++b)
                edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
        } else {
            // quantile edges at sorted positions floor(n*b/bins); duplicate
            // edges from heavy ties are collapsed
            edges.push_back(lo);
            for (std::size_t b = 1; b < bins; ++b) {
                const double e = pooled[pooled.size() * b / bins];
                if (e > edges.back()) edges.push_back(e);
            }
            edges.push_back(hi);
        }
        const std::size_t card = edges.size() - 1;
        domains[j] = VariableDomain::ordinal_indexed(card);
        domains[j].bin_edges = edges;
        domains[j].degenerate = card < 2;
        all_edges[j] = std::move(edges);
    }

    Tensor3 out(t.n_obs(), t.n_vars(), t.n_ctx(), domains, t.ctx_is_temporal());
    out.set_labels(t.obs_labels(), t.var_labels(), t.ctx_labels());
    for (std::size_t j = 0; j < t.n_vars(); ++j) {
        const auto& edges = all_edges[j];
        const std::size_t card = domains[j].cardinality();
        for (std::size_t i = 0; i < t.n_obs(); ++i)
            for (std::size_t k = 0; k < t.n_ctx(); ++k) {
                if (t.missing(i, j, k)) continue;
                int c = 0;
                if (card > 1) {
                    const double v = t.value(i, j, k);
                    // upper edge of the last bin is inclusive
                    auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, v);
                    c = static_cast<int>(it - (edges.begin() + 1));
                }
                out.set_category(i, j, k, c);
            }
    }
    return out;
}

// Piecewise Aggregate Approximation: the context axis is split into
// target_ctx near-equal consecutive segments and each output cell is the mean
// of the non-missing cells in its segment. All-missing segments stay missing.
inline Tensor3 paa(const Tensor3& t, std::size_t target_ctx) {
    if (!t.ctx_is_temporal()) throw UnsupportedProfile("paa requires a temporal context axis");
    if (target_ctx < 1 || target_ctx > t.n_ctx())
        throw InvalidArgument("paa target must be in [1, n_ctx]");
    for (std::size_t j = 0; j < t.n_vars(); ++j)
        if (t.domain(j).kind != DomainKind::Real)
            throw DomainMismatch("paa expects real-valued variables");

    Tensor3 out(t.n_obs(), t.n_vars(), target_ctx, t.domains(), true);
    std::vector<std::string> ctx_labels(target_ctx);
    for (std::size_t s = 0; s < target_ctx; ++s) ctx_labels[s] = "t" + std::to_string(s);
    out.set_labels(t.obs_labels(), t.var_labels(), ctx_labels);

    for (std::size_t s = 0; s < target_ctx; ++s) {
        const std::size_t k0 = t.n_ctx() * s / target_ctx;
        const std::size_t k1 = t.n_ctx() * (s + 1) / target_ctx;
        for (std::size_t i = 0; i < t.n_obs(); ++i)
            for (std::size_t j = 0; j < t.n_vars(); ++j) {
                double sum = 0.0;
                std::size_t n = 0;
                for (std::size_t k = k0; k < k1; ++k)
                    if (!t.missing(i, j, k)) {
                        sum += t.value(i, j, k);
                        ++n;
                    }
                if (n > 0) out.set_real(i, j, s, sum / static_cast<double>(n));
                // EmptySegment: cell stays missing
            }
    }
    return out;
}

}  // namespace tristat
