#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "tristat/errors.hpp"

namespace tristat {

enum class Tier { BhSignificant, Nominal, NotSignificant };

inline const char* tier_name(Tier t) {
    switch (t) {
        case Tier::BhSignificant: return "bh_significant";
        case Tier::Nominal: return "nominal";
        default: return "not_significant";
    }
}

struct AdjustedEntry {
    double p_input = 1.0;
    double q_value = 1.0;
    bool rejected = false;
    Tier tier = Tier::NotSignificant;
};

struct AdjustedReport {
    std::vector<AdjustedEntry> entries;  // input order
    double q_level = 0.05;
    double bh_threshold = 0.0;  // largest p(i) <= (i/m) q; 0 when nothing rejected
    std::size_t n_rejected = 0;
};

// Benjamini-Hochberg step-up over a batch of p-values. The rejection set is a
// prefix of the ascending order; q-values are the usual monotone adjusted
// p-values min_{j>=i} (m/j) p(j), capped at 1. The nominal tier marks
// non-rejected p-values below 0.05.
inline AdjustedReport benjamini_hochberg(const std::vector<double>& pvalues, double q) {
    if (q <= 0.0 || q >= 1.0) throw InvalidArgument("FDR level must be in (0,1)");
    AdjustedReport rep;
    rep.q_level = q;
    const std::size_t m = pvalues.size();
    if (m == 0) return rep;
    for (double p : pvalues)
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p-values must lie in [0,1]");

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });

    std::size_t cut = 0;  // number of rejections
    for (std::size_t r = m; r >= 1; --r) {
        if (pvalues[order[r - 1]] <= static_cast<double>(r) / static_cast<double>(m) * q) {
            cut = r;
            break;
        }
    }
    rep.n_rejected = cut;
    rep.bh_threshold = cut > 0 ? pvalues[order[cut - 1]] : 0.0;

    rep.entries.resize(m);
    double running = 1.0;
    for (std::size_t r = m; r >= 1; --r) {
        const std::size_t ix = order[r - 1];
        running = std::min(running, pvalues[ix] * static_cast<double>(m) / static_cast<double>(r));
        AdjustedEntry& e = rep.entries[ix];
        e.p_input = pvalues[ix];
        e.q_value = std::min(1.0, running);
        e.rejected = r <= cut;
        e.tier = e.rejected            ? Tier::BhSignificant
                 : pvalues[ix] < 0.05 ? Tier::Nominal
                                       : Tier::NotSignificant;
    }
    return rep;
}

}  // namespace tristat
