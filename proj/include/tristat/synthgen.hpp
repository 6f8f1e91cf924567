#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <unordered_map>
#include <vector>

#include "tristat/rng.hpp"
#include "tristat/tensor.hpp"

namespace tristat {

enum class Background { Uniform, Gaussian };

struct SizeRange {
    std::size_t lo = 1, hi = 1;
};

// Generation spec: ordinal background (uniform categories, or
// Gaussian samples discretized into equal-width bins over mu +- 3 sigma) with
// constant-coherence triclusters planted on top.
struct GenSpec {
    std::size_t n_obs = 1000, n_vars = 50, n_ctx = 50;
    Background background = Background::Uniform;
    double mu = 0.0, sigma = 30.0;
    std::size_t cardinality = 3;
    std::size_t n_planted = 5;
    SizeRange obs_range{50, 500};
    SizeRange var_range{2, 4};
    SizeRange ctx_range{2, 4};
    bool contiguous = true;
    std::uint64_t seed = 0;
    std::size_t max_retries = 64;

    void validate() const {
        if (n_obs < 1 || n_vars < 1 || n_ctx < 1) throw InvalidArgument("axis sizes must be >= 1");
        if (cardinality < 2) throw InvalidArgument("cardinality must be >= 2");
        auto range_ok = [](const SizeRange& r, std::size_t bound) {
            return r.lo >= 1 && r.lo <= r.hi && r.hi <= bound;
        };
        if (!range_ok(obs_range, n_obs) || !range_ok(var_range, n_vars) ||
            !range_ok(ctx_range, n_ctx))
            throw InvalidArgument("planted size ranges must fit the axis sizes");
        if (background == Background::Gaussian && sigma <= 0.0)
            throw InvalidArgument("gaussian background requires sigma > 0");
    }
};

struct PlantedTricluster {
    Tricluster tc;
    Pattern pattern;
};

struct PlantingManifest {
    std::vector<PlantedTricluster> planted;
};

namespace detail {

inline std::size_t range_draw(std::mt19937_64& rng, const SizeRange& r) {
    return r.lo + static_cast<std::size_t>(uniform_below(rng, r.hi - r.lo + 1));
}

}  // namespace detail

// Deterministic per seed: identical GenSpec gives a bit-identical tensor and
// manifest. Plantings may overlap only where their categories agree; a
// conflicting draw is resampled up to max_retries before failing.
inline std::pair<Tensor3, PlantingManifest> generate(const GenSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);

    std::vector<VariableDomain> domains(spec.n_vars,
                                        VariableDomain::ordinal_indexed(spec.cardinality));
    if (spec.background == Background::Gaussian) {
        const double lo = spec.mu - 3.0 * spec.sigma, hi = spec.mu + 3.0 * spec.sigma;
        for (auto& d : domains) {
            d.bin_edges.resize(spec.cardinality + 1);
            for (std::size_t b = 0; b <= spec.cardinality; ++b)
                d.bin_edges[b] =
                    lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(spec.cardinality);
        }
    }
    Tensor3 t(spec.n_obs, spec.n_vars, spec.n_ctx, domains, /*ctx_is_temporal=*/true);

    const std::size_t L = spec.cardinality;
    for (std::size_t i = 0; i < spec.n_obs; ++i)
        for (std::size_t j = 0; j < spec.n_vars; ++j)
            for (std::size_t k = 0; k < spec.n_ctx; ++k) {
                int c;
                if (spec.background == Background::Uniform) {
                    c = static_cast<int>(uniform_below(rng, L));
                } else {
                    const double lo = spec.mu - 3.0 * spec.sigma;
                    const double width = 6.0 * spec.sigma / static_cast<double>(L);
                    double g = gaussian(rng, spec.mu, spec.sigma);
                    g = std::clamp(g, lo, spec.mu + 3.0 * spec.sigma);
                    c = std::min(static_cast<int>(L) - 1,
                                 static_cast<int>((g - lo) / width));
                }
                t.set_category(i, j, k, c);
            }

    PlantingManifest manifest;
    std::unordered_map<std::size_t, int> planted_cells;  // flat index -> category
    auto flat = [&](std::size_t i, std::size_t j, std::size_t k) {
        return (i * spec.n_vars + j) * spec.n_ctx + k;
    };

    for (std::size_t n = 0; n < spec.n_planted; ++n) {
        bool placed = false;
        for (std::size_t attempt = 0; attempt <= spec.max_retries && !placed; ++attempt) {
            Tricluster tc;
            tc.contiguous_ctx = spec.contiguous;
            const std::size_t ni = detail::range_draw(rng, spec.obs_range);
            const std::size_t nj = detail::range_draw(rng, spec.var_range);
            const std::size_t nk = detail::range_draw(rng, spec.ctx_range);
            tc.obs_idx = sample_indices(rng, spec.n_obs, ni);
            tc.var_idx = sample_indices(rng, spec.n_vars, nj);
            if (spec.contiguous) {
                const std::size_t start =
                    static_cast<std::size_t>(uniform_below(rng, spec.n_ctx - nk + 1));
                tc.ctx_idx.resize(nk);
                for (std::size_t k = 0; k < nk; ++k) tc.ctx_idx[k] = start + k;
            } else {
                tc.ctx_idx = sample_indices(rng, spec.n_ctx, nk);
            }

            Pattern pat;
            pat.var_idx = tc.var_idx;
            pat.ctx_idx = tc.ctx_idx;
            pat.cells.resize(nj * nk);
            pat.non_constant.assign(nj * nk, 0);
            for (auto& c : pat.cells) c = static_cast<int>(uniform_below(rng, L));

            bool conflict = false;
            for (std::size_t jp = 0; jp < nj && !conflict; ++jp)
                for (std::size_t kp = 0; kp < nk && !conflict; ++kp)
                    for (std::size_t i : tc.obs_idx) {
                        const auto it =
                            planted_cells.find(flat(i, tc.var_idx[jp], tc.ctx_idx[kp]));
                        if (it != planted_cells.end() && it->second != pat.at(jp, kp)) {
                            conflict = true;
                            break;
                        }
                    }
            if (conflict) continue;

            for (std::size_t jp = 0; jp < nj; ++jp)
                for (std::size_t kp = 0; kp < nk; ++kp)
                    for (std::size_t i : tc.obs_idx) {
                        t.set_category(i, tc.var_idx[jp], tc.ctx_idx[kp], pat.at(jp, kp));
                        planted_cells[flat(i, tc.var_idx[jp], tc.ctx_idx[kp])] = pat.at(jp, kp);
                    }
            manifest.planted.push_back({std::move(tc), std::move(pat)});
            placed = true;
        }
        if (!placed)
            throw PlantingConflict("could not place tricluster " + std::to_string(n) + " after " +
                                   std::to_string(spec.max_retries + 1) +
                                   " attempts (cell-incompatible overlaps with earlier plantings)");
    }
    return {std::move(t), std::move(manifest)};
}

}  // namespace tristat
