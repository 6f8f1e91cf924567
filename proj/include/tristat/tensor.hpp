#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tristat/errors.hpp"

namespace tristat {

enum class DomainKind { Ordinal, Real };

// Per-variable domain descriptor. Ordinal domains carry an ordered category
// list; discretization additionally records the bin edges it used.
struct VariableDomain {
    DomainKind kind = DomainKind::Real;
    std::vector<std::string> categories;  // ordinal only, order is the category order
    std::vector<double> bin_edges;        // set by discretize, |edges| = cardinality + 1
    bool degenerate = false;              // constant variable collapsed to one bin

    static VariableDomain real() { return {}; }

    static VariableDomain ordinal(std::vector<std::string> cats) {
        VariableDomain d;
        d.kind = DomainKind::Ordinal;
        d.categories = std::move(cats);
        for (std::size_t a = 0; a < d.categories.size(); ++a)
            for (std::size_t b = a + 1; b < d.categories.size(); ++b)
                if (d.categories[a] == d.categories[b])
                    throw InvalidArgument("ordinal domain has duplicate category '" + d.categories[a] + "'");
        return d;
    }

    // 0..L-1 labelled by their index
    static VariableDomain ordinal_indexed(std::size_t cardinality) {
        std::vector<std::string> cats(cardinality);
        for (std::size_t c = 0; c < cardinality; ++c) cats[c] = std::to_string(c);
        return ordinal(std::move(cats));
    }

    std::size_t cardinality() const { return categories.size(); }

    std::optional<int> category_index(const std::string& label) const {
        for (std::size_t c = 0; c < categories.size(); ++c)
            if (categories[c] == label) return static_cast<int>(c);
        return std::nullopt;
    }

    bool operator==(const VariableDomain& o) const {
        return kind == o.kind && categories == o.categories && degenerate == o.degenerate &&
               bin_edges == o.bin_edges;
    }
};

// ============================================================================
// Tensor3 — dense three-way dataset (observations x variables x contexts).
// Immutable once built; construction happens through the mutating setters,
// after which the object is shared read-only. Missing cells are NaN.
// Ordinal cells store the category index.
// ============================================================================
class Tensor3 {
public:
    Tensor3(std::size_t n_obs, std::size_t n_vars, std::size_t n_ctx,
            std::vector<VariableDomain> domains, bool ctx_is_temporal = false)
        : n_obs_(n_obs), n_vars_(n_vars), n_ctx_(n_ctx),
          temporal_(ctx_is_temporal), domains_(std::move(domains)),
          cells_(n_obs * n_vars * n_ctx, std::numeric_limits<double>::quiet_NaN()) {
        if (n_obs_ < 1 || n_vars_ < 1 || n_ctx_ < 1)
            throw InvalidArgument("tensor axes must all be >= 1");
        if (domains_.size() != n_vars_)
            throw InvalidArgument("one domain descriptor required per variable");
        obs_labels_.resize(n_obs_);
        var_labels_.resize(n_vars_);
        ctx_labels_.resize(n_ctx_);
        for (std::size_t i = 0; i < n_obs_; ++i) obs_labels_[i] = "o" + std::to_string(i);
        for (std::size_t j = 0; j < n_vars_; ++j) var_labels_[j] = "v" + std::to_string(j);
        for (std::size_t k = 0; k < n_ctx_; ++k) ctx_labels_[k] = "t" + std::to_string(k);
    }

    std::size_t n_obs() const { return n_obs_; }
    std::size_t n_vars() const { return n_vars_; }
    std::size_t n_ctx() const { return n_ctx_; }
    bool ctx_is_temporal() const { return temporal_; }

    const VariableDomain& domain(std::size_t j) const { return domains_[j]; }
    const std::vector<VariableDomain>& domains() const { return domains_; }

    const std::vector<std::string>& obs_labels() const { return obs_labels_; }
    const std::vector<std::string>& var_labels() const { return var_labels_; }
    const std::vector<std::string>& ctx_labels() const { return ctx_labels_; }

    void set_labels(std::vector<std::string> obs, std::vector<std::string> vars,
                    std::vector<std::string> ctxs) {
        if (obs.size() != n_obs_ || vars.size() != n_vars_ || ctxs.size() != n_ctx_)
            throw InvalidArgument("label count does not match axis size");
        obs_labels_ = std::move(obs);
        var_labels_ = std::move(vars);
        ctx_labels_ = std::move(ctxs);
    }

    double value(std::size_t i, std::size_t j, std::size_t k) const {
        return cells_[index(i, j, k)];
    }

    bool missing(std::size_t i, std::size_t j, std::size_t k) const {
        return std::isnan(cells_[index(i, j, k)]);
    }

    // category index of an ordinal cell; -1 when missing
    int category(std::size_t i, std::size_t j, std::size_t k) const {
        const double v = cells_[index(i, j, k)];
        return std::isnan(v) ? -1 : static_cast<int>(v);
    }

    void set_real(std::size_t i, std::size_t j, std::size_t k, double v) {
        if (domains_[j].kind != DomainKind::Real)
            throw DomainMismatch("variable '" + var_labels_[j] + "' is not real-valued");
        if (std::isnan(v)) throw InvalidArgument("use set_missing for missing cells");
        cells_[index(i, j, k)] = v;
    }

    void set_category(std::size_t i, std::size_t j, std::size_t k, int c) {
        const auto& d = domains_[j];
        if (d.kind != DomainKind::Ordinal)
            throw DomainMismatch("variable '" + var_labels_[j] + "' is not ordinal");
        if (c < 0 || static_cast<std::size_t>(c) >= d.cardinality())
            throw DomainMismatch("category index " + std::to_string(c) + " outside domain of '" +
                                 var_labels_[j] + "'");
        cells_[index(i, j, k)] = static_cast<double>(c);
    }

    void set_missing(std::size_t i, std::size_t j, std::size_t k) {
        cells_[index(i, j, k)] = std::numeric_limits<double>::quiet_NaN();
    }

    std::size_t missing_count() const {
        std::size_t n = 0;
        for (double v : cells_) n += std::isnan(v);
        return n;
    }

    bool operator==(const Tensor3& o) const {
        if (n_obs_ != o.n_obs_ || n_vars_ != o.n_vars_ || n_ctx_ != o.n_ctx_) return false;
        if (temporal_ != o.temporal_ || domains_ != o.domains_) return false;
        if (obs_labels_ != o.obs_labels_ || var_labels_ != o.var_labels_ ||
            ctx_labels_ != o.ctx_labels_) return false;
        for (std::size_t n = 0; n < cells_.size(); ++n) {
            const bool ma = std::isnan(cells_[n]), mb = std::isnan(o.cells_[n]);
            if (ma != mb) return false;
            if (!ma && cells_[n] != o.cells_[n]) return false;
        }
        return true;
    }

private:
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
        return (i * n_vars_ + j) * n_ctx_ + k;
    }

    std::size_t n_obs_, n_vars_, n_ctx_;
    bool temporal_;
    std::vector<std::string> obs_labels_, var_labels_, ctx_labels_;
    std::vector<VariableDomain> domains_;
    std::vector<double> cells_;
};

// cell-exact for ordinal, relative tolerance for real values
inline bool approx_equal(const Tensor3& a, const Tensor3& b, double rel = 1e-12) {
    if (a.n_obs() != b.n_obs() || a.n_vars() != b.n_vars() || a.n_ctx() != b.n_ctx()) return false;
    for (std::size_t i = 0; i < a.n_obs(); ++i)
        for (std::size_t j = 0; j < a.n_vars(); ++j)
            for (std::size_t k = 0; k < a.n_ctx(); ++k) {
                if (a.missing(i, j, k) != b.missing(i, j, k)) return false;
                if (a.missing(i, j, k)) continue;
                const double x = a.value(i, j, k), y = b.value(i, j, k);
                if (a.domain(j).kind == DomainKind::Ordinal) {
                    if (x != y) return false;
                } else if (std::abs(x - y) > rel * std::max({1.0, std::abs(x), std::abs(y)})) {
                    return false;
                }
            }
    return true;
}

// ============================================================================
// Tricluster — subspace (I, J, K) of a tensor
// ============================================================================
struct Tricluster {
    std::vector<std::size_t> obs_idx;  // I, sorted, unique
    std::vector<std::size_t> var_idx;  // J
    std::vector<std::size_t> ctx_idx;  // K
    bool contiguous_ctx = false;

    void validate(const Tensor3& t) const {
        auto check = [](const std::vector<std::size_t>& v, std::size_t bound, const char* name) {
            if (v.empty()) throw InvalidArgument(std::string("tricluster has empty ") + name + " set");
            for (std::size_t n = 0; n < v.size(); ++n) {
                if (v[n] >= bound)
                    throw InvalidArgument(std::string("tricluster ") + name + " index out of bounds");
                if (n > 0 && v[n] <= v[n - 1])
                    throw InvalidArgument(std::string("tricluster ") + name +
                                          " indices must be sorted and unique");
            }
        };
        check(obs_idx, t.n_obs(), "observation");
        check(var_idx, t.n_vars(), "variable");
        check(ctx_idx, t.n_ctx(), "context");
        if (contiguous_ctx)
            for (std::size_t n = 1; n < ctx_idx.size(); ++n)
                if (ctx_idx[n] != ctx_idx[n - 1] + 1)
                    throw InvalidArgument("contiguous tricluster has a gap in its context run");
    }

    bool operator==(const Tricluster& o) const {
        return obs_idx == o.obs_idx && var_idx == o.var_idx && ctx_idx == o.ctx_idx &&
               contiguous_ctx == o.contiguous_ctx;
    }
};

// ============================================================================
// Pattern — one expected category per (variable, context) cell of a tricluster
// ============================================================================
struct Pattern {
    std::vector<std::size_t> var_idx;   // J, aligned with rows of cells
    std::vector<std::size_t> ctx_idx;   // K, aligned with columns
    std::vector<int> cells;             // category, row-major [var][ctx]
    std::vector<std::uint8_t> non_constant;  // per cell: block was not constant across I

    int at(std::size_t jpos, std::size_t kpos) const {
        return cells[jpos * ctx_idx.size() + kpos];
    }
    int& at(std::size_t jpos, std::size_t kpos) {
        return cells[jpos * ctx_idx.size() + kpos];
    }
    bool any_non_constant() const {
        return std::any_of(non_constant.begin(), non_constant.end(), [](auto b) { return b != 0; });
    }
};

// Modal value of {a_ijk : i in I} per (j, k) cell; ties break to the lowest
// category. Blocks that are not constant across I are flagged on the pattern.
inline Pattern extract_pattern(const Tensor3& t, const Tricluster& tc) {
    tc.validate(t);
    for (std::size_t j : tc.var_idx)
        if (t.domain(j).kind != DomainKind::Ordinal)
            throw DomainMismatch("pattern extraction requires discretized (ordinal) variables; '" +
                                 t.var_labels()[j] + "' is real-valued");
    Pattern p;
    p.var_idx = tc.var_idx;
    p.ctx_idx = tc.ctx_idx;
    p.cells.resize(tc.var_idx.size() * tc.ctx_idx.size());
    p.non_constant.assign(p.cells.size(), 0);

    std::vector<std::size_t> counts;
    for (std::size_t jp = 0; jp < tc.var_idx.size(); ++jp) {
        const std::size_t j = tc.var_idx[jp];
        counts.assign(t.domain(j).cardinality(), 0);
        for (std::size_t kp = 0; kp < tc.ctx_idx.size(); ++kp) {
            const std::size_t k = tc.ctx_idx[kp];
            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t i : tc.obs_idx) {
                const int c = t.category(i, j, k);
                if (c < 0)
                    throw MissingData("tricluster cell (" + t.obs_labels()[i] + "," +
                                      t.var_labels()[j] + "," + t.ctx_labels()[k] + ") is missing");
                ++counts[static_cast<std::size_t>(c)];
            }
            std::size_t best = 0;
            for (std::size_t c = 1; c < counts.size(); ++c)
                if (counts[c] > counts[best]) best = c;  // ties keep the lowest index
            p.at(jp, kp) = static_cast<int>(best);
            if (counts[best] != tc.obs_idx.size()) p.non_constant[jp * tc.ctx_idx.size() + kp] = 1;
        }
    }
    return p;
}

}  // namespace tristat
