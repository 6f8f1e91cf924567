#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tristat/estimation.hpp"
#include "tristat/parallel.hpp"
#include "tristat/special.hpp"
#include "tristat/tensor.hpp"

namespace tristat {

enum class VarDep { MI, MD };
enum class CtxModel { MI, MD, TC };

// Null-model assumptions driving the pattern-probability calculus.
struct AssumptionProfile {
    VarDep var_dep = VarDep::MI;
    CtxModel ctx_model = CtxModel::MI;
    bool identically_distributed = true;  // enables the variable-span correction
    double smoothing = 0.0;               // additive pseudo-count, 0 = raw frequencies

    void validate_for(const Tensor3& t) const {
        if (ctx_model == CtxModel::TC && !t.ctx_is_temporal())
            throw UnsupportedProfile("temporally-contiguous profile requires a temporal tensor");
        if (smoothing < 0.0) throw InvalidArgument("smoothing must be >= 0");
    }
};

struct SignificanceResult {
    double log_p_pattern = 0.0;    // natural log of p_phi, raw (may exceed 0)
    double p_pattern_clamped = 1.0;
    double log_pvalue_raw = 0.0;   // binomial tail, log domain
    double log_pvalue_span = 0.0;  // span-corrected, clamped at log 1
    bool assessable = true;        // false when p_phi >= 1
    bool pattern_non_constant = false;
    std::size_t n_dropped_vars = 0;  // degenerate variables excluded from J
    std::string error;               // non-empty when this tricluster failed

    double pvalue_raw() const { return std::exp(log_pvalue_raw); }
    double pvalue_span() const { return std::exp(log_pvalue_span); }
    bool failed() const { return !error.empty(); }
};

// Estimation tables shared by a batch of evaluations; built once per profile.
struct NullModelTables {
    std::optional<MarginalTable> per_context;
    std::optional<MarginalTable> pooled;
    std::optional<TransitionTable> transitions;
    double smoothing = 0.0;
};

inline NullModelTables build_tables(const Tensor3& t, const AssumptionProfile& profile) {
    profile.validate_for(t);
    NullModelTables tables;
    tables.smoothing = profile.smoothing;
    if (profile.var_dep == VarDep::MI) {
        if (profile.ctx_model == CtxModel::MI)
            tables.per_context = estimate_marginals(t, Scope::PerContext, profile.smoothing);
        else
            tables.pooled = estimate_marginals(t, Scope::Pooled, profile.smoothing);
        if (profile.ctx_model == CtxModel::TC && t.n_ctx() >= 2)
            tables.transitions = estimate_transitions(t, profile.smoothing);
    }
    // MD-variable joints are pattern-specific row scans, nothing to precompute
    return tables;
}

namespace detail {

inline double log_or_neg_inf(double p) { return p > 0.0 ? std::log(p) : neg_inf; }

inline std::vector<CellRequirement> slice_requirements(const Pattern& pat, std::size_t kpos) {
    std::vector<CellRequirement> reqs(pat.var_idx.size());
    for (std::size_t jp = 0; jp < pat.var_idx.size(); ++jp)
        reqs[jp] = {pat.var_idx[jp], pat.at(jp, kpos)};
    return reqs;
}

}  // namespace detail

// log p_phi under the profile's null model (Eqs.-style dispatch). The value is
// raw: it may exceed 0 for the combinatorial context models, and is -inf when
// some factor has empirical probability zero with smoothing zero.
inline double pattern_prob(const Tensor3& t, const Tricluster& tc, const Pattern& pat,
                           const AssumptionProfile& profile, const NullModelTables& tables) {
    profile.validate_for(t);
    if (profile.ctx_model == CtxModel::TC && !tc.contiguous_ctx)
        throw UnsupportedProfile("temporally-contiguous profile requires contiguous context runs");
    const std::size_t n_ctx_tric = pat.ctx_idx.size();
    const double smoothing = profile.smoothing;
    double log_p = 0.0;

    switch (profile.ctx_model) {
        case CtxModel::MI: {
            if (profile.var_dep == VarDep::MI) {
                const auto& m = *tables.per_context;
                for (std::size_t kp = 0; kp < n_ctx_tric; ++kp)
                    for (std::size_t jp = 0; jp < pat.var_idx.size(); ++jp)
                        log_p += detail::log_or_neg_inf(
                            m.prob(pat.var_idx[jp], pat.ctx_idx[kp], pat.at(jp, kp)));
            } else {
                for (std::size_t kp = 0; kp < n_ctx_tric; ++kp) {
                    const auto reqs = detail::slice_requirements(pat, kp);
                    log_p += detail::log_or_neg_inf(
                        joint_prob(t, reqs, Scope::PerContext, pat.ctx_idx[kp], smoothing));
                }
            }
            break;
        }
        case CtxModel::MD: {
            log_p = log_binom(t.n_ctx(), n_ctx_tric);
            if (profile.var_dep == VarDep::MI) {
                const auto& m = *tables.pooled;
                for (std::size_t kp = 0; kp < n_ctx_tric; ++kp)
                    for (std::size_t jp = 0; jp < pat.var_idx.size(); ++jp)
                        log_p += detail::log_or_neg_inf(m.prob(pat.var_idx[jp], 0, pat.at(jp, kp)));
            } else {
                for (std::size_t kp = 0; kp < n_ctx_tric; ++kp) {
                    const auto reqs = detail::slice_requirements(pat, kp);
                    log_p += detail::log_or_neg_inf(
                        joint_prob(t, reqs, Scope::Pooled, std::nullopt, smoothing));
                }
            }
            break;
        }
        case CtxModel::TC: {
            // misalignment factor (|Z| - |K| + 1), then initial slice from the
            // pooled (stationary) estimates, then one transition per step
            log_p = std::log(static_cast<double>(t.n_ctx() - n_ctx_tric + 1));
            if (profile.var_dep == VarDep::MI) {
                const auto& m = *tables.pooled;
                for (std::size_t jp = 0; jp < pat.var_idx.size(); ++jp)
                    log_p += detail::log_or_neg_inf(m.prob(pat.var_idx[jp], 0, pat.at(jp, 0)));
                for (std::size_t kp = 1; kp < n_ctx_tric; ++kp)
                    for (std::size_t jp = 0; jp < pat.var_idx.size(); ++jp) {
                        const auto& tr = *tables.transitions;
                        const double joint =
                            tr.joint(pat.var_idx[jp], pat.at(jp, kp - 1), pat.at(jp, kp));
                        if (joint <= 0.0) {
                            log_p = neg_inf;
                        } else {
                            log_p += std::log(joint) -
                                     std::log(tr.prev_marginal(pat.var_idx[jp], pat.at(jp, kp - 1)));
                        }
                    }
            } else {
                const auto first = detail::slice_requirements(pat, 0);
                log_p += detail::log_or_neg_inf(
                    joint_prob(t, first, Scope::Pooled, std::nullopt, smoothing));
                for (std::size_t kp = 1; kp < n_ctx_tric; ++kp) {
                    const auto prev = detail::slice_requirements(pat, kp - 1);
                    const auto next = detail::slice_requirements(pat, kp);
                    const double joint = joint_pair_prob(t, prev, next, smoothing);
                    if (joint <= 0.0) {
                        log_p = neg_inf;
                    } else {
                        log_p += std::log(joint) - std::log(joint_first_prob(t, prev, smoothing));
                    }
                }
            }
            break;
        }
    }
    return log_p;
}

// ============================================================================
// Binomial tail, log domain: log P(X >= k), X ~ Bin(n, p) with p = e^log_p.
// The smaller of head/tail is summed; the head route keeps full precision
// when the tail is close to 1.
// ============================================================================
inline double binomial_tail(double log_p, std::size_t n, std::size_t k) {
    if (k > n) throw InvalidArgument("binomial_tail requires k <= n");
    if (k == 0) return 0.0;
    if (log_p >= 0.0) return 0.0;  // event probability clamps to 1
    if (log_p == neg_inf) return neg_inf;
    const double log_q = log1mexp(log_p);

    // head = P(X < k), summed in the linear domain (all terms <= 1)
    double head = 0.0;
    for (std::size_t x = 0; x < k; ++x) {
        const double lt = log_binom(n, x) + static_cast<double>(x) * log_p +
                          static_cast<double>(n - x) * log_q;
        head += std::exp(lt);
    }
    if (head < 0.5) return std::log1p(-std::min(head, 1.0));

    // direct log-sum-exp over the tail terms
    std::vector<double> lt(n - k + 1);
    double max_lt = neg_inf;
    for (std::size_t x = k; x <= n; ++x) {
        lt[x - k] = log_binom(n, x) + static_cast<double>(x) * log_p +
                    static_cast<double>(n - x) * log_q;
        max_lt = std::max(max_lt, lt[x - k]);
    }
    double sum = 0.0;
    for (double l : lt) sum += std::exp(l - max_lt);
    return std::min(0.0, max_lt + std::log(sum));
}

// p-value * C(|Y|, |J|), clamped at 1. Identity when |J| = |Y|.
inline double span_correction(double log_pvalue, std::size_t n_vars_total,
                              std::size_t n_vars_tric) {
    if (n_vars_tric > n_vars_total)
        throw InvalidArgument("span correction requires |J| <= |Y|");
    return std::min(0.0, log_pvalue + log_binom(n_vars_total, n_vars_tric));
}

// ============================================================================
// Minimum observations for significance at level alpha. Follows the survival
// convention used by the reference grid: smallest n in [1, |X|-1] such that
// factor * P(X > n) < alpha; not assessable when p >= 1 or no such n exists.
// ============================================================================
struct MinObsResult {
    bool assessable = false;
    std::size_t n_min = 0;
};

inline MinObsResult min_observations(double p_pattern, std::size_t n_obs_total, double alpha,
                                     double correction_factor = 1.0) {
    if (alpha <= 0.0 || alpha >= 1.0) throw InvalidArgument("alpha must be in (0,1)");
    if (correction_factor < 1.0) throw InvalidArgument("correction factor must be >= 1");
    if (p_pattern >= 1.0 || n_obs_total < 2) return {};
    const double log_p = p_pattern > 0.0 ? std::log(p_pattern) : neg_inf;
    const double bound = std::log(alpha) - std::log(correction_factor);
    auto significant = [&](std::size_t n) {
        return binomial_tail(log_p, n_obs_total, n + 1) < bound;  // P(X > n)
    };
    std::size_t lo = 1, hi = n_obs_total - 1;
    if (!significant(hi)) return {};
    while (lo < hi) {  // tail is strictly decreasing in n
        const std::size_t mid = lo + (hi - lo) / 2;
        if (significant(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return {true, lo};
}

// ============================================================================
// Batch assessment: extract each tricluster's pattern, evaluate p_phi, the
// binomial tail, and the span correction. Per-tricluster failures are
// reported in the result, never abort the batch. Evaluations run in parallel
// against the immutable tables; results are index-aligned with the input.
// ============================================================================
inline std::size_t span_variable_count(const Tensor3& t) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < t.n_vars(); ++j)
        n += t.domain(j).kind == DomainKind::Ordinal && t.domain(j).cardinality() >= 2;
    return n;
}

inline std::vector<SignificanceResult> assess(const Tensor3& t,
                                              const std::vector<Tricluster>& triclusters,
                                              const AssumptionProfile& profile) {
    profile.validate_for(t);
    const NullModelTables tables = build_tables(t, profile);
    const std::size_t n_span_vars = span_variable_count(t);
    std::vector<SignificanceResult> results(triclusters.size());

    parallel_for(triclusters.size(), [&](std::size_t ix) {
        SignificanceResult& r = results[ix];
        try {
            Tricluster tc = triclusters[ix];
            // degenerate (cardinality-1) variables carry no information and
            // break the span-correction symmetry; drop them from J
            std::vector<std::size_t> kept;
            for (std::size_t j : tc.var_idx)
                if (!(t.domain(j).kind == DomainKind::Ordinal && t.domain(j).cardinality() < 2))
                    kept.push_back(j);
            r.n_dropped_vars = tc.var_idx.size() - kept.size();
            if (kept.empty()) {
                r.error = "all variables are degenerate";
                return;
            }
            tc.var_idx = std::move(kept);

            const Pattern pat = extract_pattern(t, tc);
            r.pattern_non_constant = pat.any_non_constant();
            r.log_p_pattern = pattern_prob(t, tc, pat, profile, tables);
            if (r.log_p_pattern >= 0.0) {
                r.assessable = false;
                r.p_pattern_clamped = 1.0;
                r.log_pvalue_raw = 0.0;
                r.log_pvalue_span = 0.0;
                return;
            }
            r.p_pattern_clamped = std::exp(r.log_p_pattern);
            r.log_pvalue_raw = binomial_tail(r.log_p_pattern, t.n_obs(), tc.obs_idx.size());
            r.log_pvalue_span =
                profile.identically_distributed
                    ? span_correction(r.log_pvalue_raw, n_span_vars, tc.var_idx.size())
                    : r.log_pvalue_raw;
        } catch (const Error& e) {
            r.error = e.what();
        }
    });
    return results;
}

}  // namespace tristat
