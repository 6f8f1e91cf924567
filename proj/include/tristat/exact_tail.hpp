#pragma once

// Arbitrary-precision binomial tail oracle, backed by MPFR/GMP. Kept in its
// own header so that only targets linking mpfr/gmp pull it in. This is the
// certification reference for binomial_tail and deliberately shares no code
// with it: the tail is accumulated by exact term recurrence at >= 320-bit
// precision with an unbounded exponent range.

#include <gmp.h>
#include <mpfr.h>

#include <cstddef>
#include <limits>

#include "tristat/errors.hpp"

namespace tristat {

namespace detail {

inline double mpfr_tail_impl(mpfr_t p, std::size_t n, std::size_t k, mpfr_prec_t prec) {
    // one pass over all terms by recurrence, term_{x+1} = term_x (n-x)/(x+1) p/(1-p),
    // accumulating head = P(X < k) and tail = P(X >= k) separately; the head
    // route via log1p keeps full precision when the tail is within eps of 1
    mpfr_t q, term, head, tail, ratio, tmp;
    mpfr_inits2(prec, q, term, head, tail, ratio, tmp, static_cast<mpfr_ptr>(nullptr));
    mpfr_ui_sub(q, 1, p, MPFR_RNDN);
    mpfr_div(ratio, p, q, MPFR_RNDN);

    mpfr_pow_ui(term, q, static_cast<unsigned long>(n), MPFR_RNDN);  // term_0 = (1-p)^n
    mpfr_set_ui(head, 0, MPFR_RNDN);
    mpfr_set_ui(tail, 0, MPFR_RNDN);
    for (std::size_t x = 0; x <= n; ++x) {
        mpfr_add(x < k ? head : tail, x < k ? head : tail, term, MPFR_RNDN);
        if (x == n) break;
        mpfr_mul_ui(term, term, static_cast<unsigned long>(n - x), MPFR_RNDN);
        mpfr_div_ui(term, term, static_cast<unsigned long>(x + 1), MPFR_RNDN);
        mpfr_mul(term, term, ratio, MPFR_RNDN);
    }
    if (mpfr_cmp_d(head, 0.5) < 0) {
        mpfr_neg(head, head, MPFR_RNDN);
        mpfr_log1p(tmp, head, MPFR_RNDN);
    } else {
        mpfr_log(tmp, tail, MPFR_RNDN);
    }
    const double out = mpfr_get_d(tmp, MPFR_RNDN);
    mpfr_clears(q, term, head, tail, ratio, tmp, static_cast<mpfr_ptr>(nullptr));
    return out;
}

}  // namespace detail

// log P(X >= k) for X ~ Bin(n, p), p given as a double
inline double exact_log_binomial_tail(double p, std::size_t n, std::size_t k,
                                      mpfr_prec_t prec = 320) {
    if (k > n) throw InvalidArgument("exact tail requires k <= n");
    if (k == 0) return 0.0;
    if (p >= 1.0) return 0.0;
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    mpfr_t mp;
    mpfr_init2(mp, prec);
    mpfr_set_d(mp, p, MPFR_RNDN);
    const double out = detail::mpfr_tail_impl(mp, n, k, prec);
    mpfr_clear(mp);
    return out;
}

// same, with the event probability given as a natural log (p = e^log_p);
// matches binomial_tail's calling convention bit-for-bit on the input
inline double exact_log_binomial_tail_from_log(double log_p, std::size_t n, std::size_t k,
                                               mpfr_prec_t prec = 320) {
    if (k > n) throw InvalidArgument("exact tail requires k <= n");
    if (k == 0) return 0.0;
    if (log_p >= 0.0) return 0.0;
    if (log_p == -std::numeric_limits<double>::infinity())
        return -std::numeric_limits<double>::infinity();
    mpfr_t mp;
    mpfr_init2(mp, prec);
    mpfr_set_d(mp, log_p, MPFR_RNDN);
    mpfr_exp(mp, mp, MPFR_RNDN);
    const double out = detail::mpfr_tail_impl(mp, n, k, prec);
    mpfr_clear(mp);
    return out;
}

}  // namespace tristat
