#ifndef ACME_STATS_HPP
#define ACME_STATS_HPP

#include <cstdint>
#include <stdexcept>

// Self-contained special functions and distribution primitives.
// Everything here is a pure function of its arguments and safe to call
// from any number of threads.

namespace acme {

struct GammaParams {
  double shape;  // > 0
  double rate;   // >= 0 (rate == 0 only as an improper-prior limit)

  void validate() const {
    if (!(shape > 0.0)) throw std::domain_error("GammaParams: shape must be > 0");
    if (!(rate >= 0.0)) throw std::domain_error("GammaParams: rate must be >= 0");
  }
};

struct NegBinomialParams {
  double size;  // > 0
  double prob;  // in (0, 1]

  void validate() const {
    if (!(size > 0.0)) throw std::domain_error("NegBinomialParams: size must be > 0");
    if (!(prob > 0.0 && prob <= 1.0))
      throw std::domain_error("NegBinomialParams: prob must be in (0, 1]");
  }
};

/// ln Gamma(x) for x > 0.
double log_gamma_fn(double x);

/// Regularized lower incomplete gamma P(shape, x), the CDF of a unit-rate
/// Gamma(shape) variate.  Series for x < shape+1, continued fraction
/// otherwise.
double reg_gamma_lower(double shape, double x);

/// Inverse CDF of Gamma(shape, rate): the x with P(shape, rate*x) = p.
/// Bracketed bisection refined with Newton steps, tolerance 1e-12 in CDF
/// space.  Requires 0 <= p < 1 and rate > 0.
double gamma_quantile(double p, const GammaParams& g);

/// Standard normal CDF.
double normal_cdf(double z);

/// P[Bin(n, p) <= x], accumulated in log space.  Exactly 1 at x == n.
double binomial_cdf(long long x, long long n, double p);

/// Smallest integer q with P[NB(size, prob) <= q] >= p, where
/// pmf(j) = Gamma(size+j)/(Gamma(size) j!) prob^size (1-prob)^j.
long long neg_binomial_quantile(double p, const NegBinomialParams& nb,
                                long long term_cap = 10'000'000);

/// Terminating Gauss hypergeometric sum
///   2F1(-C, -M; c3; x) = sum_{k=0}^{min(C,M)} (-C)_k (-M)_k / ((c3)_k k!) x^k.
/// Throws if some Pochhammer factor (c3)_k is exactly zero before the series
/// terminates.
double hyp2f1_terminating(long long C, long long M, double c3, double x);

namespace detail {

/// Signed log-space value: value = sign * exp(log_abs); sign == 0 means zero.
struct SignedLog {
  double log_abs;
  int sign;
};

/// hyp2f1_terminating with log-magnitude + sign accumulation; survives
/// parameter ranges where individual terms exceed double range.
SignedLog hyp2f1_terminating_log(long long C, long long M, double c3, double x);

/// log pmf of NB(size, prob) at j = 0..n, filled by the stable recurrence
/// lp(j+1) = lp(j) + log(size+j) - log(j+1) + log(1-prob).
void nb_log_pmf_table(const NegBinomialParams& nb, long long n, double* out);

}  // namespace detail

}  // namespace acme

#endif
