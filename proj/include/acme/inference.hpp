#ifndef ACME_INFERENCE_HPP
#define ACME_INFERENCE_HPP

#include <span>
#include <string>
#include <vector>

#include "acme/reduction.hpp"
#include "acme/stats.hpp"

// Point estimates M* = C/R*, Gamma posteriors for the mean mortality rate m,
// and the full posterior pmf over the per-period mortality count M with
// one-sided / symmetric / HPD / classical interval extractors.

namespace acme {

enum class PriorKind { objective, empirical };

struct PriorSpec {
  double xi = 0.5;
  double lambda = 0.0;  // days
  PriorKind kind = PriorKind::objective;

  static PriorSpec objective() { return {0.5, 0.0, PriorKind::objective}; }
  static PriorSpec empirical(double xi, double lambda) {
    return {xi, lambda, PriorKind::empirical};
  }

  void validate() const {
    if (!(xi > 0.0)) throw std::domain_error("PriorSpec: xi must be > 0");
    if (!(lambda >= 0.0)) throw std::domain_error("PriorSpec: lambda must be >= 0");
    if (kind == PriorKind::empirical && !(lambda > 0.0))
      throw std::domain_error("PriorSpec: empirical prior requires lambda > 0");
  }
};

/// Normalized (checked, not forced) pmf of the per-period mortality M given
/// the observed count C, truncated where the analytic tail bound drops
/// below 1e-10.
struct MortalityPosterior {
  std::vector<double> pmf;  // over M = 0, 1, ..., pmf.size()-1
  long long C = 0;
  double mean = 0.0;
  double tail_mass_bound = 0.0;
};

enum class IntervalKind { one_sided, symmetric, hpd, classical };

struct IntervalEstimate {
  double lo = 0.0;
  double hi = 0.0;
  double gamma = 0.0;
  IntervalKind kind = IntervalKind::one_sided;
  bool contiguous = true;  // meaningful for HPD only
};

struct HpdResult {
  IntervalEstimate hull;
  std::vector<long long> members;  // ascending
  double mass = 0.0;
};

struct EmpiricalBayesFit {
  PriorSpec prior;
  bool converged = false;
  bool fell_back = false;  // degenerate counts; objective prior returned
  double nllh = 0.0;
  double se_xi = 0.0;
  double se_lambda = 0.0;
  std::vector<std::string> warnings;
};

/// M* = C / R*.
double point_estimate(double C, const ReductionResult& rr);

/// Posterior of the mean daily mortality m: Gamma(xi + C, lambda + R* I).
GammaParams mean_mortality_posterior(long long C, const ReductionResult& rr, double I,
                                     const PriorSpec& prior);

/// Quantile interval for the mean mortality; one_sided gives [0, q(gamma)],
/// symmetric gives [q((1-gamma)/2), q((1+gamma)/2)].
IntervalEstimate mean_mortality_interval(long long C, const ReductionResult& rr, double I,
                                         const PriorSpec& prior, double gamma,
                                         IntervalKind kind);

/// Maximum-likelihood fit of the prior hyperparameters from historical
/// counts, using the negative binomial marginal C ~ NB(xi, lambda/(lambda + R* I)).
EmpiricalBayesFit empirical_bayes_fit(std::span<const long long> counts,
                                      const ReductionResult& rr, double I);

/// Posterior pmf of M via the terminating Gauss hypergeometric form; falls
/// back to the no-bleed negative binomial when R* - T*_0 < 1e-12.
MortalityPosterior mortality_posterior_pmf(long long C, const ReductionResult& rr, double I,
                                           const PriorSpec& prior);

/// No-bleed posterior: (M - C) ~ NB(xi + C, (lambda + R* I)/(lambda + I)).
MortalityPosterior no_bleed_posterior(long long C, const ReductionResult& rr, double I,
                                      const PriorSpec& prior);

/// Interval extractor over a mortality pmf (one_sided, symmetric or hpd).
IntervalEstimate mortality_interval(const MortalityPosterior& post, double gamma,
                                    IntervalKind kind);

/// Smallest set of M values whose posterior mass reaches gamma.
HpdResult hpd_set(const MortalityPosterior& post, double gamma);

/// One-sided interval under an improper uniform prior on M (no bleed-through):
/// [C, C + qnbinom(gamma, C + 1, R*)].
IntervalEstimate uniform_prior_interval(long long C, const ReductionResult& rr, double gamma);

/// Classical one-sided binomial confidence interval (no bleed-through):
/// [C, inf{M >= C : P[Bin(M, R*) <= C] <= 1 - gamma}].
IntervalEstimate classical_binomial_interval(long long C, const ReductionResult& rr,
                                             double gamma, long long scan_cap = 10'000'000);

}  // namespace acme

#endif
