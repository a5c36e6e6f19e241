#ifndef ACME_FIT_HPP
#define ACME_FIT_HPP

#include <span>
#include <string>
#include <vector>

#include "acme/idt.hpp"
#include "acme/simplex.hpp"

// Maximum-likelihood estimation of the removal parameters (alpha, rho) from
// interval-censored persistence data and of the discovery parameters
// (a, b, bleed) from blinded search histories.  The two likelihoods share no
// parameters and are fit separately.

namespace acme {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> estimates;
  std::vector<double> std_errors;  // NaN where suppressed or undefined
  double nllh = 0.0;
  bool converged = false;
  long n_evals = 0;
  std::vector<std::string> boundary;  // parameters estimated at a boundary
  std::vector<std::string> warnings;

  double estimate(const std::string& name) const;
  double std_error(const std::string& name) const;
};

struct DevianceReport {
  double deviance = 0.0;
  int dof = 2;
  double p_value = 1.0;
};

/// One carcass's in-presence search history: ages (search time minus
/// placement) and outcomes, ordered by time.
struct SearchHistory {
  std::vector<double> age;
  std::vector<char> discovered;
};

/// Negative log likelihood of the interval-censored Weibull removal data:
///   rho^alpha sum_k dtp_k^alpha
///     - sum_k log(1 - exp(rho^alpha (dtp_k^alpha - dta_k^alpha))),
/// censored carcasses contributing only the first term.
double removal_nllh(const IdtDataset& data, double alpha, double rho);

/// Fit (alpha, rho) on the log scale; standard errors from the inverse of a
/// central-difference Hessian, delta-method mapped back to natural scale.
FitResult fit_removal(const IdtDataset& data);

/// Fit rho with the shape pinned (alpha = 1 gives the exponential submodel).
FitResult fit_removal_fixed_shape(const IdtDataset& data, double alpha);

/// Probability of one carcass's observed discovery sequence, summing over
/// the search after which the carcass ceased to be discoverable:
///   (1-bleed) sum_{m* <= m < m**} bleed^{m-m0} prod_{n<=m} p_n^{D_n} (1-p_n)^{1-D_n}
///     + bleed^{m**-m0} prod_{n<=m**} p_n^{D_n} (1-p_n)^{1-D_n},
/// with p_n = exp(-a - b age_n).  An empty history has likelihood 1.
double discovery_likelihood_single(const SearchHistory& history, double a, double b,
                                   double bleed);

/// Sum of -log discovery_likelihood_single over carcasses; +inf when the
/// data contain an event of probability zero (e.g. a late discovery with
/// bleed = 0), which is reported rather than thrown.
double discovery_nllh(const IdtDataset& data, double a, double b, double bleed);

/// Fit (a, b, bleed); a and b on the log scale (b floored at 1e-10), bleed
/// on the logit scale clamped to [1e-9, 1 - 1e-9].  Boundary estimates are
/// flagged and their standard errors suppressed.
FitResult fit_discovery(const IdtDataset& data);

/// Constant-proficiency submodel: b = 0, bleed = 1, only a estimated.
FitResult fit_discovery_constant(const IdtDataset& data);

/// Deviance of the constant-proficiency submodel against the full fit,
/// referred to chi-squared with 2 degrees of freedom.
DevianceReport deviance_vs_constant(const IdtDataset& data);
DevianceReport deviance_vs_constant(const FitResult& full, const FitResult& constant);

namespace detail {

/// In-presence histories (searches with t0 <= T <= tp), one per carcass;
/// carcasses with no usable searches yield empty histories.
std::vector<SearchHistory> build_histories(const IdtDataset& data);

/// log of discovery_likelihood_single, -inf for impossible data.
double discovery_log_likelihood(const SearchHistory& history, double a, double b,
                                double bleed);

}  // namespace detail

}  // namespace acme

#endif
