#ifndef ACME_LEGACY_HPP
#define ACME_LEGACY_HPP

#include <stdexcept>

// The four pre-existing per-period mortality estimators, all special cases
// of the constant-proficiency / exponential-removal reduction factor.

namespace acme {

struct ConstantCaseParams {
  double s;      // constant searcher proficiency, in (0, 1]
  double t_hat;  // mean removal time, days, > 0
  double I;      // search interval, days, > 0

  void validate() const {
    if (!(s > 0.0 && s <= 1.0))
      throw std::domain_error("ConstantCaseParams: s must be in (0, 1]");
    if (!(t_hat > 0.0)) throw std::domain_error("ConstantCaseParams: t_hat must be > 0");
    if (!(I > 0.0)) throw std::domain_error("ConstantCaseParams: I must be > 0");
  }
};

struct LegacyEstimates {
  double erickson;
  double shoemaker;
  double pollock;
  double huso;
};

/// I C / (s t_hat (1 - e^{-I/t_hat})): no carry-over of carcasses between
/// search periods.
double pollock(double C, const ConstantCaseParams& p);

/// Pollock with the (1 - e^{-I/t_hat}) factor clamped at 0.99.
double huso(double C, const ConstantCaseParams& p);

/// (I C / (s t_hat)) (e^{I/t_hat} - 1 + s) / (e^{I/t_hat} - 1): full
/// carry-over ("periodic") estimator.
double shoemaker(double C, const ConstantCaseParams& p);

/// Steady-state estimator I C / (s t_hat).
double erickson(double C, const ConstantCaseParams& p);

/// All four estimates, with the ordering erickson < shoemaker < pollock <=
/// huso and the identity (1 - e^{-min(ln 100, I/t_hat)}) huso == erickson
/// verified internally.
LegacyEstimates compare_all(double C, const ConstantCaseParams& p);

}  // namespace acme

#endif
