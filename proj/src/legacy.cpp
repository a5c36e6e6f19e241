#include "acme/legacy.hpp"

#include <algorithm>
#include <cmath>

namespace acme {

namespace {
void require_count(double C) {
  if (!(C >= 0.0)) throw std::domain_error("legacy estimator: C must be >= 0");
}
}  // namespace

double pollock(double C, const ConstantCaseParams& p) {
  p.validate();
  require_count(C);
  return p.I * C / (p.s * p.t_hat * -std::expm1(-p.I / p.t_hat));
}

double huso(double C, const ConstantCaseParams& p) {
  p.validate();
  require_count(C);
  return p.I * C / (p.s * p.t_hat * std::min(0.99, -std::expm1(-p.I / p.t_hat)));
}

double shoemaker(double C, const ConstantCaseParams& p) {
  p.validate();
  require_count(C);
  const double g = std::expm1(p.I / p.t_hat);  // e^{I/t_hat} - 1
  return (p.I * C / (p.s * p.t_hat)) * (g + p.s) / g;
}

double erickson(double C, const ConstantCaseParams& p) {
  p.validate();
  require_count(C);
  return p.I * C / (p.s * p.t_hat);
}

LegacyEstimates compare_all(double C, const ConstantCaseParams& p) {
  LegacyEstimates est{erickson(C, p), shoemaker(C, p), pollock(C, p), huso(C, p)};
  if (C > 0.0) {
    // Strict ordering holds for 0 < s < 1; at s == 1 the inner pair ties.
    const double slack = (p.s < 1.0) ? 0.0 : 1e-12 * est.pollock;
    if (!(est.erickson < est.shoemaker + slack && est.shoemaker < est.pollock + slack &&
          est.pollock <= est.huso))
      throw std::logic_error("compare_all: estimator ordering violated");
    const double cap = std::min(std::log(100.0), p.I / p.t_hat);
    const double lhs = -std::expm1(-cap) * est.huso;
    if (std::fabs(lhs - est.erickson) > 1e-9 * est.erickson)
      throw std::logic_error("compare_all: huso/erickson identity violated");
  }
  return est;
}

}  // namespace acme
