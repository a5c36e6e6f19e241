#include "acme/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace acme {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Lower incomplete gamma by power series, valid (and fast) for x < shape+1.
double igamma_series(double shape, double x) {
  double ap = shape;
  double del = 1.0 / shape;
  double sum = del;
  for (int n = 0; n < 10000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
  }
  double lg = shape * std::log(x) - x - std::lgamma(shape);
  return sum * std::exp(lg);
}

// Upper incomplete gamma Q(shape, x) by modified Lentz continued fraction,
// valid for x >= shape+1.
double igamma_cf(double shape, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - shape;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 10000; ++i) {
    double an = -i * (i - shape);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  double lg = shape * std::log(x) - x - std::lgamma(shape);
  return std::exp(lg) * h;
}

double gamma_density_unit_rate(double shape, double x) {
  if (x <= 0.0) return 0.0;
  return std::exp((shape - 1.0) * std::log(x) - x - std::lgamma(shape));
}

}  // namespace

double log_gamma_fn(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma_fn: x must be > 0");
  return std::lgamma(x);
}

double reg_gamma_lower(double shape, double x) {
  if (!(shape > 0.0)) throw std::domain_error("reg_gamma_lower: shape must be > 0");
  if (!(x >= 0.0)) throw std::domain_error("reg_gamma_lower: x must be >= 0");
  if (x == 0.0) return 0.0;
  double p = (x < shape + 1.0) ? igamma_series(shape, x) : 1.0 - igamma_cf(shape, x);
  return std::clamp(p, 0.0, 1.0);
}

double gamma_quantile(double p, const GammaParams& g) {
  g.validate();
  if (!(g.rate > 0.0)) throw std::domain_error("gamma_quantile: rate must be > 0");
  if (!(p >= 0.0 && p < 1.0)) throw std::domain_error("gamma_quantile: p must be in [0, 1)");
  if (p == 0.0) return 0.0;

  // Work with the unit-rate variable y, then rescale.
  double lo = 0.0;
  double hi = std::max(g.shape, 1.0);
  while (reg_gamma_lower(g.shape, hi) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("gamma_quantile: bracket expansion failed");
  }

  double y = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double f = reg_gamma_lower(g.shape, y) - p;
    if (std::fabs(f) <= 1e-12) break;
    if (f > 0.0) hi = y; else lo = y;
    double dens = gamma_density_unit_rate(g.shape, y);
    double step = (dens > 0.0) ? y - f / dens : 0.0;
    // Newton step if it stays inside the bracket, bisection otherwise.
    y = (dens > 0.0 && step > lo && step < hi) ? step : 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * std::max(1.0, hi)) break;
  }
  return y / g.rate;
}

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double binomial_cdf(long long x, long long n, double p) {
  if (n < 0 || x < 0 || x > n) throw std::domain_error("binomial_cdf: need 0 <= x <= n");
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binomial_cdf: p must be in [0, 1]");
  if (x == n) return 1.0;
  if (p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;  // x < n here

  const double lp = std::log(p);
  const double l1p = std::log1p(-p);
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  double sum = 0.0;
  for (long long j = 0; j <= x; ++j) {
    double lterm = lgn - std::lgamma(static_cast<double>(j) + 1.0) -
                   std::lgamma(static_cast<double>(n - j) + 1.0) +
                   static_cast<double>(j) * lp + static_cast<double>(n - j) * l1p;
    sum += std::exp(lterm);
  }
  return std::min(sum, 1.0);
}

long long neg_binomial_quantile(double p, const NegBinomialParams& nb, long long term_cap) {
  nb.validate();
  if (!(p >= 0.0 && p < 1.0))
    throw std::domain_error("neg_binomial_quantile: p must be in [0, 1)");
  if (nb.prob == 1.0) return 0;  // all mass at 0
  if (p == 0.0) return 0;

  const double l1p = std::log1p(-nb.prob);
  double lpmf = nb.size * std::log(nb.prob);  // log pmf(0)
  double cdf = std::exp(lpmf);
  long long j = 0;
  while (cdf < p) {
    if (j >= term_cap)
      throw std::runtime_error("neg_binomial_quantile: term cap exceeded before reaching p");
    lpmf += std::log(nb.size + static_cast<double>(j)) -
            std::log(static_cast<double>(j) + 1.0) + l1p;
    cdf += std::exp(lpmf);
    ++j;
  }
  return j;
}

double hyp2f1_terminating(long long C, long long M, double c3, double x) {
  if (C < 0 || M < 0) throw std::domain_error("hyp2f1_terminating: C, M must be >= 0");
  const long long K = std::min(C, M);
  double term = 1.0;
  double sum = 1.0;
  for (long long k = 0; k < K; ++k) {
    double denom = c3 + static_cast<double>(k);
    if (denom == 0.0)
      throw std::domain_error("hyp2f1_terminating: Pochhammer factor (c3)_k hit zero");
    term *= (static_cast<double>(-C + k) * static_cast<double>(-M + k) * x) /
            (denom * static_cast<double>(k + 1));
    sum += term;
    if (!std::isfinite(sum)) {
      // Fall back to the log-magnitude accumulation.
      detail::SignedLog sl = detail::hyp2f1_terminating_log(C, M, c3, x);
      if (sl.sign == 0) return 0.0;
      return sl.sign * std::exp(sl.log_abs);
    }
  }
  return sum;
}

namespace detail {

SignedLog hyp2f1_terminating_log(long long C, long long M, double c3, double x) {
  if (C < 0 || M < 0) throw std::domain_error("hyp2f1_terminating_log: C, M must be >= 0");
  const long long K = std::min(C, M);

  std::vector<double> logs(static_cast<size_t>(K) + 1);
  std::vector<int> signs(static_cast<size_t>(K) + 1);
  logs[0] = 0.0;
  signs[0] = 1;
  double lt = 0.0;
  int st = 1;
  double max_log = 0.0;
  for (long long k = 0; k < K; ++k) {
    double denom = c3 + static_cast<double>(k);
    if (denom == 0.0)
      throw std::domain_error("hyp2f1_terminating_log: Pochhammer factor (c3)_k hit zero");
    double a = static_cast<double>(-C + k);
    double b = static_cast<double>(-M + k);
    double num = a * b * x;
    if (num == 0.0) {  // x == 0: the series is the single leading term
      return {0.0, 1};
    }
    lt += std::log(std::fabs(num)) - std::log(std::fabs(denom)) -
          std::log(static_cast<double>(k + 1));
    int snum = (num > 0) ? 1 : -1;
    int sden = (denom > 0) ? 1 : -1;
    st *= snum * sden;
    logs[static_cast<size_t>(k) + 1] = lt;
    signs[static_cast<size_t>(k) + 1] = st;
    max_log = std::max(max_log, lt);
  }

  double acc = 0.0;
  for (size_t i = 0; i < logs.size(); ++i)
    acc += signs[i] * std::exp(logs[i] - max_log);
  if (acc == 0.0) return {-inf, 0};
  return {max_log + std::log(std::fabs(acc)), acc > 0 ? 1 : -1};
}

void nb_log_pmf_table(const NegBinomialParams& nb, long long n, double* out) {
  nb.validate();
  const double l1p = (nb.prob < 1.0) ? std::log1p(-nb.prob) : -inf;
  out[0] = nb.size * std::log(nb.prob);
  for (long long j = 0; j < n; ++j)
    out[j + 1] = out[j] + std::log(nb.size + static_cast<double>(j)) -
                 std::log(static_cast<double>(j) + 1.0) + l1p;
}

}  // namespace detail

}  // namespace acme
