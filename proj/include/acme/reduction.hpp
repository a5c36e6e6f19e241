#ifndef ACME_REDUCTION_HPP
#define ACME_REDUCTION_HPP

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

// Survival and proficiency curves, the Q*_{kmn} building blocks, per-period
// terms T*_k, the reduction factor R*, and the series truncation bound.
//
// All functions are pure; parameter records are immutable value types, so
// concurrent evaluation across parameter grids is safe and order-independent.

namespace acme {

/// Weibull removal model: P[persistence > t] = exp(-(rho t)^alpha).
struct RemovalModel {
  double alpha;  // unitless shape, > 0
  double rho;    // rate, 1/day, > 0

  void validate() const {
    if (!(alpha > 0.0)) throw std::domain_error("RemovalModel: alpha must be > 0");
    if (!(rho > 0.0)) throw std::domain_error("RemovalModel: rho must be > 0");
  }
};

/// Searcher proficiency S(t) = exp(-a - b t) for a carcass of age t days.
struct DiscoveryModel {
  double a;  // unitless, >= 0
  double b;  // 1/day, >= 0

  void validate() const {
    if (!(a >= 0.0)) throw std::domain_error("DiscoveryModel: a must be >= 0");
    if (!(b >= 0.0)) throw std::domain_error("DiscoveryModel: b must be >= 0");
  }
};

/// The five model parameters plus the (equal) search interval length.
struct AcmeParams {
  RemovalModel removal;
  DiscoveryModel discovery;
  double bleed;     // in [0, 1]
  double interval;  // days, > 0

  void validate() const {
    removal.validate();
    discovery.validate();
    if (!(bleed >= 0.0 && bleed <= 1.0))
      throw std::domain_error("AcmeParams: bleed must be in [0, 1]");
    if (!(interval > 0.0)) throw std::domain_error("AcmeParams: interval must be > 0");
  }
};

struct ReductionResult {
  double r_star = 0.0;            // sum of terms
  double t_star_0 = 0.0;          // terms[0]
  std::vector<double> terms;      // T*_0 .. T*_{n_terms-1}
  int n_terms = 0;
  double truncation_bound = 0.0;  // bound on the omitted tail at n_terms
  bool converged = true;          // bound/sum reached the requested target
};

/// P[persistence > t].
double survival(const RemovalModel& rm, double t);

/// Mean persistence Gamma(1 + 1/alpha) / rho, in days.
double mean_persistence(const RemovalModel& rm);

/// S(t) = exp(-a - b t).
double proficiency(const DiscoveryModel& dm, double t);

/// The 2^k (m, n) index pairs of the Q*_{kmn} expansion of T*_k, generated
/// from the seed (k,m,n) = (0,1,0) by the level map
/// (k,m,n) -> (k+1,m,n+1) and (k+1,m+1,n+k+1), in level order.
std::vector<std::pair<int, int>> enumerate_qstar_indices(int k, int k_cap = 20);

/// Q*_{kmn} = bleed^k (-1)^{m+1} int_0^1 F(( k+x)I) exp(-m(a+bIx) - n bI) dx
/// by composite Simpson with panel doubling.
double q_star_quadrature(const AcmeParams& p, int k, int m, int n);

/// Closed form of Q*_{kmn} for alpha == 1.
double q_star_closed_alpha1(const AcmeParams& p, int k, int m, int n);

struct ClosedFormValue {
  double value;
  bool used_quadrature_fallback;  // closed form disagreed with quadrature
};

/// Closed form of Q*_{kmn} for alpha == 1/2 (requires b > 0), expressed with
/// the standard normal CDF.  The result is validated against quadrature; on
/// relative disagreement beyond 1e-6 the quadrature value is returned and
/// the fallback flag set.
ClosedFormValue q_star_closed_alpha_half(const AcmeParams& p, int k, int m, int n);

/// T*_k: fraction of carcasses arriving k periods before a search that are
/// discovered at that search.  Direct Simpson evaluation of the product-form
/// integrand; equals the sum of Q*_{kmn} over enumerate_qstar_indices(k).
double term_t_star(const AcmeParams& p, int k);

/// Analytic bound on the tail sum_{k >= N} T*_k.
double truncation_bound(const AcmeParams& p, int N);

/// R* = sum of T*_k, accumulated until truncation_bound(N)/sum falls below
/// target_rel_error or the series cap (50 terms) is reached; in the latter
/// case the result carries converged == false and the honest tail bound.
ReductionResult reduction_factor(const AcmeParams& p, double target_rel_error = 1e-3);

/// R* from exactly the first n_terms terms, the construction used for the
/// published regression values (a five-term approximation).  The omitted
/// tail is reported through truncation_bound; converged is true only when
/// that bound is below target_rel_error times the sum.
ReductionResult reduction_factor_n_terms(const AcmeParams& p, int n_terms,
                                         double target_rel_error = 1e-3);

/// Constant-proficiency, exponential-removal reduction factor
///   s t_hat (e^{I/t_hat} - 1) / ( I (e^{I/t_hat} - bleed (1-s)) ).
/// bleed may exceed 1 here (up to 1/(1-s)), covering the steady-state case.
double reduction_constant_case(double s, double t_hat, double I, double bleed);

namespace detail {

/// Composite Simpson with panel doubling: 32, 64, ... panels until two
/// successive estimates agree to rel_tol, cap 2^20 panels.
template <typename F>
double simpson_doubling(F&& f, double lo, double hi, double rel_tol = 1e-10,
                        int init_panels = 32, long max_panels = 1L << 20) {
  auto composite = [&](long n) {
    const double h = (hi - lo) / static_cast<double>(n);
    double sum = f(lo) + f(hi);
    for (long i = 1; i < n; ++i)
      sum += f(lo + h * static_cast<double>(i)) * ((i & 1) ? 4.0 : 2.0);
    return sum * h / 3.0;
  };

  long n = init_panels;
  double prev = composite(n);
  while (n < max_panels) {
    n *= 2;
    double cur = composite(n);
    if (std::fabs(cur - prev) <= rel_tol * std::fabs(cur)) return cur;
    prev = cur;
  }
  throw std::runtime_error("simpson_doubling: panel cap reached without convergence");
}

/// Scaled complementary error function exp(w^2) erfc(w) for w >= 0.
double erfcx(double w);

}  // namespace detail

}  // namespace acme

#endif
