#include "acme/reduction.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "acme/stats.hpp"

namespace acme {

namespace detail {

double erfcx(double w) {
  // exp(w^2) overflows past w ~ 26.6; switch to the asymptotic series there.
  if (w < 25.0) return std::exp(w * w) * std::erfc(w);
  const double inv2w2 = 1.0 / (2.0 * w * w);
  double series = 1.0 + inv2w2 * (-1.0 + inv2w2 * (3.0 + inv2w2 * (-15.0 + inv2w2 * 105.0)));
  return series / (w * std::sqrt(std::numbers::pi));
}

}  // namespace detail

double survival(const RemovalModel& rm, double t) {
  rm.validate();
  if (!(t >= 0.0)) throw std::domain_error("survival: t must be >= 0");
  return std::exp(-std::pow(rm.rho * t, rm.alpha));
}

double mean_persistence(const RemovalModel& rm) {
  rm.validate();
  return std::exp(log_gamma_fn(1.0 + 1.0 / rm.alpha)) / rm.rho;
}

double proficiency(const DiscoveryModel& dm, double t) {
  dm.validate();
  if (!(t >= 0.0)) throw std::domain_error("proficiency: t must be >= 0");
  return std::exp(-dm.a - dm.b * t);
}

std::vector<std::pair<int, int>> enumerate_qstar_indices(int k, int k_cap) {
  if (k < 0) throw std::domain_error("enumerate_qstar_indices: k must be >= 0");
  if (k > k_cap)
    throw std::length_error("enumerate_qstar_indices: k above configured cap");
  std::vector<std::pair<int, int>> level = {{1, 0}};
  for (int depth = 0; depth < k; ++depth) {
    std::vector<std::pair<int, int>> next;
    next.reserve(level.size() * 2);
    for (auto [m, n] : level) {
      next.emplace_back(m, n + 1);
      next.emplace_back(m + 1, n + depth + 1);
    }
    level = std::move(next);
  }
  return level;
}

namespace {

// Integrate g over the unit panel x in [0, 1].  When singular_origin is set
// (the k = 0 panel with Weibull shape < 1, where the integrand has unbounded
// derivatives at x = 0) the exact reparametrization x = v^q smooths the
// endpoint so the Simpson ladder converges within its panel cap.
template <typename G>
double unit_panel_integral(G&& g, bool singular_origin, double alpha) {
  if (!singular_origin)
    return detail::simpson_doubling(g, 0.0, 1.0);
  const double q = std::ceil(std::max(3.0, 3.0 / alpha));
  auto smoothed = [&](double v) {
    const double x = std::pow(v, q);
    return g(x) * q * std::pow(v, q - 1.0);
  };
  return detail::simpson_doubling(smoothed, 0.0, 1.0);
}

}  // namespace

double q_star_quadrature(const AcmeParams& p, int k, int m, int n) {
  p.validate();
  if (k < 0 || m < 1 || n < 0)
    throw std::domain_error("q_star_quadrature: need k >= 0, m >= 1, n >= 0");
  const double beta_k = std::pow(p.bleed, k);
  if (beta_k == 0.0) return 0.0;

  const double I = p.interval;
  const double a = p.discovery.a;
  const double bI = p.discovery.b * I;
  const RemovalModel rm = p.removal;
  auto integrand = [&](double x) {
    return std::exp(-std::pow(rm.rho * (k + x) * I, rm.alpha) - m * (a + bI * x) - n * bI);
  };
  const double integral =
      unit_panel_integral(integrand, k == 0 && rm.alpha < 1.0, rm.alpha);
  const double sign = (m % 2 == 0) ? -1.0 : 1.0;
  return beta_k * sign * integral;
}

double q_star_closed_alpha1(const AcmeParams& p, int k, int m, int n) {
  p.validate();
  if (p.removal.alpha != 1.0)
    throw std::domain_error("q_star_closed_alpha1: requires alpha == 1");
  if (k < 0 || m < 1 || n < 0)
    throw std::domain_error("q_star_closed_alpha1: need k >= 0, m >= 1, n >= 0");
  const double I = p.interval;
  const double rho = p.removal.rho;
  const double bI = p.discovery.b * I;
  const double lam = rho + m * p.discovery.b;
  const double sign = (m % 2 == 0) ? -1.0 : 1.0;
  const double geo = std::pow(p.bleed * std::exp(-rho * I), k);
  if (geo == 0.0) return 0.0;
  return sign * std::exp(-m * p.discovery.a - n * bI) / (lam * I) *
         (-std::expm1(-lam * I)) * geo;
}

ClosedFormValue q_star_closed_alpha_half(const AcmeParams& p, int k, int m, int n) {
  p.validate();
  if (p.removal.alpha != 0.5)
    throw std::domain_error("q_star_closed_alpha_half: requires alpha == 1/2");
  if (!(p.discovery.b > 0.0))
    throw std::domain_error("q_star_closed_alpha_half: requires b > 0");
  if (k < 0 || m < 1 || n < 0)
    throw std::domain_error("q_star_closed_alpha_half: need k >= 0, m >= 1, n >= 0");

  const double I = p.interval;
  const double rho = p.removal.rho;
  const double b = p.discovery.b;
  const double bI = b * I;
  const double beta_k = std::pow(p.bleed, k);
  if (beta_k == 0.0) return {0.0, false};

  // Substituting u = sqrt(rho (k+x) I) turns the integrand into
  // u exp(-q(u+d)^2 + q d^2) with q = m b / rho, d = 1/(2q).  The Gaussian
  // pieces are folded together as A(u) = exp(-q u^2 - u) and the normal-CDF
  // difference is evaluated through erfcx so no large exponentials appear.
  const double q = m * b / rho;
  const double u0 = std::sqrt(rho * k * I);
  const double u1 = std::sqrt(rho * (k + 1) * I);
  const double sq = std::sqrt(q);
  const double w0 = sq * u0 + 0.5 / sq;
  const double w1 = sq * u1 + 0.5 / sq;
  auto A = [&](double u) { return std::exp(-q * u * u - u); };
  const double a0 = A(u0);
  const double a1 = A(u1);
  const double phi_part =
      0.5 * std::sqrt(std::numbers::pi / q) * (detail::erfcx(w1) * a1 - detail::erfcx(w0) * a0);
  const double sign = (m % 2 == 0) ? -1.0 : 1.0;
  const double value = sign * beta_k *
                       std::exp(-m * p.discovery.a + (m * k - n) * bI) / (m * bI) *
                       (a0 - a1 + phi_part);

  const double quad = q_star_quadrature(p, k, m, n);
  const bool bad = !std::isfinite(value) ||
                   std::fabs(value - quad) > 1e-6 * std::max(std::fabs(quad), 1e-300);
  if (bad) return {quad, true};
  return {value, false};
}

double term_t_star(const AcmeParams& p, int k) {
  p.validate();
  if (k < 0) throw std::domain_error("term_t_star: k must be >= 0");
  const double beta_k = std::pow(p.bleed, k);
  if (beta_k == 0.0) return 0.0;

  const double I = p.interval;
  const double a = p.discovery.a;
  const double bI = p.discovery.b * I;
  const RemovalModel rm = p.removal;
  auto integrand = [&](double u) {  // u = x - k in [0, 1]
    const double x = u + static_cast<double>(k);
    double v = std::exp(-std::pow(rm.rho * x * I, rm.alpha) - a - x * bI);
    for (int j = 1; j <= k; ++j) v *= -std::expm1(-a - (x - j) * bI);
    return v;
  };
  return beta_k * unit_panel_integral(integrand, k == 0 && rm.alpha < 1.0, rm.alpha);
}

double truncation_bound(const AcmeParams& p, int N) {
  p.validate();
  if (N < 1) throw std::domain_error("truncation_bound: N must be >= 1");
  const double beta_n = std::pow(p.bleed, N);
  if (beta_n == 0.0) return 0.0;
  const double I = p.interval;
  const double a = p.discovery.a;
  const double bI = p.discovery.b * I;
  const double surv = survival(p.removal, N * I);
  const double denom = std::max(bI, -std::expm1(std::log(p.bleed) - bI));
  double branch1 = (denom > 0.0) ? std::exp(-a - N * bI) / denom
                                 : std::numeric_limits<double>::infinity();
  double branch2 = std::pow(-std::expm1(-a), N);
  return beta_n * surv * std::min(branch1, branch2);
}

ReductionResult reduction_factor(const AcmeParams& p, double target_rel_error) {
  p.validate();
  if (!(target_rel_error > 0.0 && target_rel_error <= 0.1))
    throw std::domain_error("reduction_factor: target_rel_error must be in (0, 0.1]");

  constexpr int series_cap = 50;
  ReductionResult rr;
  double sum = 0.0;
  for (int k = 0; k < series_cap; ++k) {
    double tk = term_t_star(p, k);
    rr.terms.push_back(tk);
    sum += tk;
    double bound = truncation_bound(p, k + 1);
    rr.truncation_bound = bound;
    if (bound <= target_rel_error * sum) {
      rr.converged = true;
      break;
    }
    rr.converged = false;
  }
  rr.n_terms = static_cast<int>(rr.terms.size());
  rr.r_star = sum;
  rr.t_star_0 = rr.terms.front();
  return rr;
}

ReductionResult reduction_factor_n_terms(const AcmeParams& p, int n_terms,
                                         double target_rel_error) {
  p.validate();
  if (n_terms < 1) throw std::domain_error("reduction_factor_n_terms: n_terms must be >= 1");
  ReductionResult rr;
  double sum = 0.0;
  for (int k = 0; k < n_terms; ++k) {
    rr.terms.push_back(term_t_star(p, k));
    sum += rr.terms.back();
  }
  rr.n_terms = n_terms;
  rr.r_star = sum;
  rr.t_star_0 = rr.terms.front();
  rr.truncation_bound = truncation_bound(p, n_terms);
  rr.converged = rr.truncation_bound <= target_rel_error * sum;
  return rr;
}

double reduction_constant_case(double s, double t_hat, double I, double bleed) {
  if (!(s > 0.0 && s <= 1.0))
    throw std::domain_error("reduction_constant_case: s must be in (0, 1]");
  if (!(t_hat > 0.0 && I > 0.0))
    throw std::domain_error("reduction_constant_case: t_hat and I must be > 0");
  if (!(bleed >= 0.0)) throw std::domain_error("reduction_constant_case: bleed must be >= 0");
  const double e = std::exp(-I / t_hat);
  // Geometric series requires bleed (1-s) < e^{I/t_hat}.
  if (!(bleed * (1.0 - s) * e < 1.0))
    throw std::domain_error("reduction_constant_case: divergent geometric series");
  return s * t_hat * (1.0 - e) / (I * (1.0 - bleed * (1.0 - s) * e));
}

}  // namespace acme
