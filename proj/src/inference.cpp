#include "acme/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "acme/simplex.hpp"

namespace acme {

namespace {

constexpr double tail_target = 1e-10;

struct PosteriorConstants {
  // log pmf(M) = lgamma(xi+C+M) - lgamma(xi+C) - lgamma(M+1)
  //              + base + M * per_m + log 2F1(-C, -M; 1-xi-C-M; -z)
  double base;
  double per_m;
  double z;
  double xi;
  long long C;
};

// Constants of the hypergeometric posterior.  For the objective prior
// (lambda == 0) the interval length cancels algebraically; it is dropped
// up front so the result is bit-identical across I.
PosteriorConstants posterior_constants(long long C, double R, double T0, double I,
                                       const PriorSpec& prior) {
  PosteriorConstants pc{};
  pc.xi = prior.xi;
  pc.C = C;
  const double gap = R - T0;
  const double Cd = static_cast<double>(C);
  if (prior.lambda == 0.0) {
    pc.z = T0 * (gap + 1.0) / ((1.0 - T0) * gap);
    pc.base = prior.xi * std::log(R) + Cd * std::log(gap) -
              std::lgamma(prior.xi + Cd) - (prior.xi + Cd) * std::log1p(gap);
    pc.per_m = std::log1p(-T0) - std::log1p(gap);
  } else {
    const double denom = prior.lambda + (gap + 1.0) * I;
    pc.z = T0 * denom / ((1.0 - T0) * gap * I);
    pc.base = (prior.xi + Cd) * std::log(prior.lambda + R * I) + Cd * std::log(gap) -
              Cd * std::log(R) - std::lgamma(prior.xi + Cd) -
              (prior.xi + Cd) * std::log(denom);
    pc.per_m = std::log1p(-T0) + std::log(I) - std::log(denom);
  }
  return pc;
}

double log_pmf_at(const PosteriorConstants& pc, long long M) {
  const double Md = static_cast<double>(M);
  const double c3 = 1.0 - pc.xi - static_cast<double>(pc.C) - Md;
  detail::SignedLog f = detail::hyp2f1_terminating_log(pc.C, M, c3, -pc.z);
  // All series terms are positive here; the sign is always +1.
  return std::lgamma(pc.xi + static_cast<double>(pc.C) + Md) - std::lgamma(Md + 1.0) +
         pc.base + Md * pc.per_m + f.log_abs;
}

// Tail bound: pmf(M) <= K Gamma(xi+C+M)/M! q^M (1+z)^C, a negative-binomial
// shaped dominating sequence, summed geometrically past m0.
double hyper_tail_bound(const PosteriorConstants& pc, long long m0) {
  const double q = std::exp(pc.per_m);
  const double s = pc.xi + static_cast<double>(pc.C);
  const double Md = static_cast<double>(m0 + 1);
  const double ratio = std::max(q, q * (s + Md) / (Md + 1.0));
  if (!(ratio < 1.0)) return std::numeric_limits<double>::infinity();
  const double log_k1 = std::lgamma(s + Md) - std::lgamma(Md + 1.0) + pc.base +
                        Md * pc.per_m +
                        static_cast<double>(pc.C) * std::log1p(pc.z);
  return std::exp(log_k1) / (1.0 - ratio);
}

void finalize(MortalityPosterior& post) {
  double mean = 0.0;
  for (std::size_t m = 0; m < post.pmf.size(); ++m)
    mean += static_cast<double>(m) * post.pmf[m];
  post.mean = mean;
}

void require_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::domain_error("interval: gamma must be in (0, 1)");
}

}  // namespace

double point_estimate(double C, const ReductionResult& rr) {
  if (!(C >= 0.0)) throw std::domain_error("point_estimate: C must be >= 0");
  if (!(rr.r_star > 0.0)) throw std::domain_error("point_estimate: R* must be > 0");
  return C / rr.r_star;
}

GammaParams mean_mortality_posterior(long long C, const ReductionResult& rr, double I,
                                     const PriorSpec& prior) {
  prior.validate();
  if (C < 0) throw std::domain_error("mean_mortality_posterior: C must be >= 0");
  if (!(I > 0.0)) throw std::domain_error("mean_mortality_posterior: I must be > 0");
  return {prior.xi + static_cast<double>(C), prior.lambda + rr.r_star * I};
}

IntervalEstimate mean_mortality_interval(long long C, const ReductionResult& rr, double I,
                                         const PriorSpec& prior, double gamma,
                                         IntervalKind kind) {
  require_gamma(gamma);
  GammaParams g = mean_mortality_posterior(C, rr, I, prior);
  IntervalEstimate est;
  est.gamma = gamma;
  est.kind = kind;
  switch (kind) {
    case IntervalKind::one_sided:
      est.lo = 0.0;
      est.hi = gamma_quantile(gamma, g);
      break;
    case IntervalKind::symmetric:
      est.lo = gamma_quantile((1.0 - gamma) / 2.0, g);
      est.hi = gamma_quantile((1.0 + gamma) / 2.0, g);
      break;
    default:
      throw std::domain_error("mean_mortality_interval: kind must be one_sided or symmetric");
  }
  return est;
}

EmpiricalBayesFit empirical_bayes_fit(std::span<const long long> counts,
                                      const ReductionResult& rr, double I) {
  if (counts.size() < 5)
    throw std::domain_error("empirical_bayes_fit: need at least 5 counts");
  if (!(I > 0.0)) throw std::domain_error("empirical_bayes_fit: I must be > 0");
  const double RI = rr.r_star * I;

  EmpiricalBayesFit out;
  const long long first = counts.front();
  bool all_equal = std::all_of(counts.begin(), counts.end(),
                               [&](long long c) { return c == first; });
  double mean = 0.0, var = 0.0;
  for (long long c : counts) mean += static_cast<double>(c);
  mean /= static_cast<double>(counts.size());
  for (long long c : counts) var += (c - mean) * (c - mean);
  var /= static_cast<double>(counts.size() - 1);

  if (all_equal || mean == 0.0) {
    out.prior = PriorSpec::objective();
    out.fell_back = true;
    out.warnings.push_back("degenerate counts; falling back to the objective prior");
    return out;
  }

  auto nllh = [&](double xi, double lambda) {
    const double prob = lambda / (lambda + RI);
    const double lp = std::log(prob);
    const double l1p = std::log1p(-prob);
    double nll = 0.0;
    for (long long c : counts) {
      const double cd = static_cast<double>(c);
      nll -= std::lgamma(xi + cd) - std::lgamma(xi) - std::lgamma(cd + 1.0) + xi * lp + cd * l1p;
    }
    return nll;
  };
  auto objective = [&](const std::vector<double>& th) {
    return nllh(std::exp(th[0]), std::exp(th[1]));
  };

  // Method-of-moments start; over-dispersion var > mean is the regular case.
  double xi0 = (var > mean) ? mean * mean / (var - mean) : 5.0;
  double lam0 = (var > mean) ? RI * mean / (var - mean) : RI * 5.0 / std::max(mean, 0.1);
  SimplexResult sr =
      simplex_minimize(objective, {std::log(std::max(xi0, 1e-3)), std::log(std::max(lam0, 1e-3))},
                       {0.5, 0.5});
  const double xi_hat = std::exp(sr.x[0]);
  const double lam_hat = std::exp(sr.x[1]);
  if (!sr.converged || xi_hat > 1e4) {
    out.prior = PriorSpec::objective();
    out.fell_back = true;
    out.warnings.push_back("hyperparameter fit degenerate; falling back to the objective prior");
    return out;
  }
  out.prior = PriorSpec::empirical(xi_hat, lam_hat);
  out.converged = true;
  out.nllh = sr.fmin;

  // Standard errors from the central-difference Hessian on the log scale,
  // delta-mapped to the natural scale.
  const double h = 1e-4;
  auto at = [&](double d0, double d1) { return objective({sr.x[0] + d0, sr.x[1] + d1}); };
  const double f0 = sr.fmin;
  const double hxx = (at(h, 0) - 2.0 * f0 + at(-h, 0)) / (h * h);
  const double hll = (at(0, h) - 2.0 * f0 + at(0, -h)) / (h * h);
  const double hxl = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
  const double det = hxx * hll - hxl * hxl;
  if (hxx > 0.0 && det > 0.0) {
    out.se_xi = xi_hat * std::sqrt(hll / det);
    out.se_lambda = lam_hat * std::sqrt(hxx / det);
  }
  return out;
}

MortalityPosterior no_bleed_posterior(long long C, const ReductionResult& rr, double I,
                                      const PriorSpec& prior) {
  prior.validate();
  if (C < 0) throw std::domain_error("no_bleed_posterior: C must be >= 0");
  if (!(I > 0.0)) throw std::domain_error("no_bleed_posterior: I must be > 0");
  const double R = rr.r_star;
  if (!(R > 0.0 && R <= 1.0)) throw std::domain_error("no_bleed_posterior: R* must be in (0, 1]");

  MortalityPosterior post;
  post.C = C;
  const double prob = (prior.lambda + R * I) / (prior.lambda + I);
  NegBinomialParams nb{prior.xi + static_cast<double>(C), prob};

  if (prob >= 1.0) {  // perfect detection: point mass at M = C
    post.pmf.assign(static_cast<std::size_t>(C) + 1, 0.0);
    post.pmf.back() = 1.0;
    post.tail_mass_bound = 0.0;
    finalize(post);
    return post;
  }

  long long n = std::max<long long>(32, static_cast<long long>(8.0 * (C + 1) / R));
  for (;;) {
    std::vector<double> lp(static_cast<std::size_t>(n) + 1);
    detail::nb_log_pmf_table(nb, n, lp.data());
    // Geometric tail bound from the pmf ratio past n.
    const double r1 = (1.0 - prob) * (nb.size + static_cast<double>(n)) /
                      (static_cast<double>(n) + 1.0);
    const double ratio = std::max(1.0 - prob, r1);
    double tail = (ratio < 1.0) ? std::exp(lp.back() + std::log1p(-prob)) *
                                      (nb.size + static_cast<double>(n)) /
                                      (static_cast<double>(n) + 1.0) / (1.0 - ratio)
                                : std::numeric_limits<double>::infinity();
    if (tail <= tail_target || n > 4'000'000) {
      post.pmf.assign(static_cast<std::size_t>(C + n) + 1, 0.0);
      for (long long j = 0; j <= n; ++j)
        post.pmf[static_cast<std::size_t>(C + j)] = std::exp(lp[static_cast<std::size_t>(j)]);
      post.tail_mass_bound = tail;
      break;
    }
    n += n / 2;
  }
  finalize(post);
  return post;
}

MortalityPosterior mortality_posterior_pmf(long long C, const ReductionResult& rr, double I,
                                           const PriorSpec& prior) {
  prior.validate();
  if (C < 0) throw std::domain_error("mortality_posterior_pmf: C must be >= 0");
  if (!(I > 0.0)) throw std::domain_error("mortality_posterior_pmf: I must be > 0");
  const double R = rr.r_star;
  const double T0 = rr.t_star_0;
  if (!(R > 0.0 && R <= 1.0 && T0 > 0.0 && T0 <= R && T0 < 1.0))
    throw std::domain_error("mortality_posterior_pmf: invalid (R*, T*_0)");
  // A vanishing bleed-through gap sends z to infinity; route to the exact
  // no-bleed negative binomial instead.
  if (R - T0 < 1e-12) return no_bleed_posterior(C, rr, I, prior);

  const PosteriorConstants pc = posterior_constants(C, R, T0, I, prior);

  MortalityPosterior post;
  post.C = C;
  long long m_max = std::max<long long>(32, static_cast<long long>(8.0 * (C + 1) / R));
  while (hyper_tail_bound(pc, m_max) > tail_target) {
    m_max += m_max / 2;
    if (m_max > 4'000'000)
      throw std::runtime_error("mortality_posterior_pmf: truncation point not found");
  }
  post.pmf.resize(static_cast<std::size_t>(m_max) + 1);
  for (long long m = 0; m <= m_max; ++m)
    post.pmf[static_cast<std::size_t>(m)] = std::exp(log_pmf_at(pc, m));
  post.tail_mass_bound = hyper_tail_bound(pc, m_max);
  finalize(post);
  return post;
}

IntervalEstimate mortality_interval(const MortalityPosterior& post, double gamma,
                                    IntervalKind kind) {
  require_gamma(gamma);
  IntervalEstimate est;
  est.gamma = gamma;
  est.kind = kind;

  if (kind == IntervalKind::hpd) {
    HpdResult h = hpd_set(post, gamma);
    return h.hull;
  }

  // The lower end of a one-sided interval is the bottom of the support: 0
  // for the bleed-through posterior, C for the no-bleed one.
  std::size_t support_lo = 0;
  while (support_lo + 1 < post.pmf.size() && post.pmf[support_lo] == 0.0) ++support_lo;

  double cum = 0.0;
  if (kind == IntervalKind::one_sided) {
    for (std::size_t m = 0; m < post.pmf.size(); ++m) {
      cum += post.pmf[m];
      if (cum >= gamma) {
        est.lo = static_cast<double>(support_lo);
        est.hi = static_cast<double>(m);
        return est;
      }
    }
    throw std::runtime_error("mortality_interval: gamma unreachable within truncation");
  }

  // Symmetric equal-tail endpoints in the smallest-M-reaching-the-target
  // quantile convention: lo at (1-gamma)/2, hi at (1+gamma)/2.
  const double lo_target = (1.0 - gamma) / 2.0;
  const double hi_target = (1.0 + gamma) / 2.0;
  bool lo_found = false, hi_found = false;
  cum = 0.0;
  for (std::size_t m = 0; m < post.pmf.size(); ++m) {
    cum += post.pmf[m];
    if (!lo_found && cum >= lo_target) {
      est.lo = static_cast<double>(m);
      lo_found = true;
    }
    if (cum >= hi_target) {
      est.hi = static_cast<double>(m);
      hi_found = true;
      break;
    }
  }
  if (!hi_found)
    throw std::runtime_error("mortality_interval: gamma unreachable within truncation");
  return est;
}

HpdResult hpd_set(const MortalityPosterior& post, double gamma) {
  require_gamma(gamma);
  std::vector<long long> order(post.pmf.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](long long a, long long b) {
    double pa = post.pmf[static_cast<std::size_t>(a)];
    double pb = post.pmf[static_cast<std::size_t>(b)];
    if (pa != pb) return pa > pb;
    return a < b;
  });

  HpdResult res;
  double mass = 0.0;
  for (long long m : order) {
    res.members.push_back(m);
    mass += post.pmf[static_cast<std::size_t>(m)];
    if (mass >= gamma) break;
  }
  if (mass < gamma)
    throw std::runtime_error("hpd_set: gamma unreachable within truncation");
  std::sort(res.members.begin(), res.members.end());
  res.mass = mass;
  res.hull.lo = static_cast<double>(res.members.front());
  res.hull.hi = static_cast<double>(res.members.back());
  res.hull.gamma = gamma;
  res.hull.kind = IntervalKind::hpd;
  res.hull.contiguous =
      static_cast<long long>(res.members.size()) == res.members.back() - res.members.front() + 1;
  return res;
}

IntervalEstimate uniform_prior_interval(long long C, const ReductionResult& rr, double gamma) {
  require_gamma(gamma);
  if (C < 0) throw std::domain_error("uniform_prior_interval: C must be >= 0");
  NegBinomialParams nb{static_cast<double>(C) + 1.0, rr.r_star};
  IntervalEstimate est;
  est.gamma = gamma;
  est.kind = IntervalKind::one_sided;
  est.lo = static_cast<double>(C);
  est.hi = static_cast<double>(C + neg_binomial_quantile(gamma, nb));
  return est;
}

IntervalEstimate classical_binomial_interval(long long C, const ReductionResult& rr,
                                             double gamma, long long scan_cap) {
  require_gamma(gamma);
  if (C < 0) throw std::domain_error("classical_binomial_interval: C must be >= 0");
  const double R = rr.r_star;
  if (!(R > 0.0 && R <= 1.0))
    throw std::domain_error("classical_binomial_interval: R* must be in (0, 1]");

  IntervalEstimate est;
  est.gamma = gamma;
  est.kind = IntervalKind::classical;
  est.lo = static_cast<double>(C);
  if (R == 1.0) {  // degenerate: the count is the mortality
    est.hi = static_cast<double>(C);
    return est;
  }
  for (long long M = C; M <= C + scan_cap; ++M) {
    if (binomial_cdf(C, M, R) <= 1.0 - gamma) {
      est.hi = static_cast<double>(M);
      return est;
    }
  }
  throw std::runtime_error("classical_binomial_interval: scan cap exceeded");
}

}  // namespace acme
