#include "acme/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "acme/stats.hpp"

namespace acme {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();
constexpr double inf = std::numeric_limits<double>::infinity();

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// log-sum-exp over a small vector of log terms.
double log_sum_exp(const std::vector<double>& ls) {
  double m = -inf;
  for (double l : ls) m = std::max(m, l);
  if (m == -inf) return -inf;
  double s = 0.0;
  for (double l : ls) s += std::exp(l - m);
  return m + std::log(s);
}

// Central-difference Hessian of f at x with per-coordinate step h.
std::vector<std::vector<double>> fd_hessian(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x,
    double h) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> H(n, std::vector<double>(n, 0.0));
  const double f0 = f(x);
  for (std::size_t i = 0; i < n; ++i) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    H[i][i] = (f(xp) - 2.0 * f0 + f(xm)) / (h * h);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += h; xpp[j] += h;
      xpm[i] += h; xpm[j] -= h;
      xmp[i] -= h; xmp[j] += h;
      xmm[i] -= h; xmm[j] -= h;
      H[i][j] = H[j][i] = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h);
    }
  }
  return H;
}

// Inverse of a small symmetric matrix by Cholesky; empty result when the
// matrix is not positive definite.
std::vector<std::vector<double>> spd_inverse(std::vector<std::vector<double>> A) {
  const std::size_t n = A.size();
  std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = A[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        if (s <= 0.0) return {};
        L[i][i] = std::sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
  // Solve L Linv = I, then inv = Linv^T Linv.
  std::vector<std::vector<double>> Linv(n, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < n; ++c) {
    Linv[c][c] = 1.0 / L[c][c];
    for (std::size_t i = c + 1; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = c; k < i; ++k) s += L[i][k] * Linv[k][c];
      Linv[i][c] = -s / L[i][i];
    }
  }
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = std::max(i, j); k < n; ++k) s += Linv[k][i] * Linv[k][j];
      inv[i][j] = s;
    }
  return inv;
}

struct IntervalData {
  double dtp;  // tp - t0
  double dta;  // ta - t0, inf when censored
};

std::vector<IntervalData> removal_intervals(const IdtDataset& data) {
  std::vector<IntervalData> iv;
  iv.reserve(data.carcasses.size());
  for (const auto& c : data.carcasses)
    iv.push_back({c.tp - c.t0, c.ta ? *c.ta - c.t0 : inf});
  return iv;
}

double removal_nllh_intervals(const std::vector<IntervalData>& iv, double alpha, double rho) {
  double nll = 0.0;
  for (const auto& d : iv) {
    nll += std::pow(rho * d.dtp, alpha);
    if (std::isfinite(d.dta)) {
      const double gap = std::pow(rho * d.dtp, alpha) - std::pow(rho * d.dta, alpha);
      nll -= std::log1p(-std::exp(gap));  // gap < 0
    }
  }
  return nll;
}

}  // namespace

double FitResult::estimate(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return estimates[i];
  throw std::out_of_range("FitResult: no parameter named " + name);
}

double FitResult::std_error(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return std_errors[i];
  throw std::out_of_range("FitResult: no parameter named " + name);
}

double removal_nllh(const IdtDataset& data, double alpha, double rho) {
  if (!(alpha > 0.0 && rho > 0.0))
    throw std::domain_error("removal_nllh: alpha and rho must be > 0");
  double nll = removal_nllh_intervals(removal_intervals(data), alpha, rho);
  if (!std::isfinite(nll))
    throw std::runtime_error("removal_nllh: non-finite value (degenerate interval?)");
  return nll;
}

FitResult fit_removal(const IdtDataset& data) {
  auto iv = removal_intervals(data);
  FitResult res;
  res.names = {"alpha", "rho"};
  res.estimates = {nan_v, nan_v};
  res.std_errors = {nan_v, nan_v};

  long n_informative = std::count_if(iv.begin(), iv.end(),
                                     [](const IntervalData& d) { return std::isfinite(d.dta); });
  if (n_informative < 2) {
    res.warnings.push_back("fewer than 2 informative (non-censored) intervals; "
                           "removal rate not identified");
    res.boundary.push_back("rho");
    return res;
  }

  auto objective = [&](const std::vector<double>& th) {
    return removal_nllh_intervals(iv, std::exp(th[0]), std::exp(th[1]));
  };

  double mean_dtp = 0.0;
  for (const auto& d : iv) mean_dtp += d.dtp;
  mean_dtp = std::max(mean_dtp / static_cast<double>(iv.size()), 0.5);
  SimplexResult sr = simplex_minimize(objective, {0.0, std::log(1.0 / mean_dtp)}, {0.5, 0.5});

  res.estimates = {std::exp(sr.x[0]), std::exp(sr.x[1])};
  res.nllh = sr.fmin;
  res.converged = sr.converged;
  res.n_evals = sr.n_evals;

  auto H = fd_hessian(objective, sr.x, 1e-4);
  auto cov = spd_inverse(std::move(H));
  if (!cov.empty()) {
    // Delta method: d(exp t)/dt = exp t.
    res.std_errors = {res.estimates[0] * std::sqrt(cov[0][0]),
                      res.estimates[1] * std::sqrt(cov[1][1])};
  } else {
    res.warnings.push_back("observed information not positive definite; no standard errors");
  }
  return res;
}

FitResult fit_removal_fixed_shape(const IdtDataset& data, double alpha) {
  if (!(alpha > 0.0)) throw std::domain_error("fit_removal_fixed_shape: alpha must be > 0");
  auto iv = removal_intervals(data);
  auto objective = [&](const std::vector<double>& th) {
    return removal_nllh_intervals(iv, alpha, std::exp(th[0]));
  };
  double mean_dtp = 0.0;
  for (const auto& d : iv) mean_dtp += d.dtp;
  mean_dtp = std::max(mean_dtp / std::max<double>(1.0, static_cast<double>(iv.size())), 0.5);
  SimplexResult sr = simplex_minimize(objective, {std::log(1.0 / mean_dtp)}, {0.5});

  FitResult res;
  res.names = {"rho"};
  res.estimates = {std::exp(sr.x[0])};
  res.std_errors = {nan_v};
  res.nllh = sr.fmin;
  res.converged = sr.converged;
  res.n_evals = sr.n_evals;
  auto H = fd_hessian(objective, sr.x, 1e-4);
  auto cov = spd_inverse(std::move(H));
  if (!cov.empty()) res.std_errors[0] = res.estimates[0] * std::sqrt(cov[0][0]);
  return res;
}

namespace detail {

std::vector<SearchHistory> build_histories(const IdtDataset& data) {
  std::vector<SearchHistory> out(data.carcasses.size());
  for (std::size_t i = 0; i < data.carcasses.size(); ++i) {
    const auto& c = data.carcasses[i];
    for (const auto& s : data.searches_for(i)) {
      if (s.excluded || s.time < c.t0 || s.time > c.tp) continue;
      out[i].age.push_back(s.time - c.t0);
      out[i].discovered.push_back(s.discovered ? 1 : 0);
    }
  }
  return out;
}

double discovery_log_likelihood(const SearchHistory& h, double a, double b, double bleed) {
  const std::size_t n = h.age.size();
  if (n == 0) return 0.0;

  // Prefix log densities of the observed outcomes, log p_n or log(1-p_n).
  std::vector<double> cum(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lp = -a - b * h.age[i];  // log p_i, p_i = exp(-a - b age)
    acc += h.discovered[i] ? lp : std::log1p(-std::exp(lp));
    cum[i] = acc;
  }

  std::size_t last_success = 0;  // index of m_*, first search when never found
  for (std::size_t i = 0; i < n; ++i)
    if (h.discovered[i]) last_success = i;

  const double log_beta = (bleed > 0.0) ? std::log(bleed) : -inf;
  const double log_1mb = (bleed < 1.0) ? std::log1p(-bleed) : -inf;

  std::vector<double> terms;
  terms.reserve(n - last_success + 1);
  if (bleed < 1.0) {
    for (std::size_t m = last_success; m + 1 < n; ++m) {
      // chain broke right after search m (m < m**)
      double lb = (m == 0) ? 0.0 : static_cast<double>(m) * log_beta;
      if (m > 0 && bleed == 0.0) lb = -inf;
      terms.push_back(log_1mb + lb + cum[m]);
    }
  }
  {
    const std::size_t m = n - 1;  // chain survived through the last search
    double lb = (m == 0) ? 0.0 : static_cast<double>(m) * log_beta;
    if (m > 0 && bleed == 0.0) lb = -inf;
    terms.push_back(lb + cum[m]);
  }
  return log_sum_exp(terms);
}

}  // namespace detail

double discovery_likelihood_single(const SearchHistory& history, double a, double b,
                                   double bleed) {
  if (!(a >= 0.0 && b >= 0.0))
    throw std::domain_error("discovery_likelihood_single: a, b must be >= 0");
  if (!(bleed >= 0.0 && bleed <= 1.0))
    throw std::domain_error("discovery_likelihood_single: bleed must be in [0, 1]");
  return std::exp(detail::discovery_log_likelihood(history, a, b, bleed));
}

double discovery_nllh(const IdtDataset& data, double a, double b, double bleed) {
  if (!(a >= 0.0 && b >= 0.0)) throw std::domain_error("discovery_nllh: a, b must be >= 0");
  if (!(bleed >= 0.0 && bleed <= 1.0))
    throw std::domain_error("discovery_nllh: bleed must be in [0, 1]");
  auto hist = detail::build_histories(data);
  double nll = 0.0;
  for (const auto& h : hist) nll -= detail::discovery_log_likelihood(h, a, b, bleed);
  return nll;  // +inf signals an impossible configuration, not an exception
}

namespace {

FitResult fit_discovery_impl(const std::vector<SearchHistory>& hist, bool constant_submodel) {
  long usable = 0, successes = 0, search_count = 0;
  for (const auto& h : hist) {
    if (!h.age.empty()) ++usable;
    for (char d : h.discovered) {
      ++search_count;
      successes += d;
    }
  }
  FitResult res;
  if (usable == 0 || search_count == 0) {
    res.warnings.push_back("no usable in-presence searches");
    return res;
  }

  const double rate =
      std::clamp(static_cast<double>(successes) / static_cast<double>(search_count), 1e-3, 0.999);
  const double a0 = std::log(-std::log(rate));

  auto nllh_at = [&](double a, double b, double bleed) {
    double nll = 0.0;
    for (const auto& h : hist) nll -= detail::discovery_log_likelihood(h, a, b, bleed);
    return nll;
  };

  if (constant_submodel) {
    auto objective = [&](const std::vector<double>& th) {
      return nllh_at(std::exp(th[0]), 0.0, 1.0);
    };
    SimplexResult sr = simplex_minimize(objective, {a0}, {0.5});
    res.names = {"a"};
    res.estimates = {std::exp(sr.x[0])};
    res.std_errors = {nan_v};
    res.nllh = sr.fmin;
    res.converged = sr.converged;
    res.n_evals = sr.n_evals;
    auto H = fd_hessian(objective, sr.x, 1e-4);
    auto cov = spd_inverse(std::move(H));
    if (!cov.empty()) res.std_errors[0] = res.estimates[0] * std::sqrt(cov[0][0]);
    return res;
  }

  auto transform = [](const std::vector<double>& th) {
    double a = std::exp(th[0]);
    double b = std::max(std::exp(th[1]), 1e-10);
    double bleed = std::clamp(logistic(th[2]), 1e-9, 1.0 - 1e-9);
    return std::array<double, 3>{a, b, bleed};
  };
  auto objective = [&](const std::vector<double>& th) {
    auto [a, b, bleed] = transform(th);
    return nllh_at(a, b, bleed);
  };

  SimplexResult sr =
      simplex_minimize(objective, {a0, std::log(0.02), logit(0.9)}, {0.5, 1.0, 1.0});
  auto [a_hat, b_hat, beta_hat] = transform(sr.x);

  res.names = {"a", "b", "bleed"};
  res.estimates = {a_hat, b_hat, beta_hat};
  res.std_errors = {nan_v, nan_v, nan_v};
  res.nllh = sr.fmin;
  res.converged = sr.converged;
  res.n_evals = sr.n_evals;

  if (a_hat >= 25.0) res.boundary.push_back("a");
  if (b_hat <= 1e-8) res.boundary.push_back("b");
  if (beta_hat >= 1.0 - 1e-6 || beta_hat <= 1e-6) res.boundary.push_back("bleed");

  auto H = fd_hessian(objective, sr.x, 1e-4);
  auto cov = spd_inverse(std::move(H));
  if (!cov.empty()) {
    const double jac[3] = {a_hat, b_hat, beta_hat * (1.0 - beta_hat)};
    for (int i = 0; i < 3; ++i) res.std_errors[i] = jac[i] * std::sqrt(cov[i][i]);
  } else if (res.boundary.empty()) {
    res.warnings.push_back("observed information not positive definite; no standard errors");
  }
  // Standard errors are meaningless for boundary estimates.
  for (const auto& name : res.boundary)
    for (std::size_t i = 0; i < res.names.size(); ++i)
      if (res.names[i] == name) res.std_errors[i] = nan_v;
  return res;
}

}  // namespace

FitResult fit_discovery(const IdtDataset& data) {
  return fit_discovery_impl(detail::build_histories(data), false);
}

FitResult fit_discovery_constant(const IdtDataset& data) {
  return fit_discovery_impl(detail::build_histories(data), true);
}

DevianceReport deviance_vs_constant(const FitResult& full, const FitResult& constant) {
  DevianceReport rep;
  rep.deviance = std::max(0.0, 2.0 * (constant.nllh - full.nllh));
  rep.dof = 2;
  rep.p_value = 1.0 - reg_gamma_lower(rep.dof / 2.0, rep.deviance / 2.0);
  return rep;
}

DevianceReport deviance_vs_constant(const IdtDataset& data) {
  FitResult full = fit_discovery(data);
  if (!full.converged) throw std::runtime_error("deviance_vs_constant: full fit failed");
  FitResult constant = fit_discovery_constant(data);
  if (!constant.converged)
    throw std::runtime_error("deviance_vs_constant: submodel fit failed");
  return deviance_vs_constant(full, constant);
}

}  // namespace acme
