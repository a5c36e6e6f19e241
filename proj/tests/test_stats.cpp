#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "acme/stats.hpp"

using namespace acme;

namespace {

// Independent oracle for the regularized lower incomplete gamma: adaptive
// Simpson on the substituted integrand (1/s) exp(-u^{1/s}), which is smooth
// even for shape < 1.
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double fl, double fm, double fh, double tol, int depth) {
  double m = 0.5 * (lo + hi);
  double lm = 0.5 * (lo + m), rm = 0.5 * (m + hi);
  double flm = f(lm), frm = f(rm);
  double whole = (hi - lo) / 6.0 * (fl + 4.0 * fm + fh);
  double left = (m - lo) / 6.0 * (fl + 4.0 * flm + fm);
  double right = (hi - m) / 6.0 * (fm + 4.0 * frm + fh);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, lo, m, fl, flm, fm, tol, depth - 1) +
         adaptive_simpson(f, m, hi, fm, frm, fh, tol, depth - 1);
}

double reg_gamma_lower_oracle(double shape, double x) {
  const double lg = std::lgamma(shape);
  if (shape < 1.0) {
    // Substituting u = t^s removes the endpoint singularity:
    // int_0^x t^{s-1} e^{-t} dt = (1/s) int_0^{x^s} exp(-u^{1/s}) du.
    auto g = [&](double u) { return std::exp(-std::pow(u, 1.0 / shape) - lg) / shape; };
    double hi = std::pow(x, shape);
    return adaptive_simpson(g, 0.0, hi, g(0.0), g(0.5 * hi), g(hi), 5e-15, 40);
  }
  auto g = [&](double t) {
    return (t == 0.0) ? 0.0 : std::exp((shape - 1.0) * std::log(t) - t - lg);
  };
  return adaptive_simpson(g, 0.0, x, g(0.0), g(0.5 * x), g(x), 5e-15, 40);
}

double normal_cdf_oracle(double z) {
  // Quadrature of the standard normal density from 0 to z.
  auto g = [](double t) { return std::exp(-0.5 * t * t); };
  double integral = adaptive_simpson(g, 0.0, z, g(0.0), g(0.5 * z), g(z), 1e-15, 40);
  return 0.5 + integral / std::sqrt(2.0 * std::acos(-1.0));
}

}  // namespace

TEST_CASE("log gamma basics") {
  CHECK(log_gamma_fn(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(log_gamma_fn(2.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(log_gamma_fn(0.5) == doctest::Approx(0.5 * std::log(std::acos(-1.0))).epsilon(1e-13));
  CHECK_THROWS_AS(log_gamma_fn(0.0), std::domain_error);
  CHECK_THROWS_AS(log_gamma_fn(-1.5), std::domain_error);
}

TEST_CASE("regularized incomplete gamma") {
  CHECK(reg_gamma_lower(1.0, 0.0) == 0.0);
  CHECK(reg_gamma_lower(1.0, std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-13));

  // Frozen from the quadrature oracle; also equals erf(1).
  const double expected = 0.8427007929497149;
  CHECK(reg_gamma_lower_oracle(0.5, 1.0) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(reg_gamma_lower(0.5, 1.0) == doctest::Approx(expected).epsilon(1e-12));

  // Oracle agreement across a small parameter sweep (absolute error, as the
  // quadrature oracle itself carries ~1e-12 absolute error).
  for (double shape : {0.3, 0.8, 1.0, 2.5, 7.0, 19.0}) {
    for (double x : {0.05, 0.5, 1.0, 3.0, 10.0, 25.0}) {
      CHECK(std::fabs(reg_gamma_lower(shape, x) - reg_gamma_lower_oracle(shape, x)) <= 1e-11);
    }
  }
  CHECK_THROWS_AS(reg_gamma_lower(1.0, -0.1), std::domain_error);
  CHECK_THROWS_AS(reg_gamma_lower(0.0, 1.0), std::domain_error);
}

TEST_CASE("gamma quantile closed forms and oracle") {
  CHECK(gamma_quantile(0.5, {1.0, 1.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(gamma_quantile(1.0 - std::exp(-1.0), {1.0, 2.0}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(gamma_quantile(0.0, {3.0, 2.0}) == 0.0);

  // Bisection oracle on the CDF.
  const GammaParams g{10.5, 3.0};
  double lo = 0.0, hi = 50.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (reg_gamma_lower(g.shape, g.rate * mid) < 0.95 ? lo : hi) = mid;
  }
  CHECK(gamma_quantile(0.95, g) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));

  CHECK_THROWS_AS(gamma_quantile(1.0, g), std::domain_error);
  CHECK_THROWS_AS(gamma_quantile(-0.1, g), std::domain_error);
  CHECK_THROWS_AS(gamma_quantile(0.5, GammaParams{1.0, 0.0}), std::domain_error);
}

TEST_CASE("gamma quantile round-trips the CDF") {
  std::mt19937 rng(20240811);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    double shape = 0.3 + u01(rng) * 19.7;
    double rate = 0.01 + u01(rng) * 9.99;
    double p = 0.001 + u01(rng) * 0.998;
    double x = gamma_quantile(p, {shape, rate});
    CHECK(std::fabs(reg_gamma_lower(shape, rate * x) - p) <= 1e-9);
  }
}

TEST_CASE("normal cdf") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(40.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(normal_cdf(1.0) == doctest::Approx(normal_cdf_oracle(1.0)).epsilon(1e-12));
  CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-13));
  for (double z = -8.0; z <= 8.0; z += 0.37)
    CHECK(std::fabs(normal_cdf(z) + normal_cdf(-z) - 1.0) <= 1e-14);
  // Strictly increasing on a grid.
  double prev = normal_cdf(-8.0);
  for (double z = -7.9; z <= 8.0; z += 0.1) {
    double cur = normal_cdf(z);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("binomial cdf") {
  CHECK(binomial_cdf(7, 7, 0.3) == 1.0);
  CHECK(binomial_cdf(0, 3, 0.5) == doctest::Approx(0.125).epsilon(1e-14));
  // Exact rational value: sum_{j<=2} C(10,j) (1/4)^j (3/4)^{10-j} = 551124/1048576.
  CHECK(binomial_cdf(2, 10, 0.25) == doctest::Approx(551124.0 / 1048576.0).epsilon(1e-13));
  CHECK_THROWS_AS(binomial_cdf(5, 3, 0.5), std::domain_error);
  CHECK_THROWS_AS(binomial_cdf(1, 3, 1.5), std::domain_error);

  // Nonincreasing in n, nondecreasing in x.
  for (double p : {0.1, 0.5, 0.9}) {
    for (long long x = 0; x <= 4; ++x) {
      double prev = 1.0;
      for (long long n = x; n <= x + 12; ++n) {
        double cur = binomial_cdf(x, n, p);
        CHECK(cur <= prev + 1e-15);
        prev = cur;
      }
    }
    for (long long n = 10; n <= 12; ++n) {
      double prev = 0.0;
      for (long long x = 0; x <= n; ++x) {
        double cur = binomial_cdf(x, n, p);
        CHECK(cur >= prev - 1e-15);
        prev = cur;
      }
    }
  }
}

TEST_CASE("negative binomial quantile") {
  CHECK(neg_binomial_quantile(0.7, {2.5, 1.0}) == 0);
  CHECK(neg_binomial_quantile(0.0, {2.5, 0.3}) == 0);

  // Cumulative-sum oracle.
  const NegBinomialParams nb{1.5, 0.2496};
  auto pmf = [&](long long j) {
    return std::exp(std::lgamma(nb.size + j) - std::lgamma(nb.size) -
                    std::lgamma(static_cast<double>(j) + 1.0) +
                    nb.size * std::log(nb.prob) + j * std::log1p(-nb.prob));
  };
  double cdf = 0.0;
  long long expected = -1;
  for (long long j = 0; j < 1000; ++j) {
    cdf += pmf(j);
    if (cdf >= 0.9) {
      expected = j;
      break;
    }
  }
  long long got = neg_binomial_quantile(0.9, nb);
  CHECK(got == expected);

  // Minimality: CDF(q) >= p and CDF(q-1) < p.
  for (double p : {0.25, 0.5, 0.9, 0.99}) {
    long long q = neg_binomial_quantile(p, nb);
    double below = 0.0;
    for (long long j = 0; j < q; ++j) below += pmf(j);
    CHECK(below < p);
    CHECK(below + pmf(q) >= p - 1e-12);
  }

  // Term cap reached before the target mass.
  CHECK_THROWS_AS(neg_binomial_quantile(0.999, {1.0, 1e-4}, 100), std::runtime_error);
  CHECK_THROWS_AS(neg_binomial_quantile(1.0, nb), std::domain_error);
}

TEST_CASE("terminating hypergeometric sum") {
  CHECK(hyp2f1_terminating(0, 12, -3.25, -2.0) == 1.0);
  CHECK(hyp2f1_terminating(1, 1, 4.0, -3.0) == doctest::Approx(1.0 - 3.0 / 4.0).epsilon(1e-14));

  // Exact term-by-term oracle at small integer/half-integer arguments:
  // 1 + 24/6.5 + 288/71.5 + 1152/965.25.
  const double expected = 1.0 + 24.0 / 6.5 + 288.0 / 71.5 + 1152.0 / 965.25;
  CHECK(hyp2f1_terminating(3, 4, -6.5, -2.0) == doctest::Approx(expected).epsilon(1e-13));

  // Symmetric in the first two parameters.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    long long C = static_cast<long long>(u01(rng) * 10);
    long long M = static_cast<long long>(u01(rng) * 40);
    double xi = 0.1 + u01(rng) * 3.0;
    double c3 = 1.0 - xi - static_cast<double>(C + M);
    double z = u01(rng) * 5.0;
    double f1 = hyp2f1_terminating(C, M, c3, -z);
    double f2 = hyp2f1_terminating(M, C, c3, -z);
    CHECK(f1 == doctest::Approx(f2).epsilon(1e-12));
  }

  // Pochhammer factor hitting zero is an error.
  CHECK_THROWS_AS(hyp2f1_terminating(3, 3, -2.0, -1.0), std::domain_error);

  // Log-space accumulation agrees with the plain sum where both work.
  auto sl = detail::hyp2f1_terminating_log(4, 30, 1.0 - 0.5 - 34.0, -2.5);
  CHECK(sl.sign == 1);
  CHECK(std::exp(sl.log_abs) ==
        doctest::Approx(hyp2f1_terminating(4, 30, 1.0 - 0.5 - 34.0, -2.5)).epsilon(1e-12));
}
