#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "acme/legacy.hpp"
#include "acme/reduction.hpp"
#include "acme/stats.hpp"

using namespace acme;

namespace {
const AcmeParams altamont{{0.4695, 0.0809}, {1.0322, 0.0706}, 0.9573, 7.0};

AcmeParams with_interval(AcmeParams p, double I) {
  p.interval = I;
  return p;
}
}  // namespace

TEST_CASE("survival curve") {
  RemovalModel rm{0.4695, 0.0809};
  CHECK(survival(rm, 0.0) == 1.0);
  CHECK(survival({1.0, 0.1}, 10.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(mean_persistence(rm) == doctest::Approx(27.97).epsilon(0.05 / 27.97));
  CHECK(mean_persistence({1.0, 0.1}) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(mean_persistence({2.0, 1.0}) ==
        doctest::Approx(std::sqrt(std::acos(-1.0)) / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(survival(rm, -1.0), std::domain_error);
  // Strictly decreasing.
  double prev = 1.0;
  for (double t = 0.5; t < 60.0; t += 0.5) {
    double cur = survival(rm, t);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("proficiency curve") {
  CHECK(proficiency({0.0, 0.0}, 3.0) == 1.0);
  CHECK(proficiency({std::log(2.0), 0.0}, 11.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(proficiency({1.0322, 0.0706}, 0.0) == doctest::Approx(0.3562).epsilon(3e-4));
  CHECK_THROWS_AS(proficiency({1.0, 0.1}, -2.0), std::domain_error);
  CHECK_THROWS_AS(proficiency({-0.5, 0.1}, 2.0), std::domain_error);
}

TEST_CASE("index enumeration") {
  using P = std::vector<std::pair<int, int>>;
  CHECK(enumerate_qstar_indices(0) == P{{1, 0}});
  CHECK(enumerate_qstar_indices(1) == P{{1, 1}, {2, 1}});
  CHECK(enumerate_qstar_indices(2) == P{{1, 2}, {2, 3}, {2, 2}, {3, 3}});
  CHECK(enumerate_qstar_indices(3) ==
        P{{1, 3}, {2, 5}, {2, 4}, {3, 6}, {2, 3}, {3, 5}, {3, 4}, {4, 6}});
  CHECK(enumerate_qstar_indices(10).size() == 1024);
  CHECK_THROWS_AS(enumerate_qstar_indices(-1), std::domain_error);
  CHECK_THROWS_AS(enumerate_qstar_indices(21), std::length_error);
}

TEST_CASE("q* quadrature basics") {
  AcmeParams p{{1.0, 0.2}, {0.0, 0.0}, 0.0, 5.0};
  // beta^k kills every k >= 1 term at beta = 0.
  CHECK(q_star_quadrature(p, 1, 1, 1) == 0.0);
  CHECK(q_star_quadrature(p, 3, 2, 4) == 0.0);
  // Elementary integral at alpha=1, a=b=0.
  double expected = -std::expm1(-0.2 * 5.0) / (0.2 * 5.0);
  CHECK(q_star_quadrature(p, 0, 1, 0) == doctest::Approx(expected).epsilon(1e-11));
  // Altamont first-search fraction.
  CHECK(q_star_quadrature(altamont, 0, 1, 0) == doctest::Approx(0.1740).epsilon(5e-4 / 0.174));
}

TEST_CASE("alpha=1 closed form matches quadrature") {
  AcmeParams p{{1.0, 0.1}, {1.0, 0.05}, 0.9, 7.0};
  // Elementary reductions first.
  AcmeParams plain{{1.0, 0.2}, {0.0, 0.0}, 0.5, 5.0};
  CHECK(q_star_closed_alpha1(plain, 0, 1, 0) ==
        doctest::Approx(-std::expm1(-1.0) / 1.0).epsilon(1e-12));
  AcmeParams nobleed = plain;
  nobleed.bleed = 0.0;
  CHECK(q_star_closed_alpha1(nobleed, 1, 1, 1) == 0.0);

  CHECK(q_star_closed_alpha1(p, 1, 2, 1) ==
        doctest::Approx(q_star_quadrature(p, 1, 2, 1)).epsilon(1e-9));

  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    AcmeParams q{{1.0, 0.02 + 0.4 * u01(rng)},
                 {0.2 + 2.0 * u01(rng), 0.15 * u01(rng)},
                 u01(rng),
                 1.0 + 13.0 * u01(rng)};
    int k = static_cast<int>(u01(rng) * 4);
    int m = 1 + static_cast<int>(u01(rng) * 3);
    int n = static_cast<int>(u01(rng) * (k * m + 1));
    double closed = q_star_closed_alpha1(q, k, m, n);
    double quad = q_star_quadrature(q, k, m, n);
    CHECK(std::fabs(closed - quad) <= 1e-9 * std::max(std::fabs(quad), 1e-30));
  }
  CHECK_THROWS_AS(q_star_closed_alpha1(altamont, 0, 1, 0), std::domain_error);
}

TEST_CASE("alpha=1/2 closed form matches quadrature") {
  AcmeParams p1{{0.5, 0.08}, {1.0, 0.07}, 0.95, 7.0};
  auto r1 = q_star_closed_alpha_half(p1, 0, 1, 0);
  CHECK_FALSE(r1.used_quadrature_fallback);
  CHECK(r1.value == doctest::Approx(q_star_quadrature(p1, 0, 1, 0)).epsilon(1e-7));

  AcmeParams p2{{0.5, 0.2}, {0.5, 0.1}, 0.5, 3.0};
  auto r2 = q_star_closed_alpha_half(p2, 1, 1, 1);
  CHECK_FALSE(r2.used_quadrature_fallback);
  CHECK(r2.value == doctest::Approx(q_star_quadrature(p2, 1, 1, 1)).epsilon(1e-7));

  AcmeParams nobleed = p2;
  nobleed.bleed = 0.0;
  CHECK(q_star_closed_alpha_half(nobleed, 2, 1, 2).value == 0.0);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    AcmeParams q{{0.5, 0.02 + 0.3 * u01(rng)},
                 {0.2 + 1.5 * u01(rng), 0.02 + 0.12 * u01(rng)},
                 u01(rng),
                 1.0 + 13.0 * u01(rng)};
    int k = static_cast<int>(u01(rng) * 3);
    int m = 1 + static_cast<int>(u01(rng) * 3);
    int n = static_cast<int>(u01(rng) * (k * m + 1));
    auto res = q_star_closed_alpha_half(q, k, m, n);
    double quad = q_star_quadrature(q, k, m, n);
    // Either the closed form matched to 1e-6 or the fallback reported quadrature.
    if (res.used_quadrature_fallback) {
      CHECK(res.value == quad);
    } else {
      CHECK(std::fabs(res.value - quad) <= 1e-6 * std::max(std::fabs(quad), 1e-30));
    }
  }
  CHECK_THROWS_AS(q_star_closed_alpha_half(altamont, 0, 1, 0), std::domain_error);
  AcmeParams b0{{0.5, 0.1}, {1.0, 0.0}, 0.5, 7.0};
  CHECK_THROWS_AS(q_star_closed_alpha_half(b0, 0, 1, 0), std::domain_error);
}

TEST_CASE("T*_k equals its Q* expansion") {
  CHECK(term_t_star(altamont, 0) == doctest::Approx(0.1740).epsilon(5e-4 / 0.174));
  AcmeParams s1 = altamont;
  s1.discovery = {0.0, 0.0};  // perfect searcher: no bleed-through terms
  CHECK(term_t_star(s1, 1) == 0.0);
  CHECK(term_t_star(s1, 3) == 0.0);

  for (const AcmeParams& p :
       {altamont, AcmeParams{{1.0, 0.15}, {0.7, 0.04}, 0.8, 3.0}}) {
    for (int k = 0; k <= 5; ++k) {
      double direct = term_t_star(p, k);
      double qsum = 0.0;
      for (auto [m, n] : enumerate_qstar_indices(k)) qsum += q_star_quadrature(p, k, m, n);
      CHECK(std::fabs(direct - qsum) <= 1e-9 * std::fabs(direct));
    }
  }
}

TEST_CASE("truncation bound") {
  AcmeParams nobleed = altamont;
  nobleed.bleed = 0.0;
  CHECK(truncation_bound(nobleed, 3) == 0.0);
  AcmeParams a0 = altamont;
  a0.discovery.a = 0.0;
  CHECK(truncation_bound(a0, 4) == 0.0);

  // The bound really bounds the omitted tail (series summed to depth 50).
  ReductionResult deep = reduction_factor(altamont, 1e-4);
  double total = deep.r_star;
  double partial = 0.0;
  for (int n = 1; n <= 10; ++n) {
    partial += deep.terms[n - 1];
    CHECK(total - partial <= truncation_bound(altamont, n));
  }

  // Degenerate beta=1, b=0 falls back to the (1 - e^-a)^N branch.
  AcmeParams degen{{1.0, 0.05}, {0.7, 0.0}, 1.0, 7.0};
  double expect = survival(degen.removal, 14.0) * std::pow(-std::expm1(-0.7), 2);
  CHECK(truncation_bound(degen, 2) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("reduction factor series") {
  ReductionResult rr = reduction_factor(altamont, 1e-4);
  CHECK(rr.converged);
  CHECK(rr.t_star_0 == doctest::Approx(0.1740).epsilon(5e-4 / 0.174));
  CHECK(rr.t_star_0 == rr.terms.front());
  CHECK(rr.r_star > rr.t_star_0);
  CHECK(rr.r_star <= 1.0);
  double sum = 0.0;
  for (double t : rr.terms) {
    CHECK(t >= 0.0);
    sum += t;
  }
  CHECK(sum == doctest::Approx(rr.r_star).epsilon(1e-14));

  // The five-term construction reproduces the published regression values.
  ReductionResult r5 = reduction_factor_n_terms(altamont, 5);
  CHECK(r5.n_terms == 5);
  CHECK(r5.r_star == doctest::Approx(0.2496).epsilon(5e-4 / 0.2496));
  CHECK(1.0 / reduction_factor_n_terms(with_interval(altamont, 14.0), 5).r_star ==
        doctest::Approx(6.9).epsilon(0.1 / 6.9));
  CHECK(1.0 / reduction_factor_n_terms(with_interval(altamont, 2.0), 5).r_star ==
        doctest::Approx(2.1).epsilon(0.05 / 2.1));
  CHECK(1.0 / reduction_factor_n_terms(with_interval(altamont, 1.0), 5).r_star ==
        doctest::Approx(1.8).epsilon(0.05 / 1.8));

  // Perfect search of new carcasses only.
  AcmeParams perfect{{1.0, 0.1}, {0.0, 0.0}, 0.0, 7.0};
  ReductionResult pr = reduction_factor(perfect, 1e-6);
  CHECK(pr.r_star == doctest::Approx(-std::expm1(-0.7) / 0.7).epsilon(1e-10));
  CHECK(pr.n_terms == 1);

  CHECK_THROWS_AS(reduction_factor(altamont, 0.0), std::domain_error);
  CHECK_THROWS_AS(reduction_factor(altamont, 0.5), std::domain_error);
}

TEST_CASE("reduction factor monotone in each parameter") {
  auto rstar = [](const AcmeParams& p) { return reduction_factor(p, 1e-6).r_star; };
  double base = rstar(altamont);
  for (double I : {8.0, 10.0, 14.0}) CHECK(rstar(with_interval(altamont, I)) < base);
  AcmeParams p = altamont;
  p.discovery.a += 0.3;
  CHECK(rstar(p) < base);
  p = altamont;
  p.discovery.b += 0.03;
  CHECK(rstar(p) < base);
  p = altamont;
  p.removal.rho += 0.04;
  CHECK(rstar(p) < base);
  p = altamont;
  p.bleed -= 0.2;
  CHECK(rstar(p) < base);
  p = altamont;
  p.bleed = 1.0;
  CHECK(rstar(p) > base);
}

TEST_CASE("constant-case reduction") {
  // bleed = 0 collapses to the no-carryover denominator.
  for (double s : {0.2, 0.5, 0.9}) {
    for (double ratio : {0.3, 1.0, 4.0}) {
      double t_hat = 10.0, I = t_hat * ratio;
      double r0 = reduction_constant_case(s, t_hat, I, 0.0);
      CHECK(r0 == doctest::Approx(s * t_hat * -std::expm1(-I / t_hat) / I).epsilon(1e-12));
      // bleed = 1/(1-s) gives the steady-state reduction s t_hat / I.
      double re = reduction_constant_case(s, t_hat, I, 1.0 / (1.0 - s));
      CHECK(re == doctest::Approx(s * t_hat / I).epsilon(1e-12));
      CHECK(1.0 / re == doctest::Approx(erickson(1.0, {s, t_hat, I})).epsilon(1e-12));
    }
  }
  // bleed = 1 matches the full-carryover estimator.
  double r1 = reduction_constant_case(0.5, 10.0, 7.0, 1.0);
  CHECK(1.0 / r1 == doctest::Approx(shoemaker(1.0, {0.5, 10.0, 7.0})).epsilon(1e-12));

  // Divergent geometric series rejected.
  CHECK_THROWS_AS(reduction_constant_case(0.01, 10.0, 0.001, 1.0 / (1.0 - 0.01) + 1.0),
                  std::domain_error);

  // With alpha=1 and b=0 the full series agrees with the closed form.
  AcmeParams p{{1.0, 0.1}, {0.7, 0.0}, 0.6, 7.0};
  double series = reduction_factor(p, 1e-9).r_star;
  double closed = reduction_constant_case(std::exp(-0.7), 10.0, 7.0, 0.6);
  CHECK(series == doctest::Approx(closed).epsilon(1e-8));
}

TEST_CASE("T*_0 never exceeds R*") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    AcmeParams p{{0.5 + 1.5 * u01(rng), 0.02 + 0.3 * u01(rng)},
                 {0.5 + 1.5 * u01(rng), 0.1 * u01(rng)},
                 u01(rng),
                 1.0 + 10.0 * u01(rng)};
    ReductionResult rr = reduction_factor(p, 1e-3);
    CHECK(rr.t_star_0 <= rr.r_star);
    CHECK(rr.r_star <= 1.0);
    CHECK(rr.r_star > 0.0);
  }
}
