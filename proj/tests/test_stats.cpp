#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qtwist/error.hpp"
#include "qtwist/lfun.hpp"
#include "qtwist/primesum.hpp"
#include "qtwist/stats.hpp"

using namespace qtwist;
using namespace qtwist::stats;
using arith::WeightSpec;

namespace {

/// Random ordinates for every twist of the family (seeded, ascending).
lfun::ZeroData synthetic_zeros(const primesum::TwistFamily& fam, int per_twist, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gap(0.2, 2.0);
  lfun::ZeroData z;
  for (auto d : fam.d) {
    lfun::TwistZeros tz{d, {}, {}};
    double g = 0.0;
    for (int k = 0; k < per_twist; ++k) {
      g += gap(rng);
      tz.gamma.push_back(g);
      tz.multiplicity.push_back(1);
    }
    z.twists.push_back(std::move(tz));
  }
  std::sort(z.twists.begin(), z.twists.end(), [](const auto& a, const auto& b) { return a.d < b.d; });
  return z;
}

/// Unfolded sum over both gamma and -gamma, kept complex.
std::complex<double> t_oracle(const lfun::ZeroData& z, const primesum::TwistFamily& fam, double y) {
  std::complex<double> s = 0.0;
  for (std::size_t j = 0; j < fam.size(); ++j)
    for (const double g : z.find(fam.d[j])->gamma)
      for (const double sg : {g, -g}) {
        const std::complex<double> rho(0.5, sg);
        s += fam.weight[j] * std::exp(std::complex<double>(0.0, y * sg)) / (rho * (rho + 1.0));
      }
  return s;
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("growth fit recovers a planted power law") {
    std::vector<double> x{10, 100, 1000, 10000}, y;
    for (double v : x) y.push_back(3.0 * std::pow(v, 0.4));
    const auto f = fit_growth(x, y);
    CHECK(f.beta == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(std::exp(f.log_constant) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(f.residual < 1e-12);
    CHECK(f.x == x);
    CHECK_THROWS_AS(fit_growth({1, 2, 3}, {1, 2, 3}), DomainError);
    CHECK_THROWS_AS(fit_growth({1, 2, 3, 4}, {1, 0, 3, 4}), DomainError);
  }

  TEST_CASE("geometric and uniform grids") {
    const auto g = geometric_grid(1000, 100000, 5);
    CHECK(g == std::vector<std::int64_t>{1000, 3162, 10000, 31623, 100000});
    const auto u = uniform_grid(2.0, 3.0, 0.1);
    CHECK(u.size() == 11);
    CHECK(u.back() == doctest::Approx(3.0));
    CHECK_THROWS_AS(uniform_grid(2.0, 1.0, 0.1), DomainError);
    CHECK_THROWS_AS(geometric_grid(0, 10, 3), DomainError);
  }

  TEST_CASE("root-number partial sums move by exactly one per twist") {
    for (const auto& e : oracle::fixtures()) {
      const auto r = root_number_sum(e, {50, 100, 200, 400}, RootNumberMode::Coprime);
      std::int64_t prev = 0;
      for (const auto& s : r.steps) {
        REQUIRE(std::llabs(s.partial - prev) == 1);
        REQUIRE(s.root_number == curve::root_number_coprime(e, s.d));
        prev = s.partial;
      }
      // Grid sums against a direct count.
      for (std::size_t i = 0; i < r.grid.size(); ++i) {
        std::int64_t direct = 0, count = 0;
        for (std::int64_t d = -r.grid[i]; d <= r.grid[i]; ++d) {
          if (d == 0 || !arith::is_squarefree(std::llabs(d)) || std::gcd<std::uint64_t>(std::llabs(d), e.conductor) != 1)
            continue;
          direct += curve::root_number_coprime(e, d);
          ++count;
        }
        CHECK(r.sums[i] == direct);
        CHECK(r.counts[i] == count);
        CHECK(r.running_max[i] >= std::max<std::int64_t>(1, std::llabs(r.sums[i])));
      }
      REQUIRE(r.fit.has_value());
    }
  }

  TEST_CASE("all-squarefree mode uses the shared-prime formula") {
    const auto e = oracle::fixture("11a1");
    const auto r = root_number_sum(e, {100}, RootNumberMode::AllSquarefree);
    for (const auto& s : r.steps) REQUIRE(s.root_number == curve::root_number_squarefree_n(e, s.d));
    CHECK(std::any_of(r.steps.begin(), r.steps.end(), [](const auto& s) { return s.d % 11 == 0; }));
    CHECK_FALSE(r.fit.has_value());
    CHECK_THROWS_AS(root_number_sum(oracle::fixture("32a1"), {10}, RootNumberMode::AllSquarefree), DomainError);
    CHECK_THROWS_AS(root_number_sum(e, {100, 50}, RootNumberMode::Coprime), DomainError);
  }

  TEST_CASE("rank distribution") {
    const auto e = oracle::fixture("11a1");
    const auto t = curve::build_ap_table(e, lfun::family_table_bound(e, 20));
    const auto classes = lfun::classify_family(e, t, 20);
    const auto r = rank_distribution(classes);
    CHECK(r.total == static_cast<std::int64_t>(classes.size()));
    CHECK(r.counts[0] + r.counts[1] + r.counts[2] == r.total);
    CHECK(r.proportions[0] + r.proportions[1] + r.proportions[2] == doctest::Approx(1.0));
    CHECK(r.parity_mismatches == 0);
    CHECK_THROWS_AS(rank_distribution({}), DomainError);
  }

  TEST_CASE("squarefree character sums") {
    const auto e = oracle::fixture("37a1");
    const auto w = WeightSpec::gaussian(1.0);
    // n = 1: the direct sum is the weighted admissible count.
    const auto r1 = squarefree_char_sum(e, 1, 500, w);
    double count = 0.0;
    std::int64_t admissible = 0;
    for (std::int64_t m = 1; m <= 500; ++m) {
      if (!arith::is_squarefree(m) || m % 37 == 0) continue;
      count += 2.0 * w(m / 500.0);
      admissible += 2;
    }
    CHECK(r1.admissible == admissible);
    CHECK(std::abs(r1.direct - count) <= 1e-13 * count);
    CHECK(r1.kappa == 1);
    CHECK(r1.main_term == doctest::Approx(500.0 * 6.0 / (std::numbers::pi * std::numbers::pi) *
                                          w.mass_symmetric_unit() / (1.0 + 1.0 / 37.0))
                              .epsilon(1e-13));
    // n prime: no main term, sum small relative to D.
    const auto r5 = squarefree_char_sum(e, 5, 5000, w);
    CHECK(r5.kappa == 0);
    CHECK(r5.main_term == 0.0);
    CHECK(std::abs(r5.direct) < 0.05 * 5000);
    // n = 9: kappa = 1 with the (1 + 1/3)^-1 factor.
    const auto r9 = squarefree_char_sum(e, 9, 20000, w);
    CHECK(r9.kappa == 1);
    CHECK(std::abs(r9.residual) < 0.02 * r9.main_term);
    CHECK_THROWS_AS(squarefree_char_sum(e, 0, 10, w), DomainError);
    const auto scan = squarefree_char_sum_scan(e, 1, {1000, 2000, 4000, 8000}, w);
    CHECK(scan.residual_fit.has_value());
    CHECK(scan.residual_fit->beta < 1.0);
  }

  TEST_CASE("omega moments against factorization") {
    const auto r = omega_moments(10000, 1);
    std::vector<std::uint64_t> hist;
    curve::BigInt m1 = 0, m2 = 0;
    for (std::uint64_t d = 1; d <= 10000; ++d) {
      const auto k = static_cast<std::size_t>(oracle::omega(d));
      if (k >= hist.size()) hist.resize(k + 1, 0);
      ++hist[k];
      m1 += k;
      m2 += k * k;
    }
    CHECK(r.histogram == hist);
    CHECK(r.moment == m1);
    CHECK(omega_moments(10000, 2).moment == m2);
    CHECK(r.bound == doctest::Approx(2.0 * 10000 * std::log(std::log(10000.0))));
    // Sum of omega(d) for d <= 16 by hand: 11 up to 10, then 1+2+1+2+2+1.
    CHECK(omega_moments(16, 1).moment == 20);
    CHECK(omega_moments(1'000'000, 3).ratio <= 3.0);
    CHECK_THROWS_AS(omega_moments(10, 1), DomainError);
    CHECK_THROWS_AS(omega_moments(100, 0), DomainError);
    CHECK_THROWS_AS(omega_moments(1000, 1, 100), CapacityError);
  }

  TEST_CASE("omega rank bound") {
    CHECK(omega_rank_bound(7, 3) == 21);
    CHECK(omega_rank_bound(-30, 0) == 54);
    CHECK(omega_rank_bound(1, 5) == 5);
    CHECK_THROWS_AS(omega_rank_bound(12, 0), DomainError);
  }

  TEST_CASE("T statistic against the unfolded sum") {
    const auto fam = primesum::make_family(11, 20, WeightSpec::gaussian(1.0), true, primesum::Signs::Both);
    const auto z = synthetic_zeros(fam, 15, 1);
    const auto y = uniform_grid(2.0, 40.0, 0.5);
    const auto t = t_statistic(z, fam, 20, y);
    REQUIRE(t.values.size() == y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const auto ref = t_oracle(z, fam, y[i]);
      CHECK(std::abs(ref.imag()) < 1e-12);
      CHECK(std::abs(t.values[i].real() - ref.real()) < 1e-12);
    }
    CHECK(t.max_imag <= 1e-12);
  }

  TEST_CASE("T statistic basic properties") {
    // Empty family: all zeros.
    const auto t0 = t_statistic({}, {}, 10, {1.0, 2.0});
    CHECK(t0.values[0] == std::complex<double>(0.0));
    CHECK(t0.variance == 0.0);

    // Single gamma, single d: modulus bound.
    primesum::TwistFamily one{{5}, {0.7}};
    lfun::ZeroData z1;
    z1.twists.push_back({5, {14.1}, {1}});
    const std::complex<double> rho(0.5, 14.1);
    const auto t1 = t_statistic(z1, one, 10, uniform_grid(0.0, 50.0, 0.25));
    for (const auto& v : t1.values) CHECK(std::abs(v) <= 2.0 * 0.7 / std::abs(rho * (rho + 1.0)) + 1e-15);

    // Linearity in the weights: doubling them doubles T and quadruples the variance.
    const auto fam = primesum::make_family(37, 30, WeightSpec::gaussian(1.0), true, primesum::Signs::Both);
    const auto z = synthetic_zeros(fam, 10, 2);
    auto fam2 = fam;
    for (auto& w : fam2.weight) w *= 2.0;
    const auto y = uniform_grid(2.0, 100.0, 0.1);
    const auto a = t_statistic(z, fam, 30, y), b = t_statistic(z, fam2, 30, y);
    for (std::size_t i = 0; i < y.size(); ++i) REQUIRE(b.values[i] == 2.0 * a.values[i]);
    CHECK(b.variance == doctest::Approx(4.0 * a.variance).epsilon(1e-14));
    CHECK(a.variance > 0.0);

    // Missing twist: DataError names it.
    lfun::ZeroData partial = z;
    partial.twists.erase(partial.twists.begin());
    try {
      t_statistic(partial, fam, 30, y);
      FAIL("expected DataError");
    } catch (const DataError& err) {
      CHECK(std::string(err.what()).find(std::to_string(z.twists.front().d)) != std::string::npos);
    }
    CHECK_THROWS_AS(t_statistic(z, fam, 30, {2.0, 1.0}), DomainError);
  }

  TEST_CASE("T statistic mean is small over a long grid") {
    const auto fam = primesum::make_family(11, 40, WeightSpec::gaussian(1.0), true, primesum::Signs::Both);
    const auto z = synthetic_zeros(fam, 20, 3);
    const auto y = uniform_grid(2.0, 1000.0, 0.1);
    const auto t = t_statistic(z, fam, 40, y);
    CHECK(std::abs(t.mean) < 5.0 / std::sqrt(static_cast<double>(y.size())) * std::sqrt(t.variance));
  }

  TEST_CASE("variance scaling fit") {
    const auto big = primesum::make_family(11, 80, WeightSpec::gaussian(1.0), true, primesum::Signs::Both);
    const auto z = synthetic_zeros(big, 10, 4);
    const auto y = uniform_grid(2.0, 200.0, 0.1);
    const auto v = t_variance_scaling(z, 11, {20, 40, 80}, WeightSpec::gaussian(1.0), y);
    CHECK(v.D.size() == 3);
    CHECK(v.constant > 0.0);
    CHECK(v.residual >= 0.0);
    CHECK(v.zero_counts.size() == big.size());
    for (double var : v.variance) CHECK(var > 0.0);
    const auto v2 = t_variance_scaling(z, 11, {20, 40, 80}, WeightSpec::gaussian(1.0).scaled(2.0), y);
    for (std::size_t i = 0; i < 3; ++i) CHECK(v2.variance[i] == doctest::Approx(4.0 * v.variance[i]).epsilon(1e-13));
  }

  TEST_CASE("multiplicity census") {
    lfun::ZeroData z;
    z.twists.push_back({-3, {1.0, 2.0, 5.0}, {1, 1, 1}});
    z.twists.push_back({5, {1.5, 3.0}, {1, 1}});
    CHECK(multiplicity_census(z).max_multiplicity == 1);
    CHECK(multiplicity_census(z).offending.empty());

    z.twists[1].gamma = {1.5, 5.0 + 1e-9};
    const auto dup = multiplicity_census(z);
    CHECK(dup.max_multiplicity == 2);
    REQUIRE(dup.offending.size() == 1);
    CHECK(dup.offending[0].distinct_twists == 2);

    // Monotone in tol: halving tol never grows any cluster.
    const auto fam = primesum::make_family(11, 30, WeightSpec::gaussian(1.0), true, primesum::Signs::Both);
    const auto zs = synthetic_zeros(fam, 30, 5);
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (double tol = 1.0; tol > 1e-6; tol /= 2.0) {
      const auto r = multiplicity_census(zs, tol);
      CHECK(r.max_multiplicity <= prev);
      prev = r.max_multiplicity;
    }
    CHECK(multiplicity_census({}).max_multiplicity == 0);
    CHECK_THROWS_AS(multiplicity_census(z, -1.0), DomainError);
  }
}
