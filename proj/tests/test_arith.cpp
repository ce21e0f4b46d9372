#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qtwist/arith.hpp"
#include "qtwist/error.hpp"
#include "qtwist/parallel.hpp"

using namespace qtwist;
using namespace qtwist::arith;

TEST_SUITE("arith") {
  TEST_CASE("sieve_primes small bounds") {
    CHECK(sieve_primes(10).primes == std::vector<std::uint32_t>{2, 3, 5, 7});
    CHECK(sieve_primes(2).primes == std::vector<std::uint32_t>{2});
    CHECK(sieve_primes(100).size() == 25);
    CHECK_THROWS_AS(sieve_primes(1), DomainError);
    CHECK_THROWS_AS(sieve_primes(1'000'000'000, 1024), CapacityError);
  }

  TEST_CASE("sieve_primes matches trial division up to 1e5") {
    const auto t = sieve_primes(100000);
    std::vector<std::uint32_t> expect;
    for (std::uint32_t n = 2; n <= 100000; ++n)
      if (oracle::is_prime(n)) expect.push_back(n);
    CHECK(t.primes == expect);
    double worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      worst = std::max(worst, std::abs(t.logp[i] - std::log(static_cast<double>(t.primes[i]))) /
                                  std::log(static_cast<double>(t.primes[i])));
      CHECK(t.inv_sqrtp[i] == doctest::Approx(1.0 / std::sqrt(static_cast<double>(t.primes[i]))).epsilon(1e-15));
    }
    CHECK(worst <= 1e-14);
  }

  TEST_CASE("sieve crosses segment boundaries") {
    const auto t = sieve_primes(600000);
    CHECK(t.size() == 49098);  // pi(6e5)
    CHECK(t.count_upto(262144) == sieve_primes(262144).size());
  }

  TEST_CASE("squarefree_sieve") {
    const auto m = squarefree_sieve(100000);
    CHECK_FALSE(m.squarefree(12));
    CHECK(m.squarefree(30));
    CHECK(m.mobius[30] == -1);
    for (std::uint64_t d = 1; d <= 100000; ++d) {
      bool sf = true;
      int k = 0;
      std::uint64_t n = d;
      for (std::uint64_t q = 2; q * q <= n; ++q) {
        if (n % q) continue;
        n /= q;
        ++k;
        if (n % q == 0) sf = false;
        while (n % q == 0) n /= q;
      }
      if (n > 1) ++k;
      REQUIRE(m.squarefree(d) == sf);
      REQUIRE(m.mobius[d] == (sf ? (k % 2 ? -1 : 1) : 0));
      REQUIRE(m.mobius[d] * m.mobius[d] == m.mask[d]);
    }
  }

  TEST_CASE("kronecker examples and Euler criterion") {
    CHECK(kronecker(1, 3) == 1);
    CHECK(kronecker(2, 7) == 1);
    CHECK_THROWS_AS(kronecker(0, 0), DomainError);
    for (std::int64_t p = 3; p <= 50; ++p) {
      if (!oracle::is_prime(p)) continue;
      for (std::int64_t d = -50; d <= 50; ++d) REQUIRE(kronecker(d, p) == oracle::euler(d, p));
    }
    // Conventions at n = 2, n = -1, n = 0.
    CHECK(kronecker(1, 2) == 1);
    CHECK(kronecker(3, 2) == -1);
    CHECK(kronecker(5, 2) == -1);
    CHECK(kronecker(7, 2) == 1);
    CHECK(kronecker(4, 2) == 0);
    CHECK(kronecker(-3, -1) == -1);
    CHECK(kronecker(3, -1) == 1);
    CHECK(kronecker(1, 0) == 1);
    CHECK(kronecker(2, 0) == 0);
  }

  TEST_CASE("kronecker is completely multiplicative in each argument") {
    for (std::int64_t d1 = -100; d1 <= 100; ++d1)
      for (std::int64_t d2 = -100; d2 <= 100; d2 += 7)
        for (std::int64_t n = 1; n <= 100; n += 3) {
          if (d1 * d2 == 0) continue;
          REQUIRE(kronecker(d1 * d2, n) == kronecker(d1, n) * kronecker(d2, n));
        }
    for (std::int64_t d = -100; d <= 100; ++d)
      for (std::int64_t n1 = 1; n1 <= 100; n1 += 5)
        for (std::int64_t n2 = 1; n2 <= 100; n2 += 7) {
          if (d == 0) continue;
          REQUIRE(kronecker(d, n1 * n2) == kronecker(d, n1) * kronecker(d, n2));
        }
  }

  TEST_CASE("kronecker is periodic mod |d| on odd arguments for discriminants") {
    for (std::int64_t d = -60; d <= 60; ++d) {
      if (d == 0 || (oracle::mod(d, 4) != 0 && oracle::mod(d, 4) != 1)) continue;
      const std::int64_t m = d < 0 ? -d : d;
      for (std::int64_t n = 1; n <= 400; n += 2) REQUIRE(kronecker(d, n) == kronecker(d, n + 2 * m));
    }
  }

  TEST_CASE("weights") {
    const auto tri = WeightSpec::triangular();
    const auto ex = WeightSpec::exponential();
    const auto ga = WeightSpec::gaussian(2.0);
    CHECK(tri(0.25) == 0.75);
    CHECK(tri(3.0) == 0.0);
    CHECK(ex(1.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(ga(1.0) == doctest::Approx(std::exp(-1.0 / 8.0)));
    CHECK(ga(0.0) > 0.0);
    CHECK(parse_weight("gaussian:2") == ga);
    CHECK(parse_weight("gaussian2d:1,3") == WeightSpec::gaussian2d(1.0, 3.0));
    CHECK_THROWS_AS(parse_weight("box"), ConfigError);
    CHECK_THROWS_AS(parse_weight("gaussian:-1"), ConfigError);
    for (double x : {0.0, 0.3, 1.0, 5.0}) {
      CHECK(tri(x) >= 0.0);
      CHECK(ex(x) >= 0.0);
      CHECK(ga(x) >= 0.0);
    }
  }

  TEST_CASE("mellin closed forms") {
    const auto tri = WeightSpec::triangular();
    CHECK(mellin(tri, 0.5).real() == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(mellin(tri, 1.0).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mellin(WeightSpec::exponential(), 1.0).real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(mellin(tri, 0.0), DomainError);
    CHECK_THROWS_AS(mellin(tri, -1.0), DomainError);
    CHECK_THROWS_AS(mellin(WeightSpec::exponential(), -2.0), DomainError);
    CHECK_THROWS_AS(mellin(WeightSpec::gaussian2d(1, 1), 1.0), DomainError);
    CHECK(mellin_gk(tri, 2, 1.0).real() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(mellin_gk(tri, 3, 1.5).real() == doctest::Approx(4.0 / 9.0).epsilon(1e-15));
    const std::complex<double> s(0.7, 2.1);
    CHECK(std::abs(mellin_gk(WeightSpec::exponential(), 1, s) - mellin(WeightSpec::exponential(), s)) == 0.0);
  }

  TEST_CASE("triangular mellin times s(s+1) is one at random points") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> re(0.0, 2.0), im(-20.0, 20.0);
    for (int i = 0; i < 100; ++i) {
      std::complex<double> s(re(rng), im(rng));
      if (s.real() == 0.0) continue;
      CHECK(std::abs(mellin(WeightSpec::triangular(), s) * s * (s + 1.0) - 1.0) < 1e-14);
    }
  }

  TEST_CASE("mellin agrees with quadrature at real points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> re(0.2, 2.0);
    for (const auto& w : {WeightSpec::triangular(), WeightSpec::exponential(), WeightSpec::gaussian(1.0),
                          WeightSpec::gaussian(2.5)}) {
      for (int i = 0; i < 20; ++i) {
        const double s = re(rng);
        const double lo = w.kind == WeightKind::Triangular ? 1.0 : 0.0;
        double q = 0.0;
        if (w.kind == WeightKind::Triangular) {
          // Substitute x = u^(1/s) to remove the endpoint singularity.
          q = oracle::integrate([&](double u) { return w(std::pow(u, 1.0 / s)) / s; }, 0.0, lo);
        } else {
          q = oracle::integrate_to_inf([&](double x) { return std::pow(x, s - 1.0) * w(x); }, 0.0);
        }
        CHECK(std::abs(mellin(w, s).real() - q) < 1e-8);
      }
    }
  }

  TEST_CASE("mellin agrees with quadrature at complex points") {
    // Int_0^inf x^(s-1) e^-x dx with s = sigma + i t, split into real and imaginary parts.
    for (double t : {0.5, 3.0}) {
      for (double sigma : {0.4, 1.3}) {
        auto part = [&](bool imag) {
          return oracle::integrate_to_inf(
              [&](double x) {
                if (x == 0.0) return 0.0;
                const double m = std::pow(x, sigma - 1.0) * std::exp(-x);
                return imag ? m * std::sin(t * std::log(x)) : m * std::cos(t * std::log(x));
              },
              0.0);
        };
        const auto g = mellin(WeightSpec::exponential(), {sigma, t});
        CHECK(std::abs(g.real() - part(false)) < 1e-8);
        CHECK(std::abs(g.imag() - part(true)) < 1e-8);
      }
    }
  }

  TEST_CASE("gamma accuracy against lgamma on the real line") {
    for (double x = -0.45; x <= 3.0; x += 0.05) {
      if (std::abs(x) < 1e-9) continue;
      const double ref = std::tgamma(x);
      CHECK(std::abs(arith::gamma(x).real() - ref) <= 1e-12 * std::abs(ref));
    }
  }

  TEST_CASE("fourier_hat") {
    const auto g1 = WeightSpec::gaussian(1.0);
    CHECK(fourier_hat(g1, 0.0) == doctest::Approx(std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-15));
    double prev = fourier_hat(g1, 0.0);
    for (double xi = 0.1; xi < 3.0; xi += 0.1) {
      const double v = fourier_hat(g1, xi);
      CHECK(v < prev);
      prev = v;
    }
    CHECK(fourier_hat(g1, 10.0) < 1e-300);
    const double xi = 0.7;
    const double q = oracle::integrate([&](double t) { return g1(t) * std::cos(2.0 * std::numbers::pi * xi * t); },
                                       -12.0, 12.0);
    CHECK(std::abs(fourier_hat(g1, xi) - q) < 1e-10);
    CHECK_THROWS_AS(fourier_hat(WeightSpec::triangular(), 0.1), DomainError);
  }

  TEST_CASE("expint_e1 against quadrature") {
    for (double x : {0.5, 1.0, 5.0, 0.01, 30.0}) {
      const double q = oracle::integrate_to_inf([&](double t) { return std::exp(-x * t) / t; }, 1.0);
      CHECK(std::abs(expint_e1(x) - q) <= 1e-12 * q);
    }
  }

  TEST_CASE("tree_sum is independent of thread count") {
    std::vector<double> v(100003);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& x : v) x = u(rng) * std::pow(10.0, u(rng) * 8);
    const auto f = [&](std::size_t i) { return v[i]; };
    set_num_threads(1);
    const double a = parallel_sum(v.size(), 64, f);
    set_num_threads(4);
    const double b = parallel_sum(v.size(), 64, f);
    set_num_threads(0);
    CHECK(a == b);
  }
}
