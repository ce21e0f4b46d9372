#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace qtwist::arith {

using cplx = std::complex<double>;

/// Primes up to a bound together with the per-prime constants every prime
/// sum needs. Immutable after construction.
struct PrimeTable {
  std::uint64_t bound = 0;
  std::vector<std::uint32_t> primes;
  std::vector<double> logp;
  std::vector<double> inv_sqrtp;

  std::size_t size() const { return primes.size(); }
  /// Number of primes <= x (x may exceed the bound; the count is then capped).
  std::size_t count_upto(std::uint64_t x) const;
  /// Index of prime p, or npos if p is not a tabulated prime.
  std::size_t index_of(std::uint64_t p) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Default memory budget for sieve output, in bytes.
inline constexpr std::uint64_t kDefaultMemoryBudget = 2ull << 30;

/// Segmented Eratosthenes sieve, parallel by segment.
/// Throws CapacityError when the estimated table size exceeds `memory_budget`.
PrimeTable sieve_primes(std::uint64_t P, std::uint64_t memory_budget = kDefaultMemoryBudget);

/// mu^2 and mu for 1 <= d <= D (index 0 unused).
struct SquarefreeMask {
  std::uint64_t bound = 0;
  std::vector<std::uint8_t> mask;
  std::vector<std::int8_t> mobius;

  bool squarefree(std::uint64_t d) const { return mask[d] != 0; }
};

SquarefreeMask squarefree_sieve(std::uint64_t D);

/// Smallest prime factor for 0..n (spf[0] = spf[1] = 0).
std::vector<std::uint32_t> smallest_prime_factors(std::uint32_t n);

/// Kronecker symbol (d/n) with the usual extension to n <= 0 and n even.
/// Throws DomainError for (0, 0).
int kronecker(std::int64_t d, std::int64_t n);

/// Jacobi symbol (a/n) for odd n > 0.
int jacobi(std::uint64_t a, std::uint64_t n);

std::uint64_t gcd(std::uint64_t a, std::uint64_t b);
bool is_squarefree(std::uint64_t n);
/// Distinct prime factors by trial division (n < 2^63).
std::vector<std::uint64_t> prime_factors(std::uint64_t n);
bool is_prime(std::uint64_t n);

// ---------------------------------------------------------------------------
// Weights

enum class WeightKind { Triangular, Exponential, Gaussian, Gaussian2D };

/// Concrete weight menu. Triangular/exponential serve as prime weights g (and
/// h); gaussian kinds serve as family weights w with closed-form Fourier
/// transforms.
struct WeightSpec {
  WeightKind kind = WeightKind::Triangular;
  double sigma = 1.0;
  double sigma2 = 1.0;
  /// Overall scale factor; every transform is linear in it.
  double amplitude = 1.0;

  static WeightSpec triangular() { return {WeightKind::Triangular, 1.0, 1.0, 1.0}; }
  static WeightSpec exponential() { return {WeightKind::Exponential, 1.0, 1.0, 1.0}; }
  static WeightSpec gaussian(double s) { return {WeightKind::Gaussian, s, s, 1.0}; }
  static WeightSpec gaussian2d(double s1, double s2) { return {WeightKind::Gaussian2D, s1, s2, 1.0}; }
  WeightSpec scaled(double factor) const {
    WeightSpec w = *this;
    w.amplitude *= factor;
    return w;
  }

  /// One-variable evaluation. Gaussian2D evaluates its first factor.
  double operator()(double x) const;
  double operator()(double x, double y) const;

  /// Point beyond which the weight is below 1e-16 (or identically zero).
  double support_cutoff() const;
  /// Integral of the weight over [-1, 1] using the even extension w(|t|).
  double mass_symmetric_unit() const;

  std::string id() const;
  bool operator==(const WeightSpec&) const = default;
};

/// Parses "triangular", "exponential", "gaussian", "gaussian:2.5", "gaussian2d:1,2".
WeightSpec parse_weight(const std::string& text);

/// Mellin transform of the weight. Throws DomainError at poles.
cplx mellin(const WeightSpec& weight, cplx s);
/// Mellin transform of g_k(x) = g(x^k): (1/k) Mg(s/k).
cplx mellin_gk(const WeightSpec& weight, int k, cplx s);
/// Fourier transform with e(x) = exp(2 pi i x) convention; gaussian kinds only.
double fourier_hat(const WeightSpec& weight, double xi);

// ---------------------------------------------------------------------------
// Special functions

/// Complex Gamma via a g=7, 9-term Lanczos series with reflection for Re s < 1/2.
cplx gamma(cplx s);
/// Exponential integral E1(x), x > 0.
double expint_e1(double x);

}  // namespace qtwist::arith
