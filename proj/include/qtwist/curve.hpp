#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qtwist/arith.hpp"

namespace qtwist::curve {

using BigInt = boost::multiprecision::cpp_int;

/// y^2 = x^3 + a x + b with fixture-supplied conductor and root number.
struct EllipticCurve {
  std::string label;
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::uint64_t conductor = 1;
  int root_number = 1;
  /// a_p supplied by the fixture at p in {2, 3}, where the short model cannot
  /// be used for point counting.
  std::map<std::uint32_t, int> ap_overrides;

  BigInt discriminant() const;
};

/// -16 (4 a^3 + 27 b^2), exact.
BigInt discriminant(std::int64_t a, std::int64_t b);

/// True when some prime p has p^4 | a and p^6 | b.
bool is_nonminimal(std::int64_t a, std::int64_t b);

/// Validates and returns a curve. Throws FixtureError on a singular or
/// non-minimal model, a root number outside {-1, 1}, a conductor prime not
/// dividing the discriminant, or an override at p not in {2, 3}.
EllipticCurve make_curve(std::string label, std::int64_t a, std::int64_t b, std::uint64_t conductor,
                         int root_number, std::map<std::uint32_t, int> ap_overrides = {});

enum class Reduction : std::int8_t { Good = 0, Split = 1, Nonsplit = 2, Additive = 3 };
const char* to_string(Reduction r);

struct BadPrimeAp {
  int ap = 0;
  Reduction type = Reduction::Additive;
};

/// -sum_x ((x^3 + a x + b)/p) for an odd prime p: the trace of the model's
/// reduction (also valid at bad primes where the model is minimal).
int ap_char_sum(std::int64_t a, std::int64_t b, std::uint32_t p);

/// Shanks-Mestre baby-step/giant-step trace for a good odd prime p >= 1000.
/// Falls back to ap_char_sum if no point pins the group order.
int ap_bsgs(std::int64_t a, std::int64_t b, std::uint32_t p);

/// Trace at a good prime via the quadratic-character sum. Throws DomainError
/// if p | 2 disc.
int ap_good(const EllipticCurve& e, std::uint64_t p);

/// Reduction type and a_p in {-1, 0, 1} at a bad prime p >= 5 dividing N.
BadPrimeAp ap_bad(const EllipticCurve& e, std::uint64_t p);

/// a_p(E) at any prime: override, good-prime count, or bad-prime classification.
int ap_of(const EllipticCurve& e, std::uint64_t p);

/// Immutable per-curve table of a_p for every prime up to `bound`.
struct ApTable {
  std::string label;
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::uint64_t conductor = 1;
  std::uint64_t bound = 0;
  std::shared_ptr<const arith::PrimeTable> primes;
  std::vector<std::int32_t> ap;
  std::vector<Reduction> reduction;

  std::size_t size() const { return ap.size(); }
  /// a_p at a tabulated prime; throws DomainError otherwise.
  int ap_at(std::uint64_t p) const;
  std::size_t index_of(std::uint64_t p) const;
  bool good_at_index(std::size_t i) const { return reduction[i] == Reduction::Good; }
};

/// Table over all p <= P. `primes` may be supplied to share a sieve; it must
/// cover P. Missing p in {2, 3} overrides surface as FixtureError.
ApTable build_ap_table(const EllipticCurve& e, std::uint64_t P,
                       std::shared_ptr<const arith::PrimeTable> primes = nullptr);

/// Normalized Hecke eigenvalue lambda_E(n) = a_n / sqrt(n).
double hecke_lambda(const ApTable& table, std::uint64_t n);

/// alpha_p^k + beta_p^k for 0 <= k <= 8.
double sym_power_sum(const ApTable& table, std::uint64_t p, int k);
/// Same, from the table index (no lookup).
double sym_power_sum_at(const ApTable& table, std::size_t index, int k);

/// a_p(E_d) for the twist d y^2 = x^3 + a x + b.
int twist_ap(const EllipticCurve& e, std::int64_t d, std::uint64_t p);

/// eps(E_d) = (d / -N) eps(E) for (d, N) = 1.
int root_number_coprime(const EllipticCurve& e, std::int64_t d);

/// eps(E_d) = chi_d(-N/g) mu(g) a_g eps(E), g = (d, N), for squarefree N.
/// a_g is the product of the unnormalized bad-prime traces; a non-unit product
/// raises DomainError instead of being rounded.
int root_number_squarefree_n(const EllipticCurve& e, std::int64_t d);

struct ConductorIssue {
  std::uint64_t p = 0;
  int expected_exponent = 0;
  int fixture_exponent = 0;
  std::string reason;
};

struct ConductorReport {
  bool ok = true;
  std::vector<ConductorIssue> offending;
  std::vector<std::string> warnings;
};

/// Checks the fixture conductor exponent at every p >= 5 dividing the
/// discriminant; p in {2, 3} produce warnings only.
ConductorReport conductor_validate(const EllipticCurve& e);
/// Throws FixtureError listing offending primes if validation fails.
void require_valid_conductor(const EllipticCurve& e);

/// Quadratic twist E_d with the data needed for its L-series.
struct TwistedCurve {
  EllipticCurve base;
  std::int64_t d = 1;
  /// Fundamental discriminant of Q(sqrt d) (1 for d = 1).
  std::int64_t disc = 1;
  std::uint64_t conductor = 1;
  int root_number = 1;
};

/// Builds E_d for squarefree d. The conductor is disc^2 N / (disc, N), which
/// requires (disc, N) = 1 or a squarefree N sharing only odd primes with disc.
TwistedCurve make_twist(const EllipticCurve& e, std::int64_t d);

/// a_p(E_d) from the base table, using the primitive character (disc / .).
int twisted_ap(const TwistedCurve& t, const ApTable& table, std::size_t index);

}  // namespace qtwist::curve
