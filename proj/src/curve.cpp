#include "qtwist/curve.hpp"

#include <boost/multiprecision/miller_rabin.hpp>
#include <cmath>
#include <sstream>

#include "qtwist/error.hpp"
#include "qtwist/parallel.hpp"

namespace qtwist::curve {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mod_of(std::int64_t v, u64 p) {
  const auto r = static_cast<__int128>(v) % static_cast<__int128>(p);
  return static_cast<u64>(r < 0 ? r + p : r);
}

u64 mulmod(u64 x, u64 y, u64 p) { return static_cast<u64>(static_cast<u128>(x) * y % p); }

// 4 a^3 + 27 b^2 mod p.
u64 disc_core_mod(std::int64_t a, std::int64_t b, u64 p) {
  const u64 am = mod_of(a, p), bm = mod_of(b, p);
  const u64 t1 = mulmod(4 % p, mulmod(am, mulmod(am, am, p), p), p);
  const u64 t2 = mulmod(27 % p, mulmod(bm, bm, p), p);
  return (t1 + t2) % p;
}

bool divides_disc(const EllipticCurve& e, u64 p) {
  if (p == 2) return true;
  return disc_core_mod(e.a, e.b, p) == 0;
}

int valuation(u64 n, u64 p) {
  int v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

u64 abs_u(std::int64_t v) { return v < 0 ? static_cast<u64>(-(v + 1)) + 1 : static_cast<u64>(v); }

std::string curve_name(const EllipticCurve& e) {
  std::ostringstream os;
  os << (e.label.empty() ? "curve" : e.label) << " [" << e.a << ',' << e.b << ']';
  return os.str();
}

[[noreturn]] void missing_override(const EllipticCurve& e, u64 p) {
  std::ostringstream os;
  os << curve_name(e) << ": a_" << p << " must be supplied by the fixture (ap_overrides)";
  throw FixtureError(os.str());
}

int fourth_root_bound_loop_guard(u64 n, int k) {
  // largest r with r^k <= n, small k
  auto r = static_cast<u64>(std::pow(static_cast<double>(n), 1.0 / k));
  auto pw = [&](u64 x) {
    u128 v = 1;
    for (int i = 0; i < k; ++i) v *= x;
    return v;
  };
  while (r > 0 && pw(r) > n) --r;
  while (pw(r + 1) <= n) ++r;
  return static_cast<int>(std::min<u64>(r, 1u << 30));
}

}  // namespace

const char* to_string(Reduction r) {
  switch (r) {
    case Reduction::Good: return "good";
    case Reduction::Split: return "split";
    case Reduction::Nonsplit: return "nonsplit";
    case Reduction::Additive: return "additive";
  }
  return "?";
}

BigInt discriminant(std::int64_t a, std::int64_t b) {
  const BigInt A = a, B = b;
  return BigInt(-16) * (4 * A * A * A + 27 * B * B);
}

BigInt EllipticCurve::discriminant() const { return curve::discriminant(a, b); }

bool is_nonminimal(std::int64_t a, std::int64_t b) {
  const u64 ua = abs_u(a), ub = abs_u(b);
  if (ua == 0 && ub == 0) return true;
  const int la = ua == 0 ? 1 << 30 : fourth_root_bound_loop_guard(ua, 4);
  const int lb = ub == 0 ? 1 << 30 : fourth_root_bound_loop_guard(ub, 6);
  const u64 limit = static_cast<u64>(std::min(la, lb));
  for (u64 p = 2; p <= limit; ++p) {
    if (!arith::is_prime(p)) continue;
    const u64 p2 = p * p;
    const bool a_ok = ua == 0 || ua % (p2 * p2) == 0;
    const bool b_ok = ub == 0 || ub % (p2 * p2 * p2) == 0;
    if (a_ok && b_ok) return true;
  }
  return false;
}

EllipticCurve make_curve(std::string label, std::int64_t a, std::int64_t b, std::uint64_t conductor,
                         int root_number, std::map<std::uint32_t, int> ap_overrides) {
  EllipticCurve e{std::move(label), a, b, conductor, root_number, std::move(ap_overrides)};
  const BigInt disc = e.discriminant();
  if (disc == 0) throw FixtureError(curve_name(e) + ": singular model (discriminant 0)");
  if (is_nonminimal(a, b)) throw FixtureError(curve_name(e) + ": model is not minimal (p^4 | a and p^6 | b)");
  if (root_number != 1 && root_number != -1) throw FixtureError(curve_name(e) + ": root number must be +1 or -1");
  if (conductor == 0) throw FixtureError(curve_name(e) + ": conductor must be positive");
  for (u64 q : arith::prime_factors(conductor)) {
    if (disc % q != 0) {
      std::ostringstream os;
      os << curve_name(e) << ": conductor prime " << q << " does not divide the discriminant";
      throw FixtureError(os.str());
    }
  }
  for (const auto& [p, ap] : e.ap_overrides) {
    if (p != 2 && p != 3) {
      std::ostringstream os;
      os << curve_name(e) << ": ap override at p=" << p << " (only p in {2,3} may be overridden)";
      throw FixtureError(os.str());
    }
    if (std::abs(ap) > 2.0 * std::sqrt(static_cast<double>(p)))
      throw FixtureError(curve_name(e) + ": ap override violates the Hasse bound");
  }
  return e;
}

int ap_good(const EllipticCurve& e, std::uint64_t p) {
  if (p < 3 || !arith::is_prime(p)) throw DomainError("ap_good: p must be an odd prime");
  if (divides_disc(e, p)) {
    std::ostringstream os;
    os << "ap_good: p=" << p << " divides 2*disc of " << curve_name(e);
    throw DomainError(os.str());
  }
  if (p > 0xffffffffull) throw DomainError("ap_good: p exceeds 32 bits");
  return ap_char_sum(e.a, e.b, static_cast<std::uint32_t>(p));
}

BadPrimeAp ap_bad(const EllipticCurve& e, std::uint64_t p) {
  if (p == 2 || p == 3) {
    std::ostringstream os;
    os << "ap_bad: p=" << p << " unsupported; the fixture must supply a_" << p;
    throw DomainError(os.str());
  }
  if (e.conductor % p != 0 || !divides_disc(e, p)) {
    std::ostringstream os;
    os << "ap_bad: p=" << p << " is not a bad prime of " << curve_name(e);
    throw DomainError(os.str());
  }
  const u64 am = mod_of(e.a, p);
  if (am == 0) return {0, Reduction::Additive};
  // Node at x0 = -3b/(2a); tangent slopes satisfy m^2 = 3 x0, whose class is that of -2ab.
  const u64 t = mod_of(-2, p);
  const u64 v = mulmod(mulmod(t, am, p), mod_of(e.b, p), p);
  const int chi = arith::jacobi(v, p);
  return chi == 1 ? BadPrimeAp{1, Reduction::Split} : BadPrimeAp{-1, Reduction::Nonsplit};
}

int ap_of(const EllipticCurve& e, std::uint64_t p) {
  if (auto it = e.ap_overrides.find(static_cast<std::uint32_t>(p)); it != e.ap_overrides.end()) return it->second;
  if (p == 2) missing_override(e, p);
  if (p == 3) {
    if (divides_disc(e, 3)) missing_override(e, p);
    return ap_char_sum(e.a, e.b, 3);
  }
  if (!divides_disc(e, p)) return p < 1000 ? ap_good(e, p) : ap_bsgs(e.a, e.b, static_cast<std::uint32_t>(p));
  if (e.conductor % p == 0) return ap_bad(e, p).ap;
  std::ostringstream os;
  os << curve_name(e) << ": p=" << p << " divides the discriminant but not the conductor";
  throw FixtureError(os.str());
}

int ApTable::ap_at(std::uint64_t p) const { return ap[index_of(p)]; }

std::size_t ApTable::index_of(std::uint64_t p) const {
  const std::size_t i = primes->index_of(p);
  if (i == arith::PrimeTable::npos || i >= ap.size()) {
    std::ostringstream os;
    os << "prime " << p << " is outside the a_p table (bound " << bound << ")";
    throw DomainError(os.str());
  }
  return i;
}

ApTable build_ap_table(const EllipticCurve& e, std::uint64_t P, std::shared_ptr<const arith::PrimeTable> primes) {
  if (P < 2) throw DomainError("build_ap_table: P must be >= 2");
  if (!primes || primes->bound < P) primes = std::make_shared<const arith::PrimeTable>(arith::sieve_primes(P));
  ApTable t;
  t.label = e.label;
  t.a = e.a;
  t.b = e.b;
  t.conductor = e.conductor;
  t.bound = P;
  t.primes = primes;
  const std::size_t n = primes->count_upto(P);
  t.ap.assign(n, 0);
  t.reduction.assign(n, Reduction::Good);

  const ChunkPlan plan{n, 512};
  parallel_for_chunks(plan.count(), [&](std::size_t c) {
    for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) {
      const u64 p = primes->primes[i];
      const bool bad = e.conductor % p == 0;
      if (auto it = e.ap_overrides.find(static_cast<std::uint32_t>(p)); it != e.ap_overrides.end()) {
        t.ap[i] = it->second;
        if (bad) t.reduction[i] = it->second == 1 ? Reduction::Split : it->second == -1 ? Reduction::Nonsplit : Reduction::Additive;
        continue;
      }
      if (p == 2 || (p == 3 && divides_disc(e, 3))) missing_override(e, p);
      if (!divides_disc(e, p)) {
        t.ap[i] = ap_bsgs(e.a, e.b, static_cast<std::uint32_t>(p));
      } else if (bad) {
        const auto r = ap_bad(e, p);
        t.ap[i] = r.ap;
        t.reduction[i] = r.type;
      } else {
        std::ostringstream os;
        os << curve_name(e) << ": p=" << p << " divides the discriminant but not the conductor";
        throw FixtureError(os.str());
      }
    }
  });
  return t;
}

double hecke_lambda(const ApTable& table, std::uint64_t n) {
  if (n == 0) throw DomainError("hecke_lambda: n must be positive");
  double result = 1.0;
  u64 m = n;
  const auto& pr = table.primes->primes;
  for (std::size_t i = 0; i < table.size() && m > 1; ++i) {
    const u64 p = pr[i];
    if (p * p > m) break;
    if (m % p) continue;
    int k = 0;
    while (m % p == 0) {
      m /= p;
      ++k;
    }
    const double lp = table.ap[i] * table.primes->inv_sqrtp[i];
    if (table.good_at_index(i)) {
      double prev = 1.0, cur = lp;
      for (int j = 1; j < k; ++j) prev = std::exchange(cur, lp * cur - prev);
      result *= cur;
    } else {
      result *= std::pow(lp, k);
    }
  }
  if (m > 1) {
    if (m > table.bound) {
      std::ostringstream os;
      os << "hecke_lambda: prime factor " << m << " of " << n << " is outside the table";
      throw DomainError(os.str());
    }
    const std::size_t i = table.index_of(m);
    result *= table.ap[i] * table.primes->inv_sqrtp[i];
  }
  return result;
}

double sym_power_sum_at(const ApTable& table, std::size_t index, int k) {
  if (k < 0 || k > 8) throw DomainError("sym_power_sum: k must lie in [0, 8]");
  const double s1 = table.ap[index] * table.primes->inv_sqrtp[index];
  if (!table.good_at_index(index)) return std::pow(s1, k);
  if (k == 0) return 2.0;
  double prev = 2.0, cur = s1;
  for (int j = 1; j < k; ++j) prev = std::exchange(cur, s1 * cur - prev);
  return cur;
}

double sym_power_sum(const ApTable& table, std::uint64_t p, int k) {
  return sym_power_sum_at(table, table.index_of(p), k);
}

int twist_ap(const EllipticCurve& e, std::int64_t d, std::uint64_t p) {
  if (d == 0) throw DomainError("twist_ap: d must be nonzero");
  if (p != 2 && abs_u(d) % p != 0) return arith::kronecker(d, static_cast<std::int64_t>(p)) * ap_of(e, p);
  if (p == 2) {
    const std::int64_t r = ((d % 4) + 4) % 4;
    if (r == 1) return arith::kronecker(d, 2) * ap_of(e, 2);
    if (e.conductor % 2 != 0) return 0;
    throw DomainError("twist_ap: ramified twist at p=2 of a curve with bad reduction at 2");
  }
  // p | d: count on Y^2 = X^3 + a d^2 X + b d^3 after removing p^4 / p^6 factors.
  const BigInt D = d;
  BigInt A = BigInt(e.a) * D * D, B = BigInt(e.b) * D * D * D;
  const BigInt p4 = BigInt(p) * p * p * p, p6 = p4 * p * p;
  while (A % p4 == 0 && B % p6 == 0 && !(A == 0 && B == 0)) {
    A /= p4;
    B /= p6;
  }
  const auto am = static_cast<std::int64_t>(static_cast<BigInt>(A % p));
  const auto bm = static_cast<std::int64_t>(static_cast<BigInt>(B % p));
  return ap_char_sum(am, bm, static_cast<std::uint32_t>(p));
}

int root_number_coprime(const EllipticCurve& e, std::int64_t d) {
  if (d == 0 || arith::gcd(abs_u(d), e.conductor) != 1)
    throw DomainError("root_number_coprime: d must be nonzero and coprime to N");
  return arith::kronecker(d, -static_cast<std::int64_t>(e.conductor)) * e.root_number;
}

int root_number_squarefree_n(const EllipticCurve& e, std::int64_t d) {
  if (!arith::is_squarefree(e.conductor)) throw DomainError("root_number_squarefree_n: conductor is not squarefree");
  if (d == 0 || !arith::is_squarefree(abs_u(d))) throw DomainError("root_number_squarefree_n: d must be squarefree");
  const u64 g = arith::gcd(abs_u(d), e.conductor);
  const auto rest = static_cast<std::int64_t>(e.conductor / g);
  int value = arith::kronecker(d, -rest) * e.root_number;
  for (u64 q : arith::prime_factors(g)) {
    const int aq = ap_of(e, q);
    if (aq != 1 && aq != -1) {
      std::ostringstream os;
      os << "root_number_squarefree_n: non-unit a_" << q << " = " << aq << " at the gcd";
      throw DomainError(os.str());
    }
    value *= -aq;  // mu(q) a_q
  }
  return value;
}

ConductorReport conductor_validate(const EllipticCurve& e) {
  ConductorReport rep;
  BigInt rest = abs(e.discriminant());
  std::vector<u64> bad;
  for (u64 q = 2; q < 1'000'000 && rest > 1; ++q) {
    if (rest % q != 0) continue;
    bad.push_back(q);
    while (rest % q == 0) rest /= q;
  }
  if (rest > 1) {
    if (rest < BigInt(1'000'000) * 1'000'000 || boost::multiprecision::miller_rabin_test(rest, 25)) {
      if (rest > BigInt(std::numeric_limits<std::int64_t>::max()))
        rep.warnings.push_back("discriminant has a prime factor beyond 63 bits; not classified");
      else
        bad.push_back(static_cast<u64>(rest));
    } else {
      rep.warnings.push_back("discriminant has an unfactored composite cofactor; exponents there not verified");
    }
  }
  for (u64 q : bad) {
    const int found = valuation(e.conductor, q);
    if (q == 2 || q == 3) {
      std::ostringstream os;
      os << "conductor exponent at p=" << q << " (" << found << ") not verified";
      rep.warnings.push_back(os.str());
      continue;
    }
    const int expected = mod_of(e.a, q) == 0 ? 2 : 1;
    if (found != expected) {
      rep.ok = false;
      rep.offending.push_back({q, expected, found, expected == 1 ? "multiplicative" : "additive"});
    }
  }
  for (u64 q : arith::prime_factors(e.conductor)) {
    if (q >= 5 && std::find(bad.begin(), bad.end(), q) == bad.end()) {
      rep.ok = false;
      rep.offending.push_back({q, 0, valuation(e.conductor, q), "conductor prime does not divide the discriminant"});
    }
  }
  return rep;
}

void require_valid_conductor(const EllipticCurve& e) {
  const auto rep = conductor_validate(e);
  if (rep.ok) return;
  std::ostringstream os;
  os << curve_name(e) << ": conductor validation failed at p =";
  for (const auto& i : rep.offending) os << ' ' << i.p << " (" << i.reason << ", expected exponent "
                                         << i.expected_exponent << ", fixture " << i.fixture_exponent << ')';
  throw FixtureError(os.str());
}

TwistedCurve make_twist(const EllipticCurve& e, std::int64_t d) {
  if (d == 0 || !arith::is_squarefree(abs_u(d))) throw DomainError("make_twist: d must be nonzero and squarefree");
  TwistedCurve t;
  t.base = e;
  t.d = d;
  const std::int64_t r = ((d % 4) + 4) % 4;
  t.disc = r == 1 ? d : 4 * d;
  const u64 g = arith::gcd(abs_u(t.disc), e.conductor);
  if (g != 1 && (!arith::is_squarefree(e.conductor) || g % 2 == 0)) {
    std::ostringstream os;
    os << "make_twist: conductor of the twist by " << d << " is not supported (shared factor " << g << ")";
    throw DomainError(os.str());
  }
  const u128 c = static_cast<u128>(abs_u(t.disc)) * abs_u(t.disc) * (e.conductor / g);
  if (c > std::numeric_limits<u64>::max()) throw CapacityError("make_twist: twisted conductor overflows 64 bits");
  t.conductor = static_cast<u64>(c);
  t.root_number = arith::gcd(abs_u(d), e.conductor) == 1 ? root_number_coprime(e, d) : root_number_squarefree_n(e, d);
  return t;
}

int twisted_ap(const TwistedCurve& t, const ApTable& table, std::size_t index) {
  const auto p = static_cast<std::int64_t>(table.primes->primes[index]);
  const int chi = t.disc == 1 ? 1 : arith::kronecker(t.disc, p);
  return chi * table.ap[index];
}

}  // namespace qtwist::curve
