#include "qtwist/arith.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qtwist/error.hpp"
#include "qtwist/parallel.hpp"

namespace qtwist::arith {

namespace {

constexpr std::uint64_t kSegment = 1u << 18;

std::vector<std::uint32_t> small_primes(std::uint32_t n) {
  std::vector<std::uint8_t> composite(n + 1, 0);
  std::vector<std::uint32_t> out;
  for (std::uint64_t i = 2; i <= n; ++i) {
    if (composite[i]) continue;
    out.push_back(static_cast<std::uint32_t>(i));
    for (std::uint64_t j = i * i; j <= n; j += i) composite[j] = 1;
  }
  return out;
}

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

}  // namespace

std::size_t PrimeTable::count_upto(std::uint64_t x) const {
  return static_cast<std::size_t>(std::upper_bound(primes.begin(), primes.end(), x) - primes.begin());
}

std::size_t PrimeTable::index_of(std::uint64_t p) const {
  auto it = std::lower_bound(primes.begin(), primes.end(), p);
  if (it == primes.end() || *it != p) return npos;
  return static_cast<std::size_t>(it - primes.begin());
}

PrimeTable sieve_primes(std::uint64_t P, std::uint64_t memory_budget) {
  if (P < 2 || P > 1'000'000'000ull) throw DomainError("sieve_primes: bound must satisfy 2 <= P <= 1e9");
  // pi(P) <= 1.26 P / ln P; 16 bytes per prime (u32 + two doubles, rounded up).
  const double est = 1.26 * static_cast<double>(P) / std::log(static_cast<double>(P)) + 16.0;
  if (est * 20.0 > static_cast<double>(memory_budget)) {
    std::ostringstream msg;
    msg << "sieve_primes: P=" << P << " needs ~" << static_cast<std::uint64_t>(est * 20.0)
        << " bytes, budget is " << memory_budget;
    throw CapacityError(msg.str());
  }
  const auto base = small_primes(static_cast<std::uint32_t>(isqrt(P)));

  const std::uint64_t nseg = (P + 1 + kSegment - 1) / kSegment;
  std::vector<std::vector<std::uint32_t>> found(nseg);
  parallel_for_chunks(nseg, [&](std::size_t s) {
    const std::uint64_t lo = s * kSegment;
    const std::uint64_t hi = std::min<std::uint64_t>(lo + kSegment, P + 1);  // exclusive
    std::vector<std::uint8_t> composite(hi - lo, 0);
    for (std::uint32_t q : base) {
      const std::uint64_t q2 = static_cast<std::uint64_t>(q) * q;
      if (q2 >= hi) break;
      std::uint64_t start = std::max<std::uint64_t>(q2, (lo + q - 1) / q * q);
      for (std::uint64_t m = start; m < hi; m += q) composite[m - lo] = 1;
    }
    auto& out = found[s];
    for (std::uint64_t n = std::max<std::uint64_t>(lo, 2); n < hi; ++n)
      if (!composite[n - lo]) out.push_back(static_cast<std::uint32_t>(n));
  });

  PrimeTable table;
  table.bound = P;
  std::size_t total = 0;
  for (const auto& v : found) total += v.size();
  table.primes.reserve(total);
  for (const auto& v : found) table.primes.insert(table.primes.end(), v.begin(), v.end());
  table.logp.resize(total);
  table.inv_sqrtp.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    const double p = table.primes[i];
    table.logp[i] = std::log(p);
    table.inv_sqrtp[i] = 1.0 / std::sqrt(p);
  }
  return table;
}

SquarefreeMask squarefree_sieve(std::uint64_t D) {
  if (D < 1) throw DomainError("squarefree_sieve: D must be >= 1");
  SquarefreeMask m;
  m.bound = D;
  m.mask.assign(D + 1, 1);
  m.mobius.assign(D + 1, 1);
  m.mask[0] = 0;
  m.mobius[0] = 0;
  std::vector<std::uint8_t> composite(D + 1, 0);
  for (std::uint64_t p = 2; p <= D; ++p) {
    if (composite[p]) continue;
    for (std::uint64_t j = p; j <= D; j += p) {
      if (j > p) composite[j] = 1;
      m.mobius[j] = static_cast<std::int8_t>(-m.mobius[j]);
    }
    if (p <= D / p)
      for (std::uint64_t j = p * p; j <= D; j += p * p) m.mask[j] = 0;
  }
  for (std::uint64_t d = 1; d <= D; ++d)
    if (!m.mask[d]) m.mobius[d] = 0;
  return m;
}

std::vector<std::uint32_t> smallest_prime_factors(std::uint32_t n) {
  std::vector<std::uint32_t> spf(static_cast<std::size_t>(n) + 1, 0);
  for (std::uint64_t i = 2; i <= n; ++i) {
    if (spf[i]) continue;
    for (std::uint64_t j = i; j <= n; j += i)
      if (!spf[j]) spf[j] = static_cast<std::uint32_t>(i);
  }
  return spf;
}

std::uint64_t gcd(std::uint64_t a, std::uint64_t b) {
  while (b) {
    a %= b;
    std::swap(a, b);
  }
  return a;
}

int jacobi(std::uint64_t a, std::uint64_t n) {
  if (n == 0 || (n & 1) == 0) throw DomainError("jacobi: modulus must be odd and positive");
  a %= n;
  int result = 1;
  while (a != 0) {
    const int tz = std::countr_zero(a);
    a >>= tz;
    if ((tz & 1) && ((n & 7) == 3 || (n & 7) == 5)) result = -result;
    if ((a & 3) == 3 && (n & 3) == 3) result = -result;
    std::swap(a, n);
    a %= n;
  }
  return n == 1 ? result : 0;
}

int kronecker(std::int64_t d, std::int64_t n) {
  if (d == 0 && n == 0) throw DomainError("kronecker: (0/0) is undefined");
  if (n == 0) return (d == 1 || d == -1) ? 1 : 0;
  int result = 1;
  std::uint64_t m = n < 0 ? static_cast<std::uint64_t>(-(n + 1)) + 1 : static_cast<std::uint64_t>(n);
  if (n < 0 && d < 0) result = -result;  // (d/-1)
  const int tz = std::countr_zero(m);
  if (tz > 0) {
    if ((d & 1) == 0) return 0;
    // (d/2) = 1 if d = +-1 mod 8, -1 if d = +-3 mod 8.
    const std::uint64_t r = static_cast<std::uint64_t>(((d % 8) + 8) % 8);
    if ((tz & 1) && (r == 3 || r == 5)) result = -result;
    m >>= tz;
  }
  if (m == 1) return result;
  const std::uint64_t dm = static_cast<std::uint64_t>(((d % static_cast<std::int64_t>(m)) + static_cast<std::int64_t>(m)) %
                                                      static_cast<std::int64_t>(m));
  return result * jacobi(dm, m);
}

bool is_squarefree(std::uint64_t n) {
  if (n == 0) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    n /= p;
    if (n % p == 0) return false;
  }
  return true;
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    out.push_back(p);
    while (n % p == 0) n /= p;
  }
  if (n > 1) out.push_back(n);
  return out;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

// ---------------------------------------------------------------------------

double WeightSpec::operator()(double x) const {
  switch (kind) {
    case WeightKind::Triangular: return amplitude * std::max(1.0 - x, 0.0);
    case WeightKind::Exponential: return amplitude * std::exp(-x);
    case WeightKind::Gaussian:
    case WeightKind::Gaussian2D: return amplitude * std::exp(-x * x / (2.0 * sigma * sigma));
  }
  return 0.0;
}

double WeightSpec::operator()(double x, double y) const {
  if (kind == WeightKind::Gaussian2D)
    return amplitude * std::exp(-x * x / (2.0 * sigma * sigma) - y * y / (2.0 * sigma2 * sigma2));
  return (*this)(x) * (*this)(y) / amplitude;
}

double WeightSpec::support_cutoff() const {
  constexpr double kLogEps = 36.841361487904734;  // -ln(1e-16)
  switch (kind) {
    case WeightKind::Triangular: return 1.0;
    case WeightKind::Exponential: return kLogEps;
    case WeightKind::Gaussian: return sigma * std::sqrt(2.0 * kLogEps);
    case WeightKind::Gaussian2D: return std::max(sigma, sigma2) * std::sqrt(2.0 * kLogEps);
  }
  return 1.0;
}

double WeightSpec::mass_symmetric_unit() const {
  switch (kind) {
    case WeightKind::Triangular: return amplitude;
    case WeightKind::Exponential: return amplitude * 2.0 * (1.0 - std::exp(-1.0));
    case WeightKind::Gaussian:
    case WeightKind::Gaussian2D:
      return amplitude * sigma * std::sqrt(2.0 * std::numbers::pi) * std::erf(1.0 / (sigma * std::numbers::sqrt2));
  }
  return 0.0;
}

std::string WeightSpec::id() const {
  std::ostringstream os;
  if (amplitude != 1.0) os << amplitude << '*';
  switch (kind) {
    case WeightKind::Triangular: os << "triangular"; break;
    case WeightKind::Exponential: os << "exponential"; break;
    case WeightKind::Gaussian: os << "gaussian:" << sigma; break;
    case WeightKind::Gaussian2D: os << "gaussian2d:" << sigma << ',' << sigma2; break;
  }
  return os.str();
}

WeightSpec parse_weight(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto parse_pos = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || !(v > 0.0)) throw ConfigError("weight parameter must be a positive number: '" + text + "'");
    return v;
  };
  if (name == "triangular" && args.empty()) return WeightSpec::triangular();
  if (name == "exponential" && args.empty()) return WeightSpec::exponential();
  if (name == "gaussian") return WeightSpec::gaussian(args.empty() ? 1.0 : parse_pos(args));
  if (name == "gaussian2d") {
    if (args.empty()) return WeightSpec::gaussian2d(1.0, 1.0);
    const auto comma = args.find(',');
    if (comma == std::string::npos) throw ConfigError("gaussian2d needs two widths: '" + text + "'");
    return WeightSpec::gaussian2d(parse_pos(args.substr(0, comma)), parse_pos(args.substr(comma + 1)));
  }
  throw ConfigError("unknown weight '" + text + "'");
}

namespace {
bool near_nonpositive_integer(cplx s, int stride = 1) {
  if (std::abs(s.imag()) > 1e-14 || s.real() > 0.5) return false;
  const double k = std::round(s.real() / stride);
  return k <= 0 && std::abs(s.real() - k * stride) < 1e-14;
}
}  // namespace

cplx mellin(const WeightSpec& weight, cplx s) {
  switch (weight.kind) {
    case WeightKind::Triangular:
      if (std::abs(s) < 1e-14 || std::abs(s + 1.0) < 1e-14)
        throw DomainError("mellin(triangular): pole at s in {0, -1}");
      return weight.amplitude / (s * (s + 1.0));
    case WeightKind::Exponential:
      if (near_nonpositive_integer(s)) throw DomainError("mellin(exponential): pole of Gamma");
      return weight.amplitude * gamma(s);
    case WeightKind::Gaussian: {
      if (near_nonpositive_integer(s, 2)) throw DomainError("mellin(gaussian): pole of Gamma(s/2)");
      const double two_s2 = 2.0 * weight.sigma * weight.sigma;
      return weight.amplitude * 0.5 * std::pow(cplx(two_s2, 0.0), s / 2.0) * gamma(s / 2.0);
    }
    case WeightKind::Gaussian2D: break;
  }
  throw DomainError("mellin: unsupported for two-variable weights");
}

cplx mellin_gk(const WeightSpec& weight, int k, cplx s) {
  if (k < 1) throw DomainError("mellin_gk: k must be positive");
  return mellin(weight, s / static_cast<double>(k)) / static_cast<double>(k);
}

double fourier_hat(const WeightSpec& weight, double xi) {
  if (weight.kind != WeightKind::Gaussian)
    throw DomainError("fourier_hat: closed form available for the gaussian weight only");
  constexpr double pi = std::numbers::pi;
  const double s = weight.sigma;
  return weight.amplitude * s * std::sqrt(2.0 * pi) * std::exp(-2.0 * pi * pi * s * s * xi * xi);
}

}  // namespace qtwist::arith
