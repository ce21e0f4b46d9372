#include "qtwist/lfun.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "csv_util.hpp"
#include "qtwist/error.hpp"
#include "qtwist/parallel.hpp"

namespace qtwist::lfun {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Tail of 2 sum_{n>M} |a_n|/n K(c n) with |a_n|/n <= 2 and K(x) <= exp(-x)
// (central) or exp(-x)/x (derivative).
double tail_bound(double c, std::uint64_t M, ValueKind kind) {
  const double m1 = static_cast<double>(M + 1);
  const double geom = std::exp(-c * m1) / (-std::expm1(-c));
  return kind == ValueKind::Central ? 4.0 * geom : 4.0 * geom / (c * m1);
}

double scale_of(std::uint64_t conductor) { return kTwoPi / std::sqrt(static_cast<double>(conductor)); }

LValue series(const curve::TwistedCurve& t, const curve::ApTable& table, const SeriesOptions& opts, ValueKind kind) {
  const double c = scale_of(t.conductor);
  const std::uint64_t M = opts.cutoff ? opts.cutoff : default_cutoff(t.conductor, opts.tail_tolerance, kind);
  const auto an = twisted_coefficients(t, table, M);
  double sum = 0.0;
  for (std::uint64_t n = 1; n <= M; ++n) {
    if (an[n] == 0.0) continue;
    const double x = c * static_cast<double>(n);
    const double k = kind == ValueKind::Central ? std::exp(-x) : arith::expint_e1(x);
    sum += an[n] / static_cast<double>(n) * k;
  }
  return {2.0 * sum, kind, M, tail_bound(c, M, kind)};
}

}  // namespace

std::vector<double> twisted_coefficients(const curve::TwistedCurve& t, const curve::ApTable& table, std::uint64_t M) {
  if (M > table.bound) {
    std::ostringstream os;
    os << "L-series for d=" << t.d << " needs a_p up to " << M << ", table bound is " << table.bound;
    throw DomainError(os.str());
  }
  if (M > 0xffffffffull) throw CapacityError("twisted_coefficients: cutoff exceeds 32 bits");
  std::vector<double> an(M + 1, 0.0);
  if (M == 0) return an;
  an[1] = 1.0;
  const auto spf = arith::smallest_prime_factors(static_cast<std::uint32_t>(M));
  std::vector<std::uint64_t> ppart(M + 1, 1);  // p^k exactly dividing n, p = spf(n)
  const auto& primes = table.primes->primes;
  for (std::size_t i = 0; i < table.size() && primes[i] <= M; ++i) {
    const std::uint64_t p = primes[i];
    const double ap = curve::twisted_ap(t, table, i);
    const bool good = t.conductor % p != 0;
    double prev = 1.0, cur = ap;
    for (std::uint64_t q = p;; q *= p) {
      an[q] = cur;
      if (q > M / p) break;
      const double next = good ? ap * cur - static_cast<double>(p) * prev : ap * cur;
      prev = cur;
      cur = next;
    }
  }
  for (std::uint64_t n = 2; n <= M; ++n) {
    const std::uint64_t p = spf[n];
    const std::uint64_t m = n / p;
    ppart[n] = (m % p == 0) ? ppart[m] * p : p;
    if (ppart[n] != n) an[n] = an[ppart[n]] * an[n / ppart[n]];
  }
  return an;
}

std::uint64_t default_cutoff(std::uint64_t conductor, double tolerance, ValueKind kind) {
  const double c = scale_of(conductor);
  auto M = static_cast<std::uint64_t>(std::log(4.0 / (tolerance * -std::expm1(-c))) / c);
  while (M > 1 && tail_bound(c, M - 1, kind) < tolerance) --M;
  while (tail_bound(c, M, kind) >= tolerance) ++M;
  return std::max<std::uint64_t>(M, 1);
}

LValue l_value_center(const curve::TwistedCurve& t, const curve::ApTable& table, const SeriesOptions& opts) {
  if (t.root_number != 1) {
    std::ostringstream os;
    os << "l_value_center: twist d=" << t.d << " has root number -1 (central value vanishes by parity)";
    throw DomainError(os.str());
  }
  return series(t, table, opts, ValueKind::Central);
}

LValue l_prime_center(const curve::TwistedCurve& t, const curve::ApTable& table, const SeriesOptions& opts) {
  if (t.root_number != -1) {
    std::ostringstream os;
    os << "l_prime_center: twist d=" << t.d << " has root number +1";
    throw DomainError(os.str());
  }
  return series(t, table, opts, ValueKind::FirstDerivative);
}

RankClass classify_rank(const curve::TwistedCurve& t, const curve::ApTable& table, const ClassifyOptions& opts) {
  RankClass rc;
  rc.parity = t.root_number == 1 ? Parity::Even : Parity::Odd;
  const double c = scale_of(t.conductor);
  const LValue v = rc.parity == Parity::Even ? l_value_center(t, table, opts.series) : l_prime_center(t, table, opts.series);
  const double leading = 2.0 * (rc.parity == Parity::Even ? std::exp(-c) : arith::expint_e1(c));
  rc.value = v.value;
  rc.threshold = std::max(opts.tolerance * leading, 10.0 * v.tail_bound);
  rc.margin = std::abs(v.value) - rc.threshold;
  const int low_class = rc.parity == Parity::Even ? 0 : 1;
  if (std::abs(v.value) >= opts.near_band * rc.threshold) {
    rc.cls = low_class;
  } else {
    rc.cls = 2;
    rc.low_confidence = std::abs(v.value) >= rc.threshold;
  }
  return rc;
}

int infer_root_number_from_coefficients(std::span<const double> an, std::uint64_t conductor, double split) {
  if (!(split > 1.0)) throw DomainError("infer_root_number: split point must exceed 1");
  const double c = scale_of(conductor);
  const std::uint64_t M = an.empty() ? 0 : an.size() - 1;
  // G(A) = sum a_n/n exp(-c n A); the smallest argument used is c / split.
  auto G = [&](double A) {
    double s = 0.0;
    for (std::uint64_t n = 1; n <= M; ++n)
      if (an[n] != 0.0) s += an[n] / static_cast<double>(n) * std::exp(-c * A * static_cast<double>(n));
    return s;
  };
  const double g1 = G(1.0), gA = G(split), gInv = G(1.0 / split);
  const double tail = tail_bound(c / split, M, ValueKind::Central);
  double scale = 0.0;
  for (std::uint64_t n = 1; n <= M; ++n) scale += std::abs(an[n]) / static_cast<double>(n) * std::exp(-c * n / split);
  const double tol = 4.0 * tail + 1e-10 * std::max(scale, 1.0);
  const bool plus_ok = std::abs((gA + gInv) - 2.0 * g1) <= tol;
  const bool minus_ok = std::abs(gA - gInv) <= tol;
  if (plus_ok && !minus_ok) return 1;
  if (minus_ok && !plus_ok) return -1;
  throw DomainError(plus_ok ? "infer_root_number: ambiguous sign (both hypotheses consistent)"
                            : "infer_root_number: no sign consistent with the functional equation");
}

int infer_root_number(const curve::TwistedCurve& t, const curve::ApTable& table, double split) {
  const std::uint64_t M = static_cast<std::uint64_t>(
      std::ceil(static_cast<double>(default_cutoff(t.conductor, 1e-14, ValueKind::Central)) * split));
  const auto an = twisted_coefficients(t, table, M);
  return infer_root_number_from_coefficients(an, t.conductor, split);
}

std::uint64_t family_table_bound(const curve::EllipticCurve& e, std::int64_t D, const ClassifyOptions& opts) {
  if (opts.series.cutoff) return opts.series.cutoff;
  // Largest conductor: 16 D^2 N.
  const auto N = static_cast<std::uint64_t>(16) * static_cast<std::uint64_t>(D) * static_cast<std::uint64_t>(D) * e.conductor;
  return std::max(default_cutoff(N, opts.series.tail_tolerance, ValueKind::Central),
                  default_cutoff(N, opts.series.tail_tolerance, ValueKind::FirstDerivative));
}

std::vector<TwistClass> classify_family(const curve::EllipticCurve& e, const curve::ApTable& table, std::int64_t D,
                                        const ClassifyOptions& opts) {
  if (D < 1) throw DomainError("classify_family: D must be >= 1");
  std::vector<std::int64_t> ds;
  for (std::int64_t m = 1; m <= D; ++m) {
    if (!arith::is_squarefree(static_cast<std::uint64_t>(m)) || arith::gcd(static_cast<std::uint64_t>(m), e.conductor) != 1)
      continue;
    ds.push_back(-m);
    ds.push_back(m);
  }
  std::vector<TwistClass> out(ds.size());
  parallel_for_chunks(ds.size(), [&](std::size_t i) {
    const auto tw = curve::make_twist(e, ds[i]);
    out[i] = {ds[i], tw.root_number, classify_rank(tw, table, opts)};
  });
  return out;
}

// ---------------------------------------------------------------------------

const TwistZeros* ZeroData::find(std::int64_t d) const {
  auto it = std::lower_bound(twists.begin(), twists.end(), d, [](const TwistZeros& z, std::int64_t v) { return z.d < v; });
  return it != twists.end() && it->d == d ? &*it : nullptr;
}

std::size_t ZeroData::total_zeros() const {
  std::size_t n = 0;
  for (const auto& t : twists) n += t.gamma.size();
  return n;
}

ZeroData parse_zeros(std::istream& in, const std::string& source) {
  ZeroData z;
  z.provenance = source;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto f = detail::split_csv(view);
    if (!header_seen) {
      header_seen = true;
      if (f.size() == 3 && f[0] == "d" && f[1] == "gamma" && f[2] == "multiplicity") continue;
      throw DataError(detail::where(source, lineno) + ": expected header d,gamma,multiplicity");
    }
    if (f.size() != 3) throw DataError(detail::where(source, lineno) + ": expected 3 fields");
    const auto d = detail::parse_int<std::int64_t>(f[0], source, lineno, "d");
    const double g = detail::parse_double(f[1], source, lineno, "gamma");
    const int m = detail::parse_int<int>(f[2], source, lineno, "multiplicity");
    if (d == 0) throw DataError(detail::where(source, lineno) + ": twist d must be nonzero");
    if (z.twists.empty() || z.twists.back().d != d) {
      for (const auto& t : z.twists)
        if (t.d == d)
          throw DataError(detail::where(source, lineno) + ": twist d=" + std::to_string(d) + " appears in two blocks");
      z.twists.push_back({d, {}, {}});
    }
    auto& t = z.twists.back();
    if (!(g > 0.0) || !std::isfinite(g))
      throw DataError(detail::where(source, lineno) + ": twist d=" + std::to_string(d) + ": ordinate must be positive");
    if (!t.gamma.empty() && !(g > t.gamma.back()))
      throw DataError(detail::where(source, lineno) + ": twist d=" + std::to_string(d) + ": ordinates not strictly ascending");
    if (m < 1) throw DataError(detail::where(source, lineno) + ": twist d=" + std::to_string(d) + ": multiplicity must be >= 1");
    t.gamma.push_back(g);
    t.multiplicity.push_back(m);
  }
  std::sort(z.twists.begin(), z.twists.end(), [](const TwistZeros& x, const TwistZeros& y) { return x.d < y.d; });
  return z;
}

ZeroData load_zeros(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open zeros file '" + path + "'");
  return parse_zeros(in, path);
}

std::map<std::int64_t, int> parse_ranks(std::istream& in, const std::string& source) {
  std::map<std::int64_t, int> out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto f = detail::split_csv(view);
    if (!header_seen) {
      header_seen = true;
      if (f.size() == 2 && f[0] == "d" && f[1] == "rank") continue;
      throw DataError(detail::where(source, lineno) + ": expected header d,rank");
    }
    if (f.size() != 2) throw DataError(detail::where(source, lineno) + ": expected 2 fields");
    const auto d = detail::parse_int<std::int64_t>(f[0], source, lineno, "d");
    const int r = detail::parse_int<int>(f[1], source, lineno, "rank");
    if (r < 0) throw DataError(detail::where(source, lineno) + ": rank must be non-negative");
    if (!out.emplace(d, r).second) throw DataError(detail::where(source, lineno) + ": duplicate d");
  }
  return out;
}

std::map<std::int64_t, int> load_ranks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ranks file '" + path + "'");
  return parse_ranks(in, path);
}

}  // namespace qtwist::lfun
