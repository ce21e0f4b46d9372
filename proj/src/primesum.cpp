#include "qtwist/primesum.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qtwist/error.hpp"
#include "qtwist/parallel.hpp"

namespace qtwist::primesum {

using arith::WeightSpec;
using curve::ApTable;

namespace {

constexpr std::size_t kTwistChunk = 16;
constexpr std::size_t kPrimeChunk = 256;
constexpr std::size_t kPairChunk = 8;

int chi_odd(std::int64_t d, std::uint32_t p) {
  const std::int64_t r = ((d % static_cast<std::int64_t>(p)) + p) % static_cast<std::int64_t>(p);
  return arith::jacobi(static_cast<std::uint64_t>(r), p);
}

int chi(std::int64_t d, std::uint32_t p) { return p == 2 ? arith::kronecker(d, 2) : chi_odd(d, p); }

void require_table(const ApTable& table, double bound, const char* who) {
  if (bound > static_cast<double>(table.bound)) {
    std::ostringstream os;
    os << who << ": needs a_p up to " << static_cast<std::uint64_t>(bound) << " but the table for " << table.label
       << " stops at " << table.bound;
    throw DomainError(os.str());
  }
}

/// c_p = a_p log p g(p/P) / sqrt p for p <= P (table prefix).
std::vector<double> prime_coefficients(const ApTable& table, std::uint64_t P, const WeightSpec& g) {
  require_table(table, static_cast<double>(P), "prime sum");
  const auto& pt = *table.primes;
  const std::size_t n = pt.count_upto(P);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i)
    c[i] = table.ap[i] * pt.logp[i] * g(static_cast<double>(pt.primes[i]) / static_cast<double>(P)) * pt.inv_sqrtp[i];
  return c;
}

double inner_from_coefficients(const ApTable& table, const std::vector<double>& c, std::int64_t d) {
  const auto& primes = table.primes->primes;
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0.0) continue;
    const int x = chi(d, primes[i]);
    if (x) s += x * c[i];
  }
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Prime-major kernel: for each prime, sum w_j chi_{d_j}(p) over the family.
/// Characters at p > D come from a multiplicative table on 1..D seeded by the
/// values (q/p) at primes q <= D; smaller p use a full residue table mod p.
double residue_table_path(const ApTable& table, const std::vector<double>& c, const TwistFamily& fam,
                          std::int64_t D) {
  const auto& primes = table.primes->primes;
  const auto spf = arith::smallest_prime_factors(static_cast<std::uint32_t>(D));
  const std::size_t n = c.size();
  std::vector<std::uint32_t> absd(fam.size());
  for (std::size_t j = 0; j < fam.size(); ++j) absd[j] = static_cast<std::uint32_t>(std::llabs(fam.d[j]));

  ChunkPlan plan{n, kPrimeChunk};
  std::vector<double> partial(plan.count(), 0.0);
  parallel_for_chunks(plan.count(), [&](std::size_t ci) {
    std::vector<std::int8_t> tab;
    double acc = 0.0;
    for (std::size_t i = plan.begin(ci); i < plan.end(ci); ++i) {
      if (c[i] == 0.0) continue;
      const std::uint32_t p = primes[i];
      double s = 0.0;
      if (p == 2) {
        for (std::size_t j = 0; j < fam.size(); ++j) s += fam.weight[j] * arith::kronecker(fam.d[j], 2);
      } else if (p <= static_cast<std::uint64_t>(D)) {
        tab.assign(p, -1);
        tab[0] = 0;
        for (std::uint64_t x = 1; x <= p / 2; ++x) tab[(x * x) % p] = 1;
        const int neg = (p % 4 == 1) ? 1 : -1;
        for (std::size_t j = 0; j < fam.size(); ++j) {
          const int v = tab[absd[j] % p];
          s += fam.weight[j] * (fam.d[j] < 0 ? neg * v : v);
        }
      } else {
        tab.assign(static_cast<std::size_t>(D) + 1, 0);
        tab[1] = 1;
        for (std::int64_t r = 2; r <= D; ++r) {
          const std::uint32_t q = spf[r];
          tab[r] = (q == static_cast<std::uint32_t>(r)) ? static_cast<std::int8_t>(arith::jacobi(r, p))
                                                         : static_cast<std::int8_t>(tab[q] * tab[r / q]);
        }
        const int neg = (p % 4 == 1) ? 1 : -1;
        for (std::size_t j = 0; j < fam.size(); ++j) {
          const int v = tab[absd[j]];
          s += fam.weight[j] * (fam.d[j] < 0 ? neg * v : v);
        }
      }
      acc += c[i] * s;
    }
    partial[ci] = acc;
  });
  return -tree_sum(partial);
}

double sym_prime_sum(const ApTable& table, double x, const WeightSpec& h, int k) {
  if (!(x > 0.0)) throw DomainError("sym prime sum: x must be positive");
  const double X = x * h.support_cutoff();
  const auto& pt = *table.primes;
  require_table(table, X, "sym prime sum");
  const std::size_t n = pt.count_upto(static_cast<std::uint64_t>(X));
  return parallel_sum(n, kPrimeChunk, [&](std::size_t i) {
    return curve::sym_power_sum_at(table, i, k) * h(pt.primes[i] / x) * pt.logp[i];
  });
}

}  // namespace

void PrimeSumConfig::validate() const {
  if (D < 1) throw ConfigError("D must be >= 1");
  if (P < 2) throw ConfigError("P must be >= 2");
  if (!(w(0.0) > 0.0)) throw ConfigError("family weight must satisfy w(0) > 0");
  if (g.kind != arith::WeightKind::Triangular && g.kind != arith::WeightKind::Exponential)
    throw ConfigError("prime weight g must be triangular or exponential");
}

double TwistFamily::weight_mass() const { return tree_sum(weight); }

TwistFamily make_family(std::uint64_t conductor, std::int64_t D, const WeightSpec& w, bool coprime_only,
                        Signs signs) {
  if (D < 1) throw DomainError("make_family: D must be >= 1");
  const auto sf = arith::squarefree_sieve(static_cast<std::uint64_t>(D));
  TwistFamily fam;
  for (std::int64_t m = 1; m <= D; ++m) {
    if (!sf.squarefree(m)) continue;
    if (coprime_only && arith::gcd(static_cast<std::uint64_t>(m), conductor) != 1) continue;
    const double wt = w(static_cast<double>(m) / static_cast<double>(D));
    if (signs == Signs::Both) {
      fam.d.push_back(-m);
      fam.weight.push_back(wt);
    }
    fam.d.push_back(m);
    fam.weight.push_back(wt);
  }
  return fam;
}

double twist_inner_sum(const ApTable& table, std::int64_t d, std::uint64_t P, const WeightSpec& g) {
  if (d == 0) throw DomainError("twist_inner_sum: d must be nonzero");
  const auto c = prime_coefficients(table, P, g);
  return inner_from_coefficients(table, c, d);
}

PrimeSumResult prime_sum_S(const curve::EllipticCurve& base, const ApTable& table, const PrimeSumConfig& cfg) {
  if (cfg.D < 1) throw DomainError("prime_sum_S: D must be >= 1");
  if (cfg.P < 2) throw DomainError("prime_sum_S: P must be >= 2");
  const auto fam = make_family(base.conductor, cfg.D, cfg.w, cfg.coprime_only, cfg.signs);
  const auto c = prime_coefficients(table, cfg.P, cfg.g);

  PrimeSumResult res;
  res.path = cfg.path;
  if (cfg.path != SumPath::ResidueTable) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> inner(fam.size());
    ChunkPlan plan{fam.size(), kTwistChunk};
    std::vector<double> partial(plan.count(), 0.0);
    parallel_for_chunks(plan.count(), [&](std::size_t ci) {
      double acc = 0.0;
      for (std::size_t j = plan.begin(ci); j < plan.end(ci); ++j) {
        inner[j] = inner_from_coefficients(table, c, fam.d[j]);
        acc += fam.weight[j] * inner[j];
      }
      partial[ci] = acc;
    });
    res.S_twist = -tree_sum(partial);
    res.seconds_twist = seconds_since(t0);
    if (cfg.keep_per_d) {
      res.per_d_index = fam.d;
      res.per_d = std::move(inner);
    }
  }
  if (cfg.path != SumPath::TwistLoop) {
    const auto t0 = std::chrono::steady_clock::now();
    res.S_table = residue_table_path(table, c, fam, cfg.D);
    res.seconds_table = seconds_since(t0);
  }
  res.S = res.S_twist ? *res.S_twist : *res.S_table;
  if (res.S_twist && res.S_table)
    res.path_discrepancy = std::abs(*res.S_twist - *res.S_table) / (1.0 + std::abs(res.S));
  res.normalized = res.S / (static_cast<double>(cfg.D) * std::sqrt(static_cast<double>(cfg.P)));
  return res;
}

double twisted_prime_sum(const ApTable& table, std::int64_t m, double t, const std::optional<WeightSpec>& g,
                         double P) {
  if (m == 0) throw DomainError("twisted_prime_sum: m must be nonzero");
  if (t < 2.0) return 0.0;
  require_table(table, t, "twisted_prime_sum");
  const auto& pt = *table.primes;
  const std::size_t n = pt.count_upto(static_cast<std::uint64_t>(t));
  return parallel_sum(n, kPrimeChunk, [&](std::size_t i) {
    const std::uint32_t p = pt.primes[i];
    const int x = chi(m, p);
    if (!x) return 0.0;
    const double wt = g ? (*g)(p / P) : 1.0;
    return x * table.ap[i] * pt.logp[i] * pt.inv_sqrtp[i] * wt;
  });
}

double sym2_prime_sum(const ApTable& table, double x, const WeightSpec& h) { return sym_prime_sum(table, x, h, 2); }
double sym3_prime_sum(const ApTable& table, double x, const WeightSpec& h) { return sym_prime_sum(table, x, h, 3); }

namespace {

RankEstimate estimate_one(const curve::EllipticCurve& base, const ApTable& table, const std::vector<double>& c,
                          std::int64_t d, std::uint64_t P, const WeightSpec& g, const RankOptions& opts) {
  RankEstimate r;
  r.d = d;
  const auto& pt = *table.primes;
  const double sqrtP = std::sqrt(static_cast<double>(P));
  const double Mg = arith::mellin(g, 0.5).real();
  r.inner_sum = inner_from_coefficients(table, c, d);
  r.prime_term = -r.inner_sum / (Mg * sqrtP);

  const double cutoff = static_cast<double>(P) * g.support_cutoff();
  if (opts.sym2) {
    const auto top = static_cast<std::uint64_t>(std::sqrt(cutoff));
    const std::size_t n = pt.count_upto(top);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t p = pt.primes[i];
      if (chi(d, p) == 0) continue;
      const double p2 = static_cast<double>(p) * p;
      s += curve::sym_power_sum_at(table, i, 2) * g(p2 / static_cast<double>(P)) * pt.logp[i];
    }
    r.sym2_correction = s + arith::mellin_gk(g, 2, 1.0).real() * sqrtP;
    r.sym2_term = -r.sym2_correction / (Mg * sqrtP);
  }
  if (opts.sym3) {
    const auto top = static_cast<std::uint64_t>(std::cbrt(cutoff));
    const std::size_t n = pt.count_upto(top);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t p = pt.primes[i];
      const int x = chi(d, p);
      if (x == 0) continue;
      const double p3 = static_cast<double>(p) * p * p;
      s += x * curve::sym_power_sum_at(table, i, 3) * g(p3 / static_cast<double>(P)) * pt.logp[i];
    }
    r.sym3_correction = s;
    r.sym3_term = -r.sym3_correction / (Mg * sqrtP);
  }
  r.r_hat = 0.5 + r.prime_term + r.sym2_term + r.sym3_term;
  (void)base;
  return r;
}

void check_twist(const curve::EllipticCurve& base, std::int64_t d) {
  if (d == 0 || !arith::is_squarefree(static_cast<std::uint64_t>(std::llabs(d))))
    throw DomainError("rank_estimator: d must be a nonzero squarefree integer");
  if (arith::gcd(static_cast<std::uint64_t>(std::llabs(d)), base.conductor) != 1)
    throw DomainError("rank_estimator: d must be coprime to the conductor");
}

}  // namespace

RankEstimate rank_estimator(const curve::EllipticCurve& base, const ApTable& table, std::int64_t d, std::uint64_t P,
                            const WeightSpec& g, const RankOptions& opts) {
  check_twist(base, d);
  if (P < 2) throw DomainError("rank_estimator: P must be >= 2");
  const auto c = prime_coefficients(table, P, g);
  return estimate_one(base, table, c, d, P, g, opts);
}

FamilyRank family_average_rank(const curve::EllipticCurve& base, const ApTable& table, const PrimeSumConfig& cfg,
                               const RankOptions& opts) {
  if (!cfg.coprime_only) throw DomainError("family_average_rank: requires a coprime family");
  if (cfg.D < 1 || cfg.P < 2) throw DomainError("family_average_rank: need D >= 1 and P >= 2");
  const auto fam = make_family(base.conductor, cfg.D, cfg.w, true, cfg.signs);
  if (fam.size() == 0) throw DomainError("family_average_rank: empty family");
  const auto c = prime_coefficients(table, cfg.P, cfg.g);

  FamilyRank out;
  out.estimates.resize(fam.size());
  ChunkPlan plan{fam.size(), kTwistChunk};
  parallel_for_chunks(plan.count(), [&](std::size_t ci) {
    for (std::size_t j = plan.begin(ci); j < plan.end(ci); ++j)
      out.estimates[j] = estimate_one(base, table, c, fam.d[j], cfg.P, cfg.g, opts);
  });
  std::vector<double> wr(fam.size()), wx(fam.size()), wc(fam.size());
  for (std::size_t j = 0; j < fam.size(); ++j) {
    const auto& e = out.estimates[j];
    wr[j] = fam.weight[j] * e.r_hat;
    wx[j] = fam.weight[j] * (e.r_hat - 0.5);
    wc[j] = fam.weight[j] * (e.sym2_correction + e.sym3_correction);
  }
  out.weight_mass = fam.weight_mass();
  out.weighted_excess = tree_sum(wx);
  out.sym_correction_aggregate = tree_sum(wc);
  out.average = tree_sum(wr) / out.weight_mass;
  return out;
}

bool admissible_pair(std::int64_t a, std::int64_t b) {
  if (curve::discriminant(a, b) == 0) return false;
  return !curve::is_nonminimal(a, b);
}

AllCurvesResult all_curves_prime_sum(const AllCurvesConfig& cfg) {
  if (cfg.A < 1 || cfg.B < 1) throw DomainError("all_curves_prime_sum: A and B must be >= 1");
  if (cfg.P < 3) throw DomainError("all_curves_prime_sum: P must be >= 3");
  const auto pt = arith::sieve_primes(cfg.P);
  const std::int64_t a0 = cfg.signs == Signs::Both ? -cfg.A : 1;
  const std::int64_t b0 = cfg.signs == Signs::Both ? -cfg.B : 1;
  const std::uint64_t na = static_cast<std::uint64_t>(cfg.A - a0 + 1);
  const std::uint64_t nb = static_cast<std::uint64_t>(cfg.B - b0 + 1);
  const double work = static_cast<double>(na) * static_cast<double>(nb) * static_cast<double>(pt.size());
  if (work > cfg.work_limit) {
    std::ostringstream os;
    os << "all_curves_prime_sum: " << work << " point counts exceed the work limit " << cfg.work_limit;
    throw CapacityError(os.str());
  }
  const std::size_t total = static_cast<std::size_t>(na * nb);
  const double P = static_cast<double>(cfg.P);
  std::vector<double> coef(pt.size());
  for (std::size_t i = 0; i < pt.size(); ++i)
    coef[i] = pt.logp[i] * cfg.g(pt.primes[i] / P) * pt.inv_sqrtp[i];

  ChunkPlan plan{total, kPairChunk};
  std::vector<double> partS(plan.count(), 0.0), partW(plan.count(), 0.0);
  std::vector<std::uint64_t> partN(plan.count(), 0);
  parallel_for_chunks(plan.count(), [&](std::size_t ci) {
    double accS = 0.0, accW = 0.0;
    std::uint64_t cnt = 0;
    for (std::size_t k = plan.begin(ci); k < plan.end(ci); ++k) {
      const std::int64_t a = a0 + static_cast<std::int64_t>(k / nb);
      const std::int64_t b = b0 + static_cast<std::int64_t>(k % nb);
      if (!admissible_pair(a, b)) continue;
      const double wt = cfg.w2(static_cast<double>(a) / cfg.A, static_cast<double>(b) / cfg.B);
      const auto disc = curve::discriminant(a, b);
      double inner = 0.0;
      for (std::size_t i = 0; i < pt.size(); ++i) {
        const std::uint32_t p = pt.primes[i];
        if (p == 2 || coef[i] == 0.0) continue;
        int ap;
        if (p >= 1000 && disc % p != 0)
          ap = curve::ap_bsgs(a, b, p);
        else
          ap = curve::ap_char_sum(a, b, p);
        inner += ap * coef[i];
      }
      accS += wt * inner;
      accW += wt;
      ++cnt;
    }
    partS[ci] = accS;
    partW[ci] = accW;
    partN[ci] = cnt;
  });
  AllCurvesResult res;
  res.S = -tree_sum(partS);
  res.weight_mass = tree_sum(partW);
  for (auto n : partN) res.pairs += n;
  res.normalized = res.S / (static_cast<double>(cfg.A) * static_cast<double>(cfg.B) * std::sqrt(P));
  return res;
}

PoissonReport poisson_identity_check(std::int64_t a, std::int64_t c, std::int64_t p, double D, const WeightSpec& w,
                                     std::int64_t x) {
  if (w.kind != arith::WeightKind::Gaussian) throw DomainError("poisson_identity_check: needs a gaussian weight");
  if (a == 0 || c <= 0 || p < 2 || !(D > 0.0)) throw DomainError("poisson_identity_check: need a != 0, c, p >= 1, D > 0");
  if (!arith::is_prime(static_cast<std::uint64_t>(p))) throw DomainError("poisson_identity_check: p must be prime");
  const auto a2 = static_cast<std::uint64_t>(a < 0 ? -a : a);
  const std::uint64_t g = arith::gcd(a2 * a2, static_cast<std::uint64_t>(c));
  const auto L = static_cast<std::int64_t>(a2 * a2 / g * static_cast<std::uint64_t>(c));
  const double Ld = static_cast<double>(L);
  const double pi = std::numbers::pi;
  PoissonReport rep;
  rep.lcm = L;

  const auto bmax = static_cast<std::int64_t>(std::ceil(w.support_cutoff() * D / Ld)) + 1;
  const std::int64_t xm = ((x % p) + p) % p;
  std::complex<double> lhs = 0.0;
  for (std::int64_t b = -bmax; b <= bmax; ++b) {
    const __int128 ph = (static_cast<__int128>(L % p) * (((b % p) + p) % p) * xm) % p;
    const double theta = 2.0 * pi * static_cast<double>(ph) / static_cast<double>(p);
    lhs += w(Ld * static_cast<double>(b) / D) * std::polar(1.0, theta);
  }

  const double xi_max = std::sqrt(40.0 / (2.0 * pi * pi * w.sigma * w.sigma));
  const double centre = Ld * static_cast<double>(xm) / static_cast<double>(p);
  const double span = Ld * xi_max / D;
  const auto m0 = static_cast<std::int64_t>(std::floor(centre - span)) - 1;
  const auto m1 = static_cast<std::int64_t>(std::ceil(centre + span)) + 1;
  double rhs = 0.0;
  for (std::int64_t m = m0; m <= m1; ++m) {
    const double xi = static_cast<double>(static_cast<__int128>(m) * p - static_cast<__int128>(xm) * L) /
                      (Ld * static_cast<double>(p));
    rhs += arith::fourier_hat(w, D * xi);
  }
  rep.lhs = lhs;
  rep.rhs = std::complex<double>(rhs * D / Ld, 0.0);
  rep.abs_diff = std::abs(rep.lhs - rep.rhs);
  return rep;
}

std::complex<double> quadratic_gauss_sum(std::uint64_t p, std::int64_t d) {
  if (p < 3 || !arith::is_prime(p)) throw DomainError("quadratic_gauss_sum: p must be an odd prime");
  const auto pm = static_cast<std::int64_t>(p);
  const auto dm = static_cast<std::uint64_t>(((d % pm) + pm) % pm);
  std::vector<std::int8_t> tab(p, -1);
  tab[0] = 0;
  for (std::uint64_t x = 1; x <= p / 2; ++x) tab[(x * x) % p] = 1;
  std::vector<double> re(p), im(p);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(p);
  for (std::uint64_t x = 0; x < p; ++x) {
    const double th = step * static_cast<double>((dm * x) % p);
    re[x] = tab[x] * std::cos(th);
    im[x] = tab[x] * std::sin(th);
  }
  return {tree_sum(re), tree_sum(im)};
}

GaussReport gauss_sum_check(std::uint64_t p) {
  if (p < 3 || !arith::is_prime(p)) throw DomainError("gauss_sum_check: p must be an odd prime");
  GaussReport rep;
  rep.p = p;
  rep.d.push_back(0);
  std::mt19937_64 rng(p);
  std::uniform_int_distribution<std::int64_t> dist(1, static_cast<std::int64_t>(p) - 1);
  for (int i = 0; i < 9; ++i) rep.d.push_back(dist(rng));
  const std::complex<double> eps = (p % 4 == 1) ? std::complex<double>(1.0, 0.0) : std::complex<double>(0.0, 1.0);
  const double inv = 1.0 / std::sqrt(static_cast<double>(p));
  for (auto d : rep.d) {
    const auto G = quadratic_gauss_sum(p, d);
    const auto lhs = std::conj(eps) * inv * G;
    const double expect = arith::kronecker(d, static_cast<std::int64_t>(p));
    rep.max_deviation = std::max(rep.max_deviation, std::abs(lhs - expect));
  }
  return rep;
}

}  // namespace qtwist::primesum
