#include "qtwist/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <set>
#include <sstream>

#include "qtwist/error.hpp"
#include "qtwist/parallel.hpp"

namespace qtwist::stats {

namespace {

std::uint64_t abs_u(std::int64_t d) { return d < 0 ? static_cast<std::uint64_t>(-(d + 1)) + 1 : static_cast<std::uint64_t>(d); }

void require_ascending(const std::vector<std::int64_t>& grid, const char* who) {
  if (grid.empty()) throw DomainError(std::string(who) + ": empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 1) throw DomainError(std::string(who) + ": grid values must be >= 1");
    if (i && grid[i] <= grid[i - 1]) throw DomainError(std::string(who) + ": grid must be strictly increasing");
  }
}

}  // namespace

GrowthFit fit_growth(std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size()) throw DomainError("fit_growth: sample vectors differ in length");
  if (x.size() < 4) throw DomainError("fit_growth: at least 4 samples are required");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw DomainError("fit_growth: samples must be positive and finite");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_growth: sample abscissae are all equal");
  GrowthFit fit;
  fit.beta = sxy / sxx;
  fit.log_constant = my - fit.beta * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.log_constant + fit.beta * lx[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(n));
  fit.x = std::move(x);
  fit.y = std::move(y);
  return fit;
}

std::vector<std::int64_t> geometric_grid(std::int64_t lo, std::int64_t hi, int points) {
  if (lo < 1 || hi < lo || points < 1) throw DomainError("geometric_grid: need 1 <= lo <= hi and points >= 1");
  std::vector<std::int64_t> out;
  const double llo = std::log(static_cast<double>(lo)), lhi = std::log(static_cast<double>(hi));
  for (int i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    const auto v = static_cast<std::int64_t>(std::llround(std::exp(llo + t * (lhi - llo))));
    if (out.empty() || v > out.back()) out.push_back(v);
  }
  out.back() = hi;
  return out;
}

RootNumberSum root_number_sum(const curve::EllipticCurve& e, const std::vector<std::int64_t>& grid,
                              RootNumberMode mode, const arith::WeightSpec& w) {
  require_ascending(grid, "root_number_sum");
  if (mode == RootNumberMode::AllSquarefree && !arith::is_squarefree(e.conductor))
    throw DomainError("root_number_sum: all-squarefree mode requires a squarefree conductor");
  const std::int64_t Dmax = grid.back();
  const auto sf = arith::squarefree_sieve(static_cast<std::uint64_t>(Dmax));

  RootNumberSum out;
  out.mode = mode;
  out.grid = grid;
  std::vector<std::pair<std::uint64_t, int>> eps_abs;  // (|d|, eps) in step order
  std::int64_t running = 0;
  for (std::int64_t m = 1; m <= Dmax; ++m) {
    if (!sf.squarefree(static_cast<std::uint64_t>(m))) continue;
    const bool coprime = arith::gcd(static_cast<std::uint64_t>(m), e.conductor) == 1;
    if (mode == RootNumberMode::Coprime && !coprime) continue;
    for (std::int64_t d : {-m, m}) {
      const int eps = coprime ? curve::root_number_coprime(e, d) : curve::root_number_squarefree_n(e, d);
      running += eps;
      out.steps.push_back({d, eps, running});
      eps_abs.emplace_back(static_cast<std::uint64_t>(m), eps);
    }
  }
  std::int64_t best = 1;
  std::size_t k = 0;
  std::int64_t sum = 0;
  for (std::int64_t D : grid) {
    while (k < out.steps.size() && abs_u(out.steps[k].d) <= static_cast<std::uint64_t>(D)) sum = out.steps[k++].partial;
    out.sums.push_back(sum);
    out.counts.push_back(static_cast<std::int64_t>(k));
    std::vector<double> terms(k);
    for (std::size_t j = 0; j < k; ++j)
      terms[j] = w(static_cast<double>(eps_abs[j].first) / static_cast<double>(D)) * eps_abs[j].second;
    out.weighted_sums.push_back(tree_sum(terms));
  }
  // Running maximum over every admissible D' <= D (not only grid points).
  k = 0;
  for (std::int64_t D : grid) {
    while (k < out.steps.size() && abs_u(out.steps[k].d) <= static_cast<std::uint64_t>(D)) {
      best = std::max<std::int64_t>(best, std::llabs(out.steps[k].partial));
      ++k;
    }
    out.running_max.push_back(best);
  }
  if (grid.size() >= 4) {
    std::vector<double> x(grid.begin(), grid.end()), y(out.running_max.begin(), out.running_max.end());
    out.fit = fit_growth(std::move(x), std::move(y));
  }
  return out;
}

RankDistribution rank_distribution(const std::vector<lfun::TwistClass>& classes) {
  if (classes.empty()) throw DomainError("rank_distribution: empty family");
  RankDistribution r;
  r.total = static_cast<std::int64_t>(classes.size());
  for (const auto& c : classes) {
    const int cls = std::clamp(c.rank.cls, 0, 2);
    ++r.counts[cls];
    if (c.rank.low_confidence) ++r.low_confidence;
    const bool odd = c.rank.parity == lfun::Parity::Odd;
    if (odd != (c.root_number == -1)) ++r.parity_mismatches;
  }
  for (int i = 0; i < 3; ++i) r.proportions[i] = static_cast<double>(r.counts[i]) / static_cast<double>(r.total);
  return r;
}

CharSumReport squarefree_char_sum(const curve::EllipticCurve& e, std::uint64_t n, std::int64_t D,
                                  const arith::WeightSpec& w) {
  if (n < 1) throw DomainError("squarefree_char_sum: n must be >= 1");
  if (D < 1) throw DomainError("squarefree_char_sum: D must be >= 1");
  if (n > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
    throw DomainError("squarefree_char_sum: n out of range");
  const auto fam = primesum::make_family(e.conductor, D, w, true, primesum::Signs::Both);
  const auto ni = static_cast<std::int64_t>(n);
  std::vector<double> terms(fam.size());
  for (std::size_t j = 0; j < fam.size(); ++j) terms[j] = fam.weight[j] * arith::kronecker(fam.d[j], ni);

  CharSumReport r;
  r.n = n;
  r.D = D;
  r.admissible = static_cast<std::int64_t>(fam.size());
  r.direct = tree_sum(terms);
  const auto root = static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<double>(n))));
  r.kappa = (root * root == n) ? 1 : 0;
  if (r.kappa) {
    const double zeta2 = std::numbers::pi * std::numbers::pi / 6.0;
    double main = static_cast<double>(D) / zeta2 * w.mass_symmetric_unit();
    for (auto p : arith::prime_factors(e.conductor))
      main /= 1.0 + arith::kronecker(static_cast<std::int64_t>(p), ni) / static_cast<double>(p);
    for (auto p : arith::prime_factors(n)) main /= 1.0 + 1.0 / static_cast<double>(p);
    r.main_term = main;
  }
  r.residual = r.direct - r.main_term;
  return r;
}

CharSumScan squarefree_char_sum_scan(const curve::EllipticCurve& e, std::uint64_t n,
                                     const std::vector<std::int64_t>& grid, const arith::WeightSpec& w) {
  require_ascending(grid, "squarefree_char_sum_scan");
  CharSumScan scan;
  for (auto D : grid) scan.reports.push_back(squarefree_char_sum(e, n, D, w));
  if (grid.size() >= 4) {
    std::vector<double> x, y;
    for (const auto& r : scan.reports) {
      x.push_back(static_cast<double>(r.D));
      y.push_back(std::max(std::abs(r.residual), 1e-300));
    }
    scan.residual_fit = fit_growth(std::move(x), std::move(y));
  }
  return scan;
}

OmegaReport omega_moments(std::uint64_t D, unsigned q, std::uint64_t memory_budget) {
  if (q < 1) throw DomainError("omega_moments: q must be >= 1");
  if (D < 16) throw DomainError("omega_moments: D must be >= 16");
  if (D + 1 > memory_budget) {
    std::ostringstream os;
    os << "omega_moments: D=" << D << " needs " << D + 1 << " bytes, budget is " << memory_budget;
    throw CapacityError(os.str());
  }
  std::vector<std::uint8_t> omega(D + 1, 0);
  for (std::uint64_t p = 2; p <= D; ++p) {
    if (omega[p]) continue;  // composite: already hit by a smaller prime
    for (std::uint64_t m = p; m <= D; m += p) ++omega[m];
  }
  OmegaReport r;
  r.D = D;
  r.q = q;
  for (std::uint64_t d = 1; d <= D; ++d) {
    if (omega[d] >= r.histogram.size()) r.histogram.resize(omega[d] + 1, 0);
    ++r.histogram[omega[d]];
  }
  for (std::size_t k = 1; k < r.histogram.size(); ++k)
    r.moment += curve::BigInt(r.histogram[k]) * boost::multiprecision::pow(curve::BigInt(k), q);
  const double ll = std::log(std::log(static_cast<double>(D)));
  r.bound = 2.0 * static_cast<double>(D) * std::pow(ll, static_cast<double>(q));
  r.ratio = r.moment.convert_to<double>() / r.bound;
  return r;
}

std::int64_t omega_rank_bound(std::int64_t d, std::int64_t C) {
  if (d == 0 || !arith::is_squarefree(abs_u(d))) throw DomainError("omega_rank_bound: d must be squarefree and nonzero");
  return 18 * static_cast<std::int64_t>(arith::prime_factors(abs_u(d)).size()) + C;
}

double TStatistic::standard_error() const {
  return y.empty() ? 0.0 : std::sqrt(variance / static_cast<double>(y.size()));
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw DomainError("uniform_grid: need step > 0 and hi >= lo");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(lo + step * static_cast<double>(k));
  return out;
}

TStatistic t_statistic(const lfun::ZeroData& zeros, const primesum::TwistFamily& family, std::int64_t D,
                       const std::vector<double>& y_grid) {
  for (std::size_t i = 1; i < y_grid.size(); ++i)
    if (!(y_grid[i] > y_grid[i - 1])) throw DomainError("t_statistic: y grid must be strictly increasing");

  // Flatten (weight * multiplicity * 2 / (rho (rho + 1)), gamma) over the family.
  std::vector<std::complex<double>> coef;
  std::vector<double> gam;
  std::vector<std::int64_t> missing;
  for (std::size_t j = 0; j < family.size(); ++j) {
    const auto* tz = zeros.find(family.d[j]);
    if (!tz) {
      missing.push_back(family.d[j]);
      continue;
    }
    for (std::size_t k = 0; k < tz->gamma.size(); ++k) {
      const std::complex<double> rho(0.5, tz->gamma[k]);
      coef.push_back(family.weight[j] * tz->multiplicity[k] / (rho * (rho + 1.0)));
      gam.push_back(tz->gamma[k]);
    }
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << "t_statistic: zero data missing for " << missing.size() << " twist(s): d =";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) os << ' ' << missing[i];
    if (missing.size() > 20) os << " ...";
    throw DataError(os.str());
  }

  TStatistic t;
  t.D = D;
  t.y = y_grid;
  t.values.assign(y_grid.size(), 0.0);
  constexpr std::size_t kChunk = 64;
  ChunkPlan plan{y_grid.size(), kChunk};
  parallel_for_chunks(plan.count(), [&](std::size_t ci) {
    std::vector<double> re(coef.size());
    for (std::size_t i = plan.begin(ci); i < plan.end(ci); ++i) {
      const double y = y_grid[i];
      for (std::size_t k = 0; k < coef.size(); ++k) re[k] = 2.0 * (coef[k] * std::polar(1.0, y * gam[k])).real();
      t.values[i] = {tree_sum(re), 0.0};
    }
  });
  if (!t.values.empty()) {
    std::vector<double> re(t.values.size()), im(t.values.size());
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      re[i] = t.values[i].real();
      im[i] = t.values[i].imag();
      t.max_imag = std::max(t.max_imag, std::abs(im[i]));
    }
    const double n = static_cast<double>(t.values.size());
    t.mean = {tree_sum(re) / n, tree_sum(im) / n};
    std::vector<double> dev(t.values.size());
    for (std::size_t i = 0; i < t.values.size(); ++i) dev[i] = std::norm(t.values[i] - t.mean);
    t.variance = tree_sum(dev) / n;
  }
  return t;
}

VarianceScaling t_variance_scaling(const lfun::ZeroData& zeros, std::uint64_t conductor,
                                   const std::vector<std::int64_t>& D_grid, const arith::WeightSpec& w,
                                   const std::vector<double>& y_grid, primesum::Signs signs) {
  require_ascending(D_grid, "t_variance_scaling");
  VarianceScaling out;
  double num = 0.0, den = 0.0;
  for (auto D : D_grid) {
    const auto fam = primesum::make_family(conductor, D, w, true, signs);
    const auto t = t_statistic(zeros, fam, D, y_grid);
    const double x = static_cast<double>(D) * std::log(static_cast<double>(D));
    out.D.push_back(D);
    out.variance.push_back(t.variance);
    out.d_log_d.push_back(x);
    num += x * t.variance;
    den += x * x;
    if (D == D_grid.back())
      for (auto d : fam.d) out.zero_counts.emplace_back(d, zeros.find(d)->gamma.size());
  }
  out.constant = num / den;
  double ss = 0.0, sv = 0.0;
  for (std::size_t i = 0; i < out.D.size(); ++i) {
    const double r = out.variance[i] - out.constant * out.d_log_d[i];
    ss += r * r;
    sv += out.variance[i] * out.variance[i];
  }
  out.residual = sv > 0.0 ? std::sqrt(ss / sv) : 0.0;
  return out;
}

CensusReport multiplicity_census(const lfun::ZeroData& zeros, double tol) {
  if (!(tol >= 0.0)) throw DomainError("multiplicity_census: tol must be >= 0");
  std::vector<std::pair<double, std::int64_t>> all;
  for (const auto& tz : zeros.twists)
    for (double g : tz.gamma) all.emplace_back(g, tz.d);
  std::sort(all.begin(), all.end());
  CensusReport rep;
  rep.tol = tol;
  if (all.empty()) return rep;
  rep.max_multiplicity = 1;
  std::size_t start = 0;
  auto close = [&](std::size_t end) {
    std::set<std::int64_t> ds;
    for (std::size_t i = start; i < end; ++i) ds.insert(all[i].second);
    rep.max_multiplicity = std::max(rep.max_multiplicity, ds.size());
    if (ds.size() >= 2) {
      ZeroCluster c;
      for (std::size_t i = start; i < end; ++i) c.members.emplace_back(all[i].second, all[i].first);
      c.distinct_twists = ds.size();
      rep.offending.push_back(std::move(c));
    }
  };
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].first - all[i - 1].first > tol) {
      close(i);
      start = i;
    }
  }
  close(all.size());
  return rep;
}

}  // namespace qtwist::stats
