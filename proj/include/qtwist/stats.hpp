#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "qtwist/arith.hpp"
#include "qtwist/curve.hpp"
#include "qtwist/lfun.hpp"
#include "qtwist/primesum.hpp"

namespace qtwist::stats {

/// Least-squares fit log y = log C + beta log x over the raw samples.
struct GrowthFit {
  std::vector<double> x;
  std::vector<double> y;
  double beta = 0.0;
  double log_constant = 0.0;
  /// Root-mean-square residual of the log-log fit.
  double residual = 0.0;
};

/// Requires at least 4 samples with x > 0 and y > 0; throws DomainError otherwise.
GrowthFit fit_growth(std::vector<double> x, std::vector<double> y);

// ---------------------------------------------------------------------------
// Root numbers

enum class RootNumberMode { Coprime, AllSquarefree };

struct RootNumberStep {
  std::int64_t d = 0;
  int root_number = 0;
  std::int64_t partial = 0;  // running sum including this d
};

struct RootNumberSum {
  RootNumberMode mode = RootNumberMode::Coprime;
  std::vector<std::int64_t> grid;
  std::vector<std::int64_t> sums;          // sum over |d| <= D of eps(E_d)
  std::vector<double> weighted_sums;       // sum of w(|d|/D) eps(E_d)
  std::vector<std::int64_t> counts;        // admissible d with |d| <= D
  std::vector<std::int64_t> running_max;   // max over D' <= D of |sums(D')|, floored at 1
  std::vector<RootNumberStep> steps;       // every admissible d, ordered by (|d|, sign)
  std::optional<GrowthFit> fit;            // of running_max against D, when the grid has >= 4 points
};

/// Partial sums of eps(E_d) over squarefree 0 < |d| <= D on the grid (ascending).
/// AllSquarefree mode includes d sharing primes with N and requires squarefree N.
RootNumberSum root_number_sum(const curve::EllipticCurve& e, const std::vector<std::int64_t>& grid,
                              RootNumberMode mode, const arith::WeightSpec& w = arith::WeightSpec::gaussian(1.0));

/// Geometric grid from lo to hi with `points` entries (rounded, strictly increasing).
std::vector<std::int64_t> geometric_grid(std::int64_t lo, std::int64_t hi, int points);

// ---------------------------------------------------------------------------
// Rank distribution

struct RankDistribution {
  std::int64_t total = 0;
  std::int64_t counts[3] = {0, 0, 0};
  double proportions[3] = {0.0, 0.0, 0.0};
  std::int64_t low_confidence = 0;
  /// Twists whose class parity differs from the root-number parity.
  std::int64_t parity_mismatches = 0;
};

/// Throws DomainError on an empty family.
RankDistribution rank_distribution(const std::vector<lfun::TwistClass>& classes);

// ---------------------------------------------------------------------------
// Squarefree character sums

struct CharSumReport {
  std::uint64_t n = 1;
  std::int64_t D = 1;
  int kappa = 0;
  double direct = 0.0;
  double main_term = 0.0;
  double residual = 0.0;
  std::int64_t admissible = 0;
};

/// sum over squarefree 0 < |d| <= D coprime to N of w(|d|/D) (d/n), against
/// kappa(n) (D / zeta(2)) (int w) prod_{p|N} (1 + (p/n)/p)^-1 prod_{p|n} (1 + 1/p)^-1.
CharSumReport squarefree_char_sum(const curve::EllipticCurve& e, std::uint64_t n, std::int64_t D,
                                  const arith::WeightSpec& w);

struct CharSumScan {
  std::vector<CharSumReport> reports;
  std::optional<GrowthFit> residual_fit;
};

/// squarefree_char_sum over a D grid plus a growth fit of |residual|.
CharSumScan squarefree_char_sum_scan(const curve::EllipticCurve& e, std::uint64_t n,
                                     const std::vector<std::int64_t>& grid, const arith::WeightSpec& w);

// ---------------------------------------------------------------------------
// omega(d)

struct OmegaReport {
  std::uint64_t D = 0;
  unsigned q = 1;
  curve::BigInt moment = 0;  // sum_{d <= D} omega(d)^q
  double bound = 0.0;        // 2 D (log log D)^q
  double ratio = 0.0;
  std::vector<std::uint64_t> histogram;  // histogram[k] = #{d <= D : omega(d) = k}
};

/// Exact moment from a distinct-prime-factor sieve. Throws DomainError for
/// q < 1 or D < 16 and CapacityError beyond the memory budget.
OmegaReport omega_moments(std::uint64_t D, unsigned q, std::uint64_t memory_budget = arith::kDefaultMemoryBudget);

/// 18 omega(|d|) + C.
std::int64_t omega_rank_bound(std::int64_t d, std::int64_t C);

// ---------------------------------------------------------------------------
// Zero statistics

struct TStatistic {
  std::int64_t D = 0;
  std::vector<double> y;
  std::vector<std::complex<double>> values;
  std::complex<double> mean;
  double variance = 0.0;
  double max_imag = 0.0;
  /// sqrt(variance / #grid): standard error of the mean for independent samples.
  double standard_error() const;
};

/// T(D;y) = sum_d w_d sum_{gamma > 0} m 2 Re[e^{i y gamma} / (rho (rho + 1))],
/// rho = 1/2 + i gamma, over the given family. Every twist of the family must
/// appear in `zeros`; missing ones raise DataError naming them.
TStatistic t_statistic(const lfun::ZeroData& zeros, const primesum::TwistFamily& family, std::int64_t D,
                       const std::vector<double>& y_grid);

/// Uniform grid lo, lo + step, ..., <= hi.
std::vector<double> uniform_grid(double lo, double hi, double step);

struct VarianceScaling {
  std::vector<std::int64_t> D;
  std::vector<double> variance;
  std::vector<double> d_log_d;
  /// Least-squares c in variance ~ c D log D (through the origin).
  double constant = 0.0;
  /// Relative RMS residual of the fit.
  double residual = 0.0;
  std::vector<std::pair<std::int64_t, std::size_t>> zero_counts;  // (d, #gamma) at the largest D
};

VarianceScaling t_variance_scaling(const lfun::ZeroData& zeros, std::uint64_t conductor,
                                   const std::vector<std::int64_t>& D_grid, const arith::WeightSpec& w,
                                   const std::vector<double>& y_grid,
                                   primesum::Signs signs = primesum::Signs::Both);

struct ZeroCluster {
  std::vector<std::pair<std::int64_t, double>> members;  // (d, gamma)
  std::size_t distinct_twists = 0;
};

struct CensusReport {
  double tol = 1e-6;
  std::size_t max_multiplicity = 0;
  std::vector<ZeroCluster> offending;  // clusters spanning >= 2 twists
};

/// Single-linkage clusters of ordinates within tol across twists.
CensusReport multiplicity_census(const lfun::ZeroData& zeros, double tol = 1e-6);

}  // namespace qtwist::stats
