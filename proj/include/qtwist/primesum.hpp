#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "qtwist/arith.hpp"
#include "qtwist/curve.hpp"

namespace qtwist::primesum {

enum class Signs { Both, Positive };
enum class SumPath { Both, TwistLoop, ResidueTable };

struct PrimeSumConfig {
  std::int64_t D = 1;
  std::uint64_t P = 2;
  arith::WeightSpec w = arith::WeightSpec::gaussian(1.0);
  arith::WeightSpec g = arith::WeightSpec::triangular();
  bool coprime_only = true;
  Signs signs = Signs::Both;
  SumPath path = SumPath::Both;
  bool keep_per_d = false;

  void validate() const;
};

/// Admissible twists: squarefree 0 < |d| <= D (optionally coprime to N, optionally
/// positive only) with family weights w(|d|/D).
struct TwistFamily {
  std::vector<std::int64_t> d;
  std::vector<double> weight;

  std::size_t size() const { return d.size(); }
  double weight_mass() const;
};

TwistFamily make_family(std::uint64_t conductor, std::int64_t D, const arith::WeightSpec& w, bool coprime_only,
                        Signs signs);

struct PrimeSumResult {
  double S = 0.0;
  double normalized = 0.0;  // S / (D sqrt P)
  std::optional<double> S_twist;
  std::optional<double> S_table;
  /// |S_twist - S_table| / (1 + |S|) when both paths ran.
  std::optional<double> path_discrepancy;
  SumPath path = SumPath::Both;
  std::vector<std::int64_t> per_d_index;
  std::vector<double> per_d;  // inner sums, same order as per_d_index
  double seconds_twist = 0.0;
  double seconds_table = 0.0;
};

/// S(D;P) = -sum_d w(d/D) sum_{p<=P} chi_d(p) a_p log p g(p/P) / sqrt p.
/// With path = Both the twist-major and prime-major kernels both run and the
/// result records their agreement.
PrimeSumResult prime_sum_S(const curve::EllipticCurve& base, const curve::ApTable& table, const PrimeSumConfig& cfg);

/// sum_{p<=P} chi_d(p) a_p log p g(p/P) / sqrt p for a single twist.
double twist_inner_sum(const curve::ApTable& table, std::int64_t d, std::uint64_t P, const arith::WeightSpec& g);

/// sum_{p<=t} (m/p) a_p log p / sqrt p, optionally weighted by g(p/P).
double twisted_prime_sum(const curve::ApTable& table, std::int64_t m, double t,
                         const std::optional<arith::WeightSpec>& g = std::nullopt, double P = 1.0);

/// sum_p s_k(p) h(p/x) log p over primes with h(p/x) >= 1e-16, k in {2, 3}.
double sym2_prime_sum(const curve::ApTable& table, double x, const arith::WeightSpec& h);
double sym3_prime_sum(const curve::ApTable& table, double x, const arith::WeightSpec& h);

struct RankEstimate {
  std::int64_t d = 0;
  double r_hat = 0.0;
  double prime_term = 0.0;  // -inner / (Mg(1/2) sqrt P)
  double sym2_term = 0.0;   // -sym2_correction / (Mg(1/2) sqrt P)
  double sym3_term = 0.0;   // -sym3_correction / (Mg(1/2) sqrt P)
  double inner_sum = 0.0;
  /// Prime-square contribution minus its main term -Mg_2(1) sqrt P.
  double sym2_correction = 0.0;
  double sym3_correction = 0.0;
};

struct RankOptions {
  bool sym2 = true;
  bool sym3 = false;
};

/// Explicit-formula estimate of r_an(E_d): 1/2 + prime_term + sym2_term + sym3_term.
RankEstimate rank_estimator(const curve::EllipticCurve& base, const curve::ApTable& table, std::int64_t d,
                            std::uint64_t P, const arith::WeightSpec& g, const RankOptions& opts = {});

struct FamilyRank {
  double average = 0.0;                 // sum w r_hat / sum w
  double weight_mass = 0.0;             // sum w
  double weighted_excess = 0.0;         // sum w (r_hat - 1/2)
  double sym_correction_aggregate = 0.0;  // sum w (sym2_correction + sym3_correction)
  std::vector<RankEstimate> estimates;
};

FamilyRank family_average_rank(const curve::EllipticCurve& base, const curve::ApTable& table,
                               const PrimeSumConfig& cfg, const RankOptions& opts = {});

struct AllCurvesConfig {
  std::int64_t A = 1;
  std::int64_t B = 1;
  std::uint64_t P = 2;
  arith::WeightSpec w2 = arith::WeightSpec::gaussian2d(1.0, 1.0);
  arith::WeightSpec g = arith::WeightSpec::triangular();
  Signs signs = Signs::Both;
  /// Upper limit on (#pairs) * pi(P).
  double work_limit = 2e9;
};

struct AllCurvesResult {
  double S = 0.0;
  double normalized = 0.0;  // S / (A B sqrt P)
  std::uint64_t pairs = 0;
  double weight_mass = 0.0;
};

/// True when p^4 | a and p^6 | b for no prime p (and the model is nonsingular).
bool admissible_pair(std::int64_t a, std::int64_t b);

/// S(A,B;P) over minimal pairs; a_p of each model computed on the fly for odd p.
AllCurvesResult all_curves_prime_sum(const AllCurvesConfig& cfg);

struct PoissonReport {
  std::complex<double> lhs;
  std::complex<double> rhs;
  double abs_diff = 0.0;
  std::int64_t lcm = 1;
};

/// Both sides of sum_b w(Lb/D) e(Lbx/p) = (D/L) sum_m w^(D(m/L - x/p)), L = [a^2, c].
PoissonReport poisson_identity_check(std::int64_t a, std::int64_t c, std::int64_t p, double D,
                                     const arith::WeightSpec& w, std::int64_t x);

struct GaussReport {
  std::uint64_t p = 0;
  std::vector<std::int64_t> d;
  double max_deviation = 0.0;
};

/// (d/p) against conj(eps_p)/sqrt(p) sum_x (x/p) e(dx/p) for d = 0 and 9 sampled d.
GaussReport gauss_sum_check(std::uint64_t p);
/// The raw sum sum_x (x/p) e(dx/p).
std::complex<double> quadratic_gauss_sum(std::uint64_t p, std::int64_t d);

}  // namespace qtwist::primesum
