#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qtwist/curve.hpp"

namespace qtwist::lfun {

enum class ValueKind { Central, FirstDerivative };

/// A truncated central-value series together with a rigorous bound on the
/// discarded tail (using |a_n| <= d(n) sqrt(n) <= 2n).
struct LValue {
  double value = 0.0;
  ValueKind kind = ValueKind::Central;
  std::uint64_t cutoff = 0;
  double tail_bound = 0.0;
};

struct SeriesOptions {
  /// Number of terms; 0 picks the smallest cutoff whose tail bound is below
  /// `tail_tolerance`.
  std::uint64_t cutoff = 0;
  double tail_tolerance = 1e-13;
};

/// a_n(E_d) for 1 <= n <= M (index 0 unused), from the base table by
/// multiplicativity. Throws DomainError if the table stops short of M.
std::vector<double> twisted_coefficients(const curve::TwistedCurve& t, const curve::ApTable& table, std::uint64_t M);

/// Terms needed for a tail below `tolerance` at this conductor.
std::uint64_t default_cutoff(std::uint64_t conductor, double tolerance, ValueKind kind);

/// L(E_d, 1) ~ 2 sum a_n/n exp(-2 pi n / sqrt(N_d)). Requires eps(E_d) = +1.
LValue l_value_center(const curve::TwistedCurve& t, const curve::ApTable& table, const SeriesOptions& opts = {});
/// L'(E_d, 1) ~ 2 sum a_n/n E1(2 pi n / sqrt(N_d)). Requires eps(E_d) = -1.
LValue l_prime_center(const curve::TwistedCurve& t, const curve::ApTable& table, const SeriesOptions& opts = {});

enum class Parity { Even, Odd };

/// Analytic-rank evidence: class 0, 1, or 2 (meaning "at least 2").
struct RankClass {
  int cls = 0;
  Parity parity = Parity::Even;
  /// |value| minus the vanishing threshold.
  double margin = 0.0;
  bool low_confidence = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct ClassifyOptions {
  /// Vanishing threshold relative to the series' leading (n = 1) term.
  double tolerance = 1e-3;
  /// Values in [threshold, near_band * threshold) are reported as >= 2 with
  /// the low-confidence flag.
  double near_band = 2.0;
  SeriesOptions series{};
};

RankClass classify_rank(const curve::TwistedCurve& t, const curve::ApTable& table, const ClassifyOptions& opts = {});

/// Infers eps from the functional equation: the Mellin-split value
/// G(A) + eps G(1/A) must not depend on the split point A. Evaluates at
/// A = 1 and A = `split`, returns the sign that is consistent within the tail
/// bounds. Throws DomainError (ambiguous sign) if both or neither agree.
int infer_root_number(const curve::TwistedCurve& t, const curve::ApTable& table, double split = 1.2);
int infer_root_number_from_coefficients(std::span<const double> an, std::uint64_t conductor, double split = 1.2);

struct TwistClass {
  std::int64_t d = 0;
  int root_number = 1;
  RankClass rank;
};

/// Classifies every squarefree 0 < |d| <= D coprime to N (both signs),
/// parallel per twist, ordered by (|d|, sign).
std::vector<TwistClass> classify_family(const curve::EllipticCurve& e, const curve::ApTable& table, std::int64_t D,
                                        const ClassifyOptions& opts = {});

/// Table bound needed by classify_family at radius D.
std::uint64_t family_table_bound(const curve::EllipticCurve& e, std::int64_t D, const ClassifyOptions& opts = {});

// ---------------------------------------------------------------------------
// Zero data

struct TwistZeros {
  std::int64_t d = 0;
  std::vector<double> gamma;
  std::vector<int> multiplicity;
};

/// Ordinates gamma > 0 of nonreal zeros, per twist; conjugates are implied.
struct ZeroData {
  std::vector<TwistZeros> twists;  // sorted by d
  std::string provenance;

  const TwistZeros* find(std::int64_t d) const;
  std::size_t total_zeros() const;
};

/// CSV with header d,gamma,multiplicity; gamma strictly ascending within each
/// contiguous d block. Throws DataError with a line number on malformed input.
ZeroData load_zeros(const std::string& path);
ZeroData parse_zeros(std::istream& in, const std::string& source);

/// Ranks fixture: CSV d,rank.
std::map<std::int64_t, int> load_ranks(const std::string& path);
std::map<std::int64_t, int> parse_ranks(std::istream& in, const std::string& source);

}  // namespace qtwist::lfun
