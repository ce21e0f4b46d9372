#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qtwist/arith.hpp"
#include "qtwist/curve.hpp"

namespace qtwist::io {

// ---------------------------------------------------------------------------
// Curve fixtures
//
//   label,a,b,conductor,root_number
//   11a1,-13392,-1080432,11,1
//   ap_overrides
//   label,p,a_p
//   11a1,2,-2
//
// Blank lines and lines starting with '#' are ignored.

std::vector<curve::EllipticCurve> parse_curves(std::istream& in, const std::string& source);
std::vector<curve::EllipticCurve> load_curves(const std::string& path);
/// Throws FixtureError if the label is absent.
const curve::EllipticCurve& find_curve(const std::vector<curve::EllipticCurve>& curves, const std::string& label);

// ---------------------------------------------------------------------------
// a_p cache
//
// Little-endian layout: "QTAP", u32 version, u32 label length, label bytes,
// i64 a, i64 b, u64 conductor, u64 bound, u64 count, then count records of
// (i32 a_p, u8 reduction), then a u64 FNV-1a checksum of everything before it.

inline constexpr std::uint32_t kCacheVersion = 1;

std::filesystem::path cache_path(const std::filesystem::path& dir, const curve::EllipticCurve& e, std::uint64_t P);
std::string encode_table(const curve::ApTable& table);
/// Decodes and checks the checksum and header against (e, P). Returns
/// nullopt with `reason` filled on any mismatch.
std::optional<curve::ApTable> decode_table(const std::string& bytes, const curve::EllipticCurve& e, std::uint64_t P,
                                           std::shared_ptr<const arith::PrimeTable> primes, std::string* reason);

/// Writes to a temporary file in the same directory and renames it into place.
void cache_store(const std::filesystem::path& dir, const curve::EllipticCurve& e, const curve::ApTable& table);

struct CacheResult {
  curve::ApTable table;
  bool hit = false;
  std::string warning;  // set when an existing file was rejected and rebuilt
};

/// Loads the cached table or builds (and stores) it. A corrupt or mismatched
/// file is rebuilt with a warning. An empty `dir` disables caching.
CacheResult cache_load(const std::filesystem::path& dir, const curve::EllipticCurve& e, std::uint64_t P,
                       std::shared_ptr<const arith::PrimeTable> primes = nullptr);

std::uint64_t fnv1a64(const void* data, std::size_t n);

// ---------------------------------------------------------------------------
// Configuration: flat key=value text, overridable from the command line.

struct RunConfig {
  std::string command;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::int64_t> get_int_list(const std::string& key, const std::vector<std::int64_t>& fallback) const;

  /// Rejects unknown keys, non-positive numeric settings and unresolvable paths.
  void validate() const;
};

/// Keys understood by some command; anything else is a configuration error.
const std::vector<std::string>& known_keys();

/// Parses "key = value" lines ('#' comments, blank lines allowed).
std::map<std::string, std::string> parse_config(std::istream& in, const std::string& source);
std::map<std::string, std::string> load_config(const std::string& path);
/// Splits "key=value"; throws ConfigError otherwise.
std::pair<std::string, std::string> parse_override(const std::string& arg);

// ---------------------------------------------------------------------------
// Tabular output

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

std::string format_cell(const Cell& c);
/// Writes the table as CSV. With `append`, an existing file with the same
/// header gains the new rows; a different header is a ConfigError.
void write_csv(const Table& t, const std::string& path, bool append);
void write_csv(const Table& t, std::ostream& out, bool with_header = true);
/// Array of row objects keyed by header; numbers stay numbers.
void write_json(const Table& t, const std::string& path);
/// Reads back a CSV written by write_csv: integers, then doubles, then strings.
Table read_csv(std::istream& in, const std::string& source);
Table read_csv(const std::string& path);

}  // namespace qtwist::io
