#include "qtwist/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "csv_util.hpp"
#include "qtwist/error.hpp"

namespace qtwist::io {

namespace fs = std::filesystem;
using detail::parse_int;
using detail::split_csv;
using detail::trim;
using detail::where;

// ---------------------------------------------------------------------------
// Curve fixtures

namespace {

bool skip_line(std::string_view s) { return s.empty() || s.front() == '#'; }

void expect_header(const std::vector<std::string_view>& f, std::initializer_list<const char*> names,
                   const std::string& source, std::size_t line) {
  bool ok = f.size() == names.size();
  std::size_t i = 0;
  for (const char* n : names) {
    if (!ok) break;
    ok = f[i++] == n;
  }
  if (!ok) {
    std::string want;
    for (const char* n : names) want += (want.empty() ? "" : ",") + std::string(n);
    throw FixtureError(where(source, line) + ": expected header '" + want + "'");
  }
}

}  // namespace

std::vector<curve::EllipticCurve> parse_curves(std::istream& in, const std::string& source) {
  struct Row {
    std::string label;
    std::int64_t a, b;
    std::uint64_t conductor;
    int eps;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::map<std::string, std::map<std::uint32_t, int>> overrides;
  enum { CurveHeader, Curves, OverrideHeader, Overrides } state = CurveHeader;
  std::string raw;
  std::size_t line = 0;
  try {
    while (std::getline(in, raw)) {
      ++line;
      const auto s = trim(raw);
      if (skip_line(s)) continue;
      const auto f = split_csv(s);
      switch (state) {
        case CurveHeader:
          expect_header(f, {"label", "a", "b", "conductor", "root_number"}, source, line);
          state = Curves;
          break;
        case Curves:
          if (f.size() == 1 && f[0] == "ap_overrides") {
            state = OverrideHeader;
            break;
          }
          if (f.size() != 5) throw FixtureError(where(source, line) + ": expected 5 fields");
          rows.push_back({std::string(f[0]), parse_int<std::int64_t>(f[1], source, line, "a"),
                          parse_int<std::int64_t>(f[2], source, line, "b"),
                          parse_int<std::uint64_t>(f[3], source, line, "conductor"),
                          parse_int<int>(f[4], source, line, "root_number"), line});
          break;
        case OverrideHeader:
          expect_header(f, {"label", "p", "a_p"}, source, line);
          state = Overrides;
          break;
        case Overrides: {
          if (f.size() != 3) throw FixtureError(where(source, line) + ": expected 3 fields");
          auto& m = overrides[std::string(f[0])];
          const auto p = parse_int<std::uint32_t>(f[1], source, line, "p");
          if (m.count(p)) throw FixtureError(where(source, line) + ": duplicate override");
          m[p] = parse_int<int>(f[2], source, line, "a_p");
          break;
        }
      }
    }
  } catch (const DataError& err) {
    throw FixtureError(err.what());
  }
  if (state == CurveHeader) throw FixtureError(source + ": no curve header");

  std::set<std::string> labels;
  std::vector<curve::EllipticCurve> out;
  for (const auto& r : rows) {
    if (!labels.insert(r.label).second) throw FixtureError(where(source, r.line) + ": duplicate label " + r.label);
    auto it = overrides.find(r.label);
    try {
      out.push_back(curve::make_curve(r.label, r.a, r.b, r.conductor, r.eps,
                                      it == overrides.end() ? std::map<std::uint32_t, int>{} : it->second));
    } catch (const FixtureError& err) {
      throw FixtureError(where(source, r.line) + ": " + err.what());
    }
  }
  for (const auto& [label, _] : overrides)
    if (!labels.count(label)) throw FixtureError(source + ": overrides for unknown curve " + label);
  return out;
}

std::vector<curve::EllipticCurve> load_curves(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FixtureError("cannot open curve fixture " + path);
  return parse_curves(in, path);
}

const curve::EllipticCurve& find_curve(const std::vector<curve::EllipticCurve>& curves, const std::string& label) {
  for (const auto& c : curves)
    if (c.label == label) return c;
  throw FixtureError("curve '" + label + "' not found in fixtures");
}

// ---------------------------------------------------------------------------
// Cache

std::uint64_t fnv1a64(const void* data, std::size_t n) {
  auto p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

template <class T>
void put(std::string& out, T v) {
  auto u = static_cast<std::make_unsigned_t<T>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}
  template <class T>
  bool get(T& v) {
    if (pos_ + sizeof(T) > s_.size()) return false;
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(s_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    v = static_cast<T>(u);
    return true;
  }
  bool bytes(std::string& out, std::size_t n) {
    if (pos_ + n > s_.size()) return false;
    out.assign(s_.substr(pos_, n));
    pos_ += n;
    return true;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

std::string safe_label(const std::string& label) {
  std::string s;
  for (char c : label) s.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return s;
}

}  // namespace

fs::path cache_path(const fs::path& dir, const curve::EllipticCurve& e, std::uint64_t P) {
  return dir / (safe_label(e.label) + "_P" + std::to_string(P) + ".qtap");
}

std::string encode_table(const curve::ApTable& table) {
  std::string out = "QTAP";
  put<std::uint32_t>(out, kCacheVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(table.label.size()));
  out += table.label;
  put<std::int64_t>(out, table.a);
  put<std::int64_t>(out, table.b);
  put<std::uint64_t>(out, table.conductor);
  put<std::uint64_t>(out, table.bound);
  put<std::uint64_t>(out, table.ap.size());
  for (std::size_t i = 0; i < table.ap.size(); ++i) {
    put<std::int32_t>(out, table.ap[i]);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(table.reduction[i]));
  }
  put<std::uint64_t>(out, fnv1a64(out.data(), out.size()));
  return out;
}

std::optional<curve::ApTable> decode_table(const std::string& bytes, const curve::EllipticCurve& e, std::uint64_t P,
                                           std::shared_ptr<const arith::PrimeTable> primes, std::string* reason) {
  auto fail = [&](const std::string& why) -> std::optional<curve::ApTable> {
    if (reason) *reason = why;
    return std::nullopt;
  };
  if (bytes.size() < 4 + 8 || bytes.compare(0, 4, "QTAP") != 0) return fail("bad magic or truncated file");
  const std::size_t body = bytes.size() - 8;
  Reader tail(std::string_view(bytes).substr(body));
  std::uint64_t stored = 0;
  tail.get(stored);
  if (stored != fnv1a64(bytes.data(), body)) return fail("checksum mismatch");

  Reader r(std::string_view(bytes).substr(4, body - 4));
  std::uint32_t version = 0, len = 0;
  curve::ApTable t;
  std::uint64_t count = 0;
  if (!r.get(version) || version != kCacheVersion) return fail("unsupported version");
  if (!r.get(len) || !r.bytes(t.label, len)) return fail("truncated header");
  if (!r.get(t.a) || !r.get(t.b) || !r.get(t.conductor) || !r.get(t.bound) || !r.get(count))
    return fail("truncated header");
  if (t.label != e.label || t.a != e.a || t.b != e.b || t.conductor != e.conductor || t.bound != P)
    return fail("header does not match the requested curve and bound");
  if (!primes || primes->bound < P) primes = std::make_shared<const arith::PrimeTable>(arith::sieve_primes(P));
  if (count != primes->count_upto(P)) return fail("prime count mismatch");
  t.primes = primes;
  t.ap.resize(count);
  t.reduction.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint8_t tag = 0;
    if (!r.get(t.ap[i]) || !r.get(tag)) return fail("truncated payload");
    if (tag > 3) return fail("bad reduction tag");
    t.reduction[i] = static_cast<curve::Reduction>(tag);
  }
  if (r.pos() != body - 4) return fail("trailing bytes");
  return t;
}

void cache_store(const fs::path& dir, const curve::EllipticCurve& e, const curve::ApTable& table) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const auto target = cache_path(dir, e, table.bound);
  const auto tmp = fs::path(target.string() + ".tmp");
  const auto bytes = encode_table(table);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write cache file " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ConfigError("short write to cache file " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) throw ConfigError("cannot rename cache file into place: " + ec.message());
}

CacheResult cache_load(const fs::path& dir, const curve::EllipticCurve& e, std::uint64_t P,
                       std::shared_ptr<const arith::PrimeTable> primes) {
  CacheResult res;
  if (!dir.empty()) {
    const auto path = cache_path(dir, e, P);
    std::ifstream in(path, std::ios::binary);
    if (in) {
      std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      std::string reason;
      if (auto t = decode_table(bytes, e, P, primes, &reason)) {
        res.table = std::move(*t);
        res.hit = true;
        return res;
      }
      res.warning = "cache " + path.string() + " rejected (" + reason + "); rebuilding";
    }
  }
  res.table = curve::build_ap_table(e, P, std::move(primes));
  if (!dir.empty()) cache_store(dir, e, res.table);
  return res;
}

// ---------------------------------------------------------------------------
// Config

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "curves", "curve", "D", "P", "A", "B", "w", "g", "h", "coprime", "signs", "path", "threads", "work_budget",
      "output", "json", "cache_dir", "d", "n", "q", "m", "t", "x", "tol", "D_grid", "x_grid", "zeros", "ranks",
      "y_lo", "y_hi", "y_step", "a", "c", "p", "p_max", "mode", "sym2", "sym3", "C_E", "per_d", "memory_budget"};
  return keys;
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

std::int64_t RunConfig::get_int(const std::string& key, std::int64_t fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  // Accept exact scientific notation such as 1e6.
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used == it->second.size() && v == std::floor(v) && std::abs(v) < 9.2e18) return static_cast<std::int64_t>(v);
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' must be an integer, got '" + it->second + "'");
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used == it->second.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("config key '" + key + "' must be a number, got '" + it->second + "'");
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  const auto& v = it->second;
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "' must be a boolean, got '" + v + "'");
}

std::vector<std::int64_t> RunConfig::get_int_list(const std::string& key,
                                                  const std::vector<std::int64_t>& fallback) const {
  auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<std::int64_t> out;
  RunConfig tmp;
  for (auto f : split_csv(it->second)) {
    tmp.values[key] = std::string(f);
    out.push_back(tmp.get_int(key, 0));
  }
  return out;
}

void RunConfig::validate() const {
  const auto& keys = known_keys();
  for (const auto& [k, v] : values)
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("unknown config key '" + k + "'");
  for (const char* k : {"D", "P", "A", "B", "threads", "work_budget", "q", "memory_budget"})
    if (has(k) && get_int(k, 1) < 1) throw ConfigError(std::string("config key '") + k + "' must be positive");
  for (const char* k : {"tol", "y_step"})
    if (has(k) && !(get_double(k, 1.0) > 0.0)) throw ConfigError(std::string("config key '") + k + "' must be positive");
  for (const char* k : {"curves", "zeros", "ranks"})
    if (has(k) && !fs::exists(get(k))) throw ConfigError(std::string("config key '") + k + "': no such file " + get(k));
  for (const char* k : {"output", "json"}) {
    if (!has(k) || get(k).empty()) continue;
    const auto parent = fs::path(get(k)).parent_path();
    if (!parent.empty() && !fs::is_directory(parent))
      throw ConfigError(std::string("config key '") + k + "': directory does not exist: " + parent.string());
  }
  for (const char* k : {"w", "g", "h"})
    if (has(k)) {
      try {
        arith::parse_weight(get(k));
      } catch (const Error& err) {
        throw ConfigError(std::string("config key '") + k + "': " + err.what());
      }
    }
}

std::map<std::string, std::string> parse_config(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto s = trim(raw);
    if (skip_line(s)) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where(source, line) + ": expected key=value");
    const auto key = trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError(where(source, line) + ": empty key");
    out[std::string(key)] = std::string(trim(s.substr(eq + 1)));
  }
  return out;
}

std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in, path);
}

std::pair<std::string, std::string> parse_override(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + arg + "'");
  return {std::string(trim(std::string_view(arg).substr(0, eq))), std::string(trim(std::string_view(arg).substr(eq + 1)))};
}

// ---------------------------------------------------------------------------
// Tables

void Table::add(std::vector<Cell> row) {
  if (row.size() != header.size()) throw Error(ErrorKind::Internal, "table row width does not match header");
  rows.push_back(std::move(row));
}

std::string format_cell(const Cell& c) {
  if (auto i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (auto d = std::get_if<double>(&c)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    std::string s = buf;
    // Keep doubles distinguishable from integers when read back.
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
  }
  return std::get<std::string>(c);
}

void write_csv(const Table& t, std::ostream& out, bool with_header) {
  if (with_header) {
    for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
    out << '\n';
  }
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
}

void write_csv(const Table& t, const std::string& path, bool append) {
  bool header = true;
  if (append && fs::exists(path) && fs::file_size(path) > 0) {
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    std::string want;
    for (std::size_t i = 0; i < t.header.size(); ++i) want += (i ? "," : "") + t.header[i];
    if (trim(first) != want) throw ConfigError("output " + path + " has a different header; refusing to append");
    header = false;
  }
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw ConfigError("cannot write output " + path);
  write_csv(t, out, header);
}

void write_json(const Table& t, const std::string& path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i)
      std::visit([&](const auto& v) { obj[t.header[i]] = v; }, row[i]);
    arr.push_back(std::move(obj));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write json output " + path);
  out << arr.dump(2) << '\n';
}

Table read_csv(std::istream& in, const std::string& source) {
  Table t;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto s = trim(raw);
    if (s.empty()) continue;
    const auto f = split_csv(s);
    if (t.header.empty()) {
      for (auto x : f) t.header.emplace_back(x);
      continue;
    }
    if (f.size() != t.header.size()) throw DataError(where(source, line) + ": wrong number of fields");
    std::vector<Cell> row;
    for (auto x : f) {
      std::int64_t iv{};
      const auto r = std::from_chars(x.data(), x.data() + x.size(), iv);
      if (!x.empty() && r.ec == std::errc{} && r.ptr == x.data() + x.size()) {
        row.emplace_back(iv);
        continue;
      }
      const std::string str(x);
      char* end = nullptr;
      const double dv = std::strtod(str.c_str(), &end);
      if (!str.empty() && end == str.c_str() + str.size())
        row.emplace_back(dv);
      else
        row.emplace_back(str);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_csv(in, path);
}

}  // namespace qtwist::io
