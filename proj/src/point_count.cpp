// Point counting on short Weierstrass models over prime fields.

#include <algorithm>
#include <cmath>
#include <iterator>
#include <utility>
#include <vector>

#include "qtwist/curve.hpp"
#include "qtwist/error.hpp"

namespace qtwist::curve {

namespace {

using u64 = std::uint64_t;

u64 mod_of(std::int64_t v, u64 p) {
  const auto m = static_cast<std::int64_t>(p);
  std::int64_t r = v % m;
  return static_cast<u64>(r < 0 ? r + m : r);
}

// p < 2^32 throughout, so products fit in 64 bits.
struct Field {
  u64 p;
  u64 add(u64 x, u64 y) const { u64 s = x + y; return s >= p ? s - p : s; }
  u64 sub(u64 x, u64 y) const { return x >= y ? x - y : x + p - y; }
  u64 mul(u64 x, u64 y) const { return x * y % p; }
  u64 inv(u64 x) const {
    std::int64_t t = 0, nt = 1;
    std::int64_t r = static_cast<std::int64_t>(p), nr = static_cast<std::int64_t>(x);
    while (nr != 0) {
      const std::int64_t q = r / nr;
      t = std::exchange(nt, t - q * nt);
      r = std::exchange(nr, r - q * nr);
    }
    return t < 0 ? static_cast<u64>(t + static_cast<std::int64_t>(p)) : static_cast<u64>(t);
  }
  u64 pow(u64 x, u64 e) const {
    u64 r = 1;
    while (e) {
      if (e & 1) r = mul(r, x);
      x = mul(x, x);
      e >>= 1;
    }
    return r;
  }
  // Tonelli-Shanks; x must be a nonzero square.
  u64 sqrt(u64 x, u64 nonresidue) const {
    u64 q = p - 1;
    int s = 0;
    while ((q & 1) == 0) { q >>= 1; ++s; }
    u64 z = pow(nonresidue, q);
    u64 r = pow(x, (q + 1) / 2);
    u64 t = pow(x, q);
    int m = s;
    while (t != 1) {
      int i = 0;
      u64 tt = t;
      while (tt != 1) { tt = mul(tt, tt); ++i; }
      u64 bb = z;
      for (int j = 0; j < m - i - 1; ++j) bb = mul(bb, bb);
      r = mul(r, bb);
      z = mul(bb, bb);
      t = mul(t, z);
      m = i;
    }
    return r;
  }
};

struct Point {
  u64 x = 0, y = 0;
  bool inf = true;
};

struct Curve {
  Field f;
  u64 a;

  Point add(const Point& P, const Point& Q) const {
    if (P.inf) return Q;
    if (Q.inf) return P;
    u64 lambda;
    if (P.x == Q.x) {
      if (f.add(P.y, Q.y) == 0) return {};
      lambda = f.mul(f.add(f.mul(3, f.mul(P.x, P.x)), a), f.inv(f.mul(2, P.y)));
    } else {
      lambda = f.mul(f.sub(Q.y, P.y), f.inv(f.sub(Q.x, P.x)));
    }
    const u64 x3 = f.sub(f.sub(f.mul(lambda, lambda), P.x), Q.x);
    const u64 y3 = f.sub(f.mul(lambda, f.sub(P.x, x3)), P.y);
    return {x3, y3, false};
  }

  Point mul(Point P, u64 k) const {
    Point R;
    while (k) {
      if (k & 1) R = add(R, P);
      P = add(P, P);
      k >>= 1;
    }
    return R;
  }
};

u64 isqrt_u64(u64 n) {
  auto r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// All m in [lo, hi] with m Q = O.
std::vector<u64> orders_in_interval(const Curve& E, const Point& Q, u64 lo, u64 hi) {
  std::vector<u64> out;
  const u64 width = hi - lo;
  const u64 B = isqrt_u64(width / 2 + 1) + 1;
  std::vector<std::pair<u64, u64>> baby;  // (x, j)
  baby.reserve(B);
  std::vector<Point> multiples(B + 1);
  Point R = Q;
  for (u64 j = 1; j <= B; ++j) {
    if (R.inf) {
      // Order j is small; enumerate its multiples directly.
      for (u64 m = (lo + j - 1) / j * j; m <= hi; m += j) out.push_back(m);
      return out;
    }
    multiples[j] = R;
    baby.emplace_back(R.x, j);
    R = E.add(R, Q);
  }
  std::sort(baby.begin(), baby.end());
  const u64 step = 2 * B + 1;
  const Point G = E.mul(Q, step);
  Point C = E.mul(Q, lo + B);
  for (u64 c = lo + B; c <= hi + B; c += step) {
    if (C.inf) {
      if (c >= lo && c <= hi) out.push_back(c);
    } else {
      auto it = std::lower_bound(baby.begin(), baby.end(), std::make_pair(C.x, u64{0}));
      for (; it != baby.end() && it->first == C.x; ++it) {
        const u64 j = it->second;
        const bool same = multiples[j].y == C.y;
        const bool opposite = E.f.add(multiples[j].y, C.y) == 0;
        if (same && c - j >= lo && c - j <= hi) out.push_back(c - j);
        if (opposite && c + j >= lo && c + j <= hi) out.push_back(c + j);
      }
    }
    C = E.add(C, G);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

int ap_char_sum(std::int64_t a, std::int64_t b, std::uint32_t p) {
  if (p < 3 || (p & 1) == 0) throw DomainError("ap_char_sum: p must be an odd prime");
  const u64 P = p;
  std::vector<std::int8_t> chi(P, -1);
  chi[0] = 0;
  for (u64 x = 1, sq = 1; x <= (P - 1) / 2; ++x) {
    sq = x * x % P;
    chi[sq] = 1;
  }
  // f(x) = x^3 + a x + b by forward differences.
  const u64 am = mod_of(a, P);
  u64 f = mod_of(b, P);
  u64 d1 = (1 + am) % P;
  u64 d2 = 6 % P;
  const u64 d3 = 6 % P;
  std::int64_t sum = 0;
  for (u64 x = 0; x < P; ++x) {
    sum += chi[f];
    f += d1; if (f >= P) f -= P;
    d1 += d2; if (d1 >= P) d1 -= P;
    d2 += d3; if (d2 >= P) d2 -= P;
  }
  return static_cast<int>(-sum);
}

int ap_bsgs(std::int64_t a, std::int64_t b, std::uint32_t p) {
  if (p < 1000) return ap_char_sum(a, b, p);
  const Field F{p};
  const u64 am = mod_of(a, p), bm = mod_of(b, p);
  const u64 half = (p - 1) / 2;
  auto is_residue = [&](u64 v) { return F.pow(v, half) == 1; };
  u64 nonres = 2;
  while (is_residue(nonres)) ++nonres;

  // E' : y^2 = x^3 + a c^2 x + b c^3 is the quadratic twist by c, #E' = p + 1 + a_p.
  const u64 c2 = F.mul(nonres, nonres), c3 = F.mul(c2, nonres);
  const Curve E{F, am};
  const Curve Et{F, F.mul(am, c2)};

  const auto span = static_cast<std::int64_t>(isqrt_u64(4 * static_cast<u64>(p)));  // floor(2 sqrt p)
  const u64 lo = p + 1 - static_cast<u64>(span), hi = p + 1 + static_cast<u64>(span);
  std::vector<std::int64_t> candidates;
  for (std::int64_t t = -span; t <= span; ++t) candidates.push_back(t);

  for (u64 x = 0, tries = 0; x < p && tries < 64; ++x) {
    const u64 fx = F.add(F.add(F.mul(F.mul(x, x), x), F.mul(am, x)), bm);
    if (fx == 0) continue;
    ++tries;
    const bool on_e = is_residue(fx);
    Point Q;
    if (on_e) {
      Q = {x, F.sqrt(fx, nonres), false};
    } else {
      const u64 fy = F.mul(c3, fx);  // value of the twisted cubic at c x
      Q = {F.mul(nonres, x), F.sqrt(fy, nonres), false};
    }
    const auto ms = orders_in_interval(on_e ? E : Et, Q, lo, hi);
    std::vector<std::int64_t> traces;
    for (u64 m : ms) {
      const auto mi = static_cast<std::int64_t>(m), pp = static_cast<std::int64_t>(p) + 1;
      traces.push_back(on_e ? pp - mi : mi - pp);
    }
    std::sort(traces.begin(), traces.end());
    std::vector<std::int64_t> kept;
    std::set_intersection(candidates.begin(), candidates.end(), traces.begin(), traces.end(),
                          std::back_inserter(kept));
    candidates = std::move(kept);
    if (candidates.size() == 1) return static_cast<int>(candidates.front());
    if (candidates.empty()) break;
  }
  return ap_char_sum(a, b, p);
}

}  // namespace qtwist::curve
