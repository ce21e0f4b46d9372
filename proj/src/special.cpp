#include <cmath>
#include <limits>
#include <numbers>

#include "qtwist/arith.hpp"
#include "qtwist/error.hpp"

namespace qtwist::arith {

namespace {
// Lanczos approximation, g = 7, n = 9 (Godfrey's coefficient set). Relative
// error stays below ~2e-15 for Re s >= 1/2.
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};
}  // namespace

cplx gamma(cplx s) {
  constexpr double pi = std::numbers::pi;
  if (s.real() < 0.5) {
    const cplx sine = std::sin(pi * s);
    if (std::abs(sine) == 0.0) throw DomainError("gamma: pole at a non-positive integer");
    return pi / (sine * gamma(1.0 - s));
  }
  const cplx z = s - 1.0;
  cplx x = kLanczos[0];
  for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + static_cast<double>(i));
  const cplx t = z + kLanczosG + 0.5;
  return std::sqrt(2.0 * pi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

double expint_e1(double x) {
  if (!(x > 0.0)) throw DomainError("expint_e1: argument must be positive");
  constexpr double euler = 0.57721566490153286061;
  constexpr double eps = 1e-16;
  if (x <= 1.0) {
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= -x / k;
      const double add = term / k;
      sum += add;
      if (std::abs(add) < eps * std::abs(sum)) break;
    }
    return -euler - std::log(x) - sum;
  }
  // Continued fraction, modified Lentz.
  constexpr double tiny = std::numeric_limits<double>::min() / eps;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h * std::exp(-x);
}

}  // namespace qtwist::arith
