#pragma once

// Special functions and univariate distributions used throughout the engine:
// log-gamma, regularized incomplete beta, standard normal and Student-t
// CDF / density / quantile.

#include <cmath>
#include <limits>
#include <numbers>

#include "cdg/error.hpp"

namespace cdg::math {

namespace detail {

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite argument");
}

inline void require_open_unit(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError(std::string(what) + ": probability must lie in (0,1), got " +
                      std::to_string(p));
}

// Continued fraction for I_x(a,b) (modified Lentz). Converges for x < (a+1)/(a+b+2).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

// ln Γ(x) for x > 0 (Lanczos, g = 7). Reentrant, unlike std::lgamma which may
// write the global signgam.
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
  static constexpr double kCoef[9] = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Reflection keeps accuracy for small arguments.
    return std::log(std::numbers::pi / std::fabs(std::sin(std::numbers::pi * x))) -
           log_gamma(1.0 - x);
  }
  const double xm = x - 1.0;
  double acc = kCoef[0];
  for (int i = 1; i < 9; ++i) acc += kCoef[i] / (xm + i);
  const double t = xm + 7.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (xm + 0.5) * std::log(t) - t + std::log(acc);
}

// Regularized incomplete beta I_x(a,b). The complement 1-x is passed
// separately so callers can supply it without cancellation.
inline double incomplete_beta(double a, double b, double x, double one_minus_x) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("incomplete_beta: a and b must be positive");
  if (x <= 0.0) return 0.0;
  if (one_minus_x <= 0.0) return 1.0;
  const double log_front = log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) +
                           b * std::log(one_minus_x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_continued_fraction(b, a, one_minus_x) / b;
}

inline double incomplete_beta(double a, double b, double x) {
  return incomplete_beta(a, b, x, 1.0 - x);
}

// ---------------------------------------------------------------------------
// Standard normal

inline double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double std_normal_cdf(double x) {
  detail::require_finite(x, "std_normal_cdf");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

namespace detail {

// Wichura's AS241 (PPND16), relative accuracy about 1e-16.
inline double normal_quantile_as241(double p) {
  const double q = p - 0.5;
  double val;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    val = q *
          (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                67265.770927008700853) * r + 45921.953931549871457) * r +
              13731.693765509461125) * r + 1971.5909503065514427) * r +
            133.14166789178437745) * r + 3.387132872796366608) /
          (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                39307.89580009271061) * r + 21213.794301586595867) * r +
              5394.1960214247511077) * r + 687.1870074920579083) * r +
            42.313330701600911252) * r + 1.0);
    return val;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + .0227238449892691845833) * r +
                .24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                .0151986665636164571966) * r + .14810397642748007459) * r +
              .68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                .0012426609473880784386) * r + .026532189526576123093) * r +
              .29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              .0148753612908506148525) * r + .13692988092273580531) * r +
            .59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

}  // namespace detail

// Φ⁻¹(p): AS241 followed by one Newton step against std_normal_cdf.
inline double std_normal_quantile(double p) {
  detail::require_open_unit(p, "std_normal_quantile");
  if (p > 0.5) return -std_normal_quantile(1.0 - p);
  double x = detail::normal_quantile_as241(p);
  const double dens = std_normal_pdf(x);
  if (dens > 0.0) x -= (std_normal_cdf(x) - p) / dens;
  return x;
}

// ---------------------------------------------------------------------------
// Student-t with ν degrees of freedom (ν real, > 0)

inline double student_t_log_pdf(double x, double nu) {
  if (!(nu > 0.0)) throw DomainError("student_t: degrees of freedom must be positive");
  return log_gamma(0.5 * (nu + 1.0)) - log_gamma(0.5 * nu) -
         0.5 * std::log(nu * std::numbers::pi) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

inline double student_t_pdf(double x, double nu) { return std::exp(student_t_log_pdf(x, nu)); }

inline double student_t_cdf(double x, double nu) {
  if (!(nu > 0.0)) throw DomainError("student_t_cdf: degrees of freedom must be positive");
  if (std::isnan(x)) throw DomainError("student_t_cdf: NaN argument");
  if (x == 0.0) return 0.5;
  if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
  const double x2 = x * x;
  const double denom = nu + x2;
  // P(T <= -|x|) = I_{ν/(ν+x²)}(ν/2, 1/2) / 2
  const double tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, nu / denom, x2 / denom);
  return x < 0.0 ? tail : 1.0 - tail;
}

// t_ν⁻¹(p). Closed forms for ν = 1, 2; otherwise a Cornish-Fisher start refined
// by Newton on log F with a bisection safeguard.
inline double student_t_quantile(double p, double nu) {
  if (!(nu > 0.0)) throw DomainError("student_t_quantile: degrees of freedom must be positive");
  detail::require_open_unit(p, "student_t_quantile");
  if (p > 0.5) return -student_t_quantile(1.0 - p, nu);
  if (p == 0.5) return 0.0;
  if (nu == 1.0) return std::tan(std::numbers::pi * (p - 0.5));
  if (nu == 2.0) return (2.0 * p - 1.0) / std::sqrt(2.0 * p * (1.0 - p));

  const double z = std_normal_quantile(p);
  const double z2 = z * z;
  double x = z + z * (z2 + 1.0) / (4.0 * nu) +
             z * ((5.0 * z2 + 16.0) * z2 + 3.0) / (96.0 * nu * nu) +
             z * (((3.0 * z2 + 19.0) * z2 + 17.0) * z2 - 15.0) / (384.0 * nu * nu * nu);
  if (!(x < 0.0) || !std::isfinite(x)) x = z;

  // Root lies in (lo, hi) with F(lo) < p <= F(hi); hi = 0 has F = 0.5.
  double lo = -std::numeric_limits<double>::infinity();
  double hi = 0.0;
  const double log_p = std::log(p);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = student_t_cdf(x, nu);
    if (f == p) return x;
    if (f < p) lo = x; else hi = x;
    double next;
    const double dens = student_t_pdf(x, nu);
    if (f > 0.0 && dens > 0.0) {
      next = x - (std::log(f) - log_p) * f / dens;
    } else {
      next = 2.0 * x;
    }
    if (!std::isfinite(next) || next <= lo || next >= hi) {
      next = std::isfinite(lo) ? 0.5 * (lo + hi) : 2.0 * std::min(x, -1.0);
    }
    if (std::fabs(next - x) <= 1e-15 * std::max(1.0, std::fabs(x))) return next;
    x = next;
  }
  return x;
}

}  // namespace cdg::math
