#pragma once

// Independent reference computations used to freeze expected values in tests.
// Nothing here calls into the library's numerical paths.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Adaptive Simpson on [a,b] in long double.
inline long double simpson(const std::function<long double(long double)>& f, long double a,
                           long double b, long double eps = 1e-15L, int depth = 50) {
  std::function<long double(long double, long double, long double, long double, long double,
                            long double, int)>
      rec = [&](long double lo, long double hi, long double flo, long double fmid, long double fhi,
                long double whole, int d) -> long double {
    const long double mid = 0.5L * (lo + hi);
    const long double lm = 0.5L * (lo + mid), rm = 0.5L * (mid + hi);
    const long double flm = f(lm), frm = f(rm);
    const long double left = (mid - lo) / 6.0L * (flo + 4.0L * flm + fmid);
    const long double right = (hi - mid) / 6.0L * (fmid + 4.0L * frm + fhi);
    const long double delta = left + right - whole;
    if (d <= 0 || std::fabs(delta) <= 15.0L * eps) return left + right + delta / 15.0L;
    return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
  };
  const long double fa = f(a), fb = f(b), fm = f(0.5L * (a + b));
  const long double whole = (b - a) / 6.0L * (fa + 4.0L * fm + fb);
  return rec(a, b, fa, fm, fb, whole, depth);
}

// Φ(x) from the Maclaurin series of erf (long double, fine for |x| < 5).
inline double normal_cdf_series(double xd) {
  const long double x = xd / std::sqrt(2.0L);
  long double term = x, sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::fabs(add) < 1e-30L) break;
  }
  const long double erf = 2.0L / std::sqrt(std::numbers::pi_v<long double>) * sum;
  return static_cast<double>(0.5L * (1.0L + erf));
}

inline double bisect(const std::function<double(double)>& f, double target, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline long double t_density(long double x, double nu) {
  const long double c = std::exp(std::lgamma(0.5L * (nu + 1)) - std::lgamma(0.5L * nu)) /
                        std::sqrt(nu * std::numbers::pi_v<long double>);
  return c * std::pow(1.0L + x * x / nu, -0.5L * (nu + 1));
}

// t_ν CDF by quadrature of the density from 0.
inline double t_cdf_quadrature(double x, double nu) {
  const long double half = simpson([nu](long double s) { return t_density(s, nu); }, 0.0L,
                                   std::fabs(x), 1e-16L);
  return static_cast<double>(x >= 0 ? 0.5L + half : 0.5L - half);
}

// Bivariate normal CDF: ∫_{-∞}^{h} φ(x) Φ((k - ρx)/√(1-ρ²)) dx.
inline double bivariate_normal_cdf(double h, double k, double rho) {
  const long double s = std::sqrt(1.0L - rho * rho);
  auto f = [&](long double x) -> long double {
    const long double phi = std::exp(-0.5L * x * x) / std::sqrt(2.0L * std::numbers::pi_v<long double>);
    return phi * 0.5L * std::erfc(-((k - rho * x) / s) / std::sqrt(2.0L));
  };
  return static_cast<double>(simpson(f, -12.0L, h, 1e-14L));
}

// Average (fractional) ranks, 1-based, by O(n²) counting.
inline std::vector<double> ranks_brute(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) ++less;
      else if (w == v[i]) ++equal;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

// Kendall tau-b by O(n²) pair enumeration.
inline double kendall_brute(const std::vector<double>& x, const std::vector<double>& y) {
  long double c = 0, d = 0, tx = 0, ty = 0;
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) { ++tx; ++ty; }
      else if (dx == 0) ++tx;
      else if (dy == 0) ++ty;
      else if ((dx > 0) == (dy > 0)) ++c;
      else ++d;
    }
  }
  const long double n0 = static_cast<long double>(n) * (n - 1) / 2;
  return static_cast<double>((c - d) / std::sqrt((n0 - tx) * (n0 - ty)));
}

// GARCH(1,1) variance recursion written independently of the library.
inline std::vector<double> garch_sigma(double omega, double alpha, double beta, double mu,
                                       const std::vector<double>& r) {
  std::vector<double> s(r.size());
  double v = omega / (1 - alpha - beta);
  for (std::size_t t = 0; t < r.size(); ++t) {
    if (t > 0) v = omega + alpha * (r[t - 1] - mu) * (r[t - 1] - mu) + beta * v;
    s[t] = std::sqrt(v);
  }
  return s;
}

// DCC Q/R recursion with explicit loops.
inline void dcc_recursion(double a, double b, const Eigen::MatrixXd& qbar, const Eigen::MatrixXd& z,
                          std::vector<Eigen::MatrixXd>& qs, std::vector<Eigen::MatrixXd>& rs) {
  const long n = qbar.rows();
  qs.clear();
  rs.clear();
  Eigen::MatrixXd q = qbar;
  for (long t = 0; t < z.rows(); ++t) {
    if (t > 0) {
      Eigen::MatrixXd next(n, n);
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j)
          next(i, j) = (1 - a - b) * qbar(i, j) + a * z(t - 1, i) * z(t - 1, j) + b * q(i, j);
      q = next;
    }
    Eigen::MatrixXd r(n, n);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) r(i, j) = i == j ? 1.0 : q(i, j) / std::sqrt(q(i, i) * q(j, j));
    qs.push_back(q);
    rs.push_back(r);
  }
}

}  // namespace oracle
