#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "cdg/error.hpp"

namespace cdg::math {

// Seeded random source. The engine is mt19937_64, whose output sequence is
// fixed by the standard; all variate transforms below are written out here
// (std::*_distribution output is implementation-defined) so streams are
// reproducible across toolchains. Single owner: movable, not shareable.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x9e3779b9u};
    engine_.seed(seq);
  }

  RandomStream(const RandomStream&) = delete;
  RandomStream& operator=(const RandomStream&) = delete;
  RandomStream(RandomStream&&) noexcept = default;
  RandomStream& operator=(RandomStream&&) noexcept = default;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  // Uniform on the open interval (0,1), 53-bit resolution.
  double next_uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal (Marsaglia polar method).
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_uniform() - 1.0;
      v = 2.0 * next_uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  double next_exponential() { return -std::log(next_uniform()); }

  // Gamma(shape, 1) by Marsaglia & Tsang; shape < 1 via the U^{1/shape} boost.
  double next_gamma(double shape) {
    if (!(shape > 0.0)) throw DomainError("next_gamma: shape must be positive");
    if (shape < 1.0) {
      const double g = next_gamma(shape + 1.0);
      return g * std::pow(next_uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = next_gaussian();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_uniform();
      if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double next_chi_squared(double dof) { return 2.0 * next_gamma(0.5 * dof); }

  // Positive stable variate S with Laplace transform E[exp(-tS)] = exp(-t^a),
  // a in (0,1]; Kanter's representation via Zolotarev's function.
  double next_positive_stable(double a) {
    if (!(a > 0.0 && a <= 1.0)) throw DomainError("next_positive_stable: index must lie in (0,1]");
    if (a == 1.0) return 1.0;
    const double u = std::numbers::pi * next_uniform();
    const double e = next_exponential();
    const double zolotarev =
        std::pow(std::pow(std::sin(a * u), a) * std::pow(std::sin((1.0 - a) * u), 1.0 - a) /
                     std::sin(u),
                 1.0 / (1.0 - a));
    return std::pow(zolotarev / e, (1.0 - a) / a);
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cdg::math
