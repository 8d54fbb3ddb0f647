#pragma once

// Derivative-free minimization: Nelder-Mead in an unconstrained coordinate
// system. Box bounds are removed by reparameterization (logit for two-sided,
// log for one-sided), so every evaluated point lies strictly inside the box.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "cdg/error.hpp"

namespace cdg::math {

struct Bound {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  static Bound positive() { return {0.0, std::numeric_limits<double>::infinity()}; }
  static Bound interval(double lo, double hi) { return {lo, hi}; }
  static Bound free() { return {}; }
};

struct MinimizeOptions {
  double tol = 1e-8;                 // simplex diameter (transformed coordinates)
  std::size_t max_evaluations = 20000;
  double initial_step = 0.25;        // simplex edge in transformed coordinates
  int max_restarts = 2;
};

enum class StopReason { converged, max_evaluations };

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  StopReason reason = StopReason::converged;

  bool converged() const noexcept { return reason == StopReason::converged; }
};

using Objective = std::function<double(std::span<const double>)>;

namespace detail {

class BoxTransform {
 public:
  explicit BoxTransform(std::vector<Bound> bounds) : bounds_(std::move(bounds)) {}

  double to_free(std::size_t i, double x) const {
    const Bound& b = bounds_[i];
    const bool has_lo = std::isfinite(b.lower);
    const bool has_hi = std::isfinite(b.upper);
    if (has_lo && has_hi) return std::log((x - b.lower) / (b.upper - x));
    if (has_lo) return std::log(x - b.lower);
    if (has_hi) return std::log(b.upper - x);
    return x;
  }

  double to_box(std::size_t i, double y) const {
    const Bound& b = bounds_[i];
    const bool has_lo = std::isfinite(b.lower);
    const bool has_hi = std::isfinite(b.upper);
    if (has_lo && has_hi) {
      const double s = y >= 0.0 ? 1.0 / (1.0 + std::exp(-y)) : std::exp(y) / (1.0 + std::exp(y));
      return b.lower + (b.upper - b.lower) * s;
    }
    if (has_lo) return b.lower + std::exp(y);
    if (has_hi) return b.upper - std::exp(y);
    return y;
  }

  void to_box(std::span<const double> y, std::vector<double>& x) const {
    x.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = to_box(i, y[i]);
  }

 private:
  std::vector<Bound> bounds_;
};

}  // namespace detail

// Minimize f from x0 subject to per-coordinate bounds (empty span = unbounded).
// The returned value never exceeds f(x0).
inline MinimizeResult minimize(const Objective& f, std::span<const double> x0,
                               std::span<const Bound> bounds = {},
                               const MinimizeOptions& options = {}) {
  const std::size_t k = x0.size();
  if (k == 0) throw DomainError("minimize: empty start point");
  std::vector<Bound> box(bounds.begin(), bounds.end());
  if (box.empty()) box.assign(k, Bound{});
  if (box.size() != k) throw DimensionError("minimize: bounds and start point differ in size");

  std::vector<double> start(x0.begin(), x0.end());
  for (std::size_t i = 0; i < k; ++i) {
    const Bound& b = box[i];
    if (!(b.lower < b.upper)) throw DomainError("minimize: inconsistent bounds");
    if (start[i] < b.lower || start[i] > b.upper)
      throw DomainError("minimize: start point outside bounds");
    // Nudge off the boundary; the transform maps only the open box.
    const double width = std::isfinite(b.upper - b.lower) ? b.upper - b.lower : 1.0;
    if (start[i] == b.lower) start[i] = b.lower + 1e-9 * width;
    if (start[i] == b.upper) start[i] = b.upper - 1e-9 * width;
  }

  const double f0 = f(std::span<const double>(x0.data(), k));
  if (!std::isfinite(f0)) throw StartError("minimize: objective not finite at start point");

  detail::BoxTransform transform(box);
  std::size_t evaluations = 1;
  std::vector<double> scratch;
  auto eval = [&](const std::vector<double>& y) {
    transform.to_box(y, scratch);
    ++evaluations;
    const double v = f(scratch);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  // Adaptive coefficients (Gao & Han) behave better than the classic set above 2-3 dimensions.
  const double n = static_cast<double>(k);
  const double c_reflect = 1.0;
  const double c_expand = 1.0 + 2.0 / n;
  const double c_contract = 0.75 - 1.0 / (2.0 * n);
  const double c_shrink = k > 1 ? 1.0 - 1.0 / n : 0.5;

  std::vector<double> best_y(k);
  for (std::size_t i = 0; i < k; ++i) best_y[i] = transform.to_free(i, start[i]);
  double best_f = eval(best_y);

  StopReason reason = StopReason::max_evaluations;
  std::vector<std::vector<double>> simplex(k + 1, std::vector<double>(k));
  std::vector<double> values(k + 1);
  std::vector<std::size_t> order(k + 1);
  std::vector<double> centroid(k), trial(k), trial2(k);

  for (int pass = 0; pass <= options.max_restarts; ++pass) {
    const double pass_start_f = best_f;
    simplex[0] = best_y;
    values[0] = best_f;
    for (std::size_t i = 0; i < k; ++i) {
      simplex[i + 1] = best_y;
      simplex[i + 1][i] += options.initial_step;
      values[i + 1] = eval(simplex[i + 1]);
    }

    bool pass_converged = false;
    while (evaluations < options.max_evaluations) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      {
        std::vector<std::vector<double>> s2(k + 1);
        std::vector<double> v2(k + 1);
        for (std::size_t i = 0; i <= k; ++i) {
          s2[i] = std::move(simplex[order[i]]);
          v2[i] = values[order[i]];
        }
        simplex = std::move(s2);
        values = std::move(v2);
      }

      double diameter = 0.0;
      for (std::size_t v = 1; v <= k; ++v)
        for (std::size_t i = 0; i < k; ++i)
          diameter = std::max(diameter, std::fabs(simplex[v][i] - simplex[0][i]));
      if (diameter < options.tol) {
        pass_converged = true;
        break;
      }

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t v = 0; v < k; ++v)
        for (std::size_t i = 0; i < k; ++i) centroid[i] += simplex[v][i] / n;

      const std::vector<double>& worst = simplex[k];
      for (std::size_t i = 0; i < k; ++i) trial[i] = centroid[i] + c_reflect * (centroid[i] - worst[i]);
      const double f_reflect = eval(trial);

      if (f_reflect < values[0]) {
        for (std::size_t i = 0; i < k; ++i) trial2[i] = centroid[i] + c_expand * (trial[i] - centroid[i]);
        const double f_expand = eval(trial2);
        if (f_expand < f_reflect) {
          simplex[k] = trial2;
          values[k] = f_expand;
        } else {
          simplex[k] = trial;
          values[k] = f_reflect;
        }
        continue;
      }
      if (f_reflect < values[k - 1]) {
        simplex[k] = trial;
        values[k] = f_reflect;
        continue;
      }
      const bool outside = f_reflect < values[k];
      for (std::size_t i = 0; i < k; ++i) {
        trial2[i] = outside ? centroid[i] + c_contract * (trial[i] - centroid[i])
                            : centroid[i] - c_contract * (centroid[i] - worst[i]);
      }
      const double f_contract = eval(trial2);
      if (f_contract < (outside ? f_reflect : values[k])) {
        simplex[k] = trial2;
        values[k] = f_contract;
        continue;
      }
      for (std::size_t v = 1; v <= k; ++v) {
        for (std::size_t i = 0; i < k; ++i)
          simplex[v][i] = simplex[0][i] + c_shrink * (simplex[v][i] - simplex[0][i]);
        values[v] = eval(simplex[v]);
      }
    }

    std::size_t arg = 0;
    for (std::size_t v = 1; v <= k; ++v)
      if (values[v] < values[arg]) arg = v;
    if (values[arg] < best_f) {
      best_f = values[arg];
      best_y = simplex[arg];
    }
    if (!pass_converged) {
      reason = StopReason::max_evaluations;
      break;
    }
    reason = StopReason::converged;
    // A restart that cannot improve confirms the minimum.
    if (pass > 0 && !(best_f < pass_start_f - 1e-12 * std::max(1.0, std::fabs(pass_start_f)))) break;
  }

  MinimizeResult result;
  result.evaluations = evaluations;
  result.reason = reason;
  if (best_f <= f0) {
    transform.to_box(best_y, result.x);
    result.value = best_f;
    // Round-tripping through the transform can move the point by an ulp.
    const double check = f(result.x);
    ++result.evaluations;
    if (std::isfinite(check) && check <= f0) {
      result.value = check;
      return result;
    }
  }
  result.x.assign(x0.begin(), x0.end());
  result.value = f0;
  return result;
}

}  // namespace cdg::math
