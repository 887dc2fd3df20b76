#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cfsp/error.hpp"
#include "cfsp/graph.hpp"
#include "cfsp/lovasz.hpp"
#include "cfsp/set_function.hpp"

namespace cfsp {

enum class BoundKind { upper, lower };

/// vol_h(C) <= bound (upper) or vol_h(C) >= bound (lower).
struct VolumeConstraint {
  VertexWeights weights;
  double bound = 0.0;
  BoundKind kind = BoundKind::upper;
};

inline VolumeConstraint upper_bound(VertexWeights h, double k) {
  if (!std::isfinite(k)) throw std::invalid_argument("volume bound must be finite");
  return {std::move(h), k, BoundKind::upper};
}

inline VolumeConstraint lower_bound(VertexWeights h, double k) {
  if (!std::isfinite(k)) throw std::invalid_argument("volume bound must be finite");
  return {std::move(h), k, BoundKind::lower};
}

/// Signed slack, non-negative iff the constraint holds.
inline double constraint_slack(const VolumeConstraint& c, const Membership& in) {
  double vol = volume(c.weights, in);
  return c.kind == BoundKind::upper ? c.bound - vol : vol - c.bound;
}

/// Feasibility up to rounding noise in the accumulated volume.
inline bool is_satisfied(const VolumeConstraint& c, const Membership& in) {
  return constraint_slack(c, in) >= -1e-9 * std::max(1.0, std::abs(c.bound));
}

inline bool all_satisfied(std::span<const VolumeConstraint> cs, const Membership& in) {
  return std::all_of(cs.begin(), cs.end(), [&](const auto& c) { return is_satisfied(c, in); });
}

/// max{0, violation} on nonempty sets, 0 on the empty set.
inline double penalty_value(const VolumeConstraint& c, const Membership& in) {
  if (std::none_of(in.begin(), in.end(), [](bool b) { return b; })) return 0.0;
  return std::max(0.0, -constraint_slack(c, in));
}

inline double penalty_value(std::span<const VolumeConstraint> cs, const Membership& in) {
  double s = 0.0;
  for (const auto& c : cs) s += penalty_value(c, in);
  return s;
}

/// Subgradient of the Lovász extension of min{k, vol_h} at f.
inline std::vector<double> t2_subgradient(const VertexWeights& h, double k, std::span<const double> f) {
  if (h.size() != f.size()) throw std::invalid_argument("t2_subgradient: size mismatch");
  if (k < 0.0) throw std::invalid_argument("t2_subgradient: negative bound");
  auto order = descending_order(f);
  std::vector<double> t(f.size(), 0.0);
  double without = 0.0;
  for (Vertex j : order) {
    double with = without + h[j];
    if (without > k)
      t[j] = 0.0;
    else if (with >= k)
      t[j] = k - without;
    else
      t[j] = h[j];
    without = with;
  }
  return t;
}

/// T(C) = A(C) - min{k, vol_h(C)} with A modular plus a multiple of P.
///
/// Upper bounds use A = vol_h, lower bounds use A = k * P. Both pieces are
/// submodular.
struct PenaltyDC {
  VertexWeights weights;
  double k = 0.0;
  std::vector<double> modular;    ///< zero for lower bounds
  double pmax_coefficient = 0.0;  ///< zero for upper bounds

  SetFunction first_part() const {
    return modular_function(modular) + pmax_coefficient * nonempty_function(weights.size());
  }
  SetFunction second_part() const { return truncated_volume(weights, k); }
  SetFunction function() const { return first_part() - second_part(); }

  std::vector<double> second_subgradient(std::span<const double> f) const {
    return t2_subgradient(weights, k, f);
  }
};

inline PenaltyDC penalty_dc(const VolumeConstraint& c) {
  PenaltyDC p;
  p.weights = c.weights;
  if (c.kind == BoundKind::upper) {
    if (c.bound < 0.0) throw InfeasibleError("upper volume bound is negative");
    p.k = c.bound;
    p.modular.assign(c.weights.values().begin(), c.weights.values().end());
  } else {
    // a non-positive lower bound is vacuous and gives the zero penalty
    p.k = std::max(0.0, c.bound);
    p.modular.assign(c.weights.size(), 0.0);
    p.pmax_coefficient = p.k;
  }
  return p;
}

// --- exact-penalty constants ---------------------------------------------------------

inline constexpr std::int64_t kMaxDenominator = 1'000'000;

/// Smallest q <= cap with x ~ p/q, or cap when no such q exists.
inline std::int64_t rational_denominator(double x, std::int64_t cap = kMaxDenominator) {
  const double tol = 1e-9 * std::max(1.0, std::abs(x));
  double r = std::abs(x);
  std::int64_t p0 = 1, q0 = 0, p1 = static_cast<std::int64_t>(std::floor(r)), q1 = 1;
  double frac = r - std::floor(r);
  while (std::abs(static_cast<double>(p1) / static_cast<double>(q1) - std::abs(x)) > tol) {
    if (frac < 1e-15) break;
    r = 1.0 / frac;
    auto a = static_cast<std::int64_t>(std::floor(r));
    frac = r - std::floor(r);
    std::int64_t p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > cap) return cap;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
  }
  return q1;
}

/// Common denominator rho of the weights, so that every volume lies on (1/rho)Z.
inline std::int64_t weight_denominator(const VertexWeights& h, std::int64_t cap = kMaxDenominator) {
  std::int64_t rho = 1;
  for (double x : h.values()) {
    rho = std::lcm(rho, rational_denominator(x, cap));
    if (rho >= cap) return cap;
  }
  return rho;
}

/// Lower bound on the violation of any infeasible nonempty set.
///
/// Volumes live on the lattice (1/rho)Z; a bound off that lattice shrinks the
/// smallest positive violation to its distance from the next lattice point.
inline double theta_of(std::span<const VolumeConstraint> cs) {
  double theta = 1.0;
  for (const auto& c : cs) {
    const double rho = static_cast<double>(weight_denominator(c.weights));
    const double scaled = c.bound * rho;
    double gap = c.kind == BoundKind::upper ? std::ceil(scaled) - scaled : scaled - std::floor(scaled);
    if (gap < 1e-9) gap = 1.0;
    theta = std::min(theta, gap / rho);
  }
  return theta;
}

inline double theta_of(const VolumeConstraint& c) { return theta_of(std::span(&c, 1)); }

/// Penalty weight above which penalised and constrained minimisers coincide.
inline double gamma_sufficient(double r0, double s0, double smax, double theta, double margin = 1.01) {
  if (!(s0 > 0.0)) throw std::invalid_argument("gamma_sufficient: S0 must be positive");
  if (!(theta > 0.0)) throw std::invalid_argument("gamma_sufficient: theta must be positive");
  return r0 * smax / (theta * s0) * margin;
}

/// Geometric schedule of penalty weights with an optional cap.
class GammaSchedule {
 public:
  explicit GammaSchedule(double initial, double growth = 2.0) : current_(initial), growth_(growth) {
    if (!(initial > 0.0) || !(growth > 1.0))
      throw std::invalid_argument("GammaSchedule: need initial > 0 and growth > 1");
  }

  double current() const noexcept { return current_; }
  std::optional<double> cap() const noexcept {
    return std::isinf(cap_) ? std::nullopt : std::optional<double>(cap_);
  }

  /// Lowers the cap; never raises it.
  void set_cap(double cap) { cap_ = std::min(cap_, cap); }

  bool at_cap() const noexcept { return current_ >= cap_; }

  double advance() {
    if (at_cap()) throw std::logic_error("GammaSchedule: already at cap");
    current_ = std::min(current_ * growth_, cap_);
    return current_;
  }

 private:
  double current_;
  double growth_;
  double cap_ = std::numeric_limits<double>::infinity();
};

}  // namespace cfsp
