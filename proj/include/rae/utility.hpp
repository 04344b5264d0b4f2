#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rae {

struct KindMismatch : std::runtime_error {
  explicit KindMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct NonPositiveCost : std::runtime_error {
  explicit NonPositiveCost(const std::string& what) : std::runtime_error(what) {}
};

enum class UtilityKind { Efficiency, SuccessRatio };

inline const char* to_string(UtilityKind k) {
  return k == UtilityKind::Efficiency ? "efficiency" : "success-ratio";
}

/// Utility of a (partial) execution: efficiency (reciprocal accumulated
/// cost, identity +inf) or success ratio (probability, identity 1).
/// Zero is absorbing under the combination; the identity element stands
/// for "nothing left to pay".
class UtilityValue {
 public:
  UtilityValue(UtilityKind kind, double v) : kind_(kind), v_(v) {}

  static UtilityValue identity(UtilityKind k) {
    return UtilityValue(k, k == UtilityKind::Efficiency
                               ? std::numeric_limits<double>::infinity()
                               : 1.0);
  }
  static UtilityValue failure(UtilityKind k) { return UtilityValue(k, 0.0); }

  UtilityKind kind() const { return kind_; }
  double value() const { return v_; }
  bool is_identity() const {
    return kind_ == UtilityKind::Efficiency ? std::isinf(v_) : v_ == 1.0;
  }

  /// Finite surrogate for use inside Q averages.
  double clamped(double eff_cap) const {
    if (kind_ == UtilityKind::Efficiency && v_ > eff_cap) return eff_cap;
    return v_;
  }

 private:
  UtilityKind kind_;
  double v_;
};

/// Combination of successive step values: harmonic for efficiency
/// (costs add), multiplicative for success ratio.
inline UtilityValue oplus(const UtilityValue& a, const UtilityValue& b) {
  if (a.kind() != b.kind()) throw KindMismatch("oplus on mixed utility kinds");
  if (a.kind() == UtilityKind::SuccessRatio)
    return UtilityValue(a.kind(), a.value() * b.value());
  double x = a.value(), y = b.value();
  if (x == 0.0 || y == 0.0) return UtilityValue(a.kind(), 0.0);
  if (std::isinf(x)) return UtilityValue(a.kind(), y);
  if (std::isinf(y)) return UtilityValue(a.kind(), x);
  return UtilityValue(a.kind(), 1.0 / (1.0 / x + 1.0 / y));
}

/// Value of one executed action: 0 on failure, else 1/cost or 1.
inline UtilityValue action_value(UtilityKind kind, double cost, bool failed) {
  if (!(cost > 0) || !std::isfinite(cost))
    throw NonPositiveCost("action cost must be positive finite, got " + std::to_string(cost));
  if (failed) return UtilityValue(kind, 0.0);
  return UtilityValue(kind, kind == UtilityKind::Efficiency ? 1.0 / cost : 1.0);
}

}  // namespace rae
