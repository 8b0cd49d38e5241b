#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "civr/core.hpp"

namespace civr {

/// Componentwise soft-threshold; |v_j| == threshold maps to exactly 0.
template <typename Scalar>
Vector<Scalar> soft_threshold(const Vector<Scalar>& v, Scalar threshold) {
  Vector<Scalar> out(v.size());
  for (Index j = 0; j < v.size(); ++j) {
    const Scalar a = std::abs(v(j));
    out(j) = a > threshold ? std::copysign(a - threshold, v(j)) : Scalar(0);
  }
  return out;
}

/// Euclidean projection onto {x : ||x||_1 <= radius} by the sort-based
/// threshold search.
template <typename Scalar>
Vector<Scalar> project_l1_ball(const Vector<Scalar>& v, Scalar radius) {
  require(radius > 0, "l1-ball radius must be positive");
  if (v.template lpNorm<1>() <= radius) return v;

  std::vector<Scalar> mags(static_cast<std::size_t>(v.size()));
  for (Index j = 0; j < v.size(); ++j) mags[static_cast<std::size_t>(j)] = std::abs(v(j));
  std::sort(mags.begin(), mags.end(), std::greater<>());

  Scalar cumsum = 0;
  Scalar theta = 0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    cumsum += mags[k];
    const Scalar candidate = (cumsum - radius) / static_cast<Scalar>(k + 1);
    if (mags[k] - candidate > 0) theta = candidate;
  }
  return soft_threshold(v, theta);
}

/// Convex regularizer r with a closed-form proximal operator.
template <typename Scalar>
class Regularizer {
 public:
  using Vec = Vector<Scalar>;

  struct Zero {};
  struct L1 {
    Scalar weight;
  };
  struct L1Ball {
    Scalar radius;
  };

  Regularizer() = default;

  static Regularizer zero() { return Regularizer(Zero{}); }
  static Regularizer l1(Scalar weight) {
    require(weight >= 0, "l1 weight must be nonnegative");
    return Regularizer(L1{weight});
  }
  static Regularizer l1_ball(Scalar radius) {
    require(radius > 0, "l1-ball radius must be positive");
    return Regularizer(L1Ball{radius});
  }

  bool is_zero() const { return std::holds_alternative<Zero>(kind_); }
  const std::variant<Zero, L1, L1Ball>& kind() const { return kind_; }

  /// r(x); +inf outside the ball for the indicator variant.
  Scalar value(const Vec& x) const {
    return std::visit(
        [&](const auto& k) -> Scalar {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Zero>) {
            return Scalar(0);
          } else if constexpr (std::is_same_v<K, L1>) {
            return k.weight * x.template lpNorm<1>();
          } else {
            const Scalar slack = k.radius * Scalar(1e-10) + Scalar(1e-12);
            return x.template lpNorm<1>() <= k.radius + slack
                       ? Scalar(0)
                       : std::numeric_limits<Scalar>::infinity();
          }
        },
        kind_);
  }

  /// argmin_y { r(y) + ||y - v||^2 / (2 eta) }.
  Vec prox(const Vec& v, Scalar eta) const {
    require(eta > 0, "prox step must be positive");
    return std::visit(
        [&](const auto& k) -> Vec {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Zero>) {
            return v;
          } else if constexpr (std::is_same_v<K, L1>) {
            return soft_threshold(v, eta * k.weight);
          } else {
            return project_l1_ball(v, k.radius);
          }
        },
        kind_);
  }

  std::string describe() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Zero>)
            return "zero";
          else if constexpr (std::is_same_v<K, L1>)
            return "l1(" + std::to_string(k.weight) + ")";
          else
            return "l1ball(" + std::to_string(k.radius) + ")";
        },
        kind_);
  }

 private:
  explicit Regularizer(std::variant<Zero, L1, L1Ball> kind) : kind_(kind) {}

  std::variant<Zero, L1, L1Ball> kind_{Zero{}};
};

template <typename Scalar>
Vector<Scalar> prox(const Regularizer<Scalar>& reg, const Vector<Scalar>& v, Scalar eta) {
  return reg.prox(v, eta);
}

/// (x_i - x_next) / eta: the mapping actually realized by a step taken with
/// an estimated gradient.
template <typename Scalar>
Vector<Scalar> approx_gradient_mapping(const Vector<Scalar>& x_i, const Vector<Scalar>& x_next,
                                       Scalar eta) {
  require(eta > 0, "step must be positive");
  require_dims(x_i.size() == x_next.size(), "iterates differ in length");
  return (x_i - x_next) / eta;
}

}  // namespace civr
