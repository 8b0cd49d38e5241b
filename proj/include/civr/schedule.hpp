#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "civr/constants.hpp"
#include "civr/estimator.hpp"

namespace civr {

enum class ScheduleKind {
  ConstantExpectation,
  AdaptiveExpectation,
  ConstantFiniteSum,
  AdaptiveFiniteSum,
  /// Period schedules for the restart drivers.
  RestartGradientDominantExpectation,
  RestartGradientDominantFiniteSum,
  RestartStronglyConvexExpectation,
  RestartStronglyConvexFiniteSum,
  Custom,
};

struct EpochParams {
  SampleCount tau;          ///< epoch length
  AnchorSize anchor;        ///< B_t
  SampleCount inner_batch;  ///< S_t

  friend bool operator==(const EpochParams&, const EpochParams&) = default;
};

template <typename Scalar>
struct Schedule {
  ScheduleKind kind = ScheduleKind::Custom;
  std::vector<EpochParams> epochs;
  Scalar eta = 0;

  SampleCount num_epochs() const { return static_cast<SampleCount>(epochs.size()); }

  /// Number of output slots x_i^t, 0 <= i < tau_t.
  SampleCount total_slots() const {
    SampleCount s = 0;
    for (const auto& e : epochs) s += e.tau;
    return s;
  }

  /// The sample budget sum_t (B_t + 2 tau_t S_t) used in the complexity
  /// statements. A full anchor counts as `full_cost`.
  SampleCount nominal_budget(SampleCount full_cost) const {
    SampleCount s = 0;
    for (const auto& e : epochs)
      s += (e.anchor.is_full() ? full_cost : e.anchor.count()) + 2 * e.tau * e.inner_batch;
    return s;
  }

  /// Samples actually consumed by a run: tau_t - 1 advances per epoch.
  /// Assumes S_t < n (no exact-difference shortcut).
  SampleCount exact_cost(SampleCount full_cost) const {
    SampleCount s = 0;
    for (const auto& e : epochs)
      s += (e.anchor.is_full() ? full_cost : e.anchor.count()) + 2 * (e.tau - 1) * e.inner_batch;
    return s;
  }

  void validate() const {
    require(!epochs.empty(), "schedule needs at least one epoch");
    require(eta > 0 && std::isfinite(eta), "step size must be positive and finite");
    for (const auto& e : epochs) {
      require(e.tau >= 1, "epoch length must be >= 1");
      require(e.inner_batch >= 1, "inner batch must be >= 1");
      require(e.tau <= e.inner_batch, "epoch length must not exceed the inner batch size");
    }
  }
};

namespace detail {

/// ceil clamped below at 1.
inline SampleCount ceil_at_least_one(double v) {
  require(std::isfinite(v), "schedule formula produced a non-finite value");
  const double c = std::ceil(v);
  return c < 1.0 ? 1 : static_cast<SampleCount>(c);
}

template <typename Scalar>
Scalar resolve_eta(std::optional<Scalar> eta, Scalar bound) {
  if (eta) {
    require(*eta > 0, "step size must be positive");
    return *eta;
  }
  require(std::isfinite(bound),
          "no step size given and the constants do not bound it (all Lipschitz constants zero)");
  return bound;
}

// Strict inequality for the strongly convex presets: default just below the bound.
template <typename Scalar>
Scalar resolve_strict_eta(std::optional<Scalar> eta, Scalar bound) {
  if (eta) {
    require(*eta > 0, "step size must be positive");
    return *eta;
  }
  require(std::isfinite(bound), "no step size given and the constants do not bound it");
  return Scalar(0.99) * bound;
}

template <typename Scalar>
Schedule<Scalar> finalize(Schedule<Scalar> s) {
  s.validate();
  return s;
}

}  // namespace detail

/// T = tau = S = ceil(1/sqrt(eps)), B = ceil(sigma_0^2 / eps).
template <typename Scalar>
Schedule<Scalar> schedule_constant_expectation(Scalar eps, const DerivedConstants<Scalar>& c,
                                               std::optional<Scalar> eta = std::nullopt) {
  require(eps > 0, "eps must be positive");
  const SampleCount k = detail::ceil_at_least_one(1.0 / std::sqrt(double(eps)));
  const SampleCount batch = detail::ceil_at_least_one(double(c.sigma_0_sq) / double(eps));
  Schedule<Scalar> s;
  s.kind = ScheduleKind::ConstantExpectation;
  s.eta = detail::resolve_eta(eta, c.eta_max_nonconvex);
  s.epochs.assign(static_cast<std::size_t>(k), EpochParams{k, AnchorSize::of(batch), k});
  return detail::finalize(std::move(s));
}

/// tau_t = S_t = ceil(a t + b), B_t = ceil(sigma_0^2 (a t + b)^2).
template <typename Scalar>
Schedule<Scalar> schedule_adaptive_expectation(Scalar a, Scalar b, SampleCount T,
                                               const DerivedConstants<Scalar>& c,
                                               std::optional<Scalar> eta = std::nullopt) {
  require(a > 0 && b >= 0, "need a > 0 and b >= 0");
  require(T >= 1, "need at least one epoch");
  Schedule<Scalar> s;
  s.kind = ScheduleKind::AdaptiveExpectation;
  s.eta = detail::resolve_eta(eta, c.eta_max_nonconvex);
  for (SampleCount t = 1; t <= T; ++t) {
    const double lin = double(a) * double(t) + double(b);
    const SampleCount k = detail::ceil_at_least_one(lin);
    const SampleCount batch = detail::ceil_at_least_one(double(c.sigma_0_sq) * lin * lin);
    s.epochs.push_back({k, AnchorSize::of(batch), k});
  }
  return detail::finalize(std::move(s));
}

/// Full anchors, tau_t = S_t = ceil(sqrt(n)).
template <typename Scalar>
Schedule<Scalar> schedule_constant_finite(SampleCount n, SampleCount T,
                                          const DerivedConstants<Scalar>& c,
                                          std::optional<Scalar> eta = std::nullopt) {
  require(n >= 1, "need n >= 1");
  require(T >= 1, "need at least one epoch");
  const SampleCount k = detail::ceil_at_least_one(std::sqrt(double(n)));
  Schedule<Scalar> s;
  s.kind = ScheduleKind::ConstantFiniteSum;
  s.eta = detail::resolve_eta(eta, c.eta_max_nonconvex);
  s.epochs.assign(static_cast<std::size_t>(T), EpochParams{k, AnchorSize::full(), k});
  return detail::finalize(std::move(s));
}

/// Switch epoch T_0 = ceil((sqrt(n) - b) / a) of the adaptive finite-sum schedule.
inline SampleCount adaptive_finite_switch_epoch(SampleCount n, double a, double b) {
  require(a > 0, "need a > 0");
  require(b >= 0 && b < std::sqrt(double(n)), "need 0 <= b < sqrt(n)");
  return static_cast<SampleCount>(std::ceil((std::sqrt(double(n)) - b) / a));
}

/// For t <= T_0: tau_t = S_t = ceil(a t + b), B_t = ceil((a t + b)^2);
/// afterwards full anchors with tau_t = S_t = ceil(sqrt(n)).
template <typename Scalar>
Schedule<Scalar> schedule_adaptive_finite(SampleCount n, Scalar a, Scalar b, SampleCount T,
                                          const DerivedConstants<Scalar>& c,
                                          std::optional<Scalar> eta = std::nullopt) {
  require(n >= 1, "need n >= 1");
  require(T >= 1, "need at least one epoch");
  const SampleCount t0 = adaptive_finite_switch_epoch(n, double(a), double(b));
  const SampleCount root_n = detail::ceil_at_least_one(std::sqrt(double(n)));
  Schedule<Scalar> s;
  s.kind = ScheduleKind::AdaptiveFiniteSum;
  s.eta = detail::resolve_eta(eta, c.eta_max_nonconvex);
  for (SampleCount t = 1; t <= T; ++t) {
    if (t <= t0) {
      const double lin = double(a) * double(t) + double(b);
      const SampleCount k = detail::ceil_at_least_one(lin);
      const SampleCount batch = detail::ceil_at_least_one(lin * lin);
      s.epochs.push_back(
          {k, batch >= n ? AnchorSize::full() : AnchorSize::of(batch), k});
    } else {
      s.epochs.push_back({root_n, AnchorSize::full(), root_n});
    }
  }
  return detail::finalize(std::move(s));
}

/// Growth law of the portfolio experiments: tau_t = S_t = ceil(min(sqrt(10t+1), sqrt(n))),
/// B_t = S_t^2, full once that reaches n.
template <typename Scalar>
Schedule<Scalar> schedule_sqrt_growth_finite(SampleCount n, SampleCount T, Scalar eta) {
  require(n >= 1, "need n >= 1");
  require(T >= 1, "need at least one epoch");
  Schedule<Scalar> s;
  s.kind = ScheduleKind::AdaptiveFiniteSum;
  s.eta = detail::resolve_eta(std::optional<Scalar>(eta), Scalar(0));
  for (SampleCount t = 1; t <= T; ++t) {
    const double grow = std::min(std::sqrt(10.0 * double(t) + 1.0), std::sqrt(double(n)));
    const SampleCount k = detail::ceil_at_least_one(grow);
    const SampleCount batch = k * k;
    s.epochs.push_back({k, batch >= n ? AnchorSize::full() : AnchorSize::of(batch), k});
  }
  return detail::finalize(std::move(s));
}

/// Explicit (tau_t, B_t, S_t) triples.
template <typename Scalar>
Schedule<Scalar> schedule_custom(std::vector<EpochParams> epochs, Scalar eta) {
  Schedule<Scalar> s;
  s.kind = ScheduleKind::Custom;
  s.eta = eta;
  s.epochs = std::move(epochs);
  return detail::finalize(std::move(s));
}

// Period schedules for run_restarted.

/// Gradient-dominant, expectation: tau = S = ceil(1/sqrt(eps)),
/// B = ceil(12 nu sigma_0^2 / eps), T = ceil(16 nu sqrt(eps) / eta).
template <typename Scalar>
Schedule<Scalar> restart_gradient_dominant_expectation(Scalar eps, Scalar nu,
                                                       const DerivedConstants<Scalar>& c,
                                                       std::optional<Scalar> eta = std::nullopt) {
  require(eps > 0 && nu > 0, "need eps > 0 and nu > 0");
  Schedule<Scalar> s;
  s.kind = ScheduleKind::RestartGradientDominantExpectation;
  s.eta = detail::resolve_eta(eta, c.eta_max_nonconvex);
  const SampleCount k = detail::ceil_at_least_one(1.0 / std::sqrt(double(eps)));
  const SampleCount batch =
      detail::ceil_at_least_one(12.0 * double(nu) * double(c.sigma_0_sq) / double(eps));
  const SampleCount T =
      detail::ceil_at_least_one(16.0 * double(nu) * std::sqrt(double(eps)) / double(s.eta));
  s.epochs.assign(static_cast<std::size_t>(T), EpochParams{k, AnchorSize::of(batch), k});
  return detail::finalize(std::move(s));
}

/// Gradient-dominant, finite sum: full anchors, tau = S = ceil(sqrt(n)),
/// T = ceil(16 nu / (sqrt(n) eta)).
template <typename Scalar>
Schedule<Scalar> restart_gradient_dominant_finite(SampleCount n, Scalar nu,
                                                  const DerivedConstants<Scalar>& c,
                                                  std::optional<Scalar> eta = std::nullopt) {
  require(n >= 1 && nu > 0, "need n >= 1 and nu > 0");
  Schedule<Scalar> s;
  s.kind = ScheduleKind::RestartGradientDominantFiniteSum;
  s.eta = detail::resolve_eta(eta, c.eta_max_nonconvex);
  const SampleCount k = detail::ceil_at_least_one(std::sqrt(double(n)));
  const SampleCount T =
      detail::ceil_at_least_one(16.0 * double(nu) / (std::sqrt(double(n)) * double(s.eta)));
  s.epochs.assign(static_cast<std::size_t>(T), EpochParams{k, AnchorSize::full(), k});
  return detail::finalize(std::move(s));
}

/// Optimally strongly convex, expectation: tau = S = ceil(1/sqrt(eps)),
/// B = ceil(9 sigma_0^2 / (2 mu eps)), T = ceil(5 sqrt(eps) / (mu eta)).
template <typename Scalar>
Schedule<Scalar> restart_strongly_convex_expectation(Scalar eps, Scalar mu,
                                                     const DerivedConstants<Scalar>& c,
                                                     std::optional<Scalar> eta = std::nullopt) {
  require(eps > 0 && mu > 0, "need eps > 0 and mu > 0");
  Schedule<Scalar> s;
  s.kind = ScheduleKind::RestartStronglyConvexExpectation;
  s.eta = detail::resolve_strict_eta(eta, c.eta_max_strongly);
  const SampleCount k = detail::ceil_at_least_one(1.0 / std::sqrt(double(eps)));
  const SampleCount batch =
      detail::ceil_at_least_one(9.0 * double(c.sigma_0_sq) / (2.0 * double(mu) * double(eps)));
  const SampleCount T =
      detail::ceil_at_least_one(5.0 * std::sqrt(double(eps)) / (double(mu) * double(s.eta)));
  s.epochs.assign(static_cast<std::size_t>(T), EpochParams{k, AnchorSize::of(batch), k});
  return detail::finalize(std::move(s));
}

/// Optimally strongly convex, finite sum: full anchors, tau = S = ceil(sqrt(n)),
/// T = ceil(5 / (sqrt(n) mu eta)).
template <typename Scalar>
Schedule<Scalar> restart_strongly_convex_finite(SampleCount n, Scalar mu,
                                                const DerivedConstants<Scalar>& c,
                                                std::optional<Scalar> eta = std::nullopt) {
  require(n >= 1 && mu > 0, "need n >= 1 and mu > 0");
  Schedule<Scalar> s;
  s.kind = ScheduleKind::RestartStronglyConvexFiniteSum;
  s.eta = detail::resolve_strict_eta(eta, c.eta_max_strongly);
  const SampleCount k = detail::ceil_at_least_one(std::sqrt(double(n)));
  const SampleCount T =
      detail::ceil_at_least_one(5.0 / (std::sqrt(double(n)) * double(mu) * double(s.eta)));
  s.epochs.assign(static_cast<std::size_t>(T), EpochParams{k, AnchorSize::full(), k});
  return detail::finalize(std::move(s));
}

inline std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::ConstantExpectation: return "constant-expectation";
    case ScheduleKind::AdaptiveExpectation: return "adaptive-expectation";
    case ScheduleKind::ConstantFiniteSum: return "constant-finite";
    case ScheduleKind::AdaptiveFiniteSum: return "adaptive-finite";
    case ScheduleKind::RestartGradientDominantExpectation: return "restart-gd-expectation";
    case ScheduleKind::RestartGradientDominantFiniteSum: return "restart-gd-finite";
    case ScheduleKind::RestartStronglyConvexExpectation: return "restart-sc-expectation";
    case ScheduleKind::RestartStronglyConvexFiniteSum: return "restart-sc-finite";
    case ScheduleKind::Custom: return "custom";
  }
  return "unknown";
}

}  // namespace civr
