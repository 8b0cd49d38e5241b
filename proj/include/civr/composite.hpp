#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "civr/constants.hpp"
#include "civr/oracle.hpp"
#include "civr/prox.hpp"

namespace civr {

/// J^T f'(y). Shared by the exact gradient and the estimator so both routes
/// round identically.
template <typename Scalar>
Vector<Scalar> chain_gradient(const Matrix<Scalar>& jacobian, const Vector<Scalar>& outer_grad) {
  require_dims(jacobian.rows() == outer_grad.size(), "Jacobian rows vs outer gradient");
  return jacobian.transpose() * outer_grad;
}

namespace detail {

template <typename Scalar>
void check_point(const ComponentOracle<Scalar>& oracle, const Vector<Scalar>& x) {
  require_dims(x.size() == oracle.dim_d(), "point length vs oracle dimension d");
}

template <typename Scalar>
void check_pair(const ComponentOracle<Scalar>& oracle, const OuterFunction<Scalar>& outer) {
  require_dims(oracle.dim_p() == outer.dim_p(), "oracle p vs outer p");
}

template <typename Scalar>
void require_exact_mean(const ComponentOracle<Scalar>& oracle) {
  if (!oracle.has_exact_mean())
    throw std::domain_error(
        "exact evaluation needs a finite-sum oracle; use monte_carlo_value instead");
}

}  // namespace detail

/// Sample mean of g_xi and g'_xi over the given draws, accumulated in draw order.
template <typename Scalar>
void sample_mean(const ComponentOracle<Scalar>& oracle, std::span<const Draw> draws,
                 const Vector<Scalar>& x, Vector<Scalar>& value, Matrix<Scalar>& jacobian) {
  require(!draws.empty(), "sample must be nonempty");
  oracle.eval_component(draws[0], x, value, jacobian);
  Vector<Scalar> v;
  Matrix<Scalar> j;
  for (std::size_t k = 1; k < draws.size(); ++k) {
    oracle.eval_component(draws[k], x, v, j);
    value += v;
    jacobian += j;
  }
  const Scalar inv = Scalar(1) / static_cast<Scalar>(draws.size());
  value *= inv;
  jacobian *= inv;
}

/// Phi(x) = f(g(x)) + r(x) with the exact mean g.
template <typename Scalar>
Scalar composite_value(const ComponentOracle<Scalar>& oracle, const OuterFunction<Scalar>& outer,
                       const Regularizer<Scalar>& reg, const Vector<Scalar>& x) {
  detail::require_exact_mean(oracle);
  detail::check_pair(oracle, outer);
  detail::check_point(oracle, x);
  Vector<Scalar> y;
  Matrix<Scalar> jac;
  oracle.eval_full(x, y, jac);
  return outer.value(y) + reg.value(x);
}

/// F'(x) = g'(x)^T f'(g(x)) with exact means.
template <typename Scalar>
Vector<Scalar> composite_gradient(const ComponentOracle<Scalar>& oracle,
                                  const OuterFunction<Scalar>& outer, const Vector<Scalar>& x) {
  detail::require_exact_mean(oracle);
  detail::check_pair(oracle, outer);
  detail::check_point(oracle, x);
  Vector<Scalar> y;
  Matrix<Scalar> jac;
  oracle.eval_full(x, y, jac);
  return chain_gradient(jac, outer.gradient(y));
}

/// Plug-in estimate (g~'(x))^T f'(g~(x)) from raw sample means. Biased in
/// general; used by the mini-batch baseline. A sample that is exactly the full
/// index set (or any sample when n = 1) uses the exact means.
template <typename Scalar>
Vector<Scalar> plugin_gradient_estimate(const ComponentOracle<Scalar>& oracle,
                                        const OuterFunction<Scalar>& outer,
                                        const Vector<Scalar>& x, std::span<const Draw> sample) {
  require(!sample.empty(), "sample must be nonempty");
  detail::check_pair(oracle, outer);
  detail::check_point(oracle, x);
  if (oracle.finite_sum()) {
    const auto n = static_cast<std::size_t>(oracle.num_components());
    bool full = n == 1;
    if (!full && sample.size() == n) {
      full = true;
      for (std::size_t k = 0; k < n && full; ++k) full = sample[k] == k;
    }
    if (full) return composite_gradient(oracle, outer, x);
  }
  Vector<Scalar> y;
  Matrix<Scalar> jac;
  sample_mean(oracle, sample, x, y, jac);
  return chain_gradient(jac, outer.gradient(y));
}

/// f(mean of `draws` samples of g_xi(x)) + r(x) for expectation-mode oracles.
/// The draws are charged to `sample_counter` only when one is passed.
template <typename Scalar>
Scalar monte_carlo_value(const ComponentOracle<Scalar>& oracle, const OuterFunction<Scalar>& outer,
                         const Regularizer<Scalar>& reg, const Vector<Scalar>& x,
                         std::int64_t draws, Rng& rng, SampleCount* sample_counter = nullptr) {
  require(draws > 0, "draw count must be positive");
  if (oracle.finite_sum())
    throw std::domain_error("monte_carlo_value expects an expectation-mode oracle");
  detail::check_pair(oracle, outer);
  detail::check_point(oracle, x);
  Vector<Scalar> sum = Vector<Scalar>::Zero(oracle.dim_p());
  Vector<Scalar> v;
  Matrix<Scalar> j;
  for (std::int64_t k = 0; k < draws; ++k) {
    oracle.eval_component(oracle.draw(rng), x, v, j);
    sum += v;
  }
  if (sample_counter != nullptr) *sample_counter += draws;
  return outer.value(sum / static_cast<Scalar>(draws)) + reg.value(x);
}

template <typename Scalar>
struct GradientMapping {
  Vector<Scalar> map;
  Scalar sq_norm;
};

/// G_eta(x) = (x - prox(x - eta F'(x), eta)) / eta with the exact F'.
template <typename Scalar>
GradientMapping<Scalar> gradient_mapping(const ComponentOracle<Scalar>& oracle,
                                         const OuterFunction<Scalar>& outer,
                                         const Regularizer<Scalar>& reg, const Vector<Scalar>& x,
                                         Scalar eta) {
  require(eta > 0, "step must be positive");
  const Vector<Scalar> grad = composite_gradient(oracle, outer, x);
  Vector<Scalar> map = (x - reg.prox(x - eta * grad, eta)) / eta;
  const Scalar sq = map.squaredNorm();
  return {std::move(map), sq};
}

template <typename Scalar>
Scalar composite_value(const CompositeProblem<Scalar>& problem, const Regularizer<Scalar>& reg,
                       const Vector<Scalar>& x) {
  return composite_value(*problem.oracle, *problem.outer, reg, x);
}

template <typename Scalar>
Vector<Scalar> composite_gradient(const CompositeProblem<Scalar>& problem,
                                  const Vector<Scalar>& x) {
  return composite_gradient(*problem.oracle, *problem.outer, x);
}

template <typename Scalar>
GradientMapping<Scalar> gradient_mapping(const CompositeProblem<Scalar>& problem,
                                         const Regularizer<Scalar>& reg, const Vector<Scalar>& x,
                                         Scalar eta) {
  return gradient_mapping(*problem.oracle, *problem.outer, reg, x, eta);
}

/// Empirical variances of g_xi(x) and g'_xi(x) (Frobenius) from `draws`
/// samples at x, written into the sigma fields of `c`. The samples are a pilot
/// and are not charged anywhere.
template <typename Scalar>
SmoothnessConstants<Scalar> pilot_variances(const ComponentOracle<Scalar>& oracle,
                                            const Vector<Scalar>& x, std::int64_t draws, Rng& rng,
                                            SmoothnessConstants<Scalar> c) {
  require(draws >= 2, "pilot needs at least two draws");
  detail::check_point(oracle, x);
  std::vector<Vector<Scalar>> values(static_cast<std::size_t>(draws));
  std::vector<Matrix<Scalar>> jacs(static_cast<std::size_t>(draws));
  Vector<Scalar> mean_v = Vector<Scalar>::Zero(oracle.dim_p());
  Matrix<Scalar> mean_j = Matrix<Scalar>::Zero(oracle.dim_p(), oracle.dim_d());
  for (std::size_t k = 0; k < values.size(); ++k) {
    oracle.eval_component(oracle.draw(rng), x, values[k], jacs[k]);
    mean_v += values[k];
    mean_j += jacs[k];
  }
  mean_v /= Scalar(draws);
  mean_j /= Scalar(draws);
  Scalar sv = 0, sj = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    sv += (values[k] - mean_v).squaredNorm();
    sj += (jacs[k] - mean_j).squaredNorm();
  }
  c.sigma_g_sq = sv / Scalar(draws - 1);
  c.sigma_gp_sq = sj / Scalar(draws - 1);
  return c;
}

}  // namespace civr
