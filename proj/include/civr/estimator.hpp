#pragma once

#include <vector>

#include "civr/composite.hpp"

namespace civr {

/// Anchor batch size: a positive draw count, or the full component set.
class AnchorSize {
 public:
  static AnchorSize full() { return AnchorSize(0); }
  static AnchorSize of(SampleCount count) {
    require(count > 0, "anchor batch size must be positive");
    return AnchorSize(count);
  }

  bool is_full() const { return count_ == 0; }
  /// Draw count; meaningless for the full batch.
  SampleCount count() const { return count_; }

  friend bool operator==(const AnchorSize&, const AnchorSize&) = default;

 private:
  explicit AnchorSize(SampleCount count) : count_(count) {}
  SampleCount count_;
};

/// Running estimates y ~ g(x_prev) and z ~ g'(x_prev).
template <typename Scalar>
struct EstimatorState {
  Vector<Scalar> y;
  Matrix<Scalar> z;
  Vector<Scalar> x_prev;
  /// Samples consumed since the anchor, anchor included.
  SampleCount samples = 0;
  /// True while (y, z) are the exact means at x_prev.
  bool exact = false;
};

/// Large-batch (or exact) estimate at the start of an epoch.
///
/// In finite-sum mode a batch of size >= n is the full set. Sampled batches
/// are i.i.d. with replacement.
template <typename Scalar>
EstimatorState<Scalar> anchor(const ComponentOracle<Scalar>& oracle, const Vector<Scalar>& x0,
                              AnchorSize batch, Rng& rng) {
  detail::check_point(oracle, x0);
  EstimatorState<Scalar> state;
  state.x_prev = x0;
  const bool full =
      batch.is_full() || (oracle.finite_sum() && batch.count() >= oracle.num_components());
  if (full) {
    if (!oracle.supports_full_anchor())
      throw std::domain_error("full anchor requested in expectation mode");
    oracle.eval_full(x0, state.y, state.z);
    state.samples = oracle.full_cost();
    state.exact = true;
    return state;
  }
  std::vector<Draw> draws(static_cast<std::size_t>(batch.count()));
  for (auto& d : draws) d = oracle.draw(rng);
  sample_mean<Scalar>(oracle, draws, x0, state.y, state.z);
  state.samples = batch.count();
  return state;
}

/// Incremental correction to x_new with a batch of S draws shared by y and z:
///   y += mean(g_xi(x_new) - g_xi(x_prev)),  z += mean(g'_xi(x_new) - g'_xi(x_prev)).
/// Returns the samples consumed (2S, or the cost of the exact difference when
/// S >= n in finite-sum mode).
template <typename Scalar>
SampleCount advance(EstimatorState<Scalar>& state, const ComponentOracle<Scalar>& oracle,
                    const Vector<Scalar>& x_new, SampleCount batch, Rng& rng) {
  require(batch > 0, "inner batch size must be positive");
  detail::check_point(oracle, x_new);
  require_dims(state.x_prev.size() == x_new.size(), "estimator state vs new point");

  SampleCount cost = 0;
  if (oracle.finite_sum() && batch >= oracle.num_components()) {
    if (state.exact) {
      // y_prev == g(x_prev) exactly, so the full difference telescopes to g(x_new).
      oracle.eval_full(x_new, state.y, state.z);
      cost = oracle.full_cost();
    } else {
      Vector<Scalar> v_new, v_old;
      Matrix<Scalar> j_new, j_old;
      oracle.eval_full(x_new, v_new, j_new);
      oracle.eval_full(state.x_prev, v_old, j_old);
      state.y += v_new - v_old;
      state.z += j_new - j_old;
      cost = 2 * oracle.full_cost();
    }
  } else {
    Vector<Scalar> dy = Vector<Scalar>::Zero(oracle.dim_p());
    Matrix<Scalar> dz = Matrix<Scalar>::Zero(oracle.dim_p(), oracle.dim_d());
    Vector<Scalar> v_new, v_old;
    Matrix<Scalar> j_new, j_old;
    for (SampleCount k = 0; k < batch; ++k) {
      const Draw d = oracle.draw(rng);
      oracle.eval_component(d, x_new, v_new, j_new);
      oracle.eval_component(d, state.x_prev, v_old, j_old);
      dy += v_new - v_old;
      dz += j_new - j_old;
    }
    const Scalar inv = Scalar(1) / static_cast<Scalar>(batch);
    state.y += dy * inv;
    state.z += dz * inv;
    state.exact = false;
    cost = 2 * batch;
  }
  state.x_prev = x_new;
  state.samples += cost;
  return cost;
}

/// z^T f'(y).
template <typename Scalar>
Vector<Scalar> composite_estimate(const EstimatorState<Scalar>& state,
                                  const OuterFunction<Scalar>& outer) {
  require_dims(state.y.size() == outer.dim_p(), "estimator y vs outer p");
  return chain_gradient(state.z, outer.gradient(state.y));
}

}  // namespace civr
