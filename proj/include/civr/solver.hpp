#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "civr/composite.hpp"
#include "civr/estimator.hpp"
#include "civr/schedule.hpp"

namespace civr {

template <typename Scalar>
struct TraceOptions {
  /// Evaluate Phi and ||G||^2 at each recorded iterate. Never charged to the
  /// sample counter.
  bool diagnostics = true;
  /// Record every `cadence` inner iterations; 0 picks 1 for n <= 1e4 and
  /// ceil(tau_t / 10) above.
  SampleCount cadence = 0;
  /// Keep a copy of every recorded iterate.
  bool store_iterates = false;
  /// Fill wallclock_ns; off gives byte-identical traces across runs.
  bool wallclock = true;
  /// Draws of the Monte-Carlo side channel for oracles without an exact mean.
  std::int64_t mc_draws = 10000;
};

template <typename Scalar>
struct TraceRecord {
  std::int64_t epoch;
  std::int64_t iter;
  SampleCount samples;
  Scalar objective;
  Scalar grad_map_sq;
  std::int64_t wallclock_ns;
};

template <typename Scalar>
struct RunTrace {
  std::vector<TraceRecord<Scalar>> records;
  /// Parallel to `records` when TraceOptions::store_iterates is set.
  std::vector<Vector<Scalar>> iterates;
};

template <typename Scalar>
struct SolverResult {
  Vector<Scalar> x_bar;   ///< output iterate, uniformly selected over slots
  Vector<Scalar> x_last;  ///< last iterate produced
  std::int64_t bar_epoch = 0;
  std::int64_t bar_iter = 0;
  SampleCount samples = 0;
  RunTrace<Scalar> trace;
  /// Per-period outputs of run_restarted (empty otherwise).
  std::vector<Vector<Scalar>> period_outputs;
};

/// Evaluates Phi(x) and ||G_eta(x)||^2 outside the sample accounting: exact
/// means when available, otherwise a fixed Monte-Carlo batch (the same draws
/// for every x).
template <typename Scalar>
class Diagnostics {
 public:
  using Vec = Vector<Scalar>;
  using Mat = Matrix<Scalar>;

  Diagnostics(const CompositeProblem<Scalar>& problem, const Regularizer<Scalar>& reg,
              Scalar eta, std::int64_t mc_draws, std::uint64_t seed)
      : problem_(problem), reg_(reg), eta_(eta) {
    if (!problem_.oracle->has_exact_mean()) {
      require(mc_draws > 0, "Monte-Carlo diagnostics need a positive draw count");
      Rng rng(derive_seed(seed, stream::kDiagnostics));
      draws_.resize(static_cast<std::size_t>(mc_draws));
      for (auto& d : draws_) d = problem_.oracle->draw(rng);
    }
  }

  /// (objective, squared gradient-mapping norm)
  std::pair<Scalar, Scalar> operator()(const Vec& x) const {
    Vec y;
    Mat jac;
    if (draws_.empty())
      problem_.oracle->eval_full(x, y, jac);
    else
      sample_mean<Scalar>(*problem_.oracle, draws_, x, y, jac);
    const Scalar value = problem_.outer->value(y) + reg_.value(x);
    const Vec grad = chain_gradient(jac, problem_.outer->gradient(y));
    const Vec map = (x - reg_.prox(x - eta_ * grad, eta_)) / eta_;
    return {value, map.squaredNorm()};
  }

 private:
  CompositeProblem<Scalar> problem_;
  Regularizer<Scalar> reg_;
  Scalar eta_;
  std::vector<Draw> draws_;
};

namespace detail {

template <typename Scalar>
class TraceWriter {
 public:
  TraceWriter(const CompositeProblem<Scalar>& problem, const Regularizer<Scalar>& reg, Scalar eta,
              const TraceOptions<Scalar>& opts, std::uint64_t seed, RunTrace<Scalar>& trace)
      : opts_(opts),
        trace_(trace),
        start_(std::chrono::steady_clock::now()),
        n_(problem.oracle->num_components()) {
    if (opts_.diagnostics) diag_.emplace(problem, reg, eta, opts_.mc_draws, seed);
  }

  bool due(SampleCount iter, SampleCount tau) const {
    SampleCount cadence = opts_.cadence;
    if (cadence <= 0) cadence = n_ > 10000 ? (tau + 9) / 10 : 1;
    return iter % cadence == 0;
  }

  void record(std::int64_t epoch, std::int64_t iter, SampleCount samples, const Vector<Scalar>& x) {
    Scalar obj = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar gm = std::numeric_limits<Scalar>::quiet_NaN();
    if (diag_) std::tie(obj, gm) = (*diag_)(x);
    std::int64_t ns = 0;
    if (opts_.wallclock)
      ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                                start_)
               .count();
    trace_.records.push_back({epoch, iter, samples, obj, gm, ns});
    if (opts_.store_iterates) trace_.iterates.push_back(x);
  }

 private:
  const TraceOptions<Scalar>& opts_;
  RunTrace<Scalar>& trace_;
  std::chrono::steady_clock::time_point start_;
  Index n_;
  std::optional<Diagnostics<Scalar>> diag_;
};

template <typename Scalar>
void check_finite(const Vector<Scalar>& x, std::int64_t epoch, std::int64_t iter) {
  if (!x.allFinite()) throw numerical_error("non-finite iterate", epoch, iter);
}

}  // namespace detail

/// Composite incremental variance reduction.
///
/// Each epoch t anchors (y, z) at x_0^t with B_t samples, steps, then runs
/// tau_t - 1 incremental corrections of batch S_t, each followed by
///   x <- prox(x - eta z^T f'(y), eta).
/// The next epoch starts from the last iterate. The output x_bar is one of the
/// sum_t tau_t slots x_i^t (0 <= i < tau_t), chosen uniformly with an index
/// drawn before the run.
template <typename Scalar>
SolverResult<Scalar> run_civr(const CompositeProblem<Scalar>& problem,
                              const Regularizer<Scalar>& reg, const Vector<Scalar>& x_init,
                              const Schedule<Scalar>& sched, std::uint64_t seed,
                              const TraceOptions<Scalar>& opts = {}) {
  problem.validate();
  sched.validate();
  const auto& oracle = *problem.oracle;
  const auto& outer = *problem.outer;
  detail::check_point(oracle, x_init);
  const Scalar eta = sched.eta;

  SolverResult<Scalar> result;
  detail::TraceWriter<Scalar> writer(problem, reg, eta, opts, seed, result.trace);

  Rng select_rng(derive_seed(seed, stream::kSelect));
  const auto chosen = uniform_index(select_rng, static_cast<std::uint64_t>(sched.total_slots()));
  std::uint64_t slot = 0;
  auto visit_slot = [&](const Vector<Scalar>& x, std::int64_t t, std::int64_t i) {
    if (slot == chosen) {
      result.x_bar = x;
      result.bar_epoch = t;
      result.bar_iter = i;
    }
    ++slot;
  };

  Vector<Scalar> x = x_init;
  SampleCount samples = 0;
  for (std::int64_t t = 1; t <= sched.num_epochs(); ++t) {
    const EpochParams& e = sched.epochs[static_cast<std::size_t>(t - 1)];
    Rng anchor_rng(derive_seed(seed, stream::kAnchor, t));
    EstimatorState<Scalar> state = anchor(oracle, x, e.anchor, anchor_rng);
    samples += state.samples;
    if (writer.due(0, e.tau)) writer.record(t, 0, samples, x);
    visit_slot(x, t, 0);
    x = reg.prox(x - eta * composite_estimate(state, outer), eta);
    detail::check_finite(x, t, 1);

    for (std::int64_t i = 1; i < e.tau; ++i) {
      Rng advance_rng(derive_seed(seed, stream::kAdvance, t, i));
      samples += advance(state, oracle, x, e.inner_batch, advance_rng);
      if (writer.due(i, e.tau)) writer.record(t, i, samples, x);
      visit_slot(x, t, i);
      x = reg.prox(x - eta * composite_estimate(state, outer), eta);
      detail::check_finite(x, t, i + 1);
    }
  }
  result.x_last = std::move(x);
  result.samples = samples;
  return result;
}

/// Chains `periods` runs of the period schedule, each started from the
/// previous period's output. The gradient-dominant period schedules are only
/// defined for r = 0 and are refused otherwise.
template <typename Scalar>
SolverResult<Scalar> run_restarted(const CompositeProblem<Scalar>& problem,
                                   const Regularizer<Scalar>& reg, const Vector<Scalar>& x_init,
                                   const Schedule<Scalar>& period_schedule, std::int64_t periods,
                                   std::uint64_t seed, const TraceOptions<Scalar>& opts = {}) {
  require(periods >= 1, "need at least one period");
  const bool gradient_dominant =
      period_schedule.kind == ScheduleKind::RestartGradientDominantExpectation ||
      period_schedule.kind == ScheduleKind::RestartGradientDominantFiniteSum;
  require(!gradient_dominant || reg.is_zero(),
          "gradient-dominant restarts are only valid without a regularizer");

  SolverResult<Scalar> out;
  Vector<Scalar> x = x_init;
  for (std::int64_t p = 0; p < periods; ++p) {
    SolverResult<Scalar> r =
        run_civr(problem, reg, x, period_schedule, derive_seed(seed, stream::kPeriod, p), opts);
    const std::int64_t epoch_offset = p * period_schedule.num_epochs();
    for (auto rec : r.trace.records) {
      rec.epoch += epoch_offset;
      rec.samples += out.samples;
      out.trace.records.push_back(rec);
    }
    for (auto& it : r.trace.iterates) out.trace.iterates.push_back(std::move(it));
    out.samples += r.samples;
    out.bar_epoch = r.bar_epoch + epoch_offset;
    out.bar_iter = r.bar_iter;
    out.period_outputs.push_back(r.x_bar);
    x = r.x_bar;
    out.x_last = std::move(r.x_last);
  }
  out.x_bar = std::move(x);
  return out;
}

/// Deterministic proximal gradient descent x <- prox(x - eta F'(x), eta).
/// Records each x^k (epoch 1, iter k) and charges one full pass per step;
/// x_bar is the last iterate.
template <typename Scalar>
SolverResult<Scalar> baseline_prox_fullgrad(const CompositeProblem<Scalar>& problem,
                                            const Regularizer<Scalar>& reg,
                                            const Vector<Scalar>& x_init, Scalar eta,
                                            std::int64_t iters,
                                            const TraceOptions<Scalar>& opts = {}) {
  problem.validate();
  require(eta > 0, "step size must be positive");
  require(iters >= 1, "need at least one iteration");
  const auto& oracle = *problem.oracle;
  detail::require_exact_mean(oracle);
  detail::check_point(oracle, x_init);

  SolverResult<Scalar> result;
  detail::TraceWriter<Scalar> writer(problem, reg, eta, opts, 0, result.trace);
  Vector<Scalar> x = x_init;
  SampleCount samples = 0;
  for (std::int64_t k = 0; k < iters; ++k) {
    const Vector<Scalar> grad = composite_gradient(oracle, *problem.outer, x);
    samples += oracle.full_cost();
    if (writer.due(k, iters)) writer.record(1, k, samples, x);
    x = reg.prox(x - eta * grad, eta);
    detail::check_finite(x, 1, k + 1);
  }
  result.x_bar = x;
  result.x_last = std::move(x);
  result.bar_epoch = 1;
  result.bar_iter = iters;
  result.samples = samples;
  return result;
}

/// Mini-batch proximal SGD on the plug-in gradient estimate, with step eta_k
/// at iteration k. A batch >= n in finite-sum mode uses the exact means.
template <typename Scalar>
SolverResult<Scalar> baseline_prox_plugin_sgd(const CompositeProblem<Scalar>& problem,
                                              const Regularizer<Scalar>& reg,
                                              const Vector<Scalar>& x_init,
                                              const std::function<Scalar(std::int64_t)>& eta_at,
                                              SampleCount batch, std::int64_t iters,
                                              std::uint64_t seed,
                                              const TraceOptions<Scalar>& opts = {}) {
  problem.validate();
  require(batch > 0, "batch size must be positive");
  require(iters >= 1, "need at least one iteration");
  const auto& oracle = *problem.oracle;
  detail::check_point(oracle, x_init);

  const bool full = oracle.finite_sum() && batch >= oracle.num_components();
  SolverResult<Scalar> result;
  detail::TraceWriter<Scalar> writer(problem, reg, eta_at(0), opts, seed, result.trace);
  Vector<Scalar> x = x_init;
  SampleCount samples = 0;
  std::vector<Draw> draws(static_cast<std::size_t>(batch));
  for (std::int64_t k = 0; k < iters; ++k) {
    const Scalar eta = eta_at(k);
    require(eta > 0, "step size must be positive");
    Vector<Scalar> grad;
    if (full) {
      grad = composite_gradient(oracle, *problem.outer, x);
      samples += oracle.full_cost();
    } else {
      Rng rng(derive_seed(seed, stream::kBaseline, k));
      for (auto& d : draws) d = oracle.draw(rng);
      grad = plugin_gradient_estimate<Scalar>(oracle, *problem.outer, x, draws);
      samples += batch;
    }
    if (writer.due(k, iters)) writer.record(1, k, samples, x);
    x = reg.prox(x - eta * grad, eta);
    detail::check_finite(x, 1, k + 1);
  }
  result.x_bar = x;
  result.x_last = std::move(x);
  result.bar_epoch = 1;
  result.bar_iter = iters;
  result.samples = samples;
  return result;
}

}  // namespace civr
