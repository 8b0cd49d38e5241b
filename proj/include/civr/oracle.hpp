#pragma once

#include <memory>
#include <stdexcept>

#include "civr/core.hpp"
#include "civr/rng.hpp"

namespace civr {

enum class OracleMode { FiniteSum, Expectation };

/// Sampling access to the inner mapping g_xi : R^d -> R^p and its Jacobian.
///
/// Implementations are immutable after construction and must be safe for
/// concurrent const calls. The same draw evaluated at two points refers to the
/// same realization of xi, which is what the incremental estimator relies on.
template <typename Scalar>
class ComponentOracle {
 public:
  using Vec = Vector<Scalar>;
  using Mat = Matrix<Scalar>;

  virtual ~ComponentOracle() = default;

  virtual Index dim_d() const = 0;
  virtual Index dim_p() const = 0;
  virtual OracleMode mode() const = 0;

  /// Component count n in finite-sum mode, 0 otherwise.
  virtual Index num_components() const { return 0; }

  /// Evaluates g_xi(x) and g'_xi(x) for one draw. Outputs are resized.
  virtual void eval_component(Draw draw, const Vec& x, Vec& value, Mat& jacobian) const = 0;

  /// Draws one component: uniform index in finite-sum mode, a raw token otherwise.
  virtual Draw draw(Rng& rng) const {
    if (finite_sum()) return uniform_index(rng, static_cast<std::uint64_t>(num_components()));
    return rng();
  }

  /// Whether eval_full is available. Always true in finite-sum mode; an
  /// expectation-mode oracle may provide a closed-form mean.
  virtual bool has_exact_mean() const { return finite_sum(); }

  /// Exact mean g(x), g'(x). The finite-sum default sums components in
  /// index-ascending pairwise order, so repeated calls are bit-reproducible.
  virtual void eval_full(const Vec& x, Vec& value, Mat& jacobian) const {
    if (!finite_sum())
      throw std::domain_error("eval_full requires a finite-sum oracle or a closed-form mean");
    pairwise_sum(0, num_components(), x, value, jacobian);
    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(num_components());
    value *= inv_n;
    jacobian *= inv_n;
  }

  /// Whether an epoch may anchor on the exact mean. Expectation-mode oracles
  /// whose exact mean only serves diagnostics leave this false.
  virtual bool supports_full_anchor() const { return finite_sum(); }

  /// Samples charged for one eval_full call.
  virtual SampleCount full_cost() const { return static_cast<SampleCount>(num_components()); }

  bool finite_sum() const { return mode() == OracleMode::FiniteSum; }

 protected:
  void pairwise_sum(Index first, Index last, const Vec& x, Vec& value, Mat& jacobian) const {
    constexpr Index kLeaf = 8;
    if (last - first <= kLeaf) {
      eval_component(static_cast<Draw>(first), x, value, jacobian);
      Vec v;
      Mat j;
      for (Index i = first + 1; i < last; ++i) {
        eval_component(static_cast<Draw>(i), x, v, j);
        value += v;
        jacobian += j;
      }
      return;
    }
    const Index mid = first + (last - first) / 2;
    pairwise_sum(first, mid, x, value, jacobian);
    Vec v;
    Mat j;
    pairwise_sum(mid, last, x, v, j);
    value += v;
    jacobian += j;
  }
};

/// Smooth outer function f : R^p -> R.
template <typename Scalar>
class OuterFunction {
 public:
  using Vec = Vector<Scalar>;

  virtual ~OuterFunction() = default;

  virtual Index dim_p() const = 0;
  virtual Scalar value(const Vec& y) const = 0;
  virtual Vec gradient(const Vec& y) const = 0;
};

/// f(y) = ||y||^2.
template <typename Scalar>
class SquaredNormOuter final : public OuterFunction<Scalar> {
 public:
  using Vec = Vector<Scalar>;

  explicit SquaredNormOuter(Index p) : p_(p) { require(p >= 1, "outer dimension must be positive"); }

  Index dim_p() const override { return p_; }
  Scalar value(const Vec& y) const override { return y.squaredNorm(); }
  Vec gradient(const Vec& y) const override { return Scalar(2) * y; }

 private:
  Index p_;
};

/// f(y) = y for p = 1; the composite problem reduces to a plain finite sum.
template <typename Scalar>
class ScalarIdentityOuter final : public OuterFunction<Scalar> {
 public:
  using Vec = Vector<Scalar>;

  Index dim_p() const override { return 1; }
  Scalar value(const Vec& y) const override { return y(0); }
  Vec gradient(const Vec&) const override { return Vec::Ones(1); }
};

/// An oracle paired with the outer function it feeds.
template <typename Scalar>
struct CompositeProblem {
  std::shared_ptr<const ComponentOracle<Scalar>> oracle;
  std::shared_ptr<const OuterFunction<Scalar>> outer;

  void validate() const {
    require(oracle != nullptr && outer != nullptr, "composite problem is incomplete");
    require_dims(oracle->dim_p() == outer->dim_p(), "oracle and outer function disagree on p");
  }
};

}  // namespace civr
