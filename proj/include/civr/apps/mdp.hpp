#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "civr/composite.hpp"
#include "civr/constants.hpp"

namespace civr {

/// Policy evaluation with linear value features: minimize
///   F(w) = sum_i ( <Psi_i, w> - sum_j P_ij (R_ij + gamma <Psi_j, w>) )^2.
template <typename Scalar>
struct MdpPolicyEvalProblem {
  Matrix<Scalar> P;    ///< S x S transition matrix under the policy
  Matrix<Scalar> Rw;   ///< S x S transition rewards
  Matrix<Scalar> Psi;  ///< S x k features, row i is Psi_i
  Scalar gamma = Scalar(0.9);

  Index states() const { return P.rows(); }
  Index features() const { return Psi.cols(); }

  void validate() const {
    const Index s = P.rows();
    require(s >= 1 && P.cols() == s, "transition matrix must be square and nonempty");
    require(Rw.rows() == s && Rw.cols() == s, "reward matrix must match the state count");
    require(Psi.rows() == s && Psi.cols() >= 1, "feature matrix must have one row per state");
    require(gamma >= 0 && gamma < 1, "discount must lie in [0, 1)");
    require(P.allFinite() && Rw.allFinite() && Psi.allFinite(), "MDP data must be finite");
    for (Index i = 0; i < s; ++i) {
      require((P.row(i).array() >= 0).all(), "transition probabilities must be nonnegative");
      require(std::abs(P.row(i).sum() - Scalar(1)) <= Scalar(1e-12),
              "transition rows must sum to one");
    }
  }
};

/// One draw: a next state j_i for every row i. Returns the 2S-vector
/// [<Psi_i, w>]_i ++ [R_{i,j_i} + gamma <Psi_{j_i}, w>]_i and its 2S x k Jacobian.
template <typename Scalar>
std::pair<Vector<Scalar>, Matrix<Scalar>> mdp_component(const MdpPolicyEvalProblem<Scalar>& problem,
                                                        std::span<const Index> next_states,
                                                        const Vector<Scalar>& w) {
  const Index s = problem.states();
  require_dims(static_cast<Index>(next_states.size()) == s, "one next state per row");
  require_dims(w.size() == problem.features(), "weights vs feature count");
  Vector<Scalar> value(2 * s);
  Matrix<Scalar> jac(2 * s, problem.features());
  value.head(s) = problem.Psi * w;
  jac.topRows(s) = problem.Psi;
  for (Index i = 0; i < s; ++i) {
    const Index j = next_states[static_cast<std::size_t>(i)];
    if (j < 0 || j >= s) throw std::out_of_range("next-state index");
    value(s + i) = problem.Rw(i, j) + problem.gamma * problem.Psi.row(j).dot(w);
    jac.row(s + i) = problem.gamma * problem.Psi.row(j);
  }
  return {std::move(value), std::move(jac)};
}

/// f(y, z) = ||y - z||^2 on a 2S-vector u = (y, z).
template <typename Scalar>
std::pair<Scalar, Vector<Scalar>> mdp_outer(const Vector<Scalar>& u) {
  if (u.size() % 2 != 0) throw std::invalid_argument("mdp outer input must have even length");
  const Index s = u.size() / 2;
  const Vector<Scalar> diff = u.head(s) - u.tail(s);
  Vector<Scalar> grad(2 * s);
  grad.head(s) = 2 * diff;
  grad.tail(s) = -2 * diff;
  return {diff.squaredNorm(), std::move(grad)};
}

/// Exact g(w) = [Psi w; q(w)] with q_i(w) = sum_j P_ij (R_ij + gamma <Psi_j, w>).
template <typename Scalar>
std::pair<Vector<Scalar>, Matrix<Scalar>> mdp_exact_inner(
    const MdpPolicyEvalProblem<Scalar>& problem, const Vector<Scalar>& w) {
  const Index s = problem.states();
  require_dims(w.size() == problem.features(), "weights vs feature count");
  const Vector<Scalar> expected_reward = (problem.P.cwiseProduct(problem.Rw)).rowwise().sum();
  const Matrix<Scalar> next_features = problem.gamma * (problem.P * problem.Psi);
  Vector<Scalar> value(2 * s);
  value.head(s) = problem.Psi * w;
  value.tail(s) = expected_reward + next_features * w;
  Matrix<Scalar> jac(2 * s, problem.features());
  jac.topRows(s) = problem.Psi;
  jac.bottomRows(s) = next_features;
  return {std::move(value), std::move(jac)};
}

/// Bellman residual objective evaluated directly.
template <typename Scalar>
Scalar mdp_objective(const MdpPolicyEvalProblem<Scalar>& problem, const Vector<Scalar>& w) {
  const Index s = problem.states();
  Scalar total = 0;
  for (Index i = 0; i < s; ++i) {
    Scalar q = 0;
    for (Index j = 0; j < s; ++j)
      q += problem.P(i, j) * (problem.Rw(i, j) + problem.gamma * problem.Psi.row(j).dot(w));
    const Scalar r = problem.Psi.row(i).dot(w) - q;
    total += r * r;
  }
  return total;
}

/// Expectation-mode oracle whose draws are independent next-state tuples.
/// The exact mean is available in closed form; it is charged as S samples.
template <typename Scalar>
class MdpOracle final : public ComponentOracle<Scalar> {
 public:
  using Vec = Vector<Scalar>;
  using Mat = Matrix<Scalar>;

  explicit MdpOracle(std::shared_ptr<const MdpPolicyEvalProblem<Scalar>> problem)
      : problem_(std::move(problem)) {
    problem_->validate();
    const Index s = problem_->states();
    cumulative_.resize(static_cast<std::size_t>(s * s));
    for (Index i = 0; i < s; ++i) {
      double acc = 0;
      for (Index j = 0; j < s; ++j) {
        acc += double(problem_->P(i, j));
        cumulative_[static_cast<std::size_t>(i * s + j)] = acc;
      }
    }
  }

  Index dim_d() const override { return problem_->features(); }
  Index dim_p() const override { return 2 * problem_->states(); }
  OracleMode mode() const override { return OracleMode::Expectation; }
  bool has_exact_mean() const override { return true; }
  bool supports_full_anchor() const override { return true; }
  SampleCount full_cost() const override { return problem_->states(); }

  /// Next state of every row for a draw token.
  std::vector<Index> next_states(Draw draw) const {
    const Index s = problem_->states();
    SplitMix64 gen(draw);
    std::vector<Index> next(static_cast<std::size_t>(s));
    for (Index i = 0; i < s; ++i) {
      const double u = uniform01(gen);
      const auto first = cumulative_.begin() + i * s;
      const auto it = std::upper_bound(first, first + s, u);
      next[static_cast<std::size_t>(i)] = std::min<Index>(it - first, s - 1);
    }
    return next;
  }

  void eval_component(Draw draw, const Vec& x, Vec& value, Mat& jacobian) const override {
    const auto next = next_states(draw);
    auto [v, j] = mdp_component<Scalar>(*problem_, next, x);
    value = std::move(v);
    jacobian = std::move(j);
  }

  void eval_full(const Vec& x, Vec& value, Mat& jacobian) const override {
    auto [v, j] = mdp_exact_inner(*problem_, x);
    value = std::move(v);
    jacobian = std::move(j);
  }

 private:
  std::shared_ptr<const MdpPolicyEvalProblem<Scalar>> problem_;
  std::vector<double> cumulative_;
};

template <typename Scalar>
class MdpOuter final : public OuterFunction<Scalar> {
 public:
  using Vec = Vector<Scalar>;

  explicit MdpOuter(Index states) : states_(states) {}

  Index dim_p() const override { return 2 * states_; }
  Scalar value(const Vec& u) const override { return mdp_outer(u).first; }
  Vec gradient(const Vec& u) const override { return mdp_outer(u).second; }

 private:
  Index states_;
};

template <typename Scalar>
CompositeProblem<Scalar> make_mdp(MdpPolicyEvalProblem<Scalar> problem) {
  const Index s = problem.states();
  auto shared = std::make_shared<const MdpPolicyEvalProblem<Scalar>>(std::move(problem));
  return {std::make_shared<MdpOracle<Scalar>>(shared), std::make_shared<MdpOuter<Scalar>>(s)};
}

template <typename Scalar>
struct MdpInstance {
  MdpPolicyEvalProblem<Scalar> problem;
  /// Weights with zero Bellman residual, for realizable instances.
  std::optional<Vector<Scalar>> w_true;
};

/// Random instance: positive uniform transition rows normalized to sum to
/// one, U(0,1) features and rewards. A realizable instance shifts each reward
/// row so that the value function Psi w_true satisfies the Bellman equation
/// exactly.
template <typename Scalar>
MdpInstance<Scalar> generate_mdp(Index states, Index features, Scalar gamma, std::uint64_t seed,
                                 bool realizable) {
  require(states >= 1 && features >= 1, "need at least one state and one feature");
  Rng rng(derive_seed(seed, stream::kData));
  auto uniform_matrix = [&](Index r, Index c) {
    Matrix<Scalar> m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) m(i, j) = Scalar(uniform01(rng));
    return m;
  };
  MdpInstance<Scalar> out;
  auto& p = out.problem;
  p.gamma = gamma;
  p.P = uniform_matrix(states, states).array() + Scalar(1e-3);
  for (Index i = 0; i < states; ++i) p.P.row(i) /= p.P.row(i).sum();
  p.Psi = uniform_matrix(states, features);
  p.Rw = uniform_matrix(states, states);
  if (realizable) {
    Vector<Scalar> w(features);
    for (Index j = 0; j < features; ++j) w(j) = Scalar(2 * uniform01(rng) - 1);
    const Vector<Scalar> v = p.Psi * w;
    const Vector<Scalar> target = v - gamma * (p.P * v);
    const Vector<Scalar> current = (p.P.cwiseProduct(p.Rw)).rowwise().sum();
    p.Rw.colwise() += target - current;
    out.w_true = std::move(w);
  }
  p.validate();
  return out;
}

/// Constants on the box ||w||_inf <= radius. g is affine in w, so L_g = 0.
template <typename Scalar>
SmoothnessConstants<Scalar> mdp_constants(const MdpPolicyEvalProblem<Scalar>& problem,
                                          Scalar radius) {
  require(radius > 0, "region radius must be positive");
  const Index s = problem.states();
  Scalar max_row = 0, max_row_l1 = 0;
  for (Index i = 0; i < s; ++i) {
    max_row = std::max(max_row, problem.Psi.row(i).norm());
    max_row_l1 = std::max(max_row_l1, problem.Psi.row(i).template lpNorm<1>());
  }
  Eigen::JacobiSVD<Matrix<Scalar>> svd(problem.Psi);
  SmoothnessConstants<Scalar> c;
  // ||[Psi; gamma Psi_J]|| <= ||Psi|| + gamma sqrt(S) max_i ||Psi_i||
  c.ell_g = svd.singularValues()(0) + problem.gamma * std::sqrt(Scalar(s)) * max_row;
  c.L_g = 0;
  c.L_f = 4;
  // ||f'(u)|| = 2 sqrt(2) ||y - z||, |y_i - z_i| <= (1 + gamma) max ||Psi_i||_1 radius + max |R|
  const Scalar gap = (1 + problem.gamma) * max_row_l1 * radius + problem.Rw.cwiseAbs().maxCoeff();
  c.ell_f = 2 * std::sqrt(Scalar(2)) * std::sqrt(Scalar(s)) * gap;
  return c;
}

}  // namespace civr
