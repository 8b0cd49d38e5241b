#pragma once

#include <cmath>
#include <memory>
#include <utility>

#include "civr/composite.hpp"
#include "civr/constants.hpp"

namespace civr {

/// RiskAverse minimizes -(mean - lambda * variance). PaperLiteral keeps the
/// outer map -y + lambda y^2 - lambda z, which rewards variance instead.
enum class SignMode { RiskAverse, PaperLiteral };

/// Mean-variance portfolio selection over n periods of d asset returns;
/// h_i(x) = <R_i, x>.
template <typename Scalar>
struct PortfolioProblem {
  Matrix<Scalar> returns;  ///< n x d
  Scalar lambda = Scalar(0.2);
  SignMode sign_mode = SignMode::RiskAverse;

  Index periods() const { return returns.rows(); }
  Index assets() const { return returns.cols(); }

  void validate() const {
    require(returns.rows() >= 1 && returns.cols() >= 1, "returns matrix must be nonempty");
    require(returns.allFinite(), "returns must be finite");
    require(lambda >= 0, "risk weight must be nonnegative");
  }
};

/// g_i(x) = [h_i(x), h_i(x)^2] with Jacobian rows R_i and 2 h_i(x) R_i.
/// `i` is zero-based.
template <typename Scalar>
std::pair<Vector<Scalar>, Matrix<Scalar>> portfolio_component(
    const PortfolioProblem<Scalar>& problem, Index i, const Vector<Scalar>& x) {
  if (i < 0 || i >= problem.periods()) throw std::out_of_range("portfolio component index");
  require_dims(x.size() == problem.assets(), "portfolio point vs asset count");
  const Scalar h = problem.returns.row(i).dot(x);
  Vector<Scalar> value(2);
  value << h, h * h;
  Matrix<Scalar> jac(2, problem.assets());
  jac.row(0) = problem.returns.row(i);
  jac.row(1) = Scalar(2) * h * problem.returns.row(i);
  return {std::move(value), std::move(jac)};
}

/// Outer map f(y, z) and its gradient for the chosen sign mode.
template <typename Scalar>
std::pair<Scalar, Vector<Scalar>> portfolio_outer(const PortfolioProblem<Scalar>& problem,
                                                  Scalar y, Scalar z) {
  const Scalar lam = problem.lambda;
  Vector<Scalar> grad(2);
  if (problem.sign_mode == SignMode::RiskAverse) {
    grad << -1 - 2 * lam * y, lam;
    return {-y + lam * (z - y * y), std::move(grad)};
  }
  grad << -1 + 2 * lam * y, -lam;
  return {-y + lam * y * y - lam * z, std::move(grad)};
}

/// F(x) straight from the period returns, without the composite machinery.
template <typename Scalar>
Scalar portfolio_objective_direct(const PortfolioProblem<Scalar>& problem,
                                  const Vector<Scalar>& x) {
  const Vector<Scalar> h = problem.returns * x;
  const Scalar mean = h.mean();
  const Scalar mean_sq = h.squaredNorm() / static_cast<Scalar>(h.size());
  if (problem.sign_mode == SignMode::RiskAverse)
    return -mean + problem.lambda * (mean_sq - mean * mean);
  return -mean + problem.lambda * mean * mean - problem.lambda * mean_sq;
}

template <typename Scalar>
class PortfolioOracle final : public ComponentOracle<Scalar> {
 public:
  using Vec = Vector<Scalar>;
  using Mat = Matrix<Scalar>;

  explicit PortfolioOracle(std::shared_ptr<const PortfolioProblem<Scalar>> problem)
      : problem_(std::move(problem)) {
    problem_->validate();
  }

  Index dim_d() const override { return problem_->assets(); }
  Index dim_p() const override { return 2; }
  OracleMode mode() const override { return OracleMode::FiniteSum; }
  Index num_components() const override { return problem_->periods(); }

  void eval_component(Draw draw, const Vec& x, Vec& value, Mat& jacobian) const override {
    const auto i = static_cast<Index>(draw);
    if (i >= problem_->periods()) throw std::out_of_range("portfolio component index");
    const auto row = problem_->returns.row(i);
    const Scalar h = row.dot(x);
    value.resize(2);
    value << h, h * h;
    jacobian.resize(2, problem_->assets());
    jacobian.row(0) = row;
    jacobian.row(1) = Scalar(2) * h * row;
  }

  /// Closed-form mean over all periods via one matrix-vector product.
  void eval_full(const Vec& x, Vec& value, Mat& jacobian) const override {
    const Mat& r = problem_->returns;
    require_dims(x.size() == r.cols(), "portfolio point dimension");
    const Vec h = r * x;
    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(r.rows());
    value.resize(2);
    value << h.sum() * inv_n, h.squaredNorm() * inv_n;
    jacobian.resize(2, r.cols());
    jacobian.row(0) = r.colwise().sum() * inv_n;
    jacobian.row(1) = (Scalar(2) * inv_n) * (r.transpose() * h).transpose();
  }

  const PortfolioProblem<Scalar>& problem() const { return *problem_; }

 private:
  std::shared_ptr<const PortfolioProblem<Scalar>> problem_;
};

template <typename Scalar>
class PortfolioOuter final : public OuterFunction<Scalar> {
 public:
  using Vec = Vector<Scalar>;

  explicit PortfolioOuter(std::shared_ptr<const PortfolioProblem<Scalar>> problem)
      : problem_(std::move(problem)) {}

  Index dim_p() const override { return 2; }
  Scalar value(const Vec& u) const override {
    require_dims(u.size() == 2, "portfolio outer expects (y, z)");
    return portfolio_outer(*problem_, u(0), u(1)).first;
  }
  Vec gradient(const Vec& u) const override {
    require_dims(u.size() == 2, "portfolio outer expects (y, z)");
    return portfolio_outer(*problem_, u(0), u(1)).second;
  }

 private:
  std::shared_ptr<const PortfolioProblem<Scalar>> problem_;
};

template <typename Scalar>
CompositeProblem<Scalar> make_portfolio(PortfolioProblem<Scalar> problem) {
  auto shared = std::make_shared<const PortfolioProblem<Scalar>>(std::move(problem));
  return {std::make_shared<PortfolioOracle<Scalar>>(shared),
          std::make_shared<PortfolioOuter<Scalar>>(shared)};
}

/// Lipschitz constants valid on the box ||x||_inf <= radius. The outer map is
/// quadratic, so no global constants exist.
template <typename Scalar>
SmoothnessConstants<Scalar> portfolio_constants(const PortfolioProblem<Scalar>& problem,
                                                Scalar radius) {
  require(radius > 0, "region radius must be positive");
  Scalar ell_g = 0, max_row_sq = 0, h_max = 0;
  for (Index i = 0; i < problem.periods(); ++i) {
    const Scalar norm = problem.returns.row(i).norm();
    const Scalar h_bound = problem.returns.row(i).template lpNorm<1>() * radius;
    ell_g = std::max(ell_g, norm * std::sqrt(1 + 4 * h_bound * h_bound));
    max_row_sq = std::max(max_row_sq, norm * norm);
    h_max = std::max(h_max, h_bound);
  }
  const Scalar lam = problem.lambda;
  SmoothnessConstants<Scalar> c;
  c.ell_g = ell_g;
  c.L_g = 2 * max_row_sq;
  c.L_f = 2 * lam;
  c.ell_f = std::sqrt((1 + 2 * lam * h_max) * (1 + 2 * lam * h_max) + lam * lam);
  return c;
}

/// Factor-model returns: R_ij = beta_j f_i + alpha_j + e_ij with a common market
/// factor f_i ~ N(0.5, 1), beta_j ~ U(0.6, 1.4), alpha_j ~ U(-0.02, 0.3) and
/// idiosyncratic noise e_ij ~ N(0, 0.6^2). Mean-to-noise is set well above real
/// daily data so a 20n sample budget resolves the optimum; see README.
template <typename Scalar>
Matrix<Scalar> synthetic_returns(Index periods, Index assets, std::uint64_t seed) {
  require(periods >= 1 && assets >= 1, "need a nonempty returns matrix");
  Rng rng(derive_seed(seed, stream::kData));
  Vector<Scalar> beta(assets), alpha(assets);
  for (Index j = 0; j < assets; ++j) {
    beta(j) = Scalar(0.6 + 0.8 * uniform01(rng));
    alpha(j) = Scalar(-0.02 + 0.32 * uniform01(rng));
  }
  Matrix<Scalar> r(periods, assets);
  for (Index i = 0; i < periods; ++i) {
    const double market = 0.5 + standard_normal(rng);
    for (Index j = 0; j < assets; ++j)
      r(i, j) = Scalar(double(beta(j)) * market + double(alpha(j)) + 0.6 * standard_normal(rng));
  }
  return r;
}

}  // namespace civr
