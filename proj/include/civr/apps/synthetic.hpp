#pragma once

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "civr/composite.hpp"
#include "civr/constants.hpp"

namespace civr {

/// g_i(x) = A_i x - b_i, i = 0..n-1.
template <typename Scalar>
class AffineFiniteSumOracle final : public ComponentOracle<Scalar> {
 public:
  using Vec = Vector<Scalar>;
  using Mat = Matrix<Scalar>;

  AffineFiniteSumOracle(std::vector<Mat> designs, std::vector<Vec> offsets)
      : designs_(std::move(designs)), offsets_(std::move(offsets)) {
    require(!designs_.empty() && designs_.size() == offsets_.size(),
            "need matching, nonempty component lists");
    for (std::size_t i = 0; i < designs_.size(); ++i) {
      require_dims(designs_[i].rows() == designs_[0].rows() &&
                       designs_[i].cols() == designs_[0].cols() &&
                       offsets_[i].size() == designs_[0].rows(),
                   "component shapes differ");
    }
  }

  Index dim_d() const override { return designs_[0].cols(); }
  Index dim_p() const override { return designs_[0].rows(); }
  OracleMode mode() const override { return OracleMode::FiniteSum; }
  Index num_components() const override { return static_cast<Index>(designs_.size()); }

  void eval_component(Draw draw, const Vec& x, Vec& value, Mat& jacobian) const override {
    if (draw >= designs_.size()) throw std::out_of_range("component index");
    const Mat& a = designs_[draw];
    value.noalias() = a * x;
    value -= offsets_[draw];
    jacobian = a;
  }

  const Mat& design(Index i) const { return designs_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<Mat> designs_;
  std::vector<Vec> offsets_;
};

enum class NoiseKind { Uniform, Gaussian };

/// Expectation-mode affine map g_xi(x) = (A + E_xi) x - (b + e_xi) with
/// i.i.d. zero-mean entries of E_xi, e_xi drawn from the token. The exact mean
/// (A x - b, A) is exposed for diagnostics only.
template <typename Scalar>
class NoisyAffineOracle final : public ComponentOracle<Scalar> {
 public:
  using Vec = Vector<Scalar>;
  using Mat = Matrix<Scalar>;

  NoisyAffineOracle(Mat design, Vec offset, Scalar noise_scale, NoiseKind kind)
      : design_(std::move(design)), offset_(std::move(offset)), scale_(noise_scale), kind_(kind) {
    require_dims(offset_.size() == design_.rows(), "offset vs design rows");
    require(noise_scale >= 0, "noise scale must be nonnegative");
  }

  Index dim_d() const override { return design_.cols(); }
  Index dim_p() const override { return design_.rows(); }
  OracleMode mode() const override { return OracleMode::Expectation; }
  bool has_exact_mean() const override { return true; }
  SampleCount full_cost() const override { return 0; }

  void eval_component(Draw draw, const Vec& x, Vec& value, Mat& jacobian) const override {
    SplitMix64 gen(draw);
    jacobian.resize(design_.rows(), design_.cols());
    for (Index j = 0; j < design_.cols(); ++j)
      for (Index i = 0; i < design_.rows(); ++i) jacobian(i, j) = design_(i, j) + noise(gen);
    value.noalias() = jacobian * x;
    for (Index i = 0; i < design_.rows(); ++i) value(i) -= offset_(i) + noise(gen);
  }

  void eval_full(const Vec& x, Vec& value, Mat& jacobian) const override {
    value.noalias() = design_ * x;
    value -= offset_;
    jacobian = design_;
  }

  /// Per-entry noise variance.
  Scalar entry_variance() const {
    return kind_ == NoiseKind::Uniform ? scale_ * scale_ / 3 : scale_ * scale_;
  }

  /// Bound on ||E_xi||_F: exact for uniform noise, a six-sigma bound for Gaussian.
  Scalar jacobian_noise_bound() const {
    const Scalar entries = std::sqrt(Scalar(design_.size()));
    return kind_ == NoiseKind::Uniform ? scale_ * entries : 6 * scale_ * entries;
  }

 private:
  Scalar noise(SplitMix64& gen) const {
    if (scale_ == 0) return Scalar(0);
    if (kind_ == NoiseKind::Uniform) return scale_ * Scalar(2 * uniform01(gen) - 1);
    return scale_ * Scalar(standard_normal(gen));
  }

  Mat design_;
  Vec offset_;
  Scalar scale_;
  NoiseKind kind_;
};

/// Controls for the synthetic quadratic composite f(y) = ||y||^2 over affine
/// components.
template <typename Scalar>
struct SyntheticSpec {
  Index d = 5;
  Index p = 5;
  Index n = 16;
  /// Singular values of the mean design, log-spaced between these.
  Scalar sigma_min = 1;
  Scalar sigma_max = 2;
  /// Scale of the zero-mean perturbations that make components differ.
  Scalar heterogeneity = Scalar(0.5);
  /// Norm of the optimal residual (requires p > d); 0 gives Phi* = 0 when r = 0.
  Scalar residual = 0;
  Scalar l1_weight = 0;
  /// Explicit mean design and offset, overriding the spectrum controls.
  std::optional<Matrix<Scalar>> design;
  std::optional<Vector<Scalar>> offset;
  /// Box radius used for the region-dependent constant ell_f.
  Scalar region_radius = 10;
};

template <typename Scalar>
struct SyntheticInstance {
  CompositeProblem<Scalar> problem;
  Regularizer<Scalar> reg;
  Matrix<Scalar> mean_design;
  Vector<Scalar> mean_offset;
  Vector<Scalar> x_star;
  Scalar phi_star = 0;
  /// Optimal strong convexity of Phi: 2 sigma_min(mean design)^2.
  Scalar mu = 0;
  /// Gradient dominance of F: 1 / (2 s^2), s the smallest nonzero singular
  /// value of the mean design (equals 1 / mu at full column rank).
  Scalar nu = std::numeric_limits<Scalar>::infinity();
  SmoothnessConstants<Scalar> constants;

  /// Phi(x) - Phi*. Without a regularizer this is ||A (x - x*)||^2, which
  /// avoids cancellation against Phi*.
  Scalar gap(const Vector<Scalar>& x) const {
    if (reg.is_zero()) return (mean_design * (x - x_star)).squaredNorm();
    return composite_value(problem, reg, x) - phi_star;
  }
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix<Scalar> m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Scalar(standard_normal(rng));
  return m;
}

template <typename Scalar>
Matrix<Scalar> random_orthogonal(Index n, Rng& rng) {
  Eigen::HouseholderQR<Matrix<Scalar>> qr(gaussian_matrix<Scalar>(n, n, rng));
  return qr.householderQ() * Matrix<Scalar>::Identity(n, n);
}

template <typename Scalar>
void validate_spec(const SyntheticSpec<Scalar>& spec) {
  require(spec.d >= 1 && spec.p >= 1 && spec.n >= 1, "dimensions and component count must be positive");
  require(spec.heterogeneity >= 0, "heterogeneity must be nonnegative");
  require(spec.l1_weight >= 0, "l1 weight must be nonnegative");
  require(spec.region_radius > 0, "region radius must be positive");
  if (!spec.design) {
    require(spec.sigma_min > 0 && spec.sigma_min <= spec.sigma_max,
            "infeasible spectrum: need 0 < sigma_min <= sigma_max");
  } else {
    require_dims(spec.design->rows() == spec.p && spec.design->cols() == spec.d,
                 "explicit design vs (p, d)");
  }
  if (spec.offset) require_dims(spec.offset->size() == spec.p, "explicit offset vs p");
  require(spec.residual >= 0, "residual must be nonnegative");
  require(spec.residual == 0 || (spec.p > spec.d && !spec.offset),
          "infeasible spectrum: a nonzero optimal residual needs p > d and a generated offset");
}

template <typename Scalar>
std::pair<Matrix<Scalar>, Vector<Scalar>> mean_design_and_offset(const SyntheticSpec<Scalar>& spec,
                                                                 Rng& rng) {
  Matrix<Scalar> a;
  if (spec.design) {
    a = *spec.design;
  } else {
    const Index m = std::min(spec.p, spec.d);
    const Matrix<Scalar> u = random_orthogonal<Scalar>(spec.p, rng);
    const Matrix<Scalar> v = random_orthogonal<Scalar>(spec.d, rng);
    Vector<Scalar> sigma(m);
    for (Index k = 0; k < m; ++k) {
      const double frac = m == 1 ? 0.0 : double(k) / double(m - 1);
      sigma(k) = Scalar(std::exp(std::log(double(spec.sigma_max)) +
                                 frac * (std::log(double(spec.sigma_min)) -
                                         std::log(double(spec.sigma_max)))));
    }
    a = u.leftCols(m) * sigma.asDiagonal() * v.leftCols(m).transpose();
  }
  Vector<Scalar> b;
  if (spec.offset) {
    b = *spec.offset;
  } else {
    const Vector<Scalar> x_true = gaussian_matrix<Scalar>(spec.d, 1, rng);
    b = a * x_true;
    if (spec.residual > 0) {
      // component of a random direction orthogonal to range(A)
      Vector<Scalar> dir = gaussian_matrix<Scalar>(spec.p, 1, rng);
      const Eigen::HouseholderQR<Matrix<Scalar>> qr(a);
      const Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(spec.p, spec.d);
      dir -= q * (q.transpose() * dir);
      b += spec.residual * dir.normalized();
    }
  }
  return {std::move(a), std::move(b)};
}

template <typename Scalar>
void fill_solution(SyntheticInstance<Scalar>& inst) {
  const Matrix<Scalar>& a = inst.mean_design;
  const Vector<Scalar>& b = inst.mean_offset;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(a);
  const auto& sv = svd.singularValues();
  const Scalar smin = a.rows() >= a.cols() ? sv(sv.size() - 1) : Scalar(0);
  inst.mu = 2 * smin * smin;
  // F - F* = ||A (x - x*)||^2 <= ||F'||^2 / (4 s^2) with s the smallest
  // nonzero singular value, so gradient dominance survives rank deficiency.
  const Scalar tol = sv(0) * Scalar(std::max(a.rows(), a.cols())) *
                     std::numeric_limits<Scalar>::epsilon();
  Scalar s_nz = 0;
  for (Index k = 0; k < sv.size(); ++k)
    if (sv(k) > tol) s_nz = sv(k);
  inst.nu = s_nz > 0 ? 1 / (2 * s_nz * s_nz) : std::numeric_limits<Scalar>::infinity();

  inst.x_star = a.colPivHouseholderQr().solve(b);
  if (!inst.reg.is_zero()) {
    // No closed form with a regularizer: run proximal gradient to stationarity.
    const Scalar eta = Scalar(1) / (2 * sv(0) * sv(0));
    const Matrix<Scalar> hess = 2 * a.transpose() * a;
    const Vector<Scalar> lin = 2 * a.transpose() * b;
    Vector<Scalar> x = inst.x_star;
    for (int k = 0; k < 1000000; ++k) {
      const Vector<Scalar> next = inst.reg.prox(x - eta * (hess * x - lin), eta);
      const Scalar step = (next - x).squaredNorm() / (eta * eta);
      x = next;
      if (step <= Scalar(1e-26)) break;
    }
    inst.x_star = x;
  }
  inst.phi_star = composite_value(inst.problem, inst.reg, inst.x_star);
}

}  // namespace detail

/// Finite-sum quadratic composite with known minimizer and curvature.
///
/// Components are A_i = A + h E_i, b_i = b + h e_i with Gaussian E_i, e_i
/// centered over i, so the mean map is (A, b) up to round-off. The reported
/// mean design and offset are taken from the oracle's own exact mean.
template <typename Scalar>
SyntheticInstance<Scalar> synth_quadratic_composite(const SyntheticSpec<Scalar>& spec,
                                                    std::uint64_t seed) {
  detail::validate_spec(spec);
  Rng rng(derive_seed(seed, stream::kData));
  auto [a, b] = detail::mean_design_and_offset(spec, rng);

  std::vector<Matrix<Scalar>> designs(static_cast<std::size_t>(spec.n));
  std::vector<Vector<Scalar>> offsets(static_cast<std::size_t>(spec.n));
  Matrix<Scalar> mean_e = Matrix<Scalar>::Zero(spec.p, spec.d);
  Vector<Scalar> mean_o = Vector<Scalar>::Zero(spec.p);
  for (Index i = 0; i < spec.n; ++i) {
    designs[i] = detail::gaussian_matrix<Scalar>(spec.p, spec.d, rng);
    offsets[i] = detail::gaussian_matrix<Scalar>(spec.p, 1, rng);
    mean_e += designs[i];
    mean_o += offsets[i];
  }
  mean_e /= Scalar(spec.n);
  mean_o /= Scalar(spec.n);
  for (Index i = 0; i < spec.n; ++i) {
    designs[i] = a + spec.heterogeneity * (designs[i] - mean_e);
    offsets[i] = b + spec.heterogeneity * (offsets[i] - mean_o);
  }

  SyntheticInstance<Scalar> inst;
  inst.reg = spec.l1_weight > 0 ? Regularizer<Scalar>::l1(spec.l1_weight)
                                : Regularizer<Scalar>::zero();
  auto oracle = std::make_shared<AffineFiniteSumOracle<Scalar>>(designs, offsets);
  inst.problem = {oracle, std::make_shared<SquaredNormOuter<Scalar>>(spec.p)};

  Vector<Scalar> y;
  oracle->eval_full(Vector<Scalar>::Zero(spec.d), y, inst.mean_design);
  inst.mean_offset = -y;
  detail::fill_solution(inst);

  Scalar ell_g = 0;
  for (const auto& ai : designs) {
    Eigen::JacobiSVD<Matrix<Scalar>> svd(ai);
    ell_g = std::max(ell_g, svd.singularValues()(0));
  }
  Eigen::JacobiSVD<Matrix<Scalar>> mean_svd(inst.mean_design);
  inst.constants.ell_g = ell_g;
  inst.constants.L_g = 0;
  inst.constants.L_f = 2;
  inst.constants.ell_f =
      2 * (mean_svd.singularValues()(0) * spec.region_radius * std::sqrt(Scalar(spec.d)) +
           inst.mean_offset.norm());
  return inst;
}

/// Expectation-mode counterpart of synth_quadratic_composite with i.i.d.
/// entry noise of the given scale. Variance constants hold on the box of
/// radius spec.region_radius.
template <typename Scalar>
SyntheticInstance<Scalar> synth_noisy_quadratic(const SyntheticSpec<Scalar>& spec,
                                                Scalar noise_scale, NoiseKind kind,
                                                std::uint64_t seed) {
  detail::validate_spec(spec);
  Rng rng(derive_seed(seed, stream::kData));
  auto [a, b] = detail::mean_design_and_offset(spec, rng);

  SyntheticInstance<Scalar> inst;
  inst.reg = spec.l1_weight > 0 ? Regularizer<Scalar>::l1(spec.l1_weight)
                                : Regularizer<Scalar>::zero();
  auto oracle = std::make_shared<NoisyAffineOracle<Scalar>>(a, b, noise_scale, kind);
  inst.problem = {oracle, std::make_shared<SquaredNormOuter<Scalar>>(spec.p)};
  inst.mean_design = a;
  inst.mean_offset = b;
  detail::fill_solution(inst);

  Eigen::JacobiSVD<Matrix<Scalar>> svd(a);
  const Scalar a_norm = svd.singularValues()(0);
  const Scalar var = oracle->entry_variance();
  const Scalar r2 = spec.region_radius * spec.region_radius * Scalar(spec.d);
  auto& c = inst.constants;
  c.ell_g = a_norm + oracle->jacobian_noise_bound();
  c.L_g = 0;
  c.L_f = 2;
  c.ell_f = 2 * (a_norm * std::sqrt(r2) + b.norm());
  c.sigma_gp_sq = var * Scalar(spec.p * spec.d);
  c.sigma_g_sq = var * Scalar(spec.p) * (r2 + 1);
  return inst;
}

}  // namespace civr
