#pragma once

#include <cmath>
#include <limits>

#include "civr/core.hpp"

namespace civr {

/// Lipschitz and variance constants of a problem instance. The variance
/// fields only matter in expectation mode.
template <typename Scalar>
struct SmoothnessConstants {
  Scalar ell_f = 0;  ///< Lipschitz constant of f
  Scalar L_f = 0;    ///< Lipschitz constant of f'
  Scalar ell_g = 0;  ///< Lipschitz constant of each g_xi
  Scalar L_g = 0;    ///< Lipschitz constant of each g'_xi
  Scalar sigma_g_sq = 0;
  Scalar sigma_gp_sq = 0;
};

template <typename Scalar>
struct DerivedConstants {
  Scalar L_F = 0;
  Scalar G_0 = 0;
  Scalar sigma_0_sq = 0;
  /// Step bound for the nonconvex and gradient-dominant rates.
  Scalar eta_max_nonconvex = std::numeric_limits<Scalar>::infinity();
  /// Step bound (strict) for the optimally strongly convex restarts.
  Scalar eta_max_strongly = std::numeric_limits<Scalar>::infinity();
};

template <typename Scalar>
DerivedConstants<Scalar> derive_constants(const SmoothnessConstants<Scalar>& c) {
  require(c.ell_f >= 0 && c.L_f >= 0 && c.ell_g >= 0 && c.L_g >= 0 && c.sigma_g_sq >= 0 &&
              c.sigma_gp_sq >= 0,
          "smoothness constants must be nonnegative");
  DerivedConstants<Scalar> d;
  const Scalar lg2 = c.ell_g * c.ell_g;
  d.L_F = lg2 * c.L_f + c.ell_f * c.L_g;
  d.G_0 = 2 * (lg2 * lg2 * c.L_f * c.L_f + c.ell_f * c.ell_f * c.L_g * c.L_g);
  d.sigma_0_sq =
      2 * (lg2 * c.L_f * c.L_f * c.sigma_g_sq + c.ell_f * c.ell_f * c.sigma_gp_sq);
  const Scalar nonconvex_den = d.L_F + std::sqrt(d.L_F * d.L_F + 12 * d.G_0);
  const Scalar strongly_den = d.L_F + std::sqrt(d.L_F * d.L_F + 36 * d.G_0);
  if (nonconvex_den > 0) d.eta_max_nonconvex = 4 / nonconvex_den;
  if (strongly_den > 0) d.eta_max_strongly = 2 / strongly_den;
  return d;
}

}  // namespace civr
