#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"

using namespace civr;
using namespace civr::test;

TEST_CASE("splitmix64 matches the reference sequence") {
  // Reference outputs of the public-domain splitmix64 generator seeded with 0.
  SplitMix64 g(0);
  CHECK(g() == 0xE220A8397B1DCDAFULL);
  CHECK(g() == 0x6E789E6AA1B965F4ULL);
  CHECK(g() == 0x06C45D188009454FULL);
}

TEST_CASE("derive_seed separates streams and keys") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s : {stream::kAnchor, stream::kAdvance, stream::kSelect, stream::kData})
    for (std::uint64_t t = 0; t < 50; ++t) seen.insert(derive_seed(7, s, t));
  CHECK(seen.size() == 200);
  CHECK(derive_seed(7, 1, 2) != derive_seed(7, 2, 1));
  CHECK(derive_seed(7, 1, 2) == derive_seed(7, 1, 2));
  static_assert(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("uniform_index is in range and roughly uniform") {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  for (int k = 0; k < 70000; ++k) ++counts[uniform_index(rng, 7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("standard_normal has unit moments") {
  Rng rng(11);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double z = standard_normal(rng);
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1) < 0.02);
}

TEST_CASE("derived constants: unit inputs") {
  SmoothnessConstants<double> c{1, 1, 1, 1, 0, 0};
  const auto d = derive_constants(c);
  CHECK(d.L_F == doctest::Approx(2));
  CHECK(d.G_0 == doctest::Approx(4));
  CHECK(d.eta_max_nonconvex == doctest::Approx(4 / (2 + std::sqrt(52.0))));
  CHECK(d.eta_max_nonconvex == doctest::Approx(0.43426).epsilon(1e-4));
  CHECK(d.eta_max_strongly == doctest::Approx(2 / (2 + std::sqrt(4 + 144.0))));
}

TEST_CASE("derived constants: zeros and mixed inputs") {
  const auto z = derive_constants(SmoothnessConstants<double>{});
  CHECK(z.L_F == 0);
  CHECK(z.G_0 == 0);
  CHECK(z.sigma_0_sq == 0);
  CHECK(std::isinf(z.eta_max_nonconvex));

  SmoothnessConstants<double> c;
  c.ell_g = 2;
  c.L_f = 1;
  c.ell_f = 1;
  c.L_g = 3;
  const auto d = derive_constants(c);
  CHECK(d.L_F == 7);
  CHECK(d.G_0 == 50);
  CHECK_THROWS_AS(derive_constants(SmoothnessConstants<double>{-1, 0, 0, 0, 0, 0}),
                  std::invalid_argument);
}

TEST_CASE("derived constants: variance term against a hand computation") {
  SmoothnessConstants<double> c{1.5, 0.5, 2, 0.25, 0.3, 0.7};
  const auto d = derive_constants(c);
  // sigma_0^2 = 2 (ell_g^2 L_f^2 sigma_g^2 + ell_f^2 sigma_g'^2)
  CHECK(d.sigma_0_sq == doctest::Approx(2 * (4 * 0.25 * 0.3 + 2.25 * 0.7)));
}

TEST_CASE("derived constants are monotone in each Lipschitz input") {
  Rng rng(5);
  for (int probe = 0; probe < 200; ++probe) {
    SmoothnessConstants<double> c{uniform01(rng) * 3, uniform01(rng) * 3, uniform01(rng) * 3,
                                  uniform01(rng) * 3, 0, 0};
    const auto base = derive_constants(c);
    for (int field = 0; field < 4; ++field) {
      auto up = c;
      double* f[] = {&up.ell_f, &up.L_f, &up.ell_g, &up.L_g};
      *f[field] += 0.5;
      const auto d = derive_constants(up);
      CHECK(d.L_F >= base.L_F);
      CHECK(d.G_0 >= base.G_0);
      CHECK(d.eta_max_nonconvex <= base.eta_max_nonconvex);
    }
  }
}

TEST_CASE("composite value and gradient of x^2 squared") {
  const auto p = square_problem({1.0});
  const auto zero = Regularizer<double>::zero();
  CHECK(composite_value(p, zero, vec({2})) == 16);
  CHECK(composite_gradient(p, vec({1}))(0) == 4);
  CHECK(composite_value(p, Regularizer<double>::l1(1), vec({0})) == 0);
}

TEST_CASE("linear inner map is stationary at the least-squares solution") {
  Mat a(3, 2);
  a << 1, 2, 3, 4, 5, 7;
  const Vec b = vec({1, -1, 2});
  const Vec x_star = a.colPivHouseholderQr().solve(b);
  CompositeProblem<double> p{std::make_shared<AffineFiniteSumOracle<double>>(
                                 std::vector<Mat>{a}, std::vector<Vec>{b}),
                             std::make_shared<SquaredNormOuter<double>>(3)};
  CHECK(composite_gradient(p, x_star).norm() < 1e-12);
  CHECK(composite_gradient(p, Vec(Vec::Zero(2))).norm() > 1);
}

TEST_CASE("eval_full equals the mean of components") {
  auto inst = synth_quadratic_composite(make_spec<double>(4, 3, 13), 9);
  const auto& o = *inst.problem.oracle;
  Rng rng(1);
  for (int probe = 0; probe < 10; ++probe) {
    Vec x(4);
    for (Index k = 0; k < 4; ++k) x(k) = standard_normal(rng);
    Vec v, sv = Vec::Zero(3);
    Mat j, sj = Mat::Zero(3, 4);
    for (Index i = 0; i < 13; ++i) {
      o.eval_component(static_cast<Draw>(i), x, v, j);
      sv += v;
      sj += j;
    }
    sv /= 13;
    sj /= 13;
    o.eval_full(x, v, j);
    CHECK((v - sv).norm() <= 1e-12 * std::max(1.0, sv.norm()));
    CHECK((j - sj).norm() <= 1e-12 * std::max(1.0, sj.norm()));
  }
}

TEST_CASE("plug-in estimate degenerates to the exact gradient") {
  auto inst = synth_quadratic_composite(make_spec<double>(3, 3, 6), 2);
  const Vec x = vec({0.3, -1, 2});
  std::vector<Draw> all{0, 1, 2, 3, 4, 5};
  const Vec exact = composite_gradient(inst.problem, x);
  CHECK(plugin_gradient_estimate<double>(*inst.problem.oracle, *inst.problem.outer, x, all) ==
        exact);
  const auto single = square_problem({2.5});
  std::vector<Draw> one{0};
  CHECK(plugin_gradient_estimate<double>(*single.oracle, *single.outer, vec({1.5}), one) ==
        composite_gradient(single, vec({1.5})));
}

TEST_CASE("monte_carlo_value: deterministic oracle, determinism and convergence") {
  Mat a(2, 2);
  a << 1, 0.5, 0, 2;
  const Vec b = vec({0.5, 1});
  auto det = std::make_shared<DeterministicAffineOracle>(a, b);
  SquaredNormOuter<double> outer(2);
  const auto zero = Regularizer<double>::zero();
  const Vec x = vec({1, -1});
  Rng r1(4);
  CHECK(monte_carlo_value<double>(*det, outer, zero, x, 3, r1) ==
        doctest::Approx(composite_value<double>(*det, outer, zero, x)));

  auto spec = make_spec<double>(2, 2);
  spec.design = a;
  spec.offset = b;
  auto noisy = synth_noisy_quadratic(spec, 0.5, NoiseKind::Gaussian, 3);
  const auto& o = *noisy.problem.oracle;
  const double exact = composite_value(noisy.problem, zero, x);
  Rng ra(8), rb(8);
  CHECK(monte_carlo_value<double>(o, outer, zero, x, 500, ra) ==
        monte_carlo_value<double>(o, outer, zero, x, 500, rb));
  // RMS error over repeats shrinks roughly as 1/sqrt(draws) (plus an O(1/draws) bias).
  auto rms = [&](std::int64_t draws) {
    double s = 0;
    for (int rep = 0; rep < 40; ++rep) {
      Rng rng(derive_seed(100, draws, rep));
      const double e = monte_carlo_value<double>(o, outer, zero, x, draws, rng) - exact;
      s += e * e;
    }
    return std::sqrt(s / 40);
  };
  const double small = rms(100), large = rms(10000);
  CHECK(large < small / 5);
  CHECK(large < 0.1);
}

TEST_CASE("gradient mapping reduces to the gradient without a regularizer") {
  auto inst = synth_quadratic_composite(make_spec<double>(3, 4, 5), 4);
  const Vec x = vec({1, 2, -1});
  for (double eta : {0.01, 0.5, 3.0}) {
    const auto g = gradient_mapping(inst.problem, Regularizer<double>::zero(), x, eta);
    CHECK((g.map - composite_gradient(inst.problem, x)).norm() <=
          1e-12 * composite_gradient(inst.problem, x).norm());
  }
  CHECK(gradient_mapping(inst.problem, inst.reg, inst.x_star, 0.1).sq_norm <= 1e-20);
}

TEST_CASE("gradient mapping vanishes at an l1-regularized 1-d solution") {
  // min (2x - 3)^2 + 0.5 |x|: 8x - 12 + 0.5 = 0 -> x = 11.5 / 8
  CompositeProblem<double> p{std::make_shared<AffineFiniteSumOracle<double>>(
                                 std::vector<Mat>{Mat::Constant(1, 1, 2)},
                                 std::vector<Vec>{vec({3})}),
                             std::make_shared<SquaredNormOuter<double>>(1)};
  const auto g = gradient_mapping(p, Regularizer<double>::l1(0.5), vec({11.5 / 8}), 0.1);
  CHECK(g.sq_norm <= 1e-20);
}
