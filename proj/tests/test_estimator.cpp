#include <doctest.h>

#include "helpers.hpp"

using namespace civr;
using namespace civr::test;

namespace {

SyntheticInstance<double> small_instance() {
  return synth_quadratic_composite(make_spec<double>(3, 2, 9), 12);
}

}  // namespace

TEST_CASE("full anchor is exact and costs n") {
  const auto inst = small_instance();
  const auto& o = *inst.problem.oracle;
  Rng rng(1);
  const Vec x = vec({0.5, -0.2, 1});
  const auto s = anchor(o, x, AnchorSize::full(), rng);
  Vec v;
  Mat j;
  o.eval_full(x, v, j);
  CHECK(s.y == v);
  CHECK(s.z == j);
  CHECK(s.exact);
  CHECK(s.samples == 9);
  const auto big = anchor(o, x, AnchorSize::of(50), rng);
  CHECK(big.exact);
  CHECK(big.samples == 9);
}

TEST_CASE("sampled anchor costs B draws") {
  const auto inst = small_instance();
  Rng rng(2);
  const auto s = anchor(*inst.problem.oracle, vec({1, 1, 1}), AnchorSize::of(4), rng);
  CHECK_FALSE(s.exact);
  CHECK(s.samples == 4);
  CHECK_THROWS_AS(AnchorSize::of(0), std::invalid_argument);
}

TEST_CASE("full anchor is refused in expectation mode without an exact mean") {
  auto noisy = synth_noisy_quadratic(make_spec<double>(2, 2), 0.1,
                                     NoiseKind::Uniform, 1);
  Rng rng(3);
  CHECK_THROWS_AS(anchor(*noisy.problem.oracle, Vec(Vec::Zero(2)), AnchorSize::full(), rng),
                  std::domain_error);
}

TEST_CASE("deterministic components give exact anchors for any B") {
  Mat a(2, 2);
  a << 1, 2, 0, 1;
  DeterministicAffineOracle o(a, vec({1, 0}));
  Rng rng(4);
  const auto s = anchor<double>(o, vec({1, 1}), AnchorSize::of(3), rng);
  CHECK(s.y == vec({2, 1}));
  CHECK(s.z == a);
}

TEST_CASE("advance with x_new = x_prev leaves the state unchanged") {
  const auto inst = small_instance();
  Rng rng(5);
  const Vec x = vec({0.1, 0.2, 0.3});
  auto s = anchor(*inst.problem.oracle, x, AnchorSize::of(3), rng);
  const auto before = s;
  const auto cost = advance(s, *inst.problem.oracle, x, 4, rng);
  CHECK(cost == 8);
  CHECK(s.y == before.y);
  CHECK(s.z == before.z);
  CHECK(s.samples == before.samples + 8);
}

TEST_CASE("single component telescopes exactly") {
  const auto p = square_problem({1.5});
  Rng rng(6);
  auto s = anchor(*p.oracle, vec({1}), AnchorSize::of(1), rng);
  advance(s, *p.oracle, vec({2}), 1, rng);
  CHECK(s.y(0) == doctest::Approx(6));
  CHECK(s.z(0, 0) == doctest::Approx(6));
}

TEST_CASE("full-set advances keep (y, z) exact along a path") {
  const auto inst = small_instance();
  const auto& o = *inst.problem.oracle;
  Rng rng(7);
  auto s = anchor(o, vec({0, 0, 0}), AnchorSize::full(), rng);
  for (int k = 1; k <= 10; ++k) {
    const Vec x = vec({0.1 * k, -0.05 * k, 0.2});
    const auto cost = advance(s, o, x, 9, rng);
    CHECK(cost == 9);
    Vec v;
    Mat j;
    o.eval_full(x, v, j);
    CHECK((s.y - v).norm() <= 1e-12 * v.norm());
    CHECK((s.z - j).norm() <= 1e-12 * j.norm());
  }
}

TEST_CASE("full-set advance from an inexact state costs 2n and stays a difference") {
  const auto inst = small_instance();
  const auto& o = *inst.problem.oracle;
  Rng rng(8);
  auto s = anchor(o, vec({0, 0, 0}), AnchorSize::of(3), rng);
  const Vec y0 = s.y;
  Vec v0, v1;
  Mat j0, j1;
  o.eval_full(vec({0, 0, 0}), v0, j0);
  o.eval_full(vec({1, 0, 0}), v1, j1);
  CHECK(advance(s, o, vec({1, 0, 0}), 20, rng) == 18);
  CHECK((s.y - (y0 + v1 - v0)).norm() < 1e-12);
  CHECK_FALSE(s.exact);
}

TEST_CASE("composite estimate") {
  EstimatorState<double> s;
  s.y = vec({2});
  s.z = Mat::Constant(1, 1, 3);
  CHECK(composite_estimate(s, SquaredNormOuter<double>(1))(0) == 12);

  // Identity outer map returns z as a gradient.
  EstimatorState<double> t;
  t.y = vec({5});
  t.z = Mat(1, 3);
  t.z << 1, 2, 3;
  CHECK(composite_estimate(t, ScalarIdentityOuter<double>()) == vec({1, 2, 3}));

  const auto inst = small_instance();
  Rng rng(9);
  const Vec x = vec({0.3, 0.3, -0.7});
  const auto exact = anchor(*inst.problem.oracle, x, AnchorSize::full(), rng);
  CHECK((composite_estimate(exact, *inst.problem.outer) -
         composite_gradient(inst.problem, x))
            .norm() < 1e-12);
}

TEST_CASE("correction is unbiased for the mean difference") {
  const auto inst = small_instance();
  const auto& o = *inst.problem.oracle;
  const Vec x0 = vec({0.2, 0.1, 0}), x1 = vec({0.5, -0.3, 0.4});
  Vec v0, v1;
  Mat j0, j1;
  o.eval_full(x0, v0, j0);
  o.eval_full(x1, v1, j1);
  Vec acc = Vec::Zero(2);
  const int reps = 20000;
  for (int r = 0; r < reps; ++r) {
    EstimatorState<double> s;
    s.x_prev = x0;
    s.y = Vec::Zero(2);
    s.z = Mat::Zero(2, 3);
    Rng rng(derive_seed(99, r));
    advance(s, o, x1, 2, rng);
    acc += s.y;
  }
  acc /= reps;
  CHECK((acc - (v1 - v0)).norm() < 0.05 * (v1 - v0).norm());
}
