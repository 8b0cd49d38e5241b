#include <doctest.h>

#include "helpers.hpp"

using namespace civr;
using namespace civr::test;

namespace {

Vec random_vec(Rng& rng, Index d, double scale) {
  Vec v(d);
  for (Index k = 0; k < d; ++k) v(k) = scale * standard_normal(rng);
  return v;
}

double prox_objective(const Regularizer<double>& r, const Vec& w, const Vec& v, double eta) {
  return r.value(w) + (w - v).squaredNorm() / (2 * eta);
}

}  // namespace

TEST_CASE("prox examples") {
  CHECK(Regularizer<double>::zero().prox(vec({1, -2}), 0.7) == vec({1, -2}));
  const Vec st = Regularizer<double>::l1(0.5).prox(vec({1.2, -0.3, 0}), 1.0);
  CHECK(st(0) == doctest::Approx(0.7));
  CHECK(st(1) == 0);
  CHECK(st(2) == 0);
  const Vec pb = Regularizer<double>::l1_ball(1).prox(vec({0.6, 0.6}), 1.0);
  CHECK(pb(0) == doctest::Approx(0.5));
  CHECK(pb(1) == doctest::Approx(0.5));
}

TEST_CASE("soft threshold maps the tie to zero") {
  const Vec out = soft_threshold(vec({0.5, -0.5, 0.50001}), 0.5);
  CHECK(out(0) == 0);
  CHECK(out(1) == 0);
  CHECK(out(2) > 0);
}

TEST_CASE("l1-ball projection against a brute-force grid") {
  // 2-d: scan the boundary of the ball for the closest point.
  const Vec v = vec({0.9, -0.4});
  const Vec p = project_l1_ball(v, 1.0);
  double best = 1e9;
  Vec arg;
  for (int k = 0; k <= 400000; ++k) {
    const double t = -1 + 2.0 * k / 400000;
    for (double s : {-1.0, 1.0}) {
      const Vec w = vec({t, s * (1 - std::abs(t))});
      const double dist = (w - v).squaredNorm();
      if (dist < best) best = dist, arg = w;
    }
  }
  CHECK((p - arg).norm() < 1e-5);
  CHECK(project_l1_ball(vec({0.1, 0.2}), 1.0) == vec({0.1, 0.2}));
}

TEST_CASE("prox optimality, non-expansiveness and feasibility") {
  Rng rng(17);
  const std::vector<Regularizer<double>> regs{Regularizer<double>::zero(),
                                              Regularizer<double>::l1(0.3),
                                              Regularizer<double>::l1_ball(1.5)};
  for (const auto& r : regs) {
    for (int probe = 0; probe < 20; ++probe) {
      const double eta = 0.05 + uniform01(rng);
      const Vec v = random_vec(rng, 6, 2);
      const Vec u = r.prox(v, eta);
      const double fu = prox_objective(r, u, v, eta);
      for (int k = 0; k < 100; ++k) {
        Vec w = u + random_vec(rng, 6, 0.1);
        if (std::holds_alternative<Regularizer<double>::L1Ball>(r.kind()))
          w = project_l1_ball(w, 1.5);
        CHECK(prox_objective(r, w, v, eta) >= fu - 1e-12);
      }
      const Vec a = random_vec(rng, 6, 2), b = random_vec(rng, 6, 2);
      CHECK((r.prox(a, eta) - r.prox(b, eta)).norm() <= (a - b).norm() + 1e-15);
    }
  }
  for (int probe = 0; probe < 50; ++probe) {
    const Vec v = random_vec(rng, 8, 1);
    const Vec p = project_l1_ball(v, 1.0);
    CHECK(p.lpNorm<1>() <= 1.0 + 1e-12);
    if (v.lpNorm<1>() > 1.0) CHECK(std::abs(p.lpNorm<1>() - 1.0) <= 1e-12);
  }
}

TEST_CASE("approximate gradient mapping") {
  CHECK(approx_gradient_mapping(vec({1, 2}), vec({1, 2}), 0.3).norm() == 0);
  const Vec g = approx_gradient_mapping(vec({1, 1}), vec({0.9, 1.1}), 0.1);
  CHECK(g(0) == doctest::Approx(1));
  CHECK(g(1) == doctest::Approx(-1));
}

TEST_CASE("mapping closeness bound") {
  auto inst = synth_quadratic_composite(make_spec<double>(5, 5, 8), 3);
  const auto reg = Regularizer<double>::l1(0.2);
  Rng rng(23);
  for (int probe = 0; probe < 50; ++probe) {
    const Vec x = random_vec(rng, 5, 1);
    const double eta = 0.05;
    const Vec grad = composite_gradient(inst.problem, x);
    const Vec v = grad + random_vec(rng, 5, 0.5);
    const double exact = gradient_mapping(inst.problem, reg, x, eta).sq_norm;
    const double approx = ((x - reg.prox(Vec(x - eta * v), eta)) / eta).squaredNorm();
    CHECK(exact <= 2 * approx + 2 * (v - grad).squaredNorm() + 1e-12);
  }
}

TEST_CASE("float instantiation") {
  const Vector<float> v = Regularizer<float>::l1(0.5f).prox(Vector<float>::Constant(3, 1.0f), 1.0f);
  CHECK(v(0) == doctest::Approx(0.5f));
  CHECK(project_l1_ball<float>(Vector<float>::Constant(4, 1.0f), 2.0f).sum() ==
        doctest::Approx(2.0f));
}
