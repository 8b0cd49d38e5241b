#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"

using namespace civr;
using namespace civr::test;

TEST_CASE("portfolio component examples") {
  PortfolioProblem<double> p;
  p.returns = Mat(1, 2);
  p.returns << 1, 2;
  auto [v, j] = portfolio_component(p, 0, vec({1, 0}));
  CHECK(v == vec({1, 1}));
  CHECK(j.row(0) == vec({1, 2}).transpose());
  CHECK(j.row(1) == vec({2, 4}).transpose());
  auto [v0, j0] = portfolio_component(p, 0, vec({0, 0}));
  CHECK(v0 == vec({0, 0}));
  CHECK(j0.row(1).norm() == 0);
  CHECK_THROWS_AS(portfolio_component(p, 1, vec({0, 0})), std::out_of_range);
}

TEST_CASE("portfolio outer map in both sign modes") {
  PortfolioProblem<double> p;
  p.lambda = 0.2;
  p.sign_mode = SignMode::PaperLiteral;
  CHECK(portfolio_outer(p, 1.0, 1.0).first == doctest::Approx(-1.0));
  CHECK(portfolio_outer(p, 1.0, 2.0).first == doctest::Approx(-1.2));
  p.sign_mode = SignMode::RiskAverse;
  CHECK(portfolio_outer(p, 1.0, 1.0).first == doctest::Approx(-1.0));
  CHECK(portfolio_outer(p, 1.0, 2.0).first == doctest::Approx(-0.8));
}

TEST_CASE("portfolio objective at zero and the direct formula") {
  PortfolioProblem<double> p;
  p.returns = synthetic_returns<double>(4, 3, 1);
  const auto prob = make_portfolio(p);
  CHECK(composite_value(prob, Regularizer<double>::l1(0.01), Vec(Vec::Zero(3))) == 0);

  PortfolioProblem<double> q;
  q.returns = synthetic_returns<double>(50, 6, 2);
  const auto qp = make_portfolio(q);
  Rng rng(3);
  for (int probe = 0; probe < 20; ++probe) {
    Vec x(6);
    for (Index k = 0; k < 6; ++k) x(k) = standard_normal(rng);
    const double direct = portfolio_objective_direct(q, x);
    const Vector<double> h = q.returns * x;
    const double m = h.mean();
    const double formula = -m + 0.2 * ((h.array() * h.array()).mean() - m * m);
    CHECK(direct == doctest::Approx(formula).epsilon(1e-12));
    CHECK(composite_value(qp, Regularizer<double>::zero(), x) ==
          doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("portfolio gradient against finite differences on two assets") {
  PortfolioProblem<double> p;
  p.returns = Mat::Identity(2, 2);
  const auto prob = make_portfolio(p);
  const auto zero = Regularizer<double>::zero();
  for (const Vec& x : {vec({0, 0}), vec({0.3, -0.7})}) {
    const Vec g = composite_gradient(prob, x);
    for (Index k = 0; k < 2; ++k) {
      Vec e = Vec::Zero(2);
      e(k) = 1e-5;
      const double fd =
          (composite_value(prob, zero, Vec(x + e)) - composite_value(prob, zero, Vec(x - e))) /
          2e-5;
      CHECK(std::abs(fd - g(k)) <= 1e-8);
    }
  }
}

TEST_CASE("mdp component examples") {
  MdpPolicyEvalProblem<double> m;
  m.P = Mat::Constant(2, 2, 0.5);
  m.Rw = Mat(2, 2);
  m.Rw << 1, 2, 3, 4;
  m.Psi = Mat(2, 1);
  m.Psi << 1, 2;
  m.gamma = 0;
  auto [v, j] = mdp_component<double>(m, std::vector<Index>{1, 0}, vec({3}));
  CHECK(v == vec({3, 6, 2, 3}));
  CHECK(j.bottomRows(2).norm() == 0);
  m.gamma = 0.9;
  auto [v0, j0] = mdp_component<double>(m, std::vector<Index>{0, 1}, vec({0}));
  CHECK(v0 == vec({0, 0, 1, 4}));

  auto [f, g] = mdp_outer(vec({3, 1}));
  CHECK(f == 4);
  CHECK(g == vec({4, -4}));
  auto [f0, g0] = mdp_outer(vec({1, 2, 1, 2}));
  CHECK(f0 == 0);
  CHECK(g0.norm() == 0);
}

TEST_CASE("mdp draws are unbiased by enumeration") {
  const auto inst = generate_mdp<double>(3, 2, 0.8, 5, false);
  const auto& m = inst.problem;
  const Vec w = vec({0.4, -1.1});
  Vec mean_v = Vec::Zero(6);
  Mat mean_j = Mat::Zero(6, 2);
  for (Index a = 0; a < 3; ++a)
    for (Index b = 0; b < 3; ++b)
      for (Index c = 0; c < 3; ++c) {
        const double prob = m.P(0, a) * m.P(1, b) * m.P(2, c);
        auto [v, j] = mdp_component<double>(m, std::vector<Index>{a, b, c}, w);
        mean_v += prob * v;
        mean_j += prob * j;
      }
  auto [ev, ej] = mdp_exact_inner(m, w);
  Vec q(3);
  for (Index i = 0; i < 3; ++i) {
    q(i) = 0;
    for (Index jn = 0; jn < 3; ++jn)
      q(i) += m.P(i, jn) * (m.Rw(i, jn) + m.gamma * m.Psi.row(jn).dot(w));
  }
  CHECK((ev.tail(3) - q).norm() < 1e-14);
  CHECK((mean_v - ev).norm() < 1e-14);
  CHECK((mean_j - ej).norm() < 1e-14);
}

TEST_CASE("mdp sampler follows the transition rows") {
  const auto inst = generate_mdp<double>(4, 2, 0.9, 8, true);
  const MdpOracle<double> o(std::make_shared<const MdpPolicyEvalProblem<double>>(inst.problem));
  Mat freq = Mat::Zero(4, 4);
  const int reps = 40000;
  for (int r = 0; r < reps; ++r) {
    const auto next = o.next_states(derive_seed(1, r));
    for (Index i = 0; i < 4; ++i) freq(i, next[static_cast<std::size_t>(i)]) += 1.0 / reps;
  }
  CHECK((freq - inst.problem.P).cwiseAbs().maxCoeff() < 0.015);
}

TEST_CASE("realizable mdp has zero residual at the generating weights") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_mdp<double>(10, 3, 0.9, seed, true);
    REQUIRE(inst.w_true.has_value());
    CHECK(mdp_objective(inst.problem, *inst.w_true) <= 1e-18);
    CHECK(composite_value(make_mdp(inst.problem), Regularizer<double>::zero(), *inst.w_true) <=
          1e-18);
  }
}

TEST_CASE("synthetic: identity design with zero offset") {
  auto spec = make_spec<double>(3, 3, 5);
  spec.design = Mat::Identity(3, 3);
  spec.offset = Vec::Zero(3);
  const auto inst = synth_quadratic_composite(spec, 1);
  CHECK(inst.x_star.norm() < 1e-14);
  CHECK(std::abs(inst.phi_star) < 1e-14);
}

TEST_CASE("synthetic: diagonal design against a linear solve") {
  auto spec = make_spec<double>(2, 2, 7);
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = 1;
  a(1, 1) = 2;
  spec.design = a;
  spec.offset = vec({1, 1});
  const auto inst = synth_quadratic_composite(spec, 3);
  const Vec x = inst.mean_design.fullPivLu().solve(inst.mean_offset);
  CHECK((inst.x_star - x).norm() < 1e-12);
  CHECK((inst.x_star - vec({1, 0.5})).norm() < 1e-12);
  CHECK(composite_gradient(inst.problem, inst.x_star).norm() < 1e-12);
}

TEST_CASE("synthetic: mu and nu against an eigen oracle") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto spec = make_spec<double>(5, 7, 12);
    spec.sigma_min = 0.5;
    spec.sigma_max = 3;
    const auto inst = synth_quadratic_composite(spec, seed);
    const Eigen::SelfAdjointEigenSolver<Mat> eig(inst.mean_design.transpose() *
                                                 inst.mean_design);
    const double lmin = eig.eigenvalues()(0);
    CHECK(inst.mu == doctest::Approx(2 * lmin).epsilon(1e-9));
    CHECK(inst.nu == doctest::Approx(1 / (2 * lmin)).epsilon(1e-9));
    // gradient dominance: F - F* <= nu ||F'||^2 on random probes
    Rng rng(seed);
    for (int probe = 0; probe < 20; ++probe) {
      Vec x(5);
      for (Index k = 0; k < 5; ++k) x(k) = standard_normal(rng);
      CHECK(inst.gap(x) <= inst.nu * composite_gradient(inst.problem, x).squaredNorm() + 1e-12);
    }
  }
}

TEST_CASE("synthetic: invalid spectrum controls are rejected") {
  SyntheticSpec<double> spec;
  spec.sigma_min = 3;
  spec.sigma_max = 1;
  CHECK_THROWS_AS(synth_quadratic_composite(spec, 1), std::invalid_argument);
}

TEST_CASE("synthetic returns are reproducible from the seed") {
  CHECK(synthetic_returns<double>(20, 4, 9) == synthetic_returns<double>(20, 4, 9));
  CHECK(synthetic_returns<double>(20, 4, 9) != synthetic_returns<double>(20, 4, 10));
}
