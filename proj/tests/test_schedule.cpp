#include <doctest.h>

#include "helpers.hpp"

using namespace civr;
using namespace civr::test;

namespace {

DerivedConstants<double> with_sigma(double sigma0_sq) {
  DerivedConstants<double> c;
  c.sigma_0_sq = sigma0_sq;
  c.eta_max_nonconvex = 0.1;
  c.eta_max_strongly = 0.05;
  return c;
}

void check_invariant(const Schedule<double>& s) {
  for (const auto& e : s.epochs) CHECK(e.tau <= e.inner_batch);
}

}  // namespace

TEST_CASE("constant expectation preset") {
  auto s = schedule_constant_expectation(0.04, with_sigma(2));
  CHECK(s.num_epochs() == 5);
  CHECK(s.epochs[0] == EpochParams{5, AnchorSize::of(50), 5});
  CHECK(s.eta == 0.1);

  auto degenerate = schedule_constant_expectation(1.0, with_sigma(0));
  CHECK(degenerate.num_epochs() == 1);
  CHECK(degenerate.epochs[0] == EpochParams{1, AnchorSize::of(1), 1});

  auto budget = schedule_constant_expectation(0.01, with_sigma(1));
  CHECK(budget.nominal_budget(0) == 3000);
  CHECK(budget.exact_cost(0) == 2800);
  check_invariant(budget);
}

TEST_CASE("adaptive expectation preset") {
  auto s = schedule_adaptive_expectation(1.0, 0.0, 4, with_sigma(1));
  SampleCount anchors = 0;
  for (const auto& e : s.epochs) anchors += e.anchor.count();
  CHECK(anchors == 30);
  CHECK(s.epochs[2] == EpochParams{3, AnchorSize::of(9), 3});
  auto two = schedule_adaptive_expectation(2.0, 0.0, 1, with_sigma(1));
  CHECK(two.epochs[0].tau == 2);
  CHECK(two.epochs[0].inner_batch == 2);
  auto scaled = schedule_adaptive_expectation(1.0, 0.0, 3, with_sigma(0.5));
  CHECK(scaled.epochs[2].anchor.count() == 5);  // ceil(9 * 0.5)
  CHECK_THROWS_AS(schedule_adaptive_expectation(0.0, 1.0, 3, with_sigma(1)), std::invalid_argument);
}

TEST_CASE("constant finite-sum preset") {
  auto s = schedule_constant_finite(100, 3, with_sigma(0));
  CHECK(s.epochs[0] == EpochParams{10, AnchorSize::full(), 10});
  CHECK(schedule_constant_finite(1, 2, with_sigma(0)).epochs[0] ==
        EpochParams{1, AnchorSize::full(), 1});
  auto ten = schedule_constant_finite(10, 1, with_sigma(0));
  CHECK(ten.epochs[0].tau == 4);
  CHECK(ten.nominal_budget(10) == 42);
}

TEST_CASE("adaptive finite-sum preset switches at T0") {
  CHECK(adaptive_finite_switch_epoch(100, 2, 1) == 5);
  auto s = schedule_adaptive_finite(100, 2.0, 1.0, 8, with_sigma(0));
  CHECK(s.epochs[0] == EpochParams{3, AnchorSize::of(9), 3});
  CHECK(s.epochs[4] == EpochParams{11, AnchorSize::full(), 11});  // (2*5+1)^2 = 121 >= n
  CHECK(s.epochs[5] == EpochParams{10, AnchorSize::full(), 10});
  check_invariant(s);
}

TEST_CASE("sqrt-growth preset") {
  auto s = schedule_sqrt_growth_finite(1000, 200, 0.03);
  CHECK(s.epochs[0] == EpochParams{4, AnchorSize::of(16), 4});
  CHECK(s.epochs.back() == EpochParams{32, AnchorSize::full(), 32});
  check_invariant(s);
}

TEST_CASE("restart period sizing") {
  auto c = with_sigma(1);
  auto gde = restart_gradient_dominant_expectation(0.01, 1.0, c, std::optional<double>(0.1));
  CHECK(gde.num_epochs() == 16);
  CHECK(gde.epochs[0] == EpochParams{10, AnchorSize::of(1200), 10});
  CHECK(restart_gradient_dominant_finite(100, 1.0, c, std::optional<double>(0.1)).num_epochs() ==
        16);
  CHECK(restart_strongly_convex_finite(100, 0.5, c, std::optional<double>(0.1)).num_epochs() ==
        10);
  auto sce = restart_strongly_convex_expectation(0.01, 0.5, c);
  CHECK(sce.eta == doctest::Approx(0.99 * 0.05));
  CHECK(sce.epochs[0].anchor.count() == 900);
}

TEST_CASE("custom schedules enforce tau <= S") {
  CHECK_THROWS_AS(schedule_custom<double>({{5, AnchorSize::of(10), 4}}, 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(schedule_custom<double>({}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(schedule_custom<double>({{1, AnchorSize::of(1), 1}}, 0.0),
                  std::invalid_argument);
  CHECK_NOTHROW(schedule_custom<double>({{4, AnchorSize::full(), 4}}, 0.1));
}

TEST_CASE("eta defaults fail loudly when no bound exists") {
  DerivedConstants<double> none;
  CHECK_THROWS_AS(schedule_constant_finite(10, 1, none), std::invalid_argument);
  CHECK(schedule_constant_finite(10, 1, none, std::optional<double>(0.2)).eta == 0.2);
}
