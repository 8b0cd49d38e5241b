#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "civr/core.hpp"

namespace civr::harness {

/// Outcome of one property check: `measured` against `bound`, with the
/// comparison direction described in `detail`.
struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0;
  double bound = 0;
  std::string detail;
};

std::string format_result(const CheckResult& r);
void print_results(std::ostream& out, const std::vector<CheckResult>& results);
bool all_passed(const std::vector<CheckResult>& results);

/// Analytic composite gradients and component Jacobians against central
/// finite differences on portfolio (both sign modes), MDP and synthetic
/// problems; passes at relative error <= 1e-6.
std::vector<CheckResult> check_gradients(int probes, std::uint64_t seed);

/// CIVR with full anchors and S_t = n against deterministic proximal gradient:
/// every iterate must match bit for bit.
CheckResult check_fullbatch_degeneracy(Index d, std::int64_t iters);

/// Monte-Carlo replays of the estimator along a frozen path: per-step MSE of
/// y and z against their recursive bounds, the composite-gradient MSE bound
/// (ratios <= 1.1), and the conditional-mean identity of one correction step
/// (max z-score <= 4).
std::vector<CheckResult> check_mse_bounds(std::int64_t replays, std::uint64_t seed);

/// Constant finite-sum schedule at eta_max_nonconvex: seed-averaged mean of
/// ||G||^2 over all slots <= 8 (Phi(x0) - Phi*) / (eta sqrt(n) T) x 1.2.
std::vector<CheckResult> check_constant_finite_rate(const std::vector<SampleCount>& ns,
                                                    std::int64_t epochs, std::int64_t seeds);

/// Gradient-dominant restarts on a rank-deficient quadratic: seed-averaged gap
/// ratio per period <= 0.6.
CheckResult check_gradient_dominant_restart(std::int64_t seeds, std::int64_t periods);

/// Strongly convex restarts: averaged gap after k periods <= 0.6^k gap_0 + eps
/// (expectation) and <= 0.6^k gap_0 (finite sum).
CheckResult check_strongly_convex_restart_expectation(std::int64_t seeds, std::int64_t periods,
                                                      double eps);
CheckResult check_strongly_convex_restart_finite(std::int64_t seeds, std::int64_t periods);

/// Closed-form prox operators: optimality conditions, non-expansiveness and a
/// bisection oracle for the l1-ball projection.
std::vector<CheckResult> check_prox(std::uint64_t seed);

/// Constant-expectation preset with eps = 0.01 and sigma_0^2 = 1: the final
/// trace counter against the budget T (B + 2 tau S), plus the exact count
/// T B + 2 T (tau - 1) S of the tau - 1 corrections per epoch.
std::vector<CheckResult> check_sample_accounting();

/// Portfolio run on a 1000 x 30 synthetic returns matrix, lambda = 0.2,
/// r = 0.01 ||x||_1: civr (S = ceil(sqrt n)) and civr-adp each reduce the
/// mean ||G||^2 by >= 10x within 20n samples and end below plugin SGD at the
/// same budget.
std::vector<CheckResult> check_portfolio_experiment(std::int64_t seeds);

/// Random realizable S = 10 MDPs, tau = S_t = 10 with exact anchors: the
/// seed-averaged F at epoch starts never increases and every seed reaches
/// F <= 1e-3 F(w0) within `epochs` epochs.
std::vector<CheckResult> check_mdp_experiment(std::int64_t seeds, std::int64_t epochs);

/// Runs a named group: gradients | mse-lemmas | rates | prox | all. Throws
/// std::invalid_argument for an unknown selector.
std::vector<CheckResult> verify_suite(const std::string& selector);

}  // namespace civr::harness
