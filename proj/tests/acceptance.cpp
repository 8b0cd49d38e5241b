// Acceptance criteria AC1..AC10: one PASS/FAIL line per criterion, with the
// underlying measurements indented below it. `--only k` runs a single one.

#include <CLI11.hpp>

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "civr/harness/verify.hpp"

namespace {

using namespace civr::harness;

constexpr std::uint64_t kSeed = 20190521;

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;
  std::function<std::vector<CheckResult>()> run;
};

std::vector<CheckResult> pick(std::vector<CheckResult> all, std::vector<std::size_t> idx) {
  std::vector<CheckResult> out;
  for (auto k : idx) out.push_back(all.at(k));
  return out;
}

std::vector<Criterion> criteria() {
  return {
      {1, "gradient correctness vs finite differences", 5,
       [] { return check_gradients(20, kSeed); }},
      {2, "full-batch degeneracy, 100 iterations, d = 64", 1,
       [] { return std::vector{check_fullbatch_degeneracy(64, 100)}; }},
      {3, "inner MSE recursion over 1e4 replays", 60,
       [] { return pick(check_mse_bounds(10000, kSeed), {0, 1}); }},
      {4, "composite MSE bound and conditional-mean identity", 60,
       [] { return pick(check_mse_bounds(10000, kSeed), {2, 3}); }},
      {5, "constant finite-sum rate, n in {16, 64, 256}, T = 20, 50 seeds", 120,
       [] { return check_constant_finite_rate({16, 64, 256}, 20, 50); }},
      {6, "gradient-dominant restart halving, 200 seeds, 5 periods", 120,
       [] { return std::vector{check_gradient_dominant_restart(200, 5)}; }},
      {7, "strongly convex restarts (expectation and finite sum)", 120,
       [] {
         return std::vector{check_strongly_convex_restart_expectation(100, 5, 1e-3),
                            check_strongly_convex_restart_finite(100, 5)};
       }},
      {8, "sample accounting of the eps = 0.01 expectation preset", 5,
       [] { return pick(check_sample_accounting(), {0}); }},
      {9, "portfolio experiment, 1000 x 30, 20 seeds", 120,
       [] { return check_portfolio_experiment(20); }},
      {10, "MDP experiment, S = 10, 20 seeds, 200 epochs", 60,
       [] { return check_mdp_experiment(20, 200); }},
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  bool all_ok = true;
  for (const auto& c : criteria()) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    std::vector<CheckResult> results;
    std::string error;
    try {
      results = c.run();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.time_limit_s;
    const bool ok = error.empty() && all_passed(results) && in_time;
    all_ok = all_ok && ok;
    std::cout << "AC" << c.id << (ok ? " PASS  " : " FAIL  ") << c.title << "  ("
              << std::fixed << std::setprecision(2) << secs << " s, limit " << c.time_limit_s
              << " s" << (in_time ? "" : ", over time") << ")\n"
              << std::defaultfloat;
    for (const auto& r : results) std::cout << "    " << format_result(r) << "\n";
    if (!error.empty()) std::cout << "    error: " << error << "\n";
  }
  return all_ok ? 0 : 1;
}
