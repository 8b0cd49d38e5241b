#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "civr/harness/config.hpp"
#include "civr/harness/trace_io.hpp"
#include "civr/solver.hpp"

namespace civr::harness {

/// A run that failed; carries the run seed and, for numerical failures, the
/// (epoch, iter) location (exit code 2).
class RunFailure : public std::runtime_error {
 public:
  RunFailure(const std::string& what, std::uint64_t seed, std::int64_t epoch, std::int64_t iter)
      : std::runtime_error(what), seed_(seed), epoch_(epoch), iter_(iter) {}
  std::uint64_t seed() const { return seed_; }
  std::int64_t epoch() const { return epoch_; }
  std::int64_t iter() const { return iter_; }

 private:
  std::uint64_t seed_;
  std::int64_t epoch_;
  std::int64_t iter_;
};

/// Problem instance resolved from a config.
struct BuiltProblem {
  CompositeProblem<double> problem;
  Regularizer<double> reg;
  SmoothnessConstants<double> constants;
  Vector<double> x0;
  std::optional<double> nu;  ///< known gradient-dominance constant
  std::optional<double> mu;  ///< known optimal strong convexity
};

BuiltProblem build_problem(const ExperimentConfig& cfg);

struct BuiltSchedule {
  Schedule<double> schedule;
  /// sigma_0^2 estimated by the pilot when the config left it unset.
  std::optional<double> sigma0_sq_pilot;
};

/// Resolves the schedule of civr, civr-adp and restarted runs (per period for
/// the latter).
BuiltSchedule build_schedule(const ExperimentConfig& cfg, const BuiltProblem& built);

struct RunSummary {
  std::int64_t index;
  std::uint64_t seed;
  double final_objective;
  double final_grad_map_sq;
  SampleCount samples;
  std::int64_t wallclock_ns;
};

struct ExperimentResult {
  std::vector<RunSummary> runs;
  std::vector<RunTrace<double>> traces;
  std::vector<CurvePoint> curve;
  std::optional<double> sigma0_sq_pilot;
  std::optional<Schedule<double>> schedule;
};

/// Seed of repetition `rep` under master seed `seed`; independent of the
/// total repetition count.
std::uint64_t run_seed(std::uint64_t seed, std::int64_t rep);

/// Runs every (seed, repetition) pair, up to cfg.workers at a time. When
/// `write_files` is set, writes trace_<k>.csv, mean_curve.csv and summary.txt
/// into cfg.output.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files = true);

}  // namespace civr::harness
