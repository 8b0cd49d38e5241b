#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "civr/schedule.hpp"

namespace civr::harness {

/// Invalid or inconsistent experiment configuration (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One experiment: a problem instance, an algorithm with its schedule, and the
/// repetition plan. Read from a flat `key = value` file; `#` starts a comment.
/// Lists are comma separated; schedule triples are `[tau:B:S, ...]` with B a
/// count or `full`.
struct ExperimentConfig {
  // problem
  std::string problem = "synthetic";  ///< portfolio | mdp | synthetic
  std::string dataset;                ///< returns CSV; empty -> synthetic returns
  std::int64_t data_rows = 1000;
  std::int64_t data_cols = 30;
  std::uint64_t data_seed = 1;
  std::int64_t data_take_last = 0;  ///< 0 keeps every row
  std::string data_scale = "raw";   ///< percent | raw
  double lambda = 0.2;
  std::string sign_mode = "risk-averse";  ///< risk-averse | paper-literal
  std::string reg = "zero";               ///< zero | l1 | l1-ball
  double reg_weight = 0;
  double reg_radius = 1;

  std::int64_t mdp_states = 10;
  std::int64_t mdp_features = 3;
  double mdp_gamma = 0.9;
  std::uint64_t mdp_seed = 1;
  bool mdp_realizable = true;

  std::int64_t synth_d = 5;
  std::int64_t synth_p = 5;
  std::int64_t synth_n = 64;
  double synth_sigma_min = 1;
  double synth_sigma_max = 2;
  double synth_heterogeneity = 0.5;
  double synth_residual = 0;
  std::uint64_t synth_seed = 1;
  double synth_noise = 0;  ///< > 0 switches to the expectation-mode generator
  std::string synth_noise_kind = "uniform";

  double region_radius = 10;  ///< box radius for region-dependent constants
  std::string x0 = "zeros";   ///< zeros | ones | uniform | v1,v2,...

  // algorithm
  std::string algorithm = "civr";  ///< civr | civr-adp | restarted | fullgrad | plugin-sgd
  std::string schedule;            ///< preset name, empty -> algorithm default
  std::int64_t schedule_T = 10;
  double schedule_a = 1;
  double schedule_b = 1;
  double schedule_eps = 0.01;
  std::optional<double> schedule_sigma0_sq;
  std::optional<double> schedule_nu;
  std::optional<double> schedule_mu;
  std::vector<EpochParams> schedule_triples;
  std::optional<double> eta;
  double eta_decay = 0;  ///< plugin-sgd: eta_k = eta / (1 + decay k)
  std::int64_t batch = 1;
  std::int64_t iters = 100;
  std::int64_t periods = 5;

  // repetitions and output
  std::vector<std::uint64_t> seeds{1};
  std::int64_t repetitions = 1;
  std::string output = "out";
  std::int64_t cadence = 0;
  std::int64_t workers = 1;
  bool wallclock = false;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses config text; throws ConfigError on unknown keys, bad values or a
/// failed validation.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

void validate_config(const ExperimentConfig& cfg);

std::string format_triples(const std::vector<EpochParams>& epochs);
std::vector<EpochParams> parse_triples(const std::string& text);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace civr::harness
