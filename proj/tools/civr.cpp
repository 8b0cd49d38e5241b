// civr command-line driver: run experiments, verify properties, ingest
// returns files and print resolved schedules.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "civr/harness/config.hpp"
#include "civr/harness/dataset.hpp"
#include "civr/harness/experiment.hpp"
#include "civr/harness/verify.hpp"

namespace {

using namespace civr::harness;

enum Exit : int { kOk = 0, kConfig = 1, kRun = 2, kVerify = 3 };

int cmd_run(const std::string& path) {
  const auto cfg = load_config(path);
  std::filesystem::create_directories(cfg.output);
  const auto result = run_experiment(cfg);
  for (const auto& r : result.runs)
    std::cout << "run " << r.index << " seed=" << r.seed
              << " objective=" << format_double(r.final_objective)
              << " grad_map_sq=" << format_double(r.final_grad_map_sq) << " samples=" << r.samples
              << "\n";
  if (result.sigma0_sq_pilot)
    std::cout << "sigma0_sq (pilot) = " << format_double(*result.sigma0_sq_pilot) << "\n";
  std::cout << "wrote " << result.runs.size() << " traces to " << cfg.output << "\n";
  return kOk;
}

int cmd_verify(const std::string& selector) {
  const auto results = verify_suite(selector);
  print_results(std::cout, results);
  return all_passed(results) ? kOk : kVerify;
}

int cmd_ingest(const std::string& in, std::optional<std::int64_t> take_last,
               const std::string& scale, const std::string& out) {
  const auto data = ingest_returns_csv(in, take_last,
                                       scale == "percent" ? ReturnScale::Percent : ReturnScale::Raw);
  write_returns_csv(out, data);
  std::cout << data.returns.rows() << " rows x " << data.returns.cols() << " columns -> " << out
            << "\n";
  return kOk;
}

int cmd_schedule(const std::string& preset, const std::vector<std::string>& params) {
  std::ostringstream text;
  bool has_algorithm = false;
  for (const auto& p : params) {
    if (p.find('=') == std::string::npos) throw ConfigError("expected key=value, got '" + p + "'");
    if (p.rfind("algorithm", 0) == 0) has_algorithm = true;
    text << p << "\n";
  }
  text << "schedule = " << preset << "\n";
  if (!has_algorithm && preset.rfind("restart-", 0) == 0) text << "algorithm = restarted\n";
  const auto cfg = parse_config(text.str());
  const auto built = build_problem(cfg);
  const auto sched = build_schedule(cfg, built);
  std::cout << "epochs = " << sched.schedule.num_epochs() << "\n";
  std::cout << "eta = " << format_double(sched.schedule.eta) << "\n";
  if (sched.sigma0_sq_pilot)
    std::cout << "sigma0_sq (pilot) = " << format_double(*sched.sigma0_sq_pilot) << "\n";
  std::cout << "schedule.triples = " << format_triples(sched.schedule.epochs) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Composite incremental variance-reduced solver"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "key = value config file")->required();

  std::string selector;
  auto* verify = app.add_subcommand("verify", "Run property checks");
  verify->add_option("selector", selector, "gradients | mse-lemmas | rates | prox | all")
      ->required();

  std::string csv_in, csv_out, scale = "raw";
  std::optional<std::int64_t> take_last;
  auto* ingest = app.add_subcommand("ingest", "Normalize a returns CSV");
  ingest->add_option("csv", csv_in, "input file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--take-last", take_last, "keep the last N rows")->check(CLI::PositiveNumber);
  ingest->add_option("--scale", scale, "percent | raw")->check(CLI::IsMember({"percent", "raw"}));
  ingest->add_option("-o,--output", csv_out, "output file")->required();

  std::string preset;
  std::vector<std::string> params;
  auto* schedule = app.add_subcommand("schedule", "Print the resolved schedule triples");
  schedule->add_option("preset", preset, "schedule preset name")->required();
  schedule->add_option("params", params, "config overrides as key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*verify) return cmd_verify(selector);
    if (*ingest) return cmd_ingest(csv_in, take_last, scale, csv_out);
    if (*schedule) return cmd_schedule(preset, params);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const RunFailure& e) {
    std::cerr << "run failure (seed " << e.seed() << ", epoch " << e.epoch() << ", iter "
              << e.iter() << "): " << e.what() << "\n";
    return kRun;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRun;
  }
  return kOk;
}
