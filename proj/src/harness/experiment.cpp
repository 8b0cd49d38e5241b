#include "civr/harness/experiment.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "civr/apps/mdp.hpp"
#include "civr/apps/portfolio.hpp"
#include "civr/apps/synthetic.hpp"
#include "civr/harness/dataset.hpp"

namespace civr::harness {

namespace {

Regularizer<double> build_reg(const ExperimentConfig& cfg) {
  if (cfg.reg == "l1") return Regularizer<double>::l1(cfg.reg_weight);
  if (cfg.reg == "l1-ball") return Regularizer<double>::l1_ball(cfg.reg_radius);
  return Regularizer<double>::zero();
}

Vector<double> build_x0(const ExperimentConfig& cfg, Index d) {
  if (cfg.x0 == "zeros") return Vector<double>::Zero(d);
  if (cfg.x0 == "ones") return Vector<double>::Ones(d);
  if (cfg.x0 == "uniform") return Vector<double>::Constant(d, 1.0 / double(d));
  std::vector<double> values;
  std::istringstream in(cfg.x0);
  std::string item;
  while (std::getline(in, item, ',')) values.push_back(std::stod(item));
  if (static_cast<Index>(values.size()) != d)
    throw ConfigError("x0 has " + std::to_string(values.size()) + " entries, problem dimension is " +
                      std::to_string(d));
  return Eigen::Map<Vector<double>>(values.data(), d);
}

bool is_expectation_preset(const std::string& name) {
  return name == "constant-expectation" || name == "adaptive-expectation" ||
         name == "restart-gd-expectation" || name == "restart-sc-expectation";
}

std::string resolved_schedule_name(const ExperimentConfig& cfg, bool finite) {
  if (!cfg.schedule.empty()) return cfg.schedule;
  if (cfg.algorithm == "civr-adp") return finite ? "sqrt-growth" : "adaptive-expectation";
  return finite ? "constant-finite" : "constant-expectation";
}

struct RunOutput {
  SolverResult<double> result;
  double eta;
  std::int64_t wallclock_ns;
};

RunOutput run_one(const ExperimentConfig& cfg, const BuiltProblem& built,
                  const std::optional<Schedule<double>>& sched, std::uint64_t seed) {
  TraceOptions<double> opts;
  opts.wallclock = cfg.wallclock;
  opts.cadence = cfg.cadence;
  const auto d = derive_constants(built.constants);
  const auto start = std::chrono::steady_clock::now();
  RunOutput out;
  if (cfg.algorithm == "civr" || cfg.algorithm == "civr-adp") {
    out.eta = sched->eta;
    out.result = run_civr(built.problem, built.reg, built.x0, *sched, seed, opts);
  } else if (cfg.algorithm == "restarted") {
    out.eta = sched->eta;
    out.result =
        run_restarted(built.problem, built.reg, built.x0, *sched, cfg.periods, seed, opts);
  } else if (cfg.algorithm == "fullgrad") {
    out.eta = cfg.eta ? *cfg.eta : 1.0 / d.L_F;
    out.result =
        baseline_prox_fullgrad(built.problem, built.reg, built.x0, out.eta, cfg.iters, opts);
  } else {
    const double eta0 = cfg.eta ? *cfg.eta : d.eta_max_nonconvex;
    const double decay = cfg.eta_decay;
    out.eta = eta0;
    out.result = baseline_prox_plugin_sgd<double>(
        built.problem, built.reg, built.x0,
        [eta0, decay](std::int64_t k) { return eta0 / (1.0 + decay * double(k)); }, cfg.batch,
        cfg.iters, seed, opts);
  }
  out.wallclock_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  return out;
}

}  // namespace

std::uint64_t run_seed(std::uint64_t seed, std::int64_t rep) {
  return derive_seed(seed, stream::kRepetition, rep);
}

BuiltProblem build_problem(const ExperimentConfig& cfg) {
  validate_config(cfg);
  BuiltProblem out;
  out.reg = build_reg(cfg);
  try {
    if (cfg.problem == "portfolio") {
      PortfolioProblem<double> p;
      if (!cfg.dataset.empty()) {
        std::optional<std::int64_t> take;
        if (cfg.data_take_last > 0) take = cfg.data_take_last;
        p.returns = ingest_returns_csv(cfg.dataset, take,
                                       cfg.data_scale == "percent" ? ReturnScale::Percent
                                                                   : ReturnScale::Raw)
                        .returns;
      } else {
        p.returns = synthetic_returns<double>(cfg.data_rows, cfg.data_cols, cfg.data_seed);
      }
      p.lambda = cfg.lambda;
      p.sign_mode = cfg.sign_mode == "paper-literal" ? SignMode::PaperLiteral : SignMode::RiskAverse;
      out.constants = portfolio_constants(p, cfg.region_radius);
      out.problem = make_portfolio(std::move(p));
    } else if (cfg.problem == "mdp") {
      auto inst = generate_mdp<double>(cfg.mdp_states, cfg.mdp_features, cfg.mdp_gamma,
                                       cfg.mdp_seed, cfg.mdp_realizable);
      out.constants = mdp_constants(inst.problem, cfg.region_radius);
      out.problem = make_mdp(std::move(inst.problem));
    } else {
      SyntheticSpec<double> spec;
      spec.d = cfg.synth_d;
      spec.p = cfg.synth_p;
      spec.n = cfg.synth_n;
      spec.sigma_min = cfg.synth_sigma_min;
      spec.sigma_max = cfg.synth_sigma_max;
      spec.heterogeneity = cfg.synth_heterogeneity;
      spec.residual = cfg.synth_residual;
      spec.region_radius = cfg.region_radius;
      if (cfg.reg == "l1") spec.l1_weight = cfg.reg_weight;
      const auto inst =
          cfg.synth_noise > 0
              ? synth_noisy_quadratic(spec, cfg.synth_noise,
                                      cfg.synth_noise_kind == "gaussian" ? NoiseKind::Gaussian
                                                                         : NoiseKind::Uniform,
                                      cfg.synth_seed)
              : synth_quadratic_composite(spec, cfg.synth_seed);
      out.problem = inst.problem;
      out.constants = inst.constants;
      if (std::isfinite(inst.nu)) out.nu = inst.nu;
      if (inst.mu > 0) out.mu = inst.mu;
    }
  } catch (const DatasetError& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  out.x0 = build_x0(cfg, out.problem.oracle->dim_d());
  return out;
}

BuiltSchedule build_schedule(const ExperimentConfig& cfg, const BuiltProblem& built) {
  const auto& oracle = *built.problem.oracle;
  const bool finite = oracle.finite_sum();
  const std::string name = resolved_schedule_name(cfg, finite);
  const SampleCount n = oracle.num_components();
  if (!finite && !is_expectation_preset(name) && name != "custom")
    throw ConfigError("schedule '" + name + "' needs a finite-sum problem");
  if (name.rfind("restart-gd", 0) == 0 && !built.reg.is_zero())
    throw ConfigError("gradient-dominant restarts are only defined without a regularizer");

  BuiltSchedule out;
  auto c = derive_constants(built.constants);
  if (is_expectation_preset(name)) {
    if (cfg.schedule_sigma0_sq) {
      c.sigma_0_sq = *cfg.schedule_sigma0_sq;
    } else {
      Rng rng(derive_seed(cfg.seeds.front(), stream::kPilot));
      const auto pilot = pilot_variances(oracle, built.x0, 1000, rng, built.constants);
      c.sigma_0_sq = derive_constants(pilot).sigma_0_sq;
      out.sigma0_sq_pilot = c.sigma_0_sq;
    }
  }
  auto need = [&](const std::optional<double>& cfg_value, const std::optional<double>& known,
                  const char* key) {
    if (cfg_value) return *cfg_value;
    if (known) return *known;
    throw ConfigError(std::string("schedule '") + name + "' needs " + key);
  };

  try {
    if (name == "constant-finite")
      out.schedule = schedule_constant_finite(n, cfg.schedule_T, c, cfg.eta);
    else if (name == "adaptive-finite")
      out.schedule = schedule_adaptive_finite(n, cfg.schedule_a, cfg.schedule_b, cfg.schedule_T, c,
                                              cfg.eta);
    else if (name == "sqrt-growth")
      out.schedule = schedule_sqrt_growth_finite(n, cfg.schedule_T,
                                                 cfg.eta ? *cfg.eta : c.eta_max_nonconvex);
    else if (name == "constant-expectation")
      out.schedule = schedule_constant_expectation(cfg.schedule_eps, c, cfg.eta);
    else if (name == "adaptive-expectation")
      out.schedule = schedule_adaptive_expectation(cfg.schedule_a, cfg.schedule_b,
                                                   cfg.schedule_T, c, cfg.eta);
    else if (name == "restart-gd-finite")
      out.schedule =
          restart_gradient_dominant_finite(n, need(cfg.schedule_nu, built.nu, "schedule.nu"), c, cfg.eta);
    else if (name == "restart-gd-expectation")
      out.schedule = restart_gradient_dominant_expectation(
          cfg.schedule_eps, need(cfg.schedule_nu, built.nu, "schedule.nu"), c, cfg.eta);
    else if (name == "restart-sc-finite")
      out.schedule =
          restart_strongly_convex_finite(n, need(cfg.schedule_mu, built.mu, "schedule.mu"), c, cfg.eta);
    else if (name == "restart-sc-expectation")
      out.schedule = restart_strongly_convex_expectation(
          cfg.schedule_eps, need(cfg.schedule_mu, built.mu, "schedule.mu"), c, cfg.eta);
    else
      out.schedule = schedule_custom(cfg.schedule_triples, *cfg.eta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files) {
  const BuiltProblem built = build_problem(cfg);
  ExperimentResult result;
  std::optional<Schedule<double>> sched;
  if (cfg.algorithm == "civr" || cfg.algorithm == "civr-adp" || cfg.algorithm == "restarted") {
    auto bs = build_schedule(cfg, built);
    sched = bs.schedule;
    result.sigma0_sq_pilot = bs.sigma0_sq_pilot;
  }
  result.schedule = sched;

  struct Job {
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto s : cfg.seeds)
    for (std::int64_t r = 0; r < cfg.repetitions; ++r) jobs.push_back({run_seed(s, r)});

  std::vector<std::optional<RunOutput>> outputs(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        outputs[k] = run_one(cfg, built, sched, jobs[k].seed);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(
      std::min<std::int64_t>(cfg.workers, static_cast<std::int64_t>(jobs.size())));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (!errors[k]) continue;
    const auto seed = jobs[k].seed;
    try {
      std::rethrow_exception(errors[k]);
    } catch (const numerical_error& e) {
      throw RunFailure("run " + std::to_string(k) + " (seed " + std::to_string(seed) +
                           ") failed at epoch " + std::to_string(e.epoch()) + ", iter " +
                           std::to_string(e.iter()) + ": " + e.what(),
                       seed, e.epoch(), e.iter());
    } catch (const std::exception& e) {
      throw RunFailure("run " + std::to_string(k) + " (seed " + std::to_string(seed) +
                           ") failed: " + e.what(),
                       seed, -1, -1);
    }
  }

  for (std::size_t k = 0; k < jobs.size(); ++k) {
    auto& o = *outputs[k];
    Diagnostics<double> diag(built.problem, built.reg, o.eta, 10000, jobs[k].seed);
    const auto [phi, gms] = diag(o.result.x_bar);
    result.runs.push_back({static_cast<std::int64_t>(k), jobs[k].seed, phi, gms, o.result.samples,
                           o.wallclock_ns});
    result.traces.push_back(std::move(o.result.trace));
  }
  std::vector<const RunTrace<double>*> ptrs;
  for (const auto& t : result.traces) ptrs.push_back(&t);
  result.curve = mean_curve(ptrs);

  if (!write_files) return result;
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output, ec);
  if (ec) throw RunFailure("cannot create output directory '" + cfg.output + "'", 0, -1, -1);
  const fs::path dir(cfg.output);
  for (std::size_t k = 0; k < result.traces.size(); ++k) {
    std::ofstream f(dir / ("trace_" + std::to_string(k) + ".csv"));
    write_trace_csv(f, std::to_string(k), result.traces[k]);
  }
  {
    std::ofstream f(dir / "mean_curve.csv");
    write_mean_curve_csv(f, result.curve);
  }
  std::ofstream f(dir / "summary.txt");
  double mean_phi = 0, mean_gms = 0, mean_samples = 0;
  std::int64_t wall = 0;
  for (const auto& r : result.runs) {
    mean_phi += r.final_objective;
    mean_gms += r.final_grad_map_sq;
    mean_samples += double(r.samples);
    wall += r.wallclock_ns;
  }
  const double count = double(result.runs.size());
  f << "algorithm = " << cfg.algorithm << '\n';
  if (sched) {
    f << "schedule = " << to_string(sched->kind) << '\n';
    f << "epochs = " << sched->num_epochs() << '\n';
    f << "eta = " << format_double(sched->eta) << '\n';
  }
  if (result.sigma0_sq_pilot) f << "sigma0_sq_pilot = " << format_double(*result.sigma0_sq_pilot) << '\n';
  f << "runs = " << result.runs.size() << '\n';
  f << "mean_final_objective = " << format_double(mean_phi / count) << '\n';
  f << "mean_final_grad_map_sq = " << format_double(mean_gms / count) << '\n';
  f << "mean_samples = " << format_double(mean_samples / count) << '\n';
  f << "total_wallclock_ns = " << wall << '\n';
  for (const auto& r : result.runs) {
    const std::string p = "run." + std::to_string(r.index) + ".";
    f << p << "seed = " << r.seed << '\n';
    f << p << "final_objective = " << format_double(r.final_objective) << '\n';
    f << p << "final_grad_map_sq = " << format_double(r.final_grad_map_sq) << '\n';
    f << p << "samples = " << r.samples << '\n';
    f << p << "wallclock_ns = " << r.wallclock_ns << '\n';
  }
  return result;
}

}  // namespace civr::harness
