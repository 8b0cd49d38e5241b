#include "civr/harness/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>
#include <sstream>

#include "civr/civr.hpp"
#include "civr/harness/config.hpp"
#include "civr/harness/trace_io.hpp"

namespace civr::harness {

namespace {

using Vec = Vector<double>;
using Mat = Matrix<double>;

constexpr std::uint64_t kVerifySeed = 20190521;
// Hand-tuned step sizes of the experiment-shaped checks.
constexpr double kPortfolioEta = 0.03;
constexpr double kMdpEtaScale = 0.5;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

CheckResult at_least(std::string name, double measured, double bound, std::string detail) {
  return {std::move(name), measured >= bound, measured, bound, "measured >= bound; " + detail};
}

CheckResult less_than(std::string name, double measured, double bound, std::string detail) {
  return {std::move(name), measured < bound, measured, bound, "measured < bound; " + detail};
}

/// Keeps the leading epochs whose cumulative cost stays within `budget`,
/// plus the first one that crosses it.
Schedule<double> truncate_to_budget(Schedule<double> s, SampleCount n, SampleCount budget) {
  SampleCount spent = 0;
  std::size_t keep = 0;
  while (keep < s.epochs.size() && spent <= budget) {
    const auto& e = s.epochs[keep++];
    spent += (e.anchor.is_full() ? n : e.anchor.count()) + 2 * (e.tau - 1) * e.inner_batch;
  }
  s.epochs.erase(s.epochs.begin() + std::ptrdiff_t(keep), s.epochs.end());
  return s;
}

CheckResult at_most(std::string name, double measured, double bound, std::string detail = {}) {
  return {std::move(name), measured <= bound, measured, bound,
          detail.empty() ? "measured <= bound" : std::move(detail)};
}

Vec random_vector(Index n, Rng& rng, double scale = 1.0) {
  Vec v(n);
  for (Index j = 0; j < n; ++j) v(j) = scale * standard_normal(rng);
  return v;
}

double rel_err(const Vec& a, const Vec& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-300});
}

double rel_err(const Mat& a, const Mat& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-300});
}

template <typename Fn>
Vec fd_gradient(const Fn& f, const Vec& x) {
  Vec g(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(x(j)));
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    g(j) = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

Mat fd_jacobian(const ComponentOracle<double>& oracle, Draw draw, const Vec& x) {
  Mat jac(oracle.dim_p(), oracle.dim_d());
  Vec vp, vm;
  Mat unused;
  for (Index j = 0; j < x.size(); ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(x(j)));
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    oracle.eval_component(draw, xp, vp, unused);
    oracle.eval_component(draw, xm, vm, unused);
    jac.col(j) = (vp - vm) / (2 * h);
  }
  return jac;
}

void gradient_checks(const std::string& label, const CompositeProblem<double>& problem,
                     int probes, std::uint64_t seed, double scale,
                     std::vector<CheckResult>& out) {
  const auto& oracle = *problem.oracle;
  const auto zero = Regularizer<double>::zero();
  double worst_grad = 0, worst_jac = 0;
  for (int k = 0; k < probes; ++k) {
    Rng rng(derive_seed(seed, stream::kData, k));
    const Vec x = random_vector(oracle.dim_d(), rng, scale);
    const Vec g = composite_gradient(problem, x);
    const Vec fd = fd_gradient([&](const Vec& p) { return composite_value(problem, zero, p); }, x);
    worst_grad = std::max(worst_grad, rel_err(g, fd));
    const Draw draw = oracle.draw(rng);
    Vec v;
    Mat jac;
    oracle.eval_component(draw, x, v, jac);
    worst_jac = std::max(worst_jac, rel_err(jac, fd_jacobian(oracle, draw, x)));
  }
  out.push_back(at_most(label + " composite gradient vs finite differences", worst_grad, 1e-6,
                        "max relative error over " + std::to_string(probes) + " probes"));
  out.push_back(at_most(label + " component jacobian vs finite differences", worst_jac, 1e-6,
                        "max relative error over " + std::to_string(probes) + " probes"));
}

/// Seed-averaged gap Phi(x_bar_k) - Phi* after each of `periods` restarts.
std::vector<double> restart_gaps(const SyntheticInstance<double>& inst,
                                 const Schedule<double>& sched, const Vec& x0,
                                 std::int64_t seeds, std::int64_t periods) {
  TraceOptions<double> opts;
  opts.diagnostics = false;
  std::vector<double> gaps(static_cast<std::size_t>(periods + 1), 0.0);
  gaps[0] = inst.gap(x0);
  for (std::int64_t s = 0; s < seeds; ++s) {
    const auto r = run_restarted(inst.problem, inst.reg, x0, sched, periods,
                                 derive_seed(kVerifySeed, stream::kRepetition, s), opts);
    for (std::int64_t k = 0; k < periods; ++k)
      gaps[static_cast<std::size_t>(k + 1)] += inst.gap(r.period_outputs[static_cast<std::size_t>(k)]);
  }
  for (std::size_t k = 1; k < gaps.size(); ++k) gaps[k] /= double(seeds);
  return gaps;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + fmt(v[k]);
  return s;
}

}  // namespace

std::string format_result(const CheckResult& r) {
  std::ostringstream s;
  s << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  measured=" << fmt(r.measured)
    << " bound=" << fmt(r.bound);
  if (!r.detail.empty()) s << "  (" << r.detail << ")";
  return s.str();
}

void print_results(std::ostream& out, const std::vector<CheckResult>& results) {
  for (const auto& r : results) out << format_result(r) << '\n';
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

std::vector<CheckResult> check_gradients(int probes, std::uint64_t seed) {
  std::vector<CheckResult> out;
  for (const auto mode : {SignMode::RiskAverse, SignMode::PaperLiteral}) {
    PortfolioProblem<double> p;
    p.returns = synthetic_returns<double>(60, 6, seed);
    p.lambda = 0.2;
    p.sign_mode = mode;
    gradient_checks(mode == SignMode::RiskAverse ? "portfolio (risk-averse)"
                                                 : "portfolio (paper-literal)",
                    make_portfolio(std::move(p)), probes, seed, 0.5, out);
  }
  auto mdp = generate_mdp<double>(8, 3, 0.9, seed, false);
  gradient_checks("mdp", make_mdp(std::move(mdp.problem)), probes, seed, 1.0, out);

  SyntheticSpec<double> spec;
  spec.d = 5;
  spec.p = 4;
  spec.n = 12;
  gradient_checks("synthetic", synth_quadratic_composite(spec, seed).problem, probes, seed, 1.0,
                  out);
  gradient_checks("synthetic (noisy)",
                  synth_noisy_quadratic(spec, 0.1, NoiseKind::Gaussian, seed).problem, probes,
                  seed, 1.0, out);
  return out;
}

CheckResult check_fullbatch_degeneracy(Index d, std::int64_t iters) {
  SyntheticSpec<double> spec;
  spec.d = d;
  spec.p = d;
  spec.n = 20;
  spec.l1_weight = 0.01;
  const auto inst = synth_quadratic_composite(spec, kVerifySeed);
  const SampleCount n = spec.n;
  const auto c = derive_constants(inst.constants);
  const double eta = c.eta_max_nonconvex;

  std::vector<EpochParams> epochs;
  for (std::int64_t left = iters; left > 0; left -= n)
    epochs.push_back({std::min<SampleCount>(left, n), AnchorSize::full(), n});
  const auto sched = schedule_custom(epochs, eta);

  TraceOptions<double> opts;
  opts.diagnostics = false;
  opts.store_iterates = true;
  opts.cadence = 1;
  const Vec x0 = Vec::Constant(d, 1.0);
  const auto civr = run_civr(inst.problem, inst.reg, x0, sched, kVerifySeed, opts);
  const auto base = baseline_prox_fullgrad(inst.problem, inst.reg, x0, eta, iters, opts);

  double mismatches = 0;
  const auto& a = civr.trace.iterates;
  const auto& b = base.trace.iterates;
  if (a.size() != b.size()) {
    mismatches = double(std::max(a.size(), b.size()));
  } else {
    for (std::size_t k = 0; k < a.size(); ++k)
      if (std::memcmp(a[k].data(), b[k].data(), sizeof(double) * std::size_t(d)) != 0) ++mismatches;
    if (std::memcmp(civr.x_last.data(), base.x_last.data(), sizeof(double) * std::size_t(d)) != 0)
      ++mismatches;
  }
  return at_most("full-batch civr reproduces proximal gradient bit for bit", mismatches, 0,
                 "iterates differing in any bit, " + std::to_string(iters) + " iterations, d=" +
                     std::to_string(d));
}

std::vector<CheckResult> check_mse_bounds(std::int64_t replays, std::uint64_t seed) {
  PortfolioProblem<double> p;
  p.returns = synthetic_returns<double>(40, 5, seed);
  p.lambda = 0.5;
  const Mat returns = p.returns;
  const auto problem = make_portfolio(p);
  const auto& oracle = *problem.oracle;
  const auto& outer = *problem.outer;
  const SampleCount batch = 5, inner = 4;
  constexpr int kSteps = 5;

  // frozen path
  Rng path_rng(derive_seed(seed, stream::kData, 1));
  std::vector<Vec> path{random_vector(5, path_rng, 0.3)};
  for (int r = 1; r <= kSteps; ++r) {
    Vec step = random_vector(5, path_rng);
    path.push_back(path.back() + 0.2 * step / step.norm());
  }

  // exact targets and region constants
  std::vector<Vec> g(path.size()), grad(path.size());
  std::vector<Mat> jac(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    oracle.eval_full(path[i], g[i], jac[i]);
    grad[i] = composite_gradient(problem, path[i]);
  }
  double h_max = 0, row_max = 0;
  for (Index i = 0; i < returns.rows(); ++i) {
    row_max = std::max(row_max, returns.row(i).norm());
    for (const auto& x : path) h_max = std::max(h_max, std::abs(returns.row(i).dot(x)));
  }
  const double ell_g = row_max * std::sqrt(1 + 4 * h_max * h_max);
  const double L_g = 2 * row_max * row_max;
  const double L_f = 2 * p.lambda;
  const double y_bound = (1 + 2 * kSteps) * h_max;  // |y_i| <= |y_0| + sum of |h differences|
  const double ell_f = std::sqrt(std::pow(1 + 2 * p.lambda * y_bound, 2) + p.lambda * p.lambda);

  double var_g = 0, var_j = 0;
  {
    Vec v;
    Mat j;
    for (Index i = 0; i < returns.rows(); ++i) {
      oracle.eval_component(Draw(i), path[0], v, j);
      var_g += (v - g[0]).squaredNorm();
      var_j += (j - jac[0]).squaredNorm();
    }
    var_g /= double(returns.rows());
    var_j /= double(returns.rows());
  }
  const double G0 = 2 * (std::pow(ell_g, 4) * L_f * L_f + ell_f * ell_f * L_g * L_g);
  const double sigma0 = 2 * (ell_g * ell_g * L_f * L_f * var_g + ell_f * ell_f * var_j);

  std::vector<double> mse_y(path.size(), 0), mse_z(path.size(), 0), mse_f(path.size(), 0);
  for (std::int64_t rep = 0; rep < replays; ++rep) {
    Rng anchor_rng(derive_seed(seed, stream::kAnchor, rep));
    auto state = anchor(oracle, path[0], AnchorSize::of(batch), anchor_rng);
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i > 0) {
        Rng adv(derive_seed(seed, stream::kAdvance, rep, std::int64_t(i)));
        advance(state, oracle, path[i], inner, adv);
      }
      mse_y[i] += (state.y - g[i]).squaredNorm();
      mse_z[i] += (state.z - jac[i]).squaredNorm();
      mse_f[i] += (composite_estimate(state, outer) - grad[i]).squaredNorm();
    }
  }
  double ratio_y = 0, ratio_z = 0, ratio_f = 0, path_sq = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) path_sq += (path[i] - path[i - 1]).squaredNorm();
    const double by = var_g / double(batch) + ell_g * ell_g / double(inner) * path_sq;
    const double bz = var_j / double(batch) + L_g * L_g / double(inner) * path_sq;
    const double bf = G0 / double(inner) * path_sq + sigma0 / double(batch);
    ratio_y = std::max(ratio_y, mse_y[i] / double(replays) / by);
    ratio_z = std::max(ratio_z, mse_z[i] / double(replays) / bz);
    ratio_f = std::max(ratio_f, mse_f[i] / double(replays) / bf);
  }
  const std::string proto = std::to_string(replays) + " replays, 5-step frozen path";
  std::vector<CheckResult> out;
  out.push_back(at_most("inner value MSE recursion (y)", ratio_y, 1.1,
                        "max empirical/bound over steps, " + proto));
  out.push_back(at_most("inner jacobian MSE recursion (z)", ratio_z, 1.1,
                        "max empirical/bound over steps, " + proto));
  out.push_back(at_most("composite gradient MSE bound", ratio_f, 1.1,
                        "max empirical/bound over steps, " + proto));

  // conditional mean of one correction from a fixed state
  Rng anchor_rng(derive_seed(seed, stream::kAnchor, -1));
  const auto base = anchor(oracle, path[0], AnchorSize::of(batch), anchor_rng);
  const Vec target_y = base.y + g[1] - g[0];
  const Mat target_z = base.z + jac[1] - jac[0];
  const Index py = target_y.size(), pz = target_z.size();
  Vec mean = Vec::Zero(py + pz), m2 = Vec::Zero(py + pz);
  for (std::int64_t rep = 0; rep < replays; ++rep) {
    auto state = base;
    Rng adv(derive_seed(seed, stream::kDiagnostics, rep));
    advance(state, oracle, path[1], inner, adv);
    Vec sample(py + pz);
    sample << state.y, state.z.reshaped();
    const Vec delta = sample - mean;
    mean += delta / double(rep + 1);
    m2 += delta.cwiseProduct(sample - mean);
  }
  Vec target(py + pz);
  target << target_y, target_z.reshaped();
  double zmax = 0;
  for (Index k = 0; k < target.size(); ++k) {
    const double sd = std::sqrt(m2(k) / double(replays - 1));
    const double err = std::abs(mean(k) - target(k));
    if (sd == 0) {
      if (err > 1e-12 * std::max(1.0, std::abs(target(k))))
        zmax = std::numeric_limits<double>::infinity();
    } else {
      zmax = std::max(zmax, err / (sd / std::sqrt(double(replays))));
    }
  }
  out.push_back(at_most("conditional mean of one correction step", zmax, 4.0,
                        "max |z-score| over y and z coordinates, " + std::to_string(replays) +
                            " replays"));
  return out;
}

std::vector<CheckResult> check_constant_finite_rate(const std::vector<SampleCount>& ns,
                                                    std::int64_t epochs, std::int64_t seeds) {
  std::vector<CheckResult> out;
  for (const auto n : ns) {
    SyntheticSpec<double> spec;
    spec.d = 5;
    spec.p = 5;
    spec.n = n;
    const auto inst = synth_quadratic_composite(spec, kVerifySeed + std::uint64_t(n));
    const auto c = derive_constants(inst.constants);
    const auto sched = schedule_constant_finite<double>(n, epochs, c);
    const Vec x0 = Vec::Constant(spec.d, 2.0);
    TraceOptions<double> opts;
    opts.cadence = 1;
    opts.wallclock = false;
    double avg = 0;
    bool complete = true;
    for (std::int64_t s = 0; s < seeds; ++s) {
      const auto r = run_civr(inst.problem, inst.reg, x0, sched,
                              derive_seed(kVerifySeed, stream::kRepetition, s), opts);
      complete = complete && SampleCount(r.trace.records.size()) == sched.total_slots();
      double sum = 0;
      for (const auto& rec : r.trace.records) sum += rec.grad_map_sq;
      avg += sum / double(r.trace.records.size());
    }
    avg /= double(seeds);
    const double bound =
        8 * inst.gap(x0) / (sched.eta * std::sqrt(double(n)) * double(epochs));
    auto res = at_most("constant finite-sum rate, n=" + std::to_string(n), avg / bound, 1.2,
                       "seed-averaged slot mean of ||G||^2 / (8 gap0 / (eta sqrt(n) T)), " +
                           std::to_string(seeds) + " seeds, T=" + std::to_string(epochs));
    res.passed = res.passed && complete;
    out.push_back(res);
  }
  return out;
}

CheckResult check_gradient_dominant_restart(std::int64_t seeds, std::int64_t periods) {
  SyntheticSpec<double> spec;
  spec.d = 6;
  spec.p = 4;  // rank deficient: gradient dominant without strong convexity
  spec.n = 64;
  spec.sigma_min = 0.5;
  spec.sigma_max = 2;
  const auto inst = synth_quadratic_composite(spec, kVerifySeed + 6);
  const auto c = derive_constants(inst.constants);
  const auto sched = restart_gradient_dominant_finite<double>(spec.n, inst.nu, c);
  const Vec x0 = Vec::Constant(spec.d, 2.0);
  const auto gaps = restart_gaps(inst, sched, x0, seeds, periods);

  // Consecutive ratios are only resolvable while the gap sits well above the
  // round-off floor of a squared residual.
  const double floor = 1e-24 * gaps[0];
  double worst_ratio = 0, worst_cumulative = 0;
  for (std::size_t k = 1; k < gaps.size(); ++k) {
    if (gaps[k - 1] > floor) worst_ratio = std::max(worst_ratio, gaps[k] / gaps[k - 1]);
    worst_cumulative = std::max(worst_cumulative, gaps[k] / (std::pow(0.6, double(k)) * gaps[0]));
  }
  auto r = at_most("gradient-dominant restarts halve the gap", worst_ratio, 0.6,
                   "max seed-averaged per-period gap ratio; gaps " + join(gaps) +
                       "; max gap_k/(0.6^k gap_0)=" + fmt(worst_cumulative) + ", " +
                       std::to_string(seeds) + " seeds, nu=" + fmt(inst.nu));
  r.passed = r.passed && worst_cumulative <= 1.0;
  return r;
}

CheckResult check_strongly_convex_restart_expectation(std::int64_t seeds, std::int64_t periods,
                                                      double eps) {
  SyntheticSpec<double> spec;
  spec.d = 3;
  spec.p = 3;
  spec.region_radius = 3;
  const auto inst = synth_noisy_quadratic(spec, 0.05, NoiseKind::Uniform, kVerifySeed + 7);
  const auto c = derive_constants(inst.constants);
  const auto sched = restart_strongly_convex_expectation<double>(eps, inst.mu, c);
  const Vec x0 = Vec::Constant(spec.d, 2.0);
  const auto gaps = restart_gaps(inst, sched, x0, seeds, periods);
  double worst = 0;
  for (std::size_t k = 1; k < gaps.size(); ++k)
    worst = std::max(worst, gaps[k] / (std::pow(0.6, double(k)) * gaps[0] + eps));
  return at_most("strongly convex restarts (expectation) contract to eps", worst, 1.0,
                 "max gap_k / (0.6^k gap_0 + eps); gaps " + join(gaps) + ", eps=" + fmt(eps) +
                     ", eta=" + fmt(sched.eta) + " < " + fmt(c.eta_max_strongly) + ", " +
                     std::to_string(seeds) + " seeds");
}

CheckResult check_strongly_convex_restart_finite(std::int64_t seeds, std::int64_t periods) {
  SyntheticSpec<double> spec;
  spec.d = 5;
  spec.p = 5;
  spec.n = 64;
  const auto inst = synth_quadratic_composite(spec, kVerifySeed + 8);
  const auto c = derive_constants(inst.constants);
  const auto sched = restart_strongly_convex_finite<double>(spec.n, inst.mu, c);
  const Vec x0 = Vec::Constant(spec.d, 2.0);
  const auto gaps = restart_gaps(inst, sched, x0, seeds, periods);
  double worst = 0;
  for (std::size_t k = 1; k < gaps.size(); ++k)
    worst = std::max(worst, gaps[k] / (std::pow(0.6, double(k)) * gaps[0]));
  return at_most("strongly convex restarts (finite sum) contract geometrically", worst, 1.0,
                 "max gap_k / (0.6^k gap_0); gaps " + join(gaps) + ", eta=" + fmt(sched.eta) +
                     " < " + fmt(c.eta_max_strongly) + ", " + std::to_string(seeds) + " seeds");
}

std::vector<CheckResult> check_prox(std::uint64_t seed) {
  double st_opt = 0, st_lip = 0, ball_feas = 0, ball_opt = 0, ball_lip = 0, ball_oracle = 0;
  for (int k = 0; k < 200; ++k) {
    Rng rng(derive_seed(seed, stream::kData, k));
    const Index n = 1 + Index(uniform_index(rng, 12));
    const double eta = 0.05 + uniform01(rng), w = uniform01(rng), radius = 0.1 + 2 * uniform01(rng);
    const Vec u = random_vector(n, rng), v = random_vector(n, rng);

    const auto l1 = Regularizer<double>::l1(w);
    const Vec p = l1.prox(v, eta);
    for (Index j = 0; j < n; ++j) {
      // subgradient condition (v - p) / eta in w * d|p|
      const double s = (v(j) - p(j)) / eta;
      const double viol = p(j) != 0 ? std::abs(s - w * (p(j) > 0 ? 1 : -1))
                                     : std::max(0.0, std::abs(s) - w);
      st_opt = std::max(st_opt, viol);
    }
    st_lip = std::max(st_lip, (l1.prox(u, eta) - p).norm() / (u - v).norm());

    const Vec q = project_l1_ball(v, radius);
    ball_feas = std::max(ball_feas, q.lpNorm<1>() - radius);
    for (Index j = 0; j < n; ++j) {
      for (const double sign : {-1.0, 1.0}) {
        Vec vertex = Vec::Zero(n);
        vertex(j) = sign * radius;
        ball_opt = std::max(ball_opt, (v - q).dot(vertex - q));
      }
    }
    ball_lip = std::max(ball_lip, (project_l1_ball(u, radius) - q).norm() / (u - v).norm());

    // bisection on the threshold theta with sum max(|v| - theta, 0) = radius
    Vec oracle = v;
    if (v.lpNorm<1>() > radius) {
      double lo = 0, hi = v.cwiseAbs().maxCoeff();
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double mass = (v.cwiseAbs().array() - mid).max(0.0).sum();
        (mass > radius ? lo : hi) = mid;
      }
      const double theta = 0.5 * (lo + hi);
      for (Index j = 0; j < n; ++j)
        oracle(j) = (v(j) > 0 ? 1 : -1) * std::max(std::abs(v(j)) - theta, 0.0);
    }
    ball_oracle = std::max(ball_oracle, (oracle - q).cwiseAbs().maxCoeff());
  }
  return {
      at_most("soft-threshold optimality", st_opt, 1e-12, "max subgradient violation"),
      at_most("soft-threshold non-expansive", st_lip, 1 + 1e-12, "max Lipschitz ratio"),
      at_most("l1-ball projection feasible", ball_feas, 1e-12, "max ||p||_1 - radius"),
      at_most("l1-ball projection optimality", ball_opt, 1e-10,
              "max <v - p, vertex - p> over ball vertices"),
      at_most("l1-ball projection non-expansive", ball_lip, 1 + 1e-12, "max Lipschitz ratio"),
      at_most("l1-ball projection vs bisection oracle", ball_oracle, 1e-10, "max abs difference"),
  };
}

std::vector<CheckResult> check_sample_accounting() {
  SyntheticSpec<double> spec;
  spec.d = 3;
  spec.p = 3;
  const auto inst = synth_noisy_quadratic(spec, 0.05, NoiseKind::Uniform, kVerifySeed);
  auto c = derive_constants(inst.constants);
  c.sigma_0_sq = 1;
  const auto sched = schedule_constant_expectation<double>(0.01, c);
  const auto r = run_civr(inst.problem, inst.reg, Vec(Vec::Zero(3)), sched, kVerifySeed);
  const double counted = r.trace.records.empty() ? 0 : double(r.trace.records.back().samples);
  const auto& e = sched.epochs.front();
  const std::string shape = "T=" + std::to_string(sched.num_epochs()) +
                            " tau=" + std::to_string(e.tau) + " B=" +
                            std::to_string(e.anchor.count()) + " S=" + std::to_string(e.inner_batch);
  CheckResult budget{"final sample counter equals T*B + 2*T*tau*S",
                     counted == double(sched.nominal_budget(0)), counted,
                     double(sched.nominal_budget(0)), shape + ", measured == bound"};
  CheckResult exact{"final sample counter equals T*B + 2*T*(tau-1)*S",
                    counted == double(sched.exact_cost(0)), counted, double(sched.exact_cost(0)),
                    shape + ", tau - 1 corrections per epoch, measured == bound"};
  return {budget, exact};
}

std::vector<CheckResult> check_portfolio_experiment(std::int64_t seeds) {
  PortfolioProblem<double> p;
  p.returns = synthetic_returns<double>(1000, 30, kVerifySeed);
  p.lambda = 0.2;
  const SampleCount n = p.periods();
  const auto problem = make_portfolio(std::move(p));
  const auto reg = Regularizer<double>::l1(0.01);
  const Vec x0 = Vec::Zero(30);
  const double eta = kPortfolioEta;
  const SampleCount budget = 20 * n;
  const SampleCount root = SampleCount(std::ceil(std::sqrt(double(n))));

  const Diagnostics<double> diag(problem, reg, eta, 0, 0);
  const double initial = diag(x0).second;

  const auto civr_sched = schedule_constant_finite<double>(n, budget / n + 1, {}, eta);
  const auto adp_sched = schedule_sqrt_growth_finite<double>(n, budget, eta);
  TraceOptions<double> opts;
  opts.wallclock = false;

  std::vector<RunTrace<double>> civr_traces, adp_traces, sgd_traces;
  for (std::int64_t s = 0; s < seeds; ++s) {
    const auto seed = derive_seed(kVerifySeed, stream::kRepetition, s);
    civr_traces.push_back(run_civr(problem, reg, x0, civr_sched, seed, opts).trace);
    adp_traces.push_back(run_civr(problem, reg, x0, truncate_to_budget(adp_sched, n, budget),
                                  seed, opts)
                             .trace);
    sgd_traces.push_back(baseline_prox_plugin_sgd<double>(
                             problem, reg, x0, [eta](std::int64_t) { return eta; }, root,
                             budget / root, seed, opts)
                             .trace);
  }
  auto at_budget = [&](const std::vector<RunTrace<double>>& traces) {
    std::vector<const RunTrace<double>*> ptrs;
    for (const auto& t : traces) ptrs.push_back(&t);
    double value = initial;
    for (const auto& pt : mean_curve(ptrs))
      if (pt.samples <= budget) value = pt.grad_map_sq;
    return value;
  };
  const double civr = at_budget(civr_traces), adp = at_budget(adp_traces),
               sgd = at_budget(sgd_traces);
  const std::string proto = std::to_string(seeds) + " seeds, budget 20n, eta=" + fmt(eta);
  return {
      at_least("civr reduces mean ||G||^2 10x", initial / civr, 10,
               "initial/final " + fmt(initial) + "/" + fmt(civr) + ", " + proto),
      at_least("civr-adp reduces mean ||G||^2 10x", initial / adp, 10,
               "initial/final " + fmt(initial) + "/" + fmt(adp) + ", " + proto),
      less_than("civr beats plugin sgd at equal budget", civr / sgd, 1,
                "civr/sgd final ||G||^2, sgd " + fmt(sgd) + ", batch " + std::to_string(root)),
      less_than("civr-adp beats plugin sgd at equal budget", adp / sgd, 1,
                "civr-adp/sgd final ||G||^2"),
  };
}

std::vector<CheckResult> check_mdp_experiment(std::int64_t seeds, std::int64_t epochs) {
  std::vector<double> mean_f(static_cast<std::size_t>(epochs + 1), 0.0);
  double worst_final = 0;
  for (std::int64_t s = 0; s < seeds; ++s) {
    const auto inst = generate_mdp<double>(10, 3, 0.9, derive_seed(kVerifySeed, stream::kData, s),
                                           true);
    const auto& m = inst.problem;
    const Mat design = m.Psi - m.gamma * m.P * m.Psi;
    Eigen::JacobiSVD<Mat> svd(design);
    const double smooth = 2 * svd.singularValues()(0) * svd.singularValues()(0);
    const double eta = kMdpEtaScale / smooth;
    const auto sched = schedule_custom(
        std::vector<EpochParams>(static_cast<std::size_t>(epochs), {10, AnchorSize::full(), 10}),
        eta);
    const auto problem = make_mdp(m);
    const Vec w0 = Vec::Zero(m.features());
    TraceOptions<double> opts;
    opts.wallclock = false;
    const auto r = run_civr(problem, Regularizer<double>::zero(), w0, sched,
                            derive_seed(kVerifySeed, stream::kRepetition, s), opts);
    const double f0 = mdp_objective(m, w0);
    for (const auto& rec : r.trace.records)
      if (rec.iter == 0) mean_f[static_cast<std::size_t>(rec.epoch - 1)] += rec.objective;
    const double f_end = mdp_objective(m, r.x_last);
    mean_f.back() += f_end;
    worst_final = std::max(worst_final, f_end / f0);
  }
  for (auto& v : mean_f) v /= double(seeds);
  // Once the mean sits at the double round-off floor its wobble carries no signal.
  const double floor = 1e-24 * mean_f.front();
  double increases = 0, worst_step = 0;
  std::size_t counted = 0;
  for (std::size_t t = 1; t < mean_f.size() && mean_f[t - 1] > floor; ++t, ++counted) {
    if (mean_f[t] > mean_f[t - 1]) ++increases;
    worst_step = std::max(worst_step, mean_f[t] / mean_f[t - 1]);
  }
  const std::string proto = std::to_string(seeds) + " seeds, S=10 states, " +
                            std::to_string(epochs) + " epochs, tau=S_t=10, eta=" +
                            fmt(kMdpEtaScale) + "/L";
  return {
      at_most("mdp seed-averaged F never increases across epochs", increases, 0,
              "epochs where the mean F rose, " + std::to_string(counted) +
                  " transitions above 1e-24 F0; worst epoch ratio " + fmt(worst_step) + ", " +
                  proto),
      at_most("mdp every seed reaches F <= 1e-3 F(w0)", worst_final, 1e-3,
              "max F(w_final)/F(w0), " + proto),
  };
}

std::vector<CheckResult> verify_suite(const std::string& selector) {
  std::vector<CheckResult> out;
  auto append = [&](std::vector<CheckResult> more) {
    out.insert(out.end(), more.begin(), more.end());
  };
  const bool all = selector == "all";
  if (!all && selector != "gradients" && selector != "mse-lemmas" && selector != "rates" &&
      selector != "prox")
    throw std::invalid_argument("unknown selector '" + selector +
                                "' (gradients | mse-lemmas | rates | prox | all)");
  if (all || selector == "prox") append(check_prox(kVerifySeed));
  if (all || selector == "gradients") {
    append(check_gradients(20, kVerifySeed));
    out.push_back(check_fullbatch_degeneracy(64, 100));
  }
  if (all || selector == "mse-lemmas") append(check_mse_bounds(10000, kVerifySeed));
  if (all || selector == "rates") {
    append(check_constant_finite_rate({16, 64, 256}, 20, 50));
    out.push_back(check_gradient_dominant_restart(200, 5));
    out.push_back(check_strongly_convex_restart_expectation(100, 5, 1e-3));
    out.push_back(check_strongly_convex_restart_finite(100, 5));
  }
  return out;
}

}  // namespace civr::harness
