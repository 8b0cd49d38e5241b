#include "civr/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace civr::harness {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    throw ConfigError("bad value for '" + key + "': '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("bad boolean for '" + key + "': '" + text + "'");
}

std::string format_int(std::int64_t v) { return std::to_string(v); }

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::optional<std::string>(const ExperimentConfig&)>;

struct Field {
  std::string key;
  Setter set;
  Getter get;
};

template <typename T>
Field int_field(std::string key, T ExperimentConfig::*member) {
  return {std::move(key),
          [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_number<T>(k, v);
          },
          [member](const ExperimentConfig& c) -> std::optional<std::string> {
            return std::to_string(c.*member);
          }};
}

Field double_field(std::string key, double ExperimentConfig::*member) {
  return {std::move(key),
          [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_number<double>(k, v);
          },
          [member](const ExperimentConfig& c) -> std::optional<std::string> {
            return format_double(c.*member);
          }};
}

Field optional_field(std::string key, std::optional<double> ExperimentConfig::*member) {
  return {std::move(key),
          [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_number<double>(k, v);
          },
          [member](const ExperimentConfig& c) -> std::optional<std::string> {
            if (!(c.*member)) return std::nullopt;
            return format_double(*(c.*member));
          }};
}

Field string_field(std::string key, std::string ExperimentConfig::*member) {
  return {std::move(key),
          [member](ExperimentConfig& c, const std::string&, const std::string& v) { c.*member = v; },
          [member](const ExperimentConfig& c) -> std::optional<std::string> { return c.*member; }};
}

Field bool_field(std::string key, bool ExperimentConfig::*member) {
  return {std::move(key),
          [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_bool(k, v);
          },
          [member](const ExperimentConfig& c) -> std::optional<std::string> {
            return c.*member ? "true" : "false";
          }};
}

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> table = {
      string_field("problem", &C::problem),
      string_field("dataset", &C::dataset),
      int_field("data.rows", &C::data_rows),
      int_field("data.cols", &C::data_cols),
      int_field("data.seed", &C::data_seed),
      int_field("data.take_last", &C::data_take_last),
      string_field("data.scale", &C::data_scale),
      double_field("lambda", &C::lambda),
      string_field("sign_mode", &C::sign_mode),
      string_field("reg", &C::reg),
      double_field("reg.weight", &C::reg_weight),
      double_field("reg.radius", &C::reg_radius),
      int_field("mdp.states", &C::mdp_states),
      int_field("mdp.features", &C::mdp_features),
      double_field("mdp.gamma", &C::mdp_gamma),
      int_field("mdp.seed", &C::mdp_seed),
      bool_field("mdp.realizable", &C::mdp_realizable),
      int_field("synth.d", &C::synth_d),
      int_field("synth.p", &C::synth_p),
      int_field("synth.n", &C::synth_n),
      double_field("synth.sigma_min", &C::synth_sigma_min),
      double_field("synth.sigma_max", &C::synth_sigma_max),
      double_field("synth.heterogeneity", &C::synth_heterogeneity),
      double_field("synth.residual", &C::synth_residual),
      int_field("synth.seed", &C::synth_seed),
      double_field("synth.noise", &C::synth_noise),
      string_field("synth.noise_kind", &C::synth_noise_kind),
      double_field("region.radius", &C::region_radius),
      string_field("x0", &C::x0),
      string_field("algorithm", &C::algorithm),
      string_field("schedule", &C::schedule),
      int_field("schedule.T", &C::schedule_T),
      double_field("schedule.a", &C::schedule_a),
      double_field("schedule.b", &C::schedule_b),
      double_field("schedule.eps", &C::schedule_eps),
      optional_field("schedule.sigma0_sq", &C::schedule_sigma0_sq),
      optional_field("schedule.nu", &C::schedule_nu),
      optional_field("schedule.mu", &C::schedule_mu),
      {"schedule.triples",
       [](C& c, const std::string&, const std::string& v) { c.schedule_triples = parse_triples(v); },
       [](const C& c) -> std::optional<std::string> {
         if (c.schedule_triples.empty()) return std::nullopt;
         return format_triples(c.schedule_triples);
       }},
      optional_field("eta", &C::eta),
      double_field("eta.decay", &C::eta_decay),
      int_field("batch", &C::batch),
      int_field("iters", &C::iters),
      int_field("periods", &C::periods),
      {"seeds",
       [](C& c, const std::string& k, const std::string& v) {
         c.seeds.clear();
         for (const auto& s : split(v, ',')) c.seeds.push_back(parse_number<std::uint64_t>(k, s));
       },
       [](const C& c) -> std::optional<std::string> {
         std::string out;
         for (std::size_t i = 0; i < c.seeds.size(); ++i)
           out += (i ? "," : "") + std::to_string(c.seeds[i]);
         return out;
       }},
      int_field("repetitions", &C::repetitions),
      string_field("output", &C::output),
      int_field("cadence", &C::cadence),
      int_field("workers", &C::workers),
      bool_field("wallclock", &C::wallclock),
  };
  return table;
}

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

void one_of(const std::string& key, const std::string& value, std::set<std::string> allowed) {
  if (allowed.count(value) == 0) throw ConfigError("invalid value for '" + key + "': '" + value + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_triples(const std::vector<EpochParams>& epochs) {
  std::string out = "[";
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto& e = epochs[i];
    if (i) out += ", ";
    out += format_int(e.tau) + ":" +
           (e.anchor.is_full() ? std::string("full") : format_int(e.anchor.count())) + ":" +
           format_int(e.inner_batch);
  }
  return out + "]";
}

std::vector<EpochParams> parse_triples(const std::string& text) {
  std::string body = trim(text);
  if (body.size() < 2 || body.front() != '[' || body.back() != ']')
    throw ConfigError("schedule.triples must be a bracketed list");
  body = body.substr(1, body.size() - 2);
  std::vector<EpochParams> out;
  if (trim(body).empty()) return out;
  for (const auto& item : split(body, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() != 3) throw ConfigError("bad triple '" + item + "', expected tau:B:S");
    const auto tau = parse_number<std::int64_t>("schedule.triples", parts[0]);
    const auto s = parse_number<std::int64_t>("schedule.triples", parts[2]);
    AnchorSize anchor = AnchorSize::full();
    if (parts[1] != "full") {
      const auto b = parse_number<std::int64_t>("schedule.triples", parts[1]);
      if (b <= 0) throw ConfigError("anchor batch must be positive in '" + item + "'");
      anchor = AnchorSize::of(b);
    }
    out.push_back({tau, anchor, s});
  }
  return out;
}

void validate_config(const ExperimentConfig& c) {
  one_of("problem", c.problem, {"portfolio", "mdp", "synthetic"});
  one_of("algorithm", c.algorithm, {"civr", "civr-adp", "restarted", "fullgrad", "plugin-sgd"});
  one_of("data.scale", c.data_scale, {"percent", "raw"});
  one_of("sign_mode", c.sign_mode, {"risk-averse", "paper-literal"});
  one_of("reg", c.reg, {"zero", "l1", "l1-ball"});
  one_of("synth.noise_kind", c.synth_noise_kind, {"uniform", "gaussian"});
  one_of("schedule", c.schedule,
         {"", "constant-finite", "adaptive-finite", "sqrt-growth", "constant-expectation",
          "adaptive-expectation", "restart-gd-finite", "restart-gd-expectation",
          "restart-sc-finite", "restart-sc-expectation", "custom"});

  auto check = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  check(c.data_rows >= 1 && c.data_cols >= 1, "data.rows and data.cols must be positive");
  check(c.data_take_last >= 0, "data.take_last must be nonnegative");
  check(c.lambda >= 0, "lambda must be nonnegative");
  check(c.reg_weight >= 0, "reg.weight must be nonnegative");
  check(c.reg_radius > 0, "reg.radius must be positive");
  check(c.mdp_states >= 1 && c.mdp_features >= 1, "mdp sizes must be positive");
  check(c.mdp_gamma >= 0 && c.mdp_gamma < 1, "mdp.gamma must lie in [0, 1)");
  check(c.synth_d >= 1 && c.synth_p >= 1 && c.synth_n >= 1, "synth sizes must be positive");
  check(c.synth_noise >= 0, "synth.noise must be nonnegative");
  check(c.region_radius > 0, "region.radius must be positive");
  check(!c.eta || *c.eta > 0, "eta must be positive");
  check(c.eta_decay >= 0, "eta.decay must be nonnegative");
  check(c.batch >= 1, "batch must be positive");
  check(c.iters >= 1, "iters must be positive");
  check(c.periods >= 1, "periods must be positive");
  check(c.schedule_T >= 1, "schedule.T must be positive");
  check(c.schedule_eps > 0, "schedule.eps must be positive");
  check(!c.seeds.empty(), "seeds must not be empty");
  check(c.repetitions >= 1, "repetitions must be positive");
  check(c.workers >= 1, "workers must be positive");
  check(c.cadence >= 0, "cadence must be nonnegative");
  check(!c.output.empty(), "output must be set");

  const bool restart_schedule = c.schedule.rfind("restart-", 0) == 0;
  if (c.algorithm == "restarted")
    check(restart_schedule, "algorithm 'restarted' needs a restart-* schedule");
  else if (c.algorithm == "civr" || c.algorithm == "civr-adp")
    check(!restart_schedule, "restart-* schedules need algorithm 'restarted'");
  if (c.schedule == "custom") {
    check(!c.schedule_triples.empty(), "schedule 'custom' needs schedule.triples");
    check(c.eta.has_value(), "schedule 'custom' needs eta");
    for (const auto& e : c.schedule_triples)
      check(e.tau >= 1 && e.inner_batch >= 1 && e.tau <= e.inner_batch,
            "each triple needs 1 <= tau <= S");
  }
  if (c.x0 != "zeros" && c.x0 != "ones" && c.x0 != "uniform") {
    for (const auto& v : split(c.x0, ',')) parse_number<double>("x0", v);
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    const Field* f = find_field(key);
    if (f == nullptr)
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    try {
      f->set(cfg, key, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) {
    const auto v = f.get(cfg);
    if (v) out += f.key + " = " + *v + "\n";
  }
  return out;
}

}  // namespace civr::harness
