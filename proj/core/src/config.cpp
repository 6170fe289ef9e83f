#include "lagcast/config.hpp"

#include <functional>
#include <map>
#include <sstream>

#include "lagcast/csv.hpp"
#include "lagcast/error.hpp"
#include "lagcast/text.hpp"

namespace lagcast {

namespace {

struct Line {
  std::string_view source;
  int number = 0;
};

[[noreturn]] void bad_value(const Line& line, std::string_view key, std::string_view value, std::string_view expected) {
  fail(ErrorKind::ParseError, std::string(line.source) + ":" + std::to_string(line.number) + ": " + std::string(key) +
                                  " = '" + std::string(value) + "' is not " + std::string(expected));
}

int as_int(const Line& line, std::string_view key, std::string_view value) {
  const auto v = parse_int(value);
  if (!v || *v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) {
    bad_value(line, key, value, "an integer");
  }
  return static_cast<int>(*v);
}

std::uint64_t as_seed(const Line& line, std::string_view key, std::string_view value) {
  const auto v = parse_int(value);
  if (!v || *v < 0) bad_value(line, key, value, "a non-negative integer");
  return static_cast<std::uint64_t>(*v);
}

double as_double(const Line& line, std::string_view key, std::string_view value) {
  const auto v = parse_double(value);
  if (!v) bad_value(line, key, value, "a number");
  return *v;
}

bool as_bool(const Line& line, std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(line, key, value, "a boolean");
}

template <typename F>
auto rethrow_as_parse(const Line& line, std::string_view key, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    fail(ErrorKind::ParseError,
         std::string(line.source) + ":" + std::to_string(line.number) + ": " + std::string(key) + ": " + e.what());
  }
}

MonthIndex as_month(const Line& line, std::string_view key, std::string_view value) {
  return rethrow_as_parse(line, key, [&] { return MonthIndex::parse(value); });
}

BasisSpec as_basis(const Line& line, std::string_view key, std::string_view value) {
  return rethrow_as_parse(line, key, [&] {
    BasisSpec s = BasisSpec::parse(value);
    s.validate();
    return s;
  });
}

std::vector<Method> as_methods(const Line& line, std::string_view key, std::string_view value) {
  std::vector<Method> out;
  for (const auto& part : split(value, ',')) {
    const Method m = rethrow_as_parse(line, key, [&] { return parse_method(trim(part)); });
    for (Method seen : out) {
      if (seen == m) bad_value(line, key, value, "a list without duplicates");
    }
    out.push_back(m);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const Line&, std::string_view key, std::string_view value,
                                  const std::filesystem::path& base)>;

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view value) {
  std::filesystem::path p{std::string(value)};
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    t["data.cases"] = [](RunConfig& c, const Line&, auto, auto v, const auto& b) { c.cases = resolve(b, v); };
    t["data.population"] = [](RunConfig& c, const Line&, auto, auto v, const auto& b) { c.population = resolve(b, v); };
    t["data.climate"] = [](RunConfig& c, const Line&, auto, auto v, const auto& b) { c.climate = resolve(b, v); };
    t["output"] = [](RunConfig& c, const Line&, auto, auto v, const auto& b) { c.output = resolve(b, v); };

    t["simulate.cantons"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.sim.cantons = as_int(l, k, v); };
    t["simulate.months"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.sim.months = as_int(l, k, v); };
    t["simulate.start"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.sim.start = as_month(l, k, v); };
    t["simulate.seed"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.sim_seed = as_seed(l, k, v); };
    t["simulate.nu"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.sim.nu = as_double(l, k, v); };
    t["simulate.sigma"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.sim.sigma = as_double(l, k, v); };
    t["simulate.intercept"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.sim.intercept = as_double(l, k, v); };
    t["simulate.rr_lag_effect"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.sim.rr_lag_effect = as_double(l, k, v); };
    t["simulate.seasonal_amplitude"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) {
      c.sim.seasonal_amplitude = as_double(l, k, v);
    };
    t["simulate.incidence"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.sim.incidence = as_double(l, k, v); };

    for (std::size_t j = 0; j < kClimateCount; ++j) {
      t["basis." + std::string(kClimateNames[j])] = [j](RunConfig& c, const Line& l, auto k, auto v, const auto&) {
        c.spec.plans[j].var = as_basis(l, k, v);
      };
    }
    t["lag.basis"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) {
      const BasisSpec s = as_basis(l, k, v);
      for (auto& plan : c.spec.plans) plan.lag = s;
    };
    t["max_lag"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.spec.max_lag = as_int(l, k, v); };
    t["method"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.spec.methods = as_methods(l, k, v); };
    t["train.start"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.train_start = as_month(l, k, v); };
    t["train.end"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.train_end = as_month(l, k, v); };
    t["test.start"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.test_start = as_month(l, k, v); };
    t["test.end"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.test_end = as_month(l, k, v); };
    t["horizon"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.spec.horizon = as_int(l, k, v); };
    t["bootstrap.replicates"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) {
      c.spec.bootstrap_replicates = as_int(l, k, v);
    };
    t["bootstrap.block"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.spec.block_length = as_int(l, k, v); };
    t["seed"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.spec.seed = as_seed(l, k, v); };
    t["rf.trees"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.spec.forest.n_trees = as_int(l, k, v); };
    t["rf.mtry"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.spec.forest.mtry = as_int(l, k, v); };
    t["rf.min_node_size"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) {
      c.spec.forest.min_node_size = as_int(l, k, v);
    };
    t["var.p_max"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.spec.var_p_max = as_int(l, k, v); };
    t["var.standardize"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.spec.var_standardize = as_bool(l, k, v); };
    t["var.trend"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.spec.var_spec.trend = as_bool(l, k, v); };
    t["var.seasonal"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.spec.var_spec.seasonal = as_bool(l, k, v); };
    t["gamlss.point"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) {
      c.spec.point = rethrow_as_parse(l, k, [&] { return parse_point_functional(v); });
    };
    t["gamlss.max_iterations"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) {
      c.spec.zaga.max_iterations = as_int(l, k, v);
    };
    t["metrics.alpha"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.spec.alpha = as_double(l, k, v); };
    t["threads"] = [](RunConfig& c, const Line& l, auto k, auto v, const auto&) { c.threads = as_int(l, k, v); };
    return t;
  }();
  return table;
}

}  // namespace

void RunConfig::validate() const {
  if (simulate && has_data_paths()) {
    fail(ErrorKind::ConstraintViolation, "config sets both data paths and a simulate block");
  }
  if (!simulate) {
    if (!has_data_paths()) {
      fail(ErrorKind::ConstraintViolation,
           "no input data: set data.cases, data.population and data.climate, or a simulate.* block");
    }
    if (!cases || !population || !climate) {
      fail(ErrorKind::ConstraintViolation, "data.cases, data.population and data.climate must all be set");
    }
  } else {
    sim.validate();
  }
  if (train_start && train_end && *train_end < *train_start) {
    fail(ErrorKind::ConstraintViolation, "train.end precedes train.start");
  }
  if (test_start && test_end && *test_end < *test_start) {
    fail(ErrorKind::ConstraintViolation, "test.end precedes test.start");
  }
  if (train_end && test_start && *test_start != train_end->plus(1)) {
    fail(ErrorKind::ConstraintViolation, "test.start " + test_start->to_string() + " must follow train.end " +
                                             train_end->to_string() + " directly");
  }
  if (test_start && test_end && spec.horizon != static_cast<int>(*test_end - *test_start) + 1) {
    fail(ErrorKind::ConstraintViolation, "horizon disagrees with the test window length");
  }
  if (spec.horizon < 1) fail(ErrorKind::ConstraintViolation, "horizon must be >= 1");
  if (spec.bootstrap_replicates < 0) fail(ErrorKind::ConstraintViolation, "bootstrap.replicates must be >= 0");
  if (spec.block_length < 1) fail(ErrorKind::ConstraintViolation, "bootstrap.block must be >= 1");
  if (spec.max_lag < 0) fail(ErrorKind::ConstraintViolation, "max_lag must be >= 0");
  if (spec.methods.empty()) fail(ErrorKind::ConstraintViolation, "method list is empty");
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) fail(ErrorKind::ConstraintViolation, "metrics.alpha must lie in (0, 1)");
  if (spec.forest.n_trees < 1) fail(ErrorKind::ConstraintViolation, "rf.trees must be >= 1");
  if (spec.forest.mtry < 0) fail(ErrorKind::ConstraintViolation, "rf.mtry must be >= 0");
  if (spec.forest.min_node_size < 1) fail(ErrorKind::ConstraintViolation, "rf.min_node_size must be >= 1");
  if (spec.var_p_max < 1) fail(ErrorKind::ConstraintViolation, "var.p_max must be >= 1");
  if (spec.zaga.max_iterations < 1) fail(ErrorKind::ConstraintViolation, "gamlss.max_iterations must be >= 1");
  if (threads < 0) fail(ErrorKind::ConstraintViolation, "threads must be >= 0");
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir, std::string_view source) {
  RunConfig config;
  std::map<std::string, int, std::less<>> seen;
  bool horizon_set = false;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string_view line_text = trim(raw);
    if (line_text.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const Line line{source, number};
    const auto eq = line_text.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorKind::ParseError, std::string(source) + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string_view key = trim(line_text.substr(0, eq));
    const std::string_view value = trim(line_text.substr(eq + 1));
    if (key.empty() || value.empty()) {
      fail(ErrorKind::ParseError, std::string(source) + ":" + std::to_string(number) + ": empty key or value");
    }
    const auto it = setters().find(key);
    if (it == setters().end()) {
      fail(ErrorKind::UnknownKey, std::string(source) + ":" + std::to_string(number) + ": unknown key '" +
                                      std::string(key) + "'");
    }
    if (const auto prev = seen.find(key); prev != seen.end()) {
      fail(ErrorKind::ParseError, std::string(source) + ":" + std::to_string(number) + ": '" + std::string(key) +
                                      "' already set on line " + std::to_string(prev->second));
    }
    seen.emplace(std::string(key), number);
    it->second(config, line, key, value, base_dir);
    if (key.starts_with("simulate.")) config.simulate = true;
    if (key == "horizon") horizon_set = true;
    if (end == text.size()) break;
  }
  if (config.test_start && config.test_end && !horizon_set) {
    config.spec.horizon = static_cast<int>(*config.test_end - *config.test_start) + 1;
  }
  config.validate();
  for (const auto* p : {&config.cases, &config.population, &config.climate}) {
    if (*p && !std::filesystem::exists(**p)) fail(ErrorKind::MissingFile, "data file not found: " + (*p)->string());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  return parse_config(text, path.parent_path(), path.string());
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream out;
  auto put = [&](std::string_view key, const std::string& value) { out << key << " = " << value << '\n'; };
  if (c.cases) put("data.cases", c.cases->generic_string());
  if (c.population) put("data.population", c.population->generic_string());
  if (c.climate) put("data.climate", c.climate->generic_string());
  if (c.simulate) {
    put("simulate.cantons", std::to_string(c.sim.cantons));
    put("simulate.months", std::to_string(c.sim.months));
    put("simulate.start", c.sim.start.to_string());
    put("simulate.seed", std::to_string(c.sim_seed));
    put("simulate.nu", format_double_shortest(c.sim.nu));
    put("simulate.sigma", format_double_shortest(c.sim.sigma));
    put("simulate.intercept", format_double_shortest(c.sim.intercept));
    put("simulate.rr_lag_effect", format_double_shortest(c.sim.rr_lag_effect));
    put("simulate.seasonal_amplitude", format_double_shortest(c.sim.seasonal_amplitude));
    put("simulate.incidence", format_double_shortest(c.sim.incidence));
  }
  put("output", c.output.generic_string());
  for (std::size_t j = 0; j < kClimateCount; ++j) put("basis." + std::string(kClimateNames[j]), c.spec.plans[j].var.to_string());
  put("lag.basis", c.spec.plans[0].lag.to_string());
  put("max_lag", std::to_string(c.spec.max_lag));
  std::string methods;
  for (Method m : c.spec.methods) methods += (methods.empty() ? "" : ",") + std::string(to_string(m));
  put("method", methods);
  if (c.train_start) put("train.start", c.train_start->to_string());
  if (c.train_end) put("train.end", c.train_end->to_string());
  if (c.test_start) put("test.start", c.test_start->to_string());
  if (c.test_end) put("test.end", c.test_end->to_string());
  put("horizon", std::to_string(c.spec.horizon));
  put("bootstrap.replicates", std::to_string(c.spec.bootstrap_replicates));
  put("bootstrap.block", std::to_string(c.spec.block_length));
  put("seed", std::to_string(c.spec.seed));
  put("rf.trees", std::to_string(c.spec.forest.n_trees));
  put("rf.mtry", std::to_string(c.spec.forest.mtry));
  put("rf.min_node_size", std::to_string(c.spec.forest.min_node_size));
  put("var.p_max", std::to_string(c.spec.var_p_max));
  put("var.standardize", c.spec.var_standardize ? "true" : "false");
  put("var.trend", c.spec.var_spec.trend ? "true" : "false");
  put("var.seasonal", c.spec.var_spec.seasonal ? "true" : "false");
  put("gamlss.point", std::string(to_string(c.spec.point)));
  put("gamlss.max_iterations", std::to_string(c.spec.zaga.max_iterations));
  put("metrics.alpha", format_double_shortest(c.spec.alpha));
  put("threads", std::to_string(c.threads));
  return out.str();
}

CantonSpec resolve_spec(const RunConfig& config, const MonthlyPanel& panel) {
  if (panel.month_count() == 0) fail(ErrorKind::ConstraintViolation, "panel has no months");
  CantonSpec spec = config.spec;
  const MonthIndex first = panel.first_month();
  const MonthIndex last = panel.last_month();
  MonthIndex test_start = config.test_start ? *config.test_start
                          : config.train_end ? config.train_end->plus(1)
                          : config.test_end  ? config.test_end->plus(1 - spec.horizon)
                                             : last.plus(1 - spec.horizon);
  spec.train_start = config.train_start.value_or(first);
  spec.train_end = config.train_end.value_or(test_start.plus(-1));
  if (test_start != spec.train_end.plus(1)) {
    fail(ErrorKind::ConstraintViolation, "test window must start right after the training window");
  }
  const MonthIndex test_end = test_start.plus(spec.horizon - 1);
  if (spec.train_start < first || test_end > last) {
    fail(ErrorKind::ConstraintViolation, "windows " + spec.train_start.to_string() + ".." + test_end.to_string() +
                                             " fall outside the panel range " + first.to_string() + ".." +
                                             last.to_string());
  }
  spec.validate();
  return spec;
}

}  // namespace lagcast
