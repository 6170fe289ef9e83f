#include "lagcast_cli/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>

#include "lagcast/config.hpp"
#include "lagcast/csv.hpp"
#include "lagcast/error.hpp"
#include "lagcast/parallel.hpp"
#include "lagcast/pipeline.hpp"
#include "lagcast/simulate.hpp"
#include "lagcast/tables.hpp"

namespace lagcast::cli {

namespace fs = std::filesystem;

namespace {

struct Run {
  RunConfig config;
  MonthlyPanel panel;
  CantonSpec spec;
};

Run prepare(const std::string& config_path, const std::string& output_override) {
  Run run;
  run.config = load_config(config_path);
  if (!output_override.empty()) run.config.output = output_override;
  set_thread_count(static_cast<std::size_t>(run.config.threads));
  run.panel = load_tables(run.config);
  run.spec = resolve_spec(run.config, run.panel);
  return run;
}

std::vector<std::string> canton_ids(const MonthlyPanel& panel) {
  std::vector<std::string> ids;
  for (const auto& [id, _] : panel.cantons) ids.push_back(id);
  return ids;
}

fs::path fit_dir(const Run& run, const std::string& canton) { return run.config.output / "fit" / canton; }

std::string artifact_name(Method m) { return std::string(to_string(m)) + ".txt"; }

void cmd_simulate(std::uint64_t seed, int cantons, int months, const fs::path& out_dir, std::ostream& out) {
  SimConfig sim;
  sim.cantons = cantons;
  sim.months = months;
  const SimulatedPanel result = simulate_panel(sim, seed);
  const PanelTables tables = panel_tables(result.panel);
  write_file(out_dir / "cases.csv", to_csv(tables.cases));
  write_file(out_dir / "population.csv", to_csv(tables.population));
  write_file(out_dir / "climate.csv", to_csv(tables.climate));
  write_file(out_dir / "ground_truth.csv", to_csv(ground_truth_table(result)));

  RunConfig cfg;
  cfg.cases = "cases.csv";
  cfg.population = "population.csv";
  cfg.climate = "climate.csv";
  cfg.output = "out";
  cfg.spec.seed = seed;
  write_file(out_dir / "lagcast.cfg", to_config_text(cfg));
  out << "simulate: " << cantons << " cantons x " << months << " months -> " << out_dir.string() << '\n';
}

void cmd_fit(const Run& run, std::ostream& out) {
  const auto ids = canton_ids(run.panel);
  std::vector<std::optional<CantonFit>> fits(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) { fits[i] = fit_canton(run.panel, ids[i], run.spec); });
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const CantonFit& fit = *fits[i];
    const fs::path dir = fit_dir(run, ids[i]);
    write_file(dir / "knots.txt", serialize_variable_bases(fit));
    for (const auto& m : fit.methods) {
      write_file(dir / artifact_name(m.method), m.zaga ? serialize_fit(*m.zaga) : serialize_forest(*m.forest));
    }
    write_file(run.config.output / "plots" / (ids[i] + "_train.csv"), to_csv(train_fit_table(fit)));
  }
  out << "fit: " << ids.size() << " cantons -> " << (run.config.output / "fit").string() << '\n';
}

std::string require_file(const fs::path& path, std::string_view needed_by) {
  if (!fs::exists(path)) {
    fail(ErrorKind::MissingFile, std::string(needed_by) + " needs " + path.string() + "; run the previous step first");
  }
  return read_file(path);
}

void cmd_forecast(const Run& run, std::ostream& out) {
  const auto ids = canton_ids(run.panel);
  struct Slot {
    std::vector<ForecastResult> forecasts;
    CsvTable climate;
  };
  std::vector<Slot> slots(ids.size());
  // Artifacts are read up front so a missing file is reported before any work starts.
  std::vector<std::vector<VariableBasis>> bases(ids.size());
  std::vector<std::vector<MethodFit>> methods(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const fs::path dir = fit_dir(run, ids[i]);
    const fs::path knots = dir / "knots.txt";
    bases[i] = deserialize_variable_bases(require_file(knots, "forecast"), knots.string());
    for (Method m : run.spec.methods) {
      const std::string text = require_file(dir / artifact_name(m), "forecast");
      MethodFit mf;
      mf.method = m;
      if (m == Method::gamlss) {
        mf.zaga = deserialize_fit(text);
      } else {
        mf.forest = deserialize_forest(text);
      }
      methods[i].push_back(std::move(mf));
    }
  }
  parallel_for(ids.size(), [&](std::size_t i) {
    const CantonFit fit = rebuild_canton(run.panel, ids[i], run.spec, std::move(bases[i]), std::move(methods[i]));
    const ClimateForecast climate = forecast_climate(fit, run.spec);
    for (const auto& m : fit.methods) slots[i].forecasts.push_back(forecast_method(fit, m, climate, run.spec));
    slots[i].climate = climate_forecast_table(ids[i], climate.forecast);
  });
  std::vector<ForecastResult> all;
  CsvTable climate;
  for (auto& s : slots) {
    for (auto& f : s.forecasts) all.push_back(std::move(f));
    if (climate.header.empty()) climate.header = s.climate.header;
    for (auto& row : s.climate.rows) climate.rows.push_back(std::move(row));
  }
  write_file(run.config.output / "forecast.csv", to_csv(forecast_table(all)));
  write_file(run.config.output / "climate_forecast.csv", to_csv(climate));
  out << "forecast: " << all.size() << " canton-method forecasts -> " << (run.config.output / "forecast.csv").string()
      << '\n';
}

void cmd_evaluate(const Run& run, std::ostream& out) {
  const fs::path path = run.config.output / "forecast.csv";
  const auto forecasts = parse_forecast_table(parse_csv(require_file(path, "evaluate"), path.string()), path.string());
  const auto reports = evaluate(forecasts, run.panel, run.spec.alpha);
  for (const auto& r : reports) {
    if (!r.scorable) {
      out << "warning: " << r.canton_id << " has zero mean observed RR over the test window; metrics are nan\n";
    }
  }
  write_file(run.config.output / "scores.csv", to_csv(score_table(reports)));
  write_file(run.config.output / "scores_by_method.csv", to_csv(score_by_method_table(reports)));
  for (const auto& r : reports) {
    std::vector<ForecastResult> mine;
    for (const auto& f : forecasts) {
      if (f.canton_id == r.canton_id) mine.push_back(f);
    }
    const RiskSeries observed = compute_relative_risk(run.panel, r.canton_id);
    write_file(run.config.output / "plots" / (r.canton_id + "_test.csv"), to_csv(test_plot_table(mine, observed)));
  }
  out << "evaluate: " << reports.size() << " cantons -> " << (run.config.output / "scores.csv").string() << '\n';
}

// Stacks per-canton plot tables into one with a leading canton column.
CsvTable stack_plots(const Run& run, std::string_view suffix) {
  CsvTable all;
  for (const auto& id : canton_ids(run.panel)) {
    const fs::path path = run.config.output / "plots" / (id + std::string(suffix));
    const CsvTable t = parse_csv(require_file(path, "report"), path.string());
    if (all.header.empty()) {
      all.header.push_back("canton");
      all.header.insert(all.header.end(), t.header.begin(), t.header.end());
    }
    for (const auto& row : t.rows) {
      std::vector<std::string> r{id};
      r.insert(r.end(), row.begin(), row.end());
      all.rows.push_back(std::move(r));
    }
  }
  return all;
}

void cmd_report(const Run& run, std::ostream& out) {
  cmd_fit(run, out);
  cmd_forecast(run, out);
  cmd_evaluate(run, out);
  const fs::path report = run.config.output / "report";
  for (const char* name : {"scores.csv", "scores_by_method.csv", "forecast.csv", "climate_forecast.csv"}) {
    write_file(report / name, read_file(run.config.output / name));
  }
  write_file(report / "train_fit.csv", to_csv(stack_plots(run, "_train.csv")));
  write_file(report / "test_plot.csv", to_csv(stack_plots(run, "_test.csv")));
  out << "report: " << report.string() << '\n';
}

}  // namespace

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Climate-lagged relative-risk forecasting", argv.empty() ? "lagcast" : argv.front()};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int cantons = 32;
  int months = 252;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "write a synthetic panel and a matching config");
  simulate->add_option("--seed", seed, "generator seed");
  simulate->add_option("--cantons", cantons, "number of cantons")->check(CLI::PositiveNumber);
  simulate->add_option("--months", months, "number of months")->check(CLI::PositiveNumber);
  simulate->add_option("--out", sim_out, "output directory")->required();

  std::string config_path;
  std::string output;
  auto add_run = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", config_path, "run configuration file")->required();
    sub->add_option("--output,-o", output, "override the configured output directory");
    return sub;
  };
  auto* fit = add_run("fit", "fit GAMLSS / random forest per canton on the training window");
  auto* forecast = add_run("forecast", "forecast the test window from stored fits");
  auto* evaluate_cmd = add_run("evaluate", "score forecasts against observed relative risk");
  auto* report = add_run("report", "fit, forecast and evaluate, then collect outputs in <output>/report");

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  if (!args.empty()) args.pop_back();
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (simulate->parsed()) {
      cmd_simulate(seed, cantons, months, sim_out, out);
      return 0;
    }
    const Run run = prepare(config_path, output);
    if (fit->parsed()) cmd_fit(run, out);
    if (forecast->parsed()) cmd_forecast(run, out);
    if (evaluate_cmd->parsed()) cmd_evaluate(run, out);
    if (report->parsed()) cmd_report(run, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

int run_command(const std::vector<std::string>& argv) { return run_command(argv, std::cout, std::cerr); }

}  // namespace lagcast::cli
