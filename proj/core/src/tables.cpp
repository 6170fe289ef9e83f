#include "lagcast/tables.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "lagcast/error.hpp"
#include "lagcast/text.hpp"

namespace lagcast {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
  return out;
}

void expect_header(const CsvTable& table, std::string_view expected, std::string_view source) {
  const std::string got = join(table.header);
  if (got != expected) {
    fail(ErrorKind::HeaderMismatch,
         std::string(source) + ": header '" + got + "', expected '" + std::string(expected) + "'");
  }
}

[[noreturn]] void non_numeric(std::string_view source, std::size_t row, std::string_view column, std::string_view value,
                              std::string_view expected) {
  fail(ErrorKind::NonNumericField, std::string(source) + " row " + std::to_string(row + 1) + ": " +
                                       std::string(column) + " '" + std::string(value) + "' is not " +
                                       std::string(expected));
}

MonthIndex row_month(const std::vector<std::string>& row, std::size_t r, std::string_view source) {
  const auto year = parse_int(row[1]);
  if (!year || *year < 1900 || *year > 9999) non_numeric(source, r, "year", row[1], "a year >= 1900");
  const auto month = parse_int(row[2]);
  if (!month || *month < 1 || *month > 12) non_numeric(source, r, "month", row[2], "a month in 1..12");
  return MonthIndex{static_cast<int>(*year), static_cast<int>(*month)};
}

void require_id(const std::vector<std::string>& row, std::size_t r, std::string_view source) {
  if (row[0].empty()) non_numeric(source, r, "canton", row[0], "a canton id");
}

std::string month_text(MonthIndex m) { return m.to_string(); }

MonthIndex parse_month_field(const std::string& text, std::size_t r, std::string_view source) {
  try {
    return MonthIndex::parse(text);
  } catch (const Error&) {
    non_numeric(source, r, "month", text, "a YYYY-MM month");
  }
}

double parse_number(const std::string& text, std::size_t r, std::string_view column, std::string_view source) {
  const auto v = parse_double(text);
  if (!v) non_numeric(source, r, column, text, "a number");
  return *v;
}

}  // namespace

std::vector<CountRow> parse_count_table(const CsvTable& table, std::string_view value_column, std::string_view source) {
  expect_header(table, "canton,year,month," + std::string(value_column), source);
  std::vector<CountRow> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    require_id(row, r, source);
    const auto value = parse_int(row[3]);
    if (!value || *value < 0) non_numeric(source, r, value_column, row[3], "a non-negative integer");
    out.push_back({row[0], row_month(row, r, source), *value});
  }
  return out;
}

std::vector<ClimateRow> parse_climate_table(const CsvTable& table, std::string_view source) {
  expect_header(table, kClimateHeader, source);
  std::vector<ClimateRow> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    require_id(row, r, source);
    ClimateRow c{row[0], row_month(row, r, source), {}};
    for (std::size_t j = 0; j < kClimateCount; ++j) {
      const auto v = parse_double(row[3 + j]);
      if (!v || !std::isfinite(*v)) non_numeric(source, r, kClimateNames[j], row[3 + j], "a finite number");
      c.record[j] = *v;
    }
    out.push_back(c);
  }
  return out;
}

AlignedPanel load_tables(const std::filesystem::path& cases, const std::filesystem::path& population,
                         const std::filesystem::path& climate) {
  const auto case_rows = parse_count_table(read_csv(cases), "cases", cases.string());
  const auto pop_rows = parse_count_table(read_csv(population), "population", population.string());
  const auto climate_rows = parse_climate_table(read_csv(climate), climate.string());
  return align_panel(case_rows, pop_rows, climate_rows);
}

MonthlyPanel load_tables(const RunConfig& config) {
  if (config.simulate) return simulate_panel(config.sim, config.sim_seed).panel;
  if (!config.cases || !config.population || !config.climate) {
    fail(ErrorKind::ConstraintViolation, "config has no data paths");
  }
  return load_tables(*config.cases, *config.population, *config.climate).panel;
}

PanelTables panel_tables(const MonthlyPanel& panel) {
  PanelTables t;
  t.cases.header = split(kCasesHeader, ',');
  t.population.header = split(kPopulationHeader, ',');
  t.climate.header = split(kClimateHeader, ',');
  auto add_counts = [&](const CantonSeries& s) {
    for (std::size_t i = 0; i < s.months.size(); ++i) {
      const auto y = std::to_string(s.months[i].year);
      const auto m = std::to_string(s.months[i].month);
      t.cases.rows.push_back({s.canton_id, y, m, std::to_string(s.cases[i])});
      t.population.rows.push_back({s.canton_id, y, m, std::to_string(s.population[i])});
    }
  };
  add_counts(panel.national);
  for (const auto& [id, data] : panel.cantons) {
    add_counts(data.series);
    for (std::size_t i = 0; i < data.series.months.size(); ++i) {
      std::vector<std::string> row{id, std::to_string(data.series.months[i].year),
                                   std::to_string(data.series.months[i].month)};
      for (std::size_t j = 0; j < kClimateCount; ++j) row.push_back(format_double(data.climate[i][j]));
      t.climate.rows.push_back(std::move(row));
    }
  }
  return t;
}

CsvTable ground_truth_table(const SimulatedPanel& sim) {
  CsvTable t;
  t.header = {"canton", "year", "month", "mu", "latent_rr"};
  const auto& months = sim.panel.national.months;
  for (const auto& truth : sim.truth) {
    for (std::size_t i = 0; i < months.size(); ++i) {
      t.rows.push_back({truth.canton_id, std::to_string(months[i].year), std::to_string(months[i].month),
                        format_double(truth.mu[i]), format_double(truth.latent_rr[i])});
    }
  }
  return t;
}

CsvTable forecast_table(std::span<const ForecastResult> results) {
  CsvTable t;
  t.header = {"canton", "method", "month", "point", "lower95", "upper95"};
  for (const auto& r : results) {
    for (std::size_t s = 0; s < r.months.size(); ++s) {
      t.rows.push_back({r.canton_id, r.method, month_text(r.months[s]), format_double(r.point[s]),
                        format_double(r.lower[s]), format_double(r.upper[s])});
    }
  }
  return t;
}

std::vector<ForecastResult> parse_forecast_table(const CsvTable& table, std::string_view source) {
  expect_header(table, "canton,method,month,point,lower95,upper95", source);
  std::vector<ForecastResult> out;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    require_id(row, r, source);
    const auto key = std::make_pair(row[0], row[1]);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back({row[0], row[1], {}, {}, {}, {}});
    }
    auto& f = out[it->second];
    f.months.push_back(parse_month_field(row[2], r, source));
    f.point.push_back(parse_number(row[3], r, "point", source));
    f.lower.push_back(parse_number(row[4], r, "lower95", source));
    f.upper.push_back(parse_number(row[5], r, "upper95", source));
  }
  return out;
}

CsvTable climate_forecast_table(std::string_view canton_id, const VarForecast& forecast, bool with_header) {
  CsvTable t;
  if (with_header) t.header = {"canton", "series", "month", "mean", "lower95", "upper95"};
  for (Eigen::Index j = 0; j < forecast.mean.cols(); ++j) {
    for (int s = 0; s < forecast.h; ++s) {
      t.rows.push_back({std::string(canton_id), std::string(kClimateNames[static_cast<std::size_t>(j)]),
                        month_text(forecast.months[static_cast<std::size_t>(s)]), format_double(forecast.mean(s, j)),
                        format_double(forecast.lower(s, j)), format_double(forecast.upper(s, j))});
    }
  }
  return t;
}

CsvTable score_table(std::span<const CantonReport> reports) {
  CsvTable t;
  t.header = {"canton", "NRMSE", "NIS95", "best_model"};
  for (const auto& r : reports) {
    if (!r.scorable) {
      t.rows.push_back({r.canton_id, "nan", "nan", r.best_model});
      continue;
    }
    const auto it = std::find_if(r.scores.begin(), r.scores.end(),
                                 [&](const MethodScore& s) { return s.method == r.best_model; });
    if (it == r.scores.end()) fail(ErrorKind::MisalignedScores, r.canton_id + ": best model has no score");
    t.rows.push_back({r.canton_id, format_double(it->nrmse), format_double(it->nis), r.best_model});
  }
  return t;
}

CsvTable score_by_method_table(std::span<const CantonReport> reports) {
  CsvTable t;
  t.header = {"canton", "method", "NRMSE", "NIS95"};
  for (const auto& r : reports) {
    for (const auto& s : r.scores) t.rows.push_back({r.canton_id, s.method, format_double(s.nrmse), format_double(s.nis)});
  }
  return t;
}

CsvTable train_fit_table(const CantonFit& fit) {
  CsvTable t;
  t.header = {"month", "observed"};
  for (const auto& m : fit.methods) t.header.emplace_back(to_string(m.method));
  for (Eigen::Index i = 0; i < fit.design.y.size(); ++i) {
    std::vector<std::string> row{month_text(fit.design.matrix.months[static_cast<std::size_t>(i)]),
                                 format_double(fit.design.y(i))};
    for (const auto& m : fit.methods) row.push_back(format_double(m.fitted(i)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable test_plot_table(std::span<const ForecastResult> results, const RiskSeries& observed) {
  CsvTable t;
  t.header = {"month", "observed"};
  for (const auto& r : results) {
    for (const char* suffix : {"_point", "_lower95", "_upper95"}) t.header.push_back(r.method + suffix);
  }
  if (results.empty()) return t;
  for (std::size_t s = 0; s < results.front().months.size(); ++s) {
    const MonthIndex month = results.front().months[s];
    const auto it = std::find(observed.months.begin(), observed.months.end(), month);
    if (it == observed.months.end()) {
      fail(ErrorKind::MissingObservations, observed.canton_id + ": no observed RR for " + month.to_string());
    }
    std::vector<std::string> row{month_text(month),
                                 format_double(observed.rr[static_cast<std::size_t>(it - observed.months.begin())])};
    for (const auto& r : results) {
      if (s >= r.months.size() || r.months[s] != month) {
        fail(ErrorKind::MisalignedScores, r.canton_id + ": forecasts of different methods cover different months");
      }
      row.push_back(format_double(r.point[s]));
      row.push_back(format_double(r.lower[s]));
      row.push_back(format_double(r.upper[s]));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string serialize_variable_bases(const CantonFit& fit) {
  std::ostringstream out;
  for (std::size_t j = 0; j < fit.builders.size(); ++j) {
    const auto& vb = fit.builders[j].variable_basis();
    out << kClimateNames[j] << ' ' << vb.spec().to_string() << ' ' << format_double(vb.boundary().lo) << ' '
        << format_double(vb.boundary().hi);
    for (double k : vb.knots()) out << ' ' << format_double(k);
    out << '\n';
  }
  return out.str();
}

std::vector<VariableBasis> deserialize_variable_bases(std::string_view text, std::string_view source) {
  std::vector<VariableBasis> out;
  std::size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ' ');
    auto bad = [&](std::string_view what) -> Error {
      return Error(ErrorKind::ParseError, std::string(source) + ":" + std::to_string(line_no) + ": " + std::string(what));
    };
    if (fields.size() < 4) throw bad("expected '<name> <spec> <lo> <hi> [knots]'");
    if (out.size() >= kClimateCount || fields[0] != kClimateNames[out.size()]) throw bad("unexpected covariate " + fields[0]);
    const BasisSpec spec = BasisSpec::parse(fields[1]);
    const auto lo = parse_double(fields[2]);
    const auto hi = parse_double(fields[3]);
    if (!lo || !hi) throw bad("bad boundary");
    std::vector<double> knots;
    for (std::size_t i = 4; i < fields.size(); ++i) {
      const auto k = parse_double(fields[i]);
      if (!k) throw bad("bad knot " + fields[i]);
      knots.push_back(*k);
    }
    out.push_back(VariableBasis::from_knots(spec, {*lo, *hi}, std::move(knots)));
  }
  if (out.size() != kClimateCount) {
    fail(ErrorKind::ParseError, std::string(source) + ": expected " + std::to_string(kClimateCount) + " variable bases");
  }
  return out;
}

}  // namespace lagcast
