#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lagcast/config.hpp"
#include "lagcast/csv.hpp"
#include "lagcast/metrics.hpp"
#include "lagcast/panel.hpp"
#include "lagcast/pipeline.hpp"
#include "lagcast/simulate.hpp"

namespace lagcast {

inline constexpr std::string_view kCasesHeader = "canton,year,month,cases";
inline constexpr std::string_view kPopulationHeader = "canton,year,month,population";
inline constexpr std::string_view kClimateHeader = "canton,year,month,precip,ssta,ndvi,lst,tna";

// Errors: HeaderMismatch, NonNumericField (names the 1-based data row).
std::vector<CountRow> parse_count_table(const CsvTable& table, std::string_view value_column,
                                        std::string_view source);
std::vector<ClimateRow> parse_climate_table(const CsvTable& table, std::string_view source);

AlignedPanel load_tables(const std::filesystem::path& cases, const std::filesystem::path& population,
                         const std::filesystem::path& climate);
// Data paths from the config, or a fresh simulation in simulate mode.
MonthlyPanel load_tables(const RunConfig& config);

struct PanelTables {
  CsvTable cases;
  CsvTable population;
  CsvTable climate;
};
PanelTables panel_tables(const MonthlyPanel& panel);

// canton,year,month,mu,latent_rr
CsvTable ground_truth_table(const SimulatedPanel& sim);

// canton,method,month,point,lower95,upper95
CsvTable forecast_table(std::span<const ForecastResult> results);
std::vector<ForecastResult> parse_forecast_table(const CsvTable& table, std::string_view source);

// canton,series,month,mean,lower95,upper95
CsvTable climate_forecast_table(std::string_view canton_id, const VarForecast& forecast, bool with_header = true);

// canton,NRMSE,NIS95,best_model (scores of the best model)
CsvTable score_table(std::span<const CantonReport> reports);
// canton,method,NRMSE,NIS95
CsvTable score_by_method_table(std::span<const CantonReport> reports);

// month,observed,<method>...
CsvTable train_fit_table(const CantonFit& fit);
// month,observed,<method>_point,<method>_lower95,<method>_upper95...
CsvTable test_plot_table(std::span<const ForecastResult> results, const RiskSeries& observed);

// knots text for the five variable bases: "<name> <spec> <lo> <hi> <knots...>"
std::string serialize_variable_bases(const CantonFit& fit);
std::vector<VariableBasis> deserialize_variable_bases(std::string_view text, std::string_view source);

}  // namespace lagcast
