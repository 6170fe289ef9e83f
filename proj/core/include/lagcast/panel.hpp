#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lagcast/month.hpp"

namespace lagcast {

inline constexpr std::string_view kNationalId = "__national__";

inline constexpr std::size_t kClimateCount = 5;
inline constexpr std::array<std::string_view, kClimateCount> kClimateNames = {"precip", "ssta", "ndvi", "lst",
                                                                             "tna"};

// One month of climate covariates for a canton.
struct ClimateRecord {
  double precip = 0.0;  // mm/month
  double ssta = 0.0;    // ENSO sea surface temperature anomaly, degC
  double ndvi = 0.0;    // vegetation index
  double lst = 0.0;     // land surface temperature, K
  double tna = 0.0;     // Tropical North Atlantic index, degC

  double operator[](std::size_t i) const noexcept;
  double& operator[](std::size_t i) noexcept;
  bool finite() const noexcept;
};

struct CantonSeries {
  std::string canton_id;
  std::vector<MonthIndex> months;  // strictly increasing, no gaps
  std::vector<std::int64_t> cases;
  std::vector<std::int64_t> population;

  // Throws Error(ConstraintViolation) if an invariant is broken.
  void validate() const;
};

struct CantonData {
  CantonSeries series;
  std::vector<ClimateRecord> climate;
};

// Aligned per-canton monthly panel plus national aggregates. All cantons
// share the national month range.
struct MonthlyPanel {
  std::map<std::string, CantonData, std::less<>> cantons;
  CantonSeries national;

  std::size_t month_count() const noexcept { return national.months.size(); }
  MonthIndex first_month() const { return national.months.front(); }
  MonthIndex last_month() const { return national.months.back(); }

  // Throws Error(UnknownCanton).
  const CantonData& canton(std::string_view canton_id) const;

  // Sub-panel restricted to [from, to]; throws Error(MissingMonths) if the
  // window is not inside the panel.
  MonthlyPanel window(MonthIndex from, MonthIndex to) const;

  void validate() const;
};

struct RiskSeries {
  std::string canton_id;
  std::vector<MonthIndex> months;
  std::vector<double> rr;
};

// rr[t] = (cases_i / pop_i) / (cases_national / pop_national).
// Throws Error(UnknownCanton) or Error(ZeroNationalCases) naming the month.
RiskSeries compute_relative_risk(const MonthlyPanel& panel, std::string_view canton_id);

// Raw long-format rows as read from the input tables.
struct CountRow {
  std::string canton;
  MonthIndex month;
  std::int64_t value = 0;
};

struct ClimateRow {
  std::string canton;
  MonthIndex month;
  ClimateRecord record;
};

struct AlignedPanel {
  MonthlyPanel panel;
  std::vector<MonthIndex> dropped_months;  // months present somewhere but outside the common range
};

// Inner join of the three tables on their common month range. National
// totals come from `kNationalId` rows of the case and population tables.
// Missing rows inside the common range are errors (no imputation).
// Errors: MissingMonths, DuplicateKey, ConstraintViolation.
AlignedPanel align_panel(std::span<const CountRow> cases, std::span<const CountRow> population,
                         std::span<const ClimateRow> climate);

struct LagMatrix {
  // values(t, l) = x[t - l]; entries with t < l are NaN.
  Eigen::MatrixXd values;
  Eigen::Index first_complete = 0;  // rows before this index are incomplete

  bool complete(Eigen::Index t) const noexcept { return t >= first_complete; }
};

// Throws Error(LagTooLarge) unless max_lag < x.size().
LagMatrix lag_matrix(std::span<const double> x, int max_lag);

}  // namespace lagcast
