#include "lagcast/panel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "lagcast/error.hpp"

namespace lagcast {

double ClimateRecord::operator[](std::size_t i) const noexcept {
  switch (i) {
    case 0: return precip;
    case 1: return ssta;
    case 2: return ndvi;
    case 3: return lst;
    default: return tna;
  }
}

double& ClimateRecord::operator[](std::size_t i) noexcept {
  switch (i) {
    case 0: return precip;
    case 1: return ssta;
    case 2: return ndvi;
    case 3: return lst;
    default: return tna;
  }
}

bool ClimateRecord::finite() const noexcept {
  return std::isfinite(precip) && std::isfinite(ssta) && std::isfinite(ndvi) && std::isfinite(lst) &&
         std::isfinite(tna);
}

void CantonSeries::validate() const {
  if (cases.size() != months.size() || population.size() != months.size()) {
    fail(ErrorKind::ConstraintViolation, canton_id + ": months/cases/population lengths differ");
  }
  for (std::size_t t = 1; t < months.size(); ++t) {
    if (months[t] - months[t - 1] != 1) {
      fail(ErrorKind::ConstraintViolation, canton_id + ": months not consecutive at " + months[t].to_string());
    }
  }
  for (std::size_t t = 0; t < months.size(); ++t) {
    if (cases[t] < 0) fail(ErrorKind::ConstraintViolation, canton_id + ": negative cases in " + months[t].to_string());
    if (population[t] <= 0) {
      fail(ErrorKind::ConstraintViolation, canton_id + ": non-positive population in " + months[t].to_string());
    }
  }
}

const CantonData& MonthlyPanel::canton(std::string_view canton_id) const {
  const auto it = cantons.find(canton_id);
  if (it == cantons.end()) fail(ErrorKind::UnknownCanton, "no canton '" + std::string(canton_id) + "' in panel");
  return it->second;
}

namespace {

CantonSeries slice(const CantonSeries& s, std::size_t begin, std::size_t end) {
  CantonSeries out;
  out.canton_id = s.canton_id;
  out.months.assign(s.months.begin() + static_cast<long>(begin), s.months.begin() + static_cast<long>(end));
  out.cases.assign(s.cases.begin() + static_cast<long>(begin), s.cases.begin() + static_cast<long>(end));
  out.population.assign(s.population.begin() + static_cast<long>(begin),
                        s.population.begin() + static_cast<long>(end));
  return out;
}

}  // namespace

MonthlyPanel MonthlyPanel::window(MonthIndex from, MonthIndex to) const {
  if (national.months.empty() || from < first_month() || to > last_month() || to < from) {
    fail(ErrorKind::MissingMonths, "window " + from.to_string() + ".." + to.to_string() + " outside panel range");
  }
  const auto begin = static_cast<std::size_t>(from - first_month());
  const auto end = static_cast<std::size_t>(to - first_month()) + 1;
  MonthlyPanel out;
  out.national = slice(national, begin, end);
  for (const auto& [id, data] : cantons) {
    CantonData d;
    d.series = slice(data.series, begin, end);
    d.climate.assign(data.climate.begin() + static_cast<long>(begin), data.climate.begin() + static_cast<long>(end));
    out.cantons.emplace(id, std::move(d));
  }
  return out;
}

void MonthlyPanel::validate() const {
  national.validate();
  for (const auto& [id, data] : cantons) {
    data.series.validate();
    if (data.series.months != national.months) {
      fail(ErrorKind::ConstraintViolation, id + ": month range differs from national series");
    }
    if (data.climate.size() != data.series.months.size()) {
      fail(ErrorKind::ConstraintViolation, id + ": climate length differs from months");
    }
    for (std::size_t t = 0; t < data.climate.size(); ++t) {
      if (!data.climate[t].finite()) {
        fail(ErrorKind::ConstraintViolation, id + ": non-finite climate value in " + data.series.months[t].to_string());
      }
      if (data.series.cases[t] > national.cases[t] || data.series.population[t] > national.population[t]) {
        fail(ErrorKind::ConstraintViolation,
             id + ": canton exceeds national totals in " + data.series.months[t].to_string());
      }
    }
  }
}

RiskSeries compute_relative_risk(const MonthlyPanel& panel, std::string_view canton_id) {
  const auto& data = panel.canton(canton_id);
  const auto& s = data.series;
  const auto& n = panel.national;
  RiskSeries out;
  out.canton_id = s.canton_id;
  out.months = s.months;
  out.rr.resize(s.months.size());
  for (std::size_t t = 0; t < s.months.size(); ++t) {
    if (n.cases[t] <= 0) {
      fail(ErrorKind::ZeroNationalCases, "national cases are zero in " + n.months[t].to_string());
    }
    const double local = static_cast<double>(s.cases[t]) / static_cast<double>(s.population[t]);
    const double national = static_cast<double>(n.cases[t]) / static_cast<double>(n.population[t]);
    out.rr[t] = local / national;
  }
  return out;
}

namespace {

template <typename Value>
using KeyedTable = std::map<std::string, std::map<long, Value>, std::less<>>;

template <typename Row, typename Get>
auto index_rows(std::span<const Row> rows, std::string_view table, Get get) {
  KeyedTable<decltype(get(rows[0]))> out;
  for (const auto& row : rows) {
    auto& series = out[row.canton];
    const auto [it, inserted] = series.emplace(row.month.ordinal(), get(row));
    if (!inserted) {
      fail(ErrorKind::DuplicateKey,
           std::string(table) + " has duplicate row for (" + row.canton + ", " + row.month.to_string() + ")");
    }
  }
  return out;
}

std::string month_list(const std::vector<long>& ordinals) {
  std::string out;
  for (std::size_t i = 0; i < ordinals.size(); ++i) {
    if (i) out += ", ";
    out += MonthIndex::from_ordinal(ordinals[i]).to_string();
  }
  return out;
}

}  // namespace

AlignedPanel align_panel(std::span<const CountRow> cases, std::span<const CountRow> population,
                         std::span<const ClimateRow> climate) {
  const auto case_idx = index_rows(cases, "cases", [](const CountRow& r) { return r.value; });
  const auto pop_idx = index_rows(population, "population", [](const CountRow& r) { return r.value; });
  const auto clim_idx = index_rows(climate, "climate", [](const ClimateRow& r) { return r.record; });

  const std::string national_id(kNationalId);
  if (!case_idx.contains(national_id) || !pop_idx.contains(national_id)) {
    fail(ErrorKind::MissingMonths, "national totals (" + national_id + ") missing from cases or population table");
  }
  std::set<std::string> ids;
  for (const auto& [id, _] : case_idx) {
    if (id != national_id) ids.insert(id);
  }
  for (const auto& [id, _] : pop_idx) {
    if (id != national_id) ids.insert(id);
  }
  for (const auto& [id, _] : clim_idx) {
    if (id != national_id) ids.insert(id);
  }
  if (ids.empty()) fail(ErrorKind::MissingMonths, "no canton rows in input tables");

  long lo = std::numeric_limits<long>::min();
  long hi = std::numeric_limits<long>::max();
  std::set<long> all_months;
  auto absorb = [&](const auto& table, const std::string& id, std::string_view name) {
    const auto it = table.find(id);
    if (it == table.end() || it->second.empty()) {
      fail(ErrorKind::MissingMonths, id + ": no rows in " + std::string(name) + " table");
    }
    lo = std::max(lo, it->second.begin()->first);
    hi = std::min(hi, it->second.rbegin()->first);
    for (const auto& [m, _] : it->second) all_months.insert(m);
  };
  absorb(case_idx, national_id, "cases");
  absorb(pop_idx, national_id, "population");
  for (const auto& id : ids) {
    absorb(case_idx, id, "cases");
    absorb(pop_idx, id, "population");
    absorb(clim_idx, id, "climate");
  }
  if (lo > hi) fail(ErrorKind::MissingMonths, "tables share no common month range");

  auto check_complete = [&](const auto& table, const std::string& id, std::string_view name) {
    const auto& series = table.find(id)->second;
    std::vector<long> missing;
    for (long m = lo; m <= hi; ++m) {
      if (!series.contains(m)) missing.push_back(m);
    }
    if (!missing.empty()) {
      fail(ErrorKind::MissingMonths, id + ": " + std::string(name) + " table missing " + month_list(missing));
    }
  };
  check_complete(case_idx, national_id, "cases");
  check_complete(pop_idx, national_id, "population");
  for (const auto& id : ids) {
    check_complete(case_idx, id, "cases");
    check_complete(pop_idx, id, "population");
    check_complete(clim_idx, id, "climate");
  }

  AlignedPanel out;
  for (long m : all_months) {
    if (m < lo || m > hi) out.dropped_months.push_back(MonthIndex::from_ordinal(m));
  }
  auto build_series = [&](const std::string& id) {
    CantonSeries s;
    s.canton_id = id;
    const auto& c = case_idx.find(id)->second;
    const auto& p = pop_idx.find(id)->second;
    for (long m = lo; m <= hi; ++m) {
      s.months.push_back(MonthIndex::from_ordinal(m));
      s.cases.push_back(c.at(m));
      s.population.push_back(p.at(m));
    }
    return s;
  };
  out.panel.national = build_series(national_id);
  for (const auto& id : ids) {
    CantonData d;
    d.series = build_series(id);
    const auto& cl = clim_idx.find(id)->second;
    for (long m = lo; m <= hi; ++m) d.climate.push_back(cl.at(m));
    out.panel.cantons.emplace(id, std::move(d));
  }
  out.panel.validate();
  return out;
}

LagMatrix lag_matrix(std::span<const double> x, int max_lag) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (max_lag < 0 || max_lag >= n) {
    fail(ErrorKind::LagTooLarge,
         "max lag " + std::to_string(max_lag) + " requires more than " + std::to_string(n) + " observations");
  }
  LagMatrix out;
  out.first_complete = max_lag;
  out.values.setConstant(n, max_lag + 1, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index l = 0; l <= std::min<Eigen::Index>(t, max_lag); ++l) {
      out.values(t, l) = x[static_cast<std::size_t>(t - l)];
    }
  }
  return out;
}

}  // namespace lagcast
