#include "lagcast/metrics.hpp"

#include <cmath>

#include "lagcast/error.hpp"
#include "lagcast/text.hpp"

namespace lagcast {

double ScoredForecast::mean_observed() const {
  double sum = 0.0;
  for (double v : observed) sum += v;
  return sum / static_cast<double>(observed.size());
}

void ScoredForecast::validate() const {
  const auto m = observed.size();
  if (m == 0) fail(ErrorKind::MisalignedScores, "no months to score");
  if (point.size() != m || lower.size() != m || upper.size() != m) {
    fail(ErrorKind::MisalignedScores, "observed, point and interval lengths differ");
  }
  for (std::size_t t = 0; t < m; ++t) {
    if (lower[t] > upper[t]) {
      fail(ErrorKind::MisalignedScores, "interval lower bound exceeds upper bound at month " + std::to_string(t + 1));
    }
  }
}

namespace {

double positive_mean(const ScoredForecast& s) {
  const double mean = s.mean_observed();
  if (!(mean > 0.0)) fail(ErrorKind::ZeroMeanRisk, "mean observed relative risk is " + format_double(mean));
  return mean;
}

}  // namespace

double nrmse(const ScoredForecast& s) {
  s.validate();
  const double mean = positive_mean(s);
  double ss = 0.0;
  for (std::size_t t = 0; t < s.observed.size(); ++t) ss += (s.observed[t] - s.point[t]) * (s.observed[t] - s.point[t]);
  return std::sqrt(ss / (static_cast<double>(s.observed.size()) * mean));
}

double nrmse_conventional(const ScoredForecast& s) {
  s.validate();
  const double mean = positive_mean(s);
  double ss = 0.0;
  for (std::size_t t = 0; t < s.observed.size(); ++t) ss += (s.observed[t] - s.point[t]) * (s.observed[t] - s.point[t]);
  return std::sqrt(ss / static_cast<double>(s.observed.size())) / mean;
}

double nis(const ScoredForecast& s) {
  s.validate();
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) fail(ErrorKind::InvalidAlpha, "alpha must lie in (0, 1), got " + format_double(s.alpha));
  const double mean = positive_mean(s);
  const double penalty = 2.0 / (1.0 - s.alpha);
  double total = 0.0;
  for (std::size_t t = 0; t < s.observed.size(); ++t) {
    const double rr = s.observed[t];
    total += s.upper[t] - s.lower[t];
    if (rr < s.lower[t]) total += penalty * (s.lower[t] - rr);
    if (rr > s.upper[t]) total += penalty * (rr - s.upper[t]);
  }
  return total / (static_cast<double>(s.observed.size()) * mean);
}

MethodScore score_method(std::string method, const ScoredForecast& s) {
  return MethodScore{std::move(method), s.observed, nrmse(s), nis(s)};
}

const MethodScore& best_model(std::span<const MethodScore> scores) {
  if (scores.empty()) fail(ErrorKind::MisalignedScores, "no method scores to compare");
  const MethodScore* best = &scores[0];
  for (const auto& s : scores) {
    if (s.observed != scores[0].observed) {
      fail(ErrorKind::MisalignedScores, "method " + s.method + " was scored on a different observed series");
    }
  }
  for (const auto& s : scores.subspan(1)) {
    if (s.nis < best->nis || (s.nis == best->nis && (s.nrmse < best->nrmse ||
                                                     (s.nrmse == best->nrmse && s.method < best->method)))) {
      best = &s;
    }
  }
  return *best;
}

}  // namespace lagcast
