#pragma once

#include <span>
#include <string>
#include <vector>

namespace lagcast {

// Observed and forecast relative risk over m test months with a central
// interval at level alpha.
struct ScoredForecast {
  std::vector<double> observed;
  std::vector<double> point;
  std::vector<double> lower;
  std::vector<double> upper;
  double alpha = 0.95;

  double mean_observed() const;
  // Equal lengths, m >= 1, lower <= upper. Throws Error(MisalignedScores).
  void validate() const;
};

// sqrt( sum (RR_t - RRhat_t)^2 / (m * mean RR) ). Errors: ZeroMeanRisk.
double nrmse(const ScoredForecast& s);

// RMSE / mean RR. Reported for reference only, never used for selection.
double nrmse_conventional(const ScoredForecast& s);

// (1 / (m * mean RR)) sum [ (U - L) + 2/(1-alpha) (L - RR) 1{RR < L}
//                                   + 2/(1-alpha) (RR - U) 1{RR > U} ]
// Errors: ZeroMeanRisk, InvalidAlpha.
double nis(const ScoredForecast& s);

struct MethodScore {
  std::string method;
  std::vector<double> observed;
  double nrmse = 0.0;
  double nis = 0.0;
};

MethodScore score_method(std::string method, const ScoredForecast& s);

// Smallest NIS wins; ties go to smaller NRMSE, then the lexicographically
// smaller method name. Errors: MisalignedScores (no scores, or scores on
// different observed series).
const MethodScore& best_model(std::span<const MethodScore> scores);

}  // namespace lagcast
