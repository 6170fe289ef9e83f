#include "lagcast/zadist.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "lagcast/error.hpp"
#include "lagcast/text.hpp"

namespace lagcast {

namespace {

template <typename Params>
void validate_params(const Params& p, const char* name) {
  if (!(p.mu > 0.0) || !std::isfinite(p.mu) || !(p.sigma > 0.0) || !std::isfinite(p.sigma) || !(p.nu >= 0.0) ||
      !(p.nu <= 1.0)) {
    fail(ErrorKind::InvalidParams, std::string(name) + "(mu=" + format_double(p.mu) +
                                       ", sigma=" + format_double(p.sigma) + ", nu=" + format_double(p.nu) + ")");
  }
}

void check_y(double y) {
  if (y < 0.0 || std::isnan(y)) fail(ErrorKind::NegativeY, "y = " + format_double(y) + " is negative");
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_point_mass(double nu) { return nu > 0.0 ? std::log(nu) : kNegInf; }
double log_continuous_weight(double nu) { return nu < 1.0 ? std::log1p(-nu) : kNegInf; }

// log Phi(-z) for z >= 0.
double log_normal_upper_tail(double z) {
  if (z < 30.0) return std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
  // Mills ratio expansion.
  const double z2 = z * z;
  return -0.5 * z2 - std::log(z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

void ZagaParams::validate() const { validate_params(*this, "ZAGA"); }
void ZaigParams::validate() const { validate_params(*this, "ZAIG"); }

double gamma_log_density(double y, double mu, double sigma) {
  const double k = 1.0 / (sigma * sigma);
  const double theta = sigma * sigma * mu;
  return (k - 1.0) * std::log(y) - y / theta - k * std::log(theta) - std::lgamma(k);
}

double zaga_log_pdf(double y, const ZagaParams& p) {
  check_y(y);
  p.validate();
  if (y == 0.0) return log_point_mass(p.nu);
  return log_continuous_weight(p.nu) + gamma_log_density(y, p.mu, p.sigma);
}

double zaga_pdf(double y, const ZagaParams& p) { return std::exp(zaga_log_pdf(y, p)); }

double zaga_cdf(double y, const ZagaParams& p) {
  check_y(y);
  p.validate();
  if (y == 0.0) return p.nu;
  if (std::isinf(y)) return 1.0;
  const double k = 1.0 / (p.sigma * p.sigma);
  const double theta = p.sigma * p.sigma * p.mu;
  return p.nu + (1.0 - p.nu) * boost::math::gamma_p(k, y / theta);
}

Moments zaga_moments(const ZagaParams& p) {
  p.validate();
  const double w = 1.0 - p.nu;
  return {w * p.mu, w * p.mu * p.mu * (p.sigma * p.sigma + p.nu)};
}

double zaga_draw(const ZagaParams& p, Rng& rng) {
  if (uniform01(rng) < p.nu) return 0.0;
  const double k = 1.0 / (p.sigma * p.sigma);
  std::gamma_distribution<double> gamma(k, p.sigma * p.sigma * p.mu);
  return gamma(rng);
}

std::vector<double> zaga_sample(const ZagaParams& p, std::size_t n, std::uint64_t seed) {
  p.validate();
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = zaga_draw(p, rng);
  return out;
}

double zaig_log_pdf(double y, const ZaigParams& p) {
  check_y(y);
  p.validate();
  if (y == 0.0) return log_point_mass(p.nu);
  const double s2 = p.sigma * p.sigma;
  const double d = y - p.mu;
  // y^3 underflows near zero; keep it in log form.
  return log_continuous_weight(p.nu) - 0.5 * std::log(2.0 * std::numbers::pi * s2) - 1.5 * std::log(y) -
         d * d / (2.0 * p.mu * p.mu * s2 * y);
}

double zaig_pdf(double y, const ZaigParams& p) { return std::exp(zaig_log_pdf(y, p)); }

double zaig_cdf(double y, const ZaigParams& p) {
  check_y(y);
  p.validate();
  if (y == 0.0) return p.nu;
  if (std::isinf(y)) return 1.0;
  const double lambda = 1.0 / (p.sigma * p.sigma);
  const double a = std::sqrt(lambda / y);
  const double first = normal_cdf(a * (y / p.mu - 1.0));
  const double second = std::exp(2.0 * lambda / p.mu + log_normal_upper_tail(a * (y / p.mu + 1.0)));
  return p.nu + (1.0 - p.nu) * std::min(1.0, first + second);
}

Moments zaig_moments(const ZaigParams& p) {
  p.validate();
  const double w = 1.0 - p.nu;
  return {w * p.mu, w * p.mu * p.mu * (p.sigma * p.sigma * p.mu + p.nu)};
}

double zaig_draw(const ZaigParams& p, Rng& rng) {
  if (uniform01(rng) < p.nu) return 0.0;
  // Michael, Schucany and Haas transformation with multiple roots.
  const double lambda = 1.0 / (p.sigma * p.sigma);
  const double mu = p.mu;
  std::normal_distribution<double> normal(0.0, 1.0);
  const double z = normal(rng);
  const double v = z * z;
  const double y = mu + mu * mu * v / (2.0 * lambda) -
                   mu / (2.0 * lambda) * std::sqrt(4.0 * mu * lambda * v + mu * mu * v * v);
  return uniform01(rng) <= mu / (mu + y) ? y : mu * mu / y;
}

std::vector<double> zaig_sample(const ZaigParams& p, std::size_t n, std::uint64_t seed) {
  p.validate();
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = zaig_draw(p, rng);
  return out;
}

}  // namespace lagcast
