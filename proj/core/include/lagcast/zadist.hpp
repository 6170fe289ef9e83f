#pragma once

#include <cstdint>
#include <vector>

#include "lagcast/random.hpp"

namespace lagcast {

// Zero-adjusted gamma: point mass nu at zero, otherwise gamma with mean mu
// and variance sigma^2 mu^2 (shape 1/sigma^2, scale sigma^2 mu).
struct ZagaParams {
  double mu = 1.0;
  double sigma = 1.0;
  double nu = 0.0;

  // mu, sigma > 0 and finite; nu in [0, 1]. Throws Error(InvalidParams).
  void validate() const;
};

// Zero-adjusted inverse Gaussian: point mass nu at zero, otherwise IG with
// mean mu and variance sigma^2 mu^3.
struct ZaigParams {
  double mu = 1.0;
  double sigma = 1.0;
  double nu = 0.0;

  void validate() const;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// Density of the mixed law: nu at y == 0, (1 - nu) f_W(y) for y > 0.
// Evaluated in log space. Throws Error(NegativeY) for y < 0.
double zaga_pdf(double y, const ZagaParams& p);
double zaga_log_pdf(double y, const ZagaParams& p);
double zaga_cdf(double y, const ZagaParams& p);
// (1 - nu) mu, (1 - nu) mu^2 (sigma^2 + nu)
Moments zaga_moments(const ZagaParams& p);
double zaga_draw(const ZagaParams& p, Rng& rng);
std::vector<double> zaga_sample(const ZagaParams& p, std::size_t n, std::uint64_t seed);

// Log density of the positive gamma part alone (no (1 - nu) factor).
double gamma_log_density(double y, double mu, double sigma);

double zaig_pdf(double y, const ZaigParams& p);
double zaig_log_pdf(double y, const ZaigParams& p);
double zaig_cdf(double y, const ZaigParams& p);
// (1 - nu) mu, (1 - nu) mu^2 (sigma^2 mu + nu)
Moments zaig_moments(const ZaigParams& p);
double zaig_draw(const ZaigParams& p, Rng& rng);
std::vector<double> zaig_sample(const ZaigParams& p, std::size_t n, std::uint64_t seed);

}  // namespace lagcast
