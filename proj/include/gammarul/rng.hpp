#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "gammarul/errors.hpp"

namespace gammarul {

// Seeded random stream. A (seed, stream_id) pair always replays the same
// sequence; distinct stream ids from one seed give decorrelated sequences,
// which is how parallel replications and replay epochs stay independent.
// All stochastic operations take an RngStream explicitly; there is no
// global generator.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal (polar method; the spare deviate is discarded).
  double normal() {
    for (;;) {
      const double u = 2.0 * uniform() - 1.0;
      const double v = 2.0 * uniform() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// Gamma variate with the given shape and rate (mean shape/rate).
/// Marsaglia-Tsang squeeze method, with the u^(1/shape) boost below shape 1.
inline double sample_gamma(double shape, double rate, RngStream& rng) {
  if (!std::isfinite(shape) || shape <= 0.0 || !std::isfinite(rate) || rate <= 0.0)
    throw domain_error("sample_gamma: shape and rate must be positive");
  double boost = 1.0;
  if (shape < 1.0) {
    boost = std::pow(rng.uniform(), 1.0 / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return boost * d * v / rate;
  }
}

}  // namespace gammarul
