#include "ppcalc/random.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ppcalc/errors.hpp"

namespace ppcalc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  std::uint64_t a = splitmix64(seed);
  std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  engine_.seed(seq);
}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(seed_, splitmix64(stream_ * 0x2545f4914f6cdd1dULL + index + 1));
}

double RngStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw ConfigError("random", "gamma", "shape and rate must be positive");
  return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
}

double RngStream::beta(double a, double b) {
  double x = gamma(a), y = gamma(b);
  double s = x + y;
  if (s == 0.0) return uniform() < a / (a + b) ? 1.0 : 0.0;
  return x / s;
}

std::size_t RngStream::categorical_log(const double* log_w, std::size_t k) {
  double m = -INFINITY;
  for (std::size_t i = 0; i < k; ++i) m = std::max(m, log_w[i]);
  if (!std::isfinite(m))
    throw DegenerateModelError("random", "categorical_log", "all weights are zero");
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) total += std::exp(log_w[i] - m);
  double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    acc += std::exp(log_w[i] - m);
    if (u < acc) return i;
  }
  for (std::size_t i = k; i-- > 0;)
    if (std::isfinite(log_w[i])) return i;
  return k - 1;
}

}  // namespace ppcalc
