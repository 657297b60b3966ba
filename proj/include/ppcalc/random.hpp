#pragma once

#include <cstdint>
#include <random>

namespace ppcalc {

// Seeded Mersenne-Twister stream with counter-derived substreams.
// Draws are a pure function of (seed, stream id).
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Independent stream for the index-th unit of parallel work.
  RngStream substream(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  double uniform();  // open interval (0,1)
  double exponential();
  double gamma(double shape, double rate = 1.0);
  double beta(double a, double b);
  std::size_t categorical_log(const double* log_w, std::size_t k);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ppcalc
