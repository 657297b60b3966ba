#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "ppcalc/partition.hpp"
#include "ppcalc/random.hpp"

namespace ppcalc {

// Seating state after r customers: blocks in first-appearance order.
struct SeatingState {
  std::vector<int> assignment;      // length r
  std::vector<int> sizes;           // per block
  std::vector<std::uint64_t> masks; // item sets, bit i = customer i+1
  int customers() const { return static_cast<int>(assignment.size()); }
  int blocks() const { return static_cast<int>(sizes.size()); }
};

// Seating weights for the weighted Chinese restaurant, in log space.
// Customer index r is zero-based: the r-th call seats customer r+1 given
// the first r.
class SeatingWeights {
 public:
  virtual ~SeatingWeights() = default;
  virtual double log_new_table(int r, const SeatingState& state) const = 0;
  virtual double log_join_table(int r, int block, const SeatingState& state) const = 0;
  // Optional per-block payload drawn once the partition is complete.
  virtual std::optional<std::vector<double>> sample_latent(const SeatingState&, RngStream&) const {
    return std::nullopt;
  }
  // Largest n the model supports.
  virtual int max_customers() const { return 64; }
};

// Two-parameter Poisson-Dirichlet seating: new table theta + k alpha, join
// e_i - alpha, so l(r) = theta + r.
class PdSeating : public SeatingWeights {
 public:
  explicit PdSeating(EppfSpec spec) : spec_(spec) {}
  double log_new_table(int r, const SeatingState& state) const override;
  double log_join_table(int r, int block, const SeatingState& state) const override;

 private:
  EppfSpec spec_;
};

// Seating driven by a block function Phi(C) > 0 on item sets: joining C
// has weight Phi(C + i)/Phi(C), a new table Phi({i}). The importance weight
// times the seating density then telescopes to prod_j Phi(C_j).
// log Phi values are cached; the cache takes concurrent readers and
// serialized insertions, and is shared by copies.
class BlockFunctionSeating : public SeatingWeights {
 public:
  using LogBlockFn = std::function<double(std::uint64_t mask)>;
  using LatentFn = std::function<double(std::uint64_t mask, RngStream& rng)>;

  explicit BlockFunctionSeating(LogBlockFn log_phi, LatentFn latent = {});

  double log_new_table(int r, const SeatingState& state) const override;
  double log_join_table(int r, int block, const SeatingState& state) const override;
  std::optional<std::vector<double>> sample_latent(const SeatingState& state, RngStream& rng) const override;

  double log_phi(std::uint64_t mask) const;
  std::size_t cache_size() const;

 private:
  struct Cache {
    std::shared_mutex mutex;
    std::unordered_map<std::uint64_t, double> values;
  };
  LogBlockFn fn_;
  LatentFn latent_;
  std::shared_ptr<Cache> cache_;
};

// Block function of a discrete intensity nu = sum_m w_m delta_{a_m} with
// item kernels g[i][m] = g_i(a_m): Phi(C) = sum_m w_m prod_{i in C} g[i][m].
BlockFunctionSeating::LogBlockFn discrete_block_function(std::vector<double> atom_weights,
                                                         std::vector<std::vector<double>> kernels);

struct WeightedDraw {
  Partition partition;
  double log_importance = 0.0;
  std::optional<std::vector<double>> latent;
};

WeightedDraw wcr_sample(const SeatingWeights& w, int n, RngStream& rng);

// B independent draws; draw b uses rng.substream(b). Output does not depend
// on `threads`.
std::vector<WeightedDraw> wcr_sample_many(const SeatingWeights& w, int n, std::size_t draws,
                                          const RngStream& rng, int threads = 1);

// Seating density q(p|g) for items seated in order 1..n.
double wcr_density(const SeatingWeights& w, const Partition& p);
double wcr_log_density(const SeatingWeights& w, const Partition& p);
// log I(p|g) = sum_r log l(r-1) along p.
double wcr_log_importance(const SeatingWeights& w, const Partition& p);

struct ImportanceEstimate {
  double estimate = 0.0;   // self-normalized
  double std_error = 0.0;  // delta method
  double unnormalized_mean = 0.0;
  double unnormalized_std_error = 0.0;
  double log_unnormalized_mean = 0.0;
  std::size_t draws = 0;
};

ImportanceEstimate importance_estimate(const std::vector<WeightedDraw>& draws,
                                       const std::function<double(const WeightedDraw&)>& t);

}  // namespace ppcalc
