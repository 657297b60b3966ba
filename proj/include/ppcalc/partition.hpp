#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ppcalc/random.hpp"

namespace ppcalc {

inline constexpr int kMaxEnumeration = 14;

// A set partition of {1..n} stored as a restricted-growth string:
// item i belongs to block assignment[i], blocks numbered by first appearance.
class Partition {
 public:
  Partition() = default;  // the empty partition (n = 0)

  static Partition from_assignment(std::vector<int> assignment);
  // Blocks given as lists of 1-based items; canonicalized.
  static Partition from_blocks(const std::vector<std::vector<int>>& blocks);
  static Partition single_block(int n);
  static Partition singletons(int n);

  int size() const { return static_cast<int>(assignment_.size()); }
  int num_blocks() const { return static_cast<int>(sizes_.size()); }
  std::span<const int> assignment() const { return assignment_; }
  std::span<const int> block_sizes() const { return sizes_; }
  // 0-based item indices of each block, in canonical block order.
  std::vector<std::vector<int>> blocks() const;
  // Bit masks of 0-based items per block (n <= 64).
  std::vector<std::uint64_t> block_masks() const;

  // Seat item n+1 at `block`; block == num_blocks() opens a new one.
  Partition extended(int block) const;

  // "{{1,2},{3}}"
  std::string to_string() const;

  bool operator==(const Partition& o) const { return assignment_ == o.assignment_; }
  bool operator<(const Partition& o) const { return assignment_ < o.assignment_; }

 private:
  std::vector<int> assignment_;
  std::vector<int> sizes_;
};

struct PartitionHash {
  std::size_t operator()(const Partition& p) const;
};

class EppfSpec {
 public:
  static EppfSpec ewens(double theta);
  static EppfSpec two_param(double alpha, double theta);

  double alpha() const { return alpha_; }
  double theta() const { return theta_; }
  bool is_ewens() const { return alpha_ == 0.0; }
  std::string describe() const;

 private:
  EppfSpec(double a, double t) : alpha_(a), theta_(t) {}
  double alpha_;
  double theta_;
};

std::uint64_t bell_number(int n);

// Streams every partition of {1..n} in lexicographic RGS order.
// The callback receives (assignment, block sizes, number of blocks).
using PartitionVisitor =
    std::function<void(std::span<const int>, std::span<const int>, int)>;
void for_each_partition(int n, const PartitionVisitor& visit);

// Same, restricted to the partitions whose first prefix.size() items are
// assigned as in `prefix` (itself a valid restricted-growth string).
void for_each_partition_with_prefix(int n, std::span<const int> prefix,
                                    const PartitionVisitor& visit);

// All valid restricted-growth prefixes of the given length, in order.
std::vector<std::vector<int>> rgs_prefixes(int length);

std::vector<Partition> enumerate_partitions(int n);

double log_eppf(const EppfSpec& spec, std::span<const int> block_sizes);
double eppf_eval(const EppfSpec& spec, const Partition& p);

// Gamma-ratio form theta^(k-1 rising by alpha) prod Gamma(e_j - alpha)
// / (theta+1)_(n-1), without the Gamma(1-alpha)^{-k} normalization.
double eppf_gamma_ratio_form(const EppfSpec& spec, const Partition& p);

std::vector<double> predict_next(const EppfSpec& spec, const Partition& p);

Partition sample_crp(const EppfSpec& spec, int n, RngStream& rng);

}  // namespace ppcalc
