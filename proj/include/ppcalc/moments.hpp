#pragma once

#include <utility>
#include <vector>

#include "ppcalc/base_measure.hpp"
#include "ppcalc/levy.hpp"
#include "ppcalc/partition.hpp"

namespace ppcalc {

// A real function on the location space together with the points where it
// is not smooth (used to split quadrature).
struct Functional {
  RealFn fn;
  std::vector<double> breakpoints;
  std::string name = "f";

  static Functional indicator(double lo, double hi);
  static Functional constant(double c);
  static Functional identity();
};

// (f_l, n_l): functional and its power in the joint moment.
using FunctionalPower = std::pair<Functional, int>;

inline constexpr int kMaxMomentOrder = 12;

// E[mu(B)^n] for B = [lo, hi].
double measure_moment(const LevyIntensity& li, Interval region, int n, int threads = 1);

// E[prod_l mu(f_l)^{n_l}], sum of n_l at most 12.
double joint_linear_moments(const LevyIntensity& li, const std::vector<FunctionalPower>& pairs,
                            int threads = 1);

// E[T^n] with T the total mass.
double total_mass_moment(const LevyIntensity& li, int n, int threads = 1);

// Law of the partition induced by the jump multiplicities, in enumeration
// order. Requires a finite base measure.
std::vector<std::pair<Partition, double>> partition_law(const LevyIntensity& li, int n);

// E[prod_l P(f_l)^{n_l}] for P a two-parameter Poisson-Dirichlet random
// probability measure with base distribution H (normalized if needed).
double pd_functional_moments(const EppfSpec& spec, const BaseMeasure& H,
                             const std::vector<FunctionalPower>& pairs, int threads = 1);

// Per-block integral table: entry for a count vector (c_1..c_L) holds
// int kappa_{sum c}(rho|y) prod_l f_l(y)^{c_l} eta(dy). Built once, then
// read concurrently.
class BlockIntegralTable {
 public:
  // weight(e, y) multiplies the block integrand; kappa for Levy moments,
  // 1 for probability-measure moments with a probability base.
  BlockIntegralTable(const std::vector<FunctionalPower>& pairs, const BaseMeasure& base,
                     const std::function<double(int, double)>& weight, bool weight_homogeneous,
                     const std::vector<double>& extra_breaks);

  int order() const { return n_; }
  // Functional label of each item, in canonical item order.
  const std::vector<int>& labels() const { return labels_; }
  std::size_t key(const std::vector<int>& counts) const;
  double at(std::size_t key) const { return values_[key]; }
  const std::vector<int>& strides() const { return strides_; }

 private:
  int n_ = 0;
  std::vector<int> labels_, dims_, strides_;
  std::vector<double> values_;
};

// Sum over partitions of {1..n} of prod_j table(block counts) * eppf-like
// weight(sizes). Sharded over restricted-growth prefixes; result does not
// depend on `threads`.
double partition_sum(const BlockIntegralTable& table,
                     const std::function<double(std::span<const int>)>& partition_weight,
                     int threads);

}  // namespace ppcalc
