#include "ppcalc/moments.hpp"

#include <cmath>

#include "ppcalc/errors.hpp"
#include "ppcalc/parallel.hpp"

namespace ppcalc {

namespace {

constexpr const char* kModule = "moment-engine";

void check_pairs(const std::vector<FunctionalPower>& pairs, const char* op) {
  if (pairs.empty()) throw ConfigError(kModule, op, "at least one functional is required");
  int n = 0;
  for (const auto& [f, p] : pairs) {
    if (p < 1) throw ConfigError(kModule, op, "powers must be positive");
    if (!f.fn) throw ConfigError(kModule, op, "functional is empty");
    n += p;
  }
  if (n > kMaxMomentOrder)
    throw SizeLimitError(kModule, op,
                         "total order " + std::to_string(n) + " exceeds the ceiling of " +
                             std::to_string(kMaxMomentOrder));
}

BlockIntegralTable levy_table(const LevyIntensity& li, const std::vector<FunctionalPower>& pairs) {
  auto weight = [&li](int e, double y) { return kappa(li, e, y); };
  return BlockIntegralTable(pairs, li.base(), weight, li.homogeneous(), li.location_breakpoints());
}

}  // namespace

Functional Functional::indicator(double lo, double hi) {
  return {[lo, hi](double y) { return (y >= lo && y <= hi) ? 1.0 : 0.0; }, {lo, hi}, "indicator"};
}

Functional Functional::constant(double c) {
  return {[c](double) { return c; }, {}, "constant"};
}

Functional Functional::identity() {
  return {[](double y) { return y; }, {}, "identity"};
}

BlockIntegralTable::BlockIntegralTable(const std::vector<FunctionalPower>& pairs,
                                       const BaseMeasure& base,
                                       const std::function<double(int, double)>& weight,
                                       bool weight_homogeneous,
                                       const std::vector<double>& extra_breaks) {
  const int L = static_cast<int>(pairs.size());
  dims_.resize(L);
  strides_.resize(L);
  int stride = 1;
  for (int l = 0; l < L; ++l) {
    for (int i = 0; i < pairs[l].second; ++i) labels_.push_back(l);
    dims_[l] = pairs[l].second + 1;
    strides_[l] = stride;
    stride *= dims_[l];
  }
  n_ = static_cast<int>(labels_.size());

  std::vector<double> breaks = extra_breaks;
  for (const auto& [f, p] : pairs) breaks.insert(breaks.end(), f.breakpoints.begin(), f.breakpoints.end());

  // kappa is location-free for homogeneous intensities: one value per size.
  const double y0 = base.support().lo;
  std::vector<double> hom(n_ + 1, 0.0);
  if (weight_homogeneous)
    for (int e = 1; e <= n_; ++e) hom[e] = weight(e, std::isfinite(y0) ? y0 : 0.0);

  values_.assign(stride, 0.0);
  std::vector<int> counts(L, 0);
  for (int k = 0; k < stride; ++k) {
    int rem = k, e = 0;
    for (int l = 0; l < L; ++l) {
      counts[l] = rem % dims_[l];
      rem /= dims_[l];
      e += counts[l];
    }
    if (e == 0) continue;
    auto integrand = [&](double y) {
      double v = 1.0;
      for (int l = 0; l < L; ++l)
        if (counts[l] > 0) {
          double f = pairs[l].first.fn(y);
          if (f == 0.0) return 0.0;
          v *= counts[l] == 1 ? f : std::pow(f, counts[l]);
        }
      return weight_homogeneous ? v : v * weight(e, y);
    };
    double val = base.integrate(integrand, breaks, 1e-12);
    if (weight_homogeneous) val *= hom[e];
    if (!std::isfinite(val))
      throw DivergenceError(kModule, "block_integral",
                            "block integral for a block of size " + std::to_string(e) + " is not finite");
    values_[k] = val;
  }
}

std::size_t BlockIntegralTable::key(const std::vector<int>& counts) const {
  std::size_t k = 0;
  for (std::size_t l = 0; l < counts.size(); ++l) k += counts[l] * strides_[l];
  return k;
}

double partition_sum(const BlockIntegralTable& table,
                     const std::function<double(std::span<const int>)>& partition_weight,
                     int threads) {
  const int n = table.order();
  const int prefix_len = n <= 6 ? 1 : 5;
  const auto prefixes = rgs_prefixes(prefix_len);
  std::vector<int> item_stride(n);
  for (int i = 0; i < n; ++i) item_stride[i] = table.strides()[table.labels()[i]];

  std::vector<double> shard(prefixes.size(), 0.0);
  parallel_for(prefixes.size(), threads, [&](std::size_t s) {
    KahanSum acc;
    std::vector<std::size_t> keys(n);
    for_each_partition_with_prefix(n, prefixes[s], [&](std::span<const int> a, std::span<const int> sizes, int k) {
      std::fill(keys.begin(), keys.begin() + k, 0);
      for (int i = 0; i < n; ++i) keys[a[i]] += item_stride[i];
      double v = 1.0;
      for (int j = 0; j < k && v != 0.0; ++j) v *= table.at(keys[j]);
      if (v != 0.0 && partition_weight) v *= partition_weight(sizes);
      acc += v;
    });
    shard[s] = acc.value();
  });
  KahanSum total;
  for (double v : shard) total += v;
  return total.value();
}

double joint_linear_moments(const LevyIntensity& li, const std::vector<FunctionalPower>& pairs,
                            int threads) {
  check_pairs(pairs, "joint_linear_moments");
  return partition_sum(levy_table(li, pairs), {}, threads);
}

double measure_moment(const LevyIntensity& li, Interval region, int n, int threads) {
  if (n < 1 || n > kMaxMomentOrder)
    throw SizeLimitError(kModule, "measure_moment", "order must be in 1.." + std::to_string(kMaxMomentOrder));
  if (!(region.hi > region.lo)) throw ConfigError(kModule, "measure_moment", "empty region");
  return joint_linear_moments(li, {{Functional::indicator(region.lo, region.hi), n}}, threads);
}

double total_mass_moment(const LevyIntensity& li, int n, int threads) {
  if (n < 1 || n > kMaxMomentOrder)
    throw SizeLimitError(kModule, "total_mass_moment", "order must be in 1.." + std::to_string(kMaxMomentOrder));
  return joint_linear_moments(li, {{Functional::constant(1.0), n}}, threads);
}

std::vector<std::pair<Partition, double>> partition_law(const LevyIntensity& li, int n) {
  if (!li.base().finite())
    throw ConfigError(kModule, "partition_law", "base measure must have finite mass");
  if (n < 1 || n > kMaxMomentOrder)
    throw SizeLimitError(kModule, "partition_law", "order must be in 1.." + std::to_string(kMaxMomentOrder));
  auto table = levy_table(li, {{Functional::constant(1.0), n}});
  std::vector<std::pair<Partition, double>> out;
  KahanSum total;
  for_each_partition(n, [&](std::span<const int> a, std::span<const int> sizes, int k) {
    double v = 1.0;
    for (int j = 0; j < k; ++j) v *= table.at(sizes[j]);
    out.emplace_back(Partition::from_assignment(std::vector<int>(a.begin(), a.end())), v);
    total += v;
  });
  const double z = total.value();
  if (!(z > 0.0) || !std::isfinite(z))
    throw DegenerateModelError(kModule, "partition_law", "partition weights do not normalize");
  for (auto& [p, v] : out) v /= z;
  return out;
}

double pd_functional_moments(const EppfSpec& spec, const BaseMeasure& H,
                             const std::vector<FunctionalPower>& pairs, int threads) {
  check_pairs(pairs, "pd_functional_moments");
  if (!H.finite() || !(H.total_mass() > 0.0))
    throw ConfigError(kModule, "pd_functional_moments", "base distribution must have finite positive mass");
  BaseMeasure prob = H.scaled(1.0 / H.total_mass());
  BlockIntegralTable table(pairs, prob, [](int, double) { return 1.0; }, true, {});
  return partition_sum(table, [&spec](std::span<const int> sizes) { return std::exp(log_eppf(spec, sizes)); },
                       threads);
}

}  // namespace ppcalc
