#include "ppcalc/partition.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <sstream>

#include "ppcalc/errors.hpp"
#include "ppcalc/numerics.hpp"

namespace ppcalc {

namespace {

void check_rgs(std::span<const int> a, const char* op) {
  int mx = -1;
  for (int x : a) {
    if (x < 0 || x > mx + 1)
      throw ConfigError("partition-core", op, "not a restricted-growth string");
    mx = std::max(mx, x);
  }
}

}  // namespace

Partition Partition::from_assignment(std::vector<int> assignment) {
  check_rgs(assignment, "from_assignment");
  Partition p;
  p.assignment_ = std::move(assignment);
  for (int b : p.assignment_) {
    if (b == static_cast<int>(p.sizes_.size())) p.sizes_.push_back(0);
    ++p.sizes_[b];
  }
  return p;
}

Partition Partition::from_blocks(const std::vector<std::vector<int>>& blocks) {
  int n = 0;
  for (const auto& b : blocks) n += static_cast<int>(b.size());
  std::vector<int> label(n, -1);
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    if (blocks[j].empty())
      throw ConfigError("partition-core", "from_blocks", "empty block");
    for (int item : blocks[j]) {
      if (item < 1 || item > n || label[item - 1] != -1)
        throw ConfigError("partition-core", "from_blocks", "blocks do not partition {1..n}");
      label[item - 1] = static_cast<int>(j);
    }
  }
  std::vector<int> relabel(blocks.size(), -1);
  std::vector<int> a(n);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    int& r = relabel[label[i]];
    if (r < 0) r = next++;
    a[i] = r;
  }
  return from_assignment(std::move(a));
}

Partition Partition::single_block(int n) { return from_assignment(std::vector<int>(n, 0)); }

Partition Partition::singletons(int n) {
  std::vector<int> a(n);
  for (int i = 0; i < n; ++i) a[i] = i;
  return from_assignment(std::move(a));
}

std::vector<std::vector<int>> Partition::blocks() const {
  std::vector<std::vector<int>> out(sizes_.size());
  for (int i = 0; i < size(); ++i) out[assignment_[i]].push_back(i);
  return out;
}

std::vector<std::uint64_t> Partition::block_masks() const {
  if (size() > 64)
    throw SizeLimitError("partition-core", "block_masks", "more than 64 items");
  std::vector<std::uint64_t> out(sizes_.size(), 0);
  for (int i = 0; i < size(); ++i) out[assignment_[i]] |= (std::uint64_t{1} << i);
  return out;
}

Partition Partition::extended(int block) const {
  if (block < 0 || block > num_blocks())
    throw ConfigError("partition-core", "extended", "block index out of range");
  std::vector<int> a = assignment_;
  a.push_back(block);
  return from_assignment(std::move(a));
}

std::string Partition::to_string() const {
  std::ostringstream os;
  os << '{';
  auto bl = blocks();
  for (std::size_t j = 0; j < bl.size(); ++j) {
    if (j) os << ',';
    os << '{';
    for (std::size_t k = 0; k < bl[j].size(); ++k) {
      if (k) os << ',';
      os << bl[j][k] + 1;
    }
    os << '}';
  }
  os << '}';
  return os.str();
}

std::size_t PartitionHash::operator()(const Partition& p) const {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (int x : p.assignment()) h = splitmix64(h ^ static_cast<std::uint64_t>(x));
  return static_cast<std::size_t>(h);
}

EppfSpec EppfSpec::ewens(double theta) {
  if (!(theta > 0.0))
    throw ConfigError("partition-core", "EppfSpec", "Ewens requires theta > 0");
  return EppfSpec(0.0, theta);
}

EppfSpec EppfSpec::two_param(double alpha, double theta) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw ConfigError("partition-core", "EppfSpec", "alpha must lie in [0,1)");
  if (!(theta > -alpha))
    throw ConfigError("partition-core", "EppfSpec", "theta must exceed -alpha");
  if (alpha == 0.0 && !(theta > 0.0))
    throw ConfigError("partition-core", "EppfSpec", "alpha = 0 requires theta > 0");
  return EppfSpec(alpha, theta);
}

std::string EppfSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (alpha_ == 0.0)
    os << "Ewens(theta=" << theta_ << ")";
  else
    os << "PD(alpha=" << alpha_ << ", theta=" << theta_ << ")";
  return os.str();
}

std::uint64_t bell_number(int n) {
  if (n < 0 || n > 24) throw SizeLimitError("partition-core", "bell_number", "n out of range");
  // Bell triangle.
  std::vector<std::uint64_t> row{1};
  for (int i = 0; i < n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t x : row) next.push_back(next.back() + x);
    row = std::move(next);
  }
  return row.front();
}

void for_each_partition_with_prefix(int n, std::span<const int> prefix,
                                    const PartitionVisitor& visit) {
  if (n < 1 || n > kMaxEnumeration)
    throw SizeLimitError("partition-core", "enumerate_partitions",
                         "n must lie in [1, " + std::to_string(kMaxEnumeration) + "]");
  const int plen = static_cast<int>(prefix.size());
  if (plen > n) throw ConfigError("partition-core", "enumerate_partitions", "prefix longer than n");
  check_rgs(prefix, "enumerate_partitions");

  std::vector<int> a(n, 0), pm(n, 0), sizes(n + 1, 0);
  for (int i = 0; i < plen; ++i) a[i] = prefix[i];
  int mx = -1;
  for (int i = 0; i < n; ++i) {
    mx = std::max(mx, a[i]);
    pm[i] = mx;
    ++sizes[a[i]];
  }
  const int first_free = std::max(1, plen);
  for (;;) {
    int k = pm[n - 1] + 1;
    visit(std::span<const int>(a), std::span<const int>(sizes.data(), k), k);
    int i = n - 1;
    while (i >= first_free && a[i] > pm[i - 1]) --i;
    if (i < first_free) return;
    for (int j = i; j < n; ++j) --sizes[a[j]];
    ++a[i];
    ++sizes[a[i]];
    pm[i] = std::max(pm[i - 1], a[i]);
    for (int j = i + 1; j < n; ++j) {
      a[j] = 0;
      ++sizes[0];
      pm[j] = pm[i];
    }
  }
}

void for_each_partition(int n, const PartitionVisitor& visit) {
  for_each_partition_with_prefix(n, {}, visit);
}

std::vector<std::vector<int>> rgs_prefixes(int length) {
  std::vector<std::vector<int>> out;
  if (length <= 0) {
    out.emplace_back();
    return out;
  }
  for_each_partition(length, [&](std::span<const int> a, std::span<const int>, int) {
    out.emplace_back(a.begin(), a.end());
  });
  return out;
}

std::vector<Partition> enumerate_partitions(int n) {
  if (n < 1 || n > kMaxEnumeration)
    throw SizeLimitError("partition-core", "enumerate_partitions",
                         "n must lie in [1, " + std::to_string(kMaxEnumeration) + "]");
  std::vector<Partition> out;
  out.reserve(static_cast<std::size_t>(bell_number(n)));
  for_each_partition(n, [&](std::span<const int> a, std::span<const int>, int) {
    out.push_back(Partition::from_assignment(std::vector<int>(a.begin(), a.end())));
  });
  return out;
}

double log_eppf(const EppfSpec& spec, std::span<const int> block_sizes) {
  const double a = spec.alpha(), t = spec.theta();
  const int k = static_cast<int>(block_sizes.size());
  int n = 0;
  for (int e : block_sizes) n += e;
  if (n == 0) return 0.0;
  // Sequential seating: join factors (e - alpha) multiply to
  // Gamma(e - alpha)/Gamma(1 - alpha) per block, new-table factors to
  // prod_{j<k} (theta + j alpha), denominators to (theta+1)_(n-1).
  double lg1a = boost::math::lgamma(1.0 - a);
  double s = 0.0;
  for (int e : block_sizes) s += boost::math::lgamma(e - a) - lg1a;
  for (int j = 1; j < k; ++j) s += std::log(t + j * a);
  s -= log_rising(t + 1.0, n - 1);
  return s;
}

double eppf_eval(const EppfSpec& spec, const Partition& p) {
  return std::exp(log_eppf(spec, p.block_sizes()));
}

double eppf_gamma_ratio_form(const EppfSpec& spec, const Partition& p) {
  const double a = spec.alpha(), t = spec.theta();
  double s = 0.0;
  for (int e : p.block_sizes()) s += boost::math::lgamma(e - a);
  for (int j = 1; j < p.num_blocks(); ++j) s += std::log(t + j * a);
  s -= log_rising(t + 1.0, p.size() - 1);
  return std::exp(s);
}

std::vector<double> predict_next(const EppfSpec& spec, const Partition& p) {
  const double a = spec.alpha(), t = spec.theta();
  const int r = p.size();
  if (r == 0) return {1.0};
  std::vector<double> out;
  out.reserve(p.num_blocks() + 1);
  for (int e : p.block_sizes()) out.push_back((e - a) / (t + r));
  out.push_back((t + p.num_blocks() * a) / (t + r));
  return out;
}

Partition sample_crp(const EppfSpec& spec, int n, RngStream& rng) {
  if (n < 1) throw ConfigError("partition-core", "sample_crp", "n must be positive");
  const double a = spec.alpha(), t = spec.theta();
  std::vector<int> assign{0};
  std::vector<int> sizes{1};
  assign.reserve(n);
  for (int r = 1; r < n; ++r) {
    const int k = static_cast<int>(sizes.size());
    double u = rng.uniform() * (t + r);
    double acc = 0.0;
    int chosen = k;
    for (int j = 0; j < k; ++j) {
      acc += sizes[j] - a;
      if (u < acc) {
        chosen = j;
        break;
      }
    }
    if (chosen == k) sizes.push_back(0);
    ++sizes[chosen];
    assign.push_back(chosen);
  }
  return Partition::from_assignment(std::move(assign));
}

}  // namespace ppcalc
