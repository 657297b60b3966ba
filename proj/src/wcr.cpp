#include "ppcalc/wcr.hpp"

#include <cmath>
#include <mutex>

#include "ppcalc/errors.hpp"
#include "ppcalc/numerics.hpp"
#include "ppcalc/parallel.hpp"

namespace ppcalc {

namespace {

constexpr const char* kModule = "wcr-sampler";

void seat(SeatingState& s, int r, int block) {
  if (block == s.blocks()) {
    s.sizes.push_back(0);
    s.masks.push_back(0);
  }
  s.assignment.push_back(block);
  ++s.sizes[block];
  s.masks[block] |= std::uint64_t{1} << r;
}

// Log weights of the k existing tables followed by the new table.
void step_weights(const SeatingWeights& w, int r, const SeatingState& s, std::vector<double>& out) {
  out.resize(s.blocks() + 1);
  for (int j = 0; j < s.blocks(); ++j) out[j] = w.log_join_table(r, j, s);
  out[s.blocks()] = w.log_new_table(r, s);
  for (double v : out)
    if (std::isnan(v) || v == kInf)
      throw NumericError(kModule, "wcr_sample", "seating weight is not finite at step " + std::to_string(r));
}

void check_n(const SeatingWeights& w, int n, const char* op) {
  if (n < 1) throw ConfigError(kModule, op, "n must be positive");
  if (n > w.max_customers())
    throw SizeLimitError(kModule, op, "n exceeds the model limit of " + std::to_string(w.max_customers()));
}

}  // namespace

double PdSeating::log_new_table(int, const SeatingState& s) const {
  // l(0) = theta; for theta <= 0 the first step is given weight one
  if (s.customers() == 0 && spec_.theta() <= 0.0) return 0.0;
  double v = spec_.theta() + s.blocks() * spec_.alpha();
  return v > 0.0 ? std::log(v) : -kInf;
}

double PdSeating::log_join_table(int, int block, const SeatingState& s) const {
  return std::log(s.sizes[block] - spec_.alpha());
}

BlockFunctionSeating::BlockFunctionSeating(LogBlockFn log_phi, LatentFn latent)
    : fn_(std::move(log_phi)), latent_(std::move(latent)), cache_(std::make_shared<Cache>()) {}

double BlockFunctionSeating::log_phi(std::uint64_t mask) const {
  {
    std::shared_lock lock(cache_->mutex);
    auto it = cache_->values.find(mask);
    if (it != cache_->values.end()) return it->second;
  }
  double v = fn_(mask);
  if (std::isnan(v) || v == kInf)
    throw NumericError(kModule, "block_function", "block function is not finite");
  std::unique_lock lock(cache_->mutex);
  cache_->values.emplace(mask, v);
  return v;
}

std::size_t BlockFunctionSeating::cache_size() const {
  std::shared_lock lock(cache_->mutex);
  return cache_->values.size();
}

double BlockFunctionSeating::log_new_table(int r, const SeatingState&) const {
  return log_phi(std::uint64_t{1} << r);
}

double BlockFunctionSeating::log_join_table(int r, int block, const SeatingState& s) const {
  double base = log_phi(s.masks[block]);
  if (base == -kInf) return -kInf;
  return log_phi(s.masks[block] | (std::uint64_t{1} << r)) - base;
}

std::optional<std::vector<double>> BlockFunctionSeating::sample_latent(const SeatingState& s,
                                                                       RngStream& rng) const {
  if (!latent_) return std::nullopt;
  std::vector<double> out;
  for (auto m : s.masks) out.push_back(latent_(m, rng));
  return out;
}

BlockFunctionSeating::LogBlockFn discrete_block_function(std::vector<double> atom_weights,
                                                         std::vector<std::vector<double>> kernels) {
  for (const auto& row : kernels)
    if (row.size() != atom_weights.size())
      throw ConfigError(kModule, "discrete_block_function", "kernel rows must match the atom count");
  return [w = std::move(atom_weights), g = std::move(kernels)](std::uint64_t mask) {
    KahanSum s;
    for (std::size_t m = 0; m < w.size(); ++m) {
      double v = w[m];
      for (std::size_t i = 0; i < g.size(); ++i)
        if (mask >> i & 1u) v *= g[i][m];
      s += v;
    }
    double t = s.value();
    return t > 0.0 ? std::log(t) : -kInf;
  };
}

WeightedDraw wcr_sample(const SeatingWeights& w, int n, RngStream& rng) {
  check_n(w, n, "wcr_sample");
  SeatingState s;
  WeightedDraw out;
  std::vector<double> lw;
  for (int r = 0; r < n; ++r) {
    step_weights(w, r, s, lw);
    double l = log_sum_exp(lw);
    if (l == -kInf)
      throw DegenerateModelError(kModule, "wcr_sample",
                                 "total seating weight is zero at step r = " + std::to_string(r));
    out.log_importance += l;
    int block = r == 0 ? 0 : static_cast<int>(rng.categorical_log(lw.data(), lw.size()));
    seat(s, r, block);
  }
  out.latent = w.sample_latent(s, rng);
  out.partition = Partition::from_assignment(std::move(s.assignment));
  return out;
}

std::vector<WeightedDraw> wcr_sample_many(const SeatingWeights& w, int n, std::size_t draws,
                                          const RngStream& rng, int threads) {
  std::vector<WeightedDraw> out(draws);
  parallel_for(draws, threads, [&](std::size_t b) {
    RngStream sub = rng.substream(b);
    out[b] = wcr_sample(w, n, sub);
  });
  return out;
}

namespace {

// Walks p in item order; returns (log q, log I).
std::pair<double, double> trace(const SeatingWeights& w, const Partition& p, const char* op) {
  check_n(w, p.size(), op);
  SeatingState s;
  std::vector<double> lw;
  double lq = 0.0, li = 0.0;
  auto a = p.assignment();
  for (int r = 0; r < p.size(); ++r) {
    step_weights(w, r, s, lw);
    double l = log_sum_exp(lw);
    if (l == -kInf)
      throw DegenerateModelError(kModule, op, "total seating weight is zero at step r = " + std::to_string(r));
    li += l;
    lq += lw[a[r]] - l;
    seat(s, r, a[r]);
  }
  return {lq, li};
}

}  // namespace

double wcr_log_density(const SeatingWeights& w, const Partition& p) { return trace(w, p, "wcr_density").first; }

double wcr_density(const SeatingWeights& w, const Partition& p) { return std::exp(wcr_log_density(w, p)); }

double wcr_log_importance(const SeatingWeights& w, const Partition& p) {
  return trace(w, p, "wcr_log_importance").second;
}

ImportanceEstimate importance_estimate(const std::vector<WeightedDraw>& draws,
                                       const std::function<double(const WeightedDraw&)>& t) {
  if (draws.empty()) throw InputError(kModule, "importance_estimate", "no draws");
  const std::size_t B = draws.size();
  double m = -kInf;
  for (const auto& d : draws) m = std::max(m, d.log_importance);
  std::vector<double> w(B), tv(B);
  KahanSum sw, swt;
  for (std::size_t b = 0; b < B; ++b) {
    w[b] = std::exp(draws[b].log_importance - m);
    tv[b] = t(draws[b]);
    sw += w[b];
    swt += w[b] * tv[b];
  }
  ImportanceEstimate out;
  out.draws = B;
  const double W = sw.value();
  out.estimate = swt.value() / W;
  KahanSum var, wsq;
  const double wbar = W / B;
  for (std::size_t b = 0; b < B; ++b) {
    double d = tv[b] - out.estimate;
    var += w[b] * w[b] * d * d;
    wsq += (w[b] - wbar) * (w[b] - wbar);
  }
  out.std_error = std::sqrt(var.value()) / W;
  const double scale = std::exp(m);
  out.log_unnormalized_mean = m + std::log(wbar);
  out.unnormalized_mean = scale * wbar;
  out.unnormalized_std_error = B > 1 ? scale * std::sqrt(wsq.value() / (B - 1) / B) : 0.0;
  return out;
}

}  // namespace ppcalc
