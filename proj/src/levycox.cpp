#include "ppcalc/levycox.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <cmath>
#include <mutex>
#include <unordered_map>

#include "ppcalc/errors.hpp"
#include "ppcalc/numerics.hpp"
#include "ppcalc/parallel.hpp"

namespace ppcalc {

namespace {

constexpr const char* kModule = "levycox-posterior";
constexpr int kExactLimit = 10;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Interval intersect(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

}  // namespace

// ---------------------------------------------------------------- kernels

Kernel Kernel::uniform_window(double width) {
  if (!(width > 0.0)) throw ConfigError(kModule, "kernel", "window width must be positive");
  return Kernel(Family::UniformWindow, width);
}

Kernel Kernel::exponential(double rate) {
  if (!(rate > 0.0)) throw ConfigError(kModule, "kernel", "exponential kernel rate must be positive");
  return Kernel(Family::Exponential, rate);
}

Kernel Kernel::gaussian(double sd) {
  if (!(sd > 0.0)) throw ConfigError(kModule, "kernel", "gaussian kernel sd must be positive");
  return Kernel(Family::Gaussian, sd);
}

Kernel Kernel::set_indicator(bool increasing) { return Kernel(Family::SetIndicator, increasing ? 1.0 : 0.0); }

Kernel Kernel::constant(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw ConfigError(kModule, "kernel", "constant kernel must be finite and nonnegative");
  return Kernel(Family::Constant, value);
}

std::string Kernel::describe() const {
  switch (family_) {
    case Family::UniformWindow: return "uniform(width=" + std::to_string(param_) + ")";
    case Family::Exponential: return "exponential(rate=" + std::to_string(param_) + ")";
    case Family::Gaussian: return "gaussian(sd=" + std::to_string(param_) + ")";
    case Family::SetIndicator: return param_ > 0 ? "indicator(y<=t)" : "indicator(t<=y)";
    case Family::Constant: return "constant(" + std::to_string(param_) + ")";
  }
  return "kernel";
}

double Kernel::operator()(double t, double y) const {
  switch (family_) {
    case Family::UniformWindow: return (t >= y && t <= y + param_) ? 1.0 : 0.0;
    case Family::Exponential: return t >= y ? param_ * std::exp(-param_ * (t - y)) : 0.0;
    case Family::Gaussian: {
      double z = (t - y) / param_;
      return std::exp(-0.5 * z * z) / (param_ * std::sqrt(2.0 * boost::math::constants::pi<double>()));
    }
    case Family::SetIndicator: return (param_ > 0 ? y <= t : t <= y) ? 1.0 : 0.0;
    case Family::Constant: return param_;
  }
  return 0.0;
}

double Kernel::integral(double a, double b, double y) const {
  if (!(b > a)) return 0.0;
  switch (family_) {
    case Family::UniformWindow: return std::max(0.0, std::min(b, y + param_) - std::max(a, y));
    case Family::Exponential: {
      double lo = std::max(a, y);
      if (b <= lo) return 0.0;
      return std::exp(-param_ * (lo - y)) * -std::expm1(-param_ * (b - lo));
    }
    case Family::Gaussian: {
      double za = (a - y) / param_, zb = (b - y) / param_;
      if (za > 0) return 0.5 * (std::erfc(za / std::sqrt(2.0)) - std::erfc(zb / std::sqrt(2.0)));
      return normal_cdf(zb) - normal_cdf(za);
    }
    case Family::SetIndicator:
      if (param_ > 0) return std::max(0.0, b - std::max(a, y));
      return std::max(0.0, std::min(b, y) - a);
    case Family::Constant: return param_ * (b - a);
  }
  return 0.0;
}

Interval Kernel::location_range(double t) const {
  switch (family_) {
    case Family::UniformWindow: return {t - param_, t};
    case Family::Exponential: return {-kInf, t};
    case Family::Gaussian: return {-kInf, kInf};
    case Family::SetIndicator: return param_ > 0 ? Interval{-kInf, t} : Interval{t, kInf};
    case Family::Constant: return param_ > 0 ? Interval{-kInf, kInf} : Interval{0.0, 0.0};
  }
  return {-kInf, kInf};
}

std::vector<double> Kernel::location_breaks(double t) const {
  switch (family_) {
    case Family::UniformWindow: return {t - param_, t};
    case Family::Gaussian:
    case Family::Constant: return {};
    default: return {t};
  }
}

// ---------------------------------------------------------------- at-risk

StepFunction StepFunction::constant(double value, double lo, double hi) { return {{lo, hi}, {value}}; }

void StepFunction::validate() const {
  if (edges.size() < 2 || values.size() + 1 != edges.size())
    throw ConfigError(kModule, "at_risk", "step function needs k+1 edges for k values");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw ConfigError(kModule, "at_risk", "edges must increase");
  for (double v : values)
    if (!(v >= 0.0)) throw ConfigError(kModule, "at_risk", "at-risk values must be nonnegative");
}

double StepFunction::operator()(double s) const {
  if (s < edges.front() || s >= edges.back()) return 0.0;
  auto it = std::upper_bound(edges.begin(), edges.end(), s);
  return values[(it - edges.begin()) - 1];
}

// ---------------------------------------------------------------- model

double IntensityModel::kernel_exponent(double y) const {
  if (!at_risk) return kernel.integral(window.lo, window.hi, y);
  const auto& f = *at_risk;
  KahanSum s;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    if (f.values[k] == 0.0) continue;
    double a = std::max(f.edges[k], window.lo), b = std::min(f.edges[k + 1], window.hi);
    if (b > a) s += f.values[k] * kernel.integral(a, b, y);
  }
  return s.value();
}

std::vector<double> IntensityModel::exponent_breaks() const {
  std::vector<double> pts = {window.lo, window.hi};
  if (at_risk) pts.insert(pts.end(), at_risk->edges.begin(), at_risk->edges.end());
  std::vector<double> out;
  for (double e : pts) {
    if (e < window.lo || e > window.hi) continue;
    auto b = kernel.location_breaks(e);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

LevyIntensity IntensityModel::tilted_prior() const {
  IntensityModel copy = *this;
  return prior.tilted(
      TiltTerm::kernel([copy](double y) { return copy.kernel_exponent(y); }, "f_K", exponent_breaks()));
}

double kernel_exponent(const IntensityModel& model, double y) { return model.kernel_exponent(y); }

// ---------------------------------------------------------------- posterior

namespace {

// Inverse-CDF sampler for a density on [lo, hi], cells uniform within.
class LocationGrid {
 public:
  LocationGrid(const RealFn& dens, double lo, double hi, std::vector<double> breaks) {
    breaks.push_back(lo);
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());
    std::vector<double> pts;
    for (double b : breaks)
      if (b >= lo && b <= hi && (pts.empty() || b > pts.back())) pts.push_back(b);
    for (int cells = 2048; cells <= (1 << 17); cells *= 2) {
      build(dens, pts, cells);
      if (sup_error_ < 1e-6) return;
    }
  }

  double sample(RngStream& rng) const {
    double target = rng.uniform() * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    std::size_t i = std::clamp<std::size_t>(it - cdf_.begin(), 1, nodes_.size() - 1) - 1;
    double mass = cdf_[i + 1] - cdf_[i];
    double frac = mass > 0.0 ? (target - cdf_[i]) / mass : 0.5;
    return nodes_[i] + std::clamp(frac, 0.0, 1.0) * (nodes_[i + 1] - nodes_[i]);
  }

  double total() const { return cdf_.back(); }

 private:
  void build(const RealFn& dens, const std::vector<double>& pts, int cells) {
    const double width = (pts.back() - pts.front()) / cells;
    nodes_.clear();
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      int m = std::max(1, static_cast<int>(std::ceil((pts[k + 1] - pts[k]) / width)));
      for (int j = 0; j < m; ++j) nodes_.push_back(pts[k] + (pts[k + 1] - pts[k]) * j / m);
    }
    nodes_.push_back(pts.back());
    cdf_.assign(nodes_.size(), 0.0);
    std::vector<double> half(nodes_.size() - 1);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
      double mid = 0.5 * (nodes_[i] + nodes_[i + 1]);
      half[i] = integrate(dens, nodes_[i], mid, 1e-10);
      cdf_[i + 1] = cdf_[i] + half[i] + integrate(dens, mid, nodes_[i + 1], 1e-10);
    }
    const double tot = cdf_.back();
    if (!(tot > 0.0) || !std::isfinite(tot))
      throw DegenerateModelError(kModule, "sample_block_location", "block location posterior has no mass");
    sup_error_ = 0.0;
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
      double linear = 0.5 * (cdf_[i + 1] - cdf_[i]);
      sup_error_ = std::max(sup_error_, std::fabs(linear - half[i]) / tot);
    }
  }

  std::vector<double> nodes_, cdf_;
  double sup_error_ = kInf;
};

}  // namespace

struct LevyCoxPosterior::GridCache {
  std::mutex mutex;
  std::unordered_map<std::uint64_t, std::shared_ptr<const LocationGrid>> grids;
};

LevyCoxPosterior::LevyCoxPosterior(IntensityModel model, std::vector<double> events,
                                   std::optional<LevyIntensity> tilted)
    : model_(std::move(model)),
      events_(std::move(events)),
      tilted_(tilted ? *tilted : model_.tilted_prior()),
      seating_([this](std::uint64_t mask) { return log_block(mask); }),
      grids_(std::make_shared<GridCache>()) {
  if (model_.at_risk) model_.at_risk->validate();
  if (!(model_.window.hi > model_.window.lo)) throw ConfigError(kModule, "model", "empty observation window");
  if (events_.size() > 64) throw SizeLimitError(kModule, "model", "at most 64 events are supported");
  for (double x : events_)
    if (!std::isfinite(x)) throw InputError(kModule, "model", "event times must be finite");
  const IntensityModel& m = model_;
  log_laplace_ = -laplace_exponent(m.prior, [&m](double y) { return m.kernel_exponent(y); }, m.exponent_breaks());

  // lower bound of f_K over the support for the thinning proposal
  Interval sup = m.prior.base().support();
  double lo = std::isfinite(sup.lo) ? sup.lo : m.window.lo - 50.0;
  double hi = std::isfinite(sup.hi) ? sup.hi : m.window.hi + 50.0;
  double fmin = kInf;
  for (int i = 0; i <= 4096; ++i) fmin = std::min(fmin, m.kernel_exponent(lo + (hi - lo) * i / 4096.0));
  for (double b : m.exponent_breaks())
    if (b >= lo && b <= hi) fmin = std::min(fmin, m.kernel_exponent(b));
  if (!std::isfinite(sup.lo) || !std::isfinite(sup.hi)) fmin = 0.0;
  f_min_ = std::max(0.0, fmin * (1.0 - 1e-9));
}

Interval LevyCoxPosterior::y_range(std::uint64_t mask) const {
  Interval r = model_.prior.base().support();
  for (int i = 0; i < size(); ++i)
    if (mask >> i & 1u) r = intersect(r, model_.kernel.location_range(events_[i]));
  return r;
}

std::vector<double> LevyCoxPosterior::y_breaks(std::uint64_t mask) const {
  std::vector<double> out = model_.exponent_breaks();
  auto lb = tilted_.location_breakpoints();
  out.insert(out.end(), lb.begin(), lb.end());
  for (int i = 0; i < size(); ++i)
    if (mask >> i & 1u) {
      auto b = model_.kernel.location_breaks(events_[i]);
      out.insert(out.end(), b.begin(), b.end());
    }
  return out;
}

double LevyCoxPosterior::block_integral(std::uint64_t mask, const std::function<double(double)>& extra,
                                        int extra_order, const std::vector<double>& extra_breaks) const {
  const int e = std::popcount(mask) + extra_order;
  Interval r = y_range(mask);
  if (!(r.hi > r.lo)) return 0.0;
  auto f = [&](double y) {
    if (y < r.lo || y > r.hi) return 0.0;
    double v = 1.0;
    for (int i = 0; i < size() && v != 0.0; ++i)
      if (mask >> i & 1u) v *= model_.kernel(events_[i], y);
    if (v != 0.0 && extra) v *= extra(y);
    if (v == 0.0) return 0.0;
    return v * kappa(tilted_, e, y);
  };
  auto breaks = y_breaks(mask);
  breaks.insert(breaks.end(), extra_breaks.begin(), extra_breaks.end());
  if (std::isfinite(r.lo)) breaks.push_back(r.lo);
  if (std::isfinite(r.hi)) breaks.push_back(r.hi);
  double v = model_.prior.base().integrate(f, breaks, 1e-11);
  if (!std::isfinite(v)) throw DivergenceError(kModule, "block_integral", "block integral is not finite");
  return v;
}

double LevyCoxPosterior::log_block(std::uint64_t mask) const {
  double v = block_integral(mask, {}, 0, {});
  return v > 0.0 ? std::log(v) : -kInf;
}

double LevyCoxPosterior::log_laplace() const { return log_laplace_; }

double LevyCoxPosterior::log_marginal_likelihood() const {
  const int n = size();
  if (n == 0) return log_laplace_;
  if (n > kMaxEnumeration)
    throw SizeLimitError(kModule, "marginal_likelihood", "exact path limited to n <= 14; use the WCR estimate");
  double shift = 0.0;
  for (int i = 0; i < n; ++i) shift += seating_.log_phi(std::uint64_t{1} << i);
  if (!std::isfinite(shift)) {
    // fall back to a zero shift; still exact, only less protected from underflow
    shift = 0.0;
  }
  KahanSum z;
  for_each_partition(n, [&](std::span<const int> a, std::span<const int>, int k) {
    std::uint64_t masks[64] = {};
    for (int i = 0; i < n; ++i) masks[a[i]] |= std::uint64_t{1} << i;
    double l = 0.0;
    for (int j = 0; j < k; ++j) l += seating_.log_phi(masks[j]);
    z += std::exp(l - shift);
  });
  double total = z.value();
  if (!(total > 0.0))
    throw DegenerateModelError(kModule, "marginal_likelihood", "likelihood is zero for every partition");
  return log_laplace_ + shift + std::log(total);
}

double LevyCoxPosterior::marginal_likelihood() const { return std::exp(log_marginal_likelihood()); }

double LevyCoxPosterior::posterior_partition_density(const Partition& p) const {
  if (p.size() != size()) throw ConfigError(kModule, "posterior_partition_density", "partition size differs from data size");
  if (size() > kExactLimit)
    throw SizeLimitError(kModule, "posterior_partition_density", "exact path limited to n <= 10");
  double l = log_laplace_;
  for (auto m : p.block_masks()) l += seating_.log_phi(m);
  return std::exp(l - log_marginal_likelihood());
}

double LevyCoxPosterior::prior_intensity_mean(double t) const {
  const Kernel& K = model_.kernel;
  auto extra = [&K, t](double y) { return K(t, y); };
  // K(t|.) restricts the range through its own breaks
  Interval r = intersect(model_.prior.base().support(), K.location_range(t));
  if (!(r.hi > r.lo)) return 0.0;
  auto f = [&](double y) {
    if (y < r.lo || y > r.hi) return 0.0;
    double k = extra(y);
    return k == 0.0 ? 0.0 : k * kappa(tilted_, 1, y);
  };
  auto breaks = y_breaks(0);
  auto kb = K.location_breaks(t);
  breaks.insert(breaks.end(), kb.begin(), kb.end());
  return model_.prior.base().integrate(f, breaks, 1e-11);
}

double LevyCoxPosterior::intensity_mean_given_y(double t, const Partition& p,
                                                const std::vector<double>& locations) const {
  if (static_cast<int>(locations.size()) != p.num_blocks())
    throw ConfigError(kModule, "posterior_intensity_mean", "need one location per block");
  double v = prior_intensity_mean(t);
  auto sizes = p.block_sizes();
  for (int j = 0; j < p.num_blocks(); ++j) {
    double y = locations[j];
    double k = model_.kernel(t, y);
    if (k == 0.0) continue;
    v += k * kappa(tilted_, sizes[j] + 1, y) / kappa(tilted_, sizes[j], y);
  }
  return v;
}

double LevyCoxPosterior::block_intensity_ratio(std::uint64_t mask, double t) const {
  double lp = seating_.log_phi(mask);
  if (lp == -kInf) return 0.0;
  const Kernel& K = model_.kernel;
  return block_integral(mask, [&K, t](double y) { return K(t, y); }, 1, K.location_breaks(t)) / std::exp(lp);
}

double LevyCoxPosterior::intensity_mean_given_x(double t) const {
  const int n = size();
  double prior = prior_intensity_mean(t);
  if (n == 0) return prior;
  if (n > kExactLimit)
    throw SizeLimitError(kModule, "posterior_intensity_mean", "exact path limited to n <= 10; use the WCR estimate");
  const std::size_t nm = std::size_t{1} << n;
  std::vector<double> ratio(nm, 0.0), logphi(nm, -kInf);
  for (std::size_t m = 1; m < nm; ++m) {
    logphi[m] = seating_.log_phi(m);
    ratio[m] = block_intensity_ratio(m, t);
  }
  double shift = 0.0;
  for (int i = 0; i < n; ++i) shift += logphi[std::size_t{1} << i];
  if (!std::isfinite(shift)) shift = 0.0;
  KahanSum z, acc;
  for_each_partition(n, [&](std::span<const int> a, std::span<const int>, int k) {
    std::uint64_t masks[64] = {};
    for (int i = 0; i < n; ++i) masks[a[i]] |= std::uint64_t{1} << i;
    double l = 0.0, r = 0.0;
    for (int j = 0; j < k; ++j) {
      l += logphi[masks[j]];
      r += ratio[masks[j]];
    }
    double w = std::exp(l - shift);
    z += w;
    acc += w * r;
  });
  if (!(z.value() > 0.0))
    throw DegenerateModelError(kModule, "posterior_intensity_mean", "likelihood is zero for every partition");
  return prior + acc.value() / z.value();
}

double LevyCoxPosterior::sample_block_location(std::uint64_t mask, RngStream& rng) const {
  GridCache* cache = grids_.get();
  std::shared_ptr<const LocationGrid> grid;
  {
    std::lock_guard lock(cache->mutex);
    auto it = cache->grids.find(mask);
    if (it != cache->grids.end()) grid = it->second;
  }
  if (!grid) {
    Interval r = y_range(mask);
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      const auto& base = model_.prior.base();
      if (!base.finite())
        throw UnsupportedOperation(kModule, "sample_block_location",
                                   "block location posterior needs a bounded range or a finite base measure");
      // drop base tails of negligible mass
      if (!std::isfinite(r.lo)) r.lo = base.quantile(1e-15 * base.total_mass());
      if (!std::isfinite(r.hi)) r.hi = base.quantile((1.0 - 1e-15) * base.total_mass());
    }
    const int e = std::popcount(mask);
    const auto& base = model_.prior.base();
    auto dens = [&, mask, e](double y) {
      double v = base.density(y);
      for (int i = 0; i < size() && v != 0.0; ++i)
        if (mask >> i & 1u) v *= model_.kernel(events_[i], y);
      return v == 0.0 ? 0.0 : v * kappa(tilted_, e, y);
    };
    auto breaks = y_breaks(mask);
    auto bb = base.breakpoints();
    breaks.insert(breaks.end(), bb.begin(), bb.end());
    auto built = std::make_shared<const LocationGrid>(dens, r.lo, r.hi, breaks);
    std::lock_guard lock(cache->mutex);
    grid = cache->grids.emplace(mask, built).first->second;
  }
  return grid->sample(rng);
}

double LevyCoxPosterior::draw_intensity(const PosteriorDraw& d, double t) const {
  KahanSum s;
  for (std::size_t j = 0; j < d.block_locations.size(); ++j)
    s += model_.kernel(t, d.block_locations[j]) * d.block_jumps[j];
  for (const auto& a : d.continuous.atoms) s += model_.kernel(t, a.location) * a.weight;
  const double u = d.continuous.truncation_level;
  if (u > 0.0) {
    const Kernel& K = model_.kernel;
    Interval r = intersect(model_.prior.base().support(), K.location_range(t));
    if (r.hi > r.lo) {
      auto f = [&](double y) {
        if (y < r.lo || y > r.hi) return 0.0;
        double k = K(t, y);
        return k == 0.0 ? 0.0 : k * residual_mass_at(tilted_, u, y);
      };
      auto breaks = y_breaks(0);
      auto kb = K.location_breaks(t);
      breaks.insert(breaks.end(), kb.begin(), kb.end());
      s += model_.prior.base().integrate(f, breaks, 1e-9);
    }
  }
  return s.value();
}

double LevyCoxPosterior::draw_total_mass(const PosteriorDraw& d) const {
  KahanSum s;
  for (double j : d.block_jumps) s += j;
  for (const auto& a : d.continuous.atoms) s += a.weight;
  const double u = d.continuous.truncation_level;
  if (u > 0.0)
    s += model_.prior.base().integrate([&](double y) { return residual_mass_at(tilted_, u, y); }, y_breaks(0), 1e-9);
  return s.value();
}

PosteriorDraw LevyCoxPosterior::fit_one(RngStream& rng) const {
  PosteriorDraw d;
  auto w = wcr_sample(seating_, size(), rng);
  d.partition = w.partition;
  d.log_weight = w.log_importance;
  auto masks = d.partition.block_masks();
  auto sizes = d.partition.block_sizes();
  for (std::size_t j = 0; j < masks.size(); ++j) {
    double y = sample_block_location(masks[j], rng);
    d.block_locations.push_back(y);
    d.block_jumps.push_back(jump_sample(tilted_, sizes[j], y, rng));
  }
  return d;
}

std::vector<PosteriorDraw> LevyCoxPosterior::fit(std::size_t draws, double eps, const RngStream& rng,
                                                 int threads) const {
  if (size() == 0) throw ConfigError(kModule, "fit_posterior", "no events");
  if (!(eps > 0.0)) throw ConfigError(kModule, "fit_posterior", "eps must be positive");
  const auto& base = model_.prior.base();
  if (!base.finite())
    throw UnsupportedOperation(kModule, "fit_posterior", "continuous part needs a finite base measure");
  // Proposal: prior tilted by the constant lower bound of f_K; thinned to
  // exp(-f_K(y) s) atom by atom.
  InverseLevySampler proposal(model_.prior.tilted(TiltTerm::kernel_constant(f_min_, "f_K lower bound")));
  const double p = model_.prior.jump_power();
  std::vector<PosteriorDraw> out(draws);
  parallel_for(draws, threads, [&](std::size_t b) {
    RngStream sub = rng.substream(b);
    try {
      out[b] = fit_one(sub);
      auto cont = proposal.draw(base.total_mass(), eps, sub);
      std::vector<Atom> kept;
      for (const auto& a : cont.atoms) {
        double s = p == 1.0 ? a.weight : std::pow(a.weight, 1.0 / p);
        double excess = model_.kernel_exponent(a.location) - f_min_;
        if (excess <= 0.0 || sub.uniform() < std::exp(-excess * s)) kept.push_back(a);
      }
      cont.atoms = std::move(kept);
      out[b].continuous = std::move(cont);
    } catch (const Error& e) {
      out[b] = PosteriorDraw{};
      out[b].log_weight = -kInf;
      out[b].error = e.what();
    }
  });
  return out;
}

// ---------------------------------------------------------------- free functions

double marginal_likelihood(const IntensityModel& model, const std::vector<double>& events) {
  return LevyCoxPosterior(model, events).marginal_likelihood();
}

MonteCarloValue marginal_likelihood_wcr(const IntensityModel& model, const std::vector<double>& events,
                                        std::size_t draws, const RngStream& rng, int threads) {
  LevyCoxPosterior post(model, events);
  if (events.empty()) return {std::exp(post.log_laplace()), 0.0, draws};
  auto ws = wcr_sample_many(post.seating(), post.size(), draws, rng, threads);
  auto est = importance_estimate(ws, [](const WeightedDraw&) { return 1.0; });
  double scale = std::exp(post.log_laplace());
  return {scale * est.unnormalized_mean, scale * est.unnormalized_std_error, draws};
}

double posterior_partition_density(const IntensityModel& model, const std::vector<double>& events,
                                   const Partition& p) {
  return LevyCoxPosterior(model, events).posterior_partition_density(p);
}

double posterior_intensity_mean(const IntensityModel& model, const std::vector<double>& events, double t) {
  return LevyCoxPosterior(model, events).intensity_mean_given_x(t);
}

MonteCarloValue posterior_intensity_mean_wcr(const IntensityModel& model, const std::vector<double>& events,
                                             double t, std::size_t draws, const RngStream& rng, int threads) {
  LevyCoxPosterior post(model, events);
  double prior = post.prior_intensity_mean(t);
  if (events.empty()) return {prior, 0.0, draws};
  auto ws = wcr_sample_many(post.seating(), post.size(), draws, rng, threads);
  std::unordered_map<std::uint64_t, double> ratio;
  for (const auto& d : ws)
    for (auto m : d.partition.block_masks())
      if (!ratio.count(m)) ratio.emplace(m, post.block_intensity_ratio(m, t));
  auto est = importance_estimate(ws, [&](const WeightedDraw& d) {
    double v = 0.0;
    for (auto m : d.partition.block_masks()) v += ratio.at(m);
    return v;
  });
  return {prior + est.estimate, est.std_error, draws};
}

std::vector<PosteriorDraw> fit_posterior(const IntensityModel& model, const std::vector<double>& events,
                                         std::size_t draws, double eps, const RngStream& rng, int threads) {
  LevyCoxPosterior post(model, events);
  return post.fit(draws, eps, rng, threads);
}

MonteCarloValue weighted_posterior_mean(const std::vector<PosteriorDraw>& draws,
                                        const std::function<double(const PosteriorDraw&)>& g) {
  double m = -kInf;
  for (const auto& d : draws)
    if (d.error.empty()) m = std::max(m, d.log_weight);
  if (!std::isfinite(m)) throw InputError(kModule, "weighted_posterior_mean", "no successful draws");
  std::vector<double> w, v;
  KahanSum sw, swv;
  for (const auto& d : draws) {
    if (!d.error.empty()) continue;
    w.push_back(std::exp(d.log_weight - m));
    v.push_back(g(d));
    sw += w.back();
    swv += w.back() * v.back();
  }
  const double mean = swv.value() / sw.value();
  KahanSum var;
  for (std::size_t i = 0; i < w.size(); ++i) var += w[i] * w[i] * (v[i] - mean) * (v[i] - mean);
  return {mean, std::sqrt(var.value()) / sw.value(), w.size()};
}

}  // namespace ppcalc
