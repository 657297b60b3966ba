#include "ppcalc/scaled.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "ppcalc/errors.hpp"
#include "ppcalc/numerics.hpp"
#include "ppcalc/wcr.hpp"

namespace ppcalc {

namespace {

constexpr const char* kModule = "scaled-mixtures";
constexpr double kCut = 37.0;  // e^{-37} ~ 1e-16 of the peak
constexpr double kGridLo = -350.0, kGridHi = 350.0, kGridStep = 0.5, kGridLimit = 700.0;

void require_homogeneous(const LevyIntensity& li, const char* op) {
  if (!li.homogeneous()) throw UnsupportedOperation(kModule, op, "intensity must be homogeneous");
  if (!li.base().finite()) throw UnsupportedOperation(kModule, op, "base measure must be finite");
}

double y0_of(const LevyIntensity& li) { return li.base().quantile(0.5 * li.base().total_mass()); }

struct LogIntegral {
  double log_value;
  double lo, hi;  // in u = log v
};

// log of int_0^inf exp(lf(log v)) dv, computed in u = log v with the tails
// cut where the integrand falls below e^{-37} of its peak.
LogIntegral log_integral(const std::function<double(double)>& lf, const char* op) {
  auto g = [&](double u) {
    double x = lf(u) + u;
    return std::isnan(x) ? -kInf : x;
  };
  // grid in u, widened toward the numeric limits of v while a tail has not
  // yet dropped below the cutoff
  std::deque<double> gv;
  double glo = kGridLo, ghi = kGridHi;
  for (double u = glo; u <= ghi + 1e-9; u += kGridStep) gv.push_back(g(u));
  auto peak_of = [&] { return *std::max_element(gv.begin(), gv.end()); };
  double peak = peak_of();
  while (peak < kInf) {
    bool grown = false;
    if (gv.front() > peak - kCut && glo > -kGridLimit) {
      for (int i = 0; i < 100; ++i) gv.push_front(g(glo -= kGridStep));
      grown = true;
    }
    if (gv.back() > peak - kCut && ghi < kGridLimit) {
      for (int i = 0; i < 100; ++i) gv.push_back(g(ghi += kGridStep));
      grown = true;
    }
    if (!grown) break;
    peak = peak_of();
  }
  if (peak == kInf) throw DivergenceError(kModule, op, "integrand is unbounded");
  if (peak == -kInf) throw DegenerateModelError(kModule, op, "integrand vanishes");
  const double floor = peak - kCut;
  if (gv.front() > floor || gv.back() > floor)
    throw DivergenceError(kModule, op, "mixing integral does not converge (integrand does not decay)");
  const int m = static_cast<int>(gv.size());
  const int ipeak = static_cast<int>(std::max_element(gv.begin(), gv.end()) - gv.begin());
  int ilo = 0, ihi = m - 1;
  while (gv[ilo + 1] <= floor) ++ilo;
  while (gv[ihi - 1] <= floor) --ihi;
  const double ulo = glo + ilo * kGridStep, uhi = glo + ihi * kGridStep;
  const double upk = glo + ipeak * kGridStep;
  auto f = [&](double u) { return std::exp(g(u) - peak); };
  double v = integrate(f, ulo, upk, 1e-12) + integrate(f, upk, uhi, 1e-12);
  if (!(v > 0.0) || !std::isfinite(v)) throw NumericError(kModule, op, "mixing integral failed");
  return {peak + std::log(v), ulo, uhi};
}

double psi(const LevyIntensity& li, double v) { return -log_laplace_transform(li, v); }

}  // namespace

double log_v_integral(const std::function<double(double)>& lf, const char* op) {
  return log_integral(lf, op).log_value;
}

// ---------------------------------------------------------------- building blocks

double log_laplace_transform(const LevyIntensity& li, double v) {
  require_homogeneous(li, "laplace_transform");
  if (!(v >= 0.0)) throw ConfigError(kModule, "laplace_transform", "v must be nonnegative");
  if (v == 0.0) return 0.0;
  return -laplace_exponent_constant(li, v);
}

double log_kappa_tilted(const LevyIntensity& li, int e, double v) {
  require_homogeneous(li, "kappa");
  if (e < 1) throw ConfigError(kModule, "kappa", "order must be positive");
  const double y = y0_of(li);
  const double p = li.jump_power();
  auto rate = li.exponential_rate(y);
  if (rate && p == 1.0) {
    const double r = *rate + v;
    switch (li.family()) {
      case LevyIntensity::Family::GeneralizedGamma:
      case LevyIntensity::Family::Stable: {
        const double a = e - li.alpha();
        if (!(r > 0.0)) return kInf;
        return std::lgamma(a) - std::lgamma(1.0 - li.alpha()) - a * std::log(r);
      }
      case LevyIntensity::Family::CompoundPoisson: {
        const double a = li.cp_shape(), jr = li.cp_jump_rate();
        return std::log(li.cp_rate()) + a * std::log(jr) + std::lgamma(a + e) - std::lgamma(a) -
               (a + e) * std::log(jr + r);
      }
      default: break;
    }
  }
  double k = kappa(v == 0.0 ? li : li.tilted(TiltTerm::linear(v)), e, y);
  return k > 0.0 ? std::log(k) : -kInf;
}

double log_block_product(const LevyIntensity& li, std::span<const int> sizes, double v) {
  const double lc = std::log(li.base().total_mass());
  double s = 0.0;
  for (int e : sizes) s += lc + log_kappa_tilted(li, e, v);
  return s;
}

double log_tilted_moment(const LevyIntensity& li, int n, double v) {
  if (n < 0) throw ConfigError(kModule, "tilted_moment", "order must be nonnegative");
  if (n == 0) return 0.0;
  const double lc = std::log(li.base().total_mass());
  // m_k = sum_j C(k-1, j-1) k_j m_{k-j} with cumulants k_j = c kappa_j
  std::vector<double> lk(n + 1), lm(n + 1);
  for (int j = 1; j <= n; ++j) lk[j] = lc + log_kappa_tilted(li, j, v);
  lm[0] = 0.0;
  std::vector<double> terms;
  for (int k = 1; k <= n; ++k) {
    terms.clear();
    for (int j = 1; j <= k; ++j) {
      double lb = std::lgamma(k) - std::lgamma(j) - std::lgamma(k - j + 1);
      terms.push_back(lb + lk[j] + lm[k - j]);
    }
    lm[k] = log_sum_exp(terms);
  }
  return lm[n];
}

double log_negative_moment(const LevyIntensity& li, double s) {
  require_homogeneous(li, "negative_moment");
  if (s == 0.0) return 0.0;
  if (s > 0.0) {
    auto r = log_integral([&](double u) { return (s - 1.0) * u - psi(li, std::exp(u)); }, "negative_moment");
    return r.log_value - std::lgamma(s);
  }
  if (s > -1.0) {
    // E[T^r] = r / Gamma(1-r) int (1 - E e^{-vT}) v^{-r-1} dv, 0 < r < 1
    const double r = -s;
    auto li_ = log_integral(
        [&](double u) {
          double q = -std::expm1(-psi(li, std::exp(u)));
          return (q > 0.0 ? std::log(q) : -kInf) - (r + 1.0) * u;
        },
        "negative_moment");
    return std::log(r) - std::lgamma(1.0 - r) + li_.log_value;
  }
  if (s == std::floor(s)) {
    double m = log_tilted_moment(li, static_cast<int>(-s), 0.0);
    if (!std::isfinite(m)) throw DivergenceError(kModule, "negative_moment", "moment is infinite");
    return m;
  }
  throw UnsupportedOperation(kModule, "negative_moment", "E[T^r] for non-integer r > 1 is not supported");
}

double moment_ratio(const LevyIntensity& li, double theta, int n) {
  require_homogeneous(li, "moment_ratio");
  if (n < 1 || !(theta + n > 0.0)) throw ConfigError(kModule, "moment_ratio", "need n >= 1 and theta + n > 0");
  try {
    return std::exp(log_negative_moment(li, theta) - log_negative_moment(li, theta + n));
  } catch (const UnsupportedOperation&) {
    // E[T^n] under pi_{theta+n}
    const double s = theta + n;
    auto z = log_integral([&](double u) { return (s - 1.0) * u - psi(li, std::exp(u)); }, "moment_ratio");
    auto t = log_integral(
        [&](double u) { return log_tilted_moment(li, n, std::exp(u)) + (s - 1.0) * u - psi(li, std::exp(u)); },
        "moment_ratio");
    return std::exp(t.log_value - z.log_value);
  }
}

// log E[T^{-theta}]; when no direct route exists it is recovered from the
// normalization of the joint (theta+n, theta) mixing density.
double log_scaling_moment(const LevyIntensity& li, double theta, int n) {
  try {
    return log_negative_moment(li, theta);
  } catch (const UnsupportedOperation&) {
    const double s = theta + n;
    return log_integral(
               [&](double u) { return log_tilted_moment(li, n, std::exp(u)) + (s - 1.0) * u - psi(li, std::exp(u)); },
               "scaling_moment")
               .log_value -
           std::lgamma(s);
  }
}

// ---------------------------------------------------------------- mixing densities

MixingDensity::MixingDensity(ScaledLawSpec spec, MixingKind kind) : spec_(std::move(spec)), kind_(kind) {
  const auto& li = spec_.li;
  require_homogeneous(li, "mixing_density");
  const double th = spec_.theta;
  const int n = spec_.n;
  if (n < 0) throw ConfigError(kModule, "mixing_density", "n must be nonnegative");
  if (kind_ != MixingKind::Scaled && n < 1) throw ConfigError(kModule, "mixing_density", "joint kinds need n >= 1");
  if (kind_ != MixingKind::Joint && !(th + n > 0.0))
    throw DivergenceError(kModule, "mixing_density", "pi_{theta+n} is not integrable for theta + n <= 0");
  if (kind_ == MixingKind::Scaled) {
    if (th > 0.0) log_negative_moment(li, th);  // throws when E[T^{-theta}] is infinite
    const double s = th + n;
    log_scaled_norm_ =
        log_integral([&](double u) { return (s - 1.0) * u - psi(li, std::exp(u)); }, "mixing_density").log_value;
  } else if (kind_ == MixingKind::ScaledJoint) {
    // R pi_{theta+n} = v^{theta+n-1} e^{-psi} / (Gamma(theta+n) E[T^{-theta}])
    log_scaled_norm_ = std::lgamma(th + n) + log_scaling_moment(li, th, n);
  }
  log_norm_ = 0.0;
  auto r = log_integral([&](double u) { return log_unnormalized(std::exp(u)); }, "mixing_density");
  log_norm_ = r.log_value;
  u_lo_ = r.lo;
  u_hi_ = r.hi;
}

double MixingDensity::log_unnormalized(double v) const {
  const auto& li = spec_.li;
  const double th = spec_.theta;
  const int n = spec_.n;
  const double lv = std::log(v);
  switch (kind_) {
    case MixingKind::Scaled: return (th + n - 1.0) * lv - psi(li, v);
    case MixingKind::Joint:
      return log_tilted_moment(li, n, v) + (n - 1.0) * lv - psi(li, v) - std::lgamma(n);
    case MixingKind::ScaledJoint:
      return log_tilted_moment(li, n, v) + (th + n - 1.0) * lv - psi(li, v) - log_scaled_norm_;
  }
  return -kInf;
}

double MixingDensity::log_unnormalized_joint(double v, std::span<const int> sizes) const {
  const auto& li = spec_.li;
  const double th = spec_.theta;
  const int n = spec_.n;
  const double lv = std::log(v);
  const double lb = log_block_product(li, sizes, v);
  if (kind_ == MixingKind::Joint) return lb + (n - 1.0) * lv - psi(li, v) - std::lgamma(n);
  return lb + (th + n - 1.0) * lv - psi(li, v) - log_scaled_norm_;
}

double MixingDensity::log_density(double v) const {
  if (!(v > 0.0)) return -kInf;
  return log_unnormalized(v) - log_norm_;
}

double MixingDensity::operator()(double v) const { return std::exp(log_density(v)); }

double MixingDensity::operator()(double v, const Partition& p) const {
  if (kind_ == MixingKind::Scaled) throw ConfigError(kModule, "mixing_density", "scaled kind has no partition");
  if (p.size() != spec_.n) throw ConfigError(kModule, "mixing_density", "partition size must equal n");
  if (!(v > 0.0)) return 0.0;
  return std::exp(log_unnormalized_joint(v, p.block_sizes()) - log_norm_);
}

double MixingDensity::partition_probability(const Partition& p) const {
  if (kind_ == MixingKind::Scaled) throw ConfigError(kModule, "partition_probability", "scaled kind has no partition");
  if (p.size() != spec_.n) throw ConfigError(kModule, "partition_probability", "partition size must equal n");
  auto sizes = p.block_sizes();
  auto r = log_integral([&](double u) { return log_unnormalized_joint(std::exp(u), sizes); }, "partition_probability");
  return std::exp(r.log_value - log_norm_);
}

double MixingDensity::cdf(double v) const {
  if (!(v > 0.0)) return 0.0;
  const double u = std::log(v);
  if (u <= u_lo_) return 0.0;
  if (u >= u_hi_) return 1.0;
  auto f = [&](double w) { return std::exp(log_unnormalized(std::exp(w)) + w - log_norm_); };
  double lower = integrate(f, u_lo_, u, 1e-12);
  if (lower < 0.5) return lower;
  return std::clamp(1.0 - integrate(f, u, u_hi_, 1e-12), 0.0, 1.0);
}

MixingDensity mixing_density(const ScaledLawSpec& spec, MixingKind kind) { return MixingDensity(spec, kind); }

double eppf_via_mixing(const LevyIntensity& li, double theta, const Partition& p) {
  require_homogeneous(li, "eppf_via_mixing");
  const int n = p.size();
  if (n < 1) throw ConfigError(kModule, "eppf_via_mixing", "empty partition");
  if (!(theta + n > 0.0)) throw ConfigError(kModule, "eppf_via_mixing", "need theta + n > 0");
  auto sizes = p.block_sizes();
  const double s = theta + n;
  // (E[T^{-(theta+n)}]/E[T^{-theta}]) int prod kappa pi_{theta+n}(dv); the
  // normalizer of pi_{theta+n} cancels E[T^{-(theta+n)}]
  auto r = log_integral(
      [&](double u) { return log_block_product(li, sizes, std::exp(u)) + (s - 1.0) * u - psi(li, std::exp(u)); },
      "eppf_via_mixing");
  return std::exp(r.log_value - std::lgamma(s) - log_scaling_moment(li, theta, n));
}

// ---------------------------------------------------------------- Laplace functionals

double conditional_laplace_functional(const LevyIntensity& li, double v, std::span<const int> sizes,
                                      const RealFn& g, const std::vector<double>& g_breaks) {
  require_homogeneous(li, "conditional_laplace");
  LevyIntensity tilted = v == 0.0 ? li : li.tilted(TiltTerm::linear(v));
  double l = -laplace_exponent(tilted, g, g_breaks);
  const auto& base = li.base();
  for (int e : sizes) {
    const double k0 = log_kappa_tilted(li, e, v);
    double m = base.integrate([&](double y) { return std::exp(log_kappa_tilted(li, e, v + g(y)) - k0); }, g_breaks,
                              1e-12);
    l += std::log(m / base.total_mass());
  }
  return std::exp(l);
}

double laplace_functional_mixture(const LevyIntensity& li, double theta, int n, const RealFn& g,
                                  const std::vector<double>& g_breaks) {
  require_homogeneous(li, "laplace_functional_mixture");
  if (n < 1 || n > 8) throw SizeLimitError(kModule, "laplace_functional_mixture", "n must be in 1..8");
  // group set partitions by their sorted block sizes
  std::map<std::vector<int>, double> shapes;
  for_each_partition(n, [&](std::span<const int>, std::span<const int> sizes, int k) {
    std::vector<int> s(sizes.begin(), sizes.begin() + k);
    std::sort(s.begin(), s.end());
    shapes[s] += 1.0;
  });
  const MixingKind kind = theta == 0.0 ? MixingKind::Joint : MixingKind::ScaledJoint;
  MixingDensity pi({li, theta, n}, kind);
  KahanSum total;
  for (const auto& [sizes, count] : shapes) {
    Partition rep = [&] {
      std::vector<int> a;
      for (std::size_t j = 0; j < sizes.size(); ++j) a.insert(a.end(), sizes[j], static_cast<int>(j));
      return Partition::from_assignment(a);
    }();
    // integrate the conditional functional against pi(v, p) over the
    // effective range of the marginal
    auto f = [&](double u) {
      double v = std::exp(u);
      double d = pi(v, rep);
      if (d == 0.0) return 0.0;
      return d * v * conditional_laplace_functional(li, v, sizes, g, g_breaks);
    };
    total += count * integrate(f, std::log(pi.lower()), std::log(pi.upper()), 1e-10);
  }
  return total.value() * pi.normalizer();
}

double pd_scaled_laplace(double alpha, double theta, const BaseMeasure& H, const RealFn& g,
                         const std::vector<double>& g_breaks) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError(kModule, "pd_scaled_laplace", "alpha must be in (0,1)");
  if (!(theta > 0.0)) throw ConfigError(kModule, "pd_scaled_laplace", "theta must be positive");
  const BaseMeasure eta = H.scaled(alpha / H.total_mass());
  const double shape = theta / alpha;
  auto f = [&](double L) {
    if (!(L > 0.0) || !std::isfinite(L)) return 0.0;
    const double b = std::pow(L, 1.0 / alpha);
    if (!std::isfinite(b)) return 0.0;
    auto li = LevyIntensity::generalized_gamma(alpha, b, eta);
    double cond = -laplace_exponent(li, [&](double y) { return b * g(y); }, g_breaks);
    return std::exp(cond + (shape - 1.0) * std::log(L) - L - std::lgamma(shape));
  };
  return integrate_halfline(f, shape, 1e-11);
}

// ---------------------------------------------------------------- PD samplers

namespace {

void check_pd(double alpha, double theta, const char* op) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError(kModule, op, "alpha must be in (0,1)");
  if (!(theta > -alpha)) throw ConfigError(kModule, op, "theta must exceed -alpha");
}

}  // namespace

PdMixtureDraw pd_mixture_sample(double alpha, double theta, const BaseMeasure& H, int n, double eps,
                                RngStream& rng) {
  check_pd(alpha, theta, "pd_mixture_sample");
  if (n < 0) throw ConfigError(kModule, "pd_mixture_sample", "n must be nonnegative");
  if (n == 0 && !(theta > 0.0)) throw ConfigError(kModule, "pd_mixture_sample", "n = 0 needs theta > 0");
  if (!(eps > 0.0)) throw ConfigError(kModule, "pd_mixture_sample", "eps must be positive");
  PdMixtureDraw out;
  int k = 0;
  std::vector<int> sizes;
  if (n > 0) {
    PdSeating seat(EppfSpec::two_param(alpha, theta));
    out.partition = wcr_sample(seat, n, rng).partition;
    k = out.partition.num_blocks();
    auto s = out.partition.block_sizes();
    sizes.assign(s.begin(), s.end());
  }
  out.L = rng.gamma(k + theta / alpha, 1.0);
  const double b = std::pow(out.L, 1.0 / alpha);
  // eta = alpha H makes the total-mass constant of the mixing law one
  auto li = LevyIntensity::generalized_gamma(alpha, b, H);
  out.measure = inverse_levy_atoms(li, alpha, eps / b, rng);
  out.continuous_total = out.measure.compensated_total();
  for (int j = 0; j < k; ++j) {
    double J = rng.gamma(sizes[j] - alpha, b);
    double y = H.sample(rng);
    out.jumps.push_back(J);
    out.locations.push_back(y);
    out.measure.atoms.push_back({J, y});
  }
  return out;
}

AtomicMeasureDraw pd_inverse_levy_sample(double alpha, double theta, const BaseMeasure& H, int j_max,
                                         RngStream& rng) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError(kModule, "pd_inverse_levy_sample", "alpha must be in (0,1)");
  if (!(theta >= 0.0)) throw ConfigError(kModule, "pd_inverse_levy_sample", "theta must be nonnegative");
  if (j_max < 1) throw ConfigError(kModule, "pd_inverse_levy_sample", "j_max must be positive");
  AtomicMeasureDraw out;
  out.seed = rng.seed();
  out.stream = rng.stream();
  std::vector<double> u(j_max);
  double arrival = 0.0, residual = 0.0;
  const double lg = std::lgamma(1.0 - alpha);
  if (theta == 0.0) {
    // untilted stable with eta = alpha H: tail u^{-alpha}/Gamma(1-alpha)
    for (int j = 0; j < j_max; ++j) {
      arrival += rng.exponential();
      u[j] = std::exp(-(std::log(arrival) + lg) / alpha);
    }
    residual = alpha * std::exp((1.0 - alpha) * std::log(u.back()) - lg) / (1.0 - alpha);
  } else {
    const double L = rng.gamma(theta / alpha, 1.0);
    InverseLevySampler s(LevyIntensity::generalized_gamma(alpha, 1.0, H));
    double guess = 0.0;
    for (int j = 0; j < j_max; ++j) {
      arrival += rng.exponential();
      u[j] = s.inverse_tail(arrival / (L * alpha), guess);
      if (!(u[j] > 0.0)) throw NumericError(kModule, "pd_inverse_levy_sample", "tail inversion failed");
      guess = u[j];
    }
    residual = L * alpha * s.residual(u.back());
  }
  KahanSum sum;
  for (double x : u) sum += x;
  const double S = sum.value();
  for (double x : u) out.atoms.push_back({x / S, H.sample(rng)});
  out.truncation_bound = residual / (S + residual);
  out.truncation_level = u.back() / S;
  return out;
}

PdPosteriorDraw pd_posterior_measure(double alpha, double theta, const std::vector<double>& y_star,
                                     const Partition& p, const BaseMeasure& H, int j_max, RngStream& rng) {
  check_pd(alpha, theta, "pd_posterior_measure");
  const int k = p.num_blocks();
  if (static_cast<int>(y_star.size()) != k)
    throw ConfigError(kModule, "pd_posterior_measure", "need one location per block");
  const double shape0 = theta + k * alpha;
  const double g0 = rng.gamma(shape0, 1.0);
  std::vector<double> gj;
  KahanSum gs;
  auto sizes = p.block_sizes();
  for (int j = 0; j < k; ++j) {
    gj.push_back(rng.gamma(sizes[j] - alpha, 1.0));
    gs += gj.back();
  }
  PdPosteriorDraw out;
  out.p_n = g0 / (g0 + gs.value());
  auto cont = pd_inverse_levy_sample(alpha, shape0, H, j_max, rng);
  for (const auto& a : cont.atoms) out.measure.atoms.push_back({out.p_n * a.weight, a.location});
  for (int j = 0; j < k; ++j) {
    out.fixed_weights.push_back((1.0 - out.p_n) * gj[j] / gs.value());
    out.measure.atoms.push_back({out.fixed_weights.back(), y_star[j]});
  }
  out.measure.truncation_bound = out.p_n * cont.truncation_bound;
  out.measure.truncation_level = out.p_n * cont.truncation_level;
  out.measure.seed = cont.seed;
  out.measure.stream = cont.stream;
  return out;
}

double gg_scaled_joint_density(double alpha, double b, double theta_mass, int n, double v, const Partition& p) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError(kModule, "gg_scaled_joint_density", "alpha must be in [0,1)");
  if (!(b >= 0.0) || (alpha == 0.0 && !(b > 0.0)))
    throw ConfigError(kModule, "gg_scaled_joint_density", "b must be nonnegative, positive when alpha = 0");
  if (!(theta_mass > 0.0)) throw ConfigError(kModule, "gg_scaled_joint_density", "mass must be positive");
  if (n < 1 || p.size() != n) throw ConfigError(kModule, "gg_scaled_joint_density", "partition size must equal n");
  if (!(v > 0.0)) return 0.0;
  const int k = p.num_blocks();
  double l = k * std::log(theta_mass) - std::lgamma(n);
  for (int e : p.block_sizes()) l += std::lgamma(e - alpha) - std::lgamma(1.0 - alpha);
  l += (-n + k * alpha) * std::log(v + b) + (n - 1.0) * std::log(v);
  // [(v+b)^alpha - b^alpha]/alpha, stable as alpha -> 0
  double lap;
  if (b > 0.0) {
    const double lr = std::log1p(v / b);
    lap = alpha > 0.0 ? std::pow(b, alpha) * std::expm1(alpha * lr) / alpha : lr;
  } else {
    lap = std::pow(v, alpha) / alpha;
  }
  l -= theta_mass * lap;
  return std::exp(l);
}

}  // namespace ppcalc
