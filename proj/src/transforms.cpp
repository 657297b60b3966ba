#include "ppcalc/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ppcalc/errors.hpp"
#include "ppcalc/numerics.hpp"
#include "ppcalc/parallel.hpp"

namespace ppcalc {

namespace {

constexpr const char* kModule = "transforms";

struct Combined {
  RealFn g;
  std::vector<double> breaks;
};

// g = sum_l z_l f_l, checked nonnegative on a grid over the support.
Combined combine(const std::vector<LinearTerm>& terms, const BaseMeasure& H, const char* op) {
  Combined c;
  for (const auto& t : terms) {
    if (!(t.z >= 0.0) || !std::isfinite(t.z)) throw ConfigError(kModule, op, "z must be finite and nonnegative");
    c.breaks.insert(c.breaks.end(), t.f.breakpoints.begin(), t.f.breakpoints.end());
  }
  std::sort(c.breaks.begin(), c.breaks.end());
  c.breaks.erase(std::unique(c.breaks.begin(), c.breaks.end()), c.breaks.end());
  c.g = [terms](double y) {
    double s = 0.0;
    for (const auto& t : terms)
      if (t.z != 0.0) s += t.z * t.f.fn(y);
    return s;
  };
  const double m = H.total_mass();
  std::vector<double> probe = c.breaks;
  for (int i = 1; i < 256; ++i) probe.push_back(H.quantile(m * i / 256.0));
  for (double y : probe) {
    if (y < H.support().lo || y > H.support().hi) continue;
    double v = c.g(y);
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ConfigError(kModule, op, "sum of z_l f_l must be finite and nonnegative on the support");
  }
  return c;
}

// Integral of exp(log f(e^u)) e^u over the effective range of a mixing law,
// split at the grid maximum of the mixing density.
double v_integral(const MixingDensity& pi, const std::function<double(double)>& f) {
  const double lo = std::log(pi.lower()), hi = std::log(pi.upper());
  double best = lo, bv = -kInf;
  for (int i = 0; i <= 200; ++i) {
    double u = lo + (hi - lo) * i / 200.0;
    double d = pi.log_density(std::exp(u)) + u;
    if (d > bv) {
      bv = d;
      best = u;
    }
  }
  auto h = [&](double u) { return f(std::exp(u)) * std::exp(u); };
  return integrate(h, lo, best, 1e-12) + integrate(h, best, hi, 1e-12);
}

}  // namespace

double stieltjes_via_mixing(const TransformRequest& req) {
  const auto& li = req.spec.li;
  const double theta = req.spec.theta;
  if (!li.homogeneous()) throw UnsupportedOperation(kModule, "stieltjes_via_mixing", "intensity must be homogeneous");
  if (!li.base().finite()) throw UnsupportedOperation(kModule, "stieltjes_via_mixing", "base must be finite");
  Combined c = combine(req.terms, li.base(), "stieltjes_via_mixing");

  if (req.order == TransformOrder::Theta) {
    if (!(theta > 0.0)) throw ConfigError(kModule, "stieltjes_via_mixing", "theta must be positive");
    MixingDensity pi({li, theta, 0}, MixingKind::Scaled);
    // L_mu(v g | e^{-vh} rho) against pi_theta(dv)
    auto f = [&](double v) {
      double d = pi(v);
      if (d == 0.0) return 0.0;
      auto tilted = li.tilted(TiltTerm::linear(v));
      return d * std::exp(-laplace_exponent(tilted, [&](double y) { return v * c.g(y); }, c.breaks));
    };
    return v_integral(pi, f);
  }

  const int n = req.spec.n;
  if (n < 1 || n > 8) throw SizeLimitError(kModule, "stieltjes_via_mixing", "n must be in 1..8");
  if (!(theta + n > 0.0)) throw ConfigError(kModule, "stieltjes_via_mixing", "need theta + n > 0");
  MixingDensity pi({li, theta, n}, MixingKind::ScaledJoint);
  std::map<std::vector<int>, double> shapes;
  for_each_partition(n, [&](std::span<const int>, std::span<const int> sizes, int k) {
    std::vector<int> s(sizes.begin(), sizes.begin() + k);
    std::sort(s.begin(), s.end());
    shapes[s] += 1.0;
  });
  KahanSum total;
  for (const auto& [sizes, count] : shapes) {
    std::vector<int> a;
    for (std::size_t j = 0; j < sizes.size(); ++j) a.insert(a.end(), sizes[j], static_cast<int>(j));
    const Partition rep = Partition::from_assignment(a);
    auto f = [&](double v) {
      double d = pi(v, rep);
      if (d == 0.0) return 0.0;
      return d * conditional_laplace_functional(li, v, sizes, [&](double y) { return v * c.g(y); }, c.breaks);
    };
    total += count * v_integral(pi, f);
  }
  // pi(v, p) is self-normalized; undo that so the value is the formula itself
  return total.value() * pi.normalizer();
}

double pd_stieltjes_closed_form(double alpha, double theta, const BaseMeasure& H,
                                const std::vector<LinearTerm>& terms) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError(kModule, "pd_stieltjes_closed_form", "alpha must be in (0,1)");
  if (!(theta > -alpha)) throw ConfigError(kModule, "pd_stieltjes_closed_form", "theta must exceed -alpha");
  if (!H.finite() || !(H.total_mass() > 0.0))
    throw ConfigError(kModule, "pd_stieltjes_closed_form", "base must have finite positive mass");
  Combined c = combine(terms, H, "pd_stieltjes_closed_form");
  auto f = [&](double y) { return std::pow(1.0 + c.g(y), alpha) * H.density(y); };
  const Interval s = H.support();
  std::vector<double> br = c.breaks;
  br.insert(br.end(), H.breakpoints().begin(), H.breakpoints().end());
  double m;
  if (std::isfinite(s.lo) && std::isfinite(s.hi))
    m = integrate_legendre(f, s.lo, s.hi, br, 1e-12);
  else
    m = H.integrate([&](double y) { return std::pow(1.0 + c.g(y), alpha); }, c.breaks, 1e-13);
  return std::pow(m / H.total_mass(), -theta / alpha);
}

stats::MeanEstimate mc_transform_estimate(const MeasureSampler& sampler, const std::vector<LinearTerm>& terms,
                                          double exponent, int B, const RngStream& rng, const BaseMeasure* compensate,
                                          int threads) {
  if (B < 1) throw ConfigError(kModule, "mc_transform_estimate", "B must be positive");
  for (const auto& t : terms)
    if (!(t.z >= 0.0)) throw ConfigError(kModule, "mc_transform_estimate", "z must be nonnegative");
  std::vector<double> base_means(terms.size(), 0.0);
  if (compensate)
    for (std::size_t l = 0; l < terms.size(); ++l)
      base_means[l] = compensate->integrate(terms[l].f.fn, terms[l].f.breakpoints) / compensate->total_mass();
  std::vector<double> xs(B);
  parallel_for(static_cast<std::size_t>(B), threads, [&](std::size_t b) {
    RngStream r = rng.substream(b);
    AtomicMeasureDraw d = sampler(r);
    double S = d.total_weight();
    double tb = compensate ? d.truncation_bound : 0.0;
    double lin = 0.0;
    for (std::size_t l = 0; l < terms.size(); ++l) {
      if (terms[l].z == 0.0) continue;
      double pf = tb * base_means[l];
      for (const auto& a : d.atoms) pf += a.weight * terms[l].f.fn(a.location);
      lin += terms[l].z * pf;
    }
    xs[b] = std::pow(1.0 + lin / (S + tb), -exponent);
  });
  return stats::mean_and_stderr(xs);
}

}  // namespace ppcalc
