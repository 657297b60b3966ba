#include "ppcalc/pk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "ppcalc/errors.hpp"
#include "ppcalc/numerics.hpp"

namespace ppcalc {

namespace {

constexpr const char* kModule = "pk-eppf";

double lgam(double x) { return boost::math::lgamma(x); }

// Closed-form pieces of a supported intensity.
struct Family {
  double alpha;  // 0 or 1/2
  double rate;   // exponential rate, including linear tilts
  double mass;   // base mass
};

Family family_of(const LevyIntensity& li, const char* op) {
  if (!li.homogeneous()) throw UnsupportedOperation(kModule, op, "intensity must be homogeneous");
  if (!li.base().finite()) throw UnsupportedOperation(kModule, op, "base measure must be finite");
  if (li.jump_power() != 1.0) throw UnsupportedOperation(kModule, op, "only h(s) = s is supported");
  using F = LevyIntensity::Family;
  if (li.family() != F::GeneralizedGamma && li.family() != F::Stable)
    throw UnsupportedOperation(kModule, op, li.family_name() + " has no closed-form total-mass density");
  if (li.alpha() != 0.0 && li.alpha() != 0.5)
    throw UnsupportedOperation(kModule, op, "only alpha = 0 (gamma) and alpha = 1/2 are supported");
  auto r = li.exponential_rate(li.base().quantile(0.5 * li.base().total_mass()));
  if (!r) throw UnsupportedOperation(kModule, op, "tilts must be linear");
  return {li.alpha(), *r, li.base().total_mass()};
}

double log_fT(const Family& f, double t) {
  if (!(t > 0.0)) return -kInf;
  if (f.alpha == 0.0) return f.mass * std::log(f.rate) + (f.mass - 1) * std::log(t) - f.rate * t - lgam(f.mass);
  // stable(1/2) with Laplace exp(-c sqrt(v)), c = 2m, exponentially tilted
  const double c = 2.0 * f.mass;
  return std::log(c / (2.0 * std::sqrt(std::numbers::pi))) - 1.5 * std::log(t) - c * c / (4.0 * t) - f.rate * t +
         c * std::sqrt(f.rate);
}

double mass_scale(const Family& f) {
  if (f.alpha == 0.0) return f.mass / f.rate;
  const double c = 2.0 * f.mass;
  return c * c / 4.0 / (1.0 + c * std::sqrt(f.rate));
}

double integrate_t(const RealFn& fn, const Family& f, const std::vector<double>& breaks, double tol) {
  if (breaks.empty()) return integrate_halfline(fn, mass_scale(f), tol);
  return integrate_pieces(fn, 0.0, kInf, breaks, tol);
}

double weight_mean(const PKSpec& spec, const Family& f) {
  if (!spec.g) return 1.0;
  for (int i = -40; i <= 40; ++i) {
    double g = spec.g(mass_scale(f) * std::exp(0.5 * i));
    if (!(g >= 0.0)) throw ConfigError(kModule, "pk_weight_mean", "g must be nonnegative");
  }
  double m = integrate_t([&](double t) { return spec.g(t) * std::exp(log_fT(f, t)); }, f, spec.g_breaks, 1e-12);
  if (!std::isfinite(m)) throw DivergenceError(kModule, "pk_weight_mean", "E[g(T)] is infinite");
  if (!(m > 0.0)) throw DegenerateModelError(kModule, "pk_weight_mean", "E[g(T)] is zero");
  return m;
}

std::vector<int> sorted_sizes(const Partition& p) {
  std::vector<int> e(p.block_sizes().begin(), p.block_sizes().end());
  std::sort(e.begin(), e.end());
  return e;
}

}  // namespace

double pk_total_mass_density(const PKSpec& spec, double t) {
  return std::exp(log_fT(family_of(spec.li, "pk_total_mass_density"), t));
}

double pk_weight_mean(const PKSpec& spec) { return weight_mean(spec, family_of(spec.li, "pk_weight_mean")); }

double pk_eppf(const PKSpec& spec, const Partition& p) {
  const char* op = "pk_eppf";
  const Family f = family_of(spec.li, op);
  const int n = p.size();
  if (n < 1 || n > 8) throw SizeLimitError(kModule, op, "n must lie in 1..8");
  const auto e = sorted_sizes(p);
  const int k = static_cast<int>(e.size());
  // prod_j s_j^{e_j} rho(s_j) convolves to K w^{a-1} e^{-r w}
  const double a = n - k * f.alpha;
  double logK = -lgam(a);
  for (int ej : e) logK += std::log(f.mass) + lgam(ej - f.alpha) - lgam(1.0 - f.alpha);
  const double Eg = weight_mean(spec, f);
  // outer over t against f_T, inner over the jump sum w at scale t
  auto inner = [&](double t) {
    auto fw = [&](double w) {
      double u = t + w;
      double g = spec.g ? spec.g(u) : 1.0;
      if (g == 0.0) return 0.0;
      return g * std::exp(logK + (a - 1) * std::log(w) - f.rate * w - n * std::log(u));
    };
    std::vector<double> br;
    for (double x : spec.g_breaks)
      if (x > t) br.push_back(x - t);
    if (br.empty()) return integrate_halfline(fw, t, 1e-12);
    return integrate_pieces(fw, 0.0, kInf, br, 1e-12);
  };
  auto outer = [&](double t) {
    double lf = log_fT(f, t);
    return lf == -kInf ? 0.0 : std::exp(lf) * inner(t);
  };
  double v = integrate_halfline(outer, mass_scale(f), 1e-11) / Eg;
  if (!std::isfinite(v)) throw DivergenceError(kModule, op, "EPPF integral diverges");
  return v;
}

double pk_joint_density(const PKSpec& spec, const Partition& p, const std::vector<double>& point) {
  const char* op = "pk_joint_density";
  const Family f = family_of(spec.li, op);
  const int k = p.num_blocks();
  if (static_cast<int>(point.size()) != k + 1) throw ConfigError(kModule, op, "point needs k jumps and t");
  const double t = point[k];
  double u = t, lg = log_fT(f, t);
  for (int j = 0; j < k; ++j) {
    double s = point[j];
    if (!(s > 0.0)) return 0.0;
    u += s;
    int ej = p.block_sizes()[j];
    lg += ej * std::log(s) + std::log(f.mass) - (1 + f.alpha) * std::log(s) - f.rate * s - lgam(1.0 - f.alpha);
  }
  if (!(t > 0.0)) return 0.0;
  double g = spec.g ? spec.g(u) : 1.0;
  return g * std::exp(lg - p.size() * std::log(u)) / weight_mean(spec, f);
}

PKStructure pk_posterior_structure(const PKSpec& spec, const Partition& p, const std::vector<double>& ystar,
                                   const std::vector<std::vector<double>>& points) {
  const char* op = "pk_posterior_structure";
  family_of(spec.li, op);
  const int k = p.num_blocks();
  if (static_cast<int>(ystar.size()) != k) throw ConfigError(kModule, op, "one distinct value per block is required");
  PKStructure out;
  out.normalizer = pk_eppf(spec, p);
  out.points = points;
  for (const auto& pt : points) {
    out.density.push_back(pk_joint_density(spec, p, pt) / out.normalizer);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += pt[j];
    out.R.push_back(pt[k] / (pt[k] + sum));
  }
  return out;
}

}  // namespace ppcalc
