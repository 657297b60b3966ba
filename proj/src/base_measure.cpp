#include "ppcalc/base_measure.hpp"

#include <algorithm>
#include <cmath>

#include "ppcalc/errors.hpp"

namespace ppcalc {

BaseMeasure BaseMeasure::uniform(double a, double b, double mass) {
  if (!(b > a) || !(mass > 0.0) || !std::isfinite(mass))
    throw ConfigError("levy-catalog", "BaseMeasure", "uniform needs a < b and finite mass > 0");
  BaseMeasure m;
  m.name_ = "uniform";
  m.support_ = {a, b};
  m.total_ = mass;
  const double d = mass / (b - a);
  m.density_ = [a, b, d](double y) { return (y >= a && y <= b) ? d : 0.0; };
  m.cumulative_ = [a, b, d](double y) { return d * (std::clamp(y, a, b) - a); };
  m.quantile_ = [a, d](double x) { return a + x / d; };
  return m;
}

BaseMeasure BaseMeasure::exponential(double rate, double mass) {
  if (!(rate > 0.0) || !(mass > 0.0) || !std::isfinite(mass))
    throw ConfigError("levy-catalog", "BaseMeasure", "exponential needs rate > 0 and finite mass > 0");
  BaseMeasure m;
  m.name_ = "exponential";
  m.support_ = {0.0, kInf};
  m.total_ = mass;
  m.density_ = [rate, mass](double y) { return y >= 0.0 ? mass * rate * std::exp(-rate * y) : 0.0; };
  m.cumulative_ = [rate, mass](double y) { return y <= 0.0 ? 0.0 : -mass * std::expm1(-rate * y); };
  m.quantile_ = [rate, mass](double x) { return -std::log1p(-x / mass) / rate; };
  return m;
}

BaseMeasure BaseMeasure::piecewise(std::vector<double> edges, std::vector<double> density) {
  if (edges.size() < 2 || density.size() + 1 != edges.size())
    throw ConfigError("levy-catalog", "BaseMeasure", "piecewise needs k+1 edges for k densities");
  std::vector<double> cum{0.0};
  for (std::size_t i = 0; i < density.size(); ++i) {
    if (!(edges[i + 1] > edges[i]) || !(density[i] >= 0.0))
      throw ConfigError("levy-catalog", "BaseMeasure", "piecewise edges must increase, densities be >= 0");
    cum.push_back(cum.back() + density[i] * (edges[i + 1] - edges[i]));
  }
  if (!(cum.back() > 0.0))
    throw ConfigError("levy-catalog", "BaseMeasure", "piecewise measure has zero mass");
  BaseMeasure m;
  m.name_ = "piecewise";
  m.support_ = {edges.front(), edges.back()};
  m.total_ = cum.back();
  m.breaks_ = edges;
  m.density_ = [edges, density](double y) {
    if (y < edges.front() || y > edges.back()) return 0.0;
    auto it = std::upper_bound(edges.begin(), edges.end(), y);
    std::size_t i = std::min<std::size_t>(it - edges.begin(), density.size()) - 1;
    return density[i];
  };
  m.cumulative_ = [edges, density, cum](double y) {
    if (y <= edges.front()) return 0.0;
    if (y >= edges.back()) return cum.back();
    auto it = std::upper_bound(edges.begin(), edges.end(), y);
    std::size_t i = (it - edges.begin()) - 1;
    return cum[i] + density[i] * (y - edges[i]);
  };
  m.quantile_ = [edges, density, cum](double x) {
    auto it = std::lower_bound(cum.begin(), cum.end(), x);
    std::size_t i = std::clamp<std::size_t>(it - cum.begin(), 1, density.size()) - 1;
    while (density[i] == 0.0 && i + 1 < density.size()) ++i;
    return edges[i] + (x - cum[i]) / density[i];
  };
  return m;
}

BaseMeasure BaseMeasure::custom(std::string name, Interval support, RealFn density,
                                RealFn cumulative, RealFn quantile,
                                std::vector<double> breakpoints) {
  if (!(support.hi > support.lo))
    throw ConfigError("levy-catalog", "BaseMeasure", "empty support");
  BaseMeasure m;
  m.name_ = std::move(name);
  m.support_ = support;
  m.density_ = std::move(density);
  m.cumulative_ = std::move(cumulative);
  m.quantile_ = std::move(quantile);
  m.breaks_ = std::move(breakpoints);
  m.total_ = m.cumulative_(support.hi);
  if (!(m.total_ > 0.0))
    throw ConfigError("levy-catalog", "BaseMeasure", "measure has zero mass");
  return m;
}

double BaseMeasure::density(double y) const { return density_(y); }

double BaseMeasure::cumulative(double y) const {
  if (y <= support_.lo) return 0.0;
  return cumulative_(std::min(y, support_.hi));
}

double BaseMeasure::mass_between(double a, double b) const {
  return cumulative(b) - cumulative(a);
}

double BaseMeasure::quantile(double x) const {
  if (quantile_) return quantile_(x);
  if (x <= 0.0) return support_.lo;
  double lo = support_.lo, hi = support_.hi;
  if (!std::isfinite(hi)) {
    hi = std::max(1.0, lo + 1.0);
    while (cumulative(hi) < x) hi = lo + 2.0 * (hi - lo);
  }
  if (!std::isfinite(lo)) {
    lo = std::min(-1.0, hi - 1.0);
    while (cumulative(lo) > x) lo = hi - 2.0 * (hi - lo);
  }
  return solve_monotone([&](double y) { return cumulative(y) - x; }, lo, hi, 1e-13);
}

double BaseMeasure::sample(RngStream& rng) const {
  if (!finite())
    throw UnsupportedOperation("levy-catalog", "BaseMeasure::sample", "infinite total mass");
  return quantile(rng.uniform() * total_);
}

double BaseMeasure::sample_between(double a, double b, RngStream& rng) const {
  double ca = cumulative(a), cb = cumulative(b);
  if (!(cb > ca))
    throw NumericError("levy-catalog", "BaseMeasure::sample_between", "no mass on interval");
  double y = quantile(ca + rng.uniform() * (cb - ca));
  return std::clamp(y, a, b);
}

double BaseMeasure::integrate(const RealFn& f, double rel_tol) const {
  return integrate(f, {}, rel_tol);
}

double BaseMeasure::integrate(const RealFn& f, const std::vector<double>& extra_breaks,
                              double rel_tol) const {
  std::vector<double> pts = breaks_;
  pts.insert(pts.end(), extra_breaks.begin(), extra_breaks.end());
  auto g = [&](double y) {
    double d = density_(y);
    return d == 0.0 ? 0.0 : f(y) * d;
  };
  return integrate_pieces(g, support_.lo, support_.hi, std::move(pts), rel_tol);
}

BaseMeasure BaseMeasure::scaled(double factor) const {
  if (!(factor > 0.0))
    throw ConfigError("levy-catalog", "BaseMeasure::scaled", "factor must be positive");
  BaseMeasure m = *this;
  auto d = density_;
  auto c = cumulative_;
  auto q = quantile_;
  m.density_ = [d, factor](double y) { return factor * d(y); };
  m.cumulative_ = [c, factor](double y) { return factor * c(y); };
  if (q) m.quantile_ = [q, factor](double x) { return q(x / factor); };
  m.total_ = total_ * factor;
  return m;
}

BaseMeasure BaseMeasure::restricted(double a, double b) const {
  a = std::max(a, support_.lo);
  b = std::min(b, support_.hi);
  if (!(b > a)) throw ConfigError("levy-catalog", "BaseMeasure::restricted", "empty interval");
  BaseMeasure parent = *this;
  double ca = cumulative(a);
  BaseMeasure m;
  m.name_ = name_ + "|restricted";
  m.support_ = {a, b};
  m.density_ = [parent, a, b](double y) { return (y >= a && y <= b) ? parent.density(y) : 0.0; };
  m.cumulative_ = [parent, ca, a, b](double y) { return parent.cumulative(std::clamp(y, a, b)) - ca; };
  m.quantile_ = [parent, ca, a, b](double x) { return std::clamp(parent.quantile(ca + x), a, b); };
  for (double br : breaks_)
    if (br > a && br < b) m.breaks_.push_back(br);
  m.total_ = cumulative(b) - ca;
  if (!(m.total_ > 0.0)) throw ConfigError("levy-catalog", "BaseMeasure::restricted", "no mass on interval");
  return m;
}

}  // namespace ppcalc
