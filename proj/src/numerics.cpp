#include "ppcalc/numerics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <boost/math/tools/roots.hpp>
#include <map>
#include <mutex>

#include "ppcalc/errors.hpp"

namespace ppcalc {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr unsigned kMaxDepth = 18;

struct LegendreRule {
  std::vector<double> x;
  std::vector<double> w;
};

const LegendreRule& legendre_rule(int n) {
  static std::mutex mu;
  static std::map<int, LegendreRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  LegendreRule rule;
  auto zeros = boost::math::legendre_p_zeros<double>(n);
  for (double z : zeros) {
    double dp = boost::math::legendre_p_prime(n, z);
    double w = 2.0 / ((1.0 - z * z) * dp * dp);
    if (z == 0.0) {
      rule.x.push_back(0.0);
      rule.w.push_back(w);
    } else {
      rule.x.push_back(z);
      rule.w.push_back(w);
      rule.x.push_back(-z);
      rule.w.push_back(w);
    }
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

double legendre_pass(const RealFn& f, const std::vector<double>& pts, int n) {
  const LegendreRule& rule = legendre_rule(n);
  KahanSum total;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double a = pts[i], b = pts[i + 1];
    double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    KahanSum piece;
    for (std::size_t k = 0; k < rule.x.size(); ++k)
      piece += rule.w[k] * f(mid + half * rule.x[k]);
    total += half * piece.value();
  }
  return total.value();
}

}  // namespace

double log_sum_exp(std::span<const double> xs) {
  double m = -kInf;
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  KahanSum s;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s.value());
}

double log_rising(double x, double n) {
  return boost::math::lgamma(x + n) - boost::math::lgamma(x);
}

double integrate(const RealFn& f, double a, double b, double rel_tol,
                 double* error) {
  if (a == b) return 0.0;
  double err = 0.0, l1 = 0.0;
  // Boost floors its error estimate near epsilon times the integrand size,
  // so map finite ranges to [0,1] and rescale to unit magnitude before
  // asking for a relative tolerance.
  double v = GK::integrate(f, a, b, 0, rel_tol, &err, &l1);
  if (std::isfinite(l1) && l1 > 0.0 && err > rel_tol * l1) {
    if (std::isfinite(a) && std::isfinite(b)) {
      const double w = b - a, scale = l1 / std::fabs(w);
      auto g = [&f, a, w, scale](double t) { return f(a + w * t) / scale; };
      v = w * scale * GK::integrate(g, 0.0, 1.0, kMaxDepth, rel_tol, &err, &l1);
      err *= std::fabs(w) * scale;
    } else {
      const double scale = l1;
      auto g = [&f, scale](double x) { return f(x) / scale; };
      v = scale * GK::integrate(g, a, b, kMaxDepth, rel_tol, &err, &l1);
      err *= scale;
    }
  }
  if (!std::isfinite(v))
    throw NumericError("numerics", "integrate", "non-finite quadrature result");
  if (error) *error = err;
  return v;
}

double integrate_pieces(const RealFn& f, double a, double b,
                        std::vector<double> points, double rel_tol) {
  points.push_back(a);
  points.push_back(b);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  KahanSum total;
  double prev = a;
  for (double p : points) {
    if (p <= a) continue;
    if (p > b) break;
    total += integrate(f, prev, p, rel_tol);
    prev = p;
  }
  return total.value();
}

double integrate_log(const RealFn& f, double lo, double hi, double rel_tol) {
  auto g = [&f](double u) {
    double s = std::exp(u);
    if (!std::isfinite(s) || s == 0.0) return 0.0;
    double v = f(s) * s;
    return std::isfinite(v) ? v : 0.0;
  };
  double ulo = lo > 0.0 ? std::log(lo) : -kInf;
  double uhi = std::isfinite(hi) ? std::log(hi) : kInf;
  return integrate(g, ulo, uhi, rel_tol);
}

double integrate_halfline(const RealFn& f, double scale, double rel_tol) {
  return integrate_log(f, 0.0, scale, rel_tol) +
         integrate_log(f, scale, kInf, rel_tol);
}

double integrate_unit(const RealFn& f, double rel_tol) {
  auto g = [&f](double t) {
    // u = 1/(1+e^{-t}), du = u(1-u) dt
    double u, v;
    if (t >= 0) {
      double e = std::exp(-t);
      u = 1.0 / (1.0 + e);
      v = e / (1.0 + e);
    } else {
      double e = std::exp(t);
      u = e / (1.0 + e);
      v = 1.0 / (1.0 + e);
    }
    if (u <= 0.0 || v <= 0.0) return 0.0;
    double r = f(u) * u * v;
    return std::isfinite(r) ? r : 0.0;
  };
  return integrate(g, -kInf, 0.0, rel_tol) + integrate(g, 0.0, kInf, rel_tol);
}

double integrate_legendre(const RealFn& f, double a, double b,
                          const std::vector<double>& breakpoints, double tol,
                          int nodes) {
  std::vector<double> pts{a, b};
  for (double p : breakpoints)
    if (p > a && p < b) pts.push_back(p);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double prev = legendre_pass(f, pts, nodes);
  for (int n = 2 * nodes; n <= 16 * nodes; n *= 2) {
    double cur = legendre_pass(f, pts, n);
    if (std::fabs(cur - prev) <= tol * std::max(1.0, std::fabs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

double upper_gamma(double a, double z) {
  if (z <= 0.0) {
    if (a > 0.0) return boost::math::tgamma(a);
    return kInf;
  }
  if (a > 0.0) return boost::math::tgamma(a, z);
  if (a == 0.0) return boost::math::expint(1, z);
  if (a <= -1.0)
    throw ConfigError("numerics", "upper_gamma", "shape must exceed -1");
  return (boost::math::tgamma(a + 1.0, z) - std::pow(z, a) * std::exp(-z)) / a;
}

double solve_monotone(const std::function<double(double)>& f, double lo,
                      double hi, double rel_tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw NumericError("numerics", "solve_monotone", "root not bracketed");
  std::uintmax_t iters = 200;
  auto tol = [rel_tol](double x, double y) {
    return std::fabs(x - y) <= rel_tol * std::max(std::fabs(x), std::fabs(y));
  };
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace ppcalc
