#include "ppcalc/levy.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "ppcalc/errors.hpp"

namespace ppcalc {

namespace {

constexpr const char* kModule = "levy-catalog";

double lgam(double x) { return boost::math::lgamma(x); }

// int_x^1 u^{-1} (1-u)^{c-1} du, by series that converge at ratio <= 1/2.
double beta_tail(double c, double x) {
  if (x >= 1.0) return 0.0;
  if (x <= 0.5) {
    // -log x - psi(c) - gamma - sum_k C(c-1,k) (-x)^k / k
    double term = 1.0, corr = 0.0;
    for (int k = 1; k < 200; ++k) {
      term *= (c - k) * (-x) / k;  // C(c-1,k) (-x)^k
      double t = term / k;
      corr += t;
      if (std::fabs(t) <= 1e-17 * std::max(1.0, std::fabs(corr)) || term == 0.0) break;
    }
    return -std::log(x) - boost::math::digamma(c) - boost::math::constants::euler<double>() - corr;
  }
  // sum_k (1-x)^{c+k} / (c+k)
  const double v = 1.0 - x;
  double pw = std::pow(v, c), sum = 0.0;
  for (int k = 0; k < 200; ++k) {
    double t = pw / (c + k);
    sum += t;
    if (t <= 1e-17 * sum) break;
    pw *= v;
  }
  return sum;
}

// int_x^inf s^{-alpha-1} e^{-beta s} ds / Gamma(1-alpha)
double gg_tail(double alpha, double beta, double x) {
  if (beta == 0.0) return std::pow(x, -alpha) / (alpha * std::tgamma(1.0 - alpha));
  if (alpha == 0.0) return boost::math::expint(1, beta * x);
  return std::pow(beta, alpha) * upper_gamma(-alpha, beta * x) / std::tgamma(1.0 - alpha);
}

std::string fmt_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------- tilt terms

TiltTerm TiltTerm::linear(double v, std::string name) {
  if (!(v >= 0.0)) throw ConfigError(kModule, "tilt", "linear tilt must be nonnegative");
  TiltTerm t;
  t.kind = Kind::Linear;
  t.scalar = v;
  t.name = std::move(name);
  return t;
}

TiltTerm TiltTerm::kernel(RealFn f, std::string name, std::vector<double> breakpoints) {
  TiltTerm t;
  t.kind = Kind::Kernel;
  t.fn = std::move(f);
  t.name = std::move(name);
  t.breakpoints = std::move(breakpoints);
  return t;
}

TiltTerm TiltTerm::kernel_constant(double f, std::string name) {
  if (!(f >= 0.0)) throw ConfigError(kModule, "tilt", "kernel tilt must be nonnegative");
  TiltTerm t;
  t.kind = Kind::Kernel;
  t.scalar = f;
  t.name = std::move(name);
  return t;
}

TiltTerm TiltTerm::at_risk(RealFn y_count, std::string name, std::vector<double> breakpoints) {
  TiltTerm t;
  t.kind = Kind::AtRisk;
  t.fn = std::move(y_count);
  t.name = std::move(name);
  t.breakpoints = std::move(breakpoints);
  return t;
}

TiltTerm TiltTerm::at_risk_constant(double y_count, std::string name) {
  if (!(y_count >= 0.0)) throw ConfigError(kModule, "tilt", "at-risk count must be nonnegative");
  TiltTerm t;
  t.kind = Kind::AtRisk;
  t.scalar = y_count;
  t.name = std::move(name);
  return t;
}

// ---------------------------------------------------------------- intensity

LevyIntensity LevyIntensity::generalized_gamma(double alpha, double b, BaseMeasure base) {
  LevyIntensity li;
  li.family_ = Family::GeneralizedGamma;
  li.alpha_ = alpha;
  li.b_ = b;
  li.base_ = std::move(base);
  li.validate();
  return li;
}

LevyIntensity LevyIntensity::gamma_process(BaseMeasure base, double b) {
  return generalized_gamma(0.0, b, std::move(base));
}

LevyIntensity LevyIntensity::stable(double alpha, BaseMeasure base) {
  LevyIntensity li;
  li.family_ = Family::Stable;
  li.alpha_ = alpha;
  li.b_ = 0.0;
  li.base_ = std::move(base);
  li.validate();
  return li;
}

LevyIntensity LevyIntensity::beta_process(double c, BaseMeasure base) {
  LevyIntensity li;
  li.family_ = Family::Beta;
  li.c_ = c;
  li.base_ = std::move(base);
  li.validate();
  return li;
}

LevyIntensity LevyIntensity::beta_process(RealFn c, BaseMeasure base,
                                          std::vector<double> breakpoints) {
  LevyIntensity li;
  li.family_ = Family::Beta;
  li.c_fn_ = std::move(c);
  li.c_breaks_ = std::move(breakpoints);
  li.base_ = std::move(base);
  li.validate();
  return li;
}

LevyIntensity LevyIntensity::compound_poisson(double rate, double shape, double jump_rate,
                                              BaseMeasure base) {
  LevyIntensity li;
  li.family_ = Family::CompoundPoisson;
  li.rate_ = rate;
  li.shape_ = shape;
  li.jump_rate_ = jump_rate;
  li.base_ = std::move(base);
  li.validate();
  return li;
}

void LevyIntensity::validate() const {
  switch (family_) {
    case Family::GeneralizedGamma:
      if (!(alpha_ >= 0.0 && alpha_ < 1.0))
        throw ConfigError(kModule, "LevyIntensity", "GeneralizedGamma alpha must lie in [0,1)");
      if (!(b_ >= 0.0)) throw ConfigError(kModule, "LevyIntensity", "GeneralizedGamma b must be >= 0");
      if (alpha_ == 0.0 && b_ == 0.0)
        throw ConfigError(kModule, "LevyIntensity", "GeneralizedGamma(0, 0) is not a Levy intensity");
      break;
    case Family::Stable:
      if (!(alpha_ > 0.0 && alpha_ < 1.0))
        throw ConfigError(kModule, "LevyIntensity", "Stable alpha must lie in (0,1)");
      break;
    case Family::Beta: {
      Interval s = base_.support();
      double lo = std::isfinite(s.lo) ? s.lo : -50.0;
      double hi = std::isfinite(s.hi) ? s.hi : lo + 100.0;
      for (int i = 0; i <= 64; ++i) {
        double y = lo + (hi - lo) * i / 64.0;
        if (i == 64 && !std::isfinite(s.hi)) break;
        double c = beta_c(y);
        if (!(c >= 0.0) || !std::isfinite(c))
          throw ConfigError(kModule, "LevyIntensity", "BetaProcess c(y) must be finite and >= 0");
      }
      if (beta_c_constant() && !(c_ > 0.0))
        throw ConfigError(kModule, "LevyIntensity", "BetaProcess c must be positive");
      break;
    }
    case Family::CompoundPoisson:
      if (!(rate_ > 0.0 && shape_ > 0.0 && jump_rate_ > 0.0))
        throw ConfigError(kModule, "LevyIntensity", "CompoundPoisson parameters must be positive");
      break;
  }
  if (!(power_ >= 0.0)) throw ConfigError(kModule, "LevyIntensity", "jump power must be >= 0");
}

std::string LevyIntensity::family_name() const {
  switch (family_) {
    case Family::GeneralizedGamma:
      if (alpha_ == 0.0) return "GammaProcess(b=" + fmt_num(b_) + ")";
      return "GeneralizedGamma(alpha=" + fmt_num(alpha_) + ", b=" + fmt_num(b_) + ")";
    case Family::Stable:
      return "Stable(alpha=" + fmt_num(alpha_) + ")";
    case Family::Beta:
      return beta_c_constant() ? "BetaProcess(c=" + fmt_num(c_) + ")" : "BetaProcess(c(y))";
    case Family::CompoundPoisson:
      return "CompoundPoisson(rate=" + fmt_num(rate_) + ", shape=" + fmt_num(shape_) +
             ", jump_rate=" + fmt_num(jump_rate_) + ")";
  }
  return "unknown";
}

LevyIntensity LevyIntensity::with_base(BaseMeasure base) const {
  LevyIntensity li = *this;
  li.base_ = std::move(base);
  li.validate();
  return li;
}

LevyIntensity LevyIntensity::with_jump_power(double p) const {
  LevyIntensity li = *this;
  li.power_ = p;
  li.validate();
  return li;
}

LevyIntensity LevyIntensity::tilted(TiltTerm term) const {
  LevyIntensity li = *this;
  li.tilts_.push_back(std::move(term));
  return li;
}

bool LevyIntensity::homogeneous() const {
  if (family_ == Family::Beta && !beta_c_constant()) return false;
  for (const auto& t : tilts_)
    if (!t.homogeneous()) return false;
  return true;
}

std::vector<double> LevyIntensity::location_breakpoints() const {
  std::vector<double> out = base_.breakpoints();
  out.insert(out.end(), c_breaks_.begin(), c_breaks_.end());
  for (const auto& t : tilts_) out.insert(out.end(), t.breakpoints.begin(), t.breakpoints.end());
  return out;
}

double LevyIntensity::h(double s) const {
  if (power_ == 1.0) return s;
  if (power_ == 0.0) return 1.0;
  return std::pow(s, power_);
}

double LevyIntensity::rho(double s, double y) const {
  if (!(s > 0.0)) return 0.0;
  switch (family_) {
    case Family::GeneralizedGamma:
    case Family::Stable:
      return std::exp(-(alpha_ + 1.0) * std::log(s) - b_ * s - lgam(1.0 - alpha_));
    case Family::Beta: {
      if (s >= 1.0) return 0.0;
      double c = beta_c(y);
      return std::exp((c - 1.0) * std::log1p(-s)) / s;
    }
    case Family::CompoundPoisson:
      return rate_ * std::exp(shape_ * std::log(jump_rate_) + (shape_ - 1.0) * std::log(s) -
                              jump_rate_ * s - lgam(shape_));
  }
  return 0.0;
}

double LevyIntensity::tilt_value(double s, double y) const {
  double t = 0.0;
  for (const auto& term : tilts_) {
    switch (term.kind) {
      case TiltTerm::Kind::Linear:
        if (term.scalar != 0.0) t += term.scalar * h(s);
        break;
      case TiltTerm::Kind::Kernel: {
        double f = term.coefficient(y);
        if (f != 0.0) t += f * s;
        break;
      }
      case TiltTerm::Kind::AtRisk: {
        double yc = term.coefficient(y);
        if (yc != 0.0) t += s >= 1.0 ? kInf : -yc * std::log1p(-s);
        break;
      }
    }
  }
  return t;
}

double LevyIntensity::tilted_density(double s, double y) const {
  double r = rho(s, y);
  if (r == 0.0) return 0.0;
  return r * std::exp(-tilt_value(s, y));
}

double LevyIntensity::tilted_density_unit(double s, double log1m_s, double y) const {
  if (family_ != Family::Beta) return tilted_density(s, y);
  if (!(s > 0.0)) return 0.0;
  double lg = (beta_c(y) - 1.0) * log1m_s - std::log(s);
  for (const auto& term : tilts_) {
    switch (term.kind) {
      case TiltTerm::Kind::Linear:
        lg -= term.scalar * h(s);
        break;
      case TiltTerm::Kind::Kernel:
        lg -= term.coefficient(y) * s;
        break;
      case TiltTerm::Kind::AtRisk: {
        double yc = term.coefficient(y);
        if (yc != 0.0) lg += yc * log1m_s;
        break;
      }
    }
  }
  return std::exp(lg);
}

std::optional<double> LevyIntensity::exponential_rate(double y) const {
  if (family_ == Family::Beta) return std::nullopt;
  double beta = family_ == Family::CompoundPoisson ? 0.0 : b_;
  for (const auto& t : tilts_) {
    switch (t.kind) {
      case TiltTerm::Kind::Linear:
        if (t.scalar == 0.0) break;
        if (power_ != 1.0) return std::nullopt;
        beta += t.scalar;
        break;
      case TiltTerm::Kind::Kernel:
        beta += t.coefficient(y);
        break;
      case TiltTerm::Kind::AtRisk:
        if (t.coefficient(y) != 0.0) return std::nullopt;
        break;
    }
  }
  return beta;
}

std::optional<double> LevyIntensity::beta_parameter(double y) const {
  if (family_ != Family::Beta) return std::nullopt;
  double c = beta_c(y);
  for (const auto& t : tilts_) {
    switch (t.kind) {
      case TiltTerm::Kind::AtRisk:
        c += t.coefficient(y);
        break;
      case TiltTerm::Kind::Linear:
        if (t.scalar != 0.0) return std::nullopt;
        break;
      case TiltTerm::Kind::Kernel:
        if (t.coefficient(y) != 0.0) return std::nullopt;
        break;
    }
  }
  return c;
}

double LevyIntensity::jump_scale(double y) const {
  if (family_ == Family::Beta) return 0.5;
  auto r = exponential_rate(y);
  double beta = r ? *r : (family_ == Family::CompoundPoisson ? 0.0 : b_);
  if (family_ == Family::CompoundPoisson) return shape_ / (jump_rate_ + beta);
  return beta > 0.0 ? 1.0 / beta : 1.0;
}

// ---------------------------------------------------------------- draws

double AtomicMeasureDraw::total_weight() const {
  KahanSum s;
  for (const auto& a : atoms) s += a.weight;
  return s.value();
}

double AtomicMeasureDraw::integrate(const RealFn& f) const {
  KahanSum s;
  for (const auto& a : atoms) s += a.weight * f(a.location);
  return s.value();
}

double AtomicMeasureDraw::max_weight() const {
  double m = 0.0;
  for (const auto& a : atoms) m = std::max(m, a.weight);
  return m;
}

// ---------------------------------------------------------------- kappa

double kappa_quadrature(const LevyIntensity& li, double n, double y) {
  auto rate = li.exponential_rate(y);
  if ((li.family() == LevyIntensity::Family::Stable ||
       li.family() == LevyIntensity::Family::GeneralizedGamma) &&
      rate && !(*rate > 0.0))
    throw DivergenceError(kModule, "kappa", li.family_name() + " has no finite moments without a tilt");
  auto f = [&](double s) {
    double d = li.tilted_density(s, y);
    return d == 0.0 ? 0.0 : std::pow(li.h(s), n) * d;
  };
  double v = li.family() == LevyIntensity::Family::Beta ? integrate_unit(f, 1e-11)
                                                        : integrate_halfline(f, li.jump_scale(y), 1e-11);
  if (!std::isfinite(v)) throw DivergenceError(kModule, "kappa", "divergent integral for " + li.family_name());
  return v;
}

double kappa(const LevyIntensity& li, int n, double y) {
  if (n < 1) throw ConfigError(kModule, "kappa", "order must be positive");
  const double p = li.jump_power();
  switch (li.family()) {
    case LevyIntensity::Family::GeneralizedGamma:
    case LevyIntensity::Family::Stable: {
      auto rate = li.exponential_rate(y);
      if (!rate) break;
      double a = n * p - li.alpha();
      if (!(*rate > 0.0) || !(a > 0.0))
        throw DivergenceError(kModule, "kappa", li.family_name() + " has no finite moments without a tilt");
      return std::exp(lgam(a) - lgam(1.0 - li.alpha()) - a * std::log(*rate));
    }
    case LevyIntensity::Family::Beta: {
      auto c = li.beta_parameter(y);
      if (!c) break;
      if (!(*c > 0.0) || !(n * p > 0.0))
        throw DivergenceError(kModule, "kappa", li.family_name() + " moment diverges at c = 0");
      return std::exp(lgam(n * p) + lgam(*c) - lgam(n * p + *c));
    }
    case LevyIntensity::Family::CompoundPoisson: {
      auto rate = li.exponential_rate(y);
      if (!rate) break;
      double a = li.cp_shape(), r = li.cp_jump_rate();
      return li.cp_rate() * std::exp(a * std::log(r) + lgam(a + n * p) - lgam(a) -
                                     (a + n * p) * std::log(r + *rate));
    }
  }
  return kappa_quadrature(li, n, y);
}

LevyIntensity tilt(const LevyIntensity& li, const TiltTerm& term) { return li.tilted(term); }

// ---------------------------------------------------------------- Laplace exponent

namespace {

double laplace_density_quadrature(const LevyIntensity& li, double g, double y) {
  if (g == 0.0) return 0.0;
  auto f = [&](double s) {
    double d = li.tilted_density(s, y);
    return d == 0.0 ? 0.0 : -std::expm1(-g * li.h(s)) * d;
  };
  double v = li.family() == LevyIntensity::Family::Beta ? integrate_unit(f, 1e-11)
                                                        : integrate_halfline(f, li.jump_scale(y), 1e-11);
  if (!std::isfinite(v)) throw DivergenceError(kModule, "laplace_exponent", "divergent integral");
  return v;
}

double representative_location(const BaseMeasure& base) {
  Interval s = base.support();
  if (std::isfinite(s.lo) && std::isfinite(s.hi)) return 0.5 * (s.lo + s.hi);
  if (std::isfinite(s.lo)) return s.lo + 1.0;
  if (std::isfinite(s.hi)) return s.hi - 1.0;
  return 0.0;
}

}  // namespace

double laplace_exponent_density(const LevyIntensity& li, double g, double y) {
  if (g == 0.0) return 0.0;
  if (!(g > 0.0)) throw ConfigError(kModule, "laplace_exponent", "g must be nonnegative");
  if (li.jump_power() == 1.0) {
    auto rate = li.exponential_rate(y);
    if (rate) {
      double beta = *rate;
      switch (li.family()) {
        case LevyIntensity::Family::GeneralizedGamma:
        case LevyIntensity::Family::Stable: {
          double a = li.alpha();
          if (a == 0.0) {
            if (!(beta > 0.0))
              throw DivergenceError(kModule, "laplace_exponent", "gamma intensity needs a positive rate");
            return std::log1p(g / beta);
          }
          if (beta == 0.0) return std::pow(g, a) / a;
          return std::pow(beta, a) * std::expm1(a * std::log1p(g / beta)) / a;
        }
        case LevyIntensity::Family::CompoundPoisson: {
          double a = li.cp_shape(), r = li.cp_jump_rate();
          return li.cp_rate() * std::exp(a * std::log(r / (r + beta))) *
                 -std::expm1(-a * std::log1p(g / (r + beta)));
        }
        default:
          break;
      }
    }
  }
  return laplace_density_quadrature(li, g, y);
}

double laplace_exponent(const LevyIntensity& li, const RealFn& g,
                        const std::vector<double>& g_breakpoints) {
  std::vector<double> br = li.location_breakpoints();
  br.insert(br.end(), g_breakpoints.begin(), g_breakpoints.end());
  return li.base().integrate([&](double y) { return laplace_exponent_density(li, g(y), y); }, br, 1e-11);
}

double laplace_exponent_constant(const LevyIntensity& li, double g) {
  if (li.homogeneous()) {
    if (g == 0.0) return 0.0;
    return li.base().total_mass() * laplace_exponent_density(li, g, representative_location(li.base()));
  }
  return laplace_exponent(li, [g](double) { return g; });
}

double laplace_exponent_quadrature(const LevyIntensity& li, const RealFn& g,
                                   const std::vector<double>& g_breakpoints) {
  std::vector<double> br = li.location_breakpoints();
  br.insert(br.end(), g_breakpoints.begin(), g_breakpoints.end());
  return li.base().integrate([&](double y) { return laplace_density_quadrature(li, g(y), y); }, br,
                             1e-10);
}

// ---------------------------------------------------------------- jump laws

JumpLaw::JumpLaw(const LevyIntensity& li, int e, double y) : li_(li), e_(e), y_(y) {
  if (e < 1) throw ConfigError(kModule, "jump_sample", "multiplicity must be positive");
  kappa(li, e, y);  // raises on divergence
  unit_ = li.family() == LevyIntensity::Family::Beta;
  const int coarse = 2401;
  std::vector<double> xs(coarse), qs(coarse);
  double qmax = 0.0;
  for (int i = 0; i < coarse; ++i) {
    xs[i] = -60.0 + 120.0 * i / (coarse - 1);
    qs[i] = q(xs[i]);
    qmax = std::max(qmax, qs[i]);
  }
  if (!(qmax > 0.0) || !std::isfinite(qmax))
    throw DivergenceError(kModule, "jump_sample", "jump density is not normalizable");
  int first = 0, last = coarse - 1;
  while (first < coarse - 1 && qs[first] < 1e-18 * qmax) ++first;
  while (last > 0 && qs[last] < 1e-18 * qmax) --last;
  const double lo = xs[std::max(0, first - 1)], hi = xs[std::min(coarse - 1, last + 1)];
  const int panels = 256;
  edges_.resize(panels + 1);
  cdf_.assign(panels + 1, 0.0);
  for (int i = 0; i <= panels; ++i) edges_[i] = lo + (hi - lo) * i / panels;
  for (int i = 0; i < panels; ++i) cdf_[i + 1] = cdf_[i] + panel_integral(i, edges_[i + 1]);
}

double JumpLaw::panel_integral(std::size_t i, double x) const {
  return integrate([this](double t) { return q(t); }, edges_[i], x, 1e-12);
}

double JumpLaw::sample(RngStream& rng) const {
  double target = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  std::size_t i = std::clamp<std::size_t>(it - cdf_.begin(), 1, edges_.size() - 1) - 1;
  double a = edges_[i], b = edges_[i + 1];
  double rem = target - cdf_[i];
  auto f = [&](double x) { return panel_integral(i, x) - rem; };
  double x = (f(a) >= 0.0) ? a : (f(b) <= 0.0 ? b : solve_monotone(f, a, b, 1e-11));
  return to_jump(x);
}

double JumpLaw::cdf(double s) const {
  double x = from_jump(s);
  if (x <= edges_.front()) return 0.0;
  if (x >= edges_.back()) return 1.0;
  auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  std::size_t i = (it - edges_.begin()) - 1;
  return (cdf_[i] + panel_integral(i, x)) / cdf_.back();
}

double JumpLaw::to_jump(double x) const {
  if (!unit_) return std::exp(x);
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double JumpLaw::from_jump(double s) const {
  if (!(s > 0.0)) return -kInf;
  if (!unit_) return std::log(s);
  if (s >= 1.0) return kInf;
  return std::log(s) - std::log1p(-s);
}

// density in the table variable, Jacobian included
double JumpLaw::q(double x) const {
  double v;
  if (unit_) {
    // s = logistic(x); log s and log(1-s) without cancellation
    double ls = x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
    double lt = ls - x;
    double s = std::exp(ls);
    if (!(s > 0.0)) return 0.0;
    double d = li_.tilted_density_unit(s, lt, y_);
    if (d == 0.0) return 0.0;
    v = std::pow(li_.h(s), e_) * d * std::exp(ls + lt);
  } else {
    double s = std::exp(x);
    if (!(s > 0.0) || !std::isfinite(s)) return 0.0;
    double d = li_.tilted_density(s, y_);
    if (d == 0.0) return 0.0;
    v = std::pow(li_.h(s), e_) * d * s;
  }
  return std::isfinite(v) ? v : 0.0;
}

double jump_sample_fallback(const LevyIntensity& li, int e, double y, RngStream& rng) {
  return JumpLaw(li, e, y).sample(rng);
}

double jump_sample(const LevyIntensity& li, int e, double y, RngStream& rng) {
  if (e < 1) throw ConfigError(kModule, "jump_sample", "multiplicity must be positive");
  const double p = li.jump_power();
  switch (li.family()) {
    case LevyIntensity::Family::GeneralizedGamma:
    case LevyIntensity::Family::Stable: {
      auto rate = li.exponential_rate(y);
      if (!rate) break;
      double a = e * p - li.alpha();
      if (!(*rate > 0.0) || !(a > 0.0))
        throw DivergenceError(kModule, "jump_sample", li.family_name() + " jump law is not normalizable");
      return rng.gamma(a, *rate);
    }
    case LevyIntensity::Family::Beta: {
      auto c = li.beta_parameter(y);
      if (!c) break;
      if (!(*c > 0.0)) throw DivergenceError(kModule, "jump_sample", "Beta jump law with c = 0");
      return rng.beta(e * p, *c);
    }
    case LevyIntensity::Family::CompoundPoisson: {
      auto rate = li.exponential_rate(y);
      if (!rate) break;
      return rng.gamma(li.cp_shape() + e * p, li.cp_jump_rate() + *rate);
    }
  }
  return jump_sample_fallback(li, e, y, rng);
}

// ---------------------------------------------------------------- tails

namespace {

void require_homogeneous(const LevyIntensity& li, const char* op) {
  if (!li.homogeneous())
    throw UnsupportedOperation(kModule, op, "intensity depends on location; operation needs a homogeneous one");
}

double y0_of(const LevyIntensity& li) { return representative_location(li.base()); }

}  // namespace

double tail_mass_quadrature(const LevyIntensity& li, double x) {
  require_homogeneous(li, "tail_mass");
  const double y = y0_of(li);
  if (x >= li.jump_upper()) return 0.0;
  auto f = [&](double s) { return li.tilted_density(s, y); };
  if (li.family() == LevyIntensity::Family::Beta) {
    // log variable near 0, log(1-s) near 1
    auto g = [&](double w) { return f(1.0 - w); };
    double upper = integrate_log(g, 0.0, 1.0 - std::max(x, 0.5), 1e-12);
    return x < 0.5 ? upper + integrate_log(f, x, 0.5, 1e-12) : upper;
  }
  return integrate_log(f, x, kInf, 1e-12);
}

double tail_mass(const LevyIntensity& li, double x) {
  require_homogeneous(li, "tail_mass");
  if (!(x > 0.0)) throw ConfigError(kModule, "tail_mass", "x must be positive");
  const double y = y0_of(li);
  switch (li.family()) {
    case LevyIntensity::Family::GeneralizedGamma:
    case LevyIntensity::Family::Stable: {
      auto rate = li.exponential_rate(y);
      if (!rate) break;
      return gg_tail(li.alpha(), *rate, x);
    }
    case LevyIntensity::Family::Beta: {
      auto c = li.beta_parameter(y);
      if (!c) break;
      return beta_tail(*c, x);
    }
    case LevyIntensity::Family::CompoundPoisson: {
      auto rate = li.exponential_rate(y);
      if (!rate) break;
      double a = li.cp_shape(), r = li.cp_jump_rate(), z = r + *rate;
      return li.cp_rate() * std::pow(r / z, a) * boost::math::gamma_q(a, z * x);
    }
  }
  return tail_mass_quadrature(li, x);
}

double residual_mass(const LevyIntensity& li, double u) {
  require_homogeneous(li, "residual_mass");
  return residual_mass_at(li, u, y0_of(li));
}

double residual_mass_at(const LevyIntensity& li, double u, double y) {
  if (!(u > 0.0)) return 0.0;
  const double p = li.jump_power();
  switch (li.family()) {
    case LevyIntensity::Family::GeneralizedGamma:
    case LevyIntensity::Family::Stable: {
      auto rate = li.exponential_rate(y);
      if (!rate) break;
      double a = li.alpha(), s = p - a;
      if (!(s > 0.0)) return kInf;
      if (*rate == 0.0) return std::pow(u, s) / (s * std::tgamma(1.0 - a));
      return std::exp((a - p) * std::log(*rate) + lgam(s) - lgam(1.0 - a)) *
             boost::math::gamma_p(s, *rate * u);
    }
    case LevyIntensity::Family::Beta: {
      auto c = li.beta_parameter(y);
      if (!c) break;
      if (u >= 1.0) u = 1.0;
      if (p == 1.0) return -std::expm1(*c * std::log1p(-u)) / *c;
      if (!(p > 0.0)) return kInf;
      return boost::math::beta(p, *c, u);
    }
    case LevyIntensity::Family::CompoundPoisson: {
      auto rate = li.exponential_rate(y);
      if (!rate) break;
      double a = li.cp_shape(), r = li.cp_jump_rate(), z = r + *rate;
      return li.cp_rate() * std::exp(a * std::log(r) + lgam(a + p) - lgam(a) - (a + p) * std::log(z)) *
             boost::math::gamma_p(a + p, z * u);
    }
  }
  auto f = [&](double s) {
    double d = li.tilted_density(s, y);
    return d == 0.0 ? 0.0 : li.h(s) * d;
  };
  return integrate_log(f, 0.0, std::min(u, li.jump_upper()), 1e-12);
}

// ---------------------------------------------------------------- inverse Levy

InverseLevySampler::InverseLevySampler(LevyIntensity li) : li_(std::move(li)) {
  require_homogeneous(li_, "inverse_levy_atoms");
  const double y = y0_of(li_);
  if (li_.family() == LevyIntensity::Family::CompoundPoisson) {
    auto rate = li_.exponential_rate(y);
    if (rate)
      tail_at_zero_ = li_.cp_rate() * std::pow(li_.cp_jump_rate() / (li_.cp_jump_rate() + *rate), li_.cp_shape());
    else
      tail_at_zero_ = tail_mass_quadrature(li_, 1e-300);
  }
}

double InverseLevySampler::tail(double u) const { return tail_mass(li_, u); }

double InverseLevySampler::residual(double u) const { return residual_mass(li_, u); }

double InverseLevySampler::log_tail(double u) const {
  double t = tail(u);
  return t > 0.0 ? std::log(t) : -kInf;
}

double InverseLevySampler::inverse_tail(double x, double guess) const {
  if (!(x > 0.0)) throw ConfigError(kModule, "inverse_levy_atoms", "level must be positive");
  if (x >= tail_at_zero_) return 0.0;
  const double y = y0_of(li_);
  const double target = std::log(x);
  const double wmax = li_.jump_upper() == 1.0 ? 0.0 : 700.0;
  if (wmax == 0.0 && tail(0.5) > x) {
    // root in (1/2, 1): solve in z = log(1-u) so large jumps keep precision
    const double zlo = std::log(1.0 - std::nextafter(1.0, 0.0));
    auto g = [&](double z) { return log_tail(-std::expm1(z)) - target; };
    if (g(zlo) >= 0.0) return std::nextafter(1.0, 0.0);
    return -std::expm1(solve_monotone(g, zlo, std::log(0.5), 1e-13));
  }
  // F(w) = log tail(e^w) - log x is decreasing in w; dF/dw = -u rho(u) / tail(u).
  auto eval = [&](double w, double& fv, double& dv) {
    double u = std::exp(w);
    double t = tail(u);
    fv = (t > 0.0 ? std::log(t) : -kInf) - target;
    double dens = li_.tilted_density(u, y);
    dv = (t > 0.0 && dens > 0.0) ? -u * dens / t : 0.0;
  };

  double w = guess > 0.0 ? std::log(guess) : std::log(li_.jump_scale(y));
  w = std::min(w, wmax - 1e-3);
  double wlo = -kInf, whi = wmax;
  double fv, dv;
  for (int it = 0; it < 300; ++it) {
    eval(w, fv, dv);
    if (fv == 0.0) return std::exp(w);
    if (fv > 0)
      wlo = w;
    else
      whi = w;
    double wn;
    if (std::isfinite(fv) && dv < 0.0) {
      wn = w - fv / dv;
    } else {
      wn = fv > 0 ? w + 1.0 : w - 1.0;
    }
    // Keep inside the bracket; expand geometrically while one side is open.
    if (!(wn > wlo && wn < whi)) {
      if (std::isfinite(wlo) && whi < wmax)
        wn = 0.5 * (wlo + whi);
      else if (!std::isfinite(wlo))
        wn = whi - std::max(1.0, 2.0 * (w - wn > 0 ? w - wn : 1.0));
      else
        wn = std::min(wmax, wlo + std::max(1.0, 2.0 * std::fabs(wn - w)));
    }
    if (wn < -745.0)
      throw NumericError(kModule, "inverse_levy_atoms", "cannot bracket inverse tail at level " + fmt_num(x));
    if (wn >= wmax && fv > 0) return std::exp(wmax);
    if (std::fabs(wn - w) <= 1e-12 * std::max(1.0, std::fabs(w)) ||
        (std::isfinite(wlo) && whi - wlo <= 1e-13 * std::max(1.0, std::fabs(w))))
      return std::exp(wn);
    w = wn;
  }
  throw NumericError(kModule, "inverse_levy_atoms",
                     "inverse tail did not converge at level " + fmt_num(x) + " bracket [" +
                         fmt_num(std::exp(wlo)) + ", " + fmt_num(std::exp(whi)) + "]");
}

AtomicMeasureDraw InverseLevySampler::draw(double mass_scale, double eps, RngStream& rng,
                                           std::size_t max_atoms) const {
  if (!(mass_scale > 0.0) || !std::isfinite(mass_scale))
    throw ConfigError(kModule, "inverse_levy_atoms", "mass_scale must be finite and positive");
  if (!(eps > 0.0)) throw ConfigError(kModule, "inverse_levy_atoms", "eps must be positive");
  AtomicMeasureDraw out;
  out.seed = rng.seed();
  out.stream = rng.stream();
  double arrival = 0.0;
  double u = 0.0;
  for (;;) {
    arrival += rng.exponential();
    double un = inverse_tail(arrival / mass_scale, u);
    if (un <= 0.0) {
      // finite intensity exhausted: nothing left below
      out.truncation_bound = 0.0;
      out.truncation_level = 0.0;
      return out;
    }
    u = un;
    out.atoms.push_back({li_.h(u), li_.base().sample(rng)});
    double res = residual(u) * mass_scale;
    if (res < eps || out.atoms.size() >= max_atoms) {
      out.truncation_bound = res;
      out.truncation_level = u;
      return out;
    }
  }
}

AtomicMeasureDraw inverse_levy_atoms(const LevyIntensity& li, double mass_scale, double eps,
                                     RngStream& rng, std::size_t max_atoms) {
  InverseLevySampler s(li);
  return s.draw(mass_scale, eps, rng, max_atoms);
}

}  // namespace ppcalc
