#include "ppcalc/ntr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "ppcalc/errors.hpp"
#include "ppcalc/numerics.hpp"

namespace ppcalc {

namespace {

constexpr const char* kModule = "ntr-survival";

double lgam(double x) { return boost::math::lgamma(x); }

// log B(e, b) = log int u^{e-1}(1-u)^{b-1} du
double log_beta_fn(double e, double b) { return lgam(e) + lgam(b) - lgam(e + b); }

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

int count_ge(const std::vector<double>& sorted, double s) {
  return static_cast<int>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), s));
}

int count_gt(const std::vector<double>& sorted, double s) {
  return static_cast<int>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), s));
}

}  // namespace

// ---------------------------------------------------------------- data

SurvivalDataset::SurvivalDataset(std::vector<SurvivalRecord> records) : records_(std::move(records)) {
  for (auto& r : records_) {
    if (!(r.time > 0.0) || !std::isfinite(r.time))
      throw ConfigError(kModule, "SurvivalDataset", "times must be positive and finite");
    // censored points carry no mark information
    if (!r.event) r.mark.reset();
  }
}

SurvivalDataset SurvivalDataset::complete(const std::vector<double>& times) {
  std::vector<SurvivalRecord> r;
  for (double t : times) r.push_back({t, true, {}});
  return SurvivalDataset(std::move(r));
}

int SurvivalDataset::events() const {
  return static_cast<int>(std::count_if(records_.begin(), records_.end(), [](const auto& r) { return r.event; }));
}

int SurvivalDataset::censored() const { return static_cast<int>(records_.size()) - events(); }

std::vector<double> SurvivalDataset::event_times() const {
  std::vector<double> t;
  for (const auto& r : records_)
    if (r.event) t.push_back(r.time);
  return t;
}

std::vector<double> SurvivalDataset::censor_times() const {
  std::vector<double> t;
  for (const auto& r : records_)
    if (!r.event) t.push_back(r.time);
  return t;
}

std::vector<SurvivalDataset::Distinct> SurvivalDataset::distinct_events() const {
  std::vector<const SurvivalRecord*> ev;
  for (const auto& r : records_)
    if (r.event) ev.push_back(&r);
  std::stable_sort(ev.begin(), ev.end(), [](auto* a, auto* b) { return a->time < b->time; });
  std::vector<Distinct> out;
  for (const auto* r : ev) {
    if (!out.empty() && out.back().time == r->time) {
      if (out.back().mark != r->mark)
        throw ConfigError(kModule, "distinct_events", "tied events carry different marks");
      ++out.back().multiplicity;
    } else {
      out.push_back({r->time, 1, r->mark});
    }
  }
  return out;
}

SurvivalDataset SurvivalDataset::pooled(const SurvivalDataset& other) const {
  auto r = records_;
  r.insert(r.end(), other.records_.begin(), other.records_.end());
  return SurvivalDataset(std::move(r));
}

int at_risk(const SurvivalDataset& ds, double s, AtRisk mode) {
  int k = 0;
  for (const auto& r : ds.records()) k += mode == AtRisk::Strict ? (r.time > s) : (r.time >= s);
  return k;
}

// ---------------------------------------------------------------- prior

HazardPrior HazardPrior::beta(RealFn c, BaseMeasure A0, std::vector<double> c_breaks) {
  if (A0.support().lo < 0.0) throw ConfigError(kModule, "HazardPrior", "hazard measure must live on [0, inf)");
  HazardPrior p;
  p.c_ = c;
  p.breaks_ = sorted_unique([&] {
    auto b = std::move(c_breaks);
    b.insert(b.end(), A0.breakpoints().begin(), A0.breakpoints().end());
    return b;
  }());
  for (double s : {A0.support().lo, A0.quantile(std::min(1.0, A0.total_mass() / 2))}) {
    double v = c(std::max(s, 1e-12));
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(kModule, "HazardPrior", "c(s) must be positive");
  }
  p.A0_ = [A0](double t) { return A0.cumulative(t); };
  p.A0_inv_ = [A0](double x) { return A0.quantile(x); };
  auto dens = [c, A0](double s) { return c(s) * A0.density(s); };
  const Interval sup = A0.support();
  const bool fin = A0.finite();
  const auto br = p.breaks_;
  p.eta_ = BaseMeasure::custom(
      "c*A0", sup, dens,
      [dens, sup, fin, br](double y) {
        if (!std::isfinite(y) && !fin) return kInf;
        return integrate_pieces(dens, sup.lo, y, br, 1e-12);
      },
      {}, p.breaks_);
  return p;
}

HazardPrior HazardPrior::beta(double c, BaseMeasure A0) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError(kModule, "HazardPrior", "c must be positive");
  HazardPrior p = beta([c](double) { return c; }, A0);
  p.eta_ = A0.scaled(c);
  return p;
}

HazardPrior HazardPrior::dirichlet(double theta, BaseMeasure F0) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ConfigError(kModule, "HazardPrior", "theta must be positive");
  if (!F0.finite() || !(F0.total_mass() > 0.0))
    throw ConfigError(kModule, "HazardPrior", "F0 must have finite positive mass");
  if (F0.support().lo < 0.0) throw ConfigError(kModule, "HazardPrior", "F0 must live on [0, inf)");
  const double m = F0.total_mass();
  HazardPrior p;
  p.stacy_ = Stacy{theta, F0, 0.0};
  p.breaks_ = F0.breakpoints();
  p.c_ = [theta, F0, m](double s) { return theta * std::max(0.0, 1.0 - F0.cumulative(s) / m); };
  p.eta_ = F0.scaled(theta / m);
  return p;
}

HazardPrior HazardPrior::beta_stacy(double theta, BaseMeasure F0, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError(kModule, "HazardPrior", "beta must be nonnegative");
  HazardPrior p = dirichlet(theta, std::move(F0));
  auto c = p.c_;
  p.c_ = [c, beta](double s) { return c(s) + beta; };
  p.stacy_->beta = beta;
  return p;
}

HazardPrior HazardPrior::with_marks(MarkLaw m) const {
  HazardPrior p = *this;
  p.marks_ = std::move(m);
  return p;
}

LevyIntensity HazardPrior::intensity() const { return LevyIntensity::beta_process(c_, eta_, breaks_); }

std::optional<double> HazardPrior::theta() const {
  if (stacy_) return stacy_->theta;
  return std::nullopt;
}

std::optional<double> HazardPrior::stacy_shift() const {
  if (stacy_) return stacy_->beta;
  return std::nullopt;
}

double HazardPrior::tilted_hazard(double a, double b, int k) const {
  if (!(b > a)) return 0.0;
  if (stacy_) {
    // eta = theta F0/m and c = theta S0 + beta: the integrand is an exact
    // derivative of -log(theta S0 + beta + k)
    const double m = stacy_->F0.total_mass();
    auto level = [&](double s) {
      return stacy_->theta * std::max(0.0, 1.0 - stacy_->F0.cumulative(s) / m) + stacy_->beta + k;
    };
    double la = level(a), lb = level(b);
    if (lb <= 0.0) return kInf;
    return std::log(la / lb);
  }
  auto f = [&](double s) {
    double cs = c_(s);
    return eta_.density(s) / (cs + k);
  };
  double v = integrate_pieces(f, a, b, breaks_, 1e-12);
  if (!std::isfinite(v)) throw DivergenceError(kModule, "tilted_hazard", "cumulative hazard diverges");
  return v;
}

double HazardPrior::tilted_exponent(double a, double b, int k) const {
  // digamma(c+k) - digamma(c) = sum_{i<k} 1/(c+i)
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += tilted_hazard(a, b, i);
  return s;
}

double HazardPrior::A0(double t) const {
  if (t <= 0.0) return 0.0;
  if (A0_) return A0_(t);
  return tilted_hazard(0.0, t, 0);
}

double HazardPrior::A0_inverse(double x) const {
  if (x <= 0.0) return 0.0;
  if (A0_inv_) return A0_inv_(x);
  if (stacy_) {
    // A0(t) = log((theta + beta)/(theta S0(t) + beta))
    const double th = stacy_->theta, be = stacy_->beta;
    double s0 = ((th + be) * std::exp(-x) - be) / th;
    if (s0 <= 0.0) return eta_.support().hi;
    const double m = stacy_->F0.total_mass();
    return stacy_->F0.quantile(m * (1.0 - s0));
  }
  double hi = std::max(1.0, eta_.support().lo + 1.0);
  while (A0(hi) < x) {
    hi *= 2.0;
    if (hi > 1e300) return kInf;
  }
  return solve_monotone([&](double t) { return A0(t) - x; }, 0.0, hi, 1e-13);
}

double HazardPrior::F0_density(double t) const {
  double cs = c_(t);
  if (!(cs > 0.0)) return 0.0;
  return std::exp(-A0(t)) * eta_.density(t) / cs;
}

double HazardPrior::F0_quantile(double q) const { return A0_inverse(-std::log1p(-q)); }

bool HazardPrior::check_dirichlet_consistency(double tol) const {
  // c(s) = theta exp(-A0(s)) for a single theta
  const Interval sup = eta_.support();
  double hi = std::isfinite(sup.hi) ? sup.hi : A0_inverse(5.0);
  double s1 = sup.lo + (hi - sup.lo) / 64;
  double theta = c_(s1) * std::exp(A0(s1));
  for (int i = 1; i <= 64; ++i) {
    double s = sup.lo + (hi - sup.lo) * i / 64;
    if (std::abs(c_(s) - theta * std::exp(-A0(s))) > tol * std::max(1.0, theta)) return false;
  }
  return true;
}

// ---------------------------------------------------------------- posterior

PosteriorHazard::PosteriorHazard(HazardPrior prior) : prior_(std::move(prior)) {}

int PosteriorHazard::at_risk_plus(double s) const { return count_ge(risk_times_, s); }
int PosteriorHazard::at_risk_strict(double s) const { return count_gt(risk_times_, s); }

double PosteriorHazard::continuous_c(double s) const { return prior_.c(s) + at_risk_plus(s); }

LevyIntensity PosteriorHazard::continuous_part() const {
  auto times = risk_times_;
  auto c = prior_.c_fn();
  std::vector<double> br = prior_.breakpoints();
  br.insert(br.end(), times.begin(), times.end());
  return LevyIntensity::beta_process(
      [c, times](double s) { return c(s) + count_ge(times, s); }, prior_.eta(), sorted_unique(br));
}

PosteriorHazard PosteriorHazard::updated(const SurvivalDataset& ds) const {
  PosteriorHazard out = *this;
  if (ds.empty()) return out;
  auto distinct = ds.distinct_events();
  for (const auto& r : ds.records()) out.risk_times_.push_back(r.time);
  std::sort(out.risk_times_.begin(), out.risk_times_.end());
  // existing jumps: u^{e'} (1-u)^{Y'(T)} from the new batch
  for (auto& j : out.jumps_) j.b += at_risk(ds, j.time, AtRisk::Strict);
  for (const auto& d : distinct) {
    auto it = std::find_if(out.jumps_.begin(), out.jumps_.end(), [&](const auto& j) { return j.time == d.time; });
    if (it != out.jumps_.end()) {
      if (it->mark != d.mark) throw ConfigError(kModule, "posterior_hazard", "tied events carry different marks");
      it->multiplicity += d.multiplicity;
      it->a += d.multiplicity;
      continue;
    }
    double c = prior_.c(d.time);
    out.jumps_.push_back({d.time, d.multiplicity, static_cast<double>(d.multiplicity),
                          c + out.at_risk_strict(d.time), d.mark});
  }
  std::sort(out.jumps_.begin(), out.jumps_.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  for (const auto& j : out.jumps_)
    if (!(j.b > 0.0)) throw DivergenceError(kModule, "posterior_hazard", "jump law Beta(e, 0) is improper");
  return out;
}

PosteriorHazard posterior_hazard(const HazardPrior& prior, const SurvivalDataset& ds) {
  return PosteriorHazard(prior).updated(ds);
}

PosteriorHazard posterior_hazard(const PosteriorHazard& post, const SurvivalDataset& ds) {
  return post.updated(ds);
}

namespace {

// int_0^t eta(ds)/(c(s) + #{r >= s}) for sorted r.
double tilted_cumulative(const HazardPrior& prior, const std::vector<double>& r, double t) {
  double total = 0.0, a = 0.0;
  for (double x : sorted_unique(r)) {
    if (x >= t) break;
    if (x > a) total += prior.tilted_hazard(a, x, count_gt(r, a));
    a = x;
  }
  if (t > a) total += prior.tilted_hazard(a, t, count_gt(r, a));
  return total;
}

}  // namespace

double posterior_survival_mean(const PosteriorHazard& post, double t) {
  if (t <= 0.0) return 1.0;
  double lg = -tilted_cumulative(post.prior(), post.risk_times(), t);
  for (const auto& j : post.jumps())
    if (j.time <= t) lg += std::log1p(-j.mean());
  double v = std::exp(lg);
  if (!std::isfinite(v)) throw NumericError(kModule, "posterior_survival_mean", "non-finite survival mean");
  return v;
}

double posterior_survival_mean(const HazardPrior& prior, const SurvivalDataset& ds, double t) {
  return posterior_survival_mean(posterior_hazard(prior, ds), t);
}

// ---------------------------------------------------------------- marginals

double sequential_hazard(const HazardPrior& prior, const std::vector<double>& earlier, double t) {
  auto r = earlier;
  std::sort(r.begin(), r.end());
  return tilted_cumulative(prior, r, t);
}

double log_survival_factor(const HazardPrior& prior, const SurvivalDataset& ds) {
  // tilde A(inf) = int eta [digamma(c + Y+) - digamma(c)], Y+ = 0 past the last time
  std::vector<double> r;
  for (const auto& x : ds.records()) r.push_back(x.time);
  std::sort(r.begin(), r.end());
  double total = 0.0, a = 0.0;
  for (double x : sorted_unique(r)) {
    if (x > a) total += prior.tilted_exponent(a, x, count_gt(r, a));
    a = x;
  }
  return -total;
}

double log_survival_factor_sequential(const HazardPrior& prior, const SurvivalDataset& ds) {
  double lg = 0.0;
  std::vector<double> seen;
  for (double t : ds.event_times()) {
    lg -= sequential_hazard(prior, seen, t);
    seen.push_back(t);
  }
  for (double c : ds.censor_times()) {
    lg -= sequential_hazard(prior, seen, c);
    seen.push_back(c);
  }
  return lg;
}

namespace {

// log kappa_e at s tilted by (1-u)^y: log B(e, c(s) + y)
double log_kappa_at(const HazardPrior& prior, int e, double s, int y) {
  double b = prior.c(s) + y;
  if (!(b > 0.0)) throw DivergenceError(kModule, "ntr_marginal", "kappa diverges where c + Y = 0");
  return log_beta_fn(e, b);
}

// log of prod_j kappa_{e_j}/kappa_1 and the sequential factors relative to
// A_0, for observation i at tstar[assign[i]].
double log_partition_factor(const HazardPrior& prior, std::span<const int> assign, const std::vector<double>& tstar,
                            const std::vector<double>& censor = {}) {
  const int k = static_cast<int>(tstar.size());
  std::vector<int> e(k, 0);
  std::vector<double> all;
  for (int b : assign) {
    ++e[b];
    all.push_back(tstar[b]);
  }
  all.insert(all.end(), censor.begin(), censor.end());
  std::sort(all.begin(), all.end());
  double lg = 0.0;
  std::vector<double> seen;
  for (int b : assign) {
    double t = tstar[b];
    lg -= sequential_hazard(prior, seen, t);
    seen.push_back(t);
  }
  for (double t : tstar) lg += prior.A0(t);
  for (int j = 0; j < k; ++j) {
    double s = tstar[j];
    double cs = prior.c(s);
    int y = count_gt(all, s);
    // log kappa_e(tilted) - log kappa_1(untilted), kappa_1 = 1/c
    double b = cs + y;
    if (!(b > 0.0)) throw DivergenceError(kModule, "ntr_eppf", "kappa diverges where c + Y = 0");
    lg += log_beta_fn(e[j], b) + std::log(cs);
  }
  return lg;
}

}  // namespace

double ntr_marginal(const HazardPrior& prior, const SurvivalDataset& ds) {
  double lg = log_survival_factor_sequential(prior, ds);
  if (lg == -kInf) return 0.0;
  std::vector<double> all;
  for (const auto& r : ds.records()) all.push_back(r.time);
  std::sort(all.begin(), all.end());
  for (const auto& d : ds.distinct_events()) {
    lg += log_kappa_at(prior, d.multiplicity, d.time, count_gt(all, d.time));
    lg += std::log(prior.eta().density(d.time));
  }
  return std::exp(lg);
}

double ntr_eppf(const HazardPrior& prior, const Partition& p, const std::vector<double>& tstar) {
  if (static_cast<int>(tstar.size()) != p.num_blocks())
    throw ConfigError(kModule, "ntr_eppf", "one time per block is required");
  auto u = sorted_unique(tstar);
  if (u.size() != tstar.size()) throw ConfigError(kModule, "ntr_eppf", "block times must be distinct");
  for (double t : tstar)
    if (!(t > 0.0)) throw ConfigError(kModule, "ntr_eppf", "block times must be positive");
  return std::exp(log_partition_factor(prior, p.assignment(), tstar));
}

double ntr_marginal_rearranged(const HazardPrior& prior, const Partition& p, const std::vector<double>& tstar) {
  double v = ntr_eppf(prior, p, tstar);
  for (double t : tstar) v *= prior.F0_density(t);
  return v;
}

double ntr_eppf_integrated(const HazardPrior& prior, const Partition& p, double rel_tol) {
  const int k = p.num_blocks();
  if (k < 1) throw ConfigError(kModule, "ntr_eppf_integrated", "empty partition");
  if (k > 3) throw SizeLimitError(kModule, "ntr_eppf_integrated", "at most 3 blocks (nested quadrature)");
  // F0 may be defective: it carries mass 1 - exp(-A0(inf)) on (0, inf)
  const double qmax = -std::expm1(-prior.A0(kInf));
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> tstar(k);
  double total = 0.0;
  do {
    // q_{order[0]} < q_{order[1]} < ...
    std::function<double(int, double)> level = [&](int d, double lower) -> double {
      auto f = [&](double q) {
        tstar[order[d]] = prior.F0_quantile(q);
        if (d + 1 == k) {
          for (int j = 0; j + 1 < k; ++j)
            if (!(tstar[order[j]] < tstar[order[j + 1]])) return 0.0;
          double v = std::exp(log_partition_factor(prior, p.assignment(), tstar));
          return std::isfinite(v) ? v : 0.0;
        }
        return level(d + 1, q);
      };
      return integrate(f, lower, qmax, rel_tol);
    };
    total += level(0, 0.0);
  } while (std::next_permutation(order.begin(), order.end()));
  return total;
}

// ---------------------------------------------------------------- change of measure

namespace {

// -log E[e^{-T_beta}] = int eta(ds) [digamma(c + beta) - digamma(c)]
double tilt_exponent(const HazardPrior& prior, const RealFn& beta, const std::vector<double>& beta_breaks) {
  const char* op = "beta_tilt";
  const Interval sup = prior.eta().support();
  // beta must be nonnegative and nonincreasing
  double hi = std::isfinite(sup.hi) ? sup.hi : prior.A0_inverse(30.0);
  if (!std::isfinite(hi)) hi = 1e6;
  double prev = kInf;
  bool zero = true;
  for (int i = 0; i <= 128; ++i) {
    double s = sup.lo + (hi - sup.lo) * i / 128.0;
    double b = beta(s);
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError(kModule, op, "beta must be finite and nonnegative");
    if (b > prev * (1 + 1e-12)) throw ConfigError(kModule, op, "beta must be nonincreasing");
    prev = b;
    zero = zero && b == 0.0;
  }
  if (zero) return 0.0;

  std::vector<double> br = prior.breakpoints();
  br.insert(br.end(), beta_breaks.begin(), beta_breaks.end());
  br = sorted_unique(br);
  auto f = [&](double s) {
    double b = beta(s);
    if (b == 0.0) return 0.0;
    double d = prior.eta().density(s);
    if (d == 0.0) return 0.0;
    double c = prior.c(s);
    if (c <= 0.0) return kInf;
    return d * (boost::math::digamma(c + b) - boost::math::digamma(c));
  };
  double total = 0.0;
  if (std::isfinite(prior.A0(sup.hi))) {
    total = integrate_pieces(f, sup.lo, sup.hi, br, 1e-12);
  } else {
    // shells between A0 levels 2^{j-1} and 2^j until they stop contributing
    double a = sup.lo;
    bool converged = false;
    for (int j = -4; j <= 60 && !converged; ++j) {
      double b = prior.A0_inverse(std::ldexp(1.0, j));
      if (!(b > a) || !std::isfinite(b) || b >= sup.hi) break;
      double shell = integrate_pieces(f, a, b, br, 1e-12);
      total += shell;
      a = b;
      if (!std::isfinite(total)) break;
      converged = j >= 2 && shell <= 1e-14 * total;
    }
    if (!converged) throw DivergenceError(kModule, op, "T_beta is not finite for this beta");
  }
  if (!std::isfinite(total)) throw DivergenceError(kModule, op, "normalizer integral diverges");
  return total;
}

}  // namespace

std::pair<HazardPrior, double> beta_tilt(const HazardPrior& prior, RealFn beta, std::vector<double> beta_breaks) {
  const double lz = -tilt_exponent(prior, beta, beta_breaks);
  HazardPrior p = prior;
  auto c = prior.c_;
  p.c_ = [c, beta](double s) { return c(s) + beta(s); };
  p.breaks_.insert(p.breaks_.end(), beta_breaks.begin(), beta_breaks.end());
  p.breaks_ = sorted_unique(p.breaks_);
  p.stacy_.reset();
  p.A0_ = {};
  p.A0_inv_ = {};
  return {p, lz};
}

std::pair<HazardPrior, double> beta_tilt(const HazardPrior& prior, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError(kModule, "beta_tilt", "beta must be nonnegative");
  if (beta == 0.0) return {prior, 0.0};
  const double lz = -tilt_exponent(prior, [beta](double) { return beta; }, {});
  if (beta == 0.0) return {prior, 0.0};
  HazardPrior p = prior;
  auto c = prior.c_;
  p.c_ = [c, beta](double s) { return c(s) + beta; };
  p.A0_ = {};
  p.A0_inv_ = {};
  if (p.stacy_) p.stacy_->beta += beta;
  return {p, lz};
}

double beta_stacy_eppf(double theta, const BaseMeasure& F0, const RealFn& beta, const Partition& p) {
  if (!(theta > 0.0)) throw ConfigError(kModule, "beta_stacy_eppf", "theta must be positive");
  if (!F0.finite() || !(F0.total_mass() > 0.0))
    throw ConfigError(kModule, "beta_stacy_eppf", "F0 must have finite positive mass");
  const double m = F0.total_mass();
  double v = eppf_eval(EppfSpec::ewens(theta), p);
  for (int e : p.block_sizes()) {
    // in the quantile variable q = F0(y)/m, S0 = 1 - q
    auto g = [&](double q) {
      double y = F0.quantile(m * q);
      double b = beta(y);
      if (!(b >= 0.0)) throw ConfigError(kModule, "beta_stacy_eppf", "beta must be nonnegative");
      double x = theta * (1.0 - q);
      double lr;
      if (x < 1e-300) {
        if (b == 0.0) return 0.0;
        lr = lgam(e) + lgam(b) - lgam(e + b);  // limit as S0 -> 0
      } else {
        lr = (lgam(e + x) + lgam(x + b)) - (lgam(x) + lgam(e + x + b));
      }
      return std::expm1(lr);
    };
    // 1 + int (ratio - 1): exact when beta vanishes
    v *= 1.0 + integrate(g, 0.0, 1.0, 1e-12);
  }
  return v;
}

// ---------------------------------------------------------------- paths

namespace {

struct Piece {
  double a, b;
  int y;           // Y+ on (a, b)
  double cmin;     // lower bound of c + y
  double cmax;     // upper bound of c
  double mass;     // cmax * (A0(b) - A0(a)), dominating eta mass
  double A0a, A0b;
};

}  // namespace

SurvivalPath sample_posterior_survival(const PosteriorHazard& post, const std::vector<double>& grid, double eps,
                                       RngStream& rng) {
  const char* op = "sample_posterior_survival";
  if (grid.empty()) throw ConfigError(kModule, op, "grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!(grid[i] > 0.0) || (i && !(grid[i] > grid[i - 1])))
      throw ConfigError(kModule, op, "grid must be positive and increasing");
  if (!(eps > 0.0)) throw ConfigError(kModule, op, "eps must be positive");
  const HazardPrior& prior = post.prior();
  const double tmax = grid.back();

  std::vector<double> cuts{0.0};
  for (double t : post.risk_times())
    if (t < tmax) cuts.push_back(t);
  for (double t : prior.breakpoints())
    if (t > 0.0 && t < tmax) cuts.push_back(t);
  cuts.insert(cuts.end(), grid.begin(), grid.end());
  cuts = sorted_unique(cuts);

  const auto& risk = post.risk_times();
  std::vector<Piece> pieces;
  std::function<void(double, double, int, int)> add = [&](double a, double b, int y, int depth) {
    double lo = kInf, hi = 0.0;
    for (int i = 0; i <= 16; ++i) {
      double s = a + (b - a) * i / 16.0;
      if (i == 0) s = a + (b - a) * 1e-9;
      double c = prior.c(s);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    if (depth < 12 && (hi + y) > 1.25 * (lo + y) && b - a > 1e-9 * std::max(1.0, b)) {
      double mid = 0.5 * (a + b);
      add(a, mid, y, depth + 1);
      add(mid, b, y, depth + 1);
      return;
    }
    Piece pc{a, b, y, (lo + y) * (1 - 1e-3), hi * (1 + 1e-3), 0.0, prior.A0(a), prior.A0(b)};
    pc.mass = pc.cmax * (pc.A0b - pc.A0a);
    if (!(pc.cmin > 0.0)) throw DivergenceError(kModule, op, "c + Y+ vanishes on the grid range");
    pieces.push_back(pc);
  };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) add(cuts[i], cuts[i + 1], count_gt(risk, cuts[i]), 0);

  double total_mass = 0.0;
  for (const auto& pc : pieces) total_mass += pc.mass;

  SurvivalPath path;
  path.grid = grid;
  // log S increments located at piece ends and jump times
  std::vector<std::pair<double, double>> increments;
  const BaseMeasure unit = BaseMeasure::uniform(0.0, 1.0, 1.0);
  for (const auto& pc : pieces) {
    if (!(pc.mass > 0.0)) continue;
    InverseLevySampler sampler(LevyIntensity::beta_process(pc.cmin, unit));
    // truncation level: dominating expected u-mass below ut is eps share
    const double share = 0.99 * eps * pc.mass / total_mass;
    double ut;
    if (pc.mass * sampler.residual(0.5) <= share) {
      ut = 0.5;
    } else {
      ut = std::exp(solve_monotone([&](double lu) { return std::log(pc.mass * sampler.residual(std::exp(lu))) -
                                                           std::log(share); },
                                   -700.0, std::log(0.5), 1e-10));
    }
    // expected -log(1-u) over the dropped atoms of the target intensity
    auto inner = [&](double cprime) {
      return integrate([&](double u) { return -std::log1p(-u) / u * std::pow(1 - u, cprime - 1); }, 0.0, ut, 1e-10);
    };
    double comp = integrate(
        [&](double s) {
          double d = prior.eta().density(s);
          return d == 0.0 ? 0.0 : d * inner(prior.c(s) + pc.y);
        },
        pc.a, pc.b, 1e-9);
    path.truncation_bound += comp;
    increments.push_back({pc.b, -comp});

    double arrival = 0.0;
    for (;;) {
      arrival += rng.exponential();
      double u = sampler.inverse_tail(arrival / pc.mass);
      if (!(u >= ut)) break;
      double s = prior.A0_inverse(pc.A0a + rng.uniform() * (pc.A0b - pc.A0a));
      s = std::clamp(s, pc.a, pc.b);
      double cs = prior.c(s);
      double acc = std::min(1.0, cs / pc.cmax * std::pow(1 - u, cs + pc.y - pc.cmin));
      if (rng.uniform() >= acc) continue;
      std::optional<double> mark;
      if (prior.mark_law()) mark = prior.mark_law()->sample(s, rng);
      path.atoms.push_back({s, u, mark});
      increments.push_back({s, std::log1p(-u)});
    }
  }
  for (const auto& j : post.jumps()) {
    if (j.time > tmax) continue;
    double J = rng.beta(j.a, j.b);
    path.atoms.push_back({j.time, J, j.mark});
    increments.push_back({j.time, std::log1p(-J)});
  }
  std::sort(increments.begin(), increments.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  double lg = 0.0;
  std::size_t k = 0;
  for (double t : grid) {
    while (k < increments.size() && increments[k].first <= t) lg += increments[k++].second;
    path.survival.push_back(std::exp(lg));
  }
  return path;
}

SurvivalPath sample_posterior_survival(const HazardPrior& prior, const SurvivalDataset& ds,
                                       const std::vector<double>& grid, double eps, RngStream& rng) {
  return sample_posterior_survival(posterior_hazard(prior, ds), grid, eps, rng);
}

}  // namespace ppcalc
