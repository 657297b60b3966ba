#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "ppcalc/errors.hpp"
#include "ppcalc/levycox.hpp"
#include "ppcalc/moments.hpp"

using namespace ppcalc;

namespace {

const std::vector<double> kEvents = {1.0, 1.7, 3.2};

// Simpson on each piece between sorted break points; endpoints are taken as
// one-sided limits so jumps at the breaks do not leak in.
double pieces(const std::function<double(double)>& f, std::vector<double> pts, double lo, double hi) {
  pts.push_back(lo);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double a = std::max(lo, pts[i]), b = std::min(hi, pts[i + 1]);
    if (b > a) {
      double d = 1e-13 * std::max(1.0, b - a);
      s += oracle::simpson([&](double x) { return f(std::clamp(x, a + d, b - d)); }, a, b, 2000);
    }
  }
  return s;
}

// Test-side description of one model on eta = uniform [0,5] with mass 2,
// window [0,5], Y = 1: kernel value and integral, closed-form kappa and
// Laplace density for the prior family.
struct Setup {
  std::string name;
  IntensityModel model;
  std::function<double(double, double)> k;       // K(t|y)
  std::function<double(double)> f;              // f_K(y)
  std::function<double(int, double)> kap;       // kappa_e at rate shift f
  std::function<double(double)> psi;            // Laplace density at g
};

const double kDensity = 0.4;

Setup make(bool uniform_kernel, bool gamma) {
  Setup s;
  s.model.window = {0.0, 5.0};
  auto base = BaseMeasure::uniform(0.0, 5.0, 2.0);
  if (uniform_kernel) {
    s.model.kernel = Kernel::uniform_window(1.0);
    s.k = [](double t, double y) { return (t >= y && t <= y + 1.0) ? 1.0 : 0.0; };
    s.f = [](double y) { return std::min(1.0, 5.0 - y); };
  } else {
    s.model.kernel = Kernel::exponential(1.0);
    s.k = [](double t, double y) { return t >= y ? std::exp(y - t) : 0.0; };
    s.f = [](double y) { return 1.0 - std::exp(y - 5.0); };
  }
  if (gamma) {
    s.model.prior = LevyIntensity::gamma_process(base);
    s.kap = [](int e, double f) { return std::tgamma(e) * std::pow(1.0 + f, -e); };
    s.psi = [](double g) { return std::log1p(g); };
  } else {
    s.model.prior = LevyIntensity::generalized_gamma(0.5, 1.0, base);
    s.kap = [](int e, double f) { return std::tgamma(e - 0.5) / std::tgamma(0.5) * std::pow(1.0 + f, 0.5 - e); };
    s.psi = [](double g) { return (std::sqrt(1.0 + g) - 1.0) / 0.5; };
  }
  s.name = std::string(uniform_kernel ? "uniform" : "exponential") + (gamma ? " gamma" : " gg");
  return s;
}

std::vector<Setup> setups() { return {make(true, true), make(false, true), make(true, false), make(false, false)}; }

std::vector<double> oracle_breaks(const std::vector<double>& xs) {
  std::vector<double> b = {4.0};
  for (double x : xs) {
    b.push_back(x);
    b.push_back(x - 1.0);
  }
  return b;
}

// int prod_{i in C} K(X_i|y) kappa_{e + extra}(y) g(y) eta(dy)
double oracle_block(const Setup& s, const std::vector<double>& xs, std::uint64_t mask, int extra,
                    const std::function<double(double)>& g, std::vector<double> more = {}) {
  int e = std::popcount(mask);
  auto br = oracle_breaks(xs);
  br.insert(br.end(), more.begin(), more.end());
  return pieces(
      [&](double y) {
        double v = kDensity * g(y);
        for (std::size_t i = 0; i < xs.size(); ++i)
          if (mask >> i & 1u) v *= s.k(xs[i], y);
        return v == 0.0 ? 0.0 : v * s.kap(e + extra, s.f(y));
      },
      br, 0.0, 5.0);
}

double one(double) { return 1.0; }

double oracle_log_laplace(const Setup& s) {
  return -pieces([&](double y) { return kDensity * s.psi(s.f(y)); }, {4.0}, 0.0, 5.0);
}

std::vector<std::uint64_t> masks_of(const std::vector<int>& a) {
  std::vector<std::uint64_t> m;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == static_cast<int>(m.size())) m.push_back(0);
    m[a[i]] |= std::uint64_t{1} << i;
  }
  return m;
}

double oracle_marginal(const Setup& s, const std::vector<double>& xs) {
  double z = 0.0;
  oracle::for_each_rgs(static_cast<int>(xs.size()), [&](const std::vector<int>& a) {
    double v = 1.0;
    for (auto m : masks_of(a)) v *= oracle_block(s, xs, m, 0, one);
    z += v;
  });
  return std::exp(oracle_log_laplace(s)) * z;
}

// E[sum_j g-weighted block term | X]: sum over partitions of
// pi(p|X) sum_j int g kappa_{e+1} prod K eta / Phi(C_j).
double oracle_block_average(const Setup& s, const std::vector<double>& xs, const std::function<double(double)>& g,
                            std::vector<double> more = {}) {
  double z = 0.0, acc = 0.0;
  oracle::for_each_rgs(static_cast<int>(xs.size()), [&](const std::vector<int>& a) {
    double w = 1.0, r = 0.0;
    for (auto m : masks_of(a)) {
      double phi = oracle_block(s, xs, m, 0, one);
      w *= phi;
      if (phi > 0.0) r += oracle_block(s, xs, m, 1, g, more) / phi;
    }
    z += w;
    acc += w * r;
  });
  return acc / z;
}

double oracle_prior_mean(const Setup& s, double t) {
  return pieces([&](double y) { return kDensity * s.k(t, y) * s.kap(1, s.f(y)); }, {4.0, t, t - 1.0}, 0.0, 5.0);
}

}  // namespace

TEST_CASE("kernel exponent examples") {
  IntensityModel m;
  m.kernel = Kernel::uniform_window(1.0);
  m.window = {0.0, 5.0};
  m.at_risk = StepFunction::constant(0.0, 0.0, 5.0);
  CHECK(m.kernel_exponent(1.3) == 0.0);
  m.at_risk.reset();
  CHECK(kernel_exponent(m, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kernel_exponent(m, 4.5) == doctest::Approx(0.5).epsilon(1e-15));
  m.at_risk = StepFunction{{0.0, 1.0}, {2.0}};
  CHECK(kernel_exponent(m, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  // general step function against quadrature
  m.at_risk = StepFunction{{0.0, 0.7, 2.0, 3.5}, {3.0, 1.5, 0.25}};
  for (auto kernel : {Kernel::uniform_window(1.3), Kernel::exponential(0.8), Kernel::gaussian(0.6),
                      Kernel::set_indicator(true), Kernel::set_indicator(false), Kernel::constant(0.5)}) {
    m.kernel = kernel;
    for (double y : {-0.4, 0.3, 1.1, 2.7, 4.2}) {
      double want = pieces([&](double s) { return (*m.at_risk)(s) * kernel(s, y); }, {0.7, 2.0, 3.5, y, y + 1.3},
                           0.0, 5.0);
      INFO(kernel.describe() << " y=" << y);
      CHECK(std::fabs(m.kernel_exponent(y) - want) < 1e-8);
    }
  }
}

TEST_CASE("invalid models are rejected") {
  CHECK_THROWS_AS(Kernel::uniform_window(0.0), ConfigError);
  CHECK_THROWS_AS(Kernel::exponential(-1.0), ConfigError);
  IntensityModel m;
  m.at_risk = StepFunction{{0.0, 1.0}, {-1.0}};
  CHECK_THROWS_AS(LevyCoxPosterior(m, {0.5}), ConfigError);
  m.at_risk = StepFunction{{1.0, 0.0}, {1.0}};
  CHECK_THROWS_AS(LevyCoxPosterior(m, {0.5}), ConfigError);
}

TEST_CASE("single event marginal likelihood") {
  auto s = make(true, true);
  // f = 1 on [0,4], 5 - y on [4,5]; kappa_1 = 1/2 on the window of X = 1
  double log_lap = -(1.6 * std::log(2.0) + 0.4 * (2.0 * std::log(2.0) - 1.0));
  LevyCoxPosterior post(s.model, {1.0});
  CHECK(std::fabs(post.log_laplace() - log_lap) < 1e-10);
  CHECK(post.marginal_likelihood() == doctest::Approx(std::exp(log_lap) * 0.2).epsilon(1e-9));
  CHECK(post.posterior_partition_density(Partition::single_block(1)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact marginal likelihood against enumeration") {
  for (const auto& s : setups()) {
    double want = oracle_marginal(s, kEvents);
    double got = marginal_likelihood(s.model, kEvents);
    INFO(s.name << " want " << want << " got " << got);
    CHECK(std::fabs(got - want) < 1e-7 * want);
  }
}

TEST_CASE("WCR marginal likelihood agrees with enumeration") {
  for (const auto& s : {make(true, true), make(false, false)}) {
    double exact = marginal_likelihood(s.model, kEvents);
    auto est = marginal_likelihood_wcr(s.model, kEvents, 100000, RngStream(77), 4);
    INFO(s.name << " exact " << exact << " mc " << est.value << " se " << est.std_error);
    // with the unit window the seating can be exact, so the error may vanish
    CHECK(std::fabs(est.value - exact) <= 3 * est.std_error + 1e-12 * exact);
  }
}

TEST_CASE("marginal likelihood grows with the base mass") {
  auto s = make(true, true);
  double a = marginal_likelihood(s.model, kEvents);
  auto m2 = s.model;
  m2.prior = LevyIntensity::gamma_process(BaseMeasure::uniform(0.0, 5.0, 4.0));
  CHECK(marginal_likelihood(m2, kEvents) > a);
}

TEST_CASE("likelihood is positive or flagged") {
  auto s = make(true, true);
  CHECK(marginal_likelihood(s.model, {0.2, 0.9, 1.1}) > 0.0);
  // no location in [0,5] covers both 0.2 and 4.8 under the unit window, but
  // the singleton partition still has positive weight
  CHECK(marginal_likelihood(s.model, {0.2, 4.8}) > 0.0);
  // an event outside every window has zero likelihood
  CHECK_THROWS_AS(marginal_likelihood(s.model, {-3.0}), DegenerateModelError);
}

TEST_CASE("posterior partition density") {
  for (const auto& s : setups()) {
    LevyCoxPosterior post(s.model, kEvents);
    double total = 0.0, z = 0.0;
    std::vector<double> want;
    for (const auto& p : enumerate_partitions(3)) {
      total += post.posterior_partition_density(p);
      double v = 1.0;
      for (auto m : p.block_masks()) v *= oracle_block(s, kEvents, m, 0, one);
      want.push_back(v);
      z += v;
    }
    CHECK(std::fabs(total - 1.0) < 1e-10);
    auto parts = enumerate_partitions(3);
    for (std::size_t i = 0; i < parts.size(); ++i)
      CHECK(std::fabs(post.posterior_partition_density(parts[i]) - want[i] / z) < 1e-8);
  }
  // constant kernel: the tilted gamma process gives the Ewens law
  IntensityModel m;
  m.kernel = Kernel::constant(1.0);
  m.window = {0.0, 2.0};
  m.prior = LevyIntensity::gamma_process(BaseMeasure::uniform(0.0, 1.0, 1.5));
  std::vector<double> xs = {0.1, 0.5, 0.9, 1.4};
  LevyCoxPosterior post(m, xs);
  for (const auto& p : enumerate_partitions(4))
    CHECK(post.posterior_partition_density(p) ==
          doctest::Approx(eppf_eval(EppfSpec::ewens(1.5), p)).epsilon(1e-10));
}

TEST_CASE("posterior intensity mean") {
  for (const auto& s : setups()) {
    LevyCoxPosterior none(s.model, {});
    LevyCoxPosterior single(s.model, {1.0});
    LevyCoxPosterior three(s.model, kEvents);
    for (double t : {0.5, 1.3, 2.2, 3.6, 4.7}) {
      INFO(s.name << " t=" << t);
      double prior = oracle_prior_mean(s, t);
      CHECK(std::fabs(none.intensity_mean_given_x(t) - prior) < 1e-8 * std::max(prior, 1.0));
      CHECK(std::fabs(three.prior_intensity_mean(t) - prior) < 1e-8 * std::max(prior, 1.0));
      // n = 1: given_X against given_Y averaged over the block posterior
      double phi = oracle_block(s, {1.0}, 1, 0, one);
      double avg = pieces(
          [&](double y) {
            double w = kDensity * s.k(1.0, y) * s.kap(1, s.f(y)) / phi;
            if (w == 0.0) return 0.0;
            return w * single.intensity_mean_given_y(t, Partition::single_block(1), {y});
          },
          {0.0, 1.0, t, t - 1.0, 4.0}, 0.0, 5.0);
      CHECK(std::fabs(single.intensity_mean_given_x(t) - avg) < 1e-9 * std::max(avg, 1.0));
      double want = prior + oracle_block_average(s, kEvents, [&](double y) { return s.k(t, y); }, {t, t - 1.0});
      CHECK(std::fabs(three.intensity_mean_given_x(t) - want) < 1e-7 * want);
    }
  }
}

TEST_CASE("given_Y closed form for the gamma process") {
  auto s = make(true, true);
  LevyCoxPosterior post(s.model, kEvents);
  auto p = Partition::from_assignment({0, 0, 1});
  // kappa_{e+1}/kappa_e = e/(1+f)
  double t = 1.5, y0 = 0.8, y1 = 2.5;
  double want = oracle_prior_mean(s, t) + 2.0 / (1.0 + s.f(y0)) + 0.0;
  CHECK(post.intensity_mean_given_y(t, p, {y0, y1}) == doctest::Approx(want).epsilon(1e-9));
  CHECK_THROWS_AS(post.intensity_mean_given_y(t, p, {y0}), ConfigError);
}

TEST_CASE("WCR intensity mean agrees with enumeration") {
  for (const auto& s : {make(true, true), make(false, false)}) {
    for (double t : {1.3, 3.6}) {
      double exact = posterior_intensity_mean(s.model, kEvents, t);
      auto est = posterior_intensity_mean_wcr(s.model, kEvents, t, 20000, RngStream(5), 4);
      INFO(s.name << " exact " << exact << " mc " << est.value << " se " << est.std_error);
      CHECK(std::fabs(est.value - exact) < 4 * est.std_error + 1e-12);
    }
  }
}

TEST_CASE("split tilt gives the same posterior") {
  for (const auto& s : setups()) {
    IntensityModel m = s.model;
    auto half = [m](double y) { return 0.5 * m.kernel_exponent(y); };
    auto two_step = m.prior.tilted(TiltTerm::kernel(half, "first", m.exponent_breaks()))
                        .tilted(TiltTerm::kernel(half, "second", m.exponent_breaks()));
    LevyCoxPosterior a(m, kEvents), b(m, kEvents, two_step);
    CHECK(std::fabs(a.marginal_likelihood() - b.marginal_likelihood()) < 1e-8 * a.marginal_likelihood());
    for (const auto& p : enumerate_partitions(3))
      CHECK(std::fabs(a.posterior_partition_density(p) - b.posterior_partition_density(p)) < 1e-8);
    for (double t : {1.3, 3.6})
      CHECK(std::fabs(a.intensity_mean_given_x(t) - b.intensity_mean_given_x(t)) < 1e-8 * a.intensity_mean_given_x(t));
  }
}

TEST_CASE("block location sampler follows the block posterior") {
  auto s = make(false, true);
  LevyCoxPosterior post(s.model, kEvents);
  const std::uint64_t mask = 0b011;
  double phi = oracle_block(s, kEvents, mask, 0, one);
  RngStream rng(11);
  const int N = 20000;
  std::vector<double> ys(N);
  for (auto& y : ys) y = post.sample_block_location(mask, rng);
  CHECK(*std::max_element(ys.begin(), ys.end()) <= 1.0);
  for (double q : {0.3, 0.6, 0.9}) {
    double want = pieces(
        [&](double y) { return y <= q ? kDensity * s.k(1.0, y) * s.k(1.7, y) * s.kap(2, s.f(y)) / phi : 0.0; },
        {q, 1.0}, 0.0, 5.0);
    double got = std::count_if(ys.begin(), ys.end(), [q](double y) { return y <= q; }) / double(N);
    CHECK(std::fabs(got - want) < 4 * std::sqrt(want * (1 - want) / N));
  }
}

TEST_CASE("posterior draws match exact means") {
  auto s = make(true, true);
  LevyCoxPosterior post(s.model, kEvents);
  auto draws = post.fit(10000, 1e-3, RngStream(2718), 4);
  for (const auto& d : draws) REQUIRE(d.error.empty());
  for (double t : {0.5, 1.3, 2.2, 3.6, 4.7}) {
    auto est = weighted_posterior_mean(draws, [&](const PosteriorDraw& d) { return post.draw_intensity(d, t); });
    double exact = post.intensity_mean_given_x(t);
    INFO("t=" << t << " exact " << exact << " mc " << est.value << " se " << est.std_error);
    CHECK(std::fabs(est.value - exact) < 4 * est.std_error);
  }
  // total mass with two events: prior part plus block jump means
  std::vector<double> xs = {1.0, 3.2};
  LevyCoxPosterior two(s.model, xs);
  auto d2 = fit_posterior(s.model, xs, 10000, 1e-3, RngStream(31), 4);
  auto est = weighted_posterior_mean(d2, [&](const PosteriorDraw& d) { return two.draw_total_mass(d); });
  double exact = pieces([&](double y) { return kDensity * s.kap(1, s.f(y)); }, {4.0}, 0.0, 5.0) +
                 oracle_block_average(s, xs, one);
  INFO("exact " << exact << " mc " << est.value << " se " << est.std_error);
  CHECK(std::fabs(est.value - exact) < 4 * est.std_error);
}

TEST_CASE("posterior draws truncation contract and determinism") {
  auto s = make(false, false);
  LevyCoxPosterior post(s.model, kEvents);
  auto a = post.fit(100, 1e-2, RngStream(3), 1);
  auto b = post.fit(100, 1e-2, RngStream(3), 4);
  auto c = post.fit(100, 3e-3, RngStream(3), 4);
  double na = 0.0, nc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].error.empty());
    CHECK(a[i].partition == b[i].partition);
    CHECK(a[i].log_weight == b[i].log_weight);
    CHECK(a[i].block_locations == b[i].block_locations);
    CHECK(a[i].block_jumps == b[i].block_jumps);
    REQUIRE(a[i].continuous.atoms.size() == b[i].continuous.atoms.size());
    for (std::size_t k = 0; k < a[i].continuous.atoms.size(); ++k) {
      CHECK(a[i].continuous.atoms[k].weight == b[i].continuous.atoms[k].weight);
      CHECK(a[i].continuous.atoms[k].location == b[i].continuous.atoms[k].location);
    }
    CHECK(a[i].continuous.truncation_bound < 1e-2);
    CHECK(c[i].continuous.truncation_bound < 3e-3);
    na += a[i].continuous.atoms.size();
    nc += c[i].continuous.atoms.size();
  }
  CHECK(nc > na);
  IntensityModel inf = s.model;
  inf.prior = LevyIntensity::gamma_process(
      BaseMeasure::custom("lebesgue", {0.0, kInf}, [](double) { return 1.0; }, [](double y) { return y; }));
  CHECK_THROWS_AS(LevyCoxPosterior(inf, kEvents).fit(10, 1e-2, RngStream(1)), UnsupportedOperation);
}
