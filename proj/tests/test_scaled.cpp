#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "ppcalc/errors.hpp"
#include "ppcalc/scaled.hpp"
#include "ppcalc/stats.hpp"

using namespace ppcalc;

namespace {

BaseMeasure unit(double mass) { return BaseMeasure::uniform(0.0, 1.0, mass); }

// Gamma process with mass c: T ~ Gamma(c, 1).
double gamma_negmom(double c, double s) { return std::exp(std::lgamma(c - s) - std::lgamma(c)); }

// Stable with mass c: E[e^{-vT}] = exp(-K v^alpha), K = c/alpha.
double stable_negmom(double alpha, double c, double s) {
  double K = c / alpha;
  return std::exp(std::lgamma(1.0 + s / alpha) - std::lgamma(1.0 + s) - (s / alpha) * std::log(K));
}

// Normalized tau_{theta;n}: v^{n-1}(1+v)^{-(n+theta)} / B(n, theta).
double tau(double theta, int n, double v) {
  return std::exp((n - 1) * std::log(v) - (n + theta) * std::log1p(v) -
                  (std::lgamma(n) + std::lgamma(theta) - std::lgamma(n + theta)));
}

double log_grid(int i, int m, double lo, double hi) { return std::exp(lo + (hi - lo) * i / (m - 1)); }

}  // namespace

TEST_CASE("Laplace transform and tilted moments") {
  auto gp = LevyIntensity::gamma_process(unit(1.7));
  auto st = LevyIntensity::stable(0.4, unit(0.9));
  for (double v : {1e-3, 0.5, 2.0, 40.0}) {
    CHECK(log_laplace_transform(gp, v) == doctest::Approx(-1.7 * std::log1p(v)).epsilon(1e-12));
    CHECK(log_laplace_transform(st, v) == doctest::Approx(-0.9 * std::pow(v, 0.4) / 0.4).epsilon(1e-12));
    for (int n = 1; n <= 6; ++n) {
      // tilted gamma process: T ~ Gamma(1.7, 1 + v)
      double want = std::log(oracle::rising(1.7, n)) - n * std::log1p(v);
      CHECK(log_tilted_moment(gp, n, v) == doctest::Approx(want).epsilon(1e-12));
    }
  }
  // extreme v stays finite in log space
  CHECK(std::isfinite(log_tilted_moment(st, 12, 1e-120)));
  CHECK(std::isfinite(log_tilted_moment(st, 12, 1e120)));
}

TEST_CASE("negative moments") {
  auto gp = LevyIntensity::gamma_process(unit(3.0));
  for (double s : {0.5, 1.5, 2.5, 0.0, -0.5, -0.9, -2.0})
    CHECK(std::exp(log_negative_moment(gp, s)) == doctest::Approx(gamma_negmom(3.0, s)).epsilon(1e-8));
  CHECK_THROWS_AS(log_negative_moment(gp, 3.0), DivergenceError);
  CHECK_THROWS_AS(log_negative_moment(gp, -1.5), UnsupportedOperation);
  auto st = LevyIntensity::stable(0.5, unit(1.3));
  for (double s : {0.3, 1.0, 2.0, -0.3})
    CHECK(std::exp(log_negative_moment(st, s)) == doctest::Approx(stable_negmom(0.5, 1.3, s)).epsilon(1e-8));
  // finite activity: P(T = 0) > 0
  auto cp = LevyIntensity::compound_poisson(1.0, 1.0, 1.0, unit(1.0));
  CHECK_THROWS_AS(log_negative_moment(cp, 0.5), DivergenceError);
}

TEST_CASE("stable scaled mixing law is a power of a gamma variable") {
  // V^alpha ~ Gamma(theta/alpha, K), K = c / alpha
  for (auto [alpha, theta, n, c] : {std::tuple{0.5, 1.0, 0, 1.0}, std::tuple{0.5, 0.5, 1, 1.0},
                                    std::tuple{0.3, 0.7, 2, 2.0}}) {
    MixingDensity pi = mixing_density({LevyIntensity::stable(alpha, unit(c)), theta, 0}, MixingKind::Scaled);
    if (n > 0) pi = mixing_density({LevyIntensity::stable(alpha, unit(c)), theta - n, n}, MixingKind::Scaled);
    const double shape = theta / alpha, K = c / alpha;
    double sup = 0.0;
    for (int i = 0; i < 60; ++i) {
      double v = log_grid(i, 60, std::log(1e-6), std::log(1e3));
      sup = std::max(sup, std::fabs(pi.cdf(v) - boost::math::gamma_p(shape, K * std::pow(v, alpha))));
    }
    INFO("alpha " << alpha << " theta " << theta);
    CHECK(sup < 1e-6);
  }
}

TEST_CASE("gamma process joint law factorizes") {
  const double th = 1.5;
  const int n = 4;
  auto gp = LevyIntensity::gamma_process(unit(th));
  auto pi = mixing_density({gp, 0.0, n}, MixingKind::Joint);
  auto ewens = EppfSpec::ewens(th);
  for (int i = 0; i < 20; ++i) {
    double v = log_grid(i, 20, std::log(1e-3), std::log(1e3));
    for (const auto& p : enumerate_partitions(n)) {
      double want = eppf_eval(ewens, p) * tau(th, n, v);
      CHECK(std::fabs(pi(v, p) - want) <= 1e-8 * want);
    }
    CHECK(pi(v) == doctest::Approx(tau(th, n, v)).epsilon(1e-8));
  }
}

TEST_CASE("mixing densities are normalized") {
  struct Case {
    LevyIntensity li;
    double theta;
    int n;
    MixingKind kind;
  };
  std::vector<Case> cases = {
      {LevyIntensity::stable(0.5, unit(1.0)), 0.8, 0, MixingKind::Scaled},
      {LevyIntensity::generalized_gamma(0.5, 1.0, unit(1.0)), 0.5, 2, MixingKind::Scaled},
      {LevyIntensity::gamma_process(unit(2.0)), 0.0, 4, MixingKind::Joint},
      {LevyIntensity::generalized_gamma(0.3, 2.0, unit(1.5)), 0.0, 3, MixingKind::Joint},
      {LevyIntensity::generalized_gamma(0.5, 1.0, unit(1.0)), 0.3, 3, MixingKind::ScaledJoint},
      {LevyIntensity::stable(0.5, unit(1.0)), -0.25, 3, MixingKind::ScaledJoint},
  };
  for (const auto& c : cases) {
    auto pi = mixing_density({c.li, c.theta, c.n}, c.kind);
    double mass = oracle::simpson_log([&](double v) { return pi(v); }, std::log(pi.lower()), std::log(pi.upper()),
                                      40000);
    INFO(c.li.family_name() << " theta " << c.theta << " n " << c.n);
    CHECK(std::fabs(mass - 1.0) < 1e-8);
    if (c.kind != MixingKind::Scaled) {
      double s = 0.0;
      for (const auto& p : enumerate_partitions(c.n)) s += pi.partition_probability(p);
      CHECK(std::fabs(s - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("gamma identity") {
  for (const auto& li : {LevyIntensity::gamma_process(unit(1.2)), LevyIntensity::generalized_gamma(0.5, 1.0, unit(0.8)),
                         LevyIntensity::generalized_gamma(0.25, 3.0, unit(2.0))})
    for (int n = 1; n <= 5; ++n) {
      auto pi = mixing_density({li, 0.0, n}, MixingKind::Joint);
      CHECK(std::fabs(pi.normalizer() - 1.0) < 1e-7);
    }
}

TEST_CASE("EPPF from the mixing representation") {
  auto st = LevyIntensity::stable(0.5, unit(1.0));
  CHECK(eppf_via_mixing(st, 0.5, Partition::single_block(2)) == doctest::Approx(1.0 / 3).epsilon(1e-8));
  for (double theta : {0.5, 0.0, -0.25, 1.7})
    for (int n = 1; n <= 5; ++n)
      for (const auto& p : enumerate_partitions(n)) {
        double want = eppf_eval(EppfSpec::two_param(0.5, theta), p);
        INFO("theta " << theta << " " << p.to_string());
        CHECK(std::fabs(eppf_via_mixing(st, theta, p) - want) < 1e-8 * want);
      }
  auto gp = LevyIntensity::gamma_process(unit(1.0));
  for (const auto& p : enumerate_partitions(3))
    CHECK(eppf_via_mixing(gp, 0.0, p) == doctest::Approx(eppf_eval(EppfSpec::ewens(1.0), p)).epsilon(1e-8));
  auto gg = LevyIntensity::generalized_gamma(0.5, 1.0, unit(1.0));
  for (double theta : {0.0, 0.3})
    for (int n = 1; n <= 6; ++n) {
      double s = 0.0;
      for (const auto& p : enumerate_partitions(n)) s += eppf_via_mixing(gg, theta, p);
      CHECK(std::fabs(s - 1.0) < 1e-7);
    }
  CHECK_THROWS_AS(mixing_density({st, 0.0, 0}, MixingKind::Scaled), DivergenceError);
}

TEST_CASE("scaled-unscaled tower") {
  const double c = 6.0;
  auto gp = LevyIntensity::gamma_process(unit(c));
  for (double theta : {0.5, 1.0, 2.0})
    for (int n = 1; n <= 3; ++n) {
      // E[T^n | v] = (c)_n (1+v)^{-n}; pi_{theta+n} is a beta-prime law
      const double s = theta + n;
      double mixed = oracle::simpson_log(
          [&](double v) {
            double dens = std::exp((s - 1) * std::log(v) - c * std::log1p(v) -
                                   (std::lgamma(s) + std::lgamma(c - s) - std::lgamma(c)));
            return oracle::rising(c, n) * std::pow(1.0 + v, -n) * dens;
          },
          -40.0, 40.0, 40000);
      double want = gamma_negmom(c, theta) / gamma_negmom(c, theta + n);
      CHECK(std::fabs(mixed - want) < 1e-6 * want);
      CHECK(std::fabs(moment_ratio(gp, theta, n) - want) < 1e-6 * want);
    }
}

TEST_CASE("Laplace functional mixture identity") {
  auto gp = LevyIntensity::gamma_process(unit(1.5));
  std::vector<std::pair<RealFn, std::vector<double>>> gs = {
      {[](double) { return 0.7; }, {}},
      {[](double y) { return y < 0.3 ? 2.5 : 0.5; }, {0.3}},
      {[](double y) { return y * y; }, {}},
  };
  for (const auto& [g, br] : gs) {
    // one-sided limits at the step
    auto piece = [&](double a, double b, int m) {
      return oracle::simpson([&](double y) { return std::log1p(g(std::clamp(y, a + 1e-12, b - 1e-12))); }, a, b, m);
    };
    double direct = std::exp(-1.5 * piece(0.0, 0.3, 600) - 1.5 * piece(0.3, 1.0, 1400));
    for (int n = 1; n <= 4; ++n) CHECK(std::fabs(laplace_functional_mixture(gp, 0.0, n, g, br) - direct) < 1e-6);
  }
  // scaled stable law: Laplace of mu under T^{-theta} weighting, levels 1 and 3 agree
  auto st = LevyIntensity::stable(0.5, unit(1.0));
  RealFn g = [](double y) { return 1.0 + y; };
  CHECK(std::fabs(laplace_functional_mixture(st, 0.4, 1, g) - laplace_functional_mixture(st, 0.4, 3, g)) < 1e-6);
}

TEST_CASE("PD Laplace closed form") {
  const double alpha = 0.5, theta = 1.2;
  auto H = unit(1.0);
  RealFn g = [](double y) { return y < 0.4 ? 1.0 : 3.0; };
  double closed = std::pow(0.4 * std::sqrt(2.0) + 0.6 * 2.0, -theta / alpha);
  CHECK(std::fabs(pd_scaled_laplace(alpha, theta, H, g, {0.4}) - closed) < 1e-6);
  RealFn g2 = [](double y) { return y < 0.5 ? 0.0 : 0.25; };
  double closed2 = std::pow(0.5 + 0.5 * std::pow(1.25, 0.3), -0.9 / 0.3);
  CHECK(std::fabs(pd_scaled_laplace(0.3, 0.9, H, g2, {0.5}) - closed2) < 1e-6);
}

TEST_CASE("scaled PD total mass is gamma") {
  const double alpha = 0.5, theta = 1.0;
  auto H = unit(1.0);
  std::vector<double> xs;
  for (int b = 0; b < 5000; ++b) {
    RngStream rng(41, b);
    auto d = pd_mixture_sample(alpha, theta, H, 0, 1e-2, rng);
    xs.push_back(std::pow(d.L, 1.0 / alpha) * d.continuous_total);
  }
  auto ks = stats::ks_one_sample(xs, [theta](double x) { return boost::math::gamma_p(theta, x); });
  CHECK(ks.p_value > 0.001);
}

TEST_CASE("PD mixture sampler conditional laws") {
  const double alpha = 0.5, theta = 0.5;
  auto H = unit(1.0);
  std::vector<double> us, js;
  for (int b = 0; b < 2500; ++b) {
    RngStream rng(43, b);
    auto d = pd_mixture_sample(alpha, theta, H, 3, 1e-2, rng);
    const int k = d.partition.num_blocks();
    REQUIRE(d.measure.atoms.size() >= static_cast<std::size_t>(k));
    double z = std::pow(d.L, 1.0 / alpha) * d.continuous_total;
    us.push_back(boost::math::gamma_p(theta + k * alpha, z));
    for (double l : d.locations) CHECK((l >= 0.0 && l <= 1.0));
    // n = 1: one block of size one, L^{1/alpha} J ~ Gamma(1 - alpha)
    RngStream rng1(44, b);
    auto d1 = pd_mixture_sample(alpha, theta, H, 1, 1e-2, rng1);
    REQUIRE(d1.jumps.size() == 1);
    js.push_back(std::pow(d1.L, 1.0 / alpha) * d1.jumps[0]);
  }
  CHECK(stats::ks_one_sample(us, [](double u) { return u; }).p_value > 0.001);
  auto m = stats::mean_and_stderr(js);
  CHECK(std::fabs(m.mean - (1.0 - alpha)) < 3 * m.std_error);
}

TEST_CASE("two PD constructions agree") {
  const double alpha = 0.5;
  auto H = unit(1.0);
  std::vector<double> a, b;
  for (int i = 0; i < 3000; ++i) {
    RngStream r1(51, i), r2(52, i);
    auto d = pd_mixture_sample(alpha, 0.0, H, 1, 3e-3, r1);
    double top = 0.0;
    for (const auto& at : d.measure.atoms) top = std::max(top, at.weight);
    a.push_back(top / d.measure.compensated_total());
    auto w = pd_inverse_levy_sample(alpha, 0.0, H, 2000, r2);
    b.push_back(w.atoms[0].weight * (1.0 - w.truncation_bound));
  }
  CHECK(stats::ks_two_sample(a, b).p_value > 0.001);
}

TEST_CASE("inverse-Levy PD weights") {
  const double alpha = 0.5, theta = 1.0;
  auto H = unit(1.0);
  RngStream rng(61);
  auto w = pd_inverse_levy_sample(alpha, theta, H, 500, rng);
  double s = 0.0;
  for (std::size_t i = 0; i < w.atoms.size(); ++i) {
    s += w.atoms[i].weight;
    if (i > 0) CHECK(w.atoms[i].weight < w.atoms[i - 1].weight);
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.truncation_bound > 0.0);
  // size-biased pick has mean (1 - alpha)/(1 + theta)
  std::vector<double> picks;
  for (int b = 0; b < 4000; ++b) {
    RngStream r(62, b);
    auto d = pd_inverse_levy_sample(alpha, theta, H, 300, r);
    double u = r.uniform(), acc = 0.0;
    double pick = d.atoms.back().weight;
    for (const auto& at : d.atoms) {
      acc += at.weight;
      if (u <= acc) {
        pick = at.weight;
        break;
      }
    }
    picks.push_back(pick);
  }
  auto m = stats::mean_and_stderr(picks);
  CHECK(std::fabs(m.mean - (1.0 - alpha) / (1.0 + theta)) < 3 * m.std_error);
  CHECK_THROWS_AS(pd_inverse_levy_sample(alpha, -0.2, H, 10, rng), ConfigError);
  CHECK_THROWS_AS(pd_inverse_levy_sample(alpha, theta, H, 0, rng), ConfigError);
}

TEST_CASE("PD posterior measure") {
  const double alpha = 0.5;
  auto H = unit(1.0);
  auto p = Partition::from_assignment({0, 0, 1, 0, 1});
  std::vector<double> ys = {0.2, 0.7};
  for (double theta : {1.0, 0.0}) {
    std::vector<double> pn, m0, m1;
    for (int b = 0; b < 10000; ++b) {
      RngStream rng(71, b);
      auto d = pd_posterior_measure(alpha, theta, ys, p, H, 20, rng);
      pn.push_back(d.p_n);
      m0.push_back(d.fixed_weights[0]);
      m1.push_back(d.fixed_weights[1]);
      if (b == 0) {
        double s = 0.0;
        for (const auto& a : d.measure.atoms) s += a.weight;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
    const double n = 5;
    auto e0 = stats::mean_and_stderr(m0), e1 = stats::mean_and_stderr(m1), ep = stats::mean_and_stderr(pn);
    CHECK(std::fabs(e0.mean - (3 - alpha) / (theta + n)) < 3 * e0.std_error);
    CHECK(std::fabs(e1.mean - (2 - alpha) / (theta + n)) < 3 * e1.std_error);
    CHECK(std::fabs(ep.mean - (theta + 2 * alpha) / (theta + n)) < 3 * ep.std_error);
  }
}

TEST_CASE("generalized gamma joint density") {
  // b = 0 is the stable joint law
  const double alpha = 0.5, mass = 1.3;
  for (int n = 1; n <= 4; ++n) {
    auto pi = mixing_density({LevyIntensity::stable(alpha, unit(mass)), 0.0, n}, MixingKind::Joint);
    for (const auto& p : enumerate_partitions(n))
      for (int i = 0; i < 10; ++i) {
        double v = log_grid(i, 10, std::log(1e-2), std::log(1e2));
        double want = pi(v, p) * pi.normalizer();
        CHECK(std::fabs(gg_scaled_joint_density(alpha, 0.0, mass, n, v, p) - want) <= 1e-10 * want);
      }
  }
  // normalized over v and p
  for (auto [a, b] : {std::pair{0.5, 1.0}, std::pair{0.2, 0.3}, std::pair{0.0, 1.0}})
    for (int n = 1; n <= 4; ++n) {
      double s = 0.0;
      for (const auto& p : enumerate_partitions(n))
        s += oracle::simpson_log([&](double v) { return gg_scaled_joint_density(a, b, 1.1, n, v, p); }, -40, 40,
                                 20000);
      CHECK(std::fabs(s - 1.0) < 1e-7);
    }
  // alpha -> 0 approaches the gamma factorization
  const double th = 1.1;
  for (const auto& p : enumerate_partitions(3))
    for (double v : {0.1, 1.0, 5.0}) {
      double want = eppf_eval(EppfSpec::ewens(th), p) * tau(th, 3, v);
      CHECK(std::fabs(gg_scaled_joint_density(1e-6, 1.0, th, 3, v, p) - want) < 1e-4 * want);
    }
  CHECK_THROWS_AS(gg_scaled_joint_density(1.2, 1.0, 1.0, 2, 1.0, Partition::single_block(2)), ConfigError);
}
