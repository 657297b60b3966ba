#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "ppcalc/errors.hpp"
#include "ppcalc/levy.hpp"
#include "ppcalc/stats.hpp"

using namespace ppcalc;

namespace {

BaseMeasure unit(double mass = 1.0) { return BaseMeasure::uniform(0.0, 1.0, mass); }

bool rel_close(double a, double b, double tol) { return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b)); }

}  // namespace

TEST_CASE("kappa examples") {
  auto gp = LevyIntensity::gamma_process(unit());
  CHECK(kappa(gp, 2) == doctest::Approx(1.0).epsilon(1e-14));
  auto beta = LevyIntensity::beta_process(1.0, unit());
  CHECK(kappa(beta, 2) == doctest::Approx(0.5).epsilon(1e-14));
  auto gg = LevyIntensity::generalized_gamma(0.5, 1.0, unit());
  CHECK(kappa(gg, 1) == doctest::Approx(1.0).epsilon(1e-14));
  // independent Simpson oracle for int s^2 s^{-1} e^{-s} ds
  double simpson = oracle::simpson_log([](double s) { return s * std::exp(-s); });
  CHECK(kappa(gp, 2) == doctest::Approx(simpson).epsilon(1e-9));
}

TEST_CASE("untilted stable refuses moments") {
  auto st = LevyIntensity::stable(0.5, unit());
  CHECK_THROWS_AS(kappa(st, 1), DivergenceError);
  CHECK_THROWS_AS(kappa_quadrature(st, 1, 0.5), DivergenceError);
  CHECK_THROWS_AS(tail_mass(LevyIntensity::generalized_gamma(0.5, 1.0, unit()).with_base(unit()), -1.0), ConfigError);
  auto tilted = st.tilted(TiltTerm::linear(2.0));
  CHECK(kappa(tilted, 1) == doctest::Approx(std::pow(2.0, -0.5)).epsilon(1e-14));
  CHECK(kappa_quadrature(tilted, 1, 0.5) == doctest::Approx(std::pow(2.0, -0.5)).epsilon(1e-9));
}

TEST_CASE("closed-form kappa agrees with quadrature") {
  std::vector<LevyIntensity> cases = {
      LevyIntensity::gamma_process(unit()),
      LevyIntensity::generalized_gamma(0.5, 1.0, unit()),
      LevyIntensity::generalized_gamma(0.25, 2.5, unit()).tilted(TiltTerm::linear(0.7)),
      LevyIntensity::stable(0.7, unit()).tilted(TiltTerm::kernel_constant(1.3)),
      LevyIntensity::beta_process(2.0, unit()).tilted(TiltTerm::at_risk_constant(3.0)),
      LevyIntensity::beta_process(0.6, unit()),
      LevyIntensity::compound_poisson(2.0, 1.5, 3.0, unit()).tilted(TiltTerm::linear(0.4)),
  };
  for (const auto& li : cases)
    for (int n = 1; n <= 6; ++n) {
      INFO(li.family_name() << " n=" << n);
      CHECK(rel_close(kappa(li, n, 0.5), kappa_quadrature(li, n, 0.5), 1e-7));
    }
}

TEST_CASE("tilt composition") {
  auto li = LevyIntensity::generalized_gamma(0.3, 1.0, unit());
  auto zero = li.tilted(TiltTerm::linear(0.0));
  for (int n = 1; n <= 4; ++n) CHECK(kappa(zero, n) == kappa(li, n));
  auto twice = li.tilted(TiltTerm::linear(0.4)).tilted(TiltTerm::linear(1.1));
  auto once = li.tilted(TiltTerm::linear(1.5));
  for (int n = 1; n <= 5; ++n) CHECK(rel_close(kappa(twice, n), kappa(once, n), 1e-10));
  // original unchanged
  CHECK(li.tilts().empty());
}

TEST_CASE("Laplace exponent examples") {
  auto gp = LevyIntensity::gamma_process(unit());
  CHECK(laplace_exponent_constant(gp, 0.0) == 0.0);
  CHECK(laplace_exponent_constant(gp, 2.0) == doctest::Approx(std::log(3.0)).epsilon(1e-13));
  auto gg = LevyIntensity::generalized_gamma(0.5, 1.0, unit());
  CHECK(laplace_exponent_constant(gg, 1.0) == doctest::Approx(2.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-13));
  CHECK(laplace_exponent_quadrature(gg, [](double) { return 1.0; }) ==
        doctest::Approx(2.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-8));
  auto g = [](double y) { return 1.0 + y * y; };
  CHECK(laplace_exponent(gg, g) == doctest::Approx(laplace_exponent_quadrature(gg, g)).epsilon(1e-8));
  auto beta = LevyIntensity::beta_process(1.5, unit(2.0));
  CHECK(laplace_exponent_constant(beta, 0.8) > 0.0);
}

TEST_CASE("tilt/exponent consistency") {
  auto li = LevyIntensity::generalized_gamma(0.4, 0.5, unit(1.7));
  for (double f : {0.3, 1.0, 2.5})
    for (double g : {0.2, 1.0, 4.0}) {
      double lhs = laplace_exponent_constant(li.tilted(TiltTerm::linear(f)), g);
      double rhs = laplace_exponent_constant(li, f + g) - laplace_exponent_constant(li, f);
      CHECK(std::fabs(lhs - rhs) < 1e-8);
      double lhsq = laplace_exponent_quadrature(li.tilted(TiltTerm::linear(f)), [g](double) { return g; });
      CHECK(std::fabs(lhsq - rhs) < 1e-8);
    }
}

TEST_CASE("jump sampling") {
  RngStream rng(11);
  auto gp = LevyIntensity::gamma_process(unit());
  std::vector<double> xs;
  for (int i = 0; i < 100000; ++i) xs.push_back(jump_sample(gp, 3, 0.5, rng));
  auto m = stats::mean_and_stderr(xs);
  CHECK(std::fabs(m.mean - 3.0) < 3 * m.std_error);

  xs.clear();
  auto beta = LevyIntensity::beta_process(1.0, unit());
  for (int i = 0; i < 100000; ++i) xs.push_back(jump_sample(beta, 2, 0.5, rng));
  m = stats::mean_and_stderr(xs);
  CHECK(std::fabs(m.mean - 2.0 / 3.0) < 3 * m.std_error);

  auto gg = LevyIntensity::generalized_gamma(0.5, 1.0, unit());
  std::vector<double> exact, fb;
  for (int i = 0; i < 20000; ++i) exact.push_back(jump_sample(gg, 1, 0.5, rng));
  JumpLaw gg_law(gg, 1, 0.5);
  for (int i = 0; i < 4000; ++i) fb.push_back(gg_law.sample(rng));
  auto me = stats::mean_and_stderr(exact), mf = stats::mean_and_stderr(fb);
  CHECK(std::fabs(me.mean - mf.mean) < 3 * std::hypot(me.std_error, mf.std_error));
  CHECK(stats::ks_one_sample(fb, [](double x) { return boost::math::gamma_p(0.5, x); }).p_value > 0.001);

  std::vector<double> bfb;
  auto tilted_beta = beta.tilted(TiltTerm::at_risk_constant(2.0));
  JumpLaw beta_law(tilted_beta, 2, 0.5);
  for (int i = 0; i < 3000; ++i) bfb.push_back(beta_law.sample(rng));
  CHECK(stats::ks_one_sample(bfb, [](double x) { return boost::math::ibeta(2.0, 3.0, x); }).p_value > 0.001);
  for (double x : {0.01, 0.2, 0.5, 0.9}) CHECK(std::fabs(beta_law.cdf(x) - boost::math::ibeta(2.0, 3.0, x)) < 1e-9);
  CHECK(jump_sample_fallback(gg, 2, 0.5, rng) > 0.0);
}

TEST_CASE("tail mass") {
  auto gg = LevyIntensity::generalized_gamma(0.5, 1.0, unit());
  CHECK(tail_mass(gg, 1e6) < 1e-8);
  auto gp = LevyIntensity::gamma_process(unit());
  CHECK(tail_mass(gp, 1.0) == doctest::Approx(0.21938393439552).epsilon(1e-12));
  double prev = kInf;
  for (double x = 1e-6; x < 50; x *= 1.7) {
    double t = tail_mass(gg, x);
    CHECK(t <= prev);
    prev = t;
    CHECK(rel_close(t, tail_mass_quadrature(gg, x), 1e-9));
  }
  auto beta = LevyIntensity::beta_process(0.7, unit()).tilted(TiltTerm::at_risk_constant(1.0));
  for (double x : {1e-8, 1e-3, 0.2, 0.5, 0.6, 0.95})
    CHECK(rel_close(tail_mass(beta, x), tail_mass_quadrature(beta, x), 1e-8));
  auto inhomog = LevyIntensity::gamma_process(unit()).tilted(TiltTerm::kernel([](double y) { return y; }, "f"));
  CHECK_THROWS_AS(tail_mass(inhomog, 1.0), UnsupportedOperation);
}

TEST_CASE("inverse Levy atoms") {
  RngStream rng(5);
  auto gp = LevyIntensity::gamma_process(unit(2.0));
  InverseLevySampler sampler(gp);
  std::vector<double> totals;
  for (int b = 0; b < 10000; ++b) {
    auto d = sampler.draw(2.0, 1e-8, rng);
    for (std::size_t i = 1; i < d.atoms.size(); ++i) REQUIRE(d.atoms[i].weight < d.atoms[i - 1].weight);
    CHECK(d.truncation_bound < 1e-8);
    totals.push_back(d.total_weight());
  }
  auto m = stats::mean_and_stderr(totals);
  CHECK(std::fabs(m.mean - 2.0) < 3 * m.std_error);

  auto gg = LevyIntensity::generalized_gamma(0.5, 1.0, unit());
  InverseLevySampler s2(gg);
  std::vector<double> t2, tb;
  for (int b = 0; b < 10000; ++b) {
    auto d = s2.draw(1.0, 1e-2, rng);
    t2.push_back(d.compensated_total());
    tb.push_back(d.integrate([](double y) { return y < 0.3 ? 1.0 : 0.0; }) + 0.3 * d.truncation_bound);
  }
  m = stats::mean_and_stderr(t2);
  CHECK(std::fabs(m.mean - 1.0) < 3 * m.std_error);
  // mean and variance of mu(B), B = [0, 0.3): kappa_1 eta(B), kappa_2 eta(B)
  m = stats::mean_and_stderr(tb);
  CHECK(std::fabs(m.mean - 0.3) < 4 * m.std_error);
  std::vector<double> sq;
  for (double x : tb) sq.push_back((x - 0.3) * (x - 0.3));
  auto v = stats::mean_and_stderr(sq);
  CHECK(std::fabs(v.mean - 0.3 * kappa(gg, 2)) < 4 * v.std_error);

  // finite intensity: atoms are finite in number with no truncation
  auto cp = LevyIntensity::compound_poisson(3.0, 2.0, 1.0, unit());
  std::vector<double> counts;
  for (int b = 0; b < 5000; ++b) counts.push_back(inverse_levy_atoms(cp, 1.0, 1e-12, rng).atoms.size());
  m = stats::mean_and_stderr(counts);
  CHECK(std::fabs(m.mean - 3.0) < 4 * m.std_error);

  // beta intensity
  auto beta = LevyIntensity::beta_process(2.0, unit(3.0));
  std::vector<double> bt;
  for (int b = 0; b < 5000; ++b) bt.push_back(inverse_levy_atoms(beta, 3.0, 1e-9, rng).total_weight());
  m = stats::mean_and_stderr(bt);
  CHECK(std::fabs(m.mean - 3.0 * kappa(beta, 1)) < 4 * m.std_error);
}

TEST_CASE("draws are atomic with finitely many atoms above any threshold") {
  RngStream rng(3);
  auto d = inverse_levy_atoms(LevyIntensity::generalized_gamma(0.5, 1.0, unit()), 1.0, 1e-4, rng);
  CHECK(!d.atoms.empty());
  for (const auto& a : d.atoms) CHECK(a.weight > 0.0);
  CHECK(d.truncation_bound >= 0.0);
}

TEST_CASE("inverse Levy is deterministic per seed") {
  auto gg = LevyIntensity::generalized_gamma(0.5, 1.0, unit());
  RngStream a(42), b(42);
  auto da = inverse_levy_atoms(gg, 1.0, 1e-3, a), db = inverse_levy_atoms(gg, 1.0, 1e-3, b);
  REQUIRE(da.atoms.size() == db.atoms.size());
  for (std::size_t i = 0; i < da.atoms.size(); ++i) {
    CHECK(da.atoms[i].weight == db.atoms[i].weight);
    CHECK(da.atoms[i].location == db.atoms[i].location);
  }
}
