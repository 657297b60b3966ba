#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "ppcalc/errors.hpp"
#include "ppcalc/transforms.hpp"

using namespace ppcalc;

namespace {

BaseMeasure unit(double mass) { return BaseMeasure::uniform(0.0, 1.0, mass); }

Functional square() { return {[](double y) { return y * y; }, {}, "square"}; }

struct PdCase {
  double alpha, theta;
  std::vector<LinearTerm> terms;
};

std::vector<PdCase> pd_cases() {
  return {
      {0.5, 0.5, {{Functional::indicator(0.0, 0.5), 1.0}}},
      {0.3, 1.0, {{Functional::identity(), 2.0}}},
      {0.4, 2.0, {{Functional::indicator(0.2, 0.6), 0.5}}},
      {0.5, 1.5, {{Functional::indicator(0.0, 0.3), 1.0}, {Functional::identity(), 0.5}}},
      {0.2, 0.3, {{square(), 3.0}}},
  };
}

// Plain-arithmetic closed form, integrating the piecewise-smooth integrand
// with Simpson on each smooth piece.
double pd_closed_oracle(double alpha, double theta, const std::vector<LinearTerm>& terms) {
  std::vector<double> pts = {0.0, 1.0};
  for (const auto& t : terms)
    for (double b : t.f.breakpoints)
      if (b > 0.0 && b < 1.0) pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double a = pts[i], b = pts[i + 1];
    s += oracle::simpson(
        [&](double y) {
          double x = std::clamp(y, a + 1e-13, b - 1e-13), g = 1.0;
          for (const auto& t : terms) g += t.z * t.f.fn(x);
          return std::pow(g, alpha);
        },
        a, b, 4000);
  }
  return std::pow(s, -theta / alpha);
}

MeasureSampler pd_sampler(double alpha, double theta, int j_max) {
  return [=](RngStream& r) { return pd_inverse_levy_sample(alpha, theta, unit(1.0), j_max, r); };
}

}  // namespace

TEST_CASE("transform at z = 0 is one") {
  auto gp = LevyIntensity::gamma_process(unit(2.0));
  std::vector<LinearTerm> zero = {{Functional::identity(), 0.0}, {Functional::indicator(0, 0.5), 0.0}};
  CHECK(stieltjes_via_mixing({{gp, 1.5, 0}, zero}) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(stieltjes_via_mixing({{gp, 0.5, 2}, zero, TransformOrder::ThetaPlusN}) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(pd_stieltjes_closed_form(0.5, 1.0, unit(1.0), zero) == doctest::Approx(1.0).epsilon(1e-14));
  auto mc = mc_transform_estimate(pd_sampler(0.5, 1.0, 20), zero, 1.0, 50, RngStream(3));
  CHECK(mc.mean == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("constant functional reduces to the scalar identity") {
  const double z = 0.8;
  std::vector<LinearTerm> one = {{Functional::constant(1.0), z}};
  std::vector<LevyIntensity> lis = {LevyIntensity::gamma_process(unit(2.0)), LevyIntensity::stable(0.4, unit(0.9)),
                                    LevyIntensity::generalized_gamma(0.5, 1.0, unit(1.3))};
  for (const auto& li : lis) {
    CHECK(stieltjes_via_mixing({{li, 1.5, 0}, one}) == doctest::Approx(std::pow(1 + z, -1.5)).epsilon(1e-8));
    CHECK(stieltjes_via_mixing({{li, 0.5, 2}, one, TransformOrder::ThetaPlusN}) ==
          doctest::Approx(std::pow(1 + z, -2.5)).epsilon(1e-8));
  }
  CHECK(pd_stieltjes_closed_form(0.3, 0.7, unit(1.0), one) == doctest::Approx(std::pow(1 + z, -0.7)).epsilon(1e-12));
}

TEST_CASE("Dirichlet process half-interval transform") {
  // gamma process with mass 2: P[0, 1/2] ~ Beta(1, 1), E[1/(1+U)] = log 2
  auto gp = LevyIntensity::gamma_process(unit(2.0));
  std::vector<LinearTerm> t = {{Functional::indicator(0.0, 0.5), 1.0}};
  double via = stieltjes_via_mixing({{gp, 1.0, 0}, t});
  CHECK(via == doctest::Approx(std::log(2.0)).epsilon(1e-8));
  // normalized gamma atoms: two cells carrying Gamma(1) masses
  MeasureSampler dp = [](RngStream& r) {
    AtomicMeasureDraw d;
    d.atoms = {{r.gamma(1.0), 0.25}, {r.gamma(1.0), 0.75}};
    return d;
  };
  auto mc = mc_transform_estimate(dp, t, 1.0, 10000, RngStream(5));
  CHECK(std::fabs(mc.mean - via) < 4 * mc.std_error);
  // Cifarelli-Regazzini: DP(c) with exponent c, here through the theta+n route
  auto gp3 = LevyIntensity::gamma_process(unit(3.0));
  std::vector<LinearTerm> lin = {{Functional::identity(), 1.5}};
  double want = std::exp(-3.0 * oracle::simpson([](double y) { return std::log1p(1.5 * y); }, 0.0, 1.0, 2000));
  CHECK(stieltjes_via_mixing({{gp3, 1.0, 2}, lin, TransformOrder::ThetaPlusN}) ==
        doctest::Approx(want).epsilon(1e-8));
  // the theta route needs E[T^{-theta}] < inf, so theta = mass is out of reach there
  CHECK_THROWS_AS(stieltjes_via_mixing({{gp3, 3.0, 0}, lin}), DivergenceError);
}

TEST_CASE("PD closed form") {
  std::vector<LinearTerm> t = {{Functional::indicator(0.0, 0.5), 1.0}};
  double want = 1.0 / (0.5 * std::sqrt(2.0) + 0.5);
  CHECK(pd_stieltjes_closed_form(0.5, 0.5, unit(1.0), t) == doctest::Approx(want).epsilon(1e-12));
  // base mass does not matter
  CHECK(pd_stieltjes_closed_form(0.5, 0.5, unit(4.0), t) == doctest::Approx(want).epsilon(1e-12));
  for (const auto& c : pd_cases())
    CHECK(pd_stieltjes_closed_form(c.alpha, c.theta, unit(1.0), c.terms) ==
          doctest::Approx(pd_closed_oracle(c.alpha, c.theta, c.terms)).epsilon(1e-10));
  CHECK_THROWS_AS(pd_stieltjes_closed_form(1.2, 0.5, unit(1.0), t), ConfigError);
  CHECK_THROWS_AS(pd_stieltjes_closed_form(0.5, -0.6, unit(1.0), t), ConfigError);
  CHECK_THROWS_AS(pd_stieltjes_closed_form(0.5, 1.0, unit(1.0), {{Functional::identity(), -1.0}}), ConfigError);
}

TEST_CASE("three-way agreement for PD") {
  int i = 0;
  for (const auto& c : pd_cases()) {
    CAPTURE(i);
    const double closed = pd_stieltjes_closed_form(c.alpha, c.theta, unit(1.0), c.terms);
    // stable law reweighted by T^{-theta} normalizes to PD(alpha, theta)
    const double via = stieltjes_via_mixing({{LevyIntensity::stable(c.alpha, unit(1.0)), c.theta, 0}, c.terms});
    const BaseMeasure H = unit(1.0);
    const auto mcc = mc_transform_estimate(pd_sampler(c.alpha, c.theta, 100), c.terms, c.theta, 4000,
                                           RngStream(900, i), &H);
    CHECK(std::fabs(closed - via) < 1e-5);
    CHECK(std::fabs(closed - mcc.mean) < std::max(1e-5, 4 * mcc.std_error));
    CHECK(std::fabs(via - mcc.mean) < std::max(1e-5, 4 * mcc.std_error));
    CHECK(mcc.count == 4000u);
    ++i;
  }
}

TEST_CASE("theta + n transform against PD Monte Carlo") {
  const double alpha = 0.5, theta = 0.5;
  std::vector<LinearTerm> t = {{Functional::identity(), 2.0}};
  for (int n : {1, 3}) {
    double via = stieltjes_via_mixing({{LevyIntensity::stable(alpha, unit(1.0)), theta, n}, t,
                                       TransformOrder::ThetaPlusN});
    BaseMeasure H = unit(1.0);
    auto mc = mc_transform_estimate(pd_sampler(alpha, theta, 100), t, theta + n, 4000, RngStream(77, n), &H);
    CHECK(std::fabs(via - mc.mean) < 4 * mc.std_error);
  }
  // theta = 0 through the unscaled mixture
  double via0 = stieltjes_via_mixing({{LevyIntensity::stable(alpha, unit(1.0)), 0.0, 2}, t,
                                      TransformOrder::ThetaPlusN});
  BaseMeasure H = unit(1.0);
  auto mc0 = mc_transform_estimate(pd_sampler(alpha, 0.0, 100), t, 2.0, 4000, RngStream(78), &H);
  CHECK(std::fabs(via0 - mc0.mean) < 4 * mc0.std_error);
}

TEST_CASE("transform decreases in z") {
  auto li = LevyIntensity::generalized_gamma(0.5, 1.0, unit(1.0));
  double prev = 1.0 + 1e-12, prev_c = prev;
  for (int k = 0; k <= 8; ++k) {
    const double z = 0.25 * k;
    std::vector<LinearTerm> t = {{Functional::indicator(0.2, 0.7), z}, {Functional::identity(), 0.5}};
    double v = stieltjes_via_mixing({{li, 1.2, 0}, t});
    double c = pd_stieltjes_closed_form(0.3, 1.0, unit(1.0), t);
    CHECK(v < prev);
    CHECK(c < prev_c);
    prev = v;
    prev_c = c;
  }
}

TEST_CASE("series in z matches PD functional moments") {
  // E[(1+zPf)^{-theta}] = 1 - theta z E[Pf] + theta(theta+1)/2 z^2 E[(Pf)^2] + O(z^3)
  const double alpha = 0.4, theta = 1.3, h = 0.01;
  const int m = 7;
  Functional f = Functional::identity();
  // fit a degree m-1 polynomial through z = 0, h, ..., (m-1)h
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) a[i][j] = std::pow(i * h, j);
    a[i][m] = pd_stieltjes_closed_form(alpha, theta, unit(1.0), {{f, i * h}});
  }
  for (int c = 0; c < m; ++c)
    for (int r = 0; r < m; ++r)
      if (r != c) {
        double q = a[r][c] / a[c][c];
        for (int k = c; k <= m; ++k) a[r][k] -= q * a[c][k];
      }
  const double c1 = a[1][m] / a[1][1], c2 = a[2][m] / a[2][2];
  auto spec = EppfSpec::two_param(alpha, theta);
  const double m1 = pd_functional_moments(spec, unit(1.0), {{f, 1}});
  const double m2 = pd_functional_moments(spec, unit(1.0), {{f, 2}});
  CHECK(std::fabs(-c1 / theta - m1) < 1e-5);
  CHECK(std::fabs(2.0 * c2 / (theta * (theta + 1.0)) - m2) < 1e-5);
}

TEST_CASE("transform preconditions") {
  auto gp = LevyIntensity::gamma_process(unit(1.0));
  std::vector<LinearTerm> t = {{Functional::identity(), 1.0}};
  CHECK_THROWS_AS(stieltjes_via_mixing({{gp, 0.0, 0}, t}), ConfigError);
  CHECK_THROWS_AS(stieltjes_via_mixing({{gp, 0.5, 0}, {{Functional::identity(), -1.0}}}), ConfigError);
  CHECK_THROWS_AS(stieltjes_via_mixing({{gp, 0.5, 9}, t, TransformOrder::ThetaPlusN}), SizeLimitError);
  CHECK_THROWS_AS(stieltjes_via_mixing({{gp, -2.0, 2}, t, TransformOrder::ThetaPlusN}), ConfigError);
  // E[T^{-theta}] infinite for the gamma process with theta >= mass
  CHECK_THROWS_AS(stieltjes_via_mixing({{gp, 1.5, 0}, t}), DivergenceError);
}
