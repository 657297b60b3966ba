#include "verify.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/special_functions/gamma.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>

#include "ppcalc/levycox.hpp"
#include "ppcalc/moments.hpp"
#include "ppcalc/ntr.hpp"
#include "ppcalc/parallel.hpp"
#include "ppcalc/partition.hpp"
#include "ppcalc/pk.hpp"
#include "ppcalc/scaled.hpp"
#include "ppcalc/stats.hpp"
#include "ppcalc/transforms.hpp"
#include "ppcalc/wcr.hpp"
#include "report.hpp"

namespace ppcalc::app {

namespace {

struct Ctx {
  std::uint64_t seed;
  int threads;
  RngStream root(int id) const { return RngStream(seed, static_cast<std::uint64_t>(id)); }
};

struct Result {
  bool pass = true;
  json details = json::object();
  std::string summary;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double rel_err(double got, double want) {
  double d = std::fabs(got - want);
  return d == 0.0 ? 0.0 : d / std::max(std::fabs(want), 1e-300);
}

BaseMeasure unit(double mass) { return BaseMeasure::uniform(0.0, 1.0, mass); }

// ---- independent closed forms --------------------------------------------

double rising(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x + i;
  return r;
}

// sum_k S(n,k) lambda^k with Stirling numbers of the second kind.
double poisson_raw_moment(double lambda, int n) {
  std::vector<std::vector<double>> S(n + 1, std::vector<double>(n + 1, 0.0));
  S[0][0] = 1.0;
  for (int i = 1; i <= n; ++i)
    for (int k = 1; k <= i; ++k) S[i][k] = k * S[i - 1][k] + S[i - 1][k - 1];
  double m = 0.0;
  for (int k = 0; k <= n; ++k) m += S[n][k] * std::pow(lambda, k);
  return m;
}

// Product of sequential seating probabilities along the assignment.
double prediction_rule_product(double alpha, double theta, std::span<const int> a) {
  std::vector<int> sizes;
  double p = 1.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (r == 0) {
      sizes.push_back(1);
      continue;
    }
    int b = a[r];
    if (b == static_cast<int>(sizes.size())) {
      p *= (theta + sizes.size() * alpha) / (theta + r);
      sizes.push_back(1);
    } else {
      p *= (sizes[b] - alpha) / (theta + r);
      ++sizes[b];
    }
  }
  return p;
}

// theta^k prod (e_j - 1)! / (theta)_n
double ewens_closed(double theta, std::span<const int> sizes) {
  int n = 0;
  double v = 1.0;
  for (int e : sizes) {
    n += e;
    v *= theta * std::tgamma(e);
  }
  return v / rising(theta, n);
}

double simpson(const std::function<double(double)>& f, double a, double b, int m) {
  double h = (b - a) / m;
  double s = f(a) + f(b);
  for (int i = 1; i < m; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// ---- 1: EPPF suite ---------------------------------------------------------

Result eppf_suite(const Ctx& ctx) {
  Result res;
  const std::vector<EppfSpec> specs = {EppfSpec::ewens(0.5),          EppfSpec::ewens(2.0),
                                       EppfSpec::two_param(0.25, 1.0), EppfSpec::two_param(0.5, 0.5),
                                       EppfSpec::two_param(0.5, -0.25), EppfSpec::two_param(0.75, 2.0)};
  const int B = 100000, chi_n = 5;
  double worst_sum = 0.0, worst_add = 0.0, worst_oracle = 0.0, min_p = 1.0;
  json settings = json::array();
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto& spec = specs[s];
    double sum_err = 0.0, add_err = 0.0, oracle_err = 0.0;
    for (int n = 1; n <= 8; ++n) {
      KahanSum total;
      for_each_partition(n, [&](std::span<const int> a, std::span<const int> sizes, int) {
        double v = std::exp(log_eppf(spec, sizes));
        total += v;
        oracle_err = std::max(oracle_err, rel_err(v, prediction_rule_product(spec.alpha(), spec.theta(), a)));
      });
      sum_err = std::max(sum_err, std::fabs(total.value() - 1.0));
      if (n < 8)
        for (const auto& p : enumerate_partitions(n)) {
          double acc = 0.0;
          for (int b = 0; b <= p.num_blocks(); ++b) acc += eppf_eval(spec, p.extended(b));
          add_err = std::max(add_err, std::fabs(acc - eppf_eval(spec, p)));
        }
    }
    // sampler frequencies at n = 5 (52 cells)
    auto parts = enumerate_partitions(chi_n);
    std::map<std::vector<int>, std::size_t> index;
    for (std::size_t i = 0; i < parts.size(); ++i)
      index[{parts[i].assignment().begin(), parts[i].assignment().end()}] = i;
    std::vector<int> cell(B);
    RngStream root = ctx.root(1).substream(s);
    parallel_for(B, ctx.threads, [&](std::size_t b) {
      RngStream r = root.substream(b);
      auto p = sample_crp(spec, chi_n, r);
      cell[b] = static_cast<int>(index.at({p.assignment().begin(), p.assignment().end()}));
    });
    std::vector<double> counts(parts.size(), 0.0), probs;
    for (int c : cell) counts[c] += 1.0;
    for (const auto& p : parts) probs.push_back(eppf_eval(spec, p));
    auto chi = stats::chi_square(counts, probs);
    worst_sum = std::max(worst_sum, sum_err);
    worst_add = std::max(worst_add, add_err);
    worst_oracle = std::max(worst_oracle, oracle_err);
    min_p = std::min(min_p, chi.p_value);
    settings.push_back({{"spec", spec.describe()},
                        {"max_sum_error", sum_err},
                        {"max_addition_error", add_err},
                        {"max_rel_error_vs_prediction_rule", oracle_err},
                        {"chi_square", {{"n", chi_n}, {"draws", B}, {"statistic", chi.statistic}, {"p_value", chi.p_value}}}});
  }
  res.pass = worst_sum <= 1e-10 && worst_add <= 1e-12 && worst_oracle <= 1e-12 && min_p > 0.001;
  res.details = {{"settings", settings}};
  res.summary = "sum err " + fmt("%.1e", worst_sum) + ", addition err " + fmt("%.1e", worst_add) +
                ", min chi-square p " + fmt("%.3g", min_p);
  return res;
}

// ---- 2: moment suite -------------------------------------------------------

Result moment_suite(const Ctx& ctx) {
  Result res;
  double worst = 0.0;
  json rows = json::array();
  auto record = [&](const std::string& what, double param, int n, double got, double want) {
    double e = rel_err(got, want);
    worst = std::max(worst, e);
    rows.push_back({{"case", what}, {"param", param}, {"n", n}, {"value", got}, {"oracle", want}, {"rel_error", e}});
  };
  for (double lam : {0.5, 1.0, 2.0}) {
    auto counts = LevyIntensity::compound_poisson(lam, 1.0, 1.0, unit(1.0)).with_jump_power(0.0);
    for (int n = 1; n <= 5; ++n) {
      record("poisson N[0,1]", lam, n, measure_moment(counts, {0.0, 1.0}, n, ctx.threads), poisson_raw_moment(lam, n));
      record("poisson N[0,0.5]", lam, n, measure_moment(counts, {0.0, 0.5}, n, ctx.threads),
             poisson_raw_moment(lam / 2, n));
    }
  }
  for (double theta : {0.5, 1.0, 2.5}) {
    auto gp = LevyIntensity::gamma_process(unit(theta));
    for (int n = 1; n <= 5; ++n) {
      record("gamma T", theta, n, total_mass_moment(gp, n, ctx.threads), rising(theta, n));
      record("gamma mu[0.2,0.6]", theta, n, measure_moment(gp, {0.2, 0.6}, n, ctx.threads), rising(0.4 * theta, n));
    }
  }
  res.pass = worst <= 1e-9;
  res.details = {{"cases", rows}, {"max_rel_error", worst}};
  res.summary = std::to_string(rows.size()) + " moments, max rel err " + fmt("%.1e", worst);
  return res;
}

// ---- 3: weighted Chinese restaurant identity -------------------------------

const std::vector<double> kItems = {0.1, 0.25, 0.4, 0.55, 0.7, 0.9};

double gauss_kernel(double x, double y) { return std::exp(-4.0 * (y - x) * (y - x)); }

double kernel_product(std::uint64_t mask, double y) {
  double p = 1.0;
  for (int i = 0; i < 64; ++i)
    if (mask >> i & 1u) p *= gauss_kernel(kItems[i], y);
  return p;
}

struct WeightModel {
  std::string name;
  BlockFunctionSeating seating;
  std::function<double(std::uint64_t)> direct;  // block integral by Simpson
};

std::vector<WeightModel> weight_models() {
  std::vector<WeightModel> out;
  auto levy_fn = [](const LevyIntensity& li) {
    return [li](std::uint64_t mask) {
      double k = kappa(li, std::popcount(mask), 0.5);
      return std::log(k * li.base().integrate([mask](double y) { return kernel_product(mask, y); }, 1e-13));
    };
  };
  auto direct = [](double mass, std::function<double(int)> kap) {
    return [mass, kap](std::uint64_t mask) {
      return kap(std::popcount(mask)) * mass * simpson([mask](double y) { return kernel_product(mask, y); }, 0.0, 1.0, 4000);
    };
  };
  auto gg = LevyIntensity::generalized_gamma(0.5, 1.0, unit(1.5));
  out.push_back({"generalized gamma, gaussian kernels", BlockFunctionSeating(levy_fn(gg)),
                 direct(1.5, [](int e) { return std::tgamma(e - 0.5) / std::tgamma(0.5); })});
  auto pois = LevyIntensity::compound_poisson(2.0, 1.0, 1.0, unit(1.0)).with_jump_power(0.0);
  out.push_back({"Poisson, gaussian kernels", BlockFunctionSeating(levy_fn(pois)), direct(1.0, [](int) { return 2.0; })});
  std::vector<double> w = {0.7, 1.8};
  std::vector<std::vector<double>> g = {{0.9, 0.2}, {0.5, 0.6}, {0.1, 1.3}, {0.8, 0.8}, {0.3, 1.1}, {1.2, 0.4}};
  out.push_back({"two-atom discrete", BlockFunctionSeating(discrete_block_function(w, g)), [w, g](std::uint64_t mask) {
                   double s = 0.0;
                   for (int m = 0; m < 2; ++m) {
                     double v = w[m];
                     for (int i = 0; i < 6; ++i)
                       if (mask >> i & 1u) v *= g[i][m];
                     s += v;
                   }
                   return s;
                 }});
  return out;
}

Result wcr_suite(const Ctx& ctx) {
  Result res;
  const int B = 100000;
  double worst = 0.0, worst_z = 0.0;
  json models = json::array();
  auto ms = weight_models();
  for (std::size_t mi = 0; mi < ms.size(); ++mi) {
    auto& m = ms[mi];
    double err = 0.0;
    KahanSum exact6;
    for (int n = 1; n <= 6; ++n)
      for (const auto& p : enumerate_partitions(n)) {
        double lhs = std::exp(wcr_log_importance(m.seating, p) + wcr_log_density(m.seating, p));
        double rhs = 1.0;
        for (auto mask : p.block_masks()) rhs *= m.direct(mask);
        err = std::max(err, rel_err(lhs, rhs));
        if (n == 6) exact6 += lhs;
      }
    auto draws = wcr_sample_many(m.seating, 6, B, ctx.root(3).substream(mi), ctx.threads);
    auto est = importance_estimate(draws, [](const WeightedDraw&) { return 1.0; });
    double z = std::fabs(est.unnormalized_mean - exact6.value()) / est.unnormalized_std_error;
    worst = std::max(worst, err);
    worst_z = std::max(worst_z, z);
    models.push_back({{"model", m.name},
                      {"max_rel_error_identity", err},
                      {"partition_sum_n6", exact6.value()},
                      {"unnormalized_mean", mc_value(est.unnormalized_mean, est.unnormalized_std_error, B)},
                      {"z", z}});
  }
  res.pass = worst <= 1e-9 && worst_z < 4.0;
  res.details = {{"models", models}};
  res.summary = "identity rel err " + fmt("%.1e", worst) + ", worst |z| " + fmt("%.2f", worst_z);
  return res;
}

}  // namespace

namespace {

// ---- 4: Levy-Cox cross-validation -----------------------------------------

Result levycox_suite(const Ctx& ctx) {
  Result res;
  const std::vector<double> events = {1.0, 1.7, 3.2};
  const std::vector<double> times = {0.5, 1.3, 2.2, 3.6, 4.7};
  const std::size_t B = 10000;
  const double eps = 1e-2;
  double worst_z = 0.0;
  json setups = json::array();
  int idx = 0;
  for (bool gamma : {true, false})
    for (bool uniform_kernel : {true, false}) {
      IntensityModel m;
      m.window = {0.0, 5.0};
      auto base = BaseMeasure::uniform(0.0, 5.0, 2.0);
      m.prior = gamma ? LevyIntensity::gamma_process(base) : LevyIntensity::generalized_gamma(0.5, 1.0, base);
      m.kernel = uniform_kernel ? Kernel::uniform_window(1.0) : Kernel::exponential(1.0);
      LevyCoxPosterior post(m, events);
      auto draws = post.fit(B, eps, ctx.root(4).substream(idx++), ctx.threads);
      std::size_t failed = 0;
      double tb = 0.0;
      for (const auto& d : draws) {
        failed += !d.error.empty();
        tb = std::max(tb, d.continuous.truncation_bound);
      }
      json pts = json::array();
      for (double t : times) {
        double exact = post.intensity_mean_given_x(t);
        auto est = weighted_posterior_mean(draws, [&](const PosteriorDraw& d) { return post.draw_intensity(d, t); });
        double z = std::fabs(est.value - exact) / est.std_error;
        worst_z = std::max(worst_z, z);
        pts.push_back({{"t", t}, {"exact", exact}, {"estimate", mc_value(est.value, est.std_error, est.draws, tb)}, {"z", z}});
      }
      if (failed) res.pass = false;
      setups.push_back({{"prior", gamma ? "gamma process" : "generalized gamma(0.5, 1)"},
                        {"kernel", m.kernel.describe()},
                        {"failed_draws", failed},
                        {"points", pts}});
    }
  res.pass = res.pass && worst_z < 4.0;
  res.details = {{"events", events}, {"setups", setups}};
  res.summary = "20 posterior means, worst |z| " + fmt("%.2f", worst_z);
  return res;
}

// ---- 5: scaling operations -------------------------------------------------

Result scaling_suite(const Ctx&) {
  Result res;
  double eppf_err = 0.0;
  json eppf = json::array();
  auto check = [&](const LevyIntensity& li, double theta, const std::string& label,
                   const std::function<double(const Partition&)>& want) {
    double e = 0.0;
    for (int n = 1; n <= 4; ++n)
      for (const auto& p : enumerate_partitions(n)) e = std::max(e, std::fabs(eppf_via_mixing(li, theta, p) - want(p)));
    eppf_err = std::max(eppf_err, e);
    eppf.push_back({{"case", label}, {"max_abs_error", e}});
  };
  for (auto [a, th] : {std::pair{0.5, 0.5}, std::pair{0.3, 1.0}, std::pair{0.7, -0.2}, std::pair{0.5, 0.0}}) {
    check(LevyIntensity::stable(a, unit(1.0)), th, "PD(" + fmt("%g", a) + ", " + fmt("%g", th) + ")",
          [a, th](const Partition& p) { return prediction_rule_product(a, th, p.assignment()); });
  }
  for (double th : {0.5, 1.0, 2.5})
    check(LevyIntensity::gamma_process(unit(th)), 0.0, "Ewens(" + fmt("%g", th) + ")",
          [th](const Partition& p) { return ewens_closed(th, p.block_sizes()); });

  double gid_err = 0.0;
  for (const auto& li : {LevyIntensity::gamma_process(unit(1.2)), LevyIntensity::generalized_gamma(0.5, 1.0, unit(0.8)),
                         LevyIntensity::generalized_gamma(0.25, 3.0, unit(2.0))})
    for (int n = 1; n <= 5; ++n)
      gid_err = std::max(gid_err, std::fabs(mixing_density({li, 0.0, n}, MixingKind::Joint).normalizer() - 1.0));

  // eta = alpha H makes L = V^alpha a Gamma(theta/alpha, 1) variable
  double cdf_err = 0.0;
  json laws = json::array();
  for (auto [a, th] : {std::pair{0.5, 1.0}, std::pair{0.3, 0.7}, std::pair{0.7, 2.0}}) {
    auto pi = mixing_density({LevyIntensity::stable(a, unit(a)), th, 0}, MixingKind::Scaled);
    double sup = 0.0;
    for (int i = 0; i < 200; ++i) {
      double l = std::exp(std::log(1e-6) + (std::log(60.0) - std::log(1e-6)) * i / 199.0);
      double v = std::pow(l, 1.0 / a);
      sup = std::max(sup, std::fabs(pi.cdf(v) - boost::math::gamma_p(th / a, l)));
    }
    cdf_err = std::max(cdf_err, sup);
    laws.push_back({{"alpha", a}, {"theta", th}, {"cdf_sup_error", sup}});
  }
  res.pass = eppf_err <= 1e-6 && gid_err <= 1e-7 && cdf_err <= 1e-6;
  res.details = {{"eppf", eppf}, {"gamma_identity_max_error", gid_err}, {"scaled_gamma_laws", laws}};
  res.summary = "EPPF err " + fmt("%.1e", eppf_err) + ", gamma identity err " + fmt("%.1e", gid_err) +
                ", CDF sup err " + fmt("%.1e", cdf_err);
  return res;
}

// ---- 6: PD sampler triangle ------------------------------------------------

struct PdStats {
  double top = 0.0;
  double left = 0.0;  // P[0, 1/2]
};

Result pd_triangle(const Ctx& ctx) {
  Result res;
  const double alpha = 0.5, theta = 1.0;
  const int B = 5000, j_max = 2000, n_post = 3;
  const BaseMeasure H = unit(1.0);
  const double hA = 0.5, eps = 1e-2;
  std::vector<PdStats> inv(B), mix(B), post(B);
  std::vector<double> scaled_total(B);
  RngStream root = ctx.root(6);
  const RngStream r_inv = root.substream(0), r_mix = root.substream(1), r_post = root.substream(2),
                  r_gamma = root.substream(3);
  double tb_inv = 0.0, tb_mix = 0.0, tb_post = 0.0;
  std::vector<double> tbs(3 * B);
  parallel_for(B, ctx.threads, [&](std::size_t b) {
    {
      RngStream r = r_inv.substream(b);
      auto d = pd_inverse_levy_sample(alpha, theta, H, j_max, r);
      const double keep = 1.0 - d.truncation_bound;
      PdStats s;
      for (const auto& a : d.atoms) {
        s.top = std::max(s.top, a.weight * keep);
        if (a.location <= hA) s.left += a.weight * keep;
      }
      s.left += d.truncation_bound * hA;
      inv[b] = s;
      tbs[3 * b] = d.truncation_bound;
    }
    {
      RngStream r = r_mix.substream(b);
      auto d = pd_mixture_sample(alpha, theta, H, 1, eps, r);
      const double tot = d.measure.compensated_total();
      PdStats s;
      for (const auto& a : d.measure.atoms) {
        s.top = std::max(s.top, a.weight / tot);
        if (a.location <= hA) s.left += a.weight / tot;
      }
      s.left += d.measure.truncation_bound * hA / tot;
      mix[b] = s;
      tbs[3 * b + 1] = d.measure.truncation_bound / tot;
    }
    {
      // without observations the mixture is the scaled stable law itself
      RngStream r = r_gamma.substream(b);
      auto d = pd_mixture_sample(alpha, theta, H, 0, eps, r);
      scaled_total[b] = std::pow(d.L, 1.0 / alpha) * d.continuous_total;
    }
    {
      RngStream r = r_post.substream(b);
      auto p = sample_crp(EppfSpec::two_param(alpha, theta), n_post, r);
      std::vector<double> ys;
      for (int j = 0; j < p.num_blocks(); ++j) ys.push_back(H.sample(r));
      auto d = pd_posterior_measure(alpha, theta, ys, p, H, j_max, r);
      const std::size_t n_cont = d.measure.atoms.size() - ys.size();
      const double keep = d.p_n > 0.0 ? 1.0 - d.measure.truncation_bound / d.p_n : 1.0;
      PdStats s;
      for (std::size_t i = 0; i < d.measure.atoms.size(); ++i) {
        double w = d.measure.atoms[i].weight * (i < n_cont ? keep : 1.0);
        s.top = std::max(s.top, w);
        if (d.measure.atoms[i].location <= hA) s.left += w;
      }
      s.left += d.measure.truncation_bound * hA;
      post[b] = s;
      tbs[3 * b + 2] = d.measure.truncation_bound;
    }
  });
  for (int b = 0; b < B; ++b) {
    tb_inv = std::max(tb_inv, tbs[3 * b]);
    tb_mix = std::max(tb_mix, tbs[3 * b + 1]);
    tb_post = std::max(tb_post, tbs[3 * b + 2]);
  }
  auto col = [](const std::vector<PdStats>& v, bool top) {
    std::vector<double> out;
    for (const auto& s : v) out.push_back(top ? s.top : s.left);
    return out;
  };
  json pairs = json::array();
  double min_p = 1.0;
  const std::vector<std::pair<std::string, const std::vector<PdStats>*>> cons = {
      {"inverse-levy", &inv}, {"mixture", &mix}, {"posterior", &post}};
  for (std::size_t i = 0; i < cons.size(); ++i)
    for (std::size_t j = i + 1; j < cons.size(); ++j)
      for (bool top : {true, false}) {
        auto ks = stats::ks_two_sample(col(*cons[i].second, top), col(*cons[j].second, top));
        min_p = std::min(min_p, ks.p_value);
        pairs.push_back({{"a", cons[i].first},
                         {"b", cons[j].first},
                         {"statistic", top ? "top weight" : "mass of [0, 1/2]"},
                         {"ks", ks.statistic},
                         {"p_value", ks.p_value}});
      }
  auto gam = stats::ks_one_sample(scaled_total, [theta](double x) { return boost::math::gamma_p(theta, x); });
  res.pass = min_p > 0.001 && gam.p_value > 0.001;
  res.details = {{"alpha", alpha},
                 {"theta", theta},
                 {"draws", B},
                 {"atoms_per_normalized_draw", j_max},
                 {"mixture_eps", eps},
                 {"max_truncation_share", {{"inverse-levy", tb_inv}, {"mixture", tb_mix}, {"posterior", tb_post}}},
                 {"pairs", pairs},
                 {"scaled_total_gamma", {{"ks", gam.statistic}, {"p_value", gam.p_value}}}};
  res.summary = "min pairwise KS p " + fmt("%.3g", min_p) + ", Gamma(theta) KS p " + fmt("%.3g", gam.p_value);
  return res;
}

// ---- 7: Markov-Krein triangle ----------------------------------------------

Result markov_krein(const Ctx& ctx) {
  Result res;
  struct Case {
    double alpha, theta;
    std::vector<LinearTerm> terms;
  };
  Functional square{[](double y) { return y * y; }, {}, "square"};
  const std::vector<Case> cases = {
      {0.5, 0.5, {{Functional::indicator(0.0, 0.5), 1.0}}},
      {0.3, 1.0, {{Functional::identity(), 2.0}}},
      {0.4, 2.0, {{Functional::indicator(0.2, 0.6), 0.5}}},
      {0.5, 1.5, {{Functional::indicator(0.0, 0.3), 1.0}, {Functional::identity(), 0.5}}},
      {0.2, 0.3, {{square, 3.0}}},
  };
  const int B = 4000, j_max = 100;
  const BaseMeasure H = unit(1.0);
  json rows = json::array();
  double worst = 0.0;  // |diff| / allowed
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    double closed = pd_stieltjes_closed_form(c.alpha, c.theta, H, c.terms);
    double via = stieltjes_via_mixing({{LevyIntensity::stable(c.alpha, unit(1.0)), c.theta, 0}, c.terms});
    MeasureSampler sampler = [&c, &H](RngStream& r) { return pd_inverse_levy_sample(c.alpha, c.theta, H, j_max, r); };
    auto mc = mc_transform_estimate(sampler, c.terms, c.theta, B, ctx.root(7).substream(i), &H, ctx.threads);
    const double tol_mc = std::max(1e-5, 4 * mc.std_error);
    double r1 = std::fabs(closed - via) / 1e-5;
    double r2 = std::fabs(closed - mc.mean) / tol_mc;
    double r3 = std::fabs(via - mc.mean) / tol_mc;
    worst = std::max({worst, r1, r2, r3});
    rows.push_back({{"alpha", c.alpha},
                    {"theta", c.theta},
                    {"closed_form", closed},
                    {"mixing", via},
                    {"monte_carlo", mc_value(mc.mean, mc.std_error, mc.count)},
                    {"ratio_to_tolerance", {r1, r2, r3}}});
  }
  res.pass = worst < 1.0;
  res.details = {{"cases", rows}};
  res.summary = "5 cases, worst difference / tolerance " + fmt("%.3f", worst);
  return res;
}

// ---- 8: NTR / Dirichlet conjugacy ------------------------------------------

Result ntr_suite(const Ctx& ctx) {
  Result res;
  const double theta = 2.0;
  auto F0 = BaseMeasure::exponential(1.0, 1.0);
  auto prior = HazardPrior::dirichlet(theta, F0);
  const std::vector<double> times = {0.35, 0.8, 0.8, 1.4, 2.6};
  auto ds = SurvivalDataset::complete(times);
  double conj = 0.0;
  json conj_rows = json::array();
  for (int i = 1; i <= 20; ++i) {
    double t = 0.16 * i;
    int above = 0;
    for (double x : times) above += x > t;
    double want = (theta * std::exp(-t) + above) / (theta + times.size());
    double got = posterior_survival_mean(prior, ds, t);
    conj = std::max(conj, std::fabs(got - want));
    conj_rows.push_back({{"t", t}, {"posterior_mean", got}, {"oracle", want}});
  }

  SurvivalDataset cens({{0.5, true, {}}, {0.9, false, {}}, {1.2, true, {}}, {1.2, true, {}}, {2.0, false, {}}, {2.7, true, {}}});
  auto post = posterior_hazard(prior, cens);
  const std::vector<double> grid = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0};
  const int B = 2000;
  const double eps = 1e-5;
  std::vector<std::vector<double>> xs(grid.size(), std::vector<double>(B));
  std::vector<double> tbs(B);
  RngStream root = ctx.root(8);
  parallel_for(B, ctx.threads, [&](std::size_t b) {
    RngStream r = root.substream(b);
    auto path = sample_posterior_survival(post, grid, eps, r);
    tbs[b] = path.truncation_bound;
    for (std::size_t g = 0; g < grid.size(); ++g) xs[g][b] = path.survival[g];
  });
  double tb = *std::max_element(tbs.begin(), tbs.end());
  double worst_z = 0.0;
  json mc_rows = json::array();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto est = stats::mean_and_stderr(xs[g]);
    double exact = posterior_survival_mean(post, grid[g]);
    // the truncated hazard moves S(t) by at most its bound
    double z = std::max(0.0, std::fabs(est.mean - exact) - tb) / est.std_error;
    worst_z = std::max(worst_z, z);
    mc_rows.push_back({{"t", grid[g]}, {"analytic", exact}, {"monte_carlo", mc_value(est.mean, est.std_error, B, tb)}, {"z", z}});
  }

  bool exact_eq = true;
  double oracle_err = 0.0;
  for (double th : {0.7, 1.3, 3.0})
    for (int n = 1; n <= 5; ++n)
      for (const auto& p : enumerate_partitions(n)) {
        double v = beta_stacy_eppf(th, F0, [](double) { return 0.0; }, p);
        exact_eq = exact_eq && v == eppf_eval(EppfSpec::ewens(th), p);
        oracle_err = std::max(oracle_err, rel_err(v, ewens_closed(th, p.block_sizes())));
      }
  res.pass = conj <= 1e-6 && worst_z < 4.0 && exact_eq && oracle_err <= 1e-13;
  res.details = {{"conjugacy", {{"max_abs_error", conj}, {"points", conj_rows}}},
                 {"censored_paths", {{"points", mc_rows}, {"eps", eps}}},
                 {"beta_stacy_zero_shift", {{"bitwise_equal_to_ewens", exact_eq}, {"max_rel_error_vs_closed_form", oracle_err}}}};
  res.summary = "conjugacy err " + fmt("%.1e", conj) + ", censored MC worst |z| " + fmt("%.2f", worst_z) +
                ", Beta-Stacy(0) == Ewens " + (exact_eq ? "yes" : "no");
  return res;
}

// ---- 9: PK quadrature ------------------------------------------------------

Result pk_suite(const Ctx&) {
  Result res;
  double gam = 0.0, ig = 0.0;
  json rows = json::array();
  for (double th : {0.5, 1.0, 2.5}) {
    PKSpec spec{LevyIntensity::gamma_process(unit(th)), {}, {}};
    for (int n = 1; n <= 3; ++n)
      for (const auto& p : enumerate_partitions(n)) {
        double v = pk_eppf(spec, p), want = ewens_closed(th, p.block_sizes());
        gam = std::max(gam, rel_err(v, want));
        rows.push_back({{"case", "gamma mass " + fmt("%g", th)}, {"partition", p.to_string()}, {"pk", v}, {"reference", want}});
      }
  }
  auto li = LevyIntensity::generalized_gamma(0.5, 1.0, unit(1.0));
  PKSpec spec{li, {}, {}};
  for (int n = 1; n <= 3; ++n)
    for (const auto& p : enumerate_partitions(n)) {
      double v = pk_eppf(spec, p), want = eppf_via_mixing(li, 0.0, p);
      ig = std::max(ig, rel_err(v, want));
      rows.push_back({{"case", "inverse gaussian"}, {"partition", p.to_string()}, {"pk", v}, {"reference", want}});
    }
  res.pass = gam <= 1e-5 && ig <= 1e-5;
  res.details = {{"rows", rows}, {"gamma_max_rel_error", gam}, {"inverse_gaussian_max_rel_error", ig}};
  res.summary = "gamma vs Ewens rel err " + fmt("%.1e", gam) + ", inverse Gaussian vs mixing rel err " + fmt("%.1e", ig);
  return res;
}

struct Entry {
  int id;
  const char* name;
  double budget;
  Result (*fn)(const Ctx&);
};

const Entry kEntries[] = {
    {1, "EPPF suite", 60, eppf_suite},
    {2, "partition-Fubini moments", 10, moment_suite},
    {3, "WCR identity", 120, wcr_suite},
    {4, "Levy-Cox cross-validation", 300, levycox_suite},
    {5, "scaling operations", 120, scaling_suite},
    {6, "PD sampler triangle", 300, pd_triangle},
    {7, "Markov-Krein triangle", 120, markov_krein},
    {8, "NTR/Dirichlet conjugacy", 180, ntr_suite},
    {9, "PK quadrature", 120, pk_suite},
};

}  // namespace

std::vector<CriterionOutcome> run_criteria(const SuiteOptions& opts) {
  std::vector<CriterionOutcome> out;
  Ctx ctx{opts.seed, std::max(1, opts.threads)};
  for (const auto& e : kEntries) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), e.id) == opts.only.end()) continue;
    CriterionOutcome o;
    o.id = e.id;
    o.name = e.name;
    o.budget_seconds = e.budget;
    auto t0 = std::chrono::steady_clock::now();
    try {
      Result r = e.fn(ctx);
      o.numeric_pass = r.pass;
      o.details = std::move(r.details);
      o.summary = std::move(r.summary);
    } catch (const std::exception& ex) {
      o.numeric_pass = false;
      o.summary = std::string("error: ") + ex.what();
      o.details = {{"error", ex.what()}};
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(o));
  }
  return out;
}

json criteria_results(const std::vector<CriterionOutcome>& outcomes) {
  json arr = json::array();
  for (const auto& o : outcomes)
    arr.push_back({{"id", o.id},
                   {"name", o.name},
                   {"tolerances_met", o.numeric_pass},
                   {"runtime_budget_seconds", o.budget_seconds},
                   {"summary", o.summary},
                   {"details", o.details}});
  return arr;
}

json criteria_timings(const std::vector<CriterionOutcome>& outcomes) {
  json arr = json::array();
  for (const auto& o : outcomes)
    arr.push_back({{"id", o.id}, {"seconds", o.seconds}, {"within_budget", o.within_budget()}, {"passed", o.passed()}});
  return arr;
}

std::string outcome_line(int id, const std::string& name, bool passed, const std::string& summary) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-28s ", passed ? "PASS" : "FAIL", id, name.c_str());
  return head + summary;
}

}  // namespace ppcalc::app
