#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "config.hpp"
#include "ppcalc/errors.hpp"
#include "ppcalc/levycox.hpp"
#include "ppcalc/moments.hpp"
#include "ppcalc/ntr.hpp"
#include "ppcalc/parallel.hpp"
#include "ppcalc/partition.hpp"
#include "ppcalc/pk.hpp"
#include "ppcalc/scaled.hpp"
#include "ppcalc/stats.hpp"
#include "ppcalc/transforms.hpp"
#include "report.hpp"
#include "verify.hpp"

namespace fs = std::filesystem;

namespace ppcalc::app {

namespace {

const std::vector<std::string> kCommands = {"eppf",         "sample-partition", "moments", "fit-intensity",
                                            "fit-survival", "transform",        "pk",      "verify"};

// Keys that steer the run but cannot change any number in the report.
const std::set<std::string> kRunOnlyKeys = {"threads", "out", "config", "command"};

struct Run {
  std::string command;
  json cfg;  // merged config: file, then flags
  std::uint64_t seed = 0;
  int threads = 1;
  fs::path out;
  json report;
  std::vector<std::string> lines;  // printed to stdout
};

[[noreturn]] void bad(const Run& run, const std::string& msg) { throw ConfigError("cli", run.command, msg); }

void set_path(json& j, const std::string& dotted, json value) {
  json* cur = &j;
  std::size_t start = 0;
  for (;;) {
    auto dot = dotted.find('.', start);
    std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*cur)[part] = std::move(value);
      return;
    }
    if (!cur->contains(part) || !(*cur)[part].is_object()) (*cur)[part] = json::object();
    cur = &(*cur)[part];
    start = dot + 1;
  }
}

json flag_value(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size()) {
      if (v == std::floor(v) && std::fabs(v) < 9e15 && text.find_first_of(".eE") == std::string::npos)
        return static_cast<std::int64_t>(v);
      return v;
    }
  } catch (const std::exception&) {
  }
  return text;
}

const json& model_of(const Run& run) {
  static const json empty = json::object();
  auto it = run.cfg.find("model");
  return it != run.cfg.end() && it->is_object() ? *it : empty;
}

std::string partition_sizes(const Partition& p) {
  std::string s;
  for (int e : p.block_sizes()) s += (s.empty() ? "" : " ") + std::to_string(e);
  return s;
}

EppfSpec eppf_spec(const Run& run) {
  const json& m = model_of(run);
  std::string fam = get_string(m, "family", "pd");
  if (fam == "ewens") return EppfSpec::ewens(require_double(m, "theta"));
  if (fam == "pd") return EppfSpec::two_param(get_double(m, "alpha", 0.0), require_double(m, "theta"));
  bad(run, "family must be pd or ewens here, got '" + fam + "'");
}

BaseMeasure base_of(const Run& run, const std::string& fallback, double mass) {
  json spec = run.cfg.contains("base") && !run.cfg["base"].is_null() ? run.cfg["base"] : json(fallback);
  return make_base(spec, mass);
}

std::vector<double> default_grid(double lo, double hi, int count) {
  std::vector<double> g;
  for (int i = 1; i <= count; ++i) g.push_back(lo + (hi - lo) * i / count);
  return g;
}

std::vector<double> grid_of(const Run& run, double lo, double hi) {
  auto g = get_doubles(run.cfg, "grid");
  if (g.empty()) g = default_grid(lo, hi, get_int(run.cfg, "grid_points", 20));
  std::sort(g.begin(), g.end());
  return g;
}

std::size_t draws_of(const Run& run, int fallback) {
  int d = get_int(run.cfg, "draws", fallback);
  if (d < 0) bad(run, "draws must be nonnegative");
  return static_cast<std::size_t>(d);
}

void add_file(Run& run, const std::string& name, const CsvWriter& csv) {
  csv.save(run.out / name);
  run.report["files"].push_back(name);
}

// ---- eppf -----------------------------------------------------------------

void cmd_eppf(Run& run) {
  const json& m = model_of(run);
  const int n = get_int(run.cfg, "n", 0);
  std::string fam = get_string(m, "family", "pd");
  CsvWriter csv({"partition", "blocks", "block_sizes", "probability"});
  KahanSum total;
  std::vector<double> by_k(n + 1, 0.0);
  auto emit = [&](const Partition& p, double prob) {
    csv.row({p.to_string(), std::to_string(p.num_blocks()), partition_sizes(p), CsvWriter::num(prob)});
    total += prob;
    by_k[p.num_blocks()] += prob;
  };
  if (fam == "pd" || fam == "ewens") {
    if (n < 1 || n > 10) bad(run, "n must be in 1..10 for the table");
    auto spec = eppf_spec(run);
    for (const auto& p : enumerate_partitions(n)) emit(p, eppf_eval(spec, p));
    run.report["results"]["law"] = spec.describe();
  } else {
    auto li = make_intensity(m, base_of(run, "uniform 0 1", get_double(m, "mass", 1.0)));
    for (const auto& [p, prob] : partition_law(li, n)) emit(p, prob);
    run.report["results"]["law"] = "partition induced by " + li.family_name();
  }
  add_file(run, "eppf.csv", csv);
  CsvWriter kcsv({"blocks", "probability"});
  json kdist = json::array();
  double mean_k = 0.0;
  for (int k = 1; k <= n; ++k) {
    kcsv.row({std::to_string(k), CsvWriter::num(by_k[k])});
    kdist.push_back(by_k[k]);
    mean_k += k * by_k[k];
  }
  add_file(run, "eppf_blocks.csv", kcsv);
  auto& r = run.report["results"];
  r["n"] = n;
  r["partitions"] = csv.rows();
  r["sum"] = total.value();
  r["sum_error"] = std::fabs(total.value() - 1.0);
  r["expected_blocks"] = mean_k;
  r["block_count_distribution"] = kdist;
  run.lines.push_back(std::to_string(csv.rows()) + " partitions, probabilities sum to " + CsvWriter::num(total.value()));
}

// ---- sample-partition ---------------------------------------------------

void cmd_sample_partition(Run& run) {
  const int n = get_int(run.cfg, "n", 0);
  if (n < 1 || n > 64) bad(run, "n must be in 1..64");
  auto spec = eppf_spec(run);
  const std::size_t B = draws_of(run, 10000);
  if (B < 2) bad(run, "need at least two draws");
  std::vector<Partition> draws(B);
  RngStream root(run.seed);
  parallel_for(B, run.threads, [&](std::size_t b) {
    RngStream r = root.substream(b);
    draws[b] = sample_crp(spec, n, r);
  });
  CsvWriter csv({"draw", "partition", "blocks"});
  std::vector<double> ks;
  std::vector<double> counts(n + 1, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    csv.row({std::to_string(b), draws[b].to_string(), std::to_string(draws[b].num_blocks())});
    ks.push_back(draws[b].num_blocks());
    counts[draws[b].num_blocks()] += 1.0;
  }
  add_file(run, "partitions.csv", csv);
  // E[K_{m+1}] = E[K_m] + (theta + alpha E[K_m]) / (theta + m)
  double ek = 1.0;
  for (int m = 1; m < n; ++m) ek += (spec.theta() + spec.alpha() * ek) / (spec.theta() + m);
  CsvWriter hist({"blocks", "count", "frequency"});
  for (int k = 1; k <= n; ++k)
    hist.row({std::to_string(k), CsvWriter::num(static_cast<long long>(counts[k])), CsvWriter::num(counts[k] / B)});
  add_file(run, "block_histogram.csv", hist);
  auto est = stats::mean_and_stderr(ks);
  auto& r = run.report["results"];
  r["law"] = spec.describe();
  r["n"] = n;
  r["mean_blocks"] = mc_value(est.mean, est.std_error, B);
  r["expected_blocks_exact"] = ek;
  run.lines.push_back("mean blocks " + CsvWriter::num(est.mean) + " +- " + CsvWriter::num(est.std_error) +
                      " (exact " + CsvWriter::num(ek) + ")");
}

// ---- moments ------------------------------------------------------------

void cmd_moments(Run& run) {
  const json& m = model_of(run);
  auto base = base_of(run, "uniform 0 1", get_double(m, "mass", 1.0));
  auto li = make_intensity(m, base);
  auto region = get_doubles(run.cfg, "region");
  if (region.empty()) region = {base.support().lo, base.support().hi};
  if (region.size() != 2 || !(region[0] < region[1])) bad(run, "region must be two increasing numbers");
  const int order = get_int(run.cfg, "order", 4);
  if (order < 1 || order > kMaxMomentOrder) bad(run, "order must be in 1.." + std::to_string(kMaxMomentOrder));
  std::vector<double> exact;
  for (int k = 1; k <= order; ++k) exact.push_back(measure_moment(li, {region[0], region[1]}, k, run.threads));

  const std::size_t B = draws_of(run, 0);
  const double eps = get_double(run.cfg, "eps", 1e-3);
  json mc = json::array();
  std::vector<std::vector<double>> pw(order, std::vector<double>(B));
  double tb = 0.0;
  if (B > 0) {
    if (!li.homogeneous() || !base.finite()) bad(run, "Monte Carlo check needs a homogeneous intensity with finite base");
    RngStream root(run.seed);
    std::vector<double> tbs(B);
    InverseLevySampler sampler(li);
    parallel_for(B, run.threads, [&](std::size_t b) {
      RngStream r = root.substream(b);
      auto d = sampler.draw(base.total_mass(), eps, r);
      double x = 0.0;
      for (const auto& a : d.atoms)
        if (a.location >= region[0] && a.location <= region[1]) x += a.weight;
      // expected truncated mass, spread by the base measure
      x += d.truncation_bound * base.mass_between(region[0], region[1]) / base.total_mass();
      tbs[b] = d.truncation_bound;
      double p = 1.0;
      for (int k = 0; k < order; ++k) pw[k][b] = p *= x;
    });
    tb = *std::max_element(tbs.begin(), tbs.end());
  }
  CsvWriter csv(B > 0 ? std::vector<std::string>{"order", "moment", "mc_mean", "mc_std_error"}
                      : std::vector<std::string>{"order", "moment"});
  for (int k = 0; k < order; ++k) {
    std::vector<std::string> row = {std::to_string(k + 1), CsvWriter::num(exact[k])};
    if (B > 0) {
      auto est = stats::mean_and_stderr(pw[k]);
      row.push_back(CsvWriter::num(est.mean));
      row.push_back(CsvWriter::num(est.std_error));
      mc.push_back(mc_value(est.mean, est.std_error, B, tb));
    }
    csv.row(row);
  }
  add_file(run, "moments.csv", csv);
  auto& r = run.report["results"];
  r["intensity"] = li.family_name();
  r["region"] = region;
  r["moments"] = exact;
  if (B > 0) r["monte_carlo"] = mc;
  run.lines.push_back("E[mu(B)^k], k = 1.." + std::to_string(order) + " written to moments.csv");
}

// ---- fit-intensity -------------------------------------------------------

Kernel kernel_of(const Run& run) {
  auto text = get_string(run.cfg, "kernel", "uniform 1");
  std::string name = text.substr(0, text.find_first_of(" :,"));
  auto rest = text.size() > name.size() ? parse_number_list(text.substr(name.size())) : std::vector<double>{};
  if (name == "uniform" && rest.size() == 1) return Kernel::uniform_window(rest[0]);
  if (name == "exponential" && rest.size() == 1) return Kernel::exponential(rest[0]);
  if (name == "gaussian" && rest.size() == 1) return Kernel::gaussian(rest[0]);
  bad(run, "kernel must be 'uniform width', 'exponential rate' or 'gaussian sd'");
}

void cmd_fit_intensity(Run& run) {
  const json& m = model_of(run);
  std::string data = get_string(run.cfg, "data", "");
  if (data.empty()) bad(run, "--data is required");
  auto events = read_events_csv(data);
  std::sort(events.begin(), events.end());
  auto window = get_doubles(run.cfg, "window");
  if (window.empty()) window = {0.0, std::ceil(events.back())};
  if (window.size() != 2 || !(window[0] < window[1])) bad(run, "window must be two increasing numbers");
  for (double x : events)
    if (x < window[0] || x > window[1]) bad(run, "events must lie in the observation window");
  IntensityModel model;
  model.window = {window[0], window[1]};
  model.kernel = kernel_of(run);
  json wspec = {{"type", "uniform"}, {"a", window[0]}, {"b", window[1]}};
  auto base = make_base(run.cfg.contains("base") ? run.cfg["base"] : wspec, get_double(m, "mass", 1.0));
  model.prior = make_intensity(m, base);
  LevyCoxPosterior post(model, events);
  auto grid = grid_of(run, window[0], window[1]);
  const bool exact = post.size() <= 10;
  const std::size_t B = draws_of(run, 0);
  const double eps = get_double(run.cfg, "eps", 1e-3);
  std::vector<PosteriorDraw> draws;
  double tb = 0.0;
  std::size_t failed = 0;
  if (B > 0) {
    draws = post.fit(B, eps, RngStream(run.seed), run.threads);
    for (const auto& d : draws) {
      tb = std::max(tb, d.continuous.truncation_bound);
      failed += !d.error.empty();
    }
  }
  std::vector<std::string> head = {"t", "prior_mean"};
  if (exact) head.push_back("posterior_mean");
  if (B > 0) {
    head.push_back("mc_mean");
    head.push_back("mc_std_error");
  }
  CsvWriter csv(head);
  json curve = json::array();
  for (double t : grid) {
    json pt = {{"t", t}, {"prior_mean", post.prior_intensity_mean(t)}};
    std::vector<std::string> row = {CsvWriter::num(t), CsvWriter::num(post.prior_intensity_mean(t))};
    if (exact) {
      double v = post.intensity_mean_given_x(t);
      pt["posterior_mean"] = v;
      row.push_back(CsvWriter::num(v));
    }
    if (B > 0) {
      auto est = weighted_posterior_mean(draws, [&](const PosteriorDraw& d) { return post.draw_intensity(d, t); });
      pt["monte_carlo"] = mc_value(est.value, est.std_error, est.draws, tb);
      row.push_back(CsvWriter::num(est.value));
      row.push_back(CsvWriter::num(est.std_error));
    }
    curve.push_back(pt);
    csv.row(row);
  }
  add_file(run, "intensity.csv", csv);
  auto& r = run.report["results"];
  r["events"] = events.size();
  r["kernel"] = model.kernel.describe();
  r["prior"] = model.prior.family_name();
  r["log_marginal_likelihood"] = exact ? json(post.log_marginal_likelihood()) : json(nullptr);
  r["curve"] = curve;
  if (B > 0) r["failed_draws"] = failed;
  run.lines.push_back("posterior intensity on " + std::to_string(grid.size()) + " grid points written to intensity.csv");
}

// ---- fit-survival --------------------------------------------------------

// Cumulative hazard measure of a distribution F on (0, inf).
BaseMeasure hazard_of(const BaseMeasure& F) {
  double mass = F.total_mass();
  auto S = [F, mass](double s) { return std::max(0.0, 1.0 - F.cumulative(s) / mass); };
  return BaseMeasure::custom(
      "hazard of " + F.name(), {F.support().lo, kInf},
      [F, S, mass](double s) {
        double sv = S(s);
        return sv > 0.0 ? F.density(s) / mass / sv : 0.0;
      },
      [S](double s) {
        double sv = S(s);
        return sv > 0.0 ? -std::log(sv) : kInf;
      },
      [F, mass](double x) { return F.quantile(-std::expm1(-x) * mass); }, F.breakpoints());
}

void cmd_fit_survival(Run& run) {
  const json& m = model_of(run);
  std::string data = get_string(run.cfg, "data", "");
  if (data.empty()) bad(run, "--data is required");
  auto ds = read_survival_csv(data);
  auto F0 = base_of(run, "exponential 1", 1.0);
  if (F0.support().lo < 0.0) bad(run, "survival base must live on [0, inf)");
  const bool dirichlet = get_bool(m, "dirichlet", false);
  std::string prior_name = get_string(m, "prior", "beta");
  if (prior_name != "beta") bad(run, "prior must be beta");
  HazardPrior prior = dirichlet ? HazardPrior::dirichlet(require_double(m, "theta"), F0)
                     : m.contains("beta") ? HazardPrior::beta_stacy(require_double(m, "theta"), F0, get_double(m, "beta", 0.0))
                                          : HazardPrior::beta(get_double(m, "c", 1.0), hazard_of(F0));
  auto post = posterior_hazard(prior, ds);
  double tmax = 0.0;
  for (const auto& rec : ds.records()) tmax = std::max(tmax, rec.time);
  auto grid = grid_of(run, 0.0, 1.25 * tmax);
  if (grid.front() <= 0.0) bad(run, "grid points must be positive");
  const std::size_t B = draws_of(run, 0);
  const double eps = get_double(run.cfg, "eps", 1e-4);
  std::vector<std::vector<double>> paths(grid.size(), std::vector<double>(B));
  double tb = 0.0;
  if (B > 0) {
    RngStream root(run.seed);
    std::vector<double> tbs(B);
    parallel_for(B, run.threads, [&](std::size_t b) {
      RngStream r = root.substream(b);
      auto path = sample_posterior_survival(post, grid, eps, r);
      tbs[b] = path.truncation_bound;
      for (std::size_t g = 0; g < grid.size(); ++g) paths[g][b] = path.survival[g];
    });
    tb = *std::max_element(tbs.begin(), tbs.end());
  }
  // Kaplan-Meier for reference
  auto km = [&](double t) {
    double s = 1.0;
    for (const auto& d : ds.distinct_events()) {
      if (d.time > t) break;
      int y = at_risk(ds, d.time, AtRisk::LeftClosed);
      s *= 1.0 - static_cast<double>(d.multiplicity) / y;
    }
    return s;
  };
  std::vector<std::string> head = {"t", "posterior_mean", "kaplan_meier"};
  if (B > 0) {
    head.push_back("mc_mean");
    head.push_back("mc_std_error");
  }
  CsvWriter csv(head);
  json curve = json::array();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double v = posterior_survival_mean(post, grid[g]);
    json pt = {{"t", grid[g]}, {"posterior_mean", v}, {"kaplan_meier", km(grid[g])}};
    std::vector<std::string> row = {CsvWriter::num(grid[g]), CsvWriter::num(v), CsvWriter::num(km(grid[g]))};
    if (B > 0) {
      auto est = stats::mean_and_stderr(paths[g]);
      pt["monte_carlo"] = mc_value(est.mean, est.std_error, B, tb);
      row.push_back(CsvWriter::num(est.mean));
      row.push_back(CsvWriter::num(est.std_error));
    }
    curve.push_back(pt);
    csv.row(row);
  }
  add_file(run, "survival.csv", csv);
  CsvWriter jumps({"time", "multiplicity", "a", "b", "mean", "mark"});
  for (const auto& j : post.jumps())
    jumps.row({CsvWriter::num(j.time), std::to_string(j.multiplicity), CsvWriter::num(j.a), CsvWriter::num(j.b),
               CsvWriter::num(j.mean()), j.mark ? CsvWriter::num(*j.mark) : ""});
  add_file(run, "jumps.csv", jumps);
  auto& r = run.report["results"];
  r["prior"] = dirichlet ? "dirichlet" : m.contains("beta") ? "beta-stacy" : "beta";
  r["events"] = ds.events();
  r["censored"] = ds.censored();
  r["curve"] = curve;
  if (B > 0) r["monte_carlo"] = {{"draws", B}, {"eps", eps}, {"truncation_bound", tb}};
  run.lines.push_back("posterior survival on " + std::to_string(grid.size()) + " grid points written to survival.csv");
}

// ---- transform -----------------------------------------------------------

void cmd_transform(Run& run) {
  const json& m = model_of(run);
  std::vector<LinearTerm> terms;
  json tj = run.cfg.contains("terms") ? run.cfg["terms"] : json::array();
  if (!tj.is_array() || tj.empty()) bad(run, "give at least one term (--f and --z)");
  for (const auto& t : tj) {
    if (!t.is_object()) bad(run, "terms must be objects with f and z");
    terms.push_back({parse_functional(get_string(t, "f", "")), require_double(t, "z")});
  }
  const std::string fam = get_string(m, "family", "pd");
  const double theta = require_double(m, "theta");
  const std::string order_s = get_string(run.cfg, "order", "theta");
  if (order_s != "theta" && order_s != "theta+n") bad(run, "order must be theta or theta+n");
  const TransformOrder order = order_s == "theta" ? TransformOrder::Theta : TransformOrder::ThetaPlusN;
  const int n = order == TransformOrder::Theta ? 0 : get_int(run.cfg, "n", 1);
  auto H = base_of(run, "uniform 0 1", 1.0);
  auto& r = run.report["results"];
  LevyIntensity li = fam == "pd" ? LevyIntensity::stable(require_double(m, "alpha"), H)
                                 : make_intensity(m, base_of(run, "uniform 0 1", get_double(m, "mass", 1.0)));
  double via = stieltjes_via_mixing({{li, theta, n}, terms, order});
  r["via_mixing"] = via;
  CsvWriter csv({"method", "value", "std_error", "draws"});
  csv.row({"mixing", CsvWriter::num(via), "", ""});
  if (fam == "pd" && order == TransformOrder::Theta) {
    double closed = pd_stieltjes_closed_form(li.alpha(), theta, H, terms);
    r["closed_form"] = closed;
    csv.row({"closed_form", CsvWriter::num(closed), "", ""});
  }
  const std::size_t B = draws_of(run, 0);
  if (B > 0) {
    if (fam != "pd") bad(run, "Monte Carlo is available for the pd family");
    const int j_max = get_int(run.cfg, "atoms", 200);
    const double alpha = li.alpha();
    MeasureSampler sampler = [alpha, theta, H, j_max](RngStream& rr) {
      return pd_inverse_levy_sample(alpha, theta, H, j_max, rr);
    };
    auto est = mc_transform_estimate(sampler, terms, theta + n, static_cast<int>(B), RngStream(run.seed), &H,
                                     run.threads);
    r["monte_carlo"] = mc_value(est.mean, est.std_error, B);
    r["monte_carlo"]["atoms_per_draw"] = j_max;
    csv.row({"monte_carlo", CsvWriter::num(est.mean), CsvWriter::num(est.std_error), std::to_string(B)});
  }
  add_file(run, "transform.csv", csv);
  run.lines.push_back("transform via mixing " + CsvWriter::num(via));
}

// ---- pk ------------------------------------------------------------------

void cmd_pk(Run& run) {
  const json& m = model_of(run);
  const int n = get_int(run.cfg, "n", 0);
  if (n < 1 || n > 8) bad(run, "n must be in 1..8");
  auto li = make_intensity(m, base_of(run, "uniform 0 1", get_double(m, "mass", 1.0)));
  PKSpec spec{li, {}, {}};
  std::string w = get_string(run.cfg, "weight", "one");
  if (w != "one") {
    auto parts = parse_number_list(w.substr(std::min(w.size(), w.find_first_of(" :") + 1)));
    if (w.rfind("power", 0) != 0 || parts.size() != 1) bad(run, "weight must be 'one' or 'power p'");
    double p = parts[0];
    spec.g = [p](double t) { return std::pow(t, p); };
  }
  std::map<std::vector<int>, double> memo;
  CsvWriter csv({"partition", "blocks", "block_sizes", "probability"});
  KahanSum total;
  for (const auto& p : enumerate_partitions(n)) {
    std::vector<int> key(p.block_sizes().begin(), p.block_sizes().end());
    std::sort(key.begin(), key.end());
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, pk_eppf(spec, p)).first;
    csv.row({p.to_string(), std::to_string(p.num_blocks()), partition_sizes(p), CsvWriter::num(it->second)});
    total += it->second;
  }
  add_file(run, "pk_eppf.csv", csv);
  auto& r = run.report["results"];
  r["intensity"] = li.family_name();
  r["weight"] = w;
  r["weight_mean"] = pk_weight_mean(spec);
  r["n"] = n;
  r["sum"] = total.value();
  run.lines.push_back(std::to_string(csv.rows()) + " partitions, probabilities sum to " + CsvWriter::num(total.value()));
}

// ---- verify --------------------------------------------------------------

bool cmd_verify(Run& run) {
  SuiteOptions opts;
  opts.seed = run.seed;
  opts.threads = run.threads;
  for (double id : get_doubles(run.cfg, "only")) opts.only.push_back(static_cast<int>(id));
  auto outcomes = run_criteria(opts);
  run.report["results"]["criteria"] = criteria_results(outcomes);
  CsvWriter csv({"id", "name", "tolerances_met", "summary"});
  bool all = true;
  for (const auto& o : outcomes) {
    csv.row({std::to_string(o.id), o.name, o.numeric_pass ? "true" : "false", o.summary});
    run.lines.push_back(outcome_line(o.id, o.name, o.passed(), o.summary));
    all = all && o.passed();
  }
  add_file(run, "verify.csv", csv);
  run.report["results"]["all_tolerances_met"] =
      std::all_of(outcomes.begin(), outcomes.end(), [](const auto& o) { return o.numeric_pass; });
  run.report["criteria_timing"] = criteria_timings(outcomes);
  return all;
}

int exit_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitIo;
  return kExitNumeric;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"ppcalc: partition and random-measure calculus"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  std::map<std::string, std::string> values;  // config key -> flag text
  std::vector<std::string> fs_, zs_;
  bool dirichlet = false;

  auto opt = [&](CLI::App* a, const std::string& flag, const std::string& key, const std::string& help) {
    a->add_option(flag, values[key], help);
  };
  opt(&app, "--config", "config", "JSON config; flags override its entries");
  opt(&app, "--seed", "seed", "64-bit seed (default 1)");
  opt(&app, "--threads", "threads", "worker threads (falls back to PPCALC_THREADS)");
  opt(&app, "--out", "out", "output directory (default .)");

  std::map<std::string, CLI::App*> subs;
  for (const auto& c : kCommands) subs[c] = app.add_subcommand(c);
  subs["eppf"]->description("table of the partition law for all partitions of n");
  subs["sample-partition"]->description("draw partitions from the sequential seating rule");
  subs["moments"]->description("moments of the random measure of a region");
  subs["fit-intensity"]->description("posterior intensity of a Cox process with a mixed kernel");
  subs["fit-survival"]->description("posterior survival under a beta hazard prior");
  subs["transform"]->description("Cauchy-Stieltjes transform of linear functionals");
  subs["pk"]->description("partition law of a weighted Poisson-Kingman model");
  subs["verify"]->description("run the full oracle suite");

  for (const auto& name : {"eppf", "sample-partition", "moments", "fit-intensity", "fit-survival", "transform", "pk"}) {
    auto* s = subs[name];
    opt(s, "--family", "model.family", "pd, ewens, gamma, gg, ig, stable");
    opt(s, "--alpha", "model.alpha", "discount / stability index");
    opt(s, "--theta", "model.theta", "concentration");
    opt(s, "--b", "model.b", "exponential tilt of the jumps");
    opt(s, "--mass", "model.mass", "total mass of the base measure");
    opt(s, "--base", "base", "uniform a b | exponential rate | piecewise e0 d0 e1 ... eK");
    opt(s, "--draws", "draws", "Monte Carlo draws");
    opt(s, "--eps", "eps", "truncation bound per draw");
  }
  for (const auto& name : {"eppf", "sample-partition", "pk", "transform"}) opt(subs[name], "--n", "n", "sample size");
  opt(subs["moments"], "--region", "region", "lo hi");
  opt(subs["moments"], "--order", "order", "highest moment");
  for (const auto& name : {"fit-intensity", "fit-survival"}) {
    opt(subs[name], "--data", "data", "input CSV");
    opt(subs[name], "--grid", "grid", "evaluation points, comma separated");
    opt(subs[name], "--grid-points", "grid_points", "number of evenly spaced points");
  }
  opt(subs["fit-intensity"], "--kernel", "kernel", "uniform width | exponential rate | gaussian sd");
  opt(subs["fit-intensity"], "--window", "window", "lo hi");
  opt(subs["fit-survival"], "--prior", "model.prior", "beta");
  opt(subs["fit-survival"], "--c", "model.c", "beta process concentration");
  opt(subs["fit-survival"], "--beta", "model.beta", "Beta-Stacy shift");
  subs["fit-survival"]->add_flag("--dirichlet", dirichlet, "c(s) = theta S0(s): the Dirichlet process prior");
  subs["transform"]->add_option("--f", fs_, "functional: indicator lo hi | identity | constant c | power p");
  subs["transform"]->add_option("--z", zs_, "coefficient of the matching --f");
  opt(subs["transform"], "--order", "order", "theta | theta+n");
  opt(subs["transform"], "--atoms", "atoms", "atoms per Monte Carlo draw");
  opt(subs["pk"], "--weight", "weight", "one | power p  (g(t) = t^p)");
  opt(subs["verify"], "--only", "only", "criterion ids, comma separated");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: [cli/parse] " << e.what() << "\n";
    return kExitConfig;
  }

  Run run;
  auto t0 = std::chrono::steady_clock::now();
  try {
    for (auto* s : app.get_subcommands()) run.command = s->get_name();
    json cfg = json::object();
    if (!values["config"].empty()) cfg = load_config(values["config"]);
    std::string cfg_cmd = get_string(cfg, "command", "");
    if (run.command.empty()) run.command = cfg_cmd;
    if (run.command.empty()) {
      std::cout << app.help();
      return kExitConfig;
    }
    if (!cfg_cmd.empty() && cfg_cmd != run.command)
      throw ConfigError("cli", run.command, "config is for command '" + cfg_cmd + "'");
    if (std::find(kCommands.begin(), kCommands.end(), run.command) == kCommands.end())
      throw ConfigError("cli", "dispatch", "unknown command '" + run.command + "'");
    for (const auto& [key, text] : values)
      if (!text.empty() && key != "config") set_path(cfg, key, flag_value(text));
    if (dirichlet) set_path(cfg, "model.dirichlet", true);
    if (!fs_.empty() || !zs_.empty()) {
      if (fs_.size() != zs_.size()) throw ConfigError("cli", run.command, "each --f needs a matching --z");
      json terms = json::array();
      for (std::size_t i = 0; i < fs_.size(); ++i) terms.push_back({{"f", fs_[i]}, {"z", flag_value(zs_[i])}});
      cfg["terms"] = terms;
    }
    run.cfg = cfg;
    const json* seed = cfg.contains("seed") ? &cfg["seed"] : nullptr;
    if (seed && !(seed->is_number_unsigned() || (seed->is_number_integer() && seed->get<std::int64_t>() >= 0)))
      throw ConfigError("cli", run.command, "seed must be a nonnegative integer");
    run.seed = seed ? seed->get<std::uint64_t>() : 1;
    run.threads = resolve_threads(get_int(cfg, "threads", 0));
    run.out = get_string(cfg, "out", ".");
    json inputs = json::object();
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
      if (!kRunOnlyKeys.count(it.key())) inputs[it.key()] = it.value();
    inputs.erase("seed");
    run.report = make_report(run.command, run.seed, inputs);

    bool ok = true;
    if (run.command == "eppf") cmd_eppf(run);
    else if (run.command == "sample-partition") cmd_sample_partition(run);
    else if (run.command == "moments") cmd_moments(run);
    else if (run.command == "fit-intensity") cmd_fit_intensity(run);
    else if (run.command == "fit-survival") cmd_fit_survival(run);
    else if (run.command == "transform") cmd_transform(run);
    else if (run.command == "pk") cmd_pk(run);
    else ok = cmd_verify(run);

    json timing = run.report.contains("criteria_timing") ? run.report["criteria_timing"] : json();
    run.report.erase("criteria_timing");
    set_run_info(run.report, run.threads,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (!timing.is_null()) run.report["run_info"]["criteria"] = timing;
    std::string report_name = run.command + ".json";
    write_report(run.out / report_name, run.report);
    for (const auto& l : run.lines) std::cout << l << "\n";
    std::cout << "report: " << (run.out / report_name).string() << "\n";
    return ok ? kExitOk : kExitVerifyFailed;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: [cli/" << (run.command.empty() ? "dispatch" : run.command) << "] " << e.what() << "\n";
    return exit_for(e);
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace ppcalc::app
