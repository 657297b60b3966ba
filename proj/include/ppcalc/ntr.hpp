#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ppcalc/base_measure.hpp"
#include "ppcalc/levy.hpp"
#include "ppcalc/partition.hpp"
#include "ppcalc/random.hpp"

namespace ppcalc {

struct SurvivalRecord {
  double time = 0.0;
  bool event = true;
  std::optional<double> mark;  // categorical marks are coded as indices
};

class SurvivalDataset {
 public:
  SurvivalDataset() = default;
  explicit SurvivalDataset(std::vector<SurvivalRecord> records);
  // Convenience: complete (uncensored) data.
  static SurvivalDataset complete(const std::vector<double>& times);

  const std::vector<SurvivalRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  int events() const;  // n
  int censored() const;  // m

  // Uncensored times in data order, censoring times in data order.
  std::vector<double> event_times() const;
  std::vector<double> censor_times() const;

  struct Distinct {
    double time;
    int multiplicity;
    std::optional<double> mark;
  };
  // Sorted distinct uncensored times with multiplicities.
  std::vector<Distinct> distinct_events() const;

  SurvivalDataset pooled(const SurvivalDataset& other) const;

 private:
  std::vector<SurvivalRecord> records_;
};

enum class AtRisk { Strict, LeftClosed };

int at_risk(const SurvivalDataset& ds, double s, AtRisk mode);

// Mark distribution given time, used when sampling continuous-part atoms.
struct MarkLaw {
  std::string name;
  std::function<double(double time, RngStream&)> sample;
};

// Hazard-space Beta process: rho(du|s) = u^{-1}(1-u)^{c(s)-1} du on (0,1)
// against eta(ds) = c(s) A_0(ds), so that E[Lambda(ds)] = A_0(ds).
class HazardPrior {
 public:
  // A_0 given as a (possibly infinite) measure on time with closed-form
  // cumulative.
  static HazardPrior beta(RealFn c, BaseMeasure A0, std::vector<double> c_breaks = {});
  static HazardPrior beta(double c, BaseMeasure A0);
  // c(s) = theta S_0(s), A_0(ds) = F_0(ds)/S_0(s-); F0 is normalized if needed.
  static HazardPrior dirichlet(double theta, BaseMeasure F0);
  // c(s) = theta S_0(s) + beta against eta = theta F_0; the survival law is
  // defective when beta > 0.
  static HazardPrior beta_stacy(double theta, BaseMeasure F0, double beta);

  double c(double s) const { return c_(s); }
  const RealFn& c_fn() const { return c_; }
  const BaseMeasure& eta() const { return eta_; }
  const std::vector<double>& breakpoints() const { return breaks_; }
  LevyIntensity intensity() const;

  // Cumulative prior mean hazard A_0(t) and its inverse.
  double A0(double t) const;
  double A0_inverse(double x) const;
  // F_0 = 1 - exp(-A_0)
  double F0_density(double t) const;
  double F0_quantile(double q) const;

  bool dirichlet_flag() const { return stacy_ && stacy_->beta == 0.0; }
  std::optional<double> theta() const;
  std::optional<double> stacy_shift() const;

  const std::optional<MarkLaw>& mark_law() const { return marks_; }
  HazardPrior with_marks(MarkLaw m) const;

  // Integral over (a,b] of eta(ds) / (c(s) + k); closed form for the
  // Dirichlet/Beta-Stacy structure.
  double tilted_hazard(double a, double b, int k) const;
  // Integral over (a,b] of eta(ds) [digamma(c+k) - digamma(c)].
  double tilted_exponent(double a, double b, int k) const;

  // True when c and A_0 derive from one F_0 within tol on a grid.
  bool check_dirichlet_consistency(double tol = 1e-8) const;

 private:
  friend std::pair<HazardPrior, double> beta_tilt(const HazardPrior&, RealFn, std::vector<double>);
  friend std::pair<HazardPrior, double> beta_tilt(const HazardPrior&, double);
  struct Stacy {
    double theta;
    BaseMeasure F0;
    double beta;  // constant shift; 0 for Dirichlet
  };
  RealFn c_;
  BaseMeasure eta_;
  std::vector<double> breaks_;
  std::optional<Stacy> stacy_;
  std::optional<MarkLaw> marks_;
  RealFn A0_;      // empty means numeric
  RealFn A0_inv_;  // empty means numeric
};

// Jump of the posterior hazard at a distinct uncensored time, Beta(a, b).
struct HazardJump {
  double time;
  int multiplicity;
  double a;
  double b;
  std::optional<double> mark;
  double mean() const { return a / (a + b); }
};

// Posterior as prior + at-risk tilt + fixed Beta jumps. The continuous part
// has c(s) + Y^+(s) against the prior eta.
class PosteriorHazard {
 public:
  explicit PosteriorHazard(HazardPrior prior);

  const HazardPrior& prior() const { return prior_; }
  const std::vector<HazardJump>& jumps() const { return jumps_; }
  // All observed times (events and censorings), sorted; Y^+ counts these.
  const std::vector<double>& risk_times() const { return risk_times_; }
  int at_risk_plus(double s) const;
  int at_risk_strict(double s) const;

  // c(s) + Y^+(s)
  double continuous_c(double s) const;
  LevyIntensity continuous_part() const;

  PosteriorHazard updated(const SurvivalDataset& ds) const;

 private:
  HazardPrior prior_;
  std::vector<HazardJump> jumps_;
  std::vector<double> risk_times_;
};

PosteriorHazard posterior_hazard(const HazardPrior& prior, const SurvivalDataset& ds);
PosteriorHazard posterior_hazard(const PosteriorHazard& post, const SurvivalDataset& ds);

// E[S(t) | data] by product integration.
double posterior_survival_mean(const PosteriorHazard& post, double t);
double posterior_survival_mean(const HazardPrior& prior, const SurvivalDataset& ds, double t);

// Prior-to-data likelihood pieces. A_k(t) tilts by the first k uncensored
// observations (data order); censored_exponent uses all events plus the
// first l censorings.
double sequential_hazard(const HazardPrior& prior, const std::vector<double>& earlier, double t);
// exp(-tilde A_{n,m}(inf)) computed directly, and through the data-order
// product of sequential factors.
double log_survival_factor(const HazardPrior& prior, const SurvivalDataset& ds);
double log_survival_factor_sequential(const HazardPrior& prior, const SurvivalDataset& ds);

// Joint marginal density of the data: the product form over blocks of
// sequentially tilted factors times kappa terms and eta densities. Censoring
// factors are appended in data order.
double ntr_marginal(const HazardPrior& prior, const SurvivalDataset& ds);
// pi(p | T*): the conditional partition factor. Observation i lies in block
// p.assignment()[i] at time tstar[block].
double ntr_eppf(const HazardPrior& prior, const Partition& p, const std::vector<double>& tstar);
// pi(p | T*) * prod_j f_0(T*_j), the rearranged marginal.
double ntr_marginal_rearranged(const HazardPrior& prior, const Partition& p, const std::vector<double>& tstar);
// int pi(p | T*) prod F_0(dT*_j), for at most 3 blocks.
double ntr_eppf_integrated(const HazardPrior& prior, const Partition& p, double rel_tol = 1e-9);

// Change of measure by exp(-T_beta), T_beta = int beta dZ. Returns the prior
// with c + beta (eta unchanged) and log E[exp(-T_beta)].
std::pair<HazardPrior, double> beta_tilt(const HazardPrior& prior, RealFn beta,
                                         std::vector<double> beta_breaks = {});
std::pair<HazardPrior, double> beta_tilt(const HazardPrior& prior, double beta);

// PD(p|theta) prod_j int Gamma-ratio(e_j, theta S_0(y), beta(y)) F_0(dy).
double beta_stacy_eppf(double theta, const BaseMeasure& F0, const RealFn& beta, const Partition& p);

struct SurvivalPath {
  std::vector<double> grid;
  std::vector<double> survival;
  double truncation_bound = 0.0;  // expected cumulative hazard dropped
  struct Atom {
    double time;
    double u;
    std::optional<double> mark;
  };
  std::vector<Atom> atoms;  // continuous-part atoms kept plus fixed jumps
};

// One posterior path on `grid` (sorted, positive). eps bounds the expected
// truncated hazard over [0, max grid].
SurvivalPath sample_posterior_survival(const PosteriorHazard& post, const std::vector<double>& grid, double eps,
                                       RngStream& rng);
SurvivalPath sample_posterior_survival(const HazardPrior& prior, const SurvivalDataset& ds,
                                       const std::vector<double>& grid, double eps, RngStream& rng);

}  // namespace ppcalc
