#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ppcalc/levy.hpp"
#include "ppcalc/partition.hpp"
#include "ppcalc/wcr.hpp"

namespace ppcalc {

// Mixing kernel K(t|y) of an intensity lambda(t) = int K(t|y) mu(dy).
class Kernel {
 public:
  enum class Family { UniformWindow, Exponential, Gaussian, SetIndicator, Constant };

  // 1 on [y, y + width]
  static Kernel uniform_window(double width);
  // rate e^{-rate (t - y)} for t >= y
  static Kernel exponential(double rate);
  // normal density in t with mean y
  static Kernel gaussian(double sd);
  // increasing: 1{y <= t}; otherwise 1{t <= y}
  static Kernel set_indicator(bool increasing = true);
  // K(t|y) = value everywhere
  static Kernel constant(double value);

  Family family() const { return family_; }
  std::string describe() const;
  double param() const { return param_; }

  double operator()(double t, double y) const;
  // int_a^b K(s|y) ds, closed form.
  double integral(double a, double b, double y) const;
  // Locations y where K(t|.) is positive; may be unbounded.
  Interval location_range(double t) const;
  // Locations where K(t|.) is not smooth.
  std::vector<double> location_breaks(double t) const;

 private:
  Kernel(Family f, double p) : family_(f), param_(p) {}
  Family family_;
  double param_;
};

// Right-continuous step function: values[k] on [edges[k], edges[k+1]),
// zero outside [edges.front(), edges.back()).
struct StepFunction {
  std::vector<double> edges;
  std::vector<double> values;

  static StepFunction constant(double value, double lo, double hi);
  double operator()(double s) const;
  void validate() const;
};

struct IntensityModel {
  Kernel kernel = Kernel::uniform_window(1.0);
  LevyIntensity prior = LevyIntensity::gamma_process(BaseMeasure::uniform(0.0, 1.0, 1.0));
  Interval window{0.0, 1.0};
  std::optional<StepFunction> at_risk;  // Y(s); defaults to 1 on the window

  // f_K(y) = int_window Y(s) K(s|y) ds
  double kernel_exponent(double y) const;
  std::vector<double> exponent_breaks() const;
  // prior tilted by exp(-f_K(y) s)
  LevyIntensity tilted_prior() const;
};

double kernel_exponent(const IntensityModel& model, double y);

// One posterior draw of mu given the events.
struct PosteriorDraw {
  Partition partition;
  double log_weight = 0.0;
  std::vector<double> block_locations;
  std::vector<double> block_jumps;
  AtomicMeasureDraw continuous;  // thinned tilted prior part
  std::string error;             // non-empty when the draw failed
};

// Posterior quantities for fixed data; caches block integrals.
class LevyCoxPosterior {
 public:
  // `tilted` overrides the tilted prior (for example a tilt applied in two
  // steps); it must equal the prior tilted by f_K.
  LevyCoxPosterior(IntensityModel model, std::vector<double> events,
                   std::optional<LevyIntensity> tilted = std::nullopt);

  const IntensityModel& model() const { return model_; }
  const LevyIntensity& tilted() const { return tilted_; }
  const std::vector<double>& events() const { return events_; }
  int size() const { return static_cast<int>(events_.size()); }

  // log of int prod_{i in C} K(X_i|y) kappa_|C|(tilted|y) eta(dy)
  double log_block(std::uint64_t mask) const;
  // log E[exp(-mu(f_K))]
  double log_laplace() const;

  double marginal_likelihood() const;
  double log_marginal_likelihood() const;
  double posterior_partition_density(const Partition& p) const;

  double prior_intensity_mean(double t) const;
  double intensity_mean_given_y(double t, const Partition& p, const std::vector<double>& locations) const;
  double intensity_mean_given_x(double t) const;

  // Draws a block location from P(dy | C) prop. to prod K(X_i|y) kappa_e(y) eta(dy).
  double sample_block_location(std::uint64_t mask, RngStream& rng) const;
  const BlockFunctionSeating& seating() const { return seating_; }
  // int K(t|v) kappa_{e+1}(v) prod K(X_i|v) eta(dv) / Phi(C); 0 when Phi(C) = 0.
  double block_intensity_ratio(std::uint64_t mask, double t) const;

  LevyCoxPosterior(const LevyCoxPosterior&) = delete;
  LevyCoxPosterior& operator=(const LevyCoxPosterior&) = delete;

  // lambda(t | draw), with the expected contribution of truncated jumps.
  double draw_intensity(const PosteriorDraw& d, double t) const;
  double draw_total_mass(const PosteriorDraw& d) const;

  std::vector<PosteriorDraw> fit(std::size_t draws, double eps, const RngStream& rng, int threads = 1) const;

 private:
  double block_integral(std::uint64_t mask, const std::function<double(double)>& extra, int extra_order,
                        const std::vector<double>& extra_breaks) const;
  std::vector<double> y_breaks(std::uint64_t mask) const;
  Interval y_range(std::uint64_t mask) const;
  PosteriorDraw fit_one(RngStream& rng) const;

  IntensityModel model_;
  std::vector<double> events_;
  LevyIntensity tilted_;
  BlockFunctionSeating seating_;
  double log_laplace_ = 0.0;
  double f_min_ = 0.0;
  struct GridCache;
  std::shared_ptr<GridCache> grids_;
};

struct MonteCarloValue {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t draws = 0;
};

double marginal_likelihood(const IntensityModel& model, const std::vector<double>& events);
MonteCarloValue marginal_likelihood_wcr(const IntensityModel& model, const std::vector<double>& events,
                                        std::size_t draws, const RngStream& rng, int threads = 1);
double posterior_partition_density(const IntensityModel& model, const std::vector<double>& events,
                                   const Partition& p);

enum class IntensityMode { GivenY, GivenX };
double posterior_intensity_mean(const IntensityModel& model, const std::vector<double>& events, double t);
MonteCarloValue posterior_intensity_mean_wcr(const IntensityModel& model, const std::vector<double>& events,
                                             double t, std::size_t draws, const RngStream& rng,
                                             int threads = 1);

std::vector<PosteriorDraw> fit_posterior(const IntensityModel& model, const std::vector<double>& events,
                                         std::size_t draws, double eps, const RngStream& rng, int threads = 1);

// Self-normalized weighted mean of g over posterior draws.
MonteCarloValue weighted_posterior_mean(const std::vector<PosteriorDraw>& draws,
                                        const std::function<double(const PosteriorDraw&)>& g);

}  // namespace ppcalc
