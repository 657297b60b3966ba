#pragma once

#include <string>
#include <vector>

#include "ppcalc/numerics.hpp"
#include "ppcalc/random.hpp"

namespace ppcalc {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double y) const { return y >= lo && y <= hi; }
};

// Non-atomic measure on a real interval. The total mass may be infinite
// (hazard-scale measures); sampling then needs an explicit sub-interval.
class BaseMeasure {
 public:
  static BaseMeasure uniform(double a, double b, double mass);
  static BaseMeasure exponential(double rate, double mass);
  // Piecewise-constant density: density[i] on [edges[i], edges[i+1]).
  static BaseMeasure piecewise(std::vector<double> edges, std::vector<double> density);
  // cumulative(y) = measure of (support.lo, y]; quantile inverts it and is
  // optional (numeric inversion is used when empty).
  static BaseMeasure custom(std::string name, Interval support, RealFn density,
                            RealFn cumulative, RealFn quantile = {},
                            std::vector<double> breakpoints = {});

  const std::string& name() const { return name_; }
  Interval support() const { return support_; }
  double total_mass() const { return total_; }
  bool finite() const { return std::isfinite(total_); }
  double density(double y) const;
  double cumulative(double y) const;
  double mass_between(double a, double b) const;
  // Smallest y with cumulative(y) >= m.
  double quantile(double m) const;
  const std::vector<double>& breakpoints() const { return breaks_; }

  double sample(RngStream& rng) const;
  double sample_between(double a, double b, RngStream& rng) const;

  // Integral of f against the measure, split at breakpoints.
  double integrate(const RealFn& f, double rel_tol = 1e-10) const;
  double integrate(const RealFn& f, const std::vector<double>& extra_breaks,
                   double rel_tol = 1e-10) const;

  BaseMeasure scaled(double factor) const;
  // The measure restricted to [a,b].
  BaseMeasure restricted(double a, double b) const;

 private:
  std::string name_;
  Interval support_;
  double total_ = 0.0;
  RealFn density_;
  RealFn cumulative_;
  RealFn quantile_;
  std::vector<double> breaks_;
};

}  // namespace ppcalc
