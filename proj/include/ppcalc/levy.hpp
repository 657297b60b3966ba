#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppcalc/base_measure.hpp"
#include "ppcalc/numerics.hpp"
#include "ppcalc/random.hpp"

namespace ppcalc {

// One named summand of an exponential tilt e^{-tilt(s,y)}.
//   linear:  v * h(s)
//   kernel:  f(y) * s
//   at_risk: -Y(y) * log(1 - s)
struct TiltTerm {
  enum class Kind { Linear, Kernel, AtRisk };

  Kind kind = Kind::Linear;
  std::string name;
  double scalar = 0.0;            // linear coefficient, or the constant value
  RealFn fn;                      // location function (empty when constant)
  std::vector<double> breakpoints;  // kinks of fn in y

  static TiltTerm linear(double v, std::string name = "linear");
  static TiltTerm kernel(RealFn f, std::string name, std::vector<double> breakpoints = {});
  static TiltTerm kernel_constant(double f, std::string name = "kernel");
  static TiltTerm at_risk(RealFn y_count, std::string name, std::vector<double> breakpoints = {});
  static TiltTerm at_risk_constant(double y_count, std::string name = "at_risk");

  bool homogeneous() const { return kind == Kind::Linear || !fn; }
  double coefficient(double y) const { return fn ? fn(y) : scalar; }
};

class LevyIntensity {
 public:
  enum class Family { GeneralizedGamma, Stable, Beta, CompoundPoisson };

  // rho(ds) = s^{-alpha-1} e^{-b s} / Gamma(1-alpha) ds
  static LevyIntensity generalized_gamma(double alpha, double b, BaseMeasure base);
  // generalized_gamma(0, b): rho(ds) = s^{-1} e^{-b s} ds
  static LevyIntensity gamma_process(BaseMeasure base, double b = 1.0);
  static LevyIntensity stable(double alpha, BaseMeasure base);
  // rho(du|y) = u^{-1} (1-u)^{c(y)-1} du on (0,1)
  static LevyIntensity beta_process(double c, BaseMeasure base);
  static LevyIntensity beta_process(RealFn c, BaseMeasure base, std::vector<double> breakpoints = {});
  // Finite intensity rate * Gamma(shape, jump_rate)(ds).
  static LevyIntensity compound_poisson(double rate, double shape, double jump_rate,
                                        BaseMeasure base);

  Family family() const { return family_; }
  std::string family_name() const;
  double alpha() const { return alpha_; }
  double b() const { return b_; }
  double beta_c(double y) const { return c_fn_ ? c_fn_(y) : c_; }
  bool beta_c_constant() const { return !c_fn_; }
  double cp_rate() const { return rate_; }
  double cp_shape() const { return shape_; }
  double cp_jump_rate() const { return jump_rate_; }

  const BaseMeasure& base() const { return base_; }
  LevyIntensity with_base(BaseMeasure base) const;
  // h(s) = s^p; p = 1 is the identity, p = 0 counts atoms.
  double jump_power() const { return power_; }
  LevyIntensity with_jump_power(double p) const;

  LevyIntensity tilted(TiltTerm term) const;
  const std::vector<TiltTerm>& tilts() const { return tilts_; }

  bool homogeneous() const;
  double jump_upper() const { return family_ == Family::Beta ? 1.0 : kInf; }
  // Location breakpoints of all y-dependent pieces.
  std::vector<double> location_breakpoints() const;

  double h(double s) const;
  double rho(double s, double y) const;
  double tilt_value(double s, double y) const;
  double tilted_density(double s, double y) const;
  // Beta family with log(1-s) supplied accurately; for s near 1.
  double tilted_density_unit(double s, double log1m_s, double y) const;

  // Effective exponential rate at y when every tilt term is of the form
  // (const)*s: GG, Stable and compound-Poisson families.
  std::optional<double> exponential_rate(double y) const;
  // Effective Beta parameter c(y) + sum Y(y) when every tilt is at-risk.
  std::optional<double> beta_parameter(double y) const;
  // Representative jump scale at y (for quadrature splitting).
  double jump_scale(double y) const;

 private:
  LevyIntensity() = default;
  void validate() const;

  Family family_ = Family::GeneralizedGamma;
  double alpha_ = 0.0;
  double b_ = 0.0;
  double c_ = 1.0;
  RealFn c_fn_;
  std::vector<double> c_breaks_;
  double rate_ = 0.0, shape_ = 0.0, jump_rate_ = 0.0;
  double power_ = 1.0;
  BaseMeasure base_ = BaseMeasure::uniform(0.0, 1.0, 1.0);
  std::vector<TiltTerm> tilts_;
};

struct Atom {
  double weight = 0.0;
  double location = 0.0;
};

struct AtomicMeasureDraw {
  std::vector<Atom> atoms;
  double truncation_bound = 0.0;  // expected weight left out by truncation
  double truncation_level = 0.0;  // jumps below this size were not generated
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  double total_weight() const;
  // Total including the expected truncated mass.
  double compensated_total() const { return total_weight() + truncation_bound; }
  double integrate(const RealFn& f) const;
  double max_weight() const;
};

// kappa_n(rho|y) = int h(s)^n e^{-tilt(s,y)} rho(ds|y)
double kappa(const LevyIntensity& li, int n, double y = 0.0);
double kappa_quadrature(const LevyIntensity& li, double n, double y = 0.0);

LevyIntensity tilt(const LevyIntensity& li, const TiltTerm& term);

// int int (1 - e^{-g(y) h(s)}) e^{-tilt} rho(ds|y) eta(dy)
double laplace_exponent(const LevyIntensity& li, const RealFn& g,
                        const std::vector<double>& g_breakpoints = {});
double laplace_exponent_constant(const LevyIntensity& li, double g);
double laplace_exponent_quadrature(const LevyIntensity& li, const RealFn& g,
                                   const std::vector<double>& g_breakpoints = {});
// Per unit of eta at location y.
double laplace_exponent_density(const LevyIntensity& li, double g, double y);

double jump_sample(const LevyIntensity& li, int e, double y, RngStream& rng);
double jump_sample_fallback(const LevyIntensity& li, int e, double y, RngStream& rng);

// Numerical law of a block jump, density proportional to
// h(s)^e e^{-tilt} rho(ds|y). Built once, sampled many times.
class JumpLaw {
 public:
  JumpLaw(const LevyIntensity& li, int e, double y);
  double sample(RngStream& rng) const;
  double cdf(double s) const;

 private:
  double q(double x) const;
  double panel_integral(std::size_t i, double x) const;
  double to_jump(double x) const;
  double from_jump(double s) const;
  LevyIntensity li_;
  int e_;
  double y_;
  bool unit_ = false;
  std::vector<double> edges_, cdf_;
};

// int_x^inf e^{-tilt} rho(ds), homogeneous intensities only.
double tail_mass(const LevyIntensity& li, double x);
double tail_mass_quadrature(const LevyIntensity& li, double x);
// int_0^u h(s) e^{-tilt} rho(ds), homogeneous intensities only.
double residual_mass(const LevyIntensity& li, double u);
// Same per unit of eta at location y; no homogeneity needed.
double residual_mass_at(const LevyIntensity& li, double u, double y);

// Inverse-Levy (Ferguson-Klass) generator bound to one homogeneous
// intensity; reusable across draws.
class InverseLevySampler {
 public:
  explicit InverseLevySampler(LevyIntensity li);

  double tail(double u) const;
  double residual(double u) const;
  // inf{u : tail(u) <= x}; 0 when x is at least the total jump rate.
  double inverse_tail(double x, double guess = 0.0) const;

  AtomicMeasureDraw draw(double mass_scale, double eps, RngStream& rng,
                         std::size_t max_atoms = 10'000'000) const;

  const LevyIntensity& intensity() const { return li_; }

 private:
  double log_tail(double u) const;
  LevyIntensity li_;
  bool closed_ = false;
  double tail_at_zero_ = kInf;
};

AtomicMeasureDraw inverse_levy_atoms(const LevyIntensity& li, double mass_scale, double eps,
                                     RngStream& rng, std::size_t max_atoms = 10'000'000);

}  // namespace ppcalc
