#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ppcalc/levy.hpp"
#include "ppcalc/partition.hpp"
#include "ppcalc/random.hpp"

namespace ppcalc {

// Laws of N and mu reweighted by T^{-theta}, and their V-mixture
// representations. T = mu(Y) is the total mass; v is the tilt scalar in
// e^{-v h(s)}.
struct ScaledLawSpec {
  LevyIntensity li;  // homogeneous, finite base measure
  double theta = 0.0;
  int n = 0;
};

// log of int_0^inf exp(lf(log v)) dv. The integral runs in u = log v with the
// tails cut at e^{-37} of the peak; raises DivergenceError when a tail does not
// decay before |u| = 700.
double log_v_integral(const std::function<double(double)>& lf, const char* op = "v_integral");

// log E[e^{-vT}]
double log_laplace_transform(const LevyIntensity& li, double v);
// log kappa_e(e^{-vh} rho), per unit of the base measure
double log_kappa_tilted(const LevyIntensity& li, int e, double v);
// log prod_j eta(Y) kappa_{e_j}(e^{-vh} rho)
double log_block_product(const LevyIntensity& li, std::span<const int> sizes, double v);
// log E[T^n] under the tilted law e^{-vh} rho (cumulant recursion)
double log_tilted_moment(const LevyIntensity& li, int n, double v);

// log E[T^{-s}]. Defined for s > -1 and for negative integers s.
double log_negative_moment(const LevyIntensity& li, double s);
// E[T^{-theta}] / E[T^{-(theta+n)}] = E[T^n] under the theta+n scaled law.
double moment_ratio(const LevyIntensity& li, double theta, int n);
// log E[T^{-theta}], falling back to the normalization of the joint
// (theta+n, theta) mixing density when theta <= -1 is not an integer.
double log_scaling_moment(const LevyIntensity& li, double theta, int n);

enum class MixingKind {
  Scaled,       // pi_{theta+n}(dv)
  Joint,        // pi_{n,0}(dv, p)
  ScaledJoint,  // pi_{theta+n,theta}(dv, p)
};

class MixingDensity {
 public:
  MixingDensity(ScaledLawSpec spec, MixingKind kind);

  const ScaledLawSpec& spec() const { return spec_; }
  MixingKind kind() const { return kind_; }

  // Marginal density of V (summed over partitions for the joint kinds).
  double operator()(double v) const;
  double log_density(double v) const;
  // Joint density of (V, p); joint kinds only.
  double operator()(double v, const Partition& p) const;
  // Marginal probability of p; joint kinds only.
  double partition_probability(const Partition& p) const;
  double cdf(double v) const;

  // Integral of the unnormalized marginal as built from its formula. It is
  // 1 in exact arithmetic for the joint kinds and Gamma(theta+n)E[T^{-(theta+n)}]
  // for the scaled kind.
  double normalizer() const { return std::exp(log_norm_); }
  double log_normalizer() const { return log_norm_; }
  // Effective support in v after the tail cutoffs.
  double lower() const { return std::exp(u_lo_); }
  double upper() const { return std::exp(u_hi_); }

 private:
  double log_unnormalized(double v) const;
  double log_unnormalized_joint(double v, std::span<const int> sizes) const;

  ScaledLawSpec spec_;
  MixingKind kind_;
  double log_scaled_norm_ = 0.0;
  double log_norm_ = 0.0;
  double u_lo_ = 0.0, u_hi_ = 0.0;
};

MixingDensity mixing_density(const ScaledLawSpec& spec, MixingKind kind);

// pi_{theta+n,theta}(p), n = p.size().
double eppf_via_mixing(const LevyIntensity& li, double theta, const Partition& p);

// Laplace functional of mu under the theta-scaled law assembled from the
// partition mixture at level n (n <= 8).
double laplace_functional_mixture(const LevyIntensity& li, double theta, int n, const RealFn& g,
                                  const std::vector<double>& g_breaks = {});
// Laplace functional of mu given V = v and the partition block sizes, with
// block locations integrated against H.
double conditional_laplace_functional(const LevyIntensity& li, double v, std::span<const int> sizes,
                                      const RealFn& g, const std::vector<double>& g_breaks = {});

// Two-parameter Poisson-Dirichlet constructions. The base H is a probability
// measure; the stable intensity is rho_alpha(ds) = s^{-1-alpha}/Gamma(1-alpha) ds
// with eta = alpha H, which makes L = V^alpha a unit-rate gamma variable.
struct PdMixtureDraw {
  AtomicMeasureDraw measure;     // mu* atoms then the n(p) fixed atoms
  Partition partition;
  double L = 0.0;
  std::vector<double> jumps;     // J_j
  std::vector<double> locations; // Y*_j
  double continuous_total = 0.0; // T* including the truncated mass
};

// eps bounds the expected truncated mass of L^{1/alpha} mu*.
PdMixtureDraw pd_mixture_sample(double alpha, double theta, const BaseMeasure& H, int n, double eps,
                                RngStream& rng);

// Normalized weights Lambda^{-1}(Gamma_j / L) / sum, j <= j_max, decreasing.
// truncation_bound is the expected share of the omitted tail. theta = 0
// uses the untilted stable sequence Gamma_j^{-1/alpha}.
AtomicMeasureDraw pd_inverse_levy_sample(double alpha, double theta, const BaseMeasure& H, int j_max,
                                         RngStream& rng);

struct PdPosteriorDraw {
  AtomicMeasureDraw measure;  // normalized
  double p_n = 0.0;           // mass of the continuous component
  std::vector<double> fixed_weights;  // mass at each Y*_j
};

PdPosteriorDraw pd_posterior_measure(double alpha, double theta, const std::vector<double>& y_star,
                                     const Partition& p, const BaseMeasure& H, int j_max, RngStream& rng);

// Joint density of (V, p) for the generalized gamma intensity with
// eta(Y) = theta_mass; alpha = 0 gives the gamma process.
double gg_scaled_joint_density(double alpha, double b, double theta_mass, int n, double v, const Partition& p);

// E[exp(-L^{1/alpha} mu_L(g))] by quadrature over L.
double pd_scaled_laplace(double alpha, double theta, const BaseMeasure& H, const RealFn& g,
                         const std::vector<double>& g_breaks = {});

}  // namespace ppcalc
