#pragma once

#include <vector>

#include "ppcalc/levy.hpp"
#include "ppcalc/partition.hpp"

namespace ppcalc {

// Poisson-Kingman law PK(rho, gamma) with gamma(dt) = g(t) f_T(t) dt / E[g(T)].
// Supported intensities: gamma process (any rate) and the alpha = 1/2
// generalized gamma / stable family, where f_T is available in closed form.
struct PKSpec {
  LevyIntensity li;
  RealFn g;  // empty means g = 1
  std::vector<double> g_breaks;
};

// Density of the total mass T.
double pk_total_mass_density(const PKSpec& spec, double t);
// E[g(T)]
double pk_weight_mean(const PKSpec& spec);

// EPPF of the weighted law, n <= 8.
double pk_eppf(const PKSpec& spec, const Partition& p);

// Unnormalized joint density of (J_1..J_k, T_k, p) at point = (s_1..s_k, t):
// g(t + sum s) f_T(t) prod s_j^{e_j} rho(s_j) / ((t + sum s)^n E[g(T)]).
// Its integral is pk_eppf(spec, p).
double pk_joint_density(const PKSpec& spec, const Partition& p, const std::vector<double>& point);

struct PKStructure {
  // Each point is (s_1, ..., s_k, t): size-biased jumps and the remaining mass.
  std::vector<std::vector<double>> points;
  // Joint density of (J_1..J_k, T_k) given p, normalized by the EPPF.
  std::vector<double> density;
  // T_k / (T_k + sum_j s_j)
  std::vector<double> R;
  double normalizer = 0.0;  // pk_eppf(spec, p)
};

// Posterior structure of the normalized measure at the given points.
// ystar holds the distinct observed values; under a homogeneous intensity
// they only fix the atom locations of the posterior.
PKStructure pk_posterior_structure(const PKSpec& spec, const Partition& p, const std::vector<double>& ystar,
                                   const std::vector<std::vector<double>>& points);

}  // namespace ppcalc
