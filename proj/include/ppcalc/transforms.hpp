#pragma once

#include <functional>
#include <vector>

#include "ppcalc/moments.hpp"
#include "ppcalc/scaled.hpp"
#include "ppcalc/stats.hpp"

namespace ppcalc {

// One term z_l * P(f_l) of the linear combination inside the transform.
struct LinearTerm {
  Functional f;
  double z = 0.0;
};

enum class TransformOrder {
  Theta,         // E[(1 + sum z_l P f_l)^{-theta}], theta > 0
  ThetaPlusN,    // E[(1 + sum z_l P f_l)^{-(theta+n)}], theta + n > 0, 1 <= n <= 8
};

// P is the normalized random measure under the law reweighted by T^{-theta}.
struct TransformRequest {
  ScaledLawSpec spec;
  std::vector<LinearTerm> terms;
  TransformOrder order = TransformOrder::Theta;
};

// Cauchy-Stieltjes transform through the V-mixture of Laplace functionals.
// Requires sum_l z_l f_l >= 0 on the support of the base measure.
double stieltjes_via_mixing(const TransformRequest& req);

// [int (1 + sum z_l f_l)^alpha dH]^{-theta/alpha} for PD(alpha, theta) with
// base distribution H (normalized if needed).
double pd_stieltjes_closed_form(double alpha, double theta, const BaseMeasure& H,
                                const std::vector<LinearTerm>& terms);

using MeasureSampler = std::function<AtomicMeasureDraw(RngStream&)>;

// Mean of (1 + sum z_l P f_l)^{-exponent} over B sampled measures, each
// normalized by its total weight. When `compensate` is given, the expected
// truncated mass of each draw is spread according to that base measure.
// Draw b uses rng.substream(b).
stats::MeanEstimate mc_transform_estimate(const MeasureSampler& sampler, const std::vector<LinearTerm>& terms,
                                          double exponent, int B, const RngStream& rng,
                                          const BaseMeasure* compensate = nullptr, int threads = 1);

}  // namespace ppcalc
