#pragma once

#include <functional>
#include <vector>

namespace ppcalc::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

MeanEstimate mean_and_stderr(const std::vector<double>& xs);

// Pearson chi-square of counts against expected probabilities.
TestResult chi_square(const std::vector<double>& counts, const std::vector<double>& probs);

// Kolmogorov limiting survival function Q(lambda).
double kolmogorov_q(double lambda);

TestResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);
TestResult ks_two_sample(std::vector<double> xs, std::vector<double> ys);

}  // namespace ppcalc::stats
