#include "ppcalc/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "ppcalc/errors.hpp"
#include "ppcalc/numerics.hpp"

namespace ppcalc::stats {

MeanEstimate mean_and_stderr(const std::vector<double>& xs) {
  MeanEstimate m;
  m.count = xs.size();
  if (xs.empty()) return m;
  KahanSum s;
  for (double x : xs) s += x;
  m.mean = s.value() / xs.size();
  if (xs.size() < 2) return m;
  KahanSum v;
  for (double x : xs) v += (x - m.mean) * (x - m.mean);
  m.std_error = std::sqrt(v.value() / (xs.size() - 1) / xs.size());
  return m;
}

TestResult chi_square(const std::vector<double>& counts, const std::vector<double>& probs) {
  if (counts.size() != probs.size() || counts.size() < 2)
    throw ConfigError("stats", "chi_square", "need matching cells, at least two");
  double total = 0.0;
  for (double c : counts) total += c;
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double e = total * probs[i];
    stat += (counts[i] - e) * (counts[i] - e) / e;
  }
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return {stat, boost::math::cdf(boost::math::complement(dist, stat))};
}

double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 200; ++j) {
    double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw InputError("stats", "ks_one_sample", "empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  double sn = std::sqrt(n);
  return {d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)};
}

TestResult ks_two_sample(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || ys.empty()) throw InputError("stats", "ks_two_sample", "empty sample");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double n = static_cast<double>(xs.size()), m = static_cast<double>(ys.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xs.size() && j < ys.size()) {
    double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] <= v) ++i;
    while (j < ys.size() && ys[j] <= v) ++j;
    d = std::max(d, std::fabs(i / n - j / m));
  }
  double ne = std::sqrt(n * m / (n + m));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

}  // namespace ppcalc::stats
