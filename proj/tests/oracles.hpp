#pragma once
// Independent reference computations used only by the tests.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

// B(n+1) = sum_k C(n,k) B(k)
inline std::uint64_t bell(int n) {
  std::vector<std::uint64_t> b{1};
  for (int m = 0; m < n; ++m) {
    std::uint64_t s = 0, c = 1;
    for (int k = 0; k <= m; ++k) {
      s += c * b[k];
      c = c * (m - k) / (k + 1);
    }
    b.push_back(s);
  }
  return b[n];
}

// Recursive restricted-growth enumeration.
inline void rgs_recursive(int n, std::vector<int>& a, int mx,
                          const std::function<void(const std::vector<int>&)>& f) {
  if (static_cast<int>(a.size()) == n) {
    f(a);
    return;
  }
  for (int b = 0; b <= mx + 1; ++b) {
    a.push_back(b);
    rgs_recursive(n, a, std::max(mx, b), f);
    a.pop_back();
  }
}

inline void for_each_rgs(int n, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> a;
  rgs_recursive(n, a, -1, f);
}

inline std::vector<int> sizes_of(const std::vector<int>& a) {
  std::vector<int> s;
  for (int b : a) {
    if (b == static_cast<int>(s.size())) s.push_back(0);
    ++s[b];
  }
  return s;
}

// Product of sequential prediction-rule probabilities, in plain arithmetic.
inline double crp_product(double alpha, double theta, const std::vector<int>& a) {
  std::vector<int> sizes;
  double p = 1.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (r == 0) {
      sizes.push_back(1);
      continue;
    }
    int b = a[r];
    if (b == static_cast<int>(sizes.size())) {
      p *= (theta + sizes.size() * alpha) / (theta + r);
      sizes.push_back(1);
    } else {
      p *= (sizes[b] - alpha) / (theta + r);
      ++sizes[b];
    }
  }
  return p;
}

// Raw moments of Poisson(lambda) via E[N^n] = sum_k S(n,k) lambda^k,
// Stirling numbers from their recurrence.
inline double poisson_moment(double lambda, int n) {
  std::vector<std::vector<double>> S(n + 1, std::vector<double>(n + 1, 0.0));
  S[0][0] = 1.0;
  for (int i = 1; i <= n; ++i)
    for (int k = 1; k <= i; ++k) S[i][k] = k * S[i - 1][k] + S[i - 1][k - 1];
  double m = 0.0;
  for (int k = 0; k <= n; ++k) m += S[n][k] * std::pow(lambda, k);
  return m;
}

inline double rising(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x + i;
  return r;
}

// Composite Simpson on [a,b] with m (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int m) {
  double h = (b - a) / m;
  double s = f(a) + f(b);
  for (int i = 1; i < m; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Integral over (0,inf) by Simpson in the log variable, range [lo, hi] in log s.
inline double simpson_log(const std::function<double(double)>& f, double lo = -40.0, double hi = 6.0,
                          int m = 20000) {
  return simpson([&](double u) { double s = std::exp(u); return f(s) * s; }, lo, hi, m);
}

}  // namespace oracle
