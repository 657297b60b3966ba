#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace ppcalc {

using RealFn = std::function<double(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Neumaier-compensated running sum.
class KahanSum {
 public:
  KahanSum& operator+=(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      c_ += (sum_ - t) + x;
    else
      c_ += (x - t) + sum_;
    sum_ = t;
    return *this;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

double log_sum_exp(std::span<const double> xs);

// log of Gamma(x+n)/Gamma(x).
double log_rising(double x, double n);

// Adaptive Gauss-Kronrod on [a,b]; either end may be infinite.
// rel_tol is relative to the L1 norm of the integrand.
double integrate(const RealFn& f, double a, double b, double rel_tol = 1e-10,
                 double* error = nullptr);

// Sum of integrate() over consecutive pieces; points are sorted and
// deduplicated, only those inside [a,b] are used.
double integrate_pieces(const RealFn& f, double a, double b,
                        std::vector<double> points, double rel_tol = 1e-10);

// Integral over (0, inf) in the variable u = log s, split at log(scale).
// Suited to integrands with power singularities at 0 and fast decay.
double integrate_halfline(const RealFn& f, double scale = 1.0,
                          double rel_tol = 1e-10);

// Integral over (lo, hi) with 0 <= lo < hi <= inf, in log variable.
double integrate_log(const RealFn& f, double lo, double hi,
                     double rel_tol = 1e-10);

// Integral over (0,1) in the logit variable; handles power singularities
// at both ends.
double integrate_unit(const RealFn& f, double rel_tol = 1e-10);

// Composite Gauss-Legendre with `nodes` points spread over [a,b] split at
// the given breakpoints; doubled until two consecutive passes agree to tol.
double integrate_legendre(const RealFn& f, double a, double b,
                          const std::vector<double>& breakpoints,
                          double tol = 1e-8, int nodes = 512);

// Upper incomplete gamma Gamma(a, z) for a > -1 (a != 0 handled through
// the recurrence, a == 0 through E1).
double upper_gamma(double a, double z);

// Safe root bracketing search of a monotone function on (lo, hi).
double solve_monotone(const std::function<double(double)>& f, double lo,
                      double hi, double rel_tol = 1e-12);

}  // namespace ppcalc
