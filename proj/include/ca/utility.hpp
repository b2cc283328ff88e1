// utility.hpp - normalized application utility functions and their log-slopes
//
// Two families, both normalized to U(0)=0, U(r_max or r->inf)=1:
//   sigmoidal   U(r) = c*(1/(1+e^{-a(r-b)}) - d),  c=(1+e^{ab})/e^{ab}, d=1/(1+e^{ab})
//   logarithmic U(r) = log(1+k*r)/log(1+k*r_max)
//
// The quantity the allocation protocol actually consumes is the slope of the
// log-utility, S(r) = d/dr log U(r), which is strictly positive and strictly
// decreasing, plus its first two derivatives and its inverse. All sigmoidal
// expressions are evaluated in forms that never construct e^{ab}, so the same
// code path is exact from a*b ~ 0.01 up to a*b in the hundreds.

#pragma once

#include <utility>

namespace ca {

// Lower bracket for rate searches; S diverges at r=0 so the solver never
// touches zero.
inline constexpr double kRateFloor = 1e-6;

// Default bracket-width target for inverse_log_slope.
inline constexpr double kDefaultSolverTol = 1e-9;

class UtilityFunction {
 public:
  enum class Kind { Sigmoidal, Logarithmic };

  static UtilityFunction sigmoidal(double a, double b);
  static UtilityFunction logarithmic(double k, double r_max);

  Kind kind() const { return kind_; }

  // Sigmoidal parameters (throw std::logic_error on the wrong kind).
  double a() const;
  double b() const;
  double c() const;  // normalization scale, 1 + e^{-ab}
  double d() const;  // normalization offset, e^{-ab} / (1 + e^{-ab})
  // Logarithmic parameters (throw std::logic_error on the wrong kind).
  double k() const;
  double r_max() const;

  // U(r); r >= 0, finite. Throws std::domain_error otherwise.
  double evaluate(double r) const;

  // log U(r); r > 0. Stable where U underflows (large a*b, small r).
  double log_evaluate(double r) const;

  // S(r) = d/dr log U(r); r > 0. Strictly positive, strictly decreasing.
  double log_slope(double r) const;

  // { dS/dr, d2S/dr2 } in closed form; r > 0.
  std::pair<double, double> log_slope_curvature(double r) const;

  // Solve S(r) = price on [kRateFloor, r_cap] by bisection; returns the
  // bracket midpoint once the bracket is narrower than tol. Prices at or
  // above S(kRateFloor) clamp to kRateFloor; prices at or below S(r_cap)
  // clamp to r_cap. price, r_cap, tol must be positive and finite.
  double inverse_log_slope(double price, double r_cap,
                           double tol = kDefaultSolverTol) const;

  // Rate at the utility's inflection point: b for sigmoidal, 0 for
  // logarithmic (concave everywhere, so the demand floor is zero).
  double inflection_rate() const;

  // S evaluated at r=b: a*d/(1-2d) + a/2. Sigmoidal only.
  double inflection_slope() const;

  // Steady-state price bound a*d/(1-d) + a/2. Sigmoidal only. Agrees with
  // inflection_slope() to within a*e^{-2ab}; inflection_slope() is the
  // larger of the two.
  double steady_price_bound() const;

 private:
  UtilityFunction() = default;

  Kind kind_ = Kind::Sigmoidal;
  double a_ = 0.0, b_ = 0.0;      // sigmoidal
  double k_ = 0.0, r_max_ = 0.0;  // logarithmic
};

}  // namespace ca
