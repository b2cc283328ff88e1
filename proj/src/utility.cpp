// utility.cpp - closed forms for U, log U, S, S', S'' and the bisection
// inverse of S.
//
// Sigmoidal identities used throughout (q = 1 - e^{-ar}, s+ = sigma(a(r-b)),
// s- = sigma(a(b-r)), sigma the standard logistic):
//   U(r)      = q * s+
//   log U(r)  = log(1 - e^{-ar}) - softplus(a(b-r))
//   S(r)      = a * (1 + e^{-ab}) * s- / q
//   S'(r)     = -a^2 * [ e^{-ar}/q^2 + s+ s- ]
//   S''(r)    =  a^3 * [ e^{-ar}(1+e^{-ar})/q^3 + s+ s- (s+ - s-) ]
// Every bracketed sum is a sum of same-sign terms except S'', whose two terms
// genuinely compete near its sign changes.

#include "ca/utility.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ca {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x)
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// log(1 - e^{-x}) for x > 0, accurate in both tails.
double log1mexp(double x) {
  constexpr double kLn2 = 0.6931471805599453;
  if (x > kLn2) return std::log1p(-std::exp(-x));
  return std::log(-std::expm1(-x));
}

void require_finite_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0)
    throw std::invalid_argument(std::string(name) +
                                " must be finite and positive");
}

}  // namespace

UtilityFunction UtilityFunction::sigmoidal(double a, double b) {
  require_finite_positive(a, "a");
  require_finite_positive(b, "b");
  UtilityFunction u;
  u.kind_ = Kind::Sigmoidal;
  u.a_ = a;
  u.b_ = b;
  return u;
}

UtilityFunction UtilityFunction::logarithmic(double k, double r_max) {
  require_finite_positive(k, "k");
  require_finite_positive(r_max, "r_max");
  UtilityFunction u;
  u.kind_ = Kind::Logarithmic;
  u.k_ = k;
  u.r_max_ = r_max;
  return u;
}

double UtilityFunction::a() const {
  if (kind_ != Kind::Sigmoidal) throw std::logic_error("a(): not sigmoidal");
  return a_;
}

double UtilityFunction::b() const {
  if (kind_ != Kind::Sigmoidal) throw std::logic_error("b(): not sigmoidal");
  return b_;
}

double UtilityFunction::c() const {
  if (kind_ != Kind::Sigmoidal) throw std::logic_error("c(): not sigmoidal");
  return 1.0 + std::exp(-a_ * b_);
}

double UtilityFunction::d() const {
  if (kind_ != Kind::Sigmoidal) throw std::logic_error("d(): not sigmoidal");
  const double e = std::exp(-a_ * b_);
  return e / (1.0 + e);
}

double UtilityFunction::k() const {
  if (kind_ != Kind::Logarithmic)
    throw std::logic_error("k(): not logarithmic");
  return k_;
}

double UtilityFunction::r_max() const {
  if (kind_ != Kind::Logarithmic)
    throw std::logic_error("r_max(): not logarithmic");
  return r_max_;
}

double UtilityFunction::evaluate(double r) const {
  if (!std::isfinite(r) || r < 0.0)
    throw std::domain_error("evaluate: rate must be finite and >= 0");
  if (kind_ == Kind::Sigmoidal)
    return -std::expm1(-a_ * r) * sigmoid(a_ * (r - b_));
  return std::log1p(k_ * r) / std::log1p(k_ * r_max_);
}

double UtilityFunction::log_evaluate(double r) const {
  if (!std::isfinite(r) || r <= 0.0)
    throw std::domain_error("log_evaluate: rate must be finite and > 0");
  if (kind_ == Kind::Sigmoidal)
    return log1mexp(a_ * r) - softplus(a_ * (b_ - r));
  return std::log(std::log1p(k_ * r)) - std::log(std::log1p(k_ * r_max_));
}

double UtilityFunction::log_slope(double r) const {
  if (!std::isfinite(r) || r <= 0.0)
    throw std::domain_error("log_slope: rate must be finite and > 0");
  if (kind_ == Kind::Sigmoidal) {
    const double q = -std::expm1(-a_ * r);
    return a_ * (1.0 + std::exp(-a_ * b_)) * sigmoid(a_ * (b_ - r)) / q;
  }
  const double A = 1.0 + k_ * r;
  const double L = std::log1p(k_ * r);
  return k_ / (A * L);
}

std::pair<double, double> UtilityFunction::log_slope_curvature(
    double r) const {
  if (!std::isfinite(r) || r <= 0.0)
    throw std::domain_error("log_slope_curvature: rate must be finite and > 0");
  if (kind_ == Kind::Sigmoidal) {
    const double e = std::exp(-a_ * r);
    const double q = -std::expm1(-a_ * r);
    const double sp = sigmoid(a_ * (r - b_));
    const double sm = sigmoid(a_ * (b_ - r));
    const double a2 = a_ * a_;
    const double first = -a2 * (e / (q * q) + sp * sm);
    const double second =
        a2 * a_ * (e * (1.0 + e) / (q * q * q) + sp * sm * (sp - sm));
    return {first, second};
  }
  const double A = 1.0 + k_ * r;
  const double L = std::log1p(k_ * r);
  const double k2 = k_ * k_;
  const double AL = A * L;
  const double first = -k2 * (L + 1.0) / (AL * AL);
  const double second =
      k2 * k_ * (2.0 * L * L + 3.0 * L + 2.0) / (AL * AL * AL);
  return {first, second};
}

double UtilityFunction::inverse_log_slope(double price, double r_cap,
                                          double tol) const {
  if (!std::isfinite(price) || price <= 0.0)
    throw std::domain_error("inverse_log_slope: price must be > 0");
  if (!std::isfinite(r_cap) || r_cap <= kRateFloor)
    throw std::domain_error("inverse_log_slope: r_cap must exceed the floor");
  if (!std::isfinite(tol) || tol <= 0.0)
    throw std::domain_error("inverse_log_slope: tol must be > 0");

  double lo = kRateFloor;
  double hi = r_cap;
  if (price >= log_slope(lo)) return lo;
  if (price <= log_slope(hi)) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at float resolution
    (log_slope(mid) > price ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double UtilityFunction::inflection_rate() const {
  return kind_ == Kind::Sigmoidal ? b_ : 0.0;
}

double UtilityFunction::inflection_slope() const {
  const double dd = d();  // kind check
  return a_ * dd / (1.0 - 2.0 * dd) + 0.5 * a_;
}

double UtilityFunction::steady_price_bound() const {
  const double dd = d();  // kind check
  return a_ * dd / (1.0 - dd) + 0.5 * a_;
}

}  // namespace ca
