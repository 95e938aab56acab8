#include <cmath>
#include <limits>

#include "roundtable/errors.hpp"
#include "roundtable/evaluation.hpp"

namespace roundtable::eval {

namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for the regularized incomplete beta function
// (modified Lentz algorithm).
double incomplete_beta_cf(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  constexpr int max_terms = 200000;

  auto numerator = [&](int n) {
    if (n % 2 == 0) {
      const double m = n / 2;
      return m * (b - m) * x / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
    }
    const double m = (n - 1) / 2;
    return -(a + m) * (a + b + m) * x / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
  };

  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double result = d;
  for (int n = 2; n <= max_terms; ++n) {
    const double num = numerator(n - 1);
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    result *= delta;
    if (std::fabs(delta - 1.0) < eps) break;
  }
  return result;
}

double regularized_incomplete_beta(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * incomplete_beta_cf(x, a, b) / a;
  }
  return 1.0 - std::exp(b * std::log(1.0 - x) + a * std::log(x) - log_beta(b, a)) *
                   incomplete_beta_cf(1.0 - x, b, a) / b;
}

}  // namespace

double student_t_cdf(double t, double degrees_of_freedom) {
  if (!(degrees_of_freedom > 0)) throw ValidationError("t distribution needs df > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double v = degrees_of_freedom;
  const double x = v / (t * t + v);
  const double tail = 0.5 * regularized_incomplete_beta(x, v / 2.0, 0.5);
  return t >= 0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(const std::vector<double>& deltas, double alpha) {
  const int n = static_cast<int>(deltas.size());
  if (n < 2) throw ValidationError("paired_t_test requires at least 2 samples");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");

  double mean = 0.0;
  for (double d : deltas) mean += d;
  mean /= n;

  double ss = 0.0;
  for (double d : deltas) ss += (d - mean) * (d - mean);
  const double variance = ss / (n - 1);

  TTestResult result;
  result.n = n;
  result.mean_delta = mean;
  result.alpha = alpha;

  if (variance == 0.0) {
    if (mean == 0.0) {
      result.t_statistic = 0.0;
      result.p_value = 1.0;
    } else {
      result.t_statistic = mean > 0 ? std::numeric_limits<double>::infinity()
                                    : -std::numeric_limits<double>::infinity();
      result.p_value = 0.0;
      result.degenerate = true;
    }
  } else {
    result.t_statistic = mean / std::sqrt(variance / n);
    const double df = n - 1;
    // Two-tailed p from the symmetric t distribution.
    result.p_value = 2.0 * student_t_cdf(-std::fabs(result.t_statistic), df);
    if (result.p_value > 1.0) result.p_value = 1.0;
  }
  result.significant = result.p_value <= alpha;
  return result;
}

}  // namespace roundtable::eval
