#include "dlo/likelihood.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dlo/error.hpp"

namespace dlo {

double bradford_likelihood(double x, double c) {
  require(c > 0.0, "Bradford shape parameter must be positive");
  require(x >= 0.0 && x <= 1.0, "Bradford argument must lie in [0, 1], got " + std::to_string(x));
  return c / (std::log1p(c) * (1.0 + c * x));
}

double bessel_i0(double x) {
  x = std::abs(x);
  if (x > 500.0) return std::exp(log_bessel_i0(x));
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 1000; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

double log_bessel_i0(double x) {
  x = std::abs(x);
  if (x <= 500.0) return std::log(bessel_i0(x));
  // I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k)
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 12; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= odd * odd / (k * 8.0 * x);
    sum += term;
  }
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
}

double log_von_mises(double theta, double m) {
  require(m > 0.0, "von Mises concentration must be positive");
  return m * std::cos(theta) - std::log(2.0 * std::numbers::pi) - log_bessel_i0(m);
}

double von_mises(double theta, double m) { return std::exp(log_von_mises(theta, m)); }

double wrap_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(radians, two_pi);  // [-pi, pi]
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

double edge_angle(Point2 from, Point2 to) {
  if (from == to) fail(ErrorCode::invalid_argument, "edge angle undefined for coincident points");
  const double a = std::atan2(to.y - from.y, to.x - from.x);
  return a == -std::numbers::pi ? std::numbers::pi : a;
}

double half_turn(double previous_edge, double next_edge) { return 0.5 * wrap_angle(previous_edge - next_edge); }

}  // namespace dlo
