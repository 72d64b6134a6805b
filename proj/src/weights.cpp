#include "sftr/weights.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sftr {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::domain_error("fractional order must lie in (0, 1], got " + std::to_string(alpha));
}

void check_theta(double theta, ShiftPolicy policy) {
  const bool ok = policy == ShiftPolicy::Stable ? (theta >= 0.0 && theta <= 0.5)
                                                : (theta >= 0.0 && std::isfinite(theta));
  if (!ok) throw std::domain_error("shift parameter out of range, got " + std::to_string(theta));
}

}  // namespace

SchemeParams SchemeParams::over_horizon(double alpha, double theta, double horizon, int n_steps) {
  if (!(horizon > 0.0)) throw std::domain_error("time horizon must be positive");
  if (n_steps < 1) throw std::domain_error("step count must be positive");
  return SchemeParams{alpha, theta, horizon / n_steps, n_steps};
}

void SchemeParams::validate(ShiftPolicy policy) const {
  check_alpha(alpha);
  check_theta(theta, policy);
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::domain_error("time step must be positive");
  if (n_steps < 1) throw std::domain_error("step count must be positive");
}

double SchemeParams::mu0() const { return std::pow(2.0 * alpha / (alpha + 2.0 * theta), alpha); }

double SchemeParams::mu1() const { return (alpha - 2.0 * theta) / (alpha + 2.0 * theta); }

WeightTable::WeightTable(WeightKind kind, double alpha, double theta, std::vector<double> weights)
    : kind_(kind), alpha_(alpha), theta_(theta), weights_(std::move(weights)) {}

WeightTable sftr_weights(const SchemeParams& params, std::size_t k_max, ShiftPolicy policy) {
  check_alpha(params.alpha);
  check_theta(params.theta, policy);
  const double a = params.alpha;
  const double t = params.theta;
  const double c = 2.0 * a / (a + 2.0 * t);

  std::vector<double> w(k_max + 1);
  w[0] = std::pow(c, a);
  if (k_max >= 1) w[1] = -a * std::pow(c, a + 1.0);
  const double lead = 2.0 * t / a;
  const double tail = (a - 2.0 * t) / (2.0 * a);
  for (std::size_t k = 2; k <= k_max; ++k) {
    const double kd = static_cast<double>(k);
    w[k] = c / kd * ((lead * (kd - 1.0) - a) * w[k - 1] + tail * (kd - 2.0) * w[k - 2]);
  }
  return WeightTable(WeightKind::Sftr, a, t, std::move(w));
}

WeightTable series_weights(const SchemeParams& params, std::size_t k_max, ShiftPolicy policy) {
  check_alpha(params.alpha);
  check_theta(params.theta, policy);
  const double a = params.alpha;
  const double r = params.theta / a;

  // numerator 1 - xi, denominator (1/2 + r) + (1/2 - r) xi
  const double num[] = {1.0, -1.0};
  const double den[] = {0.5 + r, 0.5 - r};
  const auto up = power_series_pow(num, a, k_max);
  const auto down = power_series_pow(den, -a, k_max);

  std::vector<double> w(k_max + 1, 0.0);
  for (std::size_t k = 0; k <= k_max; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j <= k; ++j) s += up[j] * down[k - j];
    w[k] = s;
  }
  return WeightTable(WeightKind::Sftr, a, params.theta, std::move(w));
}

WeightTable fbdf2_weights(double alpha, std::size_t k_max) {
  check_alpha(alpha);
  const double poly[] = {1.5, -2.0, 0.5};
  return WeightTable(WeightKind::Fbdf2, alpha, 0.0, power_series_pow(poly, alpha, k_max));
}

WeightTable cn_fbdf2_weights(double alpha, double theta, std::size_t k_max) {
  check_alpha(alpha);
  check_theta(theta, ShiftPolicy::Stable);
  const auto base = fbdf2_weights(alpha, k_max);
  std::vector<double> w(k_max + 1);
  w[0] = (1.0 - theta) * base[0];
  for (std::size_t k = 1; k <= k_max; ++k) w[k] = (1.0 - theta) * base[k] + theta * base[k - 1];
  return WeightTable(WeightKind::CnFbdf2, alpha, theta, std::move(w));
}

std::vector<double> power_series_pow(std::span<const double> base, double exponent,
                                     std::size_t k_max) {
  if (base.empty() || !(base[0] > 0.0))
    throw std::domain_error("power series needs a positive constant term");
  std::vector<double> c(k_max + 1, 0.0);
  c[0] = std::pow(base[0], exponent);
  const std::size_t degree = base.size() - 1;
  for (std::size_t k = 1; k <= k_max; ++k) {
    double s = 0.0;
    const std::size_t top = k < degree ? k : degree;
    for (std::size_t j = 1; j <= top; ++j) {
      const double factor = exponent * static_cast<double>(j) - static_cast<double>(k - j);
      s += factor * base[j] * c[k - j];
    }
    c[k] = s / (static_cast<double>(k) * base[0]);
  }
  return c;
}

}  // namespace sftr
