#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sftr {

/// Admissible range for the shift parameter.
///
/// `Stable` is the range the second-order schemes are built for, [0, 1/2].
/// `AllowUnstable` admits any finite shift >= 0. The generating function is
/// still well defined there, but the time-stepping schemes lose stability
/// past 1/2.
enum class ShiftPolicy { Stable, AllowUnstable };

/// Fractional order, shift, step size and step count of one time grid.
struct SchemeParams {
  double alpha = 0.5;
  double theta = 0.25;
  double tau = 1.0;
  int n_steps = 1;

  /// Grid with `n_steps` uniform steps over [0, horizon].
  static SchemeParams over_horizon(double alpha, double theta, double horizon, int n_steps);

  /// Throws std::domain_error unless 0 < alpha <= 1, theta is admissible,
  /// tau > 0 and n_steps >= 1.
  void validate(ShiftPolicy policy = ShiftPolicy::Stable) const;

  /// (2a/(a+2t))^a, the leading weight of the shifted trapezoidal rule.
  double mu0() const;
  /// (a-2t)/(a+2t), the ratio driving the weight recursion.
  double mu1() const;
};

enum class WeightKind { Sftr, Fbdf2, CnFbdf2 };

/// Convolution weights omega_0..omega_K of one generating function.
///
/// Immutable after construction; safe to share between threads.
class WeightTable {
 public:
  WeightTable(WeightKind kind, double alpha, double theta, std::vector<double> weights);

  WeightKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  double theta() const noexcept { return theta_; }
  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t k) const { return weights_[k]; }
  double at(std::size_t k) const { return weights_.at(k); }
  std::span<const double> values() const noexcept { return weights_; }

 private:
  WeightKind kind_;
  double alpha_;
  double theta_;
  std::vector<double> weights_;
};

/// Weights of the shifted fractional trapezoidal rule, generating function
///   omega(xi) = [(1 - xi) / (0.5 (1 + xi) + (theta/alpha)(1 - xi))]^alpha,
/// produced by the three-term recursion in O(k_max).
WeightTable sftr_weights(const SchemeParams& params, std::size_t k_max,
                         ShiftPolicy policy = ShiftPolicy::Stable);

/// Same weights as `sftr_weights`, computed by expanding the numerator and
/// denominator of the generating function separately, raising each to its
/// power with `power_series_pow` and convolving. O(k_max^2); meant as an
/// independent cross-check of the recursion.
WeightTable series_weights(const SchemeParams& params, std::size_t k_max,
                           ShiftPolicy policy = ShiftPolicy::Stable);

/// Taylor coefficients of (3/2 - 2 xi + xi^2/2)^alpha (fractional BDF2).
WeightTable fbdf2_weights(double alpha, std::size_t k_max);

/// Taylor coefficients of (1 - theta + theta xi) (3/2 - 2 xi + xi^2/2)^alpha.
WeightTable cn_fbdf2_weights(double alpha, double theta, std::size_t k_max);

/// Coefficients c_0..c_{k_max} of p(xi)^exponent for a power series p with
/// p_0 > 0, via the J.C.P. Miller recurrence
///   c_k = 1/(k p_0) sum_{j=1}^{k} (exponent j - (k - j)) p_j c_{k-j}.
std::vector<double> power_series_pow(std::span<const double> base, double exponent,
                                     std::size_t k_max);

}  // namespace sftr
