#include "sftr/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sftr {

double mittag_leffler(double alpha, double z) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::domain_error("Mittag-Leffler order must lie in (0, 1]");
  if (!std::isfinite(z) || std::abs(z) > 4.0)
    throw std::domain_error("Mittag-Leffler argument outside |z| <= 4");
  if (z == 0.0) return 1.0;

  using ld = long double;
  const ld log_abs_z = std::log(static_cast<ld>(std::abs(z)));
  const bool negative = z < 0.0;

  // Kahan-compensated running sum
  ld sum = 1.0L;
  ld carry = 0.0L;
  ld largest = 1.0L;
  int small_run = 0;
  for (int j = 1; j < 100000; ++j) {
    const ld log_term = j * log_abs_z - std::lgamma(static_cast<ld>(j) * alpha + 1.0L);
    ld term = std::exp(log_term);
    if (negative && (j % 2 == 1)) term = -term;
    if (std::abs(term) > largest) largest = std::abs(term);

    const ld y = term - carry;
    const ld t = sum + y;
    carry = (t - sum) - y;
    sum = t;

    if (std::abs(term) < 1e-16L * (1.0L + std::abs(sum))) {
      if (++small_run == 3) break;
    } else {
      small_run = 0;
    }
  }

  const ld eps = std::numeric_limits<ld>::epsilon();
  if (largest * eps * 64.0L > 1e-12L * std::abs(sum))
    throw std::domain_error("Mittag-Leffler series too ill-conditioned for this (alpha, z)");
  return static_cast<double>(sum);
}

}  // namespace sftr
