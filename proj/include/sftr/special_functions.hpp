#pragma once

namespace sftr {

/// Mittag-Leffler function E_alpha(z) = sum_j z^j / Gamma(j alpha + 1) for
/// real z.
///
/// Evaluated by the power series in extended precision with compensated
/// summation. Accepts 0 < alpha <= 1 and |z| <= 4; throws std::domain_error
/// outside that range, and also when cancellation in the series would leave
/// fewer than about twelve correct digits (small alpha with large negative z).
double mittag_leffler(double alpha, double z);

}  // namespace sftr
