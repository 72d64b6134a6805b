#pragma once

#include <complex>
#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "sftr/weights.hpp"

namespace sftr {

using cplx = std::complex<double>;

/// Contour representations of the weights.
///
/// I  writes tau^-a omega(xi) through F(lambda) = lambda^a and the discrete
///    kernel of the trapezoidal symbol.
/// II writes it through F(lambda) = [1/lambda + (theta/alpha - 1/2) tau]^-a
///    and the backward Euler kernel 1/(1 - xi - z).
enum class FastAlgorithm { I, II };

/// Talbot contour shape constants.
namespace talbot {
inline constexpr double kappa = 0.5653;
inline constexpr double nu = 0.6443;
inline constexpr double iota = -0.4814;
}  // namespace talbot

struct FastConfig {
  int base = 5;             ///< B, geometric growth of the history blocks
  int quad_half = 30;       ///< K_C, nodes j = -K_C..K_C per level
  int near_levels = 2;      ///< levels handled with exact weights
  bool conjugate_symmetry = true;  ///< sum only j >= 0 and take twice the real part
};

/// lambda(t, s) = s ((t cot t + i kappa t) nu + iota), |t| < pi.
cplx talbot_point(double theta, double scale);

/// d lambda / d t = s nu (cot t - t / sin^2 t + i kappa).
cplx talbot_derivative(double theta, double scale);

/// F^(i)(lambda), principal branch. Throws std::domain_error at a singular argument.
cplx kernel_F(FastAlgorithm alg, cplx lambda, const SchemeParams& params);

/// Pair (r(z), q(z)) with e_n(z) = r(z)^n q(z) for n >= 1.
struct KernelFactors {
  cplx r;
  cplx q;
};

/// r and q of the chosen representation. Throws std::domain_error when z is
/// within 1e-14 of a pole.
KernelFactors kernel_rq(FastAlgorithm alg, cplx z, const SchemeParams& params);

/// e_n(z) = r(z)^n q(z), n >= 1.
cplx kernel_e(FastAlgorithm alg, int n, cplx z, const SchemeParams& params);

/// Level containing the lag window [B^(l-1), 2 B^l - 2] (in steps).
struct TalbotLevel {
  int level = 1;
  int base = 5;
  int quad_half = 30;
  double t_right = 0.0;          ///< (2 B^l - 2) tau
  std::vector<cplx> nodes;       ///< lambda_j, j = -K..K stored at j + K
  std::vector<cplx> weights;     ///< lambda'(theta_j) / (2 i (K + 1))

  static TalbotLevel make(int level, int base, int quad_half, double tau);

  long long min_lag() const;
  long long max_lag() const;
  cplx node(int j) const { return nodes[static_cast<std::size_t>(j + quad_half)]; }
  cplx weight(int j) const { return weights[static_cast<std::size_t>(j + quad_half)]; }
};

/// Smallest level whose lag window contains n.
int level_for_lag(long long n, int base);

/// Result of one quadrature approximation of a weight.
struct FastWeight {
  double value;
  double imag_residue;
};

/// tau^(a+1) sum_j w_j e_n(tau lambda_j) F(lambda_j) on the given level.
/// Throws std::domain_error if n is outside the level's lag window.
FastWeight fast_weight(long long n, const TalbotLevel& level, FastAlgorithm alg,
                       const SchemeParams& params);

/// Block boundaries n = b_0 > b_1 > ... > b_L = 0. Block l is the index
/// range [b_l, b_{l-1} - 1]; every lag n - k within it lies in
/// [B^(l-1), 2 B^l - 2]. The interior boundaries are
/// b_l = max(0, (floor(n / B^l) - 1) B^l + 1).
std::vector<long long> block_decomposition(long long n, int base);

/// One accumulator step y <- r y + tau q w (applied per node and per dof).
inline cplx update_accumulator(cplx y, double w, cplx r, cplx q, double tau) {
  return r * y + tau * q * w;
}

/// History of the shifted unknown W^1, W^2, ... (W^0 = 0) with O(log N)
/// storage, returning
///   tau^-a sum_{k=1}^{n-1} omega_{n-k} W^k
/// for the next step n. The newest entries sit in an exactly weighted near
/// field; older blocks are represented by per-node complex accumulators on
/// their own Talbot contour.
class FastHistory {
 public:
  /// `params.n_steps` is the horizon: every level that can become active
  /// before it starts accumulating at once.
  FastHistory(FastAlgorithm alg, const SchemeParams& params, FastConfig config, std::size_t dof);

  /// Appends W^k with k = entries() + 1, k <= horizon.
  void push(std::span<const double> w);

  /// Writes the history term for step n = entries() + 1 <= horizon into `out`.
  /// Returns the largest imaginary part of the far-field sum relative to
  /// its largest real part when all 2K+1 nodes are stored, and 0 under
  /// conjugate symmetry (the imaginary part is then discarded by design).
  double evaluate(std::span<double> out) const;

  std::size_t entries() const noexcept { return count_; }
  std::size_t dof() const noexcept { return dof_; }
  /// Raw vectors kept for the near field plus complex accumulator vectors.
  std::size_t retained_vectors() const;
  std::size_t peak_retained_vectors() const noexcept { return peak_retained_; }
  /// Number of accumulator vector updates performed so far.
  std::size_t accumulator_updates() const noexcept { return updates_; }
  std::size_t far_level_count() const noexcept { return levels_.size(); }
  /// True once some far level contributes to the next step.
  bool far_field_active() const;

 private:
  struct FarLevel {
    int level = 0;
    long long sub_len = 0;          // B^(level-1)
    std::size_t nodes = 0;          // number of j values stored
    std::vector<cplx> coef;         // w_j F_j, doubled for j > 0 under symmetry
    std::vector<cplx> r;
    std::vector<cplx> q;
    std::vector<cplx> r_sub;        // r_j^sub_len
    std::vector<cplx> current;      // block [first, appended) ending at appended*sub_len
    std::vector<cplx> next;         // same but starting B sub-blocks later
    std::vector<cplx> done;         // completed sub-block awaiting append
    std::vector<cplx> filling;      // sub-block being filled
    std::vector<cplx> power;        // r_j^d, d = n - appended*sub_len
    long long appended = 0;         // sub-blocks 0..appended-1 are past the near field
    long long dropped = 0;          // first sub-block of the current block
    long long filled = 0;           // entries in `filling`
    long long last_entry = 0;       // newest entry appended before the horizon
  };

  void advance_boundaries();

  FastAlgorithm alg_;
  SchemeParams params_;
  FastConfig config_;
  std::size_t dof_;
  std::vector<double> near_weights_;       // exact omega_0..omega_{2B^M - 2}
  std::deque<std::vector<double>> near_;   // raw entries, oldest first
  long long near_first_ = 1;               // index of near_.front()
  std::vector<FarLevel> levels_;
  std::size_t count_ = 0;
  std::size_t peak_retained_ = 0;
  std::size_t updates_ = 0;
  double tau_pow_ = 1.0;                   // tau^-alpha
};

}  // namespace sftr
