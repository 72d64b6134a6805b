#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sftr/fast_history.hpp"
#include "sftr/fem1d.hpp"
#include "sftr/weights.hpp"

namespace sftr {

/// Fully discrete schemes.
///
/// NoCorrection  the shifted trapezoidal scheme with load -A v + M f^{n-theta}
///               at every step.
/// Corrected     same, except the first step's load is
///               -(3/2 - theta) A v + M (f^0 / 2 + (1 - theta) f^1).
/// CrankNicolson NoCorrection at theta = 1/2 (theta is forced to 1/2).
/// CnFbdf2       fractional BDF2 weights shifted by (1 - theta + theta xi),
///               with the Corrected first-step load.
enum class Scheme { NoCorrection, Corrected, CrankNicolson, CnFbdf2 };

/// Mass and stiffness matrices of the spatial operator, so that the
/// semidiscrete problem reads M w' + A w = M f. A scalar problem
/// u' = -lambda u + f is the 1x1 case M = [1], A = [lambda].
struct SpatialSystem {
  TriDiag mass;
  TriDiag stiffness;

  static SpatialSystem fem(const Mesh1D& mesh);
  static SpatialSystem scalar(double lambda);

  std::size_t dof() const noexcept { return mass.size(); }
};

/// Time -> coefficients of f_h(t) = P_h f(t). An empty function means f = 0.
using SourceSampler = std::function<std::vector<double>(double)>;

struct DiscreteProblem {
  SpatialSystem system;
  std::vector<double> v;  ///< coefficients of the projected initial datum
  SourceSampler source;
  SchemeParams params;
  Scheme scheme = Scheme::Corrected;
};

enum class HistoryMode { Standard, FastI, FastII };

struct SolveOptions {
  HistoryMode history = HistoryMode::Standard;
  FastConfig fast{};
  ShiftPolicy policy = ShiftPolicy::Stable;
  bool keep_levels = true;       ///< store every U^n (otherwise only U^0 and U^N)
  double blowup = 1e12;          ///< abort once max|W^n| exceeds this
  /// Called with (n, U^n) after every step, n >= 1.
  std::function<void(int, std::span<const double>)> observer;
};

struct Instability {
  int step = 0;
  double norm = 0.0;
  std::string reason;
};

struct SolutionHistory {
  std::vector<double> times;                 ///< t_n for every stored level
  std::vector<std::vector<double>> levels;   ///< U^n
  std::vector<double> linf_norms;            ///< max_i |U^n_i| for n = 0..steps taken
  std::optional<Instability> instability;
  int steps_taken = 0;
  std::size_t peak_history_entries = 0;      ///< retained history vectors at the peak
  std::size_t accumulator_updates = 0;
};

/// Weights of the problem's scheme, omega_0..omega_{k_max}.
WeightTable scheme_weights(const DiscreteProblem& problem, std::size_t k_max,
                           ShiftPolicy policy = ShiftPolicy::Stable);

/// tau^-a omega_0 M + (1 - theta) A. Throws std::invalid_argument when the
/// table does not belong to the scheme or the matrices disagree in size.
TriDiag step_system_matrix(const DiscreteProblem& problem, const WeightTable& weights);

/// Right-hand side contribution of the data at step n >= 1 (without the
/// history and the -theta A W^{n-1} term).
std::vector<double> step_load(const DiscreteProblem& problem, int n);

/// Advances the shifted unknown W^n = U^n - v one step at a time.
class TimeStepper {
 public:
  TimeStepper(DiscreteProblem problem, SolveOptions options = {});
  ~TimeStepper();
  TimeStepper(TimeStepper&&) noexcept;
  TimeStepper& operator=(TimeStepper&&) noexcept;

  /// Index of the last completed step (0 before the first call).
  int step() const noexcept { return n_; }
  const DiscreteProblem& problem() const noexcept { return problem_; }
  /// W^n of the last completed step.
  std::span<const double> current() const noexcept { return w_; }
  /// U^n = W^n + v of the last completed step.
  std::vector<double> solution() const;

  /// Computes W^{n+1} and returns it.
  std::span<const double> advance();
  /// Accepts `w` as W^{n+1} instead of solving for it.
  void inject(std::span<const double> w);

  /// tau^-a sum_{k=1}^{n} omega_k W^{n+1-k} for the next step (W^0 = 0).
  std::vector<double> history_term() const;

  std::size_t peak_history_entries() const;
  std::size_t accumulator_updates() const;

 private:
  void record(std::span<const double> w);

  DiscreteProblem problem_;
  SolveOptions options_;
  WeightTable weights_;
  std::unique_ptr<TriDiagFactor> factor_;
  std::unique_ptr<FastHistory> fast_;
  std::vector<std::vector<double>> past_;  // W^1..W^n in standard mode
  std::vector<double> w_;
  double tau_pow_ = 1.0;
  int n_ = 0;
};

/// Runs all N steps. A non-finite W^n or max|W^n| > options.blowup stops the
/// run and fills `instability` instead of throwing.
SolutionHistory solve(const DiscreteProblem& problem, const SolveOptions& options = {});

/// `solve` for a CnFbdf2 problem; throws std::invalid_argument otherwise.
SolutionHistory solve_cn_fbdf2(const DiscreteProblem& problem, const SolveOptions& options = {});

/// Discrete L2 error (sqrt(e^T M e)) at every stored level.
std::vector<std::pair<double, double>> error_series(
    const SolutionHistory& history, const SpatialSystem& system,
    const std::function<std::vector<double>(double)>& exact);

/// log2(e_coarse / e_fine). Throws std::domain_error unless both are positive.
double observed_rate(double e_coarse, double e_fine);

}  // namespace sftr
