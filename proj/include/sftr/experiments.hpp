#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sftr/fast_history.hpp"
#include "sftr/fem1d.hpp"
#include "sftr/time_stepping.hpp"

namespace sftr {

/// Test problems.
///
/// Ex1, Ex4  Omega = (0, pi), v = sin x,
///           f = (6 t^(3-a) / Gamma(4-a) + t^3) sin x,
///           u = (E_a(-t^a) + t^3) sin x. Ex4 defaults to the CN+fBDF2 scheme.
/// Ex2i, Ex3 Omega = (0, pi), v = sin x, f = 0, u = E_a(-t^a) sin x.
/// Ex2ii     Omega = (0, 1), v = indicator of (0, 1/2), f = 0; no closed form.
/// Scalar    the sin x mode of Ex1 on its own: lambda = 1, v = 1.
enum class Example { Ex1, Ex2i, Ex2ii, Ex3, Ex4, Scalar };

Example parse_example(const std::string& name);
std::string example_name(Example ex);

/// Domain, discrete problem and (when known) exact nodal values of one
/// example for a given fractional order and mesh.
struct ExampleSetup {
  std::optional<Mesh1D> mesh;  ///< empty for the scalar problem
  DiscreteProblem problem;
  /// t -> nodal interpolant of the exact solution; empty for Ex2ii.
  std::function<std::vector<double>(double)> exact;
};

/// Number of cells giving mesh width h (absolute length units) on the
/// example's domain.
int cells_for_width(Example ex, double h);

ExampleSetup make_example(Example ex, double alpha, int n_cells);

struct ExperimentSpec {
  Example example = Example::Ex1;
  std::vector<double> alphas{0.1, 0.5, 0.9};
  std::vector<double> thetas{0.1, 0.3, 0.5};
  std::vector<int> tau_exponents{5, 6, 7, 8, 9};  ///< tau = 2^-e, increasing e
  double h = 1e-3;                                ///< absolute mesh width
  int n_cells = 0;                                ///< overrides h when positive
  Scheme scheme = Scheme::Corrected;
  HistoryMode history = HistoryMode::Standard;
  FastConfig fast{};
  ShiftPolicy policy = ShiftPolicy::Stable;
  double t_eval = 0.5;
  int reference_exponent = 12;       ///< Ex2ii reference step 2^-e
  int reference_refine = 2;          ///< Ex2ii reference mesh is this many times finer
  double reference_theta = 0.3;      ///< Ex2ii reference uses the corrected scheme at this shift
  unsigned threads = 0;              ///< 0 picks the hardware concurrency

  int resolved_cells() const;
  /// Throws std::invalid_argument on an empty sweep, non-increasing
  /// exponents, or t_eval off the grid of some step.
  void validate() const;
};

struct RateRow {
  double alpha = 0.0;
  double theta = 0.0;
  std::vector<double> taus;
  std::vector<double> errors;
  std::vector<double> rates;  ///< rates[i] = log2(errors[i] / errors[i+1])
};

struct CellFailure {
  double alpha;
  double theta;
  double tau;
  std::string message;
};

struct RateTable {
  std::vector<RateRow> rows;  ///< sorted by (alpha, theta)
  std::vector<CellFailure> failures;
  int n_cells = 0;
  double h = 0.0;

  const RateRow* find(double alpha, double theta) const;
};

/// Error at t_eval for one (alpha, theta, tau) cell. Ex2ii needs the
/// reference solution's values restricted to the cell's mesh nodes.
double run_cell(const ExperimentSpec& spec, double alpha, double theta, int tau_exponent,
                const std::vector<double>* reference = nullptr);

/// Ex2ii reference for one alpha, restricted to the nodes of the measured mesh.
std::vector<double> reference_solution(const ExperimentSpec& spec, double alpha);

/// Runs the sweep over alphas x thetas x taus, cells concurrently, results
/// in deterministic (alpha, theta, tau) order. Failed cells are recorded
/// and left out of the rows.
RateTable run_convergence(const ExperimentSpec& spec);

RateTable run_example1(ExperimentSpec spec);
RateTable run_example2(ExperimentSpec spec);
RateTable run_example3(ExperimentSpec spec);
RateTable run_example4(ExperimentSpec spec);

/// CSV with header alpha,theta,tau,error,rate; the rate column is empty on
/// the coarsest step of each row. Numbers are written with 17 significant digits.
void write_rate_csv(std::ostream& out, const RateTable& table);

/// (t_n, error) over the whole run of Ex2i, for the behaviour as t -> 0.
std::vector<std::pair<double, double>> error_decay_series(double alpha, double theta, int n_steps,
                                                          int n_cells, HistoryMode history,
                                                          const FastConfig& fast = {});

/// Least-squares slope of log(error) against log(t) over t in [t_lo, t_hi].
double fit_loglog_slope(const std::vector<std::pair<double, double>>& series, double t_lo,
                        double t_hi);

struct StabilityReport {
  double theta = 0.0;
  std::vector<std::pair<double, double>> midpoint;  ///< (t_n, U^n at the domain midpoint)
  double initial_max = 0.0;
  double peak_max = 0.0;       ///< max over n of max|U^n| (infinite if the run blew up)
  bool unstable = false;       ///< non-finite, above the blow-up threshold, or > 10 x initial
  std::optional<Instability> instability;
};

/// Ex3 data with the corrected scheme over [0, t_final] in steps of tau.
StabilityReport run_stability(double alpha, double theta, double tau, double t_final, int n_cells);

struct FastAccuracyRow {
  double alpha;
  double theta;
  long long n;
  double exact;
  double fast;
  double abs_error;
};

/// Exact and quadrature weights for n in [n_min, n_max], each on the
/// smallest level whose lag window contains n.
std::vector<FastAccuracyRow> run_fast_accuracy(FastAlgorithm alg, const std::vector<double>& alphas,
                                               const std::vector<double>& thetas, long long n_min,
                                               long long n_max, int base = 5, int quad_half = 30);

struct TimingRow {
  HistoryMode mode;
  int n_steps;
  double wall_seconds;
  std::size_t history_entries_peak;
  std::size_t accumulator_updates;
  double max_rel_deviation;  ///< against the standard run; 0 for standard itself
};

/// Ex1 data on a fixed coarse mesh, T = 1, for every step count and mode.
/// Standard runs are always made (they provide the deviation baseline).
std::vector<TimingRow> run_fast_timing(double alpha, double theta, const std::vector<int>& n_steps,
                                       int n_cells, const std::vector<HistoryMode>& modes,
                                       const FastConfig& fast = {});

std::string history_mode_name(HistoryMode mode);
HistoryMode parse_history_mode(const std::string& name);
Scheme parse_scheme(const std::string& name);

/// Runs task(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace sftr
