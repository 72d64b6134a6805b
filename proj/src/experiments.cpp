#include "sftr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "sftr/special_functions.hpp"

namespace sftr {

namespace {

constexpr double kPi = std::numbers::pi;

bool smooth_example(Example ex) { return ex != Example::Ex2ii; }

double domain_length(Example ex) { return ex == Example::Ex2ii ? 1.0 : kPi; }

bool has_source(Example ex) {
  return ex == Example::Ex1 || ex == Example::Ex4 || ex == Example::Scalar;
}

double source_amplitude(double alpha, double t) {
  return 6.0 * std::pow(t, 3.0 - alpha) / std::tgamma(4.0 - alpha) + t * t * t;
}

double exact_amplitude(Example ex, double alpha, double t) {
  const double relax = t == 0.0 ? 1.0 : mittag_leffler(alpha, -std::pow(t, alpha));
  return has_source(ex) ? relax + t * t * t : relax;
}

std::vector<double> scaled(const std::vector<double>& x, double c) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = c * x[i];
  return y;
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

int steps_for(double t, int exponent) {
  const double n = std::ldexp(t, exponent);
  const double rounded = std::round(n);
  if (rounded < 1.0 || std::abs(n - rounded) > 1e-9 * std::max(1.0, n))
    throw std::invalid_argument("evaluation time is not on the grid of step 2^-" + std::to_string(exponent));
  return static_cast<int>(rounded);
}

}  // namespace

Example parse_example(const std::string& name) {
  static const std::map<std::string, Example> names = {
      {"ex1", Example::Ex1},   {"ex2i", Example::Ex2i}, {"ex2ii", Example::Ex2ii},
      {"ex3", Example::Ex3},   {"ex4", Example::Ex4},   {"scalar", Example::Scalar}};
  const auto it = names.find(name);
  if (it == names.end()) throw std::invalid_argument("unknown problem '" + name + "'");
  return it->second;
}

std::string example_name(Example ex) {
  switch (ex) {
    case Example::Ex1: return "ex1";
    case Example::Ex2i: return "ex2i";
    case Example::Ex2ii: return "ex2ii";
    case Example::Ex3: return "ex3";
    case Example::Ex4: return "ex4";
    case Example::Scalar: return "scalar";
  }
  return "?";
}

int cells_for_width(Example ex, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("mesh width must be positive");
  return std::max(2, static_cast<int>(std::lround(domain_length(ex) / h)));
}

ExampleSetup make_example(Example ex, double alpha, int n_cells) {
  ExampleSetup setup;
  DiscreteProblem& p = setup.problem;
  p.params.alpha = alpha;
  p.scheme = ex == Example::Ex4 ? Scheme::CnFbdf2 : Scheme::Corrected;

  if (ex == Example::Scalar) {
    p.system = SpatialSystem::scalar(1.0);
    p.v = {1.0};
    p.source = [alpha](double t) { return std::vector<double>{source_amplitude(alpha, t)}; };
    setup.exact = [alpha](double t) { return std::vector<double>{exact_amplitude(Example::Scalar, alpha, t)}; };
    return setup;
  }

  const Mesh1D mesh(0.0, domain_length(ex), n_cells);
  setup.mesh = mesh;
  p.system = SpatialSystem::fem(mesh);

  if (!smooth_example(ex)) {
    p.v = l2_project(mesh, IntervalIndicator{0.0, 0.5}).coeffs;
    return setup;
  }

  const auto sine = [](double x) { return std::sin(x); };
  p.v = ritz_project(mesh, RitzDatum{[](double x) { return -std::sin(x); }}).coeffs;
  const auto nodal = interpolate(mesh, sine);
  if (has_source(ex)) {
    const auto projected = l2_project(mesh, SmoothFunction{sine}).coeffs;
    p.source = [alpha, projected](double t) { return scaled(projected, source_amplitude(alpha, t)); };
  }
  setup.exact = [ex, alpha, nodal](double t) { return scaled(nodal, exact_amplitude(ex, alpha, t)); };
  return setup;
}

int ExperimentSpec::resolved_cells() const {
  return n_cells > 0 ? n_cells : cells_for_width(example, h);
}

void ExperimentSpec::validate() const {
  if (alphas.empty() || thetas.empty() || tau_exponents.empty())
    throw std::invalid_argument("empty parameter sweep");
  for (std::size_t i = 1; i < tau_exponents.size(); ++i)
    if (tau_exponents[i] <= tau_exponents[i - 1])
      throw std::invalid_argument("step sizes must be strictly decreasing");
  for (int e : tau_exponents) steps_for(t_eval, e);
  if (example == Example::Ex2ii) {
    if (reference_exponent < tau_exponents.back() + 3)
      throw std::invalid_argument("reference step must be at least 8 times finer than every run");
    if (reference_refine < 2) throw std::invalid_argument("reference mesh must be strictly finer");
    steps_for(t_eval, reference_exponent);
  }
}

const RateRow* RateTable::find(double alpha, double theta) const {
  for (const auto& row : rows)
    if (std::abs(row.alpha - alpha) < 1e-12 && std::abs(row.theta - theta) < 1e-12) return &row;
  return nullptr;
}

std::vector<double> reference_solution(const ExperimentSpec& spec, double alpha) {
  if (spec.example != Example::Ex2ii) throw std::invalid_argument("only Ex2ii uses a reference run");
  const int coarse = spec.resolved_cells();
  auto setup = make_example(Example::Ex2ii, alpha, coarse * spec.reference_refine);
  setup.problem.scheme = Scheme::Corrected;
  setup.problem.params = SchemeParams{alpha, spec.reference_theta, std::ldexp(1.0, -spec.reference_exponent),
                                      steps_for(spec.t_eval, spec.reference_exponent)};
  SolveOptions options;
  options.keep_levels = false;
  const auto run = solve(setup.problem, options);
  if (run.instability) throw std::runtime_error("reference run became unstable");
  const auto& fine = run.levels.back();
  std::vector<double> restricted(static_cast<std::size_t>(coarse - 1));
  for (std::size_t k = 0; k < restricted.size(); ++k)
    restricted[k] = fine[(k + 1) * static_cast<std::size_t>(spec.reference_refine) - 1];
  return restricted;
}

double run_cell(const ExperimentSpec& spec, double alpha, double theta, int tau_exponent,
                const std::vector<double>* reference) {
  auto setup = make_example(spec.example, alpha, spec.resolved_cells());
  auto& p = setup.problem;
  p.scheme = spec.example == Example::Ex4 ? Scheme::CnFbdf2 : spec.scheme;
  p.params = SchemeParams{alpha, theta, std::ldexp(1.0, -tau_exponent), steps_for(spec.t_eval, tau_exponent)};

  SolveOptions options;
  options.history = spec.history;
  options.fast = spec.fast;
  options.policy = spec.policy;
  options.keep_levels = false;
  const auto run = solve(p, options);
  if (run.instability) throw std::runtime_error("run became unstable at step " + std::to_string(run.instability->step));

  std::vector<double> target;
  if (setup.exact) {
    target = setup.exact(spec.t_eval);
  } else {
    if (!reference) throw std::invalid_argument("this example needs a reference solution");
    target = *reference;
  }
  SolutionHistory last;
  last.times = {spec.t_eval};
  last.levels = {run.levels.back()};
  return error_series(last, p.system, [&](double) { return target; }).front().second;
}

RateTable run_convergence(const ExperimentSpec& spec) {
  spec.validate();
  RateTable table;
  table.n_cells = spec.resolved_cells();
  table.h = domain_length(spec.example) / table.n_cells;

  std::vector<double> alphas = spec.alphas;
  std::vector<double> thetas = spec.thetas;
  std::sort(alphas.begin(), alphas.end());
  std::sort(thetas.begin(), thetas.end());

  std::vector<std::vector<double>> refs(alphas.size());
  std::vector<std::string> ref_errors(alphas.size());
  if (spec.example == Example::Ex2ii) {
    parallel_for(alphas.size(), spec.threads, [&](std::size_t a) {
      try {
        refs[a] = reference_solution(spec, alphas[a]);
      } catch (const std::exception& e) {
        ref_errors[a] = e.what();
      }
    });
  }

  const std::size_t n_tau = spec.tau_exponents.size();
  const std::size_t n_cells = alphas.size() * thetas.size() * n_tau;
  std::vector<double> errors(n_cells, 0.0);
  std::vector<std::string> messages(n_cells);
  parallel_for(n_cells, spec.threads, [&](std::size_t idx) {
    const std::size_t a = idx / (thetas.size() * n_tau);
    const std::size_t t = (idx / n_tau) % thetas.size();
    const std::size_t e = idx % n_tau;
    try {
      if (!ref_errors[a].empty()) throw std::runtime_error("reference failed: " + ref_errors[a]);
      errors[idx] = run_cell(spec, alphas[a], thetas[t], spec.tau_exponents[e],
                             spec.example == Example::Ex2ii ? &refs[a] : nullptr);
    } catch (const std::exception& ex) {
      messages[idx] = ex.what();
    }
  });

  for (std::size_t a = 0; a < alphas.size(); ++a) {
    for (std::size_t t = 0; t < thetas.size(); ++t) {
      RateRow row{alphas[a], thetas[t], {}, {}, {}};
      bool ok = true;
      for (std::size_t e = 0; e < n_tau; ++e) {
        const std::size_t idx = (a * thetas.size() + t) * n_tau + e;
        const double tau = std::ldexp(1.0, -spec.tau_exponents[e]);
        if (!messages[idx].empty()) {
          table.failures.push_back({alphas[a], thetas[t], tau, messages[idx]});
          ok = false;
          continue;
        }
        row.taus.push_back(tau);
        row.errors.push_back(errors[idx]);
      }
      if (!ok) continue;
      for (std::size_t e = 0; e + 1 < row.errors.size(); ++e) {
        try {
          row.rates.push_back(observed_rate(row.errors[e], row.errors[e + 1]));
        } catch (const std::domain_error&) {
          row.rates.push_back(std::numeric_limits<double>::quiet_NaN());
        }
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

RateTable run_example1(ExperimentSpec spec) {
  spec.example = Example::Ex1;
  return run_convergence(spec);
}

RateTable run_example2(ExperimentSpec spec) {
  if (spec.example != Example::Ex2i && spec.example != Example::Ex2ii) spec.example = Example::Ex2i;
  return run_convergence(spec);
}

RateTable run_example3(ExperimentSpec spec) {
  spec.example = Example::Ex3;
  return run_convergence(spec);
}

RateTable run_example4(ExperimentSpec spec) {
  spec.example = Example::Ex4;
  spec.scheme = Scheme::CnFbdf2;
  return run_convergence(spec);
}

void write_rate_csv(std::ostream& out, const RateTable& table) {
  const auto old_precision = out.precision(17);
  out << "alpha,theta,tau,error,rate\n";
  for (const auto& row : table.rows) {
    for (std::size_t e = 0; e < row.errors.size(); ++e) {
      out << row.alpha << ',' << row.theta << ',' << row.taus[e] << ',' << row.errors[e] << ',';
      if (e > 0) out << row.rates[e - 1];
      out << '\n';
    }
  }
  out.precision(old_precision);
}

std::vector<std::pair<double, double>> error_decay_series(double alpha, double theta, int n_steps,
                                                          int n_cells, HistoryMode history,
                                                          const FastConfig& fast) {
  auto setup = make_example(Example::Ex2i, alpha, n_cells);
  setup.problem.params = SchemeParams::over_horizon(alpha, theta, 1.0, n_steps);
  SolveOptions options;
  options.history = history;
  options.fast = fast;
  options.keep_levels = false;
  std::vector<std::pair<double, double>> series;
  series.reserve(static_cast<std::size_t>(n_steps));
  const auto& system = setup.problem.system;
  std::vector<double> diff(system.dof());
  std::vector<double> md(system.dof());
  const double tau = setup.problem.params.tau;
  options.observer = [&](int n, std::span<const double> u) {
    const double t = n * tau;
    const auto ref = setup.exact(t);
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u[i] - ref[i];
    system.mass.apply(diff, md);
    double s = 0.0;
    for (std::size_t i = 0; i < diff.size(); ++i) s += diff[i] * md[i];
    series.emplace_back(t, std::sqrt(std::max(s, 0.0)));
  };
  solve(setup.problem, options);
  return series;
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& series, double t_lo,
                        double t_hi) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (const auto& [t, e] : series) {
    if (t < t_lo || t > t_hi) continue;
    if (!(e > 0.0)) throw std::domain_error("cannot fit a slope through a non-positive error");
    const double x = std::log(t);
    const double y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) throw std::invalid_argument("need at least two points to fit a slope");
  const double n = static_cast<double>(count);
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

StabilityReport run_stability(double alpha, double theta, double tau, double t_final, int n_cells) {
  auto setup = make_example(Example::Ex3, alpha, n_cells);
  const int n_steps = static_cast<int>(std::lround(t_final / tau));
  setup.problem.params = SchemeParams{alpha, theta, tau, n_steps};
  const Mesh1D& mesh = *setup.mesh;

  StabilityReport report;
  report.theta = theta;
  report.initial_max = max_abs(setup.problem.v);
  report.midpoint.emplace_back(0.0, FemFunction{mesh, setup.problem.v}(0.5 * (mesh.a() + mesh.b())));

  SolveOptions options;
  options.policy = ShiftPolicy::AllowUnstable;
  options.keep_levels = false;
  options.observer = [&](int n, std::span<const double> u) {
    const FemFunction fu{mesh, std::vector<double>(u.begin(), u.end())};
    report.midpoint.emplace_back(n * tau, fu(0.5 * (mesh.a() + mesh.b())));
  };
  const auto run = solve(setup.problem, options);
  report.instability = run.instability;
  report.peak_max = 0.0;
  for (double m : run.linf_norms)
    report.peak_max = std::isfinite(m) ? std::max(report.peak_max, m) : std::numeric_limits<double>::infinity();
  if (run.instability) report.peak_max = std::numeric_limits<double>::infinity();
  report.unstable = run.instability.has_value() || report.peak_max > 10.0 * report.initial_max;
  return report;
}

std::vector<FastAccuracyRow> run_fast_accuracy(FastAlgorithm alg, const std::vector<double>& alphas,
                                               const std::vector<double>& thetas, long long n_min,
                                               long long n_max, int base, int quad_half) {
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("invalid weight index range");
  const double tau = 1.0 / static_cast<double>(n_max);
  std::vector<FastAccuracyRow> rows;
  for (double alpha : alphas) {
    for (double theta : thetas) {
      const SchemeParams params{alpha, theta, tau, static_cast<int>(n_max)};
      const auto exact = sftr_weights(params, static_cast<std::size_t>(n_max), ShiftPolicy::AllowUnstable);
      std::map<int, TalbotLevel> levels;
      for (long long n = n_min; n <= n_max; ++n) {
        const int l = level_for_lag(n, base);
        auto it = levels.find(l);
        if (it == levels.end()) it = levels.emplace(l, TalbotLevel::make(l, base, quad_half, tau)).first;
        const auto approx = fast_weight(n, it->second, alg, params);
        const double w = exact[static_cast<std::size_t>(n)];
        rows.push_back({alpha, theta, n, w, approx.value, std::abs(approx.value - w)});
      }
    }
  }
  return rows;
}

std::vector<TimingRow> run_fast_timing(double alpha, double theta, const std::vector<int>& n_steps,
                                       int n_cells, const std::vector<HistoryMode>& modes,
                                       const FastConfig& fast) {
  using clock = std::chrono::steady_clock;
  std::vector<TimingRow> rows;
  for (int n : n_steps) {
    auto setup = make_example(Example::Ex1, alpha, n_cells);
    setup.problem.params = SchemeParams::over_horizon(alpha, theta, 1.0, n);

    auto timed = [&](HistoryMode mode, std::vector<std::vector<double>>* keep) {
      SolveOptions options;
      options.history = mode;
      options.fast = fast;
      options.keep_levels = keep != nullptr;
      const auto start = clock::now();
      auto run = solve(setup.problem, options);
      const double secs = std::chrono::duration<double>(clock::now() - start).count();
      if (run.instability) throw std::runtime_error("timing run became unstable");
      if (keep) *keep = std::move(run.levels);
      return std::make_tuple(secs, run.peak_history_entries, run.accumulator_updates, std::move(run));
    };

    std::vector<std::vector<double>> baseline;
    {
      auto [secs, peak, updates, run] = timed(HistoryMode::Standard, &baseline);
      (void)run;
      if (std::find(modes.begin(), modes.end(), HistoryMode::Standard) != modes.end())
        rows.push_back({HistoryMode::Standard, n, secs, peak, updates, 0.0});
    }
    for (HistoryMode mode : modes) {
      if (mode == HistoryMode::Standard) continue;
      std::vector<std::vector<double>> levels;
      auto [secs, peak, updates, run] = timed(mode, &levels);
      (void)run;
      double dev = 0.0;
      for (std::size_t l = 1; l < levels.size(); ++l) {
        double num = 0.0;
        for (std::size_t i = 0; i < levels[l].size(); ++i)
          num = std::max(num, std::abs(levels[l][i] - baseline[l][i]));
        const double den = max_abs(baseline[l]);
        dev = std::max(dev, den > 0.0 ? num / den : num);
      }
      rows.push_back({mode, n, secs, peak, updates, dev});
    }
  }
  return rows;
}

std::string history_mode_name(HistoryMode mode) {
  switch (mode) {
    case HistoryMode::Standard: return "standard";
    case HistoryMode::FastI: return "fast1";
    case HistoryMode::FastII: return "fast2";
  }
  return "?";
}

HistoryMode parse_history_mode(const std::string& name) {
  if (name == "standard") return HistoryMode::Standard;
  if (name == "fast1") return HistoryMode::FastI;
  if (name == "fast2") return HistoryMode::FastII;
  throw std::invalid_argument("unknown history mode '" + name + "'");
}

Scheme parse_scheme(const std::string& name) {
  if (name == "plain") return Scheme::NoCorrection;
  if (name == "corrected") return Scheme::Corrected;
  if (name == "cn") return Scheme::CrankNicolson;
  if (name == "cnfbdf2") return Scheme::CnFbdf2;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          const std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace sftr
