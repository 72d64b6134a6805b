#include "sftr/time_stepping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sftr {

namespace {

bool is_trapezoidal(Scheme s) { return s != Scheme::CnFbdf2; }

DiscreteProblem normalized(DiscreteProblem p) {
  if (p.scheme == Scheme::CrankNicolson) p.params.theta = 0.5;
  return p;
}

void check_problem(const DiscreteProblem& p, ShiftPolicy policy) {
  p.params.validate(p.scheme == Scheme::CnFbdf2 ? ShiftPolicy::Stable : policy);
  const std::size_t m = p.system.dof();
  if (m == 0 || p.system.stiffness.size() != m)
    throw std::invalid_argument("mass and stiffness matrices differ in size");
  if (p.v.size() != m) throw std::invalid_argument("initial datum does not match the system size");
}

std::vector<double> sample(const DiscreteProblem& p, double t) {
  if (!p.source) return std::vector<double>(p.system.dof(), 0.0);
  auto f = p.source(t);
  if (f.size() != p.system.dof()) throw std::invalid_argument("source sample has the wrong size");
  return f;
}

double linf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) return v;
    m = std::max(m, std::abs(v));
  }
  return m;
}

}  // namespace

SpatialSystem SpatialSystem::fem(const Mesh1D& mesh) {
  return SpatialSystem{assemble_mass(mesh), assemble_stiffness(mesh)};
}

SpatialSystem SpatialSystem::scalar(double lambda) {
  if (!(lambda >= 0.0)) throw std::domain_error("scalar operator needs lambda >= 0");
  return SpatialSystem{TriDiag{{}, {1.0}, {}}, TriDiag{{}, {lambda}, {}}};
}

WeightTable scheme_weights(const DiscreteProblem& problem, std::size_t k_max, ShiftPolicy policy) {
  const auto p = normalized(problem);
  if (p.scheme == Scheme::CnFbdf2) return cn_fbdf2_weights(p.params.alpha, p.params.theta, k_max);
  return sftr_weights(p.params, k_max, policy);
}

TriDiag step_system_matrix(const DiscreteProblem& problem, const WeightTable& weights) {
  const auto p = normalized(problem);
  const bool want_sftr = is_trapezoidal(p.scheme);
  if ((weights.kind() == WeightKind::Sftr) != want_sftr || weights.size() == 0)
    throw std::invalid_argument("weight table does not belong to the scheme");
  if (weights.alpha() != p.params.alpha || weights.theta() != p.params.theta)
    throw std::invalid_argument("weight table was built for other parameters");
  if (p.system.mass.size() != p.system.stiffness.size())
    throw std::invalid_argument("mass and stiffness matrices differ in size");
  const double lead = std::pow(p.params.tau, -p.params.alpha) * weights[0];
  return combine(lead, p.system.mass, 1.0 - p.params.theta, p.system.stiffness);
}

std::vector<double> step_load(const DiscreteProblem& problem, int n) {
  if (n < 1) throw std::domain_error("loads are defined for n >= 1");
  const auto p = normalized(problem);
  const double theta = p.params.theta;
  const double tau = p.params.tau;
  const std::size_t m = p.system.dof();
  const bool corrected = n == 1 && (p.scheme == Scheme::Corrected || p.scheme == Scheme::CnFbdf2);

  const auto f_now = sample(p, n * tau);
  const auto f_prev = sample(p, (n - 1) * tau);
  // Both branches combine as (1 - theta) f^n + c f^{n-1}; at theta = 1/2 they
  // coincide bit for bit.
  const double c_prev = corrected ? 0.5 : theta;
  std::vector<double> f(m);
  for (std::size_t i = 0; i < m; ++i) f[i] = (1.0 - theta) * f_now[i] + c_prev * f_prev[i];

  std::vector<double> load(m, 0.0);
  p.system.mass.apply(f, load);
  const double av = corrected ? 1.5 - theta : 1.0;
  p.system.stiffness.apply_add(-av, p.v, load);
  return load;
}

TimeStepper::TimeStepper(DiscreteProblem problem, SolveOptions options)
    : problem_(normalized(std::move(problem))),
      options_(std::move(options)),
      weights_(WeightKind::Sftr, 0.0, 0.0, {}) {
  check_problem(problem_, options_.policy);
  const auto& params = problem_.params;
  const auto n_total = static_cast<std::size_t>(params.n_steps);
  if (options_.history == HistoryMode::Standard) {
    weights_ = scheme_weights(problem_, n_total, options_.policy);
    past_.reserve(n_total);
  } else {
    if (problem_.scheme == Scheme::CnFbdf2)
      throw std::invalid_argument("fast history is only available for the trapezoidal weights");
    weights_ = scheme_weights(problem_, 0, options_.policy);
    const auto alg = options_.history == HistoryMode::FastI ? FastAlgorithm::I : FastAlgorithm::II;
    fast_ = std::make_unique<FastHistory>(alg, params, options_.fast, problem_.system.dof());
  }
  factor_ = std::make_unique<TriDiagFactor>(step_system_matrix(problem_, weights_));
  tau_pow_ = std::pow(params.tau, -params.alpha);
  w_.assign(problem_.system.dof(), 0.0);
}

TimeStepper::~TimeStepper() = default;
TimeStepper::TimeStepper(TimeStepper&&) noexcept = default;
TimeStepper& TimeStepper::operator=(TimeStepper&&) noexcept = default;

std::vector<double> TimeStepper::solution() const {
  std::vector<double> u(w_);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += problem_.v[i];
  return u;
}

std::vector<double> TimeStepper::history_term() const {
  const std::size_t m = problem_.system.dof();
  std::vector<double> h(m, 0.0);
  if (fast_) {
    fast_->evaluate(h);
    return h;
  }
  // k = 1..n over W^{n+1-k}; the k = n+1 term multiplies W^0 = 0.
  const std::size_t n = past_.size();
  for (std::size_t k = 1; k <= n; ++k) {
    const double wk = weights_[k];
    const auto& entry = past_[n - k];
    for (std::size_t i = 0; i < m; ++i) h[i] += wk * entry[i];
  }
  for (double& x : h) x *= tau_pow_;
  return h;
}

std::span<const double> TimeStepper::advance() {
  if (n_ >= problem_.params.n_steps) throw std::logic_error("time stepper is past its horizon");
  const std::size_t m = problem_.system.dof();
  auto rhs = step_load(problem_, n_ + 1);
  const auto hist = history_term();
  problem_.system.mass.apply_add(-1.0, hist, rhs);
  problem_.system.stiffness.apply_add(-problem_.params.theta, w_, rhs);
  factor_->solve(rhs);
  if (rhs.size() != m) throw std::logic_error("solver returned the wrong size");
  record(rhs);
  return w_;
}

void TimeStepper::inject(std::span<const double> w) {
  if (w.size() != problem_.system.dof()) throw std::invalid_argument("injected state has the wrong size");
  if (n_ >= problem_.params.n_steps) throw std::logic_error("time stepper is past its horizon");
  record(w);
}

void TimeStepper::record(std::span<const double> w) {
  w_.assign(w.begin(), w.end());
  ++n_;
  if (fast_)
    fast_->push(w_);
  else
    past_.push_back(w_);
}

std::size_t TimeStepper::peak_history_entries() const {
  return fast_ ? fast_->peak_retained_vectors() : past_.size();
}

std::size_t TimeStepper::accumulator_updates() const {
  return fast_ ? fast_->accumulator_updates() : 0;
}

SolutionHistory solve(const DiscreteProblem& problem, const SolveOptions& options) {
  TimeStepper stepper(problem, options);
  const auto& p = stepper.problem();
  SolutionHistory out;
  out.times.push_back(0.0);
  out.levels.push_back(p.v);
  out.linf_norms.push_back(linf(p.v));

  for (int n = 1; n <= p.params.n_steps; ++n) {
    const auto w = stepper.advance();
    const double wn = linf(w);
    const auto u = stepper.solution();
    out.steps_taken = n;
    out.linf_norms.push_back(linf(u));
    if (!std::isfinite(wn) || wn > options.blowup) {
      out.instability = Instability{n, wn, std::isfinite(wn) ? "max norm exceeded the blow-up threshold"
                                                               : "non-finite value"};
      break;
    }
    if (options.observer) options.observer(n, u);
    if (options.keep_levels || n == p.params.n_steps) {
      out.times.push_back(n * p.params.tau);
      out.levels.push_back(u);
    }
  }
  out.peak_history_entries = stepper.peak_history_entries();
  out.accumulator_updates = stepper.accumulator_updates();
  return out;
}

SolutionHistory solve_cn_fbdf2(const DiscreteProblem& problem, const SolveOptions& options) {
  if (problem.scheme != Scheme::CnFbdf2) throw std::invalid_argument("problem does not use the CN+fBDF2 scheme");
  return solve(problem, options);
}

std::vector<std::pair<double, double>> error_series(
    const SolutionHistory& history, const SpatialSystem& system,
    const std::function<std::vector<double>(double)>& exact) {
  std::vector<std::pair<double, double>> out;
  out.reserve(history.levels.size());
  std::vector<double> diff;
  std::vector<double> md(system.dof());
  for (std::size_t l = 0; l < history.levels.size(); ++l) {
    const double t = history.times[l];
    const auto ref = exact(t);
    const auto& u = history.levels[l];
    if (ref.size() != u.size() || u.size() != system.dof())
      throw std::invalid_argument("exact solution has the wrong size");
    diff.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) diff[i] = u[i] - ref[i];
    system.mass.apply(diff, md);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += diff[i] * md[i];
    out.emplace_back(t, std::sqrt(std::max(s, 0.0)));
  }
  return out;
}

double observed_rate(double e_coarse, double e_fine) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0) || !std::isfinite(e_coarse) || !std::isfinite(e_fine))
    throw std::domain_error("rates need positive finite errors");
  return std::log2(e_coarse / e_fine);
}

}  // namespace sftr
