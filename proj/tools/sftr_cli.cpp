// Command-line driver: weight tables, single solves, convergence sweeps and
// fast-history checks, all written as CSV.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sftr/experiments.hpp"
#include "sftr/fast_history.hpp"
#include "sftr/time_stepping.hpp"
#include "sftr/weights.hpp"

namespace {

using namespace sftr;

// Stdout unless a path was given.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::runtime_error("cannot open output file " + path);
    }
    stream().precision(17);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    out.push_back(std::stod(item, &used));
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

// "2^-e" or a positive power of two given as a decimal.
int tau_exponent(const std::string& item) {
  static const std::regex power(R"(\s*2\^-(\d+)\s*)");
  std::smatch m;
  if (std::regex_match(item, m, power)) return std::stoi(m[1]);
  const double tau = std::stod(item);
  const double e = -std::log2(tau);
  if (!(tau > 0.0) || std::abs(e - std::round(e)) > 1e-12)
    throw std::invalid_argument("step '" + item + "' is not a power of two");
  return static_cast<int>(std::lround(e));
}

// "2^-5..2^-9" or a comma-separated list.
std::vector<int> parse_taus(const std::string& text) {
  const auto dots = text.find("..");
  std::vector<int> out;
  if (dots != std::string::npos) {
    const int lo = tau_exponent(text.substr(0, dots));
    const int hi = tau_exponent(text.substr(dots + 2));
    for (int e = std::min(lo, hi); e <= std::max(lo, hi); ++e) out.push_back(e);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(tau_exponent(item));
  return out;
}

FastConfig fast_config(int b, int kc, int near, bool symmetric) {
  FastConfig c;
  c.base = b;
  c.quad_half = kc;
  c.near_levels = near;
  c.conjugate_symmetry = symmetric;
  return c;
}

struct FastFlags {
  int b = 5;
  int kc = 30;
  int near = 2;
  bool full_sum = false;

  void attach(CLI::App* app) {
    app->add_option("--b", b, "block base B")->check(CLI::Range(2, 100));
    app->add_option("--kc", kc, "quadrature half width K_C")->check(CLI::Range(1, 1000));
    app->add_option("--near", near, "levels kept with exact weights")->check(CLI::Range(1, 20));
    app->add_flag("--full-sum", full_sum, "sum all 2K_C+1 nodes instead of using conjugate symmetry");
  }
  FastConfig config() const { return fast_config(b, kc, near, !full_sum); }
};

int run_weights(double alpha, double theta, long long count, const std::string& kind, const std::string& out_path) {
  if (count < 1) throw std::invalid_argument("count must be positive");
  const auto k_max = static_cast<std::size_t>(count - 1);
  const SchemeParams params{alpha, theta, 1.0, 1};
  WeightTable table = kind == "fbdf2"     ? fbdf2_weights(alpha, k_max)
                      : kind == "cnfbdf2" ? cn_fbdf2_weights(alpha, theta, k_max)
                      : kind == "sftr"    ? sftr_weights(params, k_max)
                                          : throw std::invalid_argument("unknown weight kind '" + kind + "'");
  Output out(out_path);
  out.stream() << "k,omega\n";
  for (std::size_t k = 0; k < table.size(); ++k) out.stream() << k << ',' << table[k] << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shifted fractional trapezoidal rule solver and experiments"};
  app.require_subcommand(1);

  // weights
  double w_alpha = 0.5, w_theta = 0.25;
  long long w_count = 10;
  std::string w_kind = "sftr", w_out;
  auto* weights = app.add_subcommand("weights", "convolution weights as CSV");
  weights->add_option("--alpha", w_alpha, "fractional order")->required();
  weights->add_option("--theta", w_theta, "shift");
  weights->add_option("--count", w_count, "number of weights")->required();
  weights->add_option("--kind", w_kind, "sftr | fbdf2 | cnfbdf2");
  weights->add_option("--out", w_out, "output CSV (stdout if omitted)");

  // solve
  std::string s_problem = "ex1", s_scheme = "corrected", s_history = "standard", s_out;
  double s_alpha = 0.5, s_theta = 0.3, s_tfinal = 1.0, s_h = 1e-3;
  int s_nsteps = 64, s_ncells = 0;
  FastFlags s_fast;
  auto* solve_cmd = app.add_subcommand("solve", "single run, per-step error or max norm");
  solve_cmd->add_option("--problem", s_problem, "ex1 | ex2i | ex2ii | ex3 | ex4 | scalar");
  solve_cmd->add_option("--alpha", s_alpha, "fractional order");
  solve_cmd->add_option("--theta", s_theta, "shift");
  solve_cmd->add_option("--nsteps", s_nsteps, "number of steps")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--ncells", s_ncells, "mesh cells (overrides --mesh-width)");
  solve_cmd->add_option("--mesh-width", s_h, "absolute mesh width");
  solve_cmd->add_option("--scheme", s_scheme, "plain | corrected | cn | cnfbdf2");
  solve_cmd->add_option("--tfinal", s_tfinal, "final time");
  solve_cmd->add_option("--history", s_history, "standard | fast1 | fast2");
  solve_cmd->add_option("--out", s_out, "output CSV (stdout if omitted)");
  s_fast.attach(solve_cmd);

  // convergence
  std::string c_example = "ex1", c_alphas = "0.1,0.5,0.9", c_thetas = "0.1,0.3,0.5", c_taus = "2^-5..2^-9";
  std::string c_scheme = "corrected", c_history = "standard", c_out;
  int c_ncells = 0, c_tref = 12, c_refine = 2;
  unsigned c_threads = 0;
  double c_h = 1e-3, c_teval = 0.5, c_ref_theta = 0.3;
  FastFlags c_fast;
  auto* conv = app.add_subcommand("convergence", "error and rate table at a fixed time");
  conv->add_option("--example", c_example, "ex1 | ex2i | ex2ii | ex3 | ex4 | scalar");
  conv->add_option("--alphas", c_alphas, "comma-separated fractional orders");
  conv->add_option("--thetas", c_thetas, "comma-separated shifts");
  conv->add_option("--taus", c_taus, "2^-a..2^-b or a comma-separated list");
  conv->add_option("--ncells", c_ncells, "mesh cells (overrides --mesh-width)");
  conv->add_option("--mesh-width", c_h, "absolute mesh width");
  conv->add_option("--scheme", c_scheme, "plain | corrected | cn | cnfbdf2");
  conv->add_option("--history", c_history, "standard | fast1 | fast2");
  conv->add_option("--teval", c_teval, "evaluation time");
  conv->add_option("--tref", c_tref, "reference step exponent (ex2ii)");
  conv->add_option("--refine", c_refine, "reference mesh refinement factor (ex2ii)");
  conv->add_option("--ref-theta", c_ref_theta, "reference shift (ex2ii)");
  conv->add_option("--threads", c_threads, "worker threads (0 = all cores)");
  conv->add_option("--out", c_out, "output CSV (stdout if omitted)");
  c_fast.attach(conv);

  // fastcheck
  double f_alpha = 0.5, f_theta = 0.25;
  int f_alg = 1, f_b = 5, f_kc = 30;
  long long f_nmax = 250, f_nmin = 1;
  std::string f_out;
  auto* fastcheck = app.add_subcommand("fastcheck", "exact versus contour-quadrature weights");
  fastcheck->add_option("--alpha", f_alpha, "fractional order");
  fastcheck->add_option("--theta", f_theta, "shift");
  fastcheck->add_option("--alg", f_alg, "1 | 2")->check(CLI::IsMember({1, 2}));
  fastcheck->add_option("--kc", f_kc, "quadrature half width K_C");
  fastcheck->add_option("--b", f_b, "block base B");
  fastcheck->add_option("--nmin", f_nmin, "first weight index");
  fastcheck->add_option("--nmax", f_nmax, "last weight index");
  fastcheck->add_option("--out", f_out, "output CSV (stdout if omitted)");

  // bench
  std::string b_history = "fast1", b_nsteps = "1024,2048,4096", b_out;
  double b_alpha = 0.3, b_theta = 0.1;
  int b_ncells = 32;
  FastFlags b_fast;
  auto* bench = app.add_subcommand("bench", "wall time and retained history per step count");
  bench->add_option("--history", b_history, "standard | fast1 | fast2");
  bench->add_option("--nsteps", b_nsteps, "comma-separated step counts");
  bench->add_option("--alpha", b_alpha, "fractional order");
  bench->add_option("--theta", b_theta, "shift");
  bench->add_option("--ncells", b_ncells, "mesh cells");
  bench->add_option("--out", b_out, "output CSV (stdout if omitted)");
  b_fast.attach(bench);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*weights) return run_weights(w_alpha, w_theta, w_count, w_kind, w_out);

    if (*solve_cmd) {
      const Example ex = parse_example(s_problem);
      const int cells = ex == Example::Scalar ? 0 : (s_ncells > 0 ? s_ncells : cells_for_width(ex, s_h));
      auto setup = make_example(ex, s_alpha, cells);
      auto& p = setup.problem;
      p.scheme = parse_scheme(s_scheme);
      p.params = SchemeParams::over_horizon(s_alpha, s_theta, s_tfinal, s_nsteps);
      SolveOptions options;
      options.history = parse_history_mode(s_history);
      options.fast = s_fast.config();
      options.policy = ex == Example::Ex3 ? ShiftPolicy::AllowUnstable : ShiftPolicy::Stable;
      const auto run = solve(p, options);

      Output out(s_out);
      auto& os = out.stream();
      if (setup.mesh) std::cerr << "info: mesh cells " << setup.mesh->n_cells() << ", h " << setup.mesh->h() << "\n";
      if (setup.exact && ex != Example::Ex3) {
        os << "t,error\n";
        for (const auto& [t, e] : error_series(run, p.system, setup.exact)) os << t << ',' << e << '\n';
      } else {
        os << "t,linf_norm\n";
        for (std::size_t n = 0; n < run.linf_norms.size(); ++n)
          os << static_cast<double>(n) * p.params.tau << ',' << run.linf_norms[n] << '\n';
      }
      if (run.instability) {
        std::cerr << "unstable: step " << run.instability->step << ": " << run.instability->reason << '\n';
        return 3;
      }
      return 0;
    }

    if (*conv) {
      ExperimentSpec spec;
      spec.example = parse_example(c_example);
      spec.alphas = parse_list(c_alphas);
      spec.thetas = parse_list(c_thetas);
      spec.tau_exponents = parse_taus(c_taus);
      spec.h = c_h;
      spec.n_cells = c_ncells;
      spec.scheme = parse_scheme(c_scheme);
      spec.history = parse_history_mode(c_history);
      spec.fast = c_fast.config();
      spec.t_eval = c_teval;
      spec.reference_exponent = c_tref;
      spec.reference_refine = c_refine;
      spec.reference_theta = c_ref_theta;
      spec.threads = c_threads;
      const auto table = run_convergence(spec);
      Output out(c_out);
      write_rate_csv(out.stream(), table);
      for (const auto& f : table.failures)
        std::cerr << "error: cell alpha=" << f.alpha << " theta=" << f.theta << " tau=" << f.tau << ": "
                  << f.message << '\n';
      return table.failures.empty() ? 0 : 2;
    }

    if (*fastcheck) {
      const auto alg = f_alg == 1 ? FastAlgorithm::I : FastAlgorithm::II;
      const auto rows = run_fast_accuracy(alg, {f_alpha}, {f_theta}, f_nmin, f_nmax, f_b, f_kc);
      Output out(f_out);
      out.stream() << "n,exact,fast,abs_error\n";
      for (const auto& r : rows) out.stream() << r.n << ',' << r.exact << ',' << r.fast << ',' << r.abs_error << '\n';
      return 0;
    }

    if (*bench) {
      const HistoryMode mode = parse_history_mode(b_history);
      std::vector<int> steps;
      for (double n : parse_list(b_nsteps)) steps.push_back(static_cast<int>(n));
      const auto rows = run_fast_timing(b_alpha, b_theta, steps, b_ncells, {mode}, b_fast.config());
      Output out(b_out);
      out.stream() << "n_steps,wall_seconds,history_entries_peak\n";
      for (const auto& r : rows)
        if (r.mode == mode) out.stream() << r.n_steps << ',' << r.wall_seconds << ',' << r.history_entries_peak << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
