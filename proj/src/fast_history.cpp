#include "sftr/fast_history.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sftr {

namespace {

constexpr double kPoleTolerance = 1e-14;

long long ipow(long long base, int e) {
  long long out = 1;
  for (int i = 0; i < e; ++i) out *= base;
  return out;
}

// r^e by binary powering; used only at construction and sub-block rollover.
cplx cpow(cplx r, long long e) {
  cplx out = 1.0;
  while (e > 0) {
    if (e & 1) out *= r;
    r *= r;
    e >>= 1;
  }
  return out;
}

void check_angle(double theta) {
  if (!(std::abs(theta) < std::numbers::pi))
    throw std::domain_error("contour angle must lie in (-pi, pi)");
}

}  // namespace

cplx talbot_point(double theta, double scale) {
  check_angle(theta);
  double tcot;
  if (std::abs(theta) < 1e-3) {
    const double t2 = theta * theta;
    tcot = 1.0 - t2 / 3.0 - t2 * t2 / 45.0;
  } else {
    tcot = theta / std::tan(theta);
  }
  return scale * (cplx(tcot, talbot::kappa * theta) * talbot::nu + talbot::iota);
}

cplx talbot_derivative(double theta, double scale) {
  check_angle(theta);
  double re;
  if (std::abs(theta) < 1e-3) {
    re = -2.0 * theta / 3.0 - 4.0 * theta * theta * theta / 45.0;
  } else {
    const double s = std::sin(theta);
    re = 1.0 / std::tan(theta) - theta / (s * s);
  }
  return scale * talbot::nu * cplx(re, talbot::kappa);
}

cplx kernel_F(FastAlgorithm alg, cplx lambda, const SchemeParams& params) {
  if (std::abs(lambda) == 0.0) throw std::domain_error("kernel evaluated at lambda = 0");
  if (alg == FastAlgorithm::I) return std::pow(lambda, params.alpha);
  const cplx g = 1.0 / lambda + (params.theta / params.alpha - 0.5) * params.tau;
  if (std::abs(g) < kPoleTolerance) throw std::domain_error("kernel F is singular at this node");
  return std::pow(g, -params.alpha);
}

KernelFactors kernel_rq(FastAlgorithm alg, cplx z, const SchemeParams& params) {
  if (alg == FastAlgorithm::II) {
    const cplx d = 1.0 - z;
    if (std::abs(d) < kPoleTolerance) throw std::domain_error("node too close to the pole z = 1");
    const cplx inv = 1.0 / d;
    return {inv, inv};
  }
  const double a = 0.5 + params.theta / params.alpha;
  const double b = 0.5 - params.theta / params.alpha;
  const cplx left = 1.0 - z * a;
  const cplx right = 1.0 + z * b;
  if (std::abs(left) < kPoleTolerance || std::abs(right) < kPoleTolerance)
    throw std::domain_error("node too close to a pole of the trapezoidal kernel");
  return {right / left, 1.0 / (left * right)};
}

cplx kernel_e(FastAlgorithm alg, int n, cplx z, const SchemeParams& params) {
  if (n < 1) throw std::domain_error("kernel index must be >= 1");
  const auto [r, q] = kernel_rq(alg, z, params);
  return cpow(r, n) * q;
}

TalbotLevel TalbotLevel::make(int level, int base, int quad_half, double tau) {
  if (level < 1 || base < 2 || quad_half < 1 || !(tau > 0.0))
    throw std::invalid_argument("invalid Talbot level description");
  TalbotLevel out;
  out.level = level;
  out.base = base;
  out.quad_half = quad_half;
  out.t_right = static_cast<double>(2 * ipow(base, level) - 2) * tau;
  const double scale = quad_half / out.t_right;
  const std::size_t count = static_cast<std::size_t>(2 * quad_half + 1);
  out.nodes.resize(count);
  out.weights.resize(count);
  const cplx denom(0.0, 2.0 * (quad_half + 1));
  for (int j = -quad_half; j <= quad_half; ++j) {
    const double angle = j * std::numbers::pi / (quad_half + 1);
    const auto idx = static_cast<std::size_t>(j + quad_half);
    out.nodes[idx] = talbot_point(angle, scale);
    out.weights[idx] = talbot_derivative(angle, scale) / denom;
  }
  return out;
}

long long TalbotLevel::min_lag() const { return ipow(base, level - 1); }

long long TalbotLevel::max_lag() const { return 2 * ipow(base, level) - 2; }

int level_for_lag(long long n, int base) {
  if (n < 1) throw std::domain_error("lag must be >= 1");
  if (base < 2) throw std::invalid_argument("block base must be >= 2");
  int level = 1;
  long long top = 2LL * base - 2;
  while (n > top) {
    ++level;
    top = 2 * ipow(base, level) - 2;
  }
  return level;
}

FastWeight fast_weight(long long n, const TalbotLevel& level, FastAlgorithm alg,
                       const SchemeParams& params) {
  if (n < level.min_lag() || n > level.max_lag())
    throw std::domain_error("lag " + std::to_string(n) + " lies outside level " +
                            std::to_string(level.level));
  const double tau = params.tau;
  if (std::abs(level.t_right / static_cast<double>(level.max_lag()) - tau) > 1e-12 * tau)
    throw std::invalid_argument("Talbot level was built for a different step size");
  cplx sum = 0.0;
  for (int j = -level.quad_half; j <= level.quad_half; ++j) {
    const cplx lambda = level.node(j);
    const auto [r, q] = kernel_rq(alg, tau * lambda, params);
    sum += level.weight(j) * cpow(r, n) * q * kernel_F(alg, lambda, params);
  }
  sum *= std::pow(tau, params.alpha + 1.0);
  return {sum.real(), std::abs(sum.imag())};
}

std::vector<long long> block_decomposition(long long n, int base) {
  if (n < 1) throw std::domain_error("block decomposition needs n >= 1");
  if (base < 2) throw std::invalid_argument("block base must be >= 2");
  std::vector<long long> b{n};
  for (long long p = base; b.back() > 0; p *= base) b.push_back(std::max(0LL, (n / p - 1) * p + 1));
  return b;
}

FastHistory::FastHistory(FastAlgorithm alg, const SchemeParams& params, FastConfig config,
                         std::size_t dof)
    : alg_(alg), params_(params), config_(config), dof_(dof) {
  params_.validate(ShiftPolicy::AllowUnstable);
  if (config.base < 2 || config.quad_half < 1 || config.near_levels < 1)
    throw std::invalid_argument("invalid fast history configuration");
  if (dof == 0) throw std::invalid_argument("fast history needs at least one unknown");

  const long long near_span = ipow(config.base, config.near_levels);
  const auto table = sftr_weights(params_, static_cast<std::size_t>(2 * near_span - 2),
                                  ShiftPolicy::AllowUnstable);
  near_weights_.assign(table.values().begin(), table.values().end());
  tau_pow_ = std::pow(params_.tau, -params_.alpha);

  const double tau = params_.tau;
  const double pole = 1.0 / (0.5 + params_.theta / params_.alpha);
  const int first_j = config.conjugate_symmetry ? 0 : -config.quad_half;
  for (int level = config.near_levels + 1;; ++level) {
    const long long sub = ipow(config.base, level - 1);
    if (2 * sub > params_.n_steps) break;
    const auto talbot = TalbotLevel::make(level, config.base, config.quad_half, tau);

    FarLevel far;
    far.level = level;
    far.sub_len = sub;
    far.last_entry = (params_.n_steps / sub - 1) * sub;
    far.nodes = static_cast<std::size_t>(config.quad_half - first_j + 1);
    for (int j = first_j; j <= config.quad_half; ++j) {
      const cplx lambda = talbot.node(j);
      if (alg_ == FastAlgorithm::I && !((tau * lambda).real() < pole))
        throw std::domain_error("contour crosses the pole of the trapezoidal kernel");
      const auto [r, q] = kernel_rq(alg_, tau * lambda, params_);
      const double mult = (config.conjugate_symmetry && j > 0) ? 2.0 : 1.0;
      far.coef.push_back(mult * talbot.weight(j) * kernel_F(alg_, lambda, params_));
      far.r.push_back(r);
      far.q.push_back(q);
      far.r_sub.push_back(cpow(r, sub));
    }
    const std::size_t len = far.nodes * dof_;
    far.current.assign(len, 0.0);
    far.next.assign(len, 0.0);
    far.done.assign(len, 0.0);
    far.filling.assign(len, 0.0);
    far.power.assign(far.nodes, 1.0);
    levels_.push_back(std::move(far));
  }
  peak_retained_ = retained_vectors();
}

void FastHistory::push(std::span<const double> w) {
  if (w.size() != dof_) throw std::invalid_argument("history entry has the wrong size");
  if (static_cast<long long>(count_) >= params_.n_steps) throw std::logic_error("history is full");
  ++count_;
  near_.emplace_back(w.begin(), w.end());

  const double tau = params_.tau;
  const auto k = static_cast<long long>(count_);
  for (auto& far : levels_) {
    if (++far.filled == far.sub_len + 1) far.filled = 1;
    // Entries past the last sub-block appended before the horizon never
    // reach this level.
    if (k > far.last_entry) continue;
    for (std::size_t j = 0; j < far.nodes; ++j) {
      const double rr = far.r[j].real(), ri = far.r[j].imag();
      const double qr = tau * far.q[j].real(), qi = tau * far.q[j].imag();
      auto* y = reinterpret_cast<double*>(far.filling.data() + j * dof_);
      for (std::size_t i = 0; i < dof_; ++i) {
        const double yr = y[2 * i], yi = y[2 * i + 1];
        y[2 * i] = rr * yr - ri * yi + qr * w[i];
        y[2 * i + 1] = rr * yi + ri * yr + qi * w[i];
      }
    }
    updates_ += far.nodes;
    if (far.filled == far.sub_len) {
      std::swap(far.done, far.filling);
      std::fill(far.filling.begin(), far.filling.end(), cplx(0.0));
    }
  }
  advance_boundaries();
  peak_retained_ = std::max(peak_retained_, retained_vectors());
}

void FastHistory::advance_boundaries() {
  const auto n = static_cast<long long>(count_) + 1;
  const long long B = config_.base;
  for (auto& far : levels_) {
    const long long s = far.sub_len;
    const long long appended = std::max(0LL, n / s - 1);
    if (appended > far.appended) {
      // The sub-block completed s steps ago joins the block.
      const bool feeds_next = far.appended >= far.dropped + B;
      for (std::size_t j = 0; j < far.nodes; ++j) {
        const cplx rs = far.r_sub[j];
        const std::size_t off = j * dof_;
        for (std::size_t i = 0; i < dof_; ++i) {
          far.current[off + i] = rs * far.current[off + i] + far.done[off + i];
          far.next[off + i] = rs * far.next[off + i] + (feeds_next ? far.done[off + i] : cplx(0.0));
        }
        far.power[j] = rs;
      }
      updates_ += 2 * far.nodes;
      far.appended = appended;
    } else {
      for (std::size_t j = 0; j < far.nodes; ++j) far.power[j] *= far.r[j];
    }
    const long long dropped = std::max(0LL, (n / (s * B) - 1) * B);
    if (dropped > far.dropped) {
      std::swap(far.current, far.next);
      std::fill(far.next.begin(), far.next.end(), cplx(0.0));
      far.dropped = dropped;
    }
  }

  const long long span = ipow(config_.base, config_.near_levels);
  const long long lo = std::max(1LL, (n / span - 1) * span + 1);
  while (near_first_ < lo && !near_.empty()) {
    near_.pop_front();
    ++near_first_;
  }
}

double FastHistory::evaluate(std::span<double> out) const {
  if (out.size() != dof_) throw std::invalid_argument("output has the wrong size");
  const auto n = static_cast<long long>(count_) + 1;
  if (n > params_.n_steps) throw std::logic_error("history evaluated past its horizon");
  std::fill(out.begin(), out.end(), 0.0);
  const auto newest = static_cast<long long>(count_);
  for (long long m = newest; m >= near_first_; --m) {
    const double w = near_weights_[static_cast<std::size_t>(n - m)];
    const auto& entry = near_[static_cast<std::size_t>(m - near_first_)];
    for (std::size_t i = 0; i < dof_; ++i) out[i] += w * entry[i];
  }
  for (double& x : out) x *= tau_pow_;

  if (!far_field_active()) return 0.0;
  if (config_.conjugate_symmetry) {
    // Only the real part survives the symmetric sum.
    for (const auto& far : levels_) {
      if (far.appended <= far.dropped) continue;
      for (std::size_t j = 0; j < far.nodes; ++j) {
        const cplx c = far.coef[j] * far.power[j];
        const double cr = c.real(), ci = c.imag();
        const auto* y = reinterpret_cast<const double*>(far.current.data() + j * dof_);
        for (std::size_t i = 0; i < dof_; ++i) out[i] += cr * y[2 * i] - ci * y[2 * i + 1];
      }
    }
    return 0.0;
  }
  std::vector<cplx> far_sum(dof_, 0.0);
  for (const auto& far : levels_) {
    if (far.appended <= far.dropped) continue;
    for (std::size_t j = 0; j < far.nodes; ++j) {
      const cplx c = far.coef[j] * far.power[j];
      const cplx* y = far.current.data() + j * dof_;
      for (std::size_t i = 0; i < dof_; ++i) far_sum[i] += c * y[i];
    }
  }
  double max_re = 0.0;
  double max_im = 0.0;
  for (std::size_t i = 0; i < dof_; ++i) {
    out[i] += far_sum[i].real();
    max_re = std::max(max_re, std::abs(far_sum[i].real()));
    max_im = std::max(max_im, std::abs(far_sum[i].imag()));
  }
  if (max_im == 0.0) return 0.0;
  return max_re > 0.0 ? max_im / max_re : max_im;
}

std::size_t FastHistory::retained_vectors() const {
  // A complex accumulator vector counts as two real vectors.
  std::size_t total = near_.size();
  for (const auto& far : levels_) total += 2 * 4 * far.nodes;
  return total;
}

bool FastHistory::far_field_active() const {
  return std::any_of(levels_.begin(), levels_.end(),
                     [](const FarLevel& far) { return far.appended > far.dropped; });
}

}  // namespace sftr
