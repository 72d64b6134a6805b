#include "sftr/fem1d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace sftr {

namespace {

// 3-point Gauss-Legendre on [-1, 1]
constexpr std::array<double, 3> kGaussNodes = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kGaussWeights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

void check_system(const TriDiag& t) {
  const std::size_t m = t.main.size();
  if (m == 0) throw std::invalid_argument("empty tridiagonal system");
  if (t.sub.size() + 1 != m || t.super.size() + 1 != m)
    throw std::invalid_argument("tridiagonal diagonals have inconsistent lengths");
}

// Integral of the hat centred at node `center` over [lo, hi] (exact; the hat
// is linear on each side of the centre).
double hat_integral(const Mesh1D& mesh, int center, double lo, double hi) {
  const double h = mesh.h();
  const double xc = mesh.node(center);
  double total = 0.0;
  const std::array<std::pair<double, double>, 2> pieces = {{{xc - h, xc}, {xc, xc + h}}};
  for (const auto& [p, q] : pieces) {
    const double l = std::max(lo, p);
    const double r = std::min(hi, q);
    if (r <= l) continue;
    const double mid = 0.5 * (l + r);
    total += (r - l) * (1.0 - std::abs(mid - xc) / h);
  }
  return total;
}

}  // namespace

Mesh1D::Mesh1D(double a, double b, int n_cells) : a_(a), b_(b), n_cells_(n_cells) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("mesh needs a < b");
  if (n_cells < 2) throw std::invalid_argument("mesh needs at least two cells");
  h_ = (b - a) / n_cells;
}

void TriDiag::apply(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  apply_add(1.0, x, y);
}

void TriDiag::apply_add(double factor, std::span<const double> x, std::span<double> y) const {
  const std::size_t m = main.size();
  if (x.size() != m || y.size() != m) throw std::invalid_argument("size mismatch in tridiagonal product");
  if (m == 1) {
    y[0] += factor * main[0] * x[0];
    return;
  }
  y[0] += factor * (main[0] * x[0] + super[0] * x[1]);
  for (std::size_t i = 1; i + 1 < m; ++i)
    y[i] += factor * (sub[i - 1] * x[i - 1] + main[i] * x[i] + super[i] * x[i + 1]);
  y[m - 1] += factor * (sub[m - 2] * x[m - 2] + main[m - 1] * x[m - 1]);
}

TriDiag combine(double a, const TriDiag& x, double b, const TriDiag& y) {
  check_system(x);
  check_system(y);
  if (x.size() != y.size()) throw std::invalid_argument("cannot combine tridiagonals of different size");
  TriDiag out = x;
  for (std::size_t i = 0; i < out.main.size(); ++i) out.main[i] = a * x.main[i] + b * y.main[i];
  for (std::size_t i = 0; i < out.sub.size(); ++i) {
    out.sub[i] = a * x.sub[i] + b * y.sub[i];
    out.super[i] = a * x.super[i] + b * y.super[i];
  }
  return out;
}

TriDiagFactor::TriDiagFactor(const TriDiag& t) {
  check_system(t);
  const std::size_t m = t.size();
  diag_.resize(m);
  lower_.assign(m, 0.0);
  super_ = t.super;
  diag_[0] = t.main[0];
  for (std::size_t i = 1; i < m; ++i) {
    if (diag_[i - 1] == 0.0 || !std::isfinite(diag_[i - 1]))
      throw std::runtime_error("zero pivot in tridiagonal factorization");
    lower_[i] = t.sub[i - 1] / diag_[i - 1];
    diag_[i] = t.main[i] - lower_[i] * t.super[i - 1];
  }
  if (diag_[m - 1] == 0.0 || !std::isfinite(diag_[m - 1]))
    throw std::runtime_error("zero pivot in tridiagonal factorization");
}

void TriDiagFactor::solve(std::span<double> x) const {
  const std::size_t m = diag_.size();
  if (x.size() != m) throw std::invalid_argument("size mismatch in tridiagonal solve");
  for (std::size_t i = 1; i < m; ++i) x[i] -= lower_[i] * x[i - 1];
  x[m - 1] /= diag_[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) x[i] = (x[i] - super_[i] * x[i + 1]) / diag_[i];
}

std::vector<double> thomas_solve(const TriDiag& t, std::span<const double> rhs) {
  const TriDiagFactor factor(t);
  std::vector<double> x(rhs.begin(), rhs.end());
  factor.solve(x);
  return x;
}

double FemFunction::operator()(double x) const {
  if (x <= mesh.a() || x >= mesh.b()) return 0.0;
  const double s = (x - mesh.a()) / mesh.h();
  const int cell = std::min(static_cast<int>(s), mesh.n_cells() - 1);
  const double frac = s - cell;
  auto value_at = [&](int node) { return (node <= 0 || node >= mesh.n_cells()) ? 0.0 : coeffs[node - 1]; };
  return (1.0 - frac) * value_at(cell) + frac * value_at(cell + 1);
}

TriDiag assemble_mass(const Mesh1D& mesh) {
  const std::size_t m = mesh.interior_count();
  const double h = mesh.h();
  return TriDiag{std::vector<double>(m - 1, h / 6.0), std::vector<double>(m, 2.0 * h / 3.0),
                 std::vector<double>(m - 1, h / 6.0)};
}

TriDiag assemble_stiffness(const Mesh1D& mesh) {
  const std::size_t m = mesh.interior_count();
  const double h = mesh.h();
  return TriDiag{std::vector<double>(m - 1, -1.0 / h), std::vector<double>(m, 2.0 / h),
                 std::vector<double>(m - 1, -1.0 / h)};
}

namespace {

std::vector<double> smooth_load(const Mesh1D& mesh, const std::function<double(double)>& f) {
  if (!f) throw std::invalid_argument("missing integrand");
  const std::size_t m = mesh.interior_count();
  const double h = mesh.h();
  std::vector<double> b(m, 0.0);
  for (int cell = 0; cell < mesh.n_cells(); ++cell) {
    const double left = mesh.node(cell);
    double to_left = 0.0;   // against the hat of node `cell`
    double to_right = 0.0;  // against the hat of node `cell + 1`
    for (std::size_t q = 0; q < 3; ++q) {
      const double s = 0.5 * (1.0 + kGaussNodes[q]);
      const double value = f(left + s * h);
      if (!std::isfinite(value)) throw std::domain_error("non-finite integrand value");
      const double wq = 0.5 * h * kGaussWeights[q];
      to_left += wq * value * (1.0 - s);
      to_right += wq * value * s;
    }
    if (cell >= 1) b[cell - 1] += to_left;
    if (cell + 1 <= static_cast<int>(m)) b[cell] += to_right;
  }
  return b;
}

std::vector<double> indicator_load(const Mesh1D& mesh, const IntervalIndicator& ind) {
  if (!std::isfinite(ind.lo) || !std::isfinite(ind.hi) || !std::isfinite(ind.height))
    throw std::domain_error("non-finite indicator description");
  const std::size_t m = mesh.interior_count();
  std::vector<double> b(m, 0.0);
  for (std::size_t k = 0; k < m; ++k)
    b[k] = ind.height * hat_integral(mesh, static_cast<int>(k) + 1, ind.lo, ind.hi);
  return b;
}

}  // namespace

std::vector<double> load_vector(const Mesh1D& mesh, const L2Datum& v) {
  return std::visit(
      [&](const auto& datum) -> std::vector<double> {
        using T = std::decay_t<decltype(datum)>;
        if constexpr (std::is_same_v<T, SmoothFunction>)
          return smooth_load(mesh, datum.f);
        else
          return indicator_load(mesh, datum);
      },
      v);
}

FemFunction l2_project(const Mesh1D& mesh, const L2Datum& v) {
  const auto b = load_vector(mesh, v);
  return FemFunction{mesh, thomas_solve(assemble_mass(mesh), b)};
}

FemFunction ritz_project(const Mesh1D& mesh, const RitzDatum& v) {
  if (!v.laplacian) throw std::invalid_argument("Ritz projection needs the Laplacian of the datum");
  auto b = smooth_load(mesh, v.laplacian);
  for (double& x : b) x = -x;
  return FemFunction{mesh, thomas_solve(assemble_stiffness(mesh), b)};
}

std::vector<double> interpolate(const Mesh1D& mesh, const std::function<double(double)>& f) {
  std::vector<double> c(mesh.interior_count());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = f(mesh.interior_node(k));
  return c;
}

double discrete_l2_norm(const Mesh1D& mesh, std::span<const double> coeffs) {
  if (coeffs.size() != mesh.interior_count())
    throw std::invalid_argument("coefficient vector does not match the mesh");
  const auto mass = assemble_mass(mesh);
  std::vector<double> mc(coeffs.size());
  mass.apply(coeffs, mc);
  double s = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) s += coeffs[i] * mc[i];
  return std::sqrt(std::max(s, 0.0));
}

}  // namespace sftr
