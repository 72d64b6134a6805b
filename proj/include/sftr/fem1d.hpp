#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace sftr {

/// Uniform partition of (a, b) into `n_cells` cells. Unknowns live on the
/// interior nodes x_1..x_{n_cells-1} (homogeneous Dirichlet conditions).
class Mesh1D {
 public:
  Mesh1D(double a, double b, int n_cells);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  int n_cells() const noexcept { return n_cells_; }
  double h() const noexcept { return h_; }
  std::size_t interior_count() const noexcept { return static_cast<std::size_t>(n_cells_ - 1); }
  /// Global node i = 0..n_cells.
  double node(int i) const noexcept { return a_ + i * h_; }
  /// Interior unknown index 0..interior_count()-1 maps to node index + 1.
  double interior_node(std::size_t k) const noexcept { return node(static_cast<int>(k) + 1); }

 private:
  double a_;
  double b_;
  int n_cells_;
  double h_;
};

/// Tridiagonal matrix stored by diagonals.
struct TriDiag {
  std::vector<double> sub;
  std::vector<double> main;
  std::vector<double> super;

  std::size_t size() const noexcept { return main.size(); }
  /// y = T x
  void apply(std::span<const double> x, std::span<double> y) const;
  /// y += factor * T x
  void apply_add(double factor, std::span<const double> x, std::span<double> y) const;
};

/// a * X + b * Y for equally sized tridiagonals.
TriDiag combine(double a, const TriDiag& x, double b, const TriDiag& y);

/// Precomputed LU factors of a tridiagonal matrix (Thomas algorithm without
/// pivoting). Immutable once built; `solve` may be called concurrently.
class TriDiagFactor {
 public:
  explicit TriDiagFactor(const TriDiag& t);
  void solve(std::span<double> rhs_in_out) const;
  std::size_t size() const noexcept { return diag_.size(); }

 private:
  std::vector<double> lower_;  // multipliers l_i = sub_{i-1} / d_{i-1}
  std::vector<double> diag_;   // pivots d_i
  std::vector<double> super_;
};

/// Solves T x = rhs in O(m). Throws std::runtime_error on a zero pivot.
std::vector<double> thomas_solve(const TriDiag& t, std::span<const double> rhs);

/// Piecewise-linear function on a mesh, vanishing at both endpoints.
struct FemFunction {
  Mesh1D mesh;
  std::vector<double> coeffs;

  double operator()(double x) const;
};

/// Smooth integrand, integrated with 3-point Gauss per cell.
struct SmoothFunction {
  std::function<double(double)> f;
};

/// height * indicator of (lo, hi), integrated exactly against the hats.
struct IntervalIndicator {
  double lo;
  double hi;
  double height = 1.0;
};

using L2Datum = std::variant<SmoothFunction, IntervalIndicator>;

/// Function in D(Laplacian) described by its Laplacian; the Ritz projection
/// only needs (-Delta v, phi_i).
struct RitzDatum {
  std::function<double(double)> laplacian;
};

/// Mass matrix (phi_i, phi_j) on the interior nodes: 2h/3 and h/6.
TriDiag assemble_mass(const Mesh1D& mesh);
/// Stiffness matrix (phi_i', phi_j') on the interior nodes: 2/h and -1/h.
TriDiag assemble_stiffness(const Mesh1D& mesh);

/// Load vector b_i = (v, phi_i).
std::vector<double> load_vector(const Mesh1D& mesh, const L2Datum& v);

/// L2 projection P_h v: solves M c = (v, phi_i).
FemFunction l2_project(const Mesh1D& mesh, const L2Datum& v);

/// Ritz projection R_h v: solves A c = -(Delta v, phi_i).
FemFunction ritz_project(const Mesh1D& mesh, const RitzDatum& v);

/// Nodal interpolant on the interior nodes.
std::vector<double> interpolate(const Mesh1D& mesh, const std::function<double(double)>& f);

/// sqrt(c^T M c), the L2 norm of the finite element function with
/// coefficients c.
double discrete_l2_norm(const Mesh1D& mesh, std::span<const double> coeffs);

}  // namespace sftr
