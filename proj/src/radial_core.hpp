#pragma once

// Radial discretization of R^N: a sinh-graded node set on [0, r_max],
// full-space quadrature, and finite-difference radial operators.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace critwave {

enum class StencilOrder { second, fourth };

// Sparse row operator on grid values (CSR layout), used for the precomputed
// finite-difference stencils.
class Stencil {
 public:
  Stencil() = default;
  std::size_t rows() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  void apply(std::span<const double> in, std::span<double> out) const noexcept;
  double apply_row(std::size_t row, std::span<const double> in) const noexcept;
  // Sum of |coefficients| over the widest row.
  double max_row_sum() const noexcept;

  void begin_row() { offsets_.push_back(index_.size()); }
  void add(std::size_t col, double c);
  void finish();

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> index_;
  std::vector<double> coeff_;
};

// |S^{N-1}| = 2 pi^{N/2} / Gamma(N/2).
double sphere_area(int dim);

// Nodes r(s) = r_max sinh(stretch s) / sinh(stretch) for s uniform on [0,1].
// Weights integrate f(r) r^{N-1} dr over [0, r_max]: trapezoid in s with
// Gregory end corrections, times the Jacobian dr/ds and r^{N-1}.
class RadialGrid {
 public:
  RadialGrid(int dim, double r_max, std::size_t m, double stretch);

  int dim() const noexcept { return dim_; }
  double r_max() const noexcept { return r_max_; }
  double stretch() const noexcept { return stretch_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  // Uniform spacing of the mapped coordinate s.
  double step() const noexcept { return step_; }
  double sphere_area() const noexcept { return sphere_area_; }

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  // dr/ds and d^2r/ds^2 at each node.
  std::span<const double> jacobian() const noexcept { return jacobian_; }
  std::span<const double> curvature() const noexcept { return curvature_; }

  // Smallest physical spacing r_{i+1} - r_i (at the origin).
  double min_spacing() const noexcept { return nodes_[1] - nodes_[0]; }

  // Precomputed d/dr and radial Laplacian stencils.
  const Stencil& derivative(StencilOrder order) const noexcept {
    return order == StencilOrder::second ? d1_second_ : d1_fourth_;
  }
  const Stencil& laplacian(StencilOrder order) const noexcept {
    return order == StencilOrder::second ? lap_second_ : lap_fourth_;
  }

 private:
  int dim_;
  double r_max_;
  double stretch_;
  double step_;
  double sphere_area_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> jacobian_;
  std::vector<double> curvature_;
  Stencil d1_second_, d1_fourth_, lap_second_, lap_fourth_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(int dim, double r_max, std::size_t m, double stretch);

// A real radial function sampled on the nodes of a grid.
class RadialField {
 public:
  RadialField() = default;  // empty, no grid
  explicit RadialField(GridPtr grid);
  RadialField(GridPtr grid, std::vector<double> values);

  template <class F>
  static RadialField sample(const GridPtr& grid, F&& f) {
    std::vector<double> v(grid->size());
    auto r = grid->nodes();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(r[i]);
    return RadialField(grid, std::move(v));
  }

  const RadialGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  bool all_finite() const noexcept;

  RadialField& operator+=(const RadialField& o);
  RadialField& operator-=(const RadialField& o);
  RadialField& operator*=(double c) noexcept;
  // this += c * o
  RadialField& axpy(double c, const RadialField& o);

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

RadialField operator+(RadialField a, const RadialField& b);
RadialField operator-(RadialField a, const RadialField& b);
RadialField operator*(double c, RadialField a);

// Throws ConfigError unless both fields live on the same grid object.
void require_same_grid(const RadialField& a, const RadialField& b);

// x^k by repeated squaring.
inline double int_pow(double x, int k) noexcept {
  double r = 1.0;
  while (k > 0) {
    if (k & 1) r *= x;
    x *= x;
    k >>= 1;
  }
  return r;
}

// Full-space integral of |f|^power.
double integrate(const RadialField& f, double power);
// Full-space integral of f g.
double l2_dot(const RadialField& f, const RadialField& g);
// Full-space integral of f g w.
double weighted_dot(const RadialField& f, const RadialField& g, const RadialField& w);
double l2_norm(const RadialField& f);

// df/dr by centered differences in the mapped coordinate. Even reflection
// through the origin (f'(0) = 0) and one-sided closure at r_max.
RadialField radial_derivative(const RadialField& f,
                              StencilOrder order = StencilOrder::fourth);

double grad_norm_sq(const RadialField& f);
double h1_dot(const RadialField& f, const RadialField& g);

// f'' + (N-1)/r f', with N f''(0) at the origin.
RadialField radial_laplacian(const RadialField& f,
                             StencilOrder order = StencilOrder::second);

// Integral over |x| > r_cut of A |x|^{-s} (1 - B |x|^{-2}) dx: the analytic
// tail of a field with a known two-term algebraic decay. Requires s > N.
double algebraic_tail(int dim, double r_cut, double amplitude, double decay, double next_coeff);

}  // namespace critwave
