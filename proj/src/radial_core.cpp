#include "radial_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace critwave {

namespace {

// Offsets/coefficients of a one-dimensional difference formula in s.
struct Formula {
  std::vector<int> offsets;
  std::vector<double> coeffs;
};

Formula first_derivative(StencilOrder order, std::size_t i, std::size_t last) {
  if (i == 0) return {};
  if (order == StencilOrder::second) {
    if (i == last) return {{0, -1, -2}, {1.5, -2.0, 0.5}};
    return {{1, -1}, {0.5, -0.5}};
  }
  if (i == last) return {{0, -1, -2, -3, -4}, {25.0 / 12, -4.0, 3.0, -4.0 / 3, 0.25}};
  if (i + 1 == last) return {{1, 0, -1, -2, -3}, {0.25, 10.0 / 12, -1.5, 0.5, -1.0 / 12}};
  return {{2, 1, -1, -2}, {-1.0 / 12, 8.0 / 12, -8.0 / 12, 1.0 / 12}};
}

Formula second_derivative(StencilOrder order, std::size_t i, std::size_t last) {
  if (order == StencilOrder::second) {
    if (i == last) return {{0, -1, -2, -3}, {2.0, -5.0, 4.0, -1.0}};
    return {{1, 0, -1}, {1.0, -2.0, 1.0}};
  }
  if (i == last)
    return {{0, -1, -2, -3, -4, -5},
            {45.0 / 12, -154.0 / 12, 214.0 / 12, -156.0 / 12, 61.0 / 12, -10.0 / 12}};
  if (i + 1 == last)
    return {{1, 0, -1, -2, -3, -4},
            {10.0 / 12, -15.0 / 12, -4.0 / 12, 14.0 / 12, -6.0 / 12, 1.0 / 12}};
  return {{2, 1, 0, -1, -2}, {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12}};
}

// Radial functions are even in r, and r(s) is odd in s, so ghost values
// below the origin reflect: f(s_{-k}) = f(s_k).
std::size_t reflect(std::ptrdiff_t j) { return static_cast<std::size_t>(j < 0 ? -j : j); }

// Accumulates coefficient*formula into a dense scratch row keyed by column.
void add_formula(std::vector<std::pair<std::size_t, double>>& row, const Formula& f,
                 std::size_t i, double scale) {
  for (std::size_t k = 0; k < f.offsets.size(); ++k) {
    const std::size_t col = reflect(static_cast<std::ptrdiff_t>(i) + f.offsets[k]);
    auto it = std::find_if(row.begin(), row.end(), [&](auto& p) { return p.first == col; });
    if (it == row.end())
      row.emplace_back(col, scale * f.coeffs[k]);
    else
      it->second += scale * f.coeffs[k];
  }
}

Stencil build_derivative(const RadialGrid& g, StencilOrder order) {
  Stencil st;
  const std::size_t last = g.size() - 1;
  const double h = g.step();
  auto rs = g.jacobian();
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t i = 0; i <= last; ++i) {
    row.clear();
    add_formula(row, first_derivative(order, i, last), i, 1.0 / (h * rs[i]));
    std::sort(row.begin(), row.end());
    st.begin_row();
    for (auto& [c, v] : row) st.add(c, v);
  }
  st.finish();
  return st;
}

Stencil build_laplacian(const RadialGrid& g, StencilOrder order) {
  Stencil st;
  const std::size_t last = g.size() - 1;
  const double h = g.step();
  const int n = g.dim();
  auto r = g.nodes();
  auto rs = g.jacobian();
  auto rss = g.curvature();
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t i = 0; i <= last; ++i) {
    row.clear();
    const double inv2 = 1.0 / (rs[i] * rs[i] * h * h);
    if (i == 0) {
      // Regularity at the origin: Laplacian = N f''(0), and r''(0) = 0.
      add_formula(row, second_derivative(order, 0, last), 0, n * inv2);
    } else {
      add_formula(row, second_derivative(order, i, last), i, inv2);
      const double d1 = ((n - 1) / (r[i] * rs[i]) - rss[i] / (rs[i] * rs[i] * rs[i])) / h;
      add_formula(row, first_derivative(order, i, last), i, d1);
    }
    std::sort(row.begin(), row.end());
    st.begin_row();
    for (auto& [c, v] : row) st.add(c, v);
  }
  st.finish();
  return st;
}

}  // namespace

void Stencil::add(std::size_t col, double c) {
  index_.push_back(col);
  coeff_.push_back(c);
}

void Stencil::finish() { offsets_.push_back(index_.size()); }

void Stencil::apply(std::span<const double> in, std::span<double> out) const noexcept {
  const std::size_t n = rows();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) acc += coeff_[k] * in[index_[k]];
    out[i] = acc;
  }
}

double Stencil::apply_row(std::size_t row, std::span<const double> in) const noexcept {
  double acc = 0.0;
  for (std::size_t k = offsets_[row]; k < offsets_[row + 1]; ++k) acc += coeff_[k] * in[index_[k]];
  return acc;
}

double Stencil::max_row_sum() const noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < offsets_.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s += std::abs(coeff_[k]);
    best = std::max(best, s);
  }
  return best;
}

double sphere_area(int dim) {
  return 2.0 * std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0);
}

RadialGrid::RadialGrid(int dim, double r_max, std::size_t m, double stretch)
    : dim_(dim), r_max_(r_max), stretch_(stretch) {
  if (dim < 3 || dim > 5) throw ConfigError("grid: dimension must be 3, 4 or 5, got " + std::to_string(dim));
  if (m < 64) throw ConfigError("grid: need at least 64 nodes, got " + std::to_string(m));
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw ConfigError("grid: r_max must be positive");
  if (!(stretch > 0.0) || !std::isfinite(stretch) || stretch > 50.0)
    throw ConfigError("grid: stretch must lie in (0, 50]");

  sphere_area_ = critwave::sphere_area(dim);
  step_ = 1.0 / static_cast<double>(m - 1);
  nodes_.resize(m);
  jacobian_.resize(m);
  curvature_.resize(m);
  weights_.resize(m);
  const double scale = r_max / std::sinh(stretch);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = (i + 1 == m) ? 1.0 : static_cast<double>(i) * step_;
    nodes_[i] = scale * std::sinh(stretch * s);
    jacobian_[i] = scale * stretch * std::cosh(stretch * s);
    curvature_[i] = scale * stretch * stretch * std::sinh(stretch * s);
  }
  nodes_.front() = 0.0;
  nodes_.back() = r_max;
  for (std::size_t i = 1; i < m; ++i)
    if (!(nodes_[i] > nodes_[i - 1])) throw ConfigError("grid: mapping is not strictly increasing");

  // Gregory end corrections of the trapezoid rule (exact for cubics in s).
  constexpr double ends[3] = {3.0 / 8, 7.0 / 6, 23.0 / 24};
  for (std::size_t i = 0; i < m; ++i) {
    double g = 1.0;
    if (i < 3) g = ends[i];
    else if (m - 1 - i < 3) g = ends[m - 1 - i];
    weights_[i] = g * step_ * jacobian_[i] * std::pow(nodes_[i], dim - 1);
  }

  d1_second_ = build_derivative(*this, StencilOrder::second);
  d1_fourth_ = build_derivative(*this, StencilOrder::fourth);
  lap_second_ = build_laplacian(*this, StencilOrder::second);
  lap_fourth_ = build_laplacian(*this, StencilOrder::fourth);
}

GridPtr make_grid(int dim, double r_max, std::size_t m, double stretch) {
  return std::make_shared<const RadialGrid>(dim, r_max, m, stretch);
}

RadialField::RadialField(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}

RadialField::RadialField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size())
    throw ConfigError("field: value count does not match grid size");
}

bool RadialField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

RadialField& RadialField::operator+=(const RadialField& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

RadialField& RadialField::operator-=(const RadialField& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

RadialField& RadialField::operator*=(double c) noexcept {
  for (double& v : values_) v *= c;
  return *this;
}

RadialField& RadialField::axpy(double c, const RadialField& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += c * o.values_[i];
  return *this;
}

RadialField operator+(RadialField a, const RadialField& b) { return a += b; }
RadialField operator-(RadialField a, const RadialField& b) { return a -= b; }
RadialField operator*(double c, RadialField a) { return a *= c; }

void require_same_grid(const RadialField& a, const RadialField& b) {
  if (a.grid_ptr() != b.grid_ptr()) throw ConfigError("fields live on different grids");
}

double integrate(const RadialField& f, double power) {
  if (!(power >= 1.0)) throw ConfigError("integrate: power must be >= 1");
  auto w = f.grid().weights();
  auto v = f.values();
  double acc = 0.0;
  if (power == 1.0) {
    for (std::size_t i = 0; i < v.size(); ++i) acc += w[i] * std::abs(v[i]);
  } else if (power == 2.0) {
    for (std::size_t i = 0; i < v.size(); ++i) acc += w[i] * v[i] * v[i];
  } else if (power == std::floor(power) && power <= 16.0) {
    const int k = static_cast<int>(power);
    for (std::size_t i = 0; i < v.size(); ++i) acc += w[i] * int_pow(std::abs(v[i]), k);
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) acc += w[i] * std::pow(std::abs(v[i]), power);
  }
  const double out = f.grid().sphere_area() * acc;
  if (!std::isfinite(out)) throw NumericalError("integrate: overflow");
  return out;
}

double l2_dot(const RadialField& f, const RadialField& g) {
  require_same_grid(f, g);
  auto w = f.grid().weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * f[i] * g[i];
  return f.grid().sphere_area() * acc;
}

double weighted_dot(const RadialField& f, const RadialField& g, const RadialField& wt) {
  require_same_grid(f, g);
  require_same_grid(f, wt);
  auto w = f.grid().weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * f[i] * g[i] * wt[i];
  return f.grid().sphere_area() * acc;
}

double l2_norm(const RadialField& f) { return std::sqrt(l2_dot(f, f)); }

RadialField radial_derivative(const RadialField& f, StencilOrder order) {
  RadialField out(f.grid_ptr());
  f.grid().derivative(order).apply(f.values(), out.values());
  return out;
}

double grad_norm_sq(const RadialField& f) {
  const RadialField d = radial_derivative(f);
  return l2_dot(d, d);
}

double h1_dot(const RadialField& f, const RadialField& g) {
  require_same_grid(f, g);
  return l2_dot(radial_derivative(f), radial_derivative(g));
}

RadialField radial_laplacian(const RadialField& f, StencilOrder order) {
  RadialField out(f.grid_ptr());
  f.grid().laplacian(order).apply(f.values(), out.values());
  return out;
}

double algebraic_tail(int dim, double r_cut, double amplitude, double decay, double next_coeff) {
  if (!(decay > dim)) throw ConfigError("algebraic_tail: integrand is not integrable at infinity");
  const double lead = std::pow(r_cut, dim - decay) / (decay - dim);
  const double next = next_coeff * std::pow(r_cut, dim - decay - 2.0) / (decay + 2.0 - dim);
  return sphere_area(dim) * amplitude * (lead - next);
}

}  // namespace critwave
