#include "ground_state.hpp"

#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace critwave {

namespace {

double conformal_const(int dim) { return static_cast<double>(dim * (dim - 2)); }
double half_gap(int dim) { return (dim - 2) / 2.0; }

double factorial(int n) { return std::tgamma(n + 1.0); }

void require_dim(int dim) {
  if (dim < 3 || dim > 5) throw ConfigError("dimension must be 3, 4 or 5");
}

}  // namespace

CriticalExponents CriticalExponents::for_dim(int dim) {
  require_dim(dim);
  const double d = dim - 2.0;
  return {dim, 4.0 / d, (dim + 2.0) / d, 2.0 * dim / d, 2.0 * (dim + 1.0) / d,
          2.0 * (dim + 2.0) / d};
}

double ground_state_value(int dim, double r) {
  require_dim(dim);
  return std::pow(1.0 + r * r / conformal_const(dim), -half_gap(dim));
}

double ground_state_slope(int dim, double r) {
  require_dim(dim);
  const double c = conformal_const(dim);
  const double p = half_gap(dim);
  return -2.0 * p * r / c * std::pow(1.0 + r * r / c, -p - 1.0);
}

RadialField eval_W(const GridPtr& grid) {
  const int dim = grid->dim();
  return RadialField::sample(grid, [dim](double r) { return ground_state_value(dim, r); });
}

ScalingGenerator eval_W0(const GridPtr& grid) {
  const int dim = grid->dim();
  const double c = conformal_const(dim);
  const double p = half_gap(dim);
  // (N-2)/2 W + r W' = p (1 - x) (1 + x)^{-p-1}, x = r^2/c.
  RadialField w0 = RadialField::sample(grid, [&](double r) {
    const double x = r * r / c;
    return p * (1.0 - x) * std::pow(1.0 + x, -p - 1.0);
  });
  // Its gradient squared decays like 4 p^4 c^{2p} r^{-4p-2} (1 - 2(p+2)(1+1/p) c / r^2).
  const double tail = algebraic_tail(dim, grid->r_max(), 4.0 * std::pow(p, 4) * std::pow(c, 2 * p),
                                     4 * p + 2, 2.0 * (p + 2.0) * (1.0 + 1.0 / p) * c);
  const double a = 1.0 / std::sqrt(grad_norm_sq(w0) + tail);
  w0 *= a;
  return {std::move(w0), a};
}

double stationarity_residual(const RadialField& W, StencilOrder order) {
  const auto ex = CriticalExponents::for_dim(W.grid().dim());
  RadialField source(W.grid_ptr());
  for (std::size_t i = 0; i < W.size(); ++i) source[i] = std::pow(std::abs(W[i]), ex.potential);
  RadialField res = radial_laplacian(W, order);
  res += source;
  return l2_norm(res) / l2_norm(source);
}

double ground_state_power_tail(int dim, double r_max, double q) {
  const double c = conformal_const(dim);
  const double a = half_gap(dim) * q;
  return algebraic_tail(dim, r_max, std::pow(c, a), 2 * a, a * c);
}

double ground_state_gradient_tail(int dim, double r_max) {
  const double c = conformal_const(dim);
  const double p = half_gap(dim);
  return algebraic_tail(dim, r_max, 4 * p * p * std::pow(c, 2 * p), 4 * p + 2, (2 * p + 2) * c);
}

CriticalIntegrals critical_integrals(const RadialField& W) {
  const auto& g = W.grid();
  const int dim = g.dim();
  const auto ex = CriticalExponents::for_dim(dim);
  CriticalIntegrals out;
  out.tail_grad = ground_state_gradient_tail(dim, g.r_max());
  out.tail_crit = ground_state_power_tail(dim, g.r_max(), ex.energy_power);
  out.tail_snorm = ground_state_power_tail(dim, g.r_max(), ex.snorm_power);
  out.tail_snorm_nls = ground_state_power_tail(dim, g.r_max(), ex.snorm_nls_power);
  out.grad_W_sq = grad_norm_sq(W) + out.tail_grad;
  out.crit_pow = integrate(W, ex.energy_power) + out.tail_crit;
  out.snorm_pow = integrate(W, ex.snorm_power) + out.tail_snorm;
  out.snorm_pow_nls = integrate(W, ex.snorm_nls_power) + out.tail_snorm_nls;
  out.energy_W = 0.5 * out.grad_W_sq - (dim - 2.0) / (2.0 * dim) * out.crit_pow;
  return out;
}

double ground_state_power_beta(int dim, double q) {
  const double a = half_gap(dim) * q;
  const double n2 = dim / 2.0;
  if (!(a > n2)) throw ConfigError("ground_state_power_beta: integral diverges");
  return sphere_area(dim) * std::pow(conformal_const(dim), n2) * 0.5 * std::beta(n2, a - n2);
}

double snorm_pow_factorial_formula(int dim) {
  const double lead = std::pow(conformal_const(dim), dim / 2.0);
  if (dim % 2 == 0) {
    return lead / std::pow(2.0, 2 * dim + 1) * factorial(dim) /
           std::pow(factorial(dim / 2), 2) * std::numbers::pi;
  }
  return lead / 2.0 * factorial((dim - 1) / 2) / factorial(dim);
}

GroundStateBundle make_ground_state(const GridPtr& grid) {
  RadialField W = eval_W(grid);
  auto gen = eval_W0(grid);
  auto integrals = critical_integrals(W);
  return {std::move(W), std::move(gen.W0), gen.a_norm, integrals};
}

}  // namespace critwave
