#pragma once

// The explicit ground state W = (1 + r^2/(N(N-2)))^{-(N-2)/2}, its scaling
// generator W0, and the critical integrals entering the asymptotic constants.

#include "radial_core.hpp"

namespace critwave {

// Exponents of the energy-critical problem in dimension N.
struct CriticalExponents {
  int dim;
  double nonlinearity;  // 4/(N-2): the equation reads u_tt = Lap u + |u|^{nonlinearity} u
  double potential;     // (N+2)/(N-2): coefficient of W^{4/(N-2)} in the linearized operator
  double energy_power;  // 2N/(N-2)
  double snorm_power;   // 2(N+1)/(N-2)
  double snorm_nls_power;  // 2(N+2)/(N-2)

  static CriticalExponents for_dim(int dim);
};

// W(r) in closed form.
double ground_state_value(int dim, double r);
// W'(r) in closed form.
double ground_state_slope(int dim, double r);

RadialField eval_W(const GridPtr& grid);

struct ScalingGenerator {
  RadialField W0;
  double a_norm;  // W0 = a_norm ((N-2)/2 W + r W'), with |grad W0|_2 = 1
};

ScalingGenerator eval_W0(const GridPtr& grid);

// |Lap W + W^{(N+2)/(N-2)}|_2 / |W^{(N+2)/(N-2)}|_2 on the grid.
double stationarity_residual(const RadialField& W, StencilOrder order = StencilOrder::second);

struct CriticalIntegrals {
  double grad_W_sq = 0;      // int |grad W|^2
  double energy_W = 0;       // E(W, 0)
  double crit_pow = 0;       // int W^{2N/(N-2)}
  double snorm_pow = 0;      // int W^{2(N+1)/(N-2)}
  double snorm_pow_nls = 0;  // int W^{2(N+2)/(N-2)}

  // Analytic contributions from r > r_max included above.
  double tail_grad = 0;
  double tail_crit = 0;
  double tail_snorm = 0;
  double tail_snorm_nls = 0;
};

CriticalIntegrals critical_integrals(const RadialField& W);

// Tail beyond r_max of int W^q and of int |grad W|^2.
double ground_state_power_tail(int dim, double r_max, double q);
double ground_state_gradient_tail(int dim, double r_max);

// int_{R^N} W^q via the Beta function: |S^{N-1}| (N(N-2))^{N/2} B(N/2, a - N/2) / 2
// with a = q (N-2)/2.
double ground_state_power_beta(int dim, double q);

// The frequently quoted closed form for int W^{2(N+1)/(N-2)} (parity-split
// factorial expression). It lacks the angular factor; reported next to the
// Beta-function value for comparison only.
double snorm_pow_factorial_formula(int dim);

struct GroundStateBundle {
  RadialField W;
  RadialField W0;
  double a_norm;
  CriticalIntegrals integrals;
};

GroundStateBundle make_ground_state(const GridPtr& grid);

}  // namespace critwave
