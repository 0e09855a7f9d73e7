#pragma once

// Fixed-frame modulation of h = u - W along Y and W0, exit times from the
// neighbourhood |beta| < eta, and the growth diagnostics of beta.

#include <limits>
#include <optional>
#include <vector>

#include "radial_core.hpp"
#include "spectral.hpp"
#include "wave_evolver.hpp"

namespace critwave {

struct Decomposition {
  double beta = 0;        // coefficient of Y in h
  double beta_prime = 0;  // same functional applied to u_t
  double gamma0 = 0;      // coefficient of W0
  RadialField g;          // remainder, in the complement of span{Y, W0}
  double g_h1 = 0;        // |grad g|_2
  double dh_norm = 0;     // |grad h|_2 + |u_t|_2
};

class Decomposer {
 public:
  Decomposer(RadialField W, RadialField Y, RadialField W0);
  Decomposition operator()(const WaveState& s) const;
  const OrthogonalComplement& complement() const noexcept { return proj_; }

 private:
  RadialField W_;
  OrthogonalComplement proj_;
};

Decomposition decompose(const WaveState& s, const RadialField& W, const RadialField& Y,
                        const RadialField& W0);

struct ModulationTrace {
  std::vector<double> times;
  std::vector<double> beta;
  std::vector<double> beta_prime;
  std::vector<double> gamma0;
  std::vector<double> g_h1;
  std::vector<double> dh_norm;

  void push(double t, const Decomposition& d);
  std::size_t size() const noexcept { return times.size(); }
};

// First time |beta| >= eta, linearly interpolated between samples.
std::optional<double> exit_time(const ModulationTrace& trace, double eta);

struct BetaOdeResidual {
  std::vector<double> times;     // interior samples
  std::vector<double> residual;  // |beta'' - omega^2 beta|, beta'' by central differences
  double C1 = 0;                 // max residual / dh_norm^2 over samples with |beta| <= beta_cap
  std::size_t used = 0;
};

BetaOdeResidual beta_ode_residual(const ModulationTrace& trace, double omega,
                                  double beta_cap = std::numeric_limits<double>::infinity());

struct ModulationFit {
  double omega_fit = 0;
  double tau0 = 0;
  double exit_time = 0;
  double beta_prime_at_exit = 0;
  double residual_const = 0;  // C1 on samples with |beta| <= eta
  double K0_fit = 0;
  double M0_fit = 0;
  double initial_bound = 0;  // (dh_norm(0) + eps) / |beta(0)|, filled in by the sweep
  std::size_t window_samples = 0;
};

// Least-squares slope of log|beta| on [tau0, T(eta)], tau0 the first time
// |beta| >= 3 |beta(0)|. Throws NumericalError when beta never reaches eta
// or the window has fewer than 10 samples.
ModulationFit growth_fit(const ModulationTrace& trace, double eta, double omega);

}  // namespace critwave
