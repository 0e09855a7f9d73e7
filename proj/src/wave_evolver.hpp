#pragma once

// Leapfrog (kick-drift-kick) time stepping of the radial focusing wave
// equation u_tt = Lap u + |u|^{4/(N-2)} u, with energy and S-norm monitors.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ground_state.hpp"
#include "radial_core.hpp"

namespace critwave {

// Contributions of the region r > r_max, where the field is held at its
// boundary profile. For data that agree with W there, these are W's tails.
struct Exterior {
  double grad_sq = 0;    // int_{r>r_max} |grad u|^2
  double potential = 0;  // int_{r>r_max} |u|^{2N/(N-2)}
  double snorm = 0;      // int_{r>r_max} |u|^{2(N+1)/(N-2)}
};

Exterior ground_state_exterior(const RadialGrid& grid);

struct WaveState {
  double t = 0;
  RadialField u;
  RadialField ut;
  Exterior exterior;
};

WaveState make_state(RadialField u0, RadialField u1, Exterior exterior = {});

// E = 1/2 int u_t^2 + 1/2 int |grad u|^2 - (N-2)/(2N) int |u|^{2N/(N-2)}.
double energy(const WaveState& s);

// int |u|^{2(N+1)/(N-2)} dx at the current time.
double s_density(const WaveState& s);

struct StepperOptions {
  double cfl = 0.5;
  bool nonlinear = true;
};

class Stepper {
 public:
  Stepper(GridPtr grid, StepperOptions opts = {});

  double max_dt() const noexcept { return max_dt_; }
  const StepperOptions& options() const noexcept { return opts_; }

  // One kick-drift-kick step; dt may be negative. The boundary node keeps
  // its value. Throws ConfigError when |dt| exceeds the CFL bound and
  // BlowUpError when the field leaves the guard band.
  void step(WaveState& s, double dt) const;

 private:
  void force(const RadialField& u, std::vector<double>& out) const;

  GridPtr grid_;
  StepperOptions opts_;
  double max_dt_;
  double blowup_level_;
  mutable std::vector<double> f_;
};

WaveState step(const WaveState& s, double dt, const StepperOptions& opts = {});

struct EvolveLog {
  std::vector<double> times;
  std::vector<double> energy;
  std::vector<double> s_density;
  std::vector<double> s_accum;  // int_0^t int |u|^{2(N+1)/(N-2)}, trapezoid over every step
  std::vector<double> h1_dev;   // |grad(u - W)|_2 + |u_t|_2
  std::vector<double> grad_sq;  // |grad u|_2^2 including the exterior
  // Same accumulation for |u - reference|; empty without a reference.
  std::vector<double> h_density;
  std::vector<double> h_accum;
  double dt = 0;
  std::size_t steps = 0;
  bool blew_up = false;
  double blowup_time = 0;
  bool stopped_by_observer = false;
  // Samples where |grad u|_2 reached |grad W|_2 (below-threshold monitor).
  std::size_t threshold_violations = 0;
};

struct EvolveOptions {
  double sample_interval = 0.01;
  double dt = 0;  // upper bound on the step; 0 means the CFL bound
  StepperOptions stepper;
};

// Called at every sample (including t = 0); returning false stops the run.
using Observer = std::function<bool(const WaveState&)>;

struct EvolveResult {
  WaveState state;
  EvolveLog log;
};

// The time step is the largest one within the CFL bound (and opts.dt when
// set) that divides the sample interval. reference is the field h1_dev is measured from (W, or
// zero when absent); grad_W_sq enables the threshold monitor when positive.
EvolveResult evolve(WaveState s, double t_end, const EvolveOptions& opts,
                    const RadialField* reference = nullptr, double grad_W_sq = 0,
                    const Observer& observer = {});

// Time integral of the S-density over [t0, t1], interpolating the running
// accumulator between samples (cubic Hermite, using the density as slope).
double s_norm_window(const EvolveLog& log, double t0, double t1);
// The same window integral for |u - reference|.
double h_norm_window(const EvolveLog& log, double t0, double t1);

}  // namespace critwave
