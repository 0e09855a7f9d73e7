#include "wave_evolver.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace critwave {

namespace {

// |x|^q, integer powers by multiplication.
struct AbsPower {
  double q;
  int k;  // q as an integer, or -1
  explicit AbsPower(double q_) : q(q_), k(q_ == std::floor(q_) && q_ <= 16.0 ? static_cast<int>(q_) : -1) {}
  double operator()(double x) const noexcept {
    const double a = std::abs(x);
    return k >= 0 ? int_pow(a, k) : std::pow(a, q);
  }
};

double weighted_sum_pow(const RadialField& u, const AbsPower& p) {
  auto w = u.grid().weights();
  auto v = u.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += w[i] * p(v[i]);
  return u.grid().sphere_area() * acc;
}

}  // namespace

Exterior ground_state_exterior(const RadialGrid& grid) {
  const auto ex = CriticalExponents::for_dim(grid.dim());
  return {ground_state_gradient_tail(grid.dim(), grid.r_max()),
          ground_state_power_tail(grid.dim(), grid.r_max(), ex.energy_power),
          ground_state_power_tail(grid.dim(), grid.r_max(), ex.snorm_power)};
}

WaveState make_state(RadialField u0, RadialField u1, Exterior exterior) {
  require_same_grid(u0, u1);
  if (!u0.all_finite() || !u1.all_finite()) throw ConfigError("make_state: non-finite initial data");
  WaveState s;
  s.t = 0.0;
  s.u = std::move(u0);
  s.ut = std::move(u1);
  s.exterior = exterior;
  return s;
}

double energy(const WaveState& s) {
  const int dim = s.u.grid().dim();
  const auto ex = CriticalExponents::for_dim(dim);
  const double kinetic = l2_dot(s.ut, s.ut);
  const double grad = grad_norm_sq(s.u) + s.exterior.grad_sq;
  const double pot = weighted_sum_pow(s.u, AbsPower(ex.energy_power)) + s.exterior.potential;
  return 0.5 * kinetic + 0.5 * grad - (dim - 2.0) / (2.0 * dim) * pot;
}

double s_density(const WaveState& s) {
  const auto ex = CriticalExponents::for_dim(s.u.grid().dim());
  return weighted_sum_pow(s.u, AbsPower(ex.snorm_power)) + s.exterior.snorm;
}

// ---------------------------------------------------------------------------

Stepper::Stepper(GridPtr grid, StepperOptions opts) : grid_(std::move(grid)), opts_(opts) {
  if (!(opts_.cfl > 0.0) || opts_.cfl > 1.0) throw ConfigError("stepper: cfl must lie in (0, 1]");
  max_dt_ = opts_.cfl * grid_->min_spacing();
  blowup_level_ = 1e3 * ground_state_value(grid_->dim(), 0.0);
  f_.resize(grid_->size());
}

void Stepper::force(const RadialField& u, std::vector<double>& out) const {
  const Stencil& lap = grid_->laplacian(StencilOrder::fourth);
  lap.apply(u.values(), out);
  if (opts_.nonlinear) {
    const AbsPower p(CriticalExponents::for_dim(grid_->dim()).nonlinearity);
    auto v = u.values();
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += p(v[i]) * v[i];
  }
  out.back() = 0.0;
}

void Stepper::step(WaveState& s, double dt) const {
  if (std::abs(dt) > max_dt_ * (1.0 + 1e-12))
    throw ConfigError("stepper: |dt| = " + std::to_string(std::abs(dt)) + " exceeds the CFL bound " +
                      std::to_string(max_dt_));
  require_same_grid(s.u, s.ut);
  const std::size_t n = s.u.size();
  const std::size_t last = n - 1;
  auto u = s.u.values();
  auto ut = s.ut.values();
  force(s.u, f_);
  for (std::size_t i = 0; i < last; ++i) ut[i] += 0.5 * dt * f_[i];
  for (std::size_t i = 0; i < last; ++i) u[i] += dt * ut[i];
  force(s.u, f_);
  for (std::size_t i = 0; i < last; ++i) ut[i] += 0.5 * dt * f_[i];
  s.t += dt;

  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(u[i]);
    if (!std::isfinite(a) || !std::isfinite(ut[i])) {
      peak = std::numeric_limits<double>::infinity();
      break;
    }
    peak = std::max(peak, a);
  }
  if (!(peak <= blowup_level_))
    throw BlowUpError(s.t, "stepper: solution left the guard band at t = " + std::to_string(s.t));
}

WaveState step(const WaveState& s, double dt, const StepperOptions& opts) {
  WaveState out = s;
  Stepper(s.u.grid_ptr(), opts).step(out, dt);
  return out;
}

// ---------------------------------------------------------------------------

EvolveResult evolve(WaveState s, double t_end, const EvolveOptions& opts, const RadialField* reference,
                    double grad_W_sq, const Observer& observer) {
  if (!(t_end > s.t)) throw ConfigError("evolve: t_end must exceed the current time");
  if (!(opts.sample_interval > 0.0)) throw ConfigError("evolve: sample interval must be positive");
  if (reference) require_same_grid(s.u, *reference);
  const Stepper stepper(s.u.grid_ptr(), opts.stepper);
  if (opts.dt < 0.0 || opts.dt > stepper.max_dt() * (1.0 + 1e-12))
    throw ConfigError("evolve: dt = " + std::to_string(opts.dt) + " exceeds the CFL bound " +
                      std::to_string(stepper.max_dt()));
  const double dt_cap = opts.dt > 0.0 ? opts.dt : stepper.max_dt();
  const auto substeps = static_cast<std::size_t>(std::ceil(opts.sample_interval / dt_cap - 1e-9));
  const double dt = opts.sample_interval / static_cast<double>(substeps);
  const auto samples = static_cast<std::size_t>(std::ceil((t_end - s.t) / opts.sample_interval - 1e-9));
  const double t_start = s.t;

  EvolveLog log;
  log.dt = dt;
  log.times.reserve(samples + 1);
  const AbsPower snorm_pow(CriticalExponents::for_dim(s.u.grid().dim()).snorm_power);
  auto h_density = [&]() {
    auto w = s.u.grid().weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * snorm_pow(s.u[i] - (*reference)[i]);
    return s.u.grid().sphere_area() * acc;
  };
  double accum = 0.0;
  double rho = s_density(s);
  double h_accum = 0.0;
  double h_rho = reference ? h_density() : 0.0;

  auto record = [&]() -> bool {
    log.times.push_back(s.t);
    log.energy.push_back(energy(s));
    log.s_density.push_back(rho);
    log.s_accum.push_back(accum);
    if (reference) {
      log.h_density.push_back(h_rho);
      log.h_accum.push_back(h_accum);
    }
    const double kin = l2_norm(s.ut);
    double dev;
    if (reference) dev = std::sqrt(grad_norm_sq(s.u - *reference)) + kin;
    else dev = std::sqrt(grad_norm_sq(s.u)) + kin;
    log.h1_dev.push_back(dev);
    const double g = grad_norm_sq(s.u) + s.exterior.grad_sq;
    log.grad_sq.push_back(g);
    if (grad_W_sq > 0.0 && g >= grad_W_sq) ++log.threshold_violations;
    if (observer && !observer(s)) {
      log.stopped_by_observer = true;
      return false;
    }
    return true;
  };

  if (!record()) return {std::move(s), std::move(log)};
  for (std::size_t k = 1; k <= samples; ++k) {
    try {
      for (std::size_t j = 0; j < substeps; ++j) {
        stepper.step(s, dt);
        const double next = s_density(s);
        accum += 0.5 * dt * (rho + next);
        rho = next;
        if (reference) {
          const double h_next = h_density();
          h_accum += 0.5 * dt * (h_rho + h_next);
          h_rho = h_next;
        }
        ++log.steps;
      }
    } catch (const BlowUpError& e) {
      log.blew_up = true;
      log.blowup_time = e.time();
      break;
    }
    // Keep sample times on the exact grid t_start + k * interval.
    s.t = t_start + static_cast<double>(k) * opts.sample_interval;
    if (!record()) break;
  }
  return {std::move(s), std::move(log)};
}

namespace {

double window_integral(const std::vector<double>& t, const std::vector<double>& accum,
                       const std::vector<double>& density, double t0, double t1) {
  if (t.size() < 2 || accum.size() != t.size() || density.size() != t.size())
    throw ConfigError("window integral: log has fewer than two samples");
  const double tol = 1e-9 * std::max(1.0, std::abs(t.back()));
  if (!(t0 <= t1) || t0 < t.front() - tol || t1 > t.back() + tol)
    throw ConfigError("window integral: window outside the logged range");
  auto accum_at = [&](double x) {
    x = std::clamp(x, t.front(), t.back());
    std::size_t k = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin());
    k = std::clamp<std::size_t>(k, 1, t.size() - 1) - 1;
    const double h = t[k + 1] - t[k];
    const double th = (x - t[k]) / h;
    const double th2 = th * th;
    const double th3 = th2 * th;
    return (2 * th3 - 3 * th2 + 1) * accum[k] + (th3 - 2 * th2 + th) * h * density[k] +
           (-2 * th3 + 3 * th2) * accum[k + 1] + (th3 - th2) * h * density[k + 1];
  };
  return accum_at(t1) - accum_at(t0);
}

}  // namespace

double s_norm_window(const EvolveLog& log, double t0, double t1) {
  return window_integral(log.times, log.s_accum, log.s_density, t0, t1);
}

double h_norm_window(const EvolveLog& log, double t0, double t1) {
  return window_integral(log.times, log.h_accum, log.h_density, t0, t1);
}

}  // namespace critwave
