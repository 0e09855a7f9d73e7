#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "spectral.hpp"
#include "wave_evolver.hpp"

using namespace critwave;

namespace {

double phi(double s) { return std::exp(-(s * s)); }
double dphi(double s) { return -2 * s * std::exp(-(s * s)); }

// Free radial wave in N = 3 with u(0) = phi, u_t(0) = 0: r u solves the 1D
// wave equation, so u = [(r-t) phi(r-t) + (r+t) phi(r+t)] / (2r).
double dalembert(double t, double r) {
  if (r == 0.0) return phi(t) + t * dphi(t);
  return ((r - t) * phi(r - t) + (r + t) * phi(r + t)) / (2 * r);
}

double linear_error(std::size_t m) {
  auto g = make_grid(3, 20.0, m, 2.0);
  auto u0 = RadialField::sample(g, phi);
  auto s = make_state(u0, RadialField(g));
  EvolveOptions o;
  o.sample_interval = 0.05;
  o.stepper.nonlinear = false;
  auto res = evolve(s, 3.0, o);
  auto r = g->nodes();
  double err = 0;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i] < 12) err = std::max(err, std::abs(res.state.u[i] - dalembert(3.0, r[i])));
  return err;
}

}  // namespace

TEST_CASE("energy and S-density of the ground state") {
  auto g = make_grid(3, 120.0, 4096, 6.0);
  auto gs = make_ground_state(g);
  auto s = make_state(gs.W, RadialField(g), ground_state_exterior(*g));
  CHECK(energy(s) == doctest::Approx(gs.integrals.grad_W_sq / 3).epsilon(1e-8));
  CHECK(energy(s) == doctest::Approx(gs.integrals.energy_W).epsilon(1e-12));
  CHECK(s_density(s) == doctest::Approx(ground_state_power_beta(3, 8)).epsilon(1e-7));
}

TEST_CASE("free waves match d'Alembert at second order") {
  double e1 = linear_error(512), e2 = linear_error(1024);
  CHECK(e2 < 1e-3);
  CHECK(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("kick-drift-kick steps are reversible") {
  auto g = make_grid(3, 40.0, 1024, 4.0);
  auto gs = make_ground_state(g);
  auto u0 = RadialField::sample(g, [](double r) { return -0.05 * std::exp(-r * r / 4); });
  auto s = make_state(gs.W + u0, RadialField(g), ground_state_exterior(*g));
  auto start = s;
  Stepper st(g);
  double dt = 0.9 * st.max_dt();
  for (int k = 0; k < 200; ++k) st.step(s, dt);
  for (int k = 0; k < 200; ++k) st.step(s, -dt);
  // energy-norm distance; round-off in u near the origin, where the cells
  // are smallest, shows up in u_t amplified by 1/h
  double err = std::sqrt(grad_norm_sq(s.u - start.u)) + l2_norm(s.ut - start.ut);
  CHECK(err <= 1e-12 * std::sqrt(grad_norm_sq(start.u)));
  double du = 0;
  for (std::size_t i = 0; i < s.u.size(); ++i) du = std::max(du, std::abs(s.u[i] - start.u[i]));
  CHECK(du <= 1e-13);
  CHECK(std::abs(s.t) < 1e-12);
}

TEST_CASE("CFL violations are configuration errors") {
  auto g = make_grid(3, 40.0, 512, 4.0);
  Stepper st(g);
  auto s = make_state(RadialField(g), RadialField(g));
  CHECK_THROWS_AS(st.step(s, 1.5 * st.max_dt()), ConfigError);
  CHECK(st.max_dt() == doctest::Approx(0.5 * g->min_spacing()));
}

TEST_CASE("ground state is stationary and conserves energy") {
  auto g = make_grid(3, 120.0, 2048, 6.0);
  auto gs = make_ground_state(g);
  auto s = make_state(gs.W, RadialField(g), ground_state_exterior(*g));
  EvolveOptions o;
  o.sample_interval = 0.1;
  auto res = evolve(s, 3.0, o, &gs.W, gs.integrals.grad_W_sq);
  const auto& log = res.log;
  CHECK_FALSE(log.blew_up);
  double e0 = log.energy.front();
  for (double e : log.energy) CHECK(std::abs(e / e0 - 1) < 1e-8);
  CHECK(log.h1_dev.back() < 1e-4);
  // windowed S-norm of a stationary state: t int W^8
  double I8 = s_density(s);
  CHECK(s_norm_window(log, 0.0, 3.0) == doctest::Approx(3.0 * I8).epsilon(1e-6));
  CHECK(s_norm_window(log, 0.55, 1.25) == doctest::Approx(0.7 * I8).epsilon(1e-6));
  CHECK(h_norm_window(log, 0.0, 3.0) >= 0.0);
  // sample spacing divides evenly into steps
  CHECK(log.times.size() == 31);
  CHECK(log.times.back() == doctest::Approx(3.0));
}

TEST_CASE("data above the ground state blow up") {
  auto g = make_grid(3, 60.0, 2048, 6.0);
  auto gs = make_ground_state(g);
  auto ep = ground_eigen_grid(g, gs.W);
  // W + a Y with the sign making the solution focus
  double sgn = ep.Y[0] > 0 ? 1.0 : -1.0;
  auto s = make_state(gs.W + (0.1 * sgn) * ep.Y, RadialField(g), ground_state_exterior(*g));
  EvolveOptions o;
  o.sample_interval = 0.05;
  auto res = evolve(s, 40.0, o);
  CHECK(res.log.blew_up);
  CHECK(res.log.blowup_time > 0);
  CHECK(res.log.blowup_time < 40);
}

TEST_CASE("observer can stop a run") {
  auto g = make_grid(3, 40.0, 512, 4.0);
  auto s = make_state(RadialField::sample(g, [](double r) { return 0.1 * std::exp(-r * r); }), RadialField(g));
  EvolveOptions o;
  o.sample_interval = 0.1;
  int calls = 0;
  auto res = evolve(s, 10.0, o, nullptr, 0, [&](const WaveState&) { return ++calls < 5; });
  CHECK(res.log.stopped_by_observer);
  CHECK(res.log.times.size() == 5);
  CHECK(res.state.t == doctest::Approx(0.4));
}
