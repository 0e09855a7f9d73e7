#include <doctest.h>

#include <cmath>
#include <functional>

#include "errors.hpp"
#include "modulation.hpp"

using namespace critwave;

namespace {

ModulationTrace synthetic(const std::function<double(double)>& beta, const std::function<double(double)>& dbeta,
                          double t_end, double dt = 0.01) {
  ModulationTrace tr;
  const auto n = static_cast<std::size_t>(std::llround(t_end / dt));
  for (std::size_t k = 0; k <= n; ++k) {
    double t = k * dt;
    Decomposition d;
    d.beta = beta(t);
    d.beta_prime = dbeta(t);
    d.dh_norm = 2 * std::abs(d.beta);
    tr.push(t, d);
  }
  return tr;
}

}  // namespace

TEST_CASE("exit time of an exponential") {
  auto tr = synthetic([](double t) { return -1e-4 * std::exp(t); }, [](double t) { return -1e-4 * std::exp(t); }, 8);
  auto T = exit_time(tr, 0.05);
  REQUIRE(T);
  CHECK(*T == doctest::Approx(std::log(500.0)).epsilon(1e-5));
  CHECK_FALSE(exit_time(tr, 10.0));
  CHECK(*exit_time(tr, 1e-5) == 0.0);
}

TEST_CASE("growth fit recovers the rate of a pure exponential") {
  const double w = 1.1;
  auto tr = synthetic([=](double t) { return 1e-5 * std::exp(w * t); },
                      [=](double t) { return 1e-5 * w * std::exp(w * t); }, 12);
  auto f = growth_fit(tr, 0.05, w);
  CHECK(f.omega_fit == doctest::Approx(w).epsilon(1e-10));
  CHECK(f.tau0 == doctest::Approx(std::log(3.0) / w).epsilon(1e-2));
  CHECK(f.exit_time == doctest::Approx(std::log(5000.0) / w).epsilon(1e-5));
  CHECK(f.beta_prime_at_exit == doctest::Approx(w * 0.05).epsilon(1e-3));
  CHECK(f.window_samples > 10);
  CHECK(f.K0_fit >= 1.0);
}

TEST_CASE("cosh transient biases the fit low and fades as beta(0)/eta shrinks") {
  const double w = 1.1;
  double prev = 0;
  for (double b0 : {1e-2, 1e-3, 1e-4, 1e-5}) {
    auto tr = synthetic([=](double t) { return -b0 * std::cosh(w * t); },
                        [=](double t) { return -b0 * w * std::sinh(w * t); }, 20);
    auto f = growth_fit(tr, 0.05, w);
    CAPTURE(b0);
    CHECK(f.omega_fit < w);
    CHECK(f.omega_fit > prev);
    prev = f.omega_fit;
  }
  CHECK(prev == doctest::Approx(w).epsilon(5e-3));
}

TEST_CASE("growth fit errors") {
  auto flat = synthetic([](double) { return 1e-3; }, [](double) { return 0.0; }, 5);
  CHECK_THROWS_AS(growth_fit(flat, 0.05, 1.0), NumericalError);
  // exits before a usable window
  auto fast = synthetic([](double t) { return 0.04 * std::exp(t); }, [](double t) { return 0.04 * std::exp(t); }, 3);
  CHECK_THROWS_AS(growth_fit(fast, 0.05, 1.0), NumericalError);
}

TEST_CASE("ODE residual: exact for cosh, closed form for a quadratic") {
  const double w = 1.3;
  auto c = synthetic([=](double t) { return 1e-3 * std::cosh(w * t); },
                     [=](double t) { return 1e-3 * w * std::sinh(w * t); }, 4);
  auto rc = beta_ode_residual(c, w);
  double worst = 0;
  for (std::size_t k = 0; k < rc.residual.size(); ++k)
    worst = std::max(worst, rc.residual[k] / (1e-3 * std::cosh(w * rc.times[k])));
  CHECK(worst < 1e-4 * w * w);  // central difference: (w dt)^2 / 12
  CHECK(rc.used == rc.residual.size());

  auto q = synthetic([](double t) { return t * t; }, [](double t) { return 2 * t; }, 2, 0.05);
  auto rq = beta_ode_residual(q, w);
  REQUIRE(rq.times.size() == q.size() - 2);
  for (std::size_t k = 0; k < rq.times.size(); ++k) {
    double t = rq.times[k];
    CHECK(rq.residual[k] == doctest::Approx(std::abs(2 - w * w * t * t)).epsilon(1e-9));
  }
  auto capped = beta_ode_residual(q, w, 1.0);
  CHECK(capped.used < rq.used);

  ModulationTrace tiny;
  tiny.push(0, Decomposition{});
  CHECK_THROWS_AS(beta_ode_residual(tiny, w), NumericalError);
}

TEST_CASE("decomposition of a constructed state") {
  auto g = make_grid(3, 120.0, 2048, 6.0);
  auto gs = make_ground_state(g);
  auto ep = ground_eigen_grid(g, gs.W);
  Decomposer dec(gs.W, ep.Y, gs.W0);
  auto bump = RadialField::sample(g, [](double r) { return std::exp(-(r - 4) * (r - 4)); });
  auto gperp = dec.complement().project(bump);
  auto u = gs.W + 0.02 * ep.Y + 0.005 * gs.W0 + gperp;
  auto ut = -0.3 * ep.Y + gperp;
  auto d = dec(make_state(u, ut));
  CHECK(d.beta == doctest::Approx(0.02).epsilon(1e-10));
  CHECK(d.gamma0 == doctest::Approx(0.005).epsilon(1e-9));
  CHECK(d.beta_prime == doctest::Approx(-0.3).epsilon(1e-10));
  CHECK(d.g_h1 == doctest::Approx(std::sqrt(grad_norm_sq(gperp))).epsilon(1e-9));
  auto d2 = decompose(make_state(u, ut), gs.W, ep.Y, gs.W0);
  CHECK(d2.beta == doctest::Approx(d.beta));
  CHECK(d.dh_norm > d.g_h1);
}
