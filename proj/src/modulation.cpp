#include "modulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace critwave {

Decomposer::Decomposer(RadialField W, RadialField Y, RadialField W0)
    : W_(std::move(W)), proj_(std::move(Y), std::move(W0)) {
  require_same_grid(W_, proj_.Y());
}

Decomposition Decomposer::operator()(const WaveState& s) const {
  require_same_grid(s.u, W_);
  const RadialField h = s.u - W_;
  const auto c = proj_.coefficients(h);
  Decomposition d;
  d.beta = c.beta;
  d.gamma0 = c.gamma0;
  d.beta_prime = proj_.coefficients(s.ut).beta;
  d.g = h;
  d.g.axpy(-c.beta, proj_.Y());
  d.g.axpy(-c.gamma0, proj_.W0());
  d.g_h1 = std::sqrt(grad_norm_sq(d.g));
  d.dh_norm = std::sqrt(grad_norm_sq(h)) + l2_norm(s.ut);
  return d;
}

Decomposition decompose(const WaveState& s, const RadialField& W, const RadialField& Y,
                        const RadialField& W0) {
  return Decomposer(W, Y, W0)(s);
}

void ModulationTrace::push(double t, const Decomposition& d) {
  times.push_back(t);
  beta.push_back(d.beta);
  beta_prime.push_back(d.beta_prime);
  gamma0.push_back(d.gamma0);
  g_h1.push_back(d.g_h1);
  dh_norm.push_back(d.dh_norm);
}

std::optional<double> exit_time(const ModulationTrace& trace, double eta) {
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double b = std::abs(trace.beta[k]);
    if (b < eta) continue;
    if (k == 0) return trace.times[0];
    const double b0 = std::abs(trace.beta[k - 1]);
    const double th = (eta - b0) / (b - b0);
    return trace.times[k - 1] + th * (trace.times[k] - trace.times[k - 1]);
  }
  return std::nullopt;
}

BetaOdeResidual beta_ode_residual(const ModulationTrace& trace, double omega, double beta_cap) {
  const std::size_t n = trace.size();
  if (n < 5) throw NumericalError("beta_ode_residual: need at least 5 samples, got " + std::to_string(n));
  const double dt = trace.times[1] - trace.times[0];
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs((trace.times[k] - trace.times[k - 1]) - dt) > 1e-9 * dt)
      throw NumericalError("beta_ode_residual: samples are not uniformly spaced");
  }
  BetaOdeResidual out;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double b2 = (trace.beta[k + 1] - 2.0 * trace.beta[k] + trace.beta[k - 1]) / (dt * dt);
    const double r = std::abs(b2 - omega * omega * trace.beta[k]);
    out.times.push_back(trace.times[k]);
    out.residual.push_back(r);
    const double dh = trace.dh_norm[k];
    if (std::abs(trace.beta[k]) <= beta_cap && dh > 0.0) {
      out.C1 = std::max(out.C1, r / (dh * dh));
      ++out.used;
    }
  }
  return out;
}

ModulationFit growth_fit(const ModulationTrace& trace, double eta, double omega) {
  const auto T = exit_time(trace, eta);
  if (!T) throw NumericalError("growth_fit: beta never reached eta = " + std::to_string(eta));
  const double b0 = std::abs(trace.beta.front());
  if (!(b0 > 0.0)) throw NumericalError("growth_fit: beta(0) = 0");

  ModulationFit fit;
  fit.exit_time = *T;
  std::size_t k0 = trace.size();
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (std::abs(trace.beta[k]) >= 3.0 * b0) {
      k0 = k;
      break;
    }
  }
  if (k0 == trace.size()) throw NumericalError("growth_fit: |beta| never tripled");
  fit.tau0 = trace.times[k0];

  // Ordinary least squares of log|beta| against t on [tau0, T].
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t cnt = 0;
  for (std::size_t k = k0; k < trace.size() && trace.times[k] <= *T; ++k) {
    const double t = trace.times[k];
    const double y = std::log(std::abs(trace.beta[k]));
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++cnt;
  }
  fit.window_samples = cnt;
  if (cnt < 10)
    throw NumericalError("growth_fit: fit window has " + std::to_string(cnt) + " samples, need 10");
  const double c = static_cast<double>(cnt);
  const double den = c * stt - st * st;
  fit.omega_fit = (c * sty - st * sy) / den;

  // beta' at the exit time, linear in the bracketing samples.
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace.times[k] >= *T) {
      const double th = (*T - trace.times[k - 1]) / (trace.times[k] - trace.times[k - 1]);
      fit.beta_prime_at_exit =
          std::abs(trace.beta_prime[k - 1] + th * (trace.beta_prime[k] - trace.beta_prime[k - 1]));
      break;
    }
  }

  // K0: |beta| against the fitted exponential from beta(0), up to the exit.
  // M0: domination dh_norm <= M0 |beta| on the fit window.
  for (std::size_t k = 0; k < trace.size() && trace.times[k] <= *T; ++k) {
    const double b = std::abs(trace.beta[k]);
    fit.K0_fit = std::max(fit.K0_fit, b / (b0 * std::exp(fit.omega_fit * trace.times[k])));
    if (k >= k0) fit.M0_fit = std::max(fit.M0_fit, trace.dh_norm[k] / b);
  }
  fit.residual_const = beta_ode_residual(trace, omega, eta).C1;
  return fit;
}

}  // namespace critwave
