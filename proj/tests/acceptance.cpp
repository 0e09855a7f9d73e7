// Acceptance run: one PASS/FAIL line per criterion, on the production grid.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "experiment.hpp"
#include "report.hpp"

using namespace critwave;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double order(double coarse, double fine) { return std::log2(coarse / fine); }

const ExperimentConfig& production() {
  static const ExperimentConfig c = ExperimentConfig::defaults();
  return c;
}

const SpectralStage& stage() {
  static const SpectralStage s = run_spectral(production());
  return s;
}

const SweepResult& sweep() {
  static const SweepResult r = run_sweep(production());
  return r;
}

const LawFit* fit_at(const SweepResult& r, double eta) {
  for (const auto& f : r.fits)
    if (std::abs(f.eta - eta) < 1e-12) return &f;
  return nullptr;
}

Outcome stationarity() {
  const auto& c = production();
  double res[3];
  int k = 0;
  for (std::size_t m : {c.m / 4, c.m / 2, c.m})
    res[k++] = stationarity_residual(eval_W(make_grid(3, c.r_max, m, c.stretch)));
  double p = order(res[1], res[2]);
  return {res[2] <= 1e-6 && p >= 2.0 - 0.05 && order(res[0], res[1]) >= 1.95,
          fmt("residual %.3e at m=%zu (<= 1e-6), orders %.3f, %.3f (>= 2)", res[2], c.m, order(res[0], res[1]), p)};
}

Outcome identities() {
  const auto& c = production();
  auto r = constants_report(3, c.r_max, c.m, c.stretch);
  return {std::abs(r.pohozaev_defect) <= 1e-6 && std::abs(r.energy_identity_defect) <= 1e-6,
          fmt("Pohozaev defect %.3e, energy identity defect %.3e (<= 1e-6)", r.pohozaev_defect,
              r.energy_identity_defect)};
}

Outcome spectral_gap() {
  const auto& r = stage().report;
  double dw = std::abs(r.omega - r.omega_cross_check) / r.omega;
  double q = std::abs(r.Q_of_Y / (-r.omega * r.omega / 2) - 1);
  return {dw <= 1e-4 && r.negative_count == 1 && std::abs(r.Y_W0) <= 1e-5 && q <= 1e-4,
          fmt("omega %.10f vs %.10f (rel %.2e), negative count %zu, |int Y W0| %.2e, Q(Y) rel %.2e", r.omega,
              r.omega_cross_check, dw, r.negative_count, std::abs(r.Y_W0), q)};
}

Outcome coercivity() {
  const auto& s = stage();
  const auto& c = production();
  std::vector<double> est;
  for (std::uint64_t seed : {c.seed, c.seed + 1, c.seed + 2, c.seed + 3})
    est.push_back(coercivity_probe(s.ground.W, s.eigen.Y, s.ground.W0, 1000, seed).c_Q_estimate);
  double lo = *std::min_element(est.begin(), est.end()), hi = *std::max_element(est.begin(), est.end());
  return {lo > 0 && (hi - lo) <= 0.2 * hi,
          fmt("c_Q over 4 seeds x 1000 fields in [%.4f, %.4f], spread %.1f%% (<= 20%%)", lo, hi, 100 * (hi - lo) / hi)};
}

Outcome nls_spectrum() {
  const auto& r = stage().report;
  double ps = order(r.coarse.kernel_scaling, r.fine.kernel_scaling);
  double pp = order(r.coarse.kernel_phase, r.fine.kernel_phase);
  double agree = std::abs(r.fine.theorem2_constant / r.coarse.theorem2_constant - 1);
  bool ok = ps >= 1.95 && pp >= 1.95 && r.nls_residual <= 1e-5 && std::abs(r.B_plus_minus + 1) <= 1e-6 &&
            agree <= 1e-4;
  return {ok, fmt("kernel orders %.3f (W0), %.3f (W); omega_tilde %.8f residual %.2e; B(Y+,Y-)+1 = %.1e; "
                  "theorem2_constant %.8f, two-grid rel %.2e",
                  ps, pp, r.omega_tilde, r.nls_residual, r.B_plus_minus + 1, r.theorem2_constant, agree)};
}

double dalembert_error(std::size_t m) {
  auto phi = [](double s) { return std::exp(-s * s); };
  auto exact = [&](double t, double r) {
    if (r == 0.0) return phi(t) - 2 * t * t * phi(t);
    return ((r - t) * phi(r - t) + (r + t) * phi(r + t)) / (2 * r);
  };
  auto g = make_grid(3, 20.0, m, 2.0);
  EvolveOptions o;
  o.sample_interval = 0.05;
  o.stepper.nonlinear = false;
  auto res = evolve(make_state(RadialField::sample(g, phi), RadialField(g)), 3.0, o);
  double err = 0;
  for (std::size_t i = 0; i < g->size(); ++i)
    if (g->nodes()[i] < 12) err = std::max(err, std::abs(res.state.u[i] - exact(3.0, g->nodes()[i])));
  return err;
}

Outcome evolver() {
  const auto& s = stage();
  auto st = make_state(s.ground.W, RadialField(s.grid), ground_state_exterior(*s.grid));
  EvolveOptions o;
  o.sample_interval = 0.1;
  auto res = evolve(st, 20.0, o);
  double e0 = res.log.energy.front(), drift = 0;
  for (double e : res.log.energy) drift = std::max(drift, std::abs(e / e0 - 1));

  double e1 = dalembert_error(512), e2 = dalembert_error(1024), e3 = dalembert_error(2048);
  double p = order(e2, e3);

  Stepper stepper(s.grid);
  auto w = make_state(s.ground.W - 1e-2 * s.eigen.Y, RadialField(s.grid), ground_state_exterior(*s.grid));
  auto w0 = w;
  const double dt = stepper.max_dt();
  for (int k = 0; k < 500; ++k) stepper.step(w, dt);
  for (int k = 0; k < 500; ++k) stepper.step(w, -dt);
  double rev = 0;
  for (std::size_t i = 0; i < w.u.size(); ++i)
    rev = std::max({rev, std::abs(w.u[i] - w0.u[i]), std::abs(w.ut[i] - w0.ut[i])});
  return {drift <= 1e-6 && p >= 1.8 && order(e1, e2) >= 1.8 && rev <= 1e-12,
          fmt("energy drift %.2e over T=20; d'Alembert errors %.2e, %.2e, %.2e (orders %.2f, %.2f); "
              "reversibility %.1e",
              drift, e1, e2, e3, order(e1, e2), p, rev)};
}

Outcome energy_expansion() {
  const auto& s = stage();
  const double w = s.eigen.omega;
  auto ext = ground_state_exterior(*s.grid);
  const double E0 = energy(make_state(s.ground.W, RadialField(s.grid), ext));
  std::vector<double> la, lr;
  for (int k = 0; k <= 8; ++k) {
    double a = std::pow(10.0, -3 + 0.25 * k);
    double E = energy(make_state(s.ground.W - a * s.eigen.Y, RadialField(s.grid), ext));
    la.push_back(std::log(a));
    lr.push_back(std::log(std::abs(E - E0 + a * a * w * w / 2)));
  }
  auto f = least_squares(la, lr);
  return {f.slope >= 2.7, fmt("remainder exponent %.4f over a in [1e-3, 1e-1] (>= 2.7), r^2 %.6f", f.slope,
                              f.r_squared)};
}

Outcome exit_law() {
  const auto& r = sweep();
  const double w = r.spectral.omega, eta = 0.05;
  const LawFit* f = fit_at(r, eta);
  if (!f) return {false, "no fit at eta = 0.05"};
  bool ok = std::abs(f->rel_dev_T) <= 0.05 && f->T.r_squared >= 0.99 && f->T.points == r.config.amplitudes.size();
  double worst_w = 0, worst_bp = 1e300;
  std::string per;
  for (const auto& rec : r.records) {
    if (!rec.valid()) {
      ok = false;
      continue;
    }
    double dw = rec.fit.omega_fit / w - 1;
    double bp = std::abs(rec.fit.beta_prime_at_exit) / (w * eta);
    if (std::abs(dw) > std::abs(worst_w)) worst_w = dw;
    worst_bp = std::min(worst_bp, bp);
    per += fmt(" %.3g:%+.2f%%", rec.a, 100 * dw);
  }
  ok = ok && std::abs(worst_w) <= 0.03 && worst_bp >= 0.9;
  return {ok, fmt("slope_T %.6f vs 1/omega %.6f (dev %+.2f%%, <= 5%%), r^2 %.6f; omega_fit dev by a [%s ] "
                  "worst %+.2f%% (<= 3%%); min beta'(T)/(omega eta) %.3f (>= 0.9)",
                  f->T.slope, f->predicted_T, 100 * f->rel_dev_T, f->T.r_squared, per.c_str(), 100 * worst_w,
                  worst_bp)};
}

Outcome snorm_law() {
  const auto& r = sweep();
  const LawFit *f1 = fit_at(r, 0.1), *f5 = fit_at(r, 0.05), *f2 = fit_at(r, 0.02);
  if (!f1 || !f5 || !f2) return {false, "fits at eta = 0.1, 0.05, 0.02 required"};
  double d1 = std::abs(f1->rel_dev_S), d5 = std::abs(f5->rel_dev_S), d2 = std::abs(f2->rel_dev_S);
  bool ok = d5 <= 0.15 && f5->S.r_squared >= 0.99 && d5 < d1 && d2 < d5;
  // band position: s_window / (2 T) against int W^8, averaged over runs
  auto band = [&](double eta) {
    double acc = 0;
    int n = 0;
    for (const auto& rec : r.records) {
      const EtaResult* e = rec.at_eta(eta);
      if (!rec.valid() || !e || !e->exit_time) continue;
      acc += std::abs(e->s_window / (2 * *e->exit_time) / r.spectral.snorm_pow - 1);
      ++n;
    }
    return n ? acc / n : std::nan("");
  };
  return {ok, fmt("slope_S %.4f vs %.4f: |dev| %.2f%% (eta 0.1), %.2f%% (eta 0.05, <= 15%%), %.2f%% (eta 0.02); "
                  "shrinking with eta: %s; info: mean |S_w/(2T)/int W^8 - 1| %.3f, %.3f, %.3f",
                  f5->S.slope, f5->predicted_S, 100 * d1, 100 * d5, 100 * d2, (d5 < d1 && d2 < d5) ? "yes" : "no",
                  band(0.1), band(0.05), band(0.02))};
}

Outcome eps_relation() {
  const auto& r = sweep();
  const double w = r.spectral.omega;
  double worst = 0;
  std::size_t n = 0;
  for (const auto& rec : r.records) {
    if (rec.a > 1e-3 * (1 + 1e-12)) continue;
    worst = std::max(worst, std::abs(rec.eps / (rec.a * w / std::sqrt(2.0)) - 1));
    ++n;
  }
  return {n > 0 && worst <= 0.05, fmt("max |eps/(a omega/sqrt2) - 1| = %.2e over %zu runs with a <= 1e-3", worst, n)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  auto cfg = production();
  cfg.threads = 1;
  auto again = run_sweep(cfg);
  auto base = fs::temp_directory_path() / "critwave_acceptance";
  fs::remove_all(base);
  write_outputs(sweep(), (base / "first").string());
  write_outputs(again, (base / "second").string());
  auto a = slurp(base / "first" / "summary.json"), b = slurp(base / "second" / "summary.json");
  bool same = !a.empty() && a == b;
  fs::remove_all(base);
  return {same, fmt("summary.json (%zu bytes) %s across two runs with different thread counts", a.size(),
                    same ? "byte-identical" : "DIFFERS")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "stationarity", stationarity},         {2, "Pohozaev/energy identities", identities},
      {3, "spectral gap, two methods", spectral_gap}, {4, "coercivity probe", coercivity},
      {5, "NLS spectrum", nls_spectrum},          {6, "evolver fidelity", evolver},
      {7, "energy expansion", energy_expansion},  {8, "exit-time law", exit_law},
      {9, "S-norm law", snorm_law},               {10, "eps-a relation", eps_relation},
      {11, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s  %s: %s [%.1fs]\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), sec);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
