#include "report.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "errors.hpp"

namespace critwave {

namespace {

using ojson = nlohmann::ordered_json;

ojson num(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

ojson opt(const std::optional<double>& x) { return x ? num(*x) : ojson(nullptr); }

double get_num(const ojson& j, const char* key) {
  if (!j.contains(key)) throw IoError(std::string("summary: missing field '") + key + "'");
  const auto& v = j.at(key);
  if (v.is_null()) return std::nan("");
  if (!v.is_number()) throw IoError(std::string("summary: field '") + key + "' is not a number");
  return v.get<double>();
}

std::string csv_num(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string fixed(double x, int digits) {
  if (!std::isfinite(x)) return "n/a";
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(digits);
  o << x;
  return o.str();
}

std::string sci(double x, int digits = 3) {
  if (!std::isfinite(x)) return "n/a";
  std::ostringstream o;
  o.setf(std::ios::scientific);
  o.precision(digits);
  o << x;
  return o.str();
}

ojson config_json(const ExperimentConfig& c) {
  ojson j;
  j["dim"] = c.dim;
  j["r_max"] = c.r_max;
  j["m"] = c.m;
  j["stretch"] = c.stretch;
  j["cfl"] = c.cfl;
  j["dt"] = c.dt;
  j["sample_interval"] = c.sample_interval;
  j["amplitudes"] = c.amplitudes;
  j["etas"] = c.etas;
  j["eta_fit"] = c.eta_fit;
  j["margin"] = c.margin;
  j["energy_drift_tol"] = c.energy_drift_tol;
  j["seed"] = c.seed;
  j["coercivity_samples"] = c.coercivity_samples;
  return j;
}

ojson constants_obj(const ConstantsReport& c) {
  ojson j;
  j["dim"] = c.dim;
  j["r_max"] = c.r_max;
  j["m"] = c.m;
  j["stretch"] = c.stretch;
  j["grad_W_sq"] = num(c.integrals.grad_W_sq);
  j["energy_W"] = num(c.integrals.energy_W);
  j["crit_pow"] = num(c.integrals.crit_pow);
  j["snorm_pow"] = num(c.integrals.snorm_pow);
  j["snorm_pow_nls"] = num(c.integrals.snorm_pow_nls);
  j["tail_grad"] = num(c.integrals.tail_grad);
  j["tail_crit"] = num(c.integrals.tail_crit);
  j["tail_snorm"] = num(c.integrals.tail_snorm);
  j["tail_snorm_nls"] = num(c.integrals.tail_snorm_nls);
  j["W0_normalization"] = num(c.a_norm);
  j["stationarity_residual"] = num(c.stationarity_residual);
  j["stationarity_residual_fourth_order"] = num(c.stationarity_residual_fourth);
  j["pohozaev_defect"] = num(c.pohozaev_defect);
  j["energy_identity_defect"] = num(c.energy_identity_defect);
  j["crit_pow_beta"] = num(c.crit_pow_beta);
  j["snorm_pow_beta"] = num(c.snorm_pow_beta);
  j["snorm_pow_nls_beta"] = num(c.snorm_pow_nls_beta);
  j["snorm_pow_factorial_formula"] = num(c.snorm_pow_factorial);
  j["factorial_to_beta_ratio"] = num(c.factorial_to_beta_ratio);
  return j;
}

ojson level_obj(const SpectralLevel& l) {
  ojson j;
  j["m"] = l.m;
  j["omega"] = num(l.omega);
  j["omega_tilde"] = num(l.omega_tilde);
  j["theorem1_constant"] = num(l.theorem1_constant);
  j["theorem2_constant"] = num(l.theorem2_constant);
  j["kernel_residual_scaling"] = num(l.kernel_scaling);
  j["kernel_residual_phase"] = num(l.kernel_phase);
  return j;
}

ojson spectral_obj(const SpectralReport& s) {
  ojson j;
  j["dim"] = s.dim;
  j["omega"] = num(s.omega);
  j["omega_cross_check"] = num(s.omega_cross_check);
  j["method"] = s.method;
  j["cross_check_method"] = s.cross_check_method;
  j["eigen_residual"] = num(s.eigen_residual);
  j["cross_check_residual"] = num(s.cross_check_residual);
  j["negative_count"] = s.negative_count;
  j["second_eigenvalue"] = num(s.second_eigenvalue);
  j["Y_W0"] = num(s.Y_W0);
  j["Q_of_Y"] = num(s.Q_of_Y);
  j["Q_of_W0"] = num(s.Q_of_W0);
  j["c_Q_estimate"] = num(s.c_Q_estimate);
  j["seed"] = s.seed;
  j["coercivity_samples"] = s.coercivity_samples;
  j["coercivity_excluded"] = s.coercivity_excluded;
  j["omega_tilde"] = num(s.omega_tilde);
  j["nls_residual"] = num(s.nls_residual);
  j["nls_consistency"] = num(s.nls_consistency);
  j["m_norm"] = num(s.m_norm);
  j["B_plus_minus"] = num(s.B_plus_minus);
  j["B_plus_plus"] = num(s.B_plus_plus);
  j["B_minus_minus"] = num(s.B_minus_minus);
  j["snorm_pow"] = num(s.snorm_pow);
  j["snorm_pow_nls"] = num(s.snorm_pow_nls);
  j["theorem1_constant"] = num(s.theorem1_constant);
  j["theorem2_constant"] = num(s.theorem2_constant);
  j["fine"] = level_obj(s.fine);
  j["coarse"] = level_obj(s.coarse);
  return j;
}

ojson record_obj(const SweepRecord& r) {
  ojson j;
  j["a"] = num(r.a);
  j["beta0"] = num(r.beta0);
  j["eps_sq"] = num(r.eps_sq);
  j["eps"] = num(r.eps);
  j["status"] = r.status;
  ojson per = ojson::array();
  for (const auto& e : r.per_eta) {
    ojson x;
    x["eta"] = num(e.eta);
    x["exit_time"] = opt(e.exit_time);
    x["s_window"] = num(e.s_window);
    x["h_snorm"] = num(e.h_snorm);
    per.push_back(x);
  }
  j["per_eta"] = per;
  j["omega_fit"] = num(r.fit.omega_fit);
  j["tau0"] = num(r.fit.tau0);
  j["fit_exit_time"] = num(r.fit.exit_time);
  j["beta_prime_at_exit"] = num(r.fit.beta_prime_at_exit);
  j["C1_fit"] = num(r.fit.residual_const);
  j["K0_fit"] = num(r.fit.K0_fit);
  j["M0_fit"] = num(r.fit.M0_fit);
  j["initial_bound"] = num(r.fit.initial_bound);
  j["fit_window_samples"] = r.fit.window_samples;
  j["energy_drift"] = num(r.energy_drift);
  j["gamma0_ratio"] = num(r.gamma0_ratio);
  j["t_end"] = num(r.t_end);
  j["dt"] = num(r.dt);
  j["steps"] = r.steps;
  j["threshold_violations"] = r.threshold_violations;
  return j;
}

SweepRecord record_from(const ojson& j) {
  SweepRecord r;
  r.a = get_num(j, "a");
  r.beta0 = get_num(j, "beta0");
  r.eps_sq = get_num(j, "eps_sq");
  r.eps = get_num(j, "eps");
  r.status = j.at("status").get<std::string>();
  for (const auto& x : j.at("per_eta")) {
    EtaResult e;
    e.eta = get_num(x, "eta");
    if (!x.at("exit_time").is_null()) e.exit_time = get_num(x, "exit_time");
    e.s_window = get_num(x, "s_window");
    e.h_snorm = get_num(x, "h_snorm");
    r.per_eta.push_back(e);
  }
  r.fit.omega_fit = get_num(j, "omega_fit");
  r.fit.tau0 = get_num(j, "tau0");
  r.fit.exit_time = get_num(j, "fit_exit_time");
  r.fit.beta_prime_at_exit = get_num(j, "beta_prime_at_exit");
  r.fit.residual_const = get_num(j, "C1_fit");
  r.fit.K0_fit = get_num(j, "K0_fit");
  r.fit.M0_fit = get_num(j, "M0_fit");
  r.fit.initial_bound = get_num(j, "initial_bound");
  r.fit.window_samples = j.at("fit_window_samples").get<std::size_t>();
  r.energy_drift = get_num(j, "energy_drift");
  r.gamma0_ratio = get_num(j, "gamma0_ratio");
  r.t_end = get_num(j, "t_end");
  r.dt = get_num(j, "dt");
  r.steps = j.at("steps").get<std::size_t>();
  r.threshold_violations = j.at("threshold_violations").get<std::size_t>();
  return r;
}

ojson line_obj(const LineFit& f) {
  ojson j;
  j["slope"] = num(f.slope);
  j["intercept"] = num(f.intercept);
  j["r_squared"] = num(f.r_squared);
  j["points"] = f.points;
  return j;
}

ojson fits_obj(const std::vector<LawFit>& fits) {
  ojson arr = ojson::array();
  for (const auto& f : fits) {
    ojson j;
    j["eta"] = num(f.eta);
    j["slope_T"] = line_obj(f.T);
    j["slope_S"] = line_obj(f.S);
    j["predicted_T"] = num(f.predicted_T);
    j["predicted_S"] = num(f.predicted_S);
    j["rel_dev_T"] = num(f.rel_dev_T);
    j["rel_dev_S"] = num(f.rel_dev_S);
    j["band_C"] = num(f.band_C);
    j["band_ok"] = f.band_ok;
    arr.push_back(j);
  }
  return arr;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("write to '" + p.string() + "' failed");
}

}  // namespace

std::string constants_json(const ConstantsReport& c) { return constants_obj(c).dump(2) + "\n"; }

std::string spectral_json(const SpectralReport& s) { return spectral_obj(s).dump(2) + "\n"; }

std::string summary_json(const SweepResult& r) {
  ojson j;
  j["schema"] = kSummarySchema;
  j["version"] = kVersion;
  j["config"] = config_json(r.config);
  j["constants"] = constants_obj(r.constants);
  j["spectral"] = spectral_obj(r.spectral);
  ojson recs = ojson::array();
  for (const auto& rec : r.records) recs.push_back(record_obj(rec));
  j["records"] = recs;
  j["fits"] = fits_obj(r.fits);
  j["notes"] = ojson::array(
      {"s_window doubles the half-line integral over [0, T(eta)]; data with u_t = 0 give even-in-time solutions",
       "the S-norm after the exit time (the scattering tail) is not integrated; it is bounded in |log eps|",
       "records with a non-ok status are excluded from the fits"});
  return j.dump(2) + "\n";
}

StoredSweep parse_summary(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const std::exception& e) {
    throw IoError(std::string("summary: invalid JSON: ") + e.what());
  }
  try {
    if (!j.contains("schema") || j.at("schema") != kSummarySchema)
      throw IoError("summary: unknown schema, expected " + std::string(kSummarySchema));
    StoredSweep s;
    s.dim = j.at("config").at("dim").get<int>();
    s.etas = j.at("config").at("etas").get<std::vector<double>>();
    s.omega = get_num(j.at("spectral"), "omega");
    s.snorm_pow = get_num(j.at("spectral"), "snorm_pow");
    for (const auto& r : j.at("records")) s.records.push_back(record_from(r));
    if (s.records.empty()) throw IoError("summary: no records");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("summary: malformed content: ") + e.what());
  }
}

std::string fits_json(const std::vector<LawFit>& fits) { return fits_obj(fits).dump(2) + "\n"; }

std::string trace_csv(const RunTrace& t) {
  std::string out = "t,beta,beta_prime,gamma0,g_h1,energy,s_accum,h1_dev\n";
  const auto& m = t.modulation;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double e = k < t.energy.size() ? t.energy[k] : std::nan("");
    const double s = k < t.s_accum.size() ? t.s_accum[k] : std::nan("");
    const double h = k < t.h1_dev.size() ? t.h1_dev[k] : std::nan("");
    out += csv_num(m.times[k]) + ',' + csv_num(m.beta[k]) + ',' + csv_num(m.beta_prime[k]) + ',' +
           csv_num(m.gamma0[k]) + ',' + csv_num(m.g_h1[k]) + ',' + csv_num(e) + ',' + csv_num(s) + ',' +
           csv_num(h) + '\n';
  }
  return out;
}

std::string report_markdown(const SweepResult& r) {
  const auto& sp = r.spectral;
  const auto& c = r.constants;
  const double omega = sp.omega;
  std::ostringstream o;
  o << "# Threshold sweep report\n\n";
  o << "Dimension N = " << r.config.dim << ", grid r_max = " << r.config.r_max << ", m = " << r.config.m
    << ", stretch = " << r.config.stretch << ", seed = " << r.config.seed << ".\n\n";

  o << "## Spectral constants\n\n";
  o << "| quantity | value | check |\n|---|---|---|\n";
  o << "| omega (" << sp.method << ") | " << fixed(omega, 10) << " | |\n";
  o << "| omega (" << sp.cross_check_method << ") | " << fixed(sp.omega_cross_check, 10) << " | rel. diff "
    << sci(std::abs(sp.omega_cross_check - omega) / omega) << " |\n";
  o << "| negative eigenvalues | " << sp.negative_count << " | second eigenvalue " << sci(sp.second_eigenvalue)
    << " |\n";
  o << "| int Y W0 | " << sci(sp.Y_W0) << " | |\n";
  o << "| Q(Y) | " << fixed(sp.Q_of_Y, 10) << " | -omega^2/2 = " << fixed(-omega * omega / 2, 10) << " |\n";
  o << "| c_Q estimate | " << fixed(sp.c_Q_estimate, 6) << " | " << sp.coercivity_samples << " samples |\n";
  o << "| omega_tilde | " << fixed(sp.omega_tilde, 10) << " | residual " << sci(sp.nls_residual) << " |\n";
  o << "| B(Y+, Y-) | " << fixed(sp.B_plus_minus, 10) << " | B(Y+,Y+) " << sci(sp.B_plus_plus) << ", B(Y-,Y-) "
    << sci(sp.B_minus_minus) << " |\n";
  o << "| theorem1_constant (2/omega) int W^" << fixed(CriticalExponents::for_dim(r.config.dim).snorm_power, 3)
    << " | " << fixed(sp.theorem1_constant, 8) << " | coarse grid " << fixed(sp.coarse.theorem1_constant, 8) << " |\n";
  o << "| theorem2_constant (2/omega_tilde) int W^"
    << fixed(CriticalExponents::for_dim(r.config.dim).snorm_nls_power, 3) << " | " << fixed(sp.theorem2_constant, 8)
    << " | coarse grid " << fixed(sp.coarse.theorem2_constant, 8) << " (spectral prediction only) |\n\n";

  o << "## Ground-state integrals\n\n";
  o << "| integral | quadrature | Beta function | factorial closed form |\n|---|---|---|---|\n";
  o << "| int W^" << fixed(CriticalExponents::for_dim(r.config.dim).snorm_power, 3) << " | "
    << fixed(c.integrals.snorm_pow, 10) << " | " << fixed(c.snorm_pow_beta, 10) << " | "
    << fixed(c.snorm_pow_factorial, 10) << " |\n";
  o << "| int W^" << fixed(CriticalExponents::for_dim(r.config.dim).snorm_nls_power, 3) << " | "
    << fixed(c.integrals.snorm_pow_nls, 10) << " | " << fixed(c.snorm_pow_nls_beta, 10) << " | |\n";
  o << "| int W^" << fixed(CriticalExponents::for_dim(r.config.dim).energy_power, 3) << " | "
    << fixed(c.integrals.crit_pow, 10) << " | " << fixed(c.crit_pow_beta, 10) << " | |\n\n";
  if (std::abs(c.factorial_to_beta_ratio - 1.0) > 1e-6)
    o << "**Discrepancy:** the factorial closed form differs from the Beta-function value by the factor "
      << fixed(c.factorial_to_beta_ratio, 8)
      << ". The Beta value agrees with quadrature and is the one used in all constants.\n\n";

  o << "## Runs\n\n";
  o << "| a | eps | eps/(a omega/sqrt2) | ";
  for (double e : r.config.etas) o << "T(" << e << ") | ";
  o << "omega_fit/omega | beta'(T)/(omega eta) | K0 | M0 | C1 | energy drift | status |\n|";
  for (std::size_t k = 0; k < 10 + r.config.etas.size(); ++k) o << "---|";
  o << "\n";
  for (const auto& rec : r.records) {
    o << "| " << sci(rec.a, 4) << " | " << sci(rec.eps, 4) << " | " << fixed(rec.eps / (rec.a * omega / std::sqrt(2.0)), 5)
      << " | ";
    for (double e : r.config.etas) {
      const EtaResult* er = rec.at_eta(e);
      o << (er && er->exit_time ? fixed(*er->exit_time, 4) : std::string("n/a")) << " | ";
    }
    o << fixed(rec.fit.omega_fit / omega, 4) << " | " << fixed(rec.fit.beta_prime_at_exit / (omega * r.config.eta_fit), 4)
      << " | " << fixed(rec.fit.K0_fit, 3) << " | " << fixed(rec.fit.M0_fit, 3) << " | "
      << fixed(rec.fit.residual_const, 3) << " | " << sci(rec.energy_drift, 2) << " | " << rec.status << " |\n";
  }
  o << "\n## Logarithmic law\n\n";
  o << "| eta | slope_T | 1/omega | rel. dev | r^2 | slope_S | (2/omega) int W^q | rel. dev | r^2 | band C | band |\n";
  o << "|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& f : r.fits) {
    o << "| " << f.eta << " | " << fixed(f.T.slope, 6) << " | " << fixed(f.predicted_T, 6) << " | "
      << sci(f.rel_dev_T, 2) << " | " << fixed(f.T.r_squared, 6) << " | " << fixed(f.S.slope, 5) << " | "
      << fixed(f.predicted_S, 5) << " | " << sci(f.rel_dev_S, 2) << " | " << fixed(f.S.r_squared, 6) << " | "
      << fixed(f.band_C, 3) << " | " << (f.band_ok ? "inside" : "outside") << " |\n";
  }
  o << "\nomega/sqrt(2) = " << fixed(omega / std::sqrt(2.0), 8)
    << "; the eps/a column compares each run against it.\n\n";
  o << "Only t >= 0 is evolved; S windows are doubled because u_t(0) = 0 makes the solution even in time. "
       "The S-norm after the exit time (the scattering tail) is not integrated.\n";
  return o.str();
}

void write_outputs(const SweepResult& r, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "traces", ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  write_file(fs::path(dir) / "summary.json", summary_json(r));
  write_file(fs::path(dir) / "report.md", report_markdown(r));
  if (r.config.write_traces) {
    for (std::size_t k = 0; k < r.traces.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "run_%02zu.csv", k);
      write_file(fs::path(dir) / "traces" / name, trace_csv(r.traces[k]));
    }
  }
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  ojson meta;
  meta["generated_at"] = stamp;
  meta["version"] = kVersion;
  meta["hardware_threads"] = std::thread::hardware_concurrency();
  write_file(fs::path(dir) / "metadata.json", meta.dump(2) + "\n");
}

}  // namespace critwave
