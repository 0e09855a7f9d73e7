#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "errors.hpp"

namespace critwave {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (!v.empty() && *first == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || p != last || !std::isfinite(out))
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config: '" + key + "' expects a nonnegative integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto comma = v.find(',', pos);
    const std::string item = trim(std::string_view(v).substr(pos, comma == std::string::npos ? v.npos : comma - pos));
    if (item.empty()) throw ConfigError("config: empty entry in list '" + key + "'");
    out.push_back(parse_double(key, item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string fmt(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::vector<double> geometric(double a_max, double a_min, std::size_t count) {
  if (!(a_max > a_min) || !(a_min > 0.0) || count < 2)
    throw ConfigError("config: geometric amplitudes need a_max > a_min > 0 and a_count >= 2");
  std::vector<double> out(count);
  const double la = std::log10(a_max);
  const double lb = std::log10(a_min);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::pow(10.0, la + (lb - la) * static_cast<double>(i) / static_cast<double>(count - 1));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> ExperimentConfig::default_amplitudes() { return geometric(1e-2, std::pow(10.0, -4.5), 6); }

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.amplitudes = default_amplitudes();
  return c;
}

double ExperimentConfig::eta_max() const {
  if (etas.empty()) throw ConfigError("config: eta list is empty");
  return *std::max_element(etas.begin(), etas.end());
}

void ExperimentConfig::validate() const {
  if (dim < 3 || dim > 5) throw ConfigError("config: dim must be 3, 4 or 5");
  if (!(r_max > 0.0)) throw ConfigError("config: r_max must be positive");
  if (m < 64) throw ConfigError("config: m must be at least 64");
  if (!(stretch > 0.0) || stretch > 50.0) throw ConfigError("config: stretch must lie in (0, 50]");
  if (!(cfl > 0.0) || cfl > 1.0) throw ConfigError("config: cfl must lie in (0, 1]");
  if (dt < 0.0) throw ConfigError("config: dt must be nonnegative");
  if (!(sample_interval > 0.0)) throw ConfigError("config: sample_interval must be positive");
  if (amplitudes.size() < 4)
    throw ConfigError("config: the log-law fit needs at least 4 amplitudes, got " + std::to_string(amplitudes.size()));
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    if (!(amplitudes[i] > 0.0)) throw ConfigError("config: amplitudes must be positive");
    if (i > 0 && !(amplitudes[i] < amplitudes[i - 1]))
      throw ConfigError("config: amplitudes must be strictly decreasing");
  }
  if (etas.empty()) throw ConfigError("config: eta list is empty");
  for (double e : etas)
    if (!(e > 0.0) || !(e < 1.0)) throw ConfigError("config: eta values must lie in (0, 1)");
  if (std::none_of(etas.begin(), etas.end(), [&](double e) { return std::abs(e - eta_fit) <= 1e-12 * eta_fit; }))
    throw ConfigError("config: eta_fit must be one of the eta values");
  if (!(amplitudes.front() < eta_fit)) throw ConfigError("config: amplitudes must stay below eta_fit");
  if (margin < 0.0) throw ConfigError("config: margin must be nonnegative");
  if (!(energy_drift_tol > 0.0)) throw ConfigError("config: energy_drift_tol must be positive");
  if (coercivity_samples < 100) throw ConfigError("config: coercivity_samples must be at least 100");
  if (out_dir.empty()) throw ConfigError("config: out_dir is empty");
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::map<std::string, std::string> kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string val = trim(std::string_view(t).substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    if (!kv.emplace(key, val).second) throw ConfigError("config: duplicate key '" + key + "'");
  }

  bool geometric_given = false;
  double a_max = 0, a_min = 0;
  std::uint64_t a_count = 0;
  for (const auto& [k, v] : kv) {
    if (k == "dim") c.dim = static_cast<int>(parse_uint(k, v));
    else if (k == "r_max") c.r_max = parse_double(k, v);
    else if (k == "m") c.m = parse_uint(k, v);
    else if (k == "stretch") c.stretch = parse_double(k, v);
    else if (k == "cfl") c.cfl = parse_double(k, v);
    else if (k == "dt") c.dt = parse_double(k, v);
    else if (k == "sample_interval") c.sample_interval = parse_double(k, v);
    else if (k == "amplitudes") c.amplitudes = parse_list(k, v);
    else if (k == "a_max") a_max = parse_double(k, v), geometric_given = true;
    else if (k == "a_min") a_min = parse_double(k, v), geometric_given = true;
    else if (k == "a_count") a_count = parse_uint(k, v), geometric_given = true;
    else if (k == "etas") c.etas = parse_list(k, v);
    else if (k == "eta_fit") c.eta_fit = parse_double(k, v);
    else if (k == "margin") c.margin = parse_double(k, v);
    else if (k == "energy_drift_tol") c.energy_drift_tol = parse_double(k, v);
    else if (k == "seed") c.seed = parse_uint(k, v);
    else if (k == "coercivity_samples") c.coercivity_samples = parse_uint(k, v);
    else if (k == "out_dir") c.out_dir = v;
    else if (k == "threads") c.threads = parse_uint(k, v);
    else if (k == "write_traces") c.write_traces = parse_bool(k, v);
    else throw ConfigError("config: unknown key '" + k + "'");
  }
  if (geometric_given) {
    if (kv.count("amplitudes")) throw ConfigError("config: give either amplitudes or a_max/a_min/a_count");
    if (!kv.count("a_max") || !kv.count("a_min") || !kv.count("a_count"))
      throw ConfigError("config: a_max, a_min and a_count must be given together");
    c.amplitudes = geometric(a_max, a_min, a_count);
  } else if (!kv.count("amplitudes")) {
    c.amplitudes = ExperimentConfig::default_amplitudes();
  }
  std::sort(c.etas.begin(), c.etas.end());
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_config_text(const ExperimentConfig& c) {
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
  };
  std::ostringstream o;
  o << "dim = " << c.dim << "\n"
    << "r_max = " << fmt(c.r_max) << "\n"
    << "m = " << c.m << "\n"
    << "stretch = " << fmt(c.stretch) << "\n"
    << "cfl = " << fmt(c.cfl) << "\n"
    << "dt = " << fmt(c.dt) << "\n"
    << "sample_interval = " << fmt(c.sample_interval) << "\n"
    << "amplitudes = " << list(c.amplitudes) << "\n"
    << "etas = " << list(c.etas) << "\n"
    << "eta_fit = " << fmt(c.eta_fit) << "\n"
    << "margin = " << fmt(c.margin) << "\n"
    << "energy_drift_tol = " << fmt(c.energy_drift_tol) << "\n"
    << "seed = " << c.seed << "\n"
    << "coercivity_samples = " << c.coercivity_samples << "\n"
    << "out_dir = " << c.out_dir << "\n"
    << "threads = " << c.threads << "\n"
    << "write_traces = " << (c.write_traces ? "true" : "false") << "\n";
  return o.str();
}

// ---------------------------------------------------------------------------

ConstantsReport constants_report(int dim, double r_max, std::size_t m, double stretch) {
  const auto grid = make_grid(dim, r_max, m, stretch);
  const auto gs = make_ground_state(grid);
  const auto ex = CriticalExponents::for_dim(dim);
  ConstantsReport r;
  r.dim = dim;
  r.r_max = r_max;
  r.m = m;
  r.stretch = stretch;
  r.integrals = gs.integrals;
  r.a_norm = gs.a_norm;
  r.stationarity_residual = stationarity_residual(gs.W, StencilOrder::second);
  r.stationarity_residual_fourth = stationarity_residual(gs.W, StencilOrder::fourth);
  r.pohozaev_defect = gs.integrals.grad_W_sq / gs.integrals.crit_pow - 1.0;
  r.energy_identity_defect = gs.integrals.energy_W / (gs.integrals.grad_W_sq / dim) - 1.0;
  r.snorm_pow_beta = ground_state_power_beta(dim, ex.snorm_power);
  r.snorm_pow_nls_beta = ground_state_power_beta(dim, ex.snorm_nls_power);
  r.crit_pow_beta = ground_state_power_beta(dim, ex.energy_power);
  r.snorm_pow_factorial = snorm_pow_factorial_formula(dim);
  r.factorial_to_beta_ratio = r.snorm_pow_factorial / r.snorm_pow_beta;
  return r;
}

namespace {

SpectralLevel spectral_level(const GridPtr& grid, const GroundStateBundle& gs, double omega, bool nls) {
  SpectralLevel lvl;
  lvl.m = grid->size();
  lvl.omega = omega;
  lvl.theorem1_constant = 2.0 / omega * gs.integrals.snorm_pow;
  const auto k = nls_kernel_residuals(gs.W, gs.W0);
  lvl.kernel_scaling = k.scaling;
  lvl.kernel_phase = k.phase;
  if (nls) {
    lvl.omega_tilde = nls_eigen(grid, gs.W).omega_tilde;
    lvl.theorem2_constant = 2.0 / lvl.omega_tilde * gs.integrals.snorm_pow_nls;
  }
  return lvl;
}

}  // namespace

SpectralStage run_spectral(const ExperimentConfig& cfg, const SpectralOptions& opts) {
  SpectralStage st;
  st.grid = make_grid(cfg.dim, cfg.r_max, cfg.m, cfg.stretch);
  st.ground = make_ground_state(st.grid);
  st.eigen = ground_eigen_grid(st.grid, st.ground.W);
  const EigenPair shot = ground_eigen_shoot(st.grid, {0.05, 4.0});

  SpectralReport& r = st.report;
  r.dim = cfg.dim;
  r.omega = st.eigen.omega;
  r.omega_cross_check = shot.omega;
  r.method = to_string(st.eigen.method);
  r.cross_check_method = to_string(shot.method);
  r.eigen_residual = st.eigen.residual;
  r.cross_check_residual = shot.residual;
  r.negative_count = st.eigen.negative_count;
  r.second_eigenvalue = st.eigen.second_eigenvalue;
  r.Y_W0 = l2_dot(st.eigen.Y, st.ground.W0);
  r.Q_of_Y = q_form(st.eigen.Y, st.ground.W);
  r.Q_of_W0 = q_form(st.ground.W0, st.ground.W);
  r.seed = cfg.seed;
  r.snorm_pow = st.ground.integrals.snorm_pow;
  r.snorm_pow_nls = st.ground.integrals.snorm_pow_nls;
  r.theorem1_constant = 2.0 / r.omega * r.snorm_pow;
  if (opts.coercivity) {
    const auto c = coercivity_probe(st.ground.W, st.eigen.Y, st.ground.W0, cfg.coercivity_samples, cfg.seed);
    r.c_Q_estimate = c.c_Q_estimate;
    r.coercivity_samples = c.samples;
    r.coercivity_excluded = c.excluded;
  }
  if (opts.nls) {
    const auto n = nls_eigen(st.grid, st.ground.W);
    r.omega_tilde = n.omega_tilde;
    r.nls_residual = n.residual;
    r.nls_consistency = n.consistency;
    r.m_norm = n.m_norm;
    r.B_plus_minus = n.B_plus_minus;
    r.B_plus_plus = n.B_plus_plus;
    r.B_minus_minus = n.B_minus_minus;
    r.theorem2_constant = 2.0 / r.omega_tilde * r.snorm_pow_nls;
  }
  r.fine = spectral_level(st.grid, st.ground, r.omega, false);
  r.fine.omega_tilde = r.omega_tilde;
  r.fine.theorem2_constant = r.theorem2_constant;
  if (opts.coarse_level) {
    const auto grid = make_grid(cfg.dim, cfg.r_max, cfg.m / 2, cfg.stretch);
    const auto gs = make_ground_state(grid);
    const double omega = ground_eigen_grid(grid, gs.W).omega;
    r.coarse = spectral_level(grid, gs, omega, opts.nls);
  }
  return st;
}

// ---------------------------------------------------------------------------

const EtaResult* SweepRecord::at_eta(double eta) const noexcept {
  for (const auto& e : per_eta)
    if (std::abs(e.eta - eta) <= 1e-12 * eta) return &e;
  return nullptr;
}

namespace {

double expected_exit(double a, double eta, double omega) { return std::acosh(std::max(eta / a, 1.0)) / omega; }

// Radius beyond which a |Y| < 1e-10.
double data_radius(const RadialField& Y, double a) {
  auto r = Y.grid().nodes();
  double out = 0.0;
  for (std::size_t i = 0; i < Y.size(); ++i)
    if (a * std::abs(Y[i]) >= 1e-10) out = r[i];
  return out;
}

void check_domain(const ExperimentConfig& cfg, const SpectralStage& st, double a) {
  const double need = data_radius(st.eigen.Y, a) + expected_exit(a, cfg.eta_max(), st.eigen.omega) + cfg.margin;
  if (!(cfg.r_max > need + 5.0))
    throw ConfigError("domain too small for a = " + fmt(a) + ": r_max = " + fmt(cfg.r_max) + " but the run needs more than " +
                      fmt(need + 5.0));
}

}  // namespace

SweepRecord run_amplitude(const ExperimentConfig& cfg, const SpectralStage& st, double a, RunTrace* trace) {
  check_domain(cfg, st, a);
  const RadialField& W = st.ground.W;
  const RadialField& Y = st.eigen.Y;
  const double omega = st.eigen.omega;
  const int dim = cfg.dim;
  const auto ex = CriticalExponents::for_dim(dim);
  const Exterior ext = ground_state_exterior(*st.grid);

  SweepRecord rec;
  rec.a = a;
  const double E_W = energy(make_state(W, RadialField(st.grid), ext));
  WaveState s0 = make_state(W - a * Y, RadialField(st.grid), ext);
  rec.eps_sq = E_W - energy(s0);
  rec.eps = rec.eps_sq > 0.0 ? std::sqrt(rec.eps_sq) : 0.0;

  const Decomposer dec(W, Y, st.ground.W0);
  ModulationTrace mt;
  const double eta_max = cfg.eta_max();
  std::optional<double> crossed;
  auto observer = [&](const WaveState& s) {
    const Decomposition d = dec(s);
    mt.push(s.t, d);
    if (!crossed && std::abs(d.beta) >= eta_max) crossed = s.t;
    return !(crossed && s.t >= *crossed + cfg.margin);
  };
  EvolveOptions eo;
  eo.sample_interval = cfg.sample_interval;
  eo.dt = cfg.dt;
  eo.stepper.cfl = cfg.cfl;
  const double t_cap = 2.0 * expected_exit(a, eta_max, omega) + cfg.margin + 5.0;
  auto res = evolve(std::move(s0), t_cap, eo, &W, st.ground.integrals.grad_W_sq, observer);
  const EvolveLog& log = res.log;

  rec.beta0 = mt.beta.front();
  rec.dt = log.dt;
  rec.steps = log.steps;
  rec.t_end = log.times.back();
  rec.threshold_violations = log.threshold_violations;
  const double e0 = log.energy.front();
  for (double e : log.energy) rec.energy_drift = std::max(rec.energy_drift, std::abs(e - e0) / std::abs(e0));

  const double q = ex.snorm_power;
  for (double eta : cfg.etas) {
    EtaResult er;
    er.eta = eta;
    er.exit_time = exit_time(mt, eta);
    if (er.exit_time) {
      er.s_window = 2.0 * s_norm_window(log, 0.0, *er.exit_time);
      er.h_snorm = std::pow(h_norm_window(log, 0.0, *er.exit_time), 1.0 / q);
    }
    rec.per_eta.push_back(er);
  }

  std::string status;
  if (!(rec.eps_sq > 0.0)) status = "failed: data not below the threshold energy (eps^2 = " + fmt(rec.eps_sq) + ")";
  else if (log.blew_up) status = "failed: blow-up guard tripped at t = " + fmt(log.blowup_time);
  else if (rec.energy_drift > cfg.energy_drift_tol) status = "failed: energy drift " + fmt(rec.energy_drift);
  else if (rec.threshold_violations > 0) status = "failed: |grad u| reached |grad W| (resolution failure)";
  else {
    for (const auto& er : rec.per_eta)
      if (!er.exit_time) {
        status = "failed: no exit for eta = " + fmt(er.eta);
        break;
      }
  }
  if (status.empty()) {
    try {
      rec.fit = growth_fit(mt, cfg.eta_fit, omega);
      rec.fit.initial_bound = (mt.dh_norm.front() + rec.eps) / std::abs(mt.beta.front());
      for (std::size_t k = 0; k < mt.size() && mt.times[k] <= rec.fit.exit_time; ++k)
        rec.gamma0_ratio = std::max(rec.gamma0_ratio, std::abs(mt.gamma0[k]) / std::abs(mt.beta[k]));
    } catch (const NumericalError& e) {
      status = std::string("failed: ") + e.what();
    }
  }
  rec.status = status.empty() ? "ok" : status;

  if (trace) {
    trace->a = a;
    trace->modulation = std::move(mt);
    trace->energy = log.energy;
    trace->s_accum = log.s_accum;
    trace->h1_dev = log.h1_dev;
  }
  return rec;
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  SweepResult out;
  out.config = cfg;
  out.constants = constants_report(cfg.dim, cfg.r_max, cfg.m, cfg.stretch);
  const SpectralStage st = run_spectral(cfg);
  out.spectral = st.report;
  for (double a : cfg.amplitudes) check_domain(cfg, st, a);

  const std::size_t n = cfg.amplitudes.size();
  std::vector<SweepRecord> records(n);
  std::vector<RunTrace> traces(n);
  std::size_t workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr fatal;
  auto work = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        records[i] = run_amplitude(cfg, st, cfg.amplitudes[i], &traces[i]);
      } catch (const ConfigError&) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!fatal) fatal = std::current_exception();
      } catch (const Error& e) {
        records[i].a = cfg.amplitudes[i];
        records[i].status = std::string("failed: ") + e.what();
        traces[i].a = cfg.amplitudes[i];
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (fatal) std::rethrow_exception(fatal);

  // Gather in decreasing a, independent of scheduling.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return records[x].a > records[y].a; });
  for (std::size_t i : order) {
    out.records.push_back(std::move(records[i]));
    out.traces.push_back(std::move(traces[i]));
  }
  const auto valid = std::count_if(out.records.begin(), out.records.end(), [](const SweepRecord& r) { return r.valid(); });
  if (valid < 4)
    throw NumericalError("sweep: only " + std::to_string(valid) + " valid runs, the fit needs at least 4");
  out.fits = fit_log_law(out.records, cfg.etas, cfg.dim, out.spectral.omega, out.spectral.snorm_pow);
  return out;
}

// ---------------------------------------------------------------------------

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw NumericalError("least_squares: length mismatch");
  const std::size_t n = x.size();
  if (n < 4) throw NumericalError("least_squares: need at least 4 points, got " + std::to_string(n));
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (!(*hi - *lo > 1e-12 * std::max(std::abs(*lo), std::abs(*hi))) || sxx == 0.0)
    throw NumericalError("least_squares: degenerate regressor (all x equal)");
  LineFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += e * e;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

std::vector<LawFit> fit_log_law(const std::vector<SweepRecord>& records, const std::vector<double>& etas, int dim,
                                double omega, double snorm_pow) {
  if (records.empty()) throw NumericalError("fit_log_law: no records");
  const double q = CriticalExponents::for_dim(dim).snorm_power;
  const double w_norm = std::pow(snorm_pow, 1.0 / q);
  std::vector<LawFit> out;
  for (double eta : etas) {
    std::vector<double> x, T, S;
    std::vector<const SweepRecord*> used;
    for (const auto& r : records) {
      const EtaResult* e = r.at_eta(eta);
      if (!r.valid() || !e || !e->exit_time || !(r.eps > 0.0)) continue;
      x.push_back(std::abs(std::log(r.eps)));
      T.push_back(*e->exit_time);
      S.push_back(e->s_window);
      used.push_back(&r);
    }
    LawFit f;
    f.eta = eta;
    f.T = least_squares(x, T);
    f.S = least_squares(x, S);
    f.predicted_T = 1.0 / omega;
    f.predicted_S = 2.0 / omega * snorm_pow;
    f.rel_dev_T = f.T.slope / f.predicted_T - 1.0;
    f.rel_dev_S = f.S.slope / f.predicted_S - 1.0;
    for (const SweepRecord* r : used) {
      const EtaResult* e = r->at_eta(eta);
      f.band_C = std::max(f.band_C, e->h_snorm / (eta * std::pow(*e->exit_time, 1.0 / q)));
    }
    f.band_ok = true;
    for (const SweepRecord* r : used) {
      const EtaResult* e = r->at_eta(eta);
      const double per_time = e->s_window / (2.0 * *e->exit_time);
      const double lo = std::pow(std::max(w_norm - f.band_C * eta, 0.0), q);
      const double hi = std::pow(w_norm + f.band_C * eta, q);
      if (per_time < lo || per_time > hi) f.band_ok = false;
    }
    out.push_back(f);
  }
  return out;
}

}  // namespace critwave
