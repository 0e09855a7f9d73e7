#pragma once

// Threshold sweep: u0 = W - a Y, u1 = 0 for a list of amplitudes, exit
// times and windowed S-norms per eta, and the log-law fits against |log eps|.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ground_state.hpp"
#include "modulation.hpp"
#include "spectral.hpp"
#include "wave_evolver.hpp"

namespace critwave {

struct ExperimentConfig {
  int dim = 3;
  double r_max = 120.0;
  std::size_t m = 4096;
  double stretch = 6.0;
  double cfl = 0.5;
  double dt = 0.0;  // 0: largest CFL-admissible step
  double sample_interval = 0.01;
  std::vector<double> amplitudes;  // strictly decreasing, positive
  std::vector<double> etas{0.02, 0.05, 0.1};
  double eta_fit = 0.05;
  double margin = 0.5;  // time evolved past the last exit
  double energy_drift_tol = 1e-6;
  std::uint64_t seed = 20240611;
  std::size_t coercivity_samples = 1000;
  std::string out_dir = "critwave-out";
  std::size_t threads = 0;  // 0: hardware concurrency
  bool write_traces = true;

  // Geometric amplitudes from 1e-2 down to 10^-4.5, six points.
  static std::vector<double> default_amplitudes();
  static ExperimentConfig defaults();

  double eta_max() const;
  // Throws ConfigError on any violated invariant.
  void validate() const;
};

// Flat "key = value" text with '#' comments. Lists are comma separated.
// Amplitudes may also be given as a_max, a_min, a_count (geometric).
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
// Canonical text form; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const ExperimentConfig& c);

struct ConstantsReport {
  int dim = 3;
  double r_max = 0;
  std::size_t m = 0;
  double stretch = 0;
  CriticalIntegrals integrals;
  double a_norm = 0;
  double stationarity_residual = 0;         // flux-free second-order finite differences
  double stationarity_residual_fourth = 0;  // fourth-order finite differences
  double pohozaev_defect = 0;               // int |grad W|^2 / int W^{2N/(N-2)} - 1
  double energy_identity_defect = 0;        // E(W,0) / (int |grad W|^2 / N) - 1
  double snorm_pow_beta = 0;
  double snorm_pow_nls_beta = 0;
  double crit_pow_beta = 0;
  double snorm_pow_factorial = 0;  // printed closed form, lacks the angular factor
  double factorial_to_beta_ratio = 0;
};

ConstantsReport constants_report(int dim, double r_max, std::size_t m, double stretch);

struct SpectralLevel {
  std::size_t m = 0;
  double omega = 0;
  double omega_tilde = 0;
  double theorem1_constant = 0;
  double theorem2_constant = 0;
  double kernel_scaling = 0;
  double kernel_phase = 0;
};

struct SpectralReport {
  int dim = 3;
  double omega = 0;
  double omega_cross_check = 0;
  std::string method;
  std::string cross_check_method;
  double eigen_residual = 0;
  double cross_check_residual = 0;
  std::size_t negative_count = 0;
  double second_eigenvalue = 0;
  double Y_W0 = 0;
  double Q_of_Y = 0;
  double Q_of_W0 = 0;
  double c_Q_estimate = 0;
  std::uint64_t seed = 0;
  std::size_t coercivity_samples = 0;
  std::size_t coercivity_excluded = 0;
  double omega_tilde = 0;
  double nls_residual = 0;
  double nls_consistency = 0;
  double m_norm = 0;
  double B_plus_minus = 0;
  double B_plus_plus = 0;
  double B_minus_minus = 0;
  double snorm_pow = 0;
  double snorm_pow_nls = 0;
  double theorem1_constant = 0;  // (2/omega) int W^{2(N+1)/(N-2)}
  double theorem2_constant = 0;  // (2/omega_t) int W^{2(N+2)/(N-2)}
  SpectralLevel fine;
  SpectralLevel coarse;  // half the nodes, same domain
};

// Everything the sweep needs from the stationary problem.
struct SpectralStage {
  GridPtr grid;
  GroundStateBundle ground;
  EigenPair eigen;
  SpectralReport report;
};

struct SpectralOptions {
  bool nls = true;
  bool coercivity = true;
  bool coarse_level = true;
};

SpectralStage run_spectral(const ExperimentConfig& cfg, const SpectralOptions& opts = {});

struct EtaResult {
  double eta = 0;
  std::optional<double> exit_time;
  double s_window = 0;  // 2 int_0^T int |u|^{2(N+1)/(N-2)}
  double h_snorm = 0;   // |u - W|_{S(0,T)}
};

struct SweepRecord {
  double a = 0;
  double beta0 = 0;
  double eps_sq = 0;
  double eps = 0;
  std::vector<EtaResult> per_eta;
  ModulationFit fit;  // at eta_fit
  double energy_drift = 0;
  double gamma0_ratio = 0;  // max |gamma0| / |beta| before the fit exit
  double t_end = 0;
  double dt = 0;
  std::size_t steps = 0;
  std::size_t threshold_violations = 0;
  std::string status = "ok";

  bool valid() const noexcept { return status == "ok"; }
  const EtaResult* at_eta(double eta) const noexcept;
};

struct RunTrace {
  double a = 0;
  ModulationTrace modulation;
  std::vector<double> energy;
  std::vector<double> s_accum;
  std::vector<double> h1_dev;
};

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
  std::size_t points = 0;
};

// Ordinary least squares; NumericalError on fewer than 4 points or a
// degenerate regressor.
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct LawFit {
  double eta = 0;
  LineFit T;  // exit time against |log eps|
  LineFit S;  // s_window against |log eps|
  double predicted_T = 0;  // 1/omega
  double predicted_S = 0;  // (2/omega) int W^{2(N+1)/(N-2)}
  double rel_dev_T = 0;
  double rel_dev_S = 0;
  double band_C = 0;  // max over records of |h|_{S(0,T)} / (eta T^{(N-2)/(2(N+1))})
  bool band_ok = false;
};

std::vector<LawFit> fit_log_law(const std::vector<SweepRecord>& records, const std::vector<double>& etas,
                                int dim, double omega, double snorm_pow);

struct SweepResult {
  ExperimentConfig config;
  ConstantsReport constants;
  SpectralReport spectral;
  std::vector<SweepRecord> records;  // sorted by decreasing a
  std::vector<RunTrace> traces;      // same order
  std::vector<LawFit> fits;          // one per eta
};

// One amplitude run.
SweepRecord run_amplitude(const ExperimentConfig& cfg, const SpectralStage& stage, double a,
                          RunTrace* trace = nullptr);

// Throws ConfigError for an invalid config or an undersized domain, and
// NumericalError when fewer than 4 runs are valid.
SweepResult run_sweep(const ExperimentConfig& cfg);

}  // namespace critwave
