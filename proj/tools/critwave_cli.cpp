// Command-line front end. Talks to the library through the C interface only.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "critwave/critwave.h"

namespace {

struct StrFree {
  void operator()(char* s) const { cw_string_free(s); }
};
using CwString = std::unique_ptr<char, StrFree>;

struct ConfigFree {
  void operator()(cw_config* c) const { cw_config_destroy(c); }
};
struct SweepFree {
  void operator()(cw_sweep* s) const { cw_sweep_destroy(s); }
};

int report(cw_status s) {
  if (s != CW_OK) std::cerr << "critwave: " << cw_last_error() << "\n";
  return static_cast<int>(s);
}

// Writes text to path, or stdout when path is empty.
int emit(const char* text, const std::string& path) {
  if (path.empty()) {
    std::fputs(text, stdout);
    return 0;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) {
    std::cerr << "critwave: cannot write '" << path << "'\n";
    return CW_ERR_IO;
  }
  return 0;
}

cw_status load(const std::string& path, std::unique_ptr<cw_config, ConfigFree>& out) {
  cw_config* c = nullptr;
  cw_status s = path.empty() ? cw_config_default(&c) : cw_config_load(path.c_str(), &c);
  out.reset(c);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Threshold dynamics lab for the energy-critical focusing wave equation"};
  app.set_version_flag("--version", std::string(cw_version()));
  app.require_subcommand(1);

  int dim = 3;
  double r_max = 120.0, stretch = 6.0;
  std::size_t m = 4096;
  std::string output;
  auto* constants = app.add_subcommand("constants", "ground-state integrals and identity checks as JSON");
  constants->add_option("--dim", dim, "space dimension (3, 4 or 5)")->capture_default_str();
  constants->add_option("--r-max", r_max, "outer radius of the grid")->capture_default_str();
  constants->add_option("--m", m, "number of grid intervals")->capture_default_str();
  constants->add_option("--stretch", stretch, "sinh stretching parameter")->capture_default_str();
  constants->add_option("-o,--output", output, "write JSON here instead of stdout");

  std::string spec_config;
  auto* spectrum = app.add_subcommand("spectrum", "spectral constants (omega, coercivity, NLS pair) as JSON");
  spectrum->add_option("--config", spec_config, "config file supplying dim and grid (defaults otherwise)")
      ->check(CLI::ExistingFile);
  spectrum->add_option("-o,--output", output, "write JSON here instead of stdout");

  std::string sweep_config, out_dir;
  std::size_t threads = 0;
  bool threads_set = false;
  auto* sweep = app.add_subcommand("sweep", "run the threshold sweep and write summary.json, report.md, traces");
  sweep->add_option("--config", sweep_config, "config file (key = value)")->required();
  sweep->add_option("--out", out_dir, "output directory, overrides out_dir from the config");
  sweep->add_option_function<std::size_t>(
      "--threads", [&](const std::size_t& n) { threads = n, threads_set = true; }, "worker threads, 0 for all cores");

  std::string records;
  auto* fit = app.add_subcommand("fit", "re-fit the records of an existing summary.json");
  fit->add_option("--records", records, "summary.json from a previous sweep")->required();
  fit->add_option("-o,--output", output, "write JSON here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : CW_ERR_CONFIG;
  }

  if (*constants) {
    char* text = nullptr;
    if (cw_status s = cw_constants_json(dim, r_max, m, stretch, &text); s != CW_OK) return report(s);
    CwString owned(text);
    return emit(text, output);
  }

  if (*spectrum) {
    std::unique_ptr<cw_config, ConfigFree> cfg;
    if (cw_status s = load(spec_config, cfg); s != CW_OK) return report(s);
    char* text = nullptr;
    if (cw_status s = cw_spectrum_json(cfg.get(), &text); s != CW_OK) return report(s);
    CwString owned(text);
    return emit(text, output);
  }

  if (*sweep) {
    std::unique_ptr<cw_config, ConfigFree> cfg;
    if (cw_status s = load(sweep_config, cfg); s != CW_OK) return report(s);
    if (!out_dir.empty())
      if (cw_status s = cw_config_set_out_dir(cfg.get(), out_dir.c_str()); s != CW_OK) return report(s);
    if (threads_set)
      if (cw_status s = cw_config_set_threads(cfg.get(), threads); s != CW_OK) return report(s);
    char* dir = nullptr;
    if (cw_status s = cw_config_out_dir(cfg.get(), &dir); s != CW_OK) return report(s);
    CwString dir_owned(dir);

    cw_sweep* raw = nullptr;
    if (cw_status s = cw_sweep_run(cfg.get(), &raw); s != CW_OK) return report(s);
    std::unique_ptr<cw_sweep, SweepFree> result(raw);
    if (cw_status s = cw_sweep_write(result.get(), dir); s != CW_OK) return report(s);

    std::size_t nrec = 0, nfit = 0;
    cw_sweep_record_count(result.get(), &nrec);
    cw_sweep_fit_count(result.get(), &nfit);
    std::printf("%zu runs, results in %s\n", nrec, dir);
    std::printf("%8s %12s %12s %10s %12s %12s %10s\n", "eta", "slope_T", "1/omega", "r2_T", "slope_S", "predicted_S",
                "r2_S");
    for (std::size_t k = 0; k < nfit; ++k) {
      cw_law_fit f{};
      if (cw_sweep_fit(result.get(), k, &f) != CW_OK) continue;
      std::printf("%8.3g %12.6f %12.6f %10.6f %12.5f %12.5f %10.6f\n", f.eta, f.slope_T, f.predicted_T,
                  f.r_squared_T, f.slope_S, f.predicted_S, f.r_squared_S);
    }
    return 0;
  }

  if (*fit) {
    char* text = nullptr;
    if (cw_status s = cw_fit_summary_file(records.c_str(), &text); s != CW_OK) return report(s);
    CwString owned(text);
    return emit(text, output);
  }
  return 0;
}
